//! Weak-closure machinery: greedy expansions of integers along the tower
//! heights, classification of digit patterns into limit operators, witness
//! sequences realizing a prescribed limit, and the audit ruling out
//! intermediate mixtures of the identity and the ortho-projector.
//!
//! Every weak limit of powers is either the ortho-projector to constants or
//! an atomic operator sum_j nu(j) T^j with nu a probability measure built
//! from convolutions of the polynomial family and a shift. A `LimitOperator`
//! stores nu together with the complementary mass assigned to the
//! ortho-projector. The classifier maps the digit-wise limit pattern of a
//! sequence k_j (expanded greedily along the heights) to its operator: an
//! eventually-zero pattern factors through the head's value, an eventually-2
//! pattern leaves a growing residual power that the pattern alone does not
//! determine, and a tail with infinitely many digits different from 0 and
//! from 2 forces the ortho-projector.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exec;
use crate::mass::MassFunction;
use crate::polyengine::pm;
use crate::towers::height;

/// Digit-wise limit of greedy expansions: a finite head (alpha_0 ... alpha_r,
/// indexed from the leading scale) and a tail law.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitPattern {
    pub head: Vec<u8>,
    pub tail: PatternTail,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternTail {
    AllZero,
    AllTwo,
    /// Eventually periodic tail whose period certifies, syntactically, a
    /// digit different from 0 and a digit different from 2.
    Mixed {
        period: Vec<u8>,
    },
}

impl DigitPattern {
    pub fn new(head: Vec<u8>, tail: PatternTail) -> Result<Self> {
        let p = DigitPattern { head, tail };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if self.head.is_empty() {
            return Err(Error::InvalidPattern("head must be nonempty".into()));
        }
        if self.head[0] == 0 {
            return Err(Error::InvalidPattern(
                "leading digit must be nonzero".into(),
            ));
        }
        if self.head.iter().any(|&d| d > 3) {
            return Err(Error::InvalidPattern(
                "head digits must lie in 0..=3".into(),
            ));
        }
        if let Some(pos) = self.head.iter().position(|&d| d == 3) {
            let later_zero = self.head[pos + 1..].iter().all(|&d| d == 0);
            if !later_zero || self.tail != PatternTail::AllZero {
                return Err(Error::InvalidPattern(
                    "a digit 3 forces all later digits to be 0".into(),
                ));
            }
        }
        if let PatternTail::Mixed { period } = &self.tail {
            if period.is_empty() || period.iter().any(|&d| d > 2) {
                return Err(Error::InvalidPattern(
                    "mixed period must be nonempty with digits in 0..=2".into(),
                ));
            }
            if !period.iter().any(|&d| d != 0) || !period.iter().any(|&d| d != 2) {
                return Err(Error::InvalidPattern(
                    "mixed period must contain a digit != 0 and a digit != 2".into(),
                ));
            }
        }
        Ok(())
    }

    /// Parse the command syntax `head=1,1 tail=zero|two|mixed:1,0`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut head = None;
        let mut tail = None;
        for token in s.split_whitespace() {
            if let Some(list) = token.strip_prefix("head=") {
                head = Some(parse_digit_list(list)?);
            } else if let Some(t) = token.strip_prefix("tail=") {
                tail = Some(match t {
                    "zero" => PatternTail::AllZero,
                    "two" => PatternTail::AllTwo,
                    other => match other.strip_prefix("mixed:") {
                        Some(p) => PatternTail::Mixed {
                            period: parse_digit_list(p)?,
                        },
                        None => {
                            return Err(Error::InvalidPattern(format!("unknown tail {other:?}")))
                        }
                    },
                });
            } else {
                return Err(Error::InvalidPattern(format!("unknown token {token:?}")));
            }
        }
        let head = head.ok_or_else(|| Error::InvalidPattern("missing head=".into()))?;
        let tail = tail.ok_or_else(|| Error::InvalidPattern("missing tail=".into()))?;
        DigitPattern::new(head, tail)
    }

    /// The digit at pattern position l (head, then the tail law).
    fn digit(&self, l: usize) -> u8 {
        if l < self.head.len() {
            return self.head[l];
        }
        match &self.tail {
            PatternTail::AllZero => 0,
            PatternTail::AllTwo => 2,
            PatternTail::Mixed { period } => period[(l - self.head.len()) % period.len()],
        }
    }
}

fn parse_digit_list(s: &str) -> Result<Vec<u8>> {
    s.split(',')
        .map(|d| {
            d.trim()
                .parse::<u8>()
                .map_err(|_| Error::InvalidPattern(format!("bad digit {d:?}")))
        })
        .collect()
}

/// An element of the weak closure: nu gives the atomic part
/// sum_j nu(j) T^j, and the remaining mass goes to the ortho-projector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LimitOperator {
    nu: MassFunction,
    theta_mass: BigRational,
}

impl LimitOperator {
    /// Operator with atomic part nu; the projector receives 1 - nu(Z).
    pub fn from_nu(nu: MassFunction) -> Self {
        let total = nu.total_mass();
        assert!(
            !total.is_negative() && total <= BigRational::one(),
            "atomic mass must lie in [0, 1]"
        );
        LimitOperator {
            theta_mass: BigRational::one() - total,
            nu,
        }
    }

    /// The ortho-projector to constants.
    pub fn theta() -> Self {
        LimitOperator {
            nu: MassFunction::zero(),
            theta_mass: BigRational::one(),
        }
    }

    pub fn nu(&self) -> &MassFunction {
        &self.nu
    }

    pub fn theta_mass(&self) -> &BigRational {
        &self.theta_mass
    }

    pub fn is_theta(&self) -> bool {
        self.theta_mass.is_one()
    }
}

impl fmt::Display for LimitOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_theta() {
            write!(f, "Theta")
        } else if self.theta_mass.is_zero() {
            write!(f, "atoms {}", self.nu)
        } else {
            write!(
                f,
                "atoms {} + theta {}/{}",
                self.nu,
                self.theta_mass.numer(),
                self.theta_mass.denom()
            )
        }
    }
}

/// Greedy expansion of an integer along the tower heights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expansion {
    /// Index of the leading scale: h_top <= k < h_{top+1}.
    pub top: u32,
    /// Digits alpha_0 ... alpha_top, leading scale first, each in 0..=3.
    pub digits: Vec<u8>,
}

impl Expansion {
    pub fn value(&self) -> u64 {
        self.digits
            .iter()
            .enumerate()
            .map(|(l, &d)| u64::from(d) * height(self.top - l as u32))
            .sum()
    }
}

/// Expand k >= 1 greedily along the heights. The leading digit is nonzero,
/// digits lie in 0..=3, and a digit 3 is followed by zeros only.
pub fn greedy_expand(k: u64) -> Result<Expansion> {
    if k == 0 {
        return Err(Error::InvalidPattern("cannot expand 0".into()));
    }
    let mut top = 0u32;
    while top < 39 && height(top + 1) <= k {
        top += 1;
    }
    let mut digits = Vec::with_capacity(top as usize + 1);
    let mut rem = k;
    for l in 0..=top {
        let h = height(top - l);
        digits.push((rem / h) as u8);
        rem %= h;
    }
    debug_assert_eq!(rem, 0);
    let e = Expansion { top, digits };
    debug_assert_eq!(e.value(), k);
    Ok(e)
}

/// Collapse head digits (alpha_0 ... alpha_r) to the pair (m, u) with
/// sum_l alpha_l h_{n-l} = m h_{n-r} + u for every n >= r:
/// m = sum alpha_l 3^(r-l) and u = sum_{l<r} alpha_l h_{r-1-l}.
pub fn m_u_reduce(head: &[u8]) -> Result<(u64, u64)> {
    assert!(!head.is_empty(), "head must be nonempty");
    let r = head.len() - 1;
    let mut m = 0u64;
    for &d in head {
        m = m
            .checked_mul(3)
            .and_then(|x| x.checked_add(u64::from(d)))
            .ok_or(Error::Overflow("m in head reduction"))?;
    }
    let mut u = 0u64;
    for (l, &d) in head[..r].iter().enumerate() {
        let term = u64::from(d)
            .checked_mul(height((r - 1 - l) as u32))
            .ok_or(Error::Overflow("u in head reduction"))?;
        u = u
            .checked_add(term)
            .ok_or(Error::Overflow("u in head reduction"))?;
    }
    Ok((m, u))
}

/// The operator lim T^(-k_j) for k_j realizing the product
/// P_{m_1}(T) ... P_{m_r}(T) T^n: the atomic part is the convolution of the
/// family members, shifted by n. An empty list gives the pure power T^n.
pub fn product_limit(ms: &[u64], n: i64) -> LimitOperator {
    assert!(ms.iter().all(|&m| m >= 1), "factors must be >= 1");
    let mut nu = MassFunction::unit_atom(n);
    for &m in ms {
        nu = nu.convolve(&pm(m));
    }
    LimitOperator::from_nu(nu)
}

/// Outcome of classifying a digit pattern or a sampled sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Classification {
    Theta,
    Operator(LimitOperator),
    /// An eventually-2 tail absorbs into the head as a known polynomial
    /// factor, but leaves the limit of an unboundedly growing power that
    /// the pattern does not pin down.
    UnderDetermined {
        determined: MassFunction,
    },
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Classification::Theta => write!(f, "Theta"),
            Classification::Operator(op) => write!(f, "{op}"),
            Classification::UnderDetermined { determined } => write!(
                f,
                "UnderDetermined: factor atoms {determined} times an unresolved growing power"
            ),
        }
    }
}

/// Classify a digit pattern.
///
/// * Mixed tail: the ortho-projector.
/// * All-zero tail: the head reduces to (m, u) and the limit is
///   P_m(T) T^-u, i.e. nu = pi_m shifted by -u.
/// * All-two tail: the tail telescopes into an increment of the head's last
///   digit and a residual power whose exponent grows with the scale; the
///   determined factor is reported and the rest marked under-determined.
pub fn classify(p: &DigitPattern) -> Result<Classification> {
    p.validate()?;
    match &p.tail {
        PatternTail::Mixed { .. } => Ok(Classification::Theta),
        PatternTail::AllZero => {
            let (m, u) = m_u_reduce(&p.head)?;
            let shift = -i64::try_from(u).map_err(|_| Error::Overflow("pattern shift"))?;
            Ok(Classification::Operator(LimitOperator::from_nu(
                pm(m).shift(shift),
            )))
        }
        PatternTail::AllTwo => {
            let (m, u) = m_u_reduce(&p.head)?;
            // 2(h_{t-1} + ... + h_0) = h_t - 1 - t, so the tail increments
            // the reduced order and contributes T^(1-u) times a power whose
            // exponent t grows with the leading scale.
            let shift = 1 - i64::try_from(u).map_err(|_| Error::Overflow("pattern shift"))?;
            Ok(Classification::UnderDetermined {
                determined: pm(m + 1).shift(shift),
            })
        }
    }
}

/// Realize the pattern's digits at leading scale `top`:
/// sum_l alpha_l h_{top-l} over 0 <= l <= top.
pub fn realize(p: &DigitPattern, top: u32) -> Result<u64> {
    p.validate()?;
    if (top as usize) + 1 < p.head.len() {
        return Err(Error::InvalidPattern(
            "leading scale smaller than the head".into(),
        ));
    }
    let mut k: u64 = 0;
    for l in 0..=top {
        let term = u64::from(p.digit(l as usize))
            .checked_mul(height(top - l))
            .ok_or(Error::Overflow("pattern realization"))?;
        k = k
            .checked_add(term)
            .ok_or(Error::Overflow("pattern realization"))?;
    }
    Ok(k)
}

/// An explicit sequence j -> k_j with lim T^(-k_j) = P_{m_1}(T)...P_{m_r}(T) T^n.
/// Scales separate geometrically: the i-th factor sits at scale (r-i+1) j,
/// so each residual is vanishingly small next to its leading height.
pub fn synthesize_sequence(ms: &[u64], n: i64, j: u64) -> Result<u64> {
    assert!(ms.iter().all(|&m| m >= 1), "factors must be >= 1");
    assert!(j >= 1, "index must be >= 1");
    let r = ms.len() as u64;
    let mut k: i128 = -i128::from(n);
    for (idx, &m) in ms.iter().enumerate() {
        let scale = (r - idx as u64) * j;
        let scale = u32::try_from(scale).map_err(|_| Error::Overflow("synthesis scale"))?;
        if scale > 39 {
            return Err(Error::Overflow("synthesis scale"));
        }
        k += i128::from(m) * i128::from(height(scale));
    }
    if k <= 0 {
        return Err(Error::IncreaseJ);
    }
    u64::try_from(k).map_err(|_| Error::Overflow("synthesized index"))
}

/// Classify a sequence from finitely many samples k_{j_1} < ... (increasing
/// scales), by peeling stable digit bands: the digits shared by all samples
/// at fixed distance from the top form the head of the current factor; the
/// remainder is a smaller sequence, classified recursively. A constant
/// remainder is a pure shift.
pub fn classify_samples(ks: &[u64]) -> Result<Classification> {
    assert!(ks.len() >= 2, "need at least two samples");
    classify_samples_inner(ks, 0)
}

fn classify_samples_inner(ks: &[u64], depth: u32) -> Result<Classification> {
    if depth > 64 {
        return Err(Error::UnstableSequence("band recursion too deep".into()));
    }
    if ks.iter().all(|&k| k == ks[0]) {
        let shift = -i64::try_from(ks[0]).map_err(|_| Error::Overflow("shift"))?;
        return Ok(Classification::Operator(LimitOperator::from_nu(
            MassFunction::unit_atom(shift),
        )));
    }
    if ks.contains(&0) {
        return Err(Error::UnstableSequence(
            "zero sample next to nonzero samples".into(),
        ));
    }
    let expansions: Vec<Expansion> = ks
        .iter()
        .map(|&k| greedy_expand(k))
        .collect::<Result<_>>()?;
    let max_len = expansions.iter().map(|e| e.digits.len()).max().unwrap();
    let digit_at = |e: &Expansion, l: usize| e.digits.get(l).copied().unwrap_or(0);
    let mut cp = max_len;
    'outer: for l in 0..max_len {
        let d = digit_at(&expansions[0], l);
        for e in &expansions[1..] {
            if digit_at(e, l) != d {
                cp = l;
                break 'outer;
            }
        }
    }
    let mut head: Vec<u8> = expansions[0].digits[..cp.min(expansions[0].digits.len())].to_vec();
    while head.last() == Some(&0) {
        head.pop();
    }
    if head.is_empty() {
        return Err(Error::UnstableSequence(
            "samples disagree at the leading scale".into(),
        ));
    }
    let (m, u) = m_u_reduce(&head)?;
    let shift = -i64::try_from(u).map_err(|_| Error::Overflow("band shift"))?;
    let factor = pm(m).shift(shift);

    let residuals: Vec<u64> = expansions
        .iter()
        .map(|e| {
            let consumed: u64 = head
                .iter()
                .enumerate()
                .map(|(l, &d)| u64::from(d) * height(e.top - l as u32))
                .sum();
            e.value() - consumed
        })
        .collect();
    if residuals.iter().all(|&r| r == 0) {
        return Ok(Classification::Operator(LimitOperator::from_nu(factor)));
    }
    match classify_samples_inner(&residuals, depth + 1)? {
        Classification::Theta => Ok(Classification::Theta),
        Classification::Operator(op) => Ok(Classification::Operator(LimitOperator::from_nu(
            factor.convolve(op.nu()),
        ))),
        Classification::UnderDetermined { determined } => Ok(Classification::UnderDetermined {
            determined: factor.convolve(&determined),
        }),
    }
}

/// Structural audit of the enumerated closure elements: every product of
/// family members is a probability with at least two atoms, none of mass 1.
/// An operator of the form alpha Theta + (1-alpha) Id with 0 < alpha < 1
/// would need a single atom of mass strictly between 0 and 1 next to
/// positive projector mass; the audit certifies no enumerated element looks
/// like that. Shifts move atoms without changing their masses, so the audit
/// is shift-invariant and enumerates none.
#[derive(Debug, Clone)]
pub struct AuditReport {
    pub r_max: u32,
    pub m_max: u64,
    pub products: u64,
    pub min_atom_count: usize,
    pub max_sup_atom: BigRational,
    pub max_sup_witness: Vec<u64>,
    pub all_probability: bool,
    pub pass: bool,
}

pub fn audit_alpha_weak_mixing(r_max: u32, m_max: u64) -> AuditReport {
    assert!(r_max >= 1 && m_max >= 1);
    struct Acc {
        products: u64,
        min_atoms: usize,
        max_sup: BigRational,
        witness: Vec<u64>,
        all_prob: bool,
    }
    impl Acc {
        fn new() -> Self {
            Acc {
                products: 0,
                min_atoms: usize::MAX,
                max_sup: BigRational::zero(),
                witness: Vec::new(),
                all_prob: true,
            }
        }
        fn record(&mut self, nu: &MassFunction, tuple: &[u64]) {
            self.products += 1;
            self.all_prob &= nu.is_probability();
            self.min_atoms = self.min_atoms.min(nu.support_len());
            let sup = nu.sup_atom();
            if sup > self.max_sup {
                self.max_sup = sup;
                self.witness = tuple.to_vec();
            }
        }
    }
    fn dfs(
        start: u64,
        m_max: u64,
        depth_left: u32,
        conv: &MassFunction,
        tuple: &mut Vec<u64>,
        acc: &mut Acc,
    ) {
        for m in start..=m_max {
            let next = conv.convolve(&pm(m));
            tuple.push(m);
            acc.record(&next, tuple);
            if depth_left > 1 {
                dfs(m, m_max, depth_left - 1, &next, tuple, acc);
            }
            tuple.pop();
        }
    }

    // Parallel over the pinned first factor; deeper factors are explored
    // sequentially inside each branch so prefix convolutions are reused.
    let branches = exec::map_range(m_max, |i| {
        let m1 = i + 1;
        let mut acc = Acc::new();
        let first = pm(m1);
        let mut tuple = vec![m1];
        acc.record(&first, &tuple);
        if r_max > 1 {
            dfs(m1, m_max, r_max - 1, &first, &mut tuple, &mut acc);
        }
        acc
    });

    let mut products = 0u64;
    let mut min_atoms = usize::MAX;
    let mut max_sup = BigRational::zero();
    let mut witness = Vec::new();
    let mut all_prob = true;
    for acc in branches {
        products += acc.products;
        min_atoms = min_atoms.min(acc.min_atoms);
        all_prob &= acc.all_prob;
        if acc.max_sup > max_sup {
            max_sup = acc.max_sup;
            witness = acc.witness;
        }
    }
    let pass = all_prob && min_atoms >= 2 && max_sup < BigRational::one();
    AuditReport {
        r_max,
        m_max,
        products,
        min_atom_count: min_atoms,
        max_sup_atom: max_sup,
        max_sup_witness: witness,
        all_probability: all_prob,
        pass,
    }
}

// --- serialization -----------------------------------------------------

#[derive(Serialize, Deserialize)]
struct RationalRepr {
    num: String,
    den: String,
}

impl From<&BigRational> for RationalRepr {
    fn from(r: &BigRational) -> Self {
        RationalRepr {
            num: r.numer().to_string(),
            den: r.denom().to_string(),
        }
    }
}

impl TryFrom<RationalRepr> for BigRational {
    type Error = String;
    fn try_from(r: RationalRepr) -> std::result::Result<Self, String> {
        let num: BigInt = r.num.parse().map_err(|e| format!("bad numerator: {e}"))?;
        let den: BigInt = r.den.parse().map_err(|e| format!("bad denominator: {e}"))?;
        if den.is_zero() {
            return Err("zero denominator".into());
        }
        Ok(BigRational::new(num, den))
    }
}

#[derive(Serialize, Deserialize)]
struct AtomRepr {
    j: i64,
    num: String,
    den: String,
}

#[derive(Serialize, Deserialize)]
struct LimitOperatorRepr {
    theta: RationalRepr,
    atoms: Vec<AtomRepr>,
}

impl Serialize for LimitOperator {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        LimitOperatorRepr {
            theta: (&self.theta_mass).into(),
            atoms: self
                .nu
                .iter()
                .map(|(j, m)| AtomRepr {
                    j: *j,
                    num: m.numer().to_string(),
                    den: m.denom().to_string(),
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for LimitOperator {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = LimitOperatorRepr::deserialize(deserializer)?;
        let mut nu = MassFunction::zero();
        for atom in repr.atoms {
            let mass = BigRational::try_from(RationalRepr {
                num: atom.num,
                den: atom.den,
            })
            .map_err(D::Error::custom)?;
            nu.add_mass(atom.j, mass);
        }
        let theta = BigRational::try_from(repr.theta).map_err(D::Error::custom)?;
        let op = LimitOperator::from_nu(nu);
        if op.theta_mass != theta {
            return Err(D::Error::custom("theta mass inconsistent with atoms"));
        }
        Ok(op)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mass::rational;

    #[test]
    fn greedy_expansion_examples() {
        let e = greedy_expand(45).unwrap();
        assert_eq!((e.top, e.digits.as_slice()), (3, &[1u8, 0, 1, 1][..]));
        let e = greedy_expand(height(5)).unwrap();
        assert_eq!((e.top, e.digits.as_slice()), (5, &[1u8, 0, 0, 0, 0, 0][..]));
        let e = greedy_expand(120).unwrap();
        assert_eq!((e.top, e.digits.as_slice()), (3, &[3u8, 0, 0, 0][..]));
        assert!(greedy_expand(0).is_err());
    }

    #[test]
    fn greedy_reconstruction_and_digit_three_rule() {
        for k in 1..=3000u64 {
            let e = greedy_expand(k).unwrap();
            assert_eq!(e.value(), k);
            assert!(e.digits[0] != 0);
            assert!(e.digits.iter().all(|&d| d <= 3));
            if let Some(pos) = e.digits.iter().position(|&d| d == 3) {
                assert!(e.digits[pos + 1..].iter().all(|&d| d == 0), "k={k}");
            }
        }
    }

    #[test]
    fn m_u_reduction_examples() {
        assert_eq!(m_u_reduce(&[1, 1]).unwrap(), (4, 1));
        assert_eq!(m_u_reduce(&[2]).unwrap(), (2, 0));
        assert_eq!(m_u_reduce(&[2, 1, 0]).unwrap(), (21, 9));
    }

    #[test]
    fn m_u_reduction_identity_over_scales() {
        for head in [
            vec![1u8],
            vec![1, 1],
            vec![2, 1, 0],
            vec![1, 0, 3],
            vec![2, 2, 3],
        ] {
            let (m, u) = m_u_reduce(&head).unwrap();
            let r = head.len() as u32 - 1;
            for n in r..r + 15 {
                let lhs: u64 = head
                    .iter()
                    .enumerate()
                    .map(|(l, &d)| u64::from(d) * height(n - l as u32))
                    .sum();
                assert_eq!(lhs, m * height(n - r) + u, "head {head:?} at n={n}");
            }
        }
    }

    #[test]
    fn product_limit_examples() {
        let op = product_limit(&[1], 0);
        assert_eq!(op.nu(), &pm(1));
        assert!(op.theta_mass().is_zero());

        let op = product_limit(&[], 5);
        assert_eq!(op.nu(), &MassFunction::unit_atom(5));

        let op = product_limit(&[1, 2], 0);
        assert_eq!(
            op.nu(),
            &MassFunction::from_atoms([
                (0, rational(1, 12)),
                (1, rational(5, 12)),
                (2, rational(5, 12)),
                (3, rational(1, 12)),
            ])
        );
    }

    #[test]
    fn classify_pattern_examples() {
        let p = DigitPattern::new(vec![1], PatternTail::AllZero).unwrap();
        assert_eq!(
            classify(&p).unwrap(),
            Classification::Operator(LimitOperator::from_nu(pm(1)))
        );

        let p = DigitPattern::new(vec![1, 1], PatternTail::AllZero).unwrap();
        assert_eq!(
            classify(&p).unwrap(),
            Classification::Operator(LimitOperator::from_nu(pm(4).shift(-1)))
        );

        let p = DigitPattern::new(vec![1], PatternTail::Mixed { period: vec![1, 0] }).unwrap();
        assert_eq!(classify(&p).unwrap(), Classification::Theta);
    }

    #[test]
    fn classify_all_two_reports_the_determined_factor() {
        // k_j = h_j + 2(h_{j-1} + ... + h_0) = 2 h_j - 1 - j, whose limit
        // factors as P_2(T) T^1 times an unbounded forward power.
        let p = DigitPattern::new(vec![1], PatternTail::AllTwo).unwrap();
        assert_eq!(
            classify(&p).unwrap(),
            Classification::UnderDetermined {
                determined: pm(2).shift(1)
            }
        );
    }

    #[test]
    fn invalid_patterns_are_rejected() {
        assert!(DigitPattern::new(vec![], PatternTail::AllZero).is_err());
        assert!(DigitPattern::new(vec![0, 1], PatternTail::AllZero).is_err());
        assert!(DigitPattern::new(vec![4], PatternTail::AllZero).is_err());
        assert!(DigitPattern::new(vec![1, 3, 1], PatternTail::AllZero).is_err());
        assert!(DigitPattern::new(vec![1, 3], PatternTail::AllTwo).is_err());
        assert!(DigitPattern::new(vec![1], PatternTail::Mixed { period: vec![] }).is_err());
        assert!(DigitPattern::new(vec![1], PatternTail::Mixed { period: vec![2, 2] }).is_err());
        assert!(DigitPattern::new(vec![1], PatternTail::Mixed { period: vec![0] }).is_err());
        assert!(DigitPattern::new(vec![1, 3, 0], PatternTail::AllZero).is_ok());
        assert!(DigitPattern::new(vec![1], PatternTail::Mixed { period: vec![0, 1] }).is_ok());
    }

    #[test]
    fn pattern_parsing() {
        assert_eq!(
            DigitPattern::parse("head=1,1 tail=zero").unwrap(),
            DigitPattern::new(vec![1, 1], PatternTail::AllZero).unwrap()
        );
        assert_eq!(
            DigitPattern::parse("tail=mixed:1,0 head=2").unwrap(),
            DigitPattern::new(vec![2], PatternTail::Mixed { period: vec![1, 0] }).unwrap()
        );
        assert_eq!(
            DigitPattern::parse("head=1 tail=two").unwrap(),
            DigitPattern::new(vec![1], PatternTail::AllTwo).unwrap()
        );
        assert!(DigitPattern::parse("head=1").is_err());
        assert!(DigitPattern::parse("tail=zero").is_err());
        assert!(DigitPattern::parse("head=1 tail=sideways").is_err());
    }

    #[test]
    fn synthesized_sequences() {
        for j in [1u64, 2, 5] {
            assert_eq!(synthesize_sequence(&[1], 0, j).unwrap(), height(j as u32));
            assert_eq!(
                synthesize_sequence(&[2], -3, j).unwrap(),
                2 * height(j as u32) + 3
            );
            assert_eq!(
                synthesize_sequence(&[1, 1], 0, j).unwrap(),
                height(2 * j as u32) + height(j as u32)
            );
        }
        assert!(matches!(
            synthesize_sequence(&[1], 1, 1),
            Ok(k) if k == height(1) - 1
        ));
        assert_eq!(synthesize_sequence(&[1], 10, 1), Err(Error::IncreaseJ));
    }

    #[test]
    fn realize_periodic_pattern() {
        let p = DigitPattern::new(vec![1], PatternTail::Mixed { period: vec![0, 1] }).unwrap();
        assert_eq!(realize(&p, 4).unwrap(), height(4) + height(2) + height(0));
        let p = DigitPattern::new(vec![1], PatternTail::AllTwo).unwrap();
        assert_eq!(realize(&p, 3).unwrap(), 2 * height(3) - 1 - 3);
    }

    #[test]
    fn classify_samples_basic_cases() {
        // Constant sequence: a pure power.
        assert_eq!(
            classify_samples(&[7, 7, 7]).unwrap(),
            Classification::Operator(LimitOperator::from_nu(MassFunction::unit_atom(-7)))
        );
        // Heights themselves.
        let ks: Vec<u64> = (5..8).map(height).collect();
        assert_eq!(
            classify_samples(&ks).unwrap(),
            Classification::Operator(LimitOperator::from_nu(pm(1)))
        );
        // A two-scale sequence.
        let ks: Vec<u64> = (5..8).map(|n| height(2 * n) + height(n)).collect();
        assert_eq!(
            classify_samples(&ks).unwrap(),
            Classification::Operator(LimitOperator::from_nu(pm(1).convolve(&pm(1))))
        );
    }

    #[test]
    fn classify_samples_matches_product_limits() {
        for (ms, n) in [
            (vec![1u64], 0i64),
            (vec![2], -3),
            (vec![3], 2),
            (vec![4], 0),
            (vec![1, 2], 1),
            (vec![2, 2], 3),
        ] {
            let ks: Vec<u64> = (7..10)
                .map(|j| synthesize_sequence(&ms, n, j).unwrap())
                .collect();
            let got = classify_samples(&ks).unwrap();
            let want = Classification::Operator(product_limit(&ms, n));
            assert_eq!(got, want, "mismatch for ms={ms:?}, n={n}");
        }
    }

    #[test]
    fn audit_small_enumeration() {
        let report = audit_alpha_weak_mixing(2, 3);
        assert!(report.pass);
        assert_eq!(report.products, 9);
        assert!(report.min_atom_count >= 2);
        assert_eq!(report.max_sup_atom, rational(2, 3));
        assert_eq!(report.max_sup_witness, vec![2]);
    }

    #[test]
    fn classified_operators_are_probabilities_without_projector_mass() {
        use num_traits::Zero;
        for head in [vec![1u8], vec![2, 1], vec![1, 0, 3], vec![3]] {
            let p = DigitPattern::new(head.clone(), PatternTail::AllZero).unwrap();
            match classify(&p).unwrap() {
                Classification::Operator(op) => {
                    assert!(op.theta_mass().is_zero(), "head {head:?}");
                    assert!(op.nu().is_probability(), "head {head:?}");
                    assert!(op.nu().support_len() >= 2, "head {head:?}");
                }
                other => panic!("unexpected classification {other:?}"),
            }
        }
    }

    #[test]
    fn limit_operator_json_round_trip() {
        let op = product_limit(&[1, 2], -1);
        let json = serde_json::to_string(&op).unwrap();
        let back: LimitOperator = serde_json::from_str(&json).unwrap();
        assert_eq!(back, op);
        assert!(json.contains("\"theta\""));

        let theta = LimitOperator::theta();
        let json = serde_json::to_string(&theta).unwrap();
        assert_eq!(json, r#"{"theta":{"num":"1","den":"1"},"atoms":[]}"#);
        let back: LimitOperator = serde_json::from_str(&json).unwrap();
        assert!(back.is_theta());
    }
}
