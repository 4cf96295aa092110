//! Named verification suites covering every exact invariant of the build.
//! Each suite returns a pass/fail result with a short witness string; the
//! collection is the project's acceptance surface, runnable from the test
//! harness or the command line.

use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{check_fourier_bound, convolution_decay_report, delta};
use crate::config::Budgets;
use crate::error::{Error, Result};
use crate::exec;
use crate::mass::{rational, MassFunction};
use crate::polyengine::{degree_by_digits, ell, first_m_of_degree, pm, reduced_pm, s};
use crate::towers::{
    full_level, full_levels, full_space, height, measure, psi_embed, psi_lift, t_apply,
    weak_limit_error, Cell, LevelSet,
};
use crate::triadic::{phi_window_distribution, pi_exact, TriadicWord};
use crate::weaklimits::{
    classify_samples, product_limit, realize, synthesize_sequence, Classification, DigitPattern,
    PatternTail,
};

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl CriterionResult {
    fn pass(name: &'static str, detail: String) -> Self {
        CriterionResult {
            name,
            pass: true,
            detail,
        }
    }

    fn fail(name: &'static str, detail: String) -> Self {
        CriterionResult {
            name,
            pass: false,
            detail,
        }
    }
}

/// Stable suite names, in report order.
pub const SUITE_NAMES: [&str; 13] = [
    "oracle-equivalence",
    "symmetry-unimodality",
    "degree-combinatorics",
    "first-appearance",
    "fourier-bound",
    "delta-monotonicity",
    "convolution-decay",
    "simulator-exactness",
    "lemma1-convergence",
    "round-trip-classification",
    "theta-convergence",
    "alpha-weak-mixing-audit",
    "window-identity",
];

/// Run one suite by name.
pub fn run_suite(name: &str, budgets: &Budgets, seed: u64) -> Result<CriterionResult> {
    match name {
        "oracle-equivalence" => oracle_equivalence(budgets),
        "symmetry-unimodality" => symmetry_unimodality(),
        "degree-combinatorics" => degree_combinatorics(),
        "first-appearance" => first_appearance(),
        "fourier-bound" => fourier_bound(budgets),
        "delta-monotonicity" => delta_monotonicity(seed),
        "convolution-decay" => convolution_decay(budgets),
        "simulator-exactness" => simulator_exactness(budgets, seed),
        "lemma1-convergence" => lemma1_convergence(budgets),
        "round-trip-classification" => round_trip_classification(),
        "theta-convergence" => theta_convergence(budgets),
        "alpha-weak-mixing-audit" => alpha_weak_mixing_audit(),
        "window-identity" => window_identity(budgets),
        other => Err(Error::InvalidPattern(format!("unknown suite {other:?}"))),
    }
}

/// Run every suite (or the given subset), in declaration order.
pub fn run_all(names: &[&str], budgets: &Budgets, seed: u64) -> Result<Vec<CriterionResult>> {
    let list: Vec<&str> = if names.is_empty() {
        SUITE_NAMES.to_vec()
    } else {
        names.to_vec()
    };
    exec::map_slice(&list, |name| run_suite(name, budgets, seed))
        .into_iter()
        .collect()
}

/// Recurrence family equals the exhaustive oracle, exactly, through the
/// three-digit orders.
fn oracle_equivalence(budgets: &Budgets) -> Result<CriterionResult> {
    const NAME: &str = "oracle-equivalence";
    let results = exec::map_range(730, |m| {
        pi_exact(m, budgets).map(|oracle| (m, oracle == pm(m)))
    });
    for r in results {
        let (m, ok) = r?;
        if !ok {
            return Ok(CriterionResult::fail(
                NAME,
                format!("recurrence and oracle disagree at m={m}"),
            ));
        }
    }
    Ok(CriterionResult::pass(
        NAME,
        "pm(m) == oracle(m) exactly for all m <= 729".into(),
    ))
}

/// Coefficient symmetry, and monotone growth of the reduced coefficients up
/// to the midpoint, for every order through 2000.
fn symmetry_unimodality() -> Result<CriterionResult> {
    const NAME: &str = "symmetry-unimodality";
    for m in 1..=2000u64 {
        let p = pm(m);
        for (j, mass) in p.iter() {
            if p.mass(m as i64 - j) != *mass {
                return Ok(CriterionResult::fail(
                    NAME,
                    format!("asymmetry at m={m}, j={j}"),
                ));
            }
        }
        let r = reduced_pm(m);
        let half = (r.degree / 2) as i64;
        for j in 0..half {
            if r.reduced.mass(j) > r.reduced.mass(j + 1) {
                return Ok(CriterionResult::fail(
                    NAME,
                    format!("reduced coefficients fall before the middle at m={m}, j={j}"),
                ));
            }
        }
    }
    Ok(CriterionResult::pass(
        NAME,
        "symmetry and midpoint monotonicity hold for all m <= 2000".into(),
    ))
}

/// Digit formula for the reduced degree, the order/degree bookkeeping
/// identity, the unit-step law, and the four induction relations, through
/// order 5000.
fn degree_combinatorics() -> Result<CriterionResult> {
    const NAME: &str = "degree-combinatorics";
    for m in 0..=5000u64 {
        let p = pm(m);
        let lo = p.min_support().unwrap();
        let hi = p.max_support().unwrap();
        let d = degree_by_digits(m);
        if (hi - lo) as u64 != d || lo as u64 != ell(m) {
            return Ok(CriterionResult::fail(
                NAME,
                format!("digit degree disagrees with the polynomial at m={m}"),
            ));
        }
        if reduced_pm(m).degree != d || 2 * ell(m) + d != m {
            return Ok(CriterionResult::fail(
                NAME,
                format!("order/degree bookkeeping fails at m={m}"),
            ));
        }
        if degree_by_digits(m + 1) as i64 - d as i64 != 1 - 2 * s(m) as i64 {
            return Ok(CriterionResult::fail(
                NAME,
                format!("unit-step law fails at m={m}"),
            ));
        }
    }
    for m in 0..=5000u64 / 3 {
        let (d, d1) = (degree_by_digits(m), degree_by_digits(m + 1));
        let relations = [
            degree_by_digits(3 * m) == d,
            degree_by_digits(3 * m + 1) == d + 1,
            degree_by_digits(3 * m + 2) == d1 + 1,
            degree_by_digits(3 * m + 3) == d1,
        ];
        if relations.iter().any(|ok| !ok) {
            return Ok(CriterionResult::fail(
                NAME,
                format!("induction relation fails at m={m}"),
            ));
        }
    }
    Ok(CriterionResult::pass(
        NAME,
        "degree combinatorics hold for all m <= 5000".into(),
    ))
}

/// First order reaching each reduced degree matches the closed form, by
/// exhaustive scan.
fn first_appearance() -> Result<CriterionResult> {
    const NAME: &str = "first-appearance";
    for d in 1..=8u32 {
        let expected = first_m_of_degree(d);
        let scan = (0..=1094).find(|&m| degree_by_digits(m) == u64::from(d));
        if scan != Some(expected) {
            return Ok(CriterionResult::fail(
                NAME,
                format!("degree {d} first appears at {scan:?}, expected {expected}"),
            ));
        }
    }
    Ok(CriterionResult::pass(
        NAME,
        "first appearance matches (3^(d-1)+1)/2 for d <= 8".into(),
    ))
}

/// Unit-circle bound for every order through 500 on the configured grid.
fn fourier_bound(budgets: &Budgets) -> Result<CriterionResult> {
    const NAME: &str = "fourier-bound";
    let report = check_fourier_bound(500, budgets.grid);
    if report.pass() {
        Ok(CriterionResult::pass(
            NAME,
            format!(
                "{} points checked, worst margin {:.3e} at (m={}, k={})",
                report.checked, report.worst_margin, report.worst_at.0, report.worst_at.1
            ),
        ))
    } else {
        let v = &report.violations[0];
        Ok(CriterionResult::fail(
            NAME,
            format!(
                "bound violated at m={}, grid index {}: {} > {}",
                v.m, v.grid_index, v.value, v.bound
            ),
        ))
    }
}

fn random_sub_probability(rng: &mut ChaCha8Rng) -> MassFunction {
    let atoms = rng.gen_range(1..=5usize);
    let den = rng.gen_range(2..=48i64);
    let mut out = MassFunction::zero();
    let mut left = den;
    for _ in 0..atoms {
        if left == 0 {
            break;
        }
        let cap = left.min(den / atoms as i64 + 1);
        let num = rng.gen_range(1..=cap);
        let j = rng.gen_range(-6..=6i64);
        out.add_mass(j, rational(num, den));
        left -= num;
    }
    out
}

/// Convolution never increases delta: family pairs exhaustively through
/// order 12, then seeded random sub-probability pairs.
fn delta_monotonicity(seed: u64) -> Result<CriterionResult> {
    const NAME: &str = "delta-monotonicity";
    for a in 1..=12u64 {
        for b in 1..=12u64 {
            let (pa, pb) = (pm(a), pm(b));
            let conv = pa.convolve(&pb);
            if delta(&conv) > delta(&pa) || delta(&conv) > delta(&pb) {
                return Ok(CriterionResult::fail(
                    NAME,
                    format!("delta grew under convolution of orders ({a},{b})"),
                ));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..200 {
        let a = random_sub_probability(&mut rng);
        let b = random_sub_probability(&mut rng);
        let conv = a.convolve(&b);
        if delta(&conv) > delta(&a) || delta(&conv) > delta(&b) {
            return Ok(CriterionResult::fail(
                NAME,
                format!("delta grew on random pair, trial {trial}: {a} vs {b}"),
            ));
        }
    }
    Ok(CriterionResult::pass(
        NAME,
        "delta contracted on 144 family pairs and 200 seeded random pairs".into(),
    ))
}

/// Exact decay table at desk scale: per-row delta maxima never increase,
/// and the largest atom strictly shrinks from one factor to six.
fn convolution_decay(budgets: &Budgets) -> Result<CriterionResult> {
    const NAME: &str = "convolution-decay";
    let report = convolution_decay_report(6, 6, budgets)?;
    for w in report.rows.windows(2) {
        if w[1].max_delta > w[0].max_delta {
            return Ok(CriterionResult::fail(
                NAME,
                format!("delta row maximum grew from r={} to r={}", w[0].r, w[1].r),
            ));
        }
    }
    let (first, last) = (&report.rows[0], &report.rows[5]);
    if last.max_sup_atom >= first.max_sup_atom {
        return Ok(CriterionResult::fail(
            NAME,
            "largest atom did not shrink from r=1 to r=6".into(),
        ));
    }
    Ok(CriterionResult::pass(
        NAME,
        format!(
            "delta maxima nonincreasing; sup atom {}/{} (r=1) -> {}/{} (r=6)",
            first.max_sup_atom.numer(),
            first.max_sup_atom.denom(),
            last.max_sup_atom.numer(),
            last.max_sup_atom.denom()
        ),
    ))
}

fn random_level_set(rng: &mut ChaCha8Rng, n: u32) -> LevelSet {
    let h = height(n);
    let cells = rng.gen_range(1..=3u64.min(h)) as usize;
    let mut levels = Vec::new();
    while levels.len() < cells {
        let level = rng.gen_range(0..h);
        if !levels.contains(&level) {
            levels.push(level);
        }
    }
    let cells = levels
        .into_iter()
        .map(|level| {
            let depth = rng.gen_range(0..=3usize);
            let digits: Vec<u8> = (0..depth).map(|_| rng.gen_range(0..3u8)).collect();
            Cell {
                word: TriadicWord::new(&digits),
                tail: crate::towers::Tail::Free,
                level,
            }
        })
        .collect();
    LevelSet::new(n, cells).expect("seeded set is valid")
}

/// The embedding formula level by level, measure preservation of the power
/// maps on seeded sets, and unit total mass, for every tower through 6.
fn simulator_exactness(budgets: &Budgets, seed: u64) -> Result<CriterionResult> {
    const NAME: &str = "simulator-exactness";
    let n_max = budgets.tower_max.min(6);
    for n in 0..=n_max {
        if !measure(&full_space(n)).is_one() {
            return Ok(CriterionResult::fail(
                NAME,
                format!("total mass of tower {n} is not 1"),
            ));
        }
        let h = height(n);
        for i in 0..h {
            let image = psi_embed(&full_level(n, i));
            let expected = full_levels(n + 1, &[i, h + i, 2 * h + i + 1]);
            if !crate::towers::footprint_eq(&image, &expected, budgets)? {
                return Ok(CriterionResult::fail(
                    NAME,
                    format!("embedding formula fails at n={n}, i={i}"),
                ));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for n in 0..=n_max {
        let h = height(n) as i64;
        for trial in 0..100 {
            let set = random_level_set(&mut rng, n);
            let k = rng.gen_range(-2 * h..=2 * h);
            let moved = t_apply(&set, k, budgets)?;
            if measure(&moved) != measure(&set) {
                return Ok(CriterionResult::fail(
                    NAME,
                    format!("measure not preserved at n={n}, trial {trial}, k={k}"),
                ));
            }
        }
    }
    Ok(CriterionResult::pass(
        NAME,
        format!("embedding formula and measure preservation hold through tower {n_max}"),
    ))
}

/// Tower-uniformity defect: bounded by (2m+u) base-level masses at every
/// tower, and nonincreasing across the three deepest towers checked. The
/// embedded single-level pairs turn out to cancel their boundary terms
/// exactly; whole-tower operands exercise the genuinely nonzero decay.
fn lemma1_convergence(budgets: &Budgets) -> Result<CriterionResult> {
    const NAME: &str = "lemma1-convergence";
    enum Operands {
        Lifted(u64, u64),
        WholeTower,
    }
    let cases = [
        Operands::Lifted(0, 0),
        Operands::Lifted(3, 7),
        Operands::WholeTower,
    ];
    for case in &cases {
        for m in 1..=3u64 {
            for u in 0..=2u64 {
                let mut errs = Vec::new();
                for n in 3..=8u32 {
                    let (a, b, label) = match case {
                        Operands::Lifted(la, lb) => (
                            psi_lift(&full_level(2, *la), n),
                            psi_lift(&full_level(2, *lb), n),
                            format!("lifted levels ({la},{lb})"),
                        ),
                        Operands::WholeTower => {
                            let all: Vec<u64> = (0..height(n)).collect();
                            let set = full_levels(n, &all);
                            (set.clone(), set, "whole tower".to_string())
                        }
                    };
                    let err = weak_limit_error(n, m, u, &a, &b, budgets)?;
                    let bound = rational((2 * m + u) as i64, 1) * measure(&full_level(n, 0));
                    if err > bound {
                        return Ok(CriterionResult::fail(
                            NAME,
                            format!(
                                "defect exceeds (2m+u) base masses at n={n}, m={m}, u={u}, {label}"
                            ),
                        ));
                    }
                    errs.push(err);
                }
                // Towers 6, 7, 8 sit at indices 3, 4, 5.
                if !(errs[3] >= errs[4] && errs[4] >= errs[5]) {
                    return Ok(CriterionResult::fail(
                        NAME,
                        format!("defect not nonincreasing over towers 6..8 at m={m}, u={u}"),
                    ));
                }
            }
        }
    }
    Ok(CriterionResult::pass(
        NAME,
        "defect bounded and nonincreasing for m <= 3, u <= 2, towers 3..8".into(),
    ))
}

/// Classifying synthesized witness sequences recovers the product operator
/// for every nondecreasing factor tuple with r <= 3, entries <= 4, and
/// shifts |n| <= 3.
fn round_trip_classification() -> Result<CriterionResult> {
    const NAME: &str = "round-trip-classification";
    let mut tuples: Vec<Vec<u64>> = Vec::new();
    for a in 1..=4u64 {
        tuples.push(vec![a]);
        for b in a..=4 {
            tuples.push(vec![a, b]);
            for c in b..=4 {
                tuples.push(vec![a, b, c]);
            }
        }
    }
    let results = exec::map_slice(&tuples, |ms| {
        for n in -3..=3i64 {
            let ks: std::result::Result<Vec<u64>, Error> =
                (7..10).map(|j| synthesize_sequence(ms, n, j)).collect();
            let ks = ks?;
            let got = classify_samples(&ks)?;
            let want = Classification::Operator(product_limit(ms, n));
            if got != want {
                return Ok::<Option<String>, Error>(Some(format!(
                    "classification mismatch for factors {ms:?}, shift {n}"
                )));
            }
        }
        Ok(None)
    });
    for r in results {
        if let Some(msg) = r? {
            return Ok(CriterionResult::fail(NAME, msg));
        }
    }
    Ok(CriterionResult::pass(
        NAME,
        format!(
            "{} factor tuples x 7 shifts round-trip exactly",
            tuples.len()
        ),
    ))
}

/// Correlations along a mixed-pattern witness sequence approach the product
/// measure: the defect strictly decreases over the three largest towers the
/// budget allows.
fn theta_convergence(budgets: &Budgets) -> Result<CriterionResult> {
    const NAME: &str = "theta-convergence";
    if budgets.tower_max < 6 {
        return Err(Error::TowerBudgetExceeded {
            needed: 6,
            budget: budgets.tower_max,
        });
    }
    let pattern = DigitPattern::new(vec![1], PatternTail::Mixed { period: vec![0, 1] })
        .expect("valid pattern");
    let base = full_level(2, 0);
    let mut defects = Vec::new();
    let top_j = u64::from(budgets.tower_max / 2).min(4);
    let js: Vec<u64> = (top_j - 2..=top_j).collect();
    for &j in &js {
        let tower = 2 * j as u32;
        let k = realize(&pattern, tower)?;
        let a = psi_lift(&base, tower);
        let defect = crate::towers::product_defect(&a, &a, k as i64, budgets)?;
        defects.push(defect);
    }
    for w in defects.windows(2) {
        if w[1] >= w[0] {
            return Ok(CriterionResult::fail(
                NAME,
                format!(
                    "defect did not decrease along the witness sequence: {} then {}",
                    w[0], w[1]
                ),
            ));
        }
    }
    Ok(CriterionResult::pass(
        NAME,
        format!(
            "defect strictly decreases over towers {:?}",
            js.iter().map(|j| 2 * j).collect::<Vec<_>>()
        ),
    ))
}

/// Every enumerated closure element with r <= 5 factors of order <= 9 is a
/// probability with at least two atoms, none of full mass: nothing matches
/// an intermediate mixture of the identity and the projector.
fn alpha_weak_mixing_audit() -> Result<CriterionResult> {
    const NAME: &str = "alpha-weak-mixing-audit";
    let report = crate::weaklimits::audit_alpha_weak_mixing(5, 9);
    if report.pass {
        Ok(CriterionResult::pass(
            NAME,
            format!(
                "{} products: all probabilities, >= {} atoms, largest atom {}/{}",
                report.products,
                report.min_atom_count,
                report.max_sup_atom.numer(),
                report.max_sup_atom.denom()
            ),
        ))
    } else {
        Ok(CriterionResult::fail(
            NAME,
            format!(
                "audit failed: witness {:?}, sup atom {}, probabilities {}",
                report.max_sup_witness, report.max_sup_atom, report.all_probability
            ),
        ))
    }
}

/// The window distribution of the cocycle agrees with its reversed
/// complement, for windows through length 6.
fn window_identity(budgets: &Budgets) -> Result<CriterionResult> {
    const NAME: &str = "window-identity";
    for w in 1..=6u32 {
        let plain = phi_window_distribution(w, false, budgets)?;
        let flipped = phi_window_distribution(w, true, budgets)?;
        if plain != flipped {
            return Ok(CriterionResult::fail(
                NAME,
                format!("window distributions differ at w={w}"),
            ));
        }
    }
    Ok(CriterionResult::pass(
        NAME,
        "window distributions agree with their reversed complements for w <= 6".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::Signed;

    #[test]
    fn suite_names_are_routable() {
        let budgets = Budgets::default();
        for name in SUITE_NAMES {
            // Routing only: light suites run, heavy ones are exercised by
            // the acceptance tests.
            if matches!(name, "first-appearance" | "window-identity") {
                let r = run_suite(name, &budgets, 7).unwrap();
                assert!(r.pass, "{name} failed: {}", r.detail);
            }
        }
        assert!(run_suite("no-such-suite", &budgets, 7).is_err());
    }

    #[test]
    fn random_measures_are_sub_probabilities() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let m = random_sub_probability(&mut rng);
            assert!(m.total_mass() <= BigRational::one());
            assert!(!m.total_mass().is_negative());
            assert!(!m.is_zero_measure());
        }
    }
}
