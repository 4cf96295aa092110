//! The 3-adic odometer, the first-non-2-digit cocycle, its Birkhoff sums,
//! and an exhaustive-enumeration oracle for their exact distributions.
//!
//! A `TriadicWord` stores the low digits of a 3-adic integer, least
//! significant first; a word of depth K denotes the Haar cylinder of all
//! points with that prefix (mass 3^-K). The cocycle reads the first digit
//! different from 2, so any question about finitely many odometer iterates
//! resolves on a deep enough cylinder, except along the all-2 prefix. The
//! oracle accounts for that single unresolved prefix per residue by an exact
//! half/half split: conditioned on every inspected digit being 2, the first
//! later digit different from 2 is 0 or 1 with Haar probability 1/2 each.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::config::Budgets;
use crate::error::{Error, Result};
use crate::exec;
use crate::mass::MassFunction;

/// A finite low-order digit word over {0,1,2}, least significant digit first.
/// The empty word denotes the whole group.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct TriadicWord {
    digits: Vec<u8>,
}

/// Result of evaluating the cocycle (or a sum of its iterates) on a cylinder:
/// either determined by the inspected digits, or not. `Unresolved` is a
/// regular value; callers refine the cylinder to resolve it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CocycleValue {
    Resolved(u64),
    Unresolved,
}

impl CocycleValue {
    pub fn resolved(self) -> Option<u64> {
        match self {
            CocycleValue::Resolved(v) => Some(v),
            CocycleValue::Unresolved => None,
        }
    }
}

impl TriadicWord {
    pub fn new(digits: &[u8]) -> Self {
        assert!(
            digits.iter().all(|&d| d < 3),
            "digits must lie in {{0,1,2}}"
        );
        TriadicWord {
            digits: digits.to_vec(),
        }
    }

    /// The word for the low `depth` digits of the integer `value`.
    pub fn from_value(value: u64, depth: u32) -> Self {
        let mut digits = Vec::with_capacity(depth as usize);
        let mut v = value;
        for _ in 0..depth {
            digits.push((v % 3) as u8);
            v /= 3;
        }
        TriadicWord { digits }
    }

    pub fn depth(&self) -> u32 {
        self.digits.len() as u32
    }

    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    /// The word's value as an integer in [0, 3^depth).
    pub fn value(&self) -> u64 {
        self.digits
            .iter()
            .rev()
            .fold(0u64, |acc, &d| acc * 3 + u64::from(d))
    }

    /// Append one constraint digit (refine the cylinder by a factor 3).
    pub fn child(&self, digit: u8) -> Self {
        assert!(digit < 3);
        let mut digits = self.digits.clone();
        digits.push(digit);
        TriadicWord { digits }
    }
}

/// 3^k, erroring out of u64 range.
pub(crate) fn pow3(k: u32) -> Result<u64> {
    3u64.checked_pow(k).ok_or(Error::Overflow("3^k"))
}

/// First non-2 digit of `v` viewed as a k-digit base-3 string
/// (None when all k digits equal 2, i.e. v == 3^k - 1).
pub(crate) fn phi_of_residue(mut v: u64, k: u32) -> Option<u8> {
    for _ in 0..k {
        let d = (v % 3) as u8;
        if d != 2 {
            return Some(d);
        }
        v /= 3;
    }
    None
}

/// Index of the first non-2 digit.
pub fn order(w: &TriadicWord) -> CocycleValue {
    match w.digits.iter().position(|&d| d != 2) {
        Some(k) => CocycleValue::Resolved(k as u64),
        None => CocycleValue::Unresolved,
    }
}

/// The cocycle: the first digit different from 2 (a value in {0,1}).
pub fn phi(w: &TriadicWord) -> CocycleValue {
    match w.digits.iter().find(|&&d| d != 2) {
        Some(&d) => CocycleValue::Resolved(u64::from(d)),
        None => CocycleValue::Unresolved,
    }
}

/// Add a nonnegative integer to the word in base 3. Returns the low `depth`
/// digits of the sum and the carry out of the top digit; depth is preserved.
pub fn add_integer(w: &TriadicWord, j: u64) -> (TriadicWord, u64) {
    let mut digits = w.digits.clone();
    let mut carry = j;
    for d in digits.iter_mut() {
        if carry == 0 {
            break;
        }
        let s = u64::from(*d) + carry;
        *d = (s % 3) as u8;
        carry = s / 3;
    }
    (TriadicWord { digits }, carry)
}

/// Drop the first digit.
pub fn shift(w: &TriadicWord) -> Result<TriadicWord> {
    if w.digits.is_empty() {
        return Err(Error::EmptyWordShift);
    }
    Ok(TriadicWord {
        digits: w.digits[1..].to_vec(),
    })
}

/// Birkhoff sum of the cocycle over the first `m` odometer iterates of the
/// cylinder. Resolved only when every summand resolves within the word's
/// depth and no carry leaves it.
pub fn phi_sum(w: &TriadicWord, m: u64) -> CocycleValue {
    let mut total = 0u64;
    for j in 0..m {
        let (wj, carry) = add_integer(w, j);
        if carry != 0 {
            return CocycleValue::Unresolved;
        }
        match phi(&wj) {
            CocycleValue::Resolved(v) => total += v,
            CocycleValue::Unresolved => return CocycleValue::Unresolved,
        }
    }
    CocycleValue::Resolved(total)
}

/// Minimal K with 3^K > m.
pub(crate) fn minimal_depth(m: u64) -> u32 {
    let mut k = 0u32;
    let mut p = 1u64;
    while p <= m {
        p *= 3;
        k += 1;
    }
    k
}

/// Exact distribution of the m-step Birkhoff sum under Haar measure, by
/// exhaustive enumeration of the minimal residue depth. Independent of the
/// recurrence route: this is the brute-force oracle.
pub fn pi_exact(m: u64, budgets: &Budgets) -> Result<MassFunction> {
    pi_exact_depth(m, minimal_depth(m), budgets)
}

/// The oracle at an explicit (not necessarily minimal) depth K with 3^K > m.
/// Deepening K must not change the result; tests rely on that.
pub fn pi_exact_depth(m: u64, k: u32, budgets: &Budgets) -> Result<MassFunction> {
    if m == 0 {
        return Ok(MassFunction::unit_atom(0));
    }
    let states = pow3(k)?;
    assert!(states > m, "oracle depth too shallow: 3^{k} <= {m}");
    if states > budgets.oracle_states {
        return Err(Error::OracleBudgetExceeded {
            needed_k: k,
            budget: budgets.oracle_states,
        });
    }

    // counts[s] accumulates, in units of half a residue cylinder, the mass
    // assigned to the sum value s. A residue whose m-window avoids the all-2
    // prefix contributes 2 halves at its sum; the at-most-one residue window
    // position hitting the all-2 prefix splits 1 half at the base sum and
    // 1 half at base+1.
    let len = (m + 2) as usize;
    let counts = exec::fold_range(
        states,
        || vec![0u64; len],
        |mut acc, r| {
            let mut base = 0u64;
            let mut split = false;
            for j in 0..m {
                let v = (r + j) % states;
                match phi_of_residue(v, k) {
                    Some(d) => base += u64::from(d),
                    None => split = true,
                }
            }
            if split {
                acc[base as usize] += 1;
                acc[(base + 1) as usize] += 1;
            } else {
                acc[base as usize] += 2;
            }
            acc
        },
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
            a
        },
    );

    let den = BigInt::from(2u64) * BigInt::from(states);
    let mut out = MassFunction::zero();
    for (s, c) in counts.into_iter().enumerate() {
        if c > 0 {
            out.add_mass(s as i64, BigRational::new(BigInt::from(c), den.clone()));
        }
    }
    debug_assert!(out.is_probability());
    Ok(out)
}

/// Exact Haar distribution of the cocycle window (phi(x+j))_{0<=j<w} as a
/// map from {0,1}-words to mass. With `reversed_complement` set, the window
/// is (1 - phi(x-j))_{0<=j<w} instead; the two distributions coincide.
pub fn phi_window_distribution(
    w: u32,
    reversed_complement: bool,
    budgets: &Budgets,
) -> Result<BTreeMap<Vec<u8>, BigRational>> {
    assert!(w >= 1, "window length must be at least 1");
    let k = minimal_depth(u64::from(w));
    let states = pow3(k)?;
    if states > budgets.oracle_states {
        return Err(Error::OracleBudgetExceeded {
            needed_k: k,
            budget: budgets.oracle_states,
        });
    }

    let contributions = exec::map_range(states, |r| {
        let mut word = vec![0u8; w as usize];
        let mut split_at = None;
        for j in 0..u64::from(w) {
            // x+j or x-j: only the residue mod 3^k matters for the cocycle
            // whenever that residue is not the all-2 one.
            let v = if reversed_complement {
                (r + states - j) % states
            } else {
                (r + j) % states
            };
            match phi_of_residue(v, k) {
                Some(d) => {
                    word[j as usize] = if reversed_complement { 1 - d } else { d };
                }
                None => split_at = Some(j as usize),
            }
        }
        (word, split_at)
    });

    let den_full = BigInt::from(states);
    let den_half = BigInt::from(2u64) * &den_full;
    let mut out: BTreeMap<Vec<u8>, BigRational> = BTreeMap::new();
    let mut add = |word: Vec<u8>, mass: BigRational| {
        *out.entry(word).or_insert_with(num_traits::Zero::zero) += mass;
    };
    for (word, split_at) in contributions {
        match split_at {
            None => add(word, BigRational::new(BigInt::one(), den_full.clone())),
            Some(p) => {
                // The unresolved position takes each value with probability 1/2.
                for bit in [0u8, 1u8] {
                    let mut word2 = word.clone();
                    word2[p] = bit;
                    add(word2, BigRational::new(BigInt::one(), den_half.clone()));
                }
            }
        }
    }
    Ok(out)
}
