//! Exact rational engine for the polynomial family attached to the cocycle
//! sums, its reduced form, and the base-3 combinatorics of the family.
//!
//! Writing P_m for the generating polynomial of the m-step sum distribution,
//! the family satisfies the ternary recurrence
//!
//! ```text
//! P_3m   = X^m P_m
//! P_3m+1 = X^m ((1+X) P_m + P_m+1) / 3
//! P_3m+2 = X^m (X P_m + (1+X) P_m+1) / 3
//! ```
//!
//! with P_0 = 1 and P_1 = (1+X)/2. Factoring out the largest power of X
//! gives the reduced polynomial; its exponent l(m), the increment
//! s_m = l(m+1) - l(m) in {0,1}, and the reduced degree d_m = m - 2 l(m)
//! all obey base-3 digit rules implemented here. Recursion from m touches
//! only floor(m/3) and floor(m/3)+1, so a query costs O(log m) memoized
//! polynomial combinations, each of support at most d_m + 1.

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use crate::mass::{rational, MassFunction};

/// Reduced form of a family member: the polynomial with its leading power
/// of X stripped, together with that exponent and the reduced degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedForm {
    pub ell: u64,
    pub reduced: MassFunction,
    pub degree: u64,
}

fn pm_cache() -> &'static RwLock<HashMap<u64, MassFunction>> {
    static CACHE: OnceLock<RwLock<HashMap<u64, MassFunction>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

fn reduced_cache() -> &'static RwLock<HashMap<u64, MassFunction>> {
    static CACHE: OnceLock<RwLock<HashMap<u64, MassFunction>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

fn base_case(m: u64) -> Option<MassFunction> {
    match m {
        0 => Some(MassFunction::unit_atom(0)),
        1 => Some(MassFunction::from_atoms([
            (0, rational(1, 2)),
            (1, rational(1, 2)),
        ])),
        _ => None,
    }
}

/// Coefficients of P_m as a probability measure on [0, m].
pub fn pm(m: u64) -> MassFunction {
    if let Some(p) = base_case(m) {
        return p;
    }
    if let Some(hit) = pm_cache().read().unwrap().get(&m) {
        return hit.clone();
    }
    let q = m / 3;
    let a = pm(q);
    let result = match m % 3 {
        0 => a.shift(shift_amount(q)),
        1 => {
            let b = pm(q + 1);
            let third = rational(1, 3);
            a.add(&a.shift(1))
                .add(&b)
                .scale(&third)
                .shift(shift_amount(q))
        }
        _ => {
            let b = pm(q + 1);
            let third = rational(1, 3);
            a.shift(1)
                .add(&b)
                .add(&b.shift(1))
                .scale(&third)
                .shift(shift_amount(q))
        }
    };
    debug_assert!(result.is_probability());
    pm_cache().write().unwrap().insert(m, result.clone());
    result
}

fn shift_amount(q: u64) -> i64 {
    i64::try_from(q).expect("shift exponent exceeds i64")
}

/// Largest power of X dividing P_m; also the minimum of the m-step sum.
pub fn ell(m: u64) -> u64 {
    match m {
        0 | 1 => 0,
        _ => {
            let q = m / 3;
            match m % 3 {
                0 | 1 => q + ell(q),
                _ => q + ell(q + 1),
            }
        }
    }
}

/// The increment l(m+1) - l(m), read off the base-3 digits of m: scan for
/// the first digit different from 1; the increment is 1 exactly when that
/// digit is 2. (Digits are eventually 0, so the scan always answers.)
pub fn s(m: u64) -> u64 {
    let mut v = m;
    while v > 0 {
        match v % 3 {
            1 => v /= 3,
            2 => return 1,
            _ => return 0,
        }
    }
    0
}

/// Reduced polynomial family by its own recurrence:
///
/// ```text
/// R_3m   = R_m
/// 3 R_3m+1 = (1+X) R_m + X^{s_m} R_m+1
/// 3 R_3m+2 = X^{1-s_m} R_m + (1+X) R_m+1
/// ```
fn reduced_poly(m: u64) -> MassFunction {
    if let Some(p) = base_case(m) {
        return p;
    }
    if let Some(hit) = reduced_cache().read().unwrap().get(&m) {
        return hit.clone();
    }
    let q = m / 3;
    let result = match m % 3 {
        0 => reduced_poly(q),
        1 => {
            let a = reduced_poly(q);
            let b = reduced_poly(q + 1);
            a.add(&a.shift(1))
                .add(&b.shift(s(q) as i64))
                .scale(&rational(1, 3))
        }
        _ => {
            let a = reduced_poly(q);
            let b = reduced_poly(q + 1);
            a.shift(1 - s(q) as i64)
                .add(&b)
                .add(&b.shift(1))
                .scale(&rational(1, 3))
        }
    };
    debug_assert!(!result.mass(0).eq(&num_traits::Zero::zero()));
    reduced_cache().write().unwrap().insert(m, result.clone());
    result
}

/// The reduced form (l(m), reduced polynomial, reduced degree) of P_m.
pub fn reduced_pm(m: u64) -> ReducedForm {
    let reduced = reduced_poly(m);
    let degree = reduced.max_support().unwrap_or(0) as u64;
    ReducedForm {
        ell: ell(m),
        reduced,
        degree,
    }
}

/// Degree of the reduced polynomial straight from the base-3 digits of m:
/// delete every digit 1, then d_m = (number of deleted 1s) + 2 * (number of
/// maximal blocks of 2s remaining).
pub fn degree_by_digits(m: u64) -> u64 {
    let mut ones = 0u64;
    let mut blocks = 0u64;
    let mut in_block = false;
    let mut v = m;
    while v > 0 {
        match v % 3 {
            1 => ones += 1, // deleted; does not interrupt a 2-block
            2 => {
                if !in_block {
                    blocks += 1;
                    in_block = true;
                }
            }
            _ => in_block = false,
        }
        v /= 3;
    }
    ones + 2 * blocks
}

/// Smallest m whose reduced polynomial has degree d (for d >= 1):
/// (3^(d-1) + 1) / 2.
pub fn first_m_of_degree(d: u32) -> u64 {
    assert!(d >= 1, "degree must be at least 1");
    3u64.checked_pow(d - 1)
        .expect("3^(d-1) overflows u64")
        .div_ceil(2)
}

/// Convolution of two measures (equivalently, the polynomial product).
pub fn convolve(a: &MassFunction, b: &MassFunction) -> MassFunction {
    a.convolve(b)
}
