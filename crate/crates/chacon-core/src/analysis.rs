//! The delta functional (total variation of successive differences),
//! unit-circle bounds for the polynomial family, and the convolution-decay
//! tables. Delta and sup-atom values are exact rationals; everything
//! evaluated on the unit circle is floating point with an explicit
//! tolerance, since |1+z| is irrational off the axes.

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::config::Budgets;
use crate::error::{Error, Result};
use crate::exec;
use crate::mass::MassFunction;
use crate::polyengine::{degree_by_digits, pm};

/// A point exp(2 pi i t) of the unit circle with rational t in [0,1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CirclePoint {
    num: u64,
    den: u64,
}

impl CirclePoint {
    /// The point exp(2 pi i num/den); the fraction is taken mod 1.
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den > 0, "denominator must be positive");
        let num = num % den;
        let g = num_integer::gcd(num, den);
        CirclePoint {
            num: num / g,
            den: den / g,
        }
    }

    pub fn t(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Fractional part of t*j, computed exactly on integers first.
    fn angle_times(&self, j: i64) -> f64 {
        let r = (i128::from(self.num) * i128::from(j)).rem_euclid(i128::from(self.den));
        r as f64 / self.den as f64
    }
}

/// Exact total variation of successive differences over all of Z. The
/// boundary terms count: a unit atom scores 2.
pub fn delta(v: &MassFunction) -> BigRational {
    let (Some(lo), Some(hi)) = (v.min_support(), v.max_support()) else {
        return BigRational::zero();
    };
    let mut total = BigRational::zero();
    for j in (lo - 1)..=hi {
        total += (v.mass(j + 1) - v.mass(j)).abs();
    }
    total
}

/// Maximum atom mass (zero for the zero measure).
pub fn sup_atom(v: &MassFunction) -> BigRational {
    v.sup_atom()
}

/// |sum_j v(j) z^-j| in double precision. Per-atom angles are reduced with
/// exact integer arithmetic before any trigonometry, so the absolute error
/// stays below 1e-10 for supports up to 10^4 atoms.
pub fn fourier_abs(v: &MassFunction, z: CirclePoint) -> f64 {
    let mut re = 0.0;
    let mut im = 0.0;
    for (j, mass) in v.iter() {
        let theta = -std::f64::consts::TAU * z.angle_times(*j);
        let m = mass.to_f64().expect("mass fits in f64");
        re += m * theta.cos();
        im += m * theta.sin();
    }
    re.hypot(im)
}

/// alpha(z) = (1 + |1 + z|) / 3.
pub fn alpha(z: CirclePoint) -> f64 {
    (1.0 + 2.0 * (std::f64::consts::PI * z.t()).cos().abs()) / 3.0
}

/// beta(z) = max(|P_1(z)|, |P_2(z)|, alpha(z)); every member of the family
/// is dominated by beta on the circle.
pub fn beta(z: CirclePoint) -> f64 {
    fourier_abs(&pm(1), z)
        .max(fourier_abs(&pm(2), z))
        .max(alpha(z))
}

/// Absolute tolerance for unit-circle comparisons.
pub const FOURIER_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct FourierViolation {
    pub m: u64,
    pub grid_index: u32,
    pub value: f64,
    pub bound: f64,
}

#[derive(Debug, Clone)]
pub struct FourierReport {
    pub m_max: u64,
    pub grid: u32,
    pub checked: u64,
    pub violations: Vec<FourierViolation>,
    /// Smallest bound - value over the whole grid (tolerance not included).
    pub worst_margin: f64,
    pub worst_at: (u64, u32),
}

impl FourierReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check |P_m(z)| <= alpha(z)^((d_m - 2)/2) + tol on the grid t = k/N for
/// every 1 <= m <= m_max. Violations are reported, not thrown.
pub fn check_fourier_bound(m_max: u64, grid: u32) -> FourierReport {
    assert!(m_max >= 1 && grid >= 2);
    let per_m = exec::map_range(m_max, |i| {
        let m = i + 1;
        let p = pm(m);
        let exponent = (degree_by_digits(m) as f64 - 2.0) / 2.0;
        let mut violations = Vec::new();
        let mut worst = f64::INFINITY;
        let mut worst_k = 0u32;
        for k in 0..grid {
            let z = CirclePoint::new(u64::from(k), u64::from(grid));
            let value = fourier_abs(&p, z);
            let bound = alpha(z).powf(exponent);
            let margin = bound - value;
            if margin < worst {
                worst = margin;
                worst_k = k;
            }
            if value > bound + FOURIER_TOL {
                violations.push(FourierViolation {
                    m,
                    grid_index: k,
                    value,
                    bound,
                });
            }
        }
        (m, violations, worst, worst_k)
    });

    let mut report = FourierReport {
        m_max,
        grid,
        checked: m_max * u64::from(grid),
        violations: Vec::new(),
        worst_margin: f64::INFINITY,
        worst_at: (0, 0),
    };
    for (m, violations, worst, worst_k) in per_m {
        report.violations.extend(violations);
        if worst < report.worst_margin {
            report.worst_margin = worst;
            report.worst_at = (m, worst_k);
        }
    }
    report
}

/// One row of the convolution-decay table: exact maxima of delta and of the
/// largest atom over all nondecreasing r-tuples with entries in [1, M],
/// next to the grid approximation of the integral of beta^r.
#[derive(Debug, Clone)]
pub struct DecayRow {
    pub r: u32,
    pub max_delta: BigRational,
    pub delta_witness: Vec<u64>,
    pub max_sup_atom: BigRational,
    pub sup_atom_witness: Vec<u64>,
    pub beta_integral: f64,
}

#[derive(Debug, Clone)]
pub struct DecayReport {
    pub max_m: u64,
    pub max_r: u32,
    pub rows: Vec<DecayRow>,
}

fn tuple_count(max_m: u64, max_r: u32) -> u128 {
    // sum over r of C(max_m + r - 1, r)
    let mut total = 0u128;
    for r in 1..=u128::from(max_r) {
        let mut c = 1u128;
        for i in 0..r {
            c = c * (u128::from(max_m) + i) / (i + 1);
        }
        total += c;
    }
    total
}

#[derive(Clone)]
struct RowAccum {
    max_delta: Option<(BigRational, Vec<u64>)>,
    max_sup: Option<(BigRational, Vec<u64>)>,
}

impl RowAccum {
    fn new() -> Self {
        RowAccum {
            max_delta: None,
            max_sup: None,
        }
    }

    fn update(&mut self, d: BigRational, s: BigRational, tuple: &[u64]) {
        // Ties keep the first witness in lexicographic enumeration order.
        match &self.max_delta {
            Some((best, _)) if *best >= d => {}
            _ => self.max_delta = Some((d, tuple.to_vec())),
        }
        match &self.max_sup {
            Some((best, _)) if *best >= s => {}
            _ => self.max_sup = Some((s, tuple.to_vec())),
        }
    }

    fn merge(mut self, other: RowAccum) -> Self {
        if let Some((d, w)) = other.max_delta {
            match &self.max_delta {
                Some((best, _)) if *best >= d => {}
                _ => self.max_delta = Some((d, w)),
            }
        }
        if let Some((s, w)) = other.max_sup {
            match &self.max_sup {
                Some((best, _)) if *best >= s => {}
                _ => self.max_sup = Some((s, w)),
            }
        }
        self
    }
}

fn decay_dfs(
    start: u64,
    max_m: u64,
    depth: u32,
    max_r: u32,
    conv: &MassFunction,
    tuple: &mut Vec<u64>,
    rows: &mut [RowAccum],
) {
    for m in start..=max_m {
        let next = conv.convolve(&pm(m));
        tuple.push(m);
        rows[depth as usize].update(delta(&next), next.sup_atom(), tuple);
        if depth + 1 < max_r {
            decay_dfs(m, max_m, depth + 1, max_r, &next, tuple, rows);
        }
        tuple.pop();
    }
}

/// Exact per-r maxima of delta and sup-atom over nondecreasing tuples
/// (m_1 <= ... <= m_r), m_i in [1, max_m], plus the grid bound on the
/// integral of beta^r for comparison.
pub fn convolution_decay_report(max_m: u64, max_r: u32, budgets: &Budgets) -> Result<DecayReport> {
    assert!(max_m >= 1 && max_r >= 1);
    let tuples = tuple_count(max_m, max_r);
    if tuples > u128::from(budgets.tuples) {
        return Err(Error::CombinatorialBudgetExceeded {
            max_m,
            max_r,
            tuples: tuples.min(u128::from(u64::MAX)) as u64,
            budget: budgets.tuples,
        });
    }

    // Parallel over the first tuple entry; prefix convolutions are reused
    // inside each branch. The per-row maximum is an associative reduction.
    let branches = exec::map_range(max_m, |i| {
        let m1 = i + 1;
        let mut rows = vec![RowAccum::new(); max_r as usize];
        let conv = pm(m1);
        let mut tuple = vec![m1];
        rows[0].update(delta(&conv), conv.sup_atom(), &tuple);
        if max_r > 1 {
            decay_dfs(m1, max_m, 1, max_r, &conv, &mut tuple, &mut rows);
        }
        rows
    });
    let mut rows = vec![RowAccum::new(); max_r as usize];
    for branch in branches {
        for (acc, b) in rows.iter_mut().zip(branch) {
            *acc = acc.clone().merge(b);
        }
    }

    let grid = budgets.grid;
    let betas: Vec<f64> = (0..grid)
        .map(|k| beta(CirclePoint::new(u64::from(k), u64::from(grid))))
        .collect();
    let out = rows
        .into_iter()
        .enumerate()
        .map(|(i, acc)| {
            let r = i as u32 + 1;
            let integral = betas.iter().map(|b| b.powi(r as i32)).sum::<f64>() / f64::from(grid);
            let (max_delta, delta_witness) = acc.max_delta.expect("row populated");
            let (max_sup_atom, sup_atom_witness) = acc.max_sup.expect("row populated");
            DecayRow {
                r,
                max_delta,
                delta_witness,
                max_sup_atom,
                sup_atom_witness,
                beta_integral: integral,
            }
        })
        .collect();
    Ok(DecayReport {
        max_m,
        max_r,
        rows: out,
    })
}

/// CSV rendering of the decay table.
pub fn decay_csv(report: &DecayReport) -> String {
    let mut out = String::from(
        "r,max_delta_num,max_delta_den,max_supatom_num,max_supatom_den,beta_integral_bound_float\n",
    );
    for row in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.r,
            row.max_delta.numer(),
            row.max_delta.denom(),
            row.max_sup_atom.numer(),
            row.max_sup_atom.denom(),
            row.beta_integral,
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mass::rational;

    #[test]
    fn delta_examples() {
        assert_eq!(delta(&MassFunction::unit_atom(0)), rational(2, 1));
        assert_eq!(delta(&pm(1)), rational(1, 1));
        assert_eq!(delta(&pm(1).convolve(&pm(2))), rational(5, 6));
        assert_eq!(delta(&MassFunction::zero()), rational(0, 1));
    }

    #[test]
    fn sup_atom_examples() {
        assert_eq!(sup_atom(&pm(2)), rational(2, 3));
        assert_eq!(sup_atom(&MassFunction::unit_atom(0)), rational(1, 1));
        assert_eq!(sup_atom(&pm(1).convolve(&pm(1))), rational(1, 2));
    }

    #[test]
    fn delta_equals_twice_peak_for_symmetric_unimodal() {
        for m in 1..=40u64 {
            let p = pm(m);
            assert!(p.is_symmetric() && p.is_unimodal());
            assert_eq!(delta(&p), rational(2, 1) * sup_atom(&p), "m={m}");
        }
    }

    #[test]
    fn fourier_values() {
        let half = CirclePoint::new(1, 2);
        assert!((fourier_abs(&pm(2), half) - 1.0 / 3.0).abs() < 1e-12);
        assert!(fourier_abs(&pm(1), half).abs() < 1e-12);
        let one = CirclePoint::new(0, 2);
        for m in [1u64, 5, 17] {
            assert!((fourier_abs(&pm(m), one) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn alpha_beta_values() {
        assert!((alpha(CirclePoint::new(0, 1)) - 1.0).abs() < 1e-15);
        assert!((alpha(CirclePoint::new(1, 2)) - 1.0 / 3.0).abs() < 1e-15);
        assert!((beta(CirclePoint::new(1, 2)) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn fourier_bound_small_grid() {
        let report = check_fourier_bound(2, 2);
        assert!(report.pass());
        let report = check_fourier_bound(1, 2);
        assert!(report.pass());
    }

    #[test]
    fn decay_report_small_cases() {
        let budgets = Budgets::default();
        let r = convolution_decay_report(1, 2, &budgets).unwrap();
        assert_eq!(r.rows[1].max_delta, rational(1, 1)); // (1,1)
        let r = convolution_decay_report(2, 1, &budgets).unwrap();
        assert_eq!(r.rows[0].max_delta, rational(4, 3)); // delta(pi_2)
        assert_eq!(r.rows[0].delta_witness, vec![2]);
        let r = convolution_decay_report(1, 1, &budgets).unwrap();
        assert_eq!(r.rows[0].max_delta, rational(1, 1));
    }

    #[test]
    fn decay_budget_is_enforced() {
        let tight = Budgets {
            tuples: 3,
            ..Budgets::default()
        };
        assert!(matches!(
            convolution_decay_report(6, 6, &tight),
            Err(Error::CombinatorialBudgetExceeded { .. })
        ));
    }

    #[test]
    fn delta_convolution_contraction_on_family_pairs() {
        for a in 1..=8u64 {
            for bb in 1..=8u64 {
                let (pa, pb) = (pm(a), pm(bb));
                let conv = pa.convolve(&pb);
                assert!(delta(&conv) <= delta(&pa), "pair ({a},{bb})");
                assert!(delta(&conv) <= delta(&pb), "pair ({a},{bb})");
            }
        }
    }

    #[test]
    fn family_convolutions_stay_symmetric_and_unimodal() {
        for a in 1..=8u64 {
            for bb in a..=8u64 {
                let conv = pm(a).convolve(&pm(bb));
                assert!(conv.is_symmetric() && conv.is_unimodal(), "pair ({a},{bb})");
                for c in bb..=8u64 {
                    let conv3 = conv.convolve(&pm(c));
                    assert!(
                        conv3.is_symmetric() && conv3.is_unimodal(),
                        "triple ({a},{bb},{c})"
                    );
                }
            }
        }
    }

    #[test]
    fn sup_atom_decays_along_first_appearance_witnesses() {
        use crate::polyengine::first_m_of_degree;
        // The witness peaks zigzag between the parities of d (2/3, 4/9,
        // 13/27, 61/162, ...), so the decay is monotone along each stride-2
        // subsequence rather than step by step.
        let sups: Vec<BigRational> = (1..=12u32)
            .map(|d| sup_atom(&pm(first_m_of_degree(d))))
            .collect();
        for w in sups.windows(3) {
            assert!(w[2] < w[0], "no decay two degrees apart");
        }
        assert!(sups[11] < rational(1, 2) * &sups[1]);
    }

    #[test]
    fn csv_has_expected_header_and_rows() {
        let report = convolution_decay_report(2, 2, &Budgets::default()).unwrap();
        let csv = decay_csv(&report);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "r,max_delta_num,max_delta_den,max_supatom_num,max_supatom_den,beta_integral_bound_float"
        );
        assert_eq!(lines.count(), 2);
    }
}
