//! Finitely supported nonnegative rational measures on the integers.
//!
//! One type serves three roles: the distributions of the cocycle sums, the
//! coefficient lists of their generating polynomials (the coefficient of X^j
//! is the mass at j, and polynomial multiplication is convolution), and the
//! atomic parts of limit operators.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Exact rational constructor from machine integers.
pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// A finitely supported measure j -> mass with strictly positive stored
/// atoms. The zero measure is the empty map.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MassFunction {
    atoms: BTreeMap<i64, BigRational>,
}

impl MassFunction {
    /// The zero measure.
    pub fn zero() -> Self {
        MassFunction::default()
    }

    /// The unit atom at `j`.
    pub fn unit_atom(j: i64) -> Self {
        let mut atoms = BTreeMap::new();
        atoms.insert(j, BigRational::one());
        MassFunction { atoms }
    }

    /// Build from (position, mass) pairs; zero masses are dropped, repeats add.
    pub fn from_atoms<I: IntoIterator<Item = (i64, BigRational)>>(iter: I) -> Self {
        let mut m = MassFunction::zero();
        for (j, mass) in iter {
            m.add_mass(j, mass);
        }
        m
    }

    pub fn add_mass(&mut self, j: i64, mass: BigRational) {
        if mass.is_zero() {
            return;
        }
        debug_assert!(mass.is_positive(), "negative mass at {j}");
        let slot = self.atoms.entry(j).or_insert_with(BigRational::zero);
        *slot += mass;
        if slot.is_zero() {
            self.atoms.remove(&j);
        }
    }

    /// Mass at `j` (zero off the support).
    pub fn mass(&self, j: i64) -> BigRational {
        self.atoms
            .get(&j)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn support_len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_zero_measure(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&i64, &BigRational)> {
        self.atoms.iter()
    }

    pub fn min_support(&self) -> Option<i64> {
        self.atoms.keys().next().copied()
    }

    pub fn max_support(&self) -> Option<i64> {
        self.atoms.keys().next_back().copied()
    }

    pub fn total_mass(&self) -> BigRational {
        self.atoms.values().fold(BigRational::zero(), |a, b| a + b)
    }

    pub fn is_probability(&self) -> bool {
        self.total_mass().is_one()
    }

    /// Largest atom mass (zero for the zero measure).
    pub fn sup_atom(&self) -> BigRational {
        self.atoms
            .values()
            .max()
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// Translate the measure by `k`.
    pub fn shift(&self, k: i64) -> Self {
        MassFunction {
            atoms: self
                .atoms
                .iter()
                .map(|(j, m)| (j.checked_add(k).expect("shift overflow"), m.clone()))
                .collect(),
        }
    }

    /// Multiply every atom by a nonnegative scalar.
    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return MassFunction::zero();
        }
        MassFunction {
            atoms: self.atoms.iter().map(|(j, m)| (*j, m * c)).collect(),
        }
    }

    /// Pointwise sum of two measures.
    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (j, m) in other.iter() {
            out.add_mass(*j, m.clone());
        }
        out
    }

    /// Convolution: total mass multiplies, support is the sumset.
    pub fn convolve(&self, other: &Self) -> Self {
        let mut out = MassFunction::zero();
        for (i, a) in self.iter() {
            for (j, b) in other.iter() {
                out.add_mass(i.checked_add(*j).expect("convolution overflow"), a * b);
            }
        }
        out
    }

    /// True when the support is a (possibly empty) interval of integers.
    pub fn has_interval_support(&self) -> bool {
        match (self.min_support(), self.max_support()) {
            (Some(lo), Some(hi)) => (hi - lo + 1) as usize == self.atoms.len(),
            _ => true,
        }
    }

    /// Symmetric about the midpoint of its support.
    pub fn is_symmetric(&self) -> bool {
        let (Some(lo), Some(hi)) = (self.min_support(), self.max_support()) else {
            return true;
        };
        let c = lo + hi;
        self.iter().all(|(j, m)| self.mass(c - j) == *m)
    }

    /// Nondecreasing up to some peak, then nonincreasing, over an interval
    /// support. Vacuously true for the zero measure.
    pub fn is_unimodal(&self) -> bool {
        if !self.has_interval_support() {
            return false;
        }
        let masses: Vec<&BigRational> = self.atoms.values().collect();
        let peak = match masses.iter().enumerate().max_by_key(|(_, m)| **m) {
            Some((i, _)) => i,
            None => return true,
        };
        masses[..=peak].windows(2).all(|w| w[0] <= w[1])
            && masses[peak..].windows(2).all(|w| w[0] >= w[1])
    }
}

impl fmt::Display for MassFunction {
    /// Atoms as `j:num/den` pairs, ascending in j, space separated.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.atoms.is_empty() {
            return write!(f, "(zero measure)");
        }
        let mut first = true;
        for (j, m) in self.iter() {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{}:{}/{}", j, m.numer(), m.denom())?;
            first = false;
        }
        Ok(())
    }
}
