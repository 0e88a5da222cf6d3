//! Per-hole-pair weights `w_p(u, v)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Where a weight table came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Provenance {
    /// Exact `Xi_p(perfect) / Xi_p(hole class)`.
    Ideal,
    /// Estimated from a particle population.
    Adaptive,
    UserSupplied,
}

/// Weights `w_p(u, v)` for one step `p`, row-major over hole pairs.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WeightTable {
    pub p: usize,
    n: usize,
    values: Vec<f64>,
    pub provenance: Provenance,
}

impl WeightTable {
    /// All entries must be strictly positive and finite.
    pub fn new(p: usize, n: usize, values: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::invalid("weight table must have n*n entries"));
        }
        if let Some(bad) = values.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidParameter(alloc::format!(
                "weights must be positive and finite, found {bad}"
            )));
        }
        Ok(Self {
            p,
            n,
            values,
            provenance,
        })
    }

    pub fn uniform(p: usize, n: usize, value: f64, provenance: Provenance) -> Result<Self> {
        Self::new(p, n, vec![value; n * n], provenance)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.values[u * self.n + v]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::MIN, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::MAX, f64::min)
    }

    /// Largest `|w / reference - 1|` over all pairs.
    pub fn max_relative_error(&self, reference: &WeightTable) -> f64 {
        self.values
            .iter()
            .zip(&reference.values)
            .map(|(w, r)| libm::fabs(w / r - 1.0))
            .fold(0.0, f64::max)
    }

    /// Same entries relabelled as step `p`.
    pub fn at_step(mut self, p: usize) -> Self {
        self.p = p;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_entries() {
        assert!(WeightTable::new(0, 2, vec![1.0, 2.0, 3.0, 4.0], Provenance::UserSupplied).is_ok());
        assert!(WeightTable::new(0, 2, vec![1.0, 0.0, 3.0, 4.0], Provenance::UserSupplied).is_err());
        assert!(WeightTable::new(0, 2, vec![1.0, f64::INFINITY, 3.0, 4.0], Provenance::Ideal).is_err());
        assert!(WeightTable::new(0, 2, vec![1.0; 3], Provenance::Ideal).is_err());
    }

    #[test]
    fn relative_error() {
        let a = WeightTable::uniform(1, 2, 3.0, Provenance::Ideal).unwrap();
        let b = WeightTable::new(1, 2, vec![3.0, 3.3, 2.7, 3.0], Provenance::Adaptive).unwrap();
        assert!((b.max_relative_error(&a) - 0.1).abs() < 1e-12);
    }
}
