//! Unnormalized targets `Phi_p` and their exact small-`n` companions: class
//! sums `Xi_p`, ideal weights, normalizers `Z_p` and the normalized targets
//! `eta_p`.
//!
//! Exact quantities come from one pass over `S_n`. Since every non-edge has
//! the same activity at a given step, `phi_p(M)` only depends on the number
//! `k` of non-edges in `M`; the pass tallies, for the perfect class and for
//! every hole class, how many matchings have each `k`. A near-perfect matching
//! with hole `(u, v)` is a permutation with `sigma(u) = v` minus that pair, so
//! the same pass covers all `n^2 + 1` classes. Sums are then taken over `k` in
//! increasing order, which keeps results independent of evaluation order.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matching::{Matching, MatchingClass};
use crate::oracle::{enumerate_matchings, for_each_permutation, COMPLETED_ENUMERATION_MAX_N};
use crate::schedule::ActivitySchedule;
use crate::weights::{Provenance, WeightTable};

pub const ETA_MAX_N: usize = 5;

/// `Phi_p(M)`: `phi_p(M)` on perfect matchings, `phi_p(M) w_p(u, v)` on the
/// hole class `(u, v)`.
pub fn big_phi(s: &ActivitySchedule, p: usize, w: &WeightTable, m: &Matching) -> f64 {
    let phi = s.phi(p, m);
    match m.hole() {
        None => phi,
        Some((u, v)) => phi * w.get(u, v),
    }
}

/// `ln Phi_p(M)`.
pub fn log_big_phi(s: &ActivitySchedule, p: usize, w: &WeightTable, m: &Matching) -> f64 {
    let lphi = s.log_phi(p, m);
    match m.hole() {
        None => lphi,
        Some((u, v)) => lphi + libm::log(w.get(u, v)),
    }
}

/// Incremental weight `Phi_{p+1}(M) / Phi_p(M)` with tables `w_p` and `w_{p+1}`.
pub fn incremental_weight(
    s: &ActivitySchedule,
    p: usize,
    w_now: &WeightTable,
    w_next: &WeightTable,
    m: &Matching,
) -> f64 {
    let k = s.nonedges_in(m) as f64;
    let g = libm::exp(k * (s.nonedge_log_activity(p + 1) - s.nonedge_log_activity(p)));
    match m.hole() {
        None => g,
        Some((u, v)) => g * w_next.get(u, v) / w_now.get(u, v),
    }
}

/// Non-edge count histograms for every class of the completed graph.
#[derive(Debug, Clone)]
pub struct ExactModel {
    schedule: ActivitySchedule,
    perfect: Vec<u64>,
    /// `holes[(u * n + v) * (n + 1) + k]`.
    holes: Vec<u64>,
}

impl ExactModel {
    pub fn new(s: &ActivitySchedule) -> Result<Self> {
        let n = s.n();
        Error::guard("exact class sums", n, COMPLETED_ENUMERATION_MAX_N)?;
        let a = s.matrix();
        let stride = n + 1;
        let mut perfect = vec![0u64; stride];
        let mut holes = vec![0u64; n * n * stride];
        for_each_permutation(n, |sigma| {
            let k = sigma.iter().enumerate().filter(|&(i, &j)| !a.get(i, j)).count();
            perfect[k] += 1;
            for (u, &v) in sigma.iter().enumerate() {
                let k_hole = k - usize::from(!a.get(u, v));
                holes[(u * n + v) * stride + k_hole] += 1;
            }
        });
        Ok(Self {
            schedule: s.clone(),
            perfect,
            holes,
        })
    }

    pub fn schedule(&self) -> &ActivitySchedule {
        &self.schedule
    }

    fn sum(&self, counts: &[u64], p: usize) -> f64 {
        let level = self.schedule.nonedge_log_activity(p);
        counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(k, &c)| c as f64 * libm::exp(k as f64 * level))
            .sum()
    }

    fn hole_counts(&self, u: usize, v: usize) -> &[u64] {
        let stride = self.schedule.n() + 1;
        let at = (u * self.schedule.n() + v) * stride;
        &self.holes[at..at + stride]
    }

    /// `Xi_p(C)`: sum of `phi_p` over a class.
    pub fn xi(&self, p: usize, class: MatchingClass) -> f64 {
        match class {
            MatchingClass::Perfect => self.sum(&self.perfect, p),
            MatchingClass::Hole(u, v) => self.sum(self.hole_counts(u, v), p),
        }
    }

    /// `w_p*(u, v) = Xi_p(perfect) / Xi_p(hole class (u, v))`.
    pub fn ideal_weights(&self, p: usize) -> WeightTable {
        let n = self.schedule.n();
        let top = self.xi(p, MatchingClass::Perfect);
        let values = (0..n * n)
            .map(|k| top / self.xi(p, MatchingClass::Hole(k / n, k % n)))
            .collect();
        WeightTable::new(p, n, values, Provenance::Ideal)
            .expect("class sums of the completed graph are positive")
    }

    /// Ideal tables for every step `0..=r`.
    pub fn ideal_tables(&self) -> Vec<WeightTable> {
        (0..=self.schedule.r()).map(|p| self.ideal_weights(p)).collect()
    }

    /// `Z_p = Xi_p(perfect) + sum_{u,v} w(u, v) Xi_p(hole class)`.
    pub fn z(&self, p: usize, w: &WeightTable) -> f64 {
        let n = self.schedule.n();
        let mut z = self.xi(p, MatchingClass::Perfect);
        for u in 0..n {
            for v in 0..n {
                z += w.get(u, v) * self.xi(p, MatchingClass::Hole(u, v));
            }
        }
        z
    }

    /// `sum_{M in perfect} phi_p(M)` restricted to matchings using only edges,
    /// i.e. the permanent (as a float).
    pub fn permanent(&self) -> f64 {
        self.perfect[0] as f64
    }
}

pub fn xi_exact(s: &ActivitySchedule, p: usize, class: MatchingClass) -> Result<f64> {
    Ok(ExactModel::new(s)?.xi(p, class))
}

pub fn ideal_weights(s: &ActivitySchedule, p: usize) -> Result<WeightTable> {
    Ok(ExactModel::new(s)?.ideal_weights(p))
}

pub fn z_exact(s: &ActivitySchedule, p: usize, w: &WeightTable) -> Result<f64> {
    Ok(ExactModel::new(s)?.z(p, w))
}

/// A probability table over an explicit list of states.
#[derive(Debug, Clone)]
pub struct StateDistribution {
    pub states: Vec<Matching>,
    pub probs: Vec<f64>,
}

impl StateDistribution {
    pub fn class_mass(&self, class: MatchingClass) -> f64 {
        self.states
            .iter()
            .zip(&self.probs)
            .filter(|(m, _)| m.class() == class)
            .map(|(_, &q)| q)
            .sum()
    }

    pub fn index_of(&self, m: &Matching) -> Option<usize> {
        self.states.iter().position(|s| s == m)
    }
}

/// `eta_p(M) = Phi_p(M) / Z_p` over the whole completed state space, in
/// [`enumerate_matchings`] order.
pub fn eta_exact(s: &ActivitySchedule, p: usize, w: &WeightTable) -> Result<StateDistribution> {
    Error::guard("eta_exact", s.n(), ETA_MAX_N)?;
    let states = enumerate_matchings(s.matrix(), true)?.items;
    let mass: Vec<f64> = states.iter().map(|m| big_phi(s, p, w, m)).collect();
    let z: f64 = mass.iter().sum();
    let probs = mass.into_iter().map(|x| x / z).collect();
    Ok(StateDistribution { states, probs })
}
