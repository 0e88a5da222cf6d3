//! Cooling schedule of the non-edge activities.
//!
//! Every non-edge starts at activity 1 and is multiplied by `step_factor` per
//! step until it reaches `1/n!`; edges keep activity 1 throughout. With the
//! default factor `2^(-1/(2n))` a matching (at most `n` non-edges) loses at
//! most a factor `sqrt(2)` of activity per step, and the number of steps is
//! `r = ceil(2n log2 n!)`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::ln_factorial;
use crate::matching::Matching;
use crate::matrix::BinaryMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct ActivitySchedule {
    matrix: BinaryMatrix,
    step_factor: f64,
    /// `ln phi_p` of a non-edge, `p = 0..=r`.
    levels: Vec<f64>,
}

/// Exported form of a schedule.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScheduleSummary {
    pub n: usize,
    pub r: usize,
    pub step_factor: f64,
    pub phi_final_nonedge: f64,
}

/// `2^(-1/(2n))`.
pub fn default_step_factor(n: usize) -> f64 {
    libm::exp2(-1.0 / (2.0 * n as f64))
}

/// Builds the geometric schedule for `a`.
///
/// `r` is the smallest `p` with `step_factor^p <= 1/n!` unless `r_override`
/// is given, in which case the factor is rescaled to `(1/n!)^(1/r)` so the
/// schedule still ends at `1/n!`.
pub fn build_schedule(
    a: &BinaryMatrix,
    step_factor: f64,
    r_override: Option<usize>,
) -> Result<ActivitySchedule> {
    if !(step_factor > 0.0 && step_factor < 1.0) {
        return Err(Error::invalid(format!(
            "step factor must lie in (0, 1), got {step_factor}"
        )));
    }
    let n = a.n();
    let floor = -ln_factorial(n);
    let needs_cooling = floor < 0.0 && !a.is_complete();
    let (r, factor) = match r_override {
        None => (natural_steps(floor, libm::log(step_factor)), step_factor),
        Some(0) if needs_cooling => {
            return Err(Error::invalid(
                "r = 0 is only possible when the matrix has no non-edges (or n = 1)",
            ))
        }
        Some(r) if needs_cooling => (r, libm::exp(floor / r as f64)),
        Some(r) => (r, step_factor),
    };
    let ln_factor = libm::log(factor);
    let mut levels: Vec<f64> = (0..=r).map(|p| (p as f64 * ln_factor).max(floor)).collect();
    levels[r] = floor;
    levels[0] = 0.0;
    Ok(ActivitySchedule {
        matrix: a.clone(),
        step_factor: factor,
        levels,
    })
}

/// Smallest `p >= 0` with `p * ln_factor <= floor`, tolerant to rounding in
/// the division (e.g. `n = 2` gives exactly 4 steps).
fn natural_steps(floor: f64, ln_factor: f64) -> usize {
    if floor >= 0.0 {
        return 0;
    }
    let x = floor / ln_factor;
    libm::ceil(x - 1e-9 * x.max(1.0)) as usize
}

impl ActivitySchedule {
    /// Schedule from explicit non-edge log-activities `ln phi_0 .. ln phi_r`.
    /// They must start at 0, never increase and end at `-ln n!`.
    pub fn from_log_levels(a: &BinaryMatrix, levels: Vec<f64>) -> Result<Self> {
        let floor = -ln_factorial(a.n());
        let ok = !levels.is_empty()
            && levels[0] == 0.0
            && levels.windows(2).all(|w| w[1] <= w[0])
            && levels.iter().all(|l| l.is_finite())
            && (levels[levels.len() - 1] - floor).abs() <= 1e-12 * floor.abs().max(1.0);
        if !ok {
            return Err(Error::invalid(
                "levels must start at 0, be nonincreasing and end at -ln(n!)",
            ));
        }
        let r = levels.len() - 1;
        let step_factor = if r == 0 { 1.0 } else { libm::exp(floor / r as f64) };
        Ok(Self {
            matrix: a.clone(),
            step_factor,
            levels,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    /// Number of cooling steps; targets are indexed `0..=r`.
    #[inline]
    pub fn r(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn step_factor(&self) -> f64 {
        self.step_factor
    }

    pub fn matrix(&self) -> &BinaryMatrix {
        &self.matrix
    }

    #[inline]
    pub fn nonedge_log_activity(&self, p: usize) -> f64 {
        self.levels[p]
    }

    #[inline]
    pub fn nonedge_activity(&self, p: usize) -> f64 {
        libm::exp(self.levels[p])
    }

    #[inline]
    pub fn log_activity(&self, p: usize, u: usize, v: usize) -> f64 {
        if self.matrix.get(u, v) {
            0.0
        } else {
            self.levels[p]
        }
    }

    #[inline]
    pub fn activity(&self, p: usize, u: usize, v: usize) -> f64 {
        if self.matrix.get(u, v) {
            1.0
        } else {
            self.nonedge_activity(p)
        }
    }

    /// All `n^2` activities at step `p`, row-major.
    pub fn activities(&self, p: usize) -> Vec<f64> {
        let n = self.n();
        let off = self.nonedge_activity(p);
        (0..n * n)
            .map(|k| if self.matrix.get(k / n, k % n) { 1.0 } else { off })
            .collect()
    }

    /// Number of pairs of `m` that are not edges of the matrix.
    pub fn nonedges_in(&self, m: &Matching) -> usize {
        m.pairs().filter(|&(u, v)| !self.matrix.get(u, v)).count()
    }

    /// `ln phi_p(M)`.
    pub fn log_phi(&self, p: usize, m: &Matching) -> f64 {
        self.nonedges_in(m) as f64 * self.levels[p]
    }

    /// `phi_p(M)`, the product of the activities of the pairs of `m`.
    pub fn phi(&self, p: usize, m: &Matching) -> f64 {
        m.pairs().map(|(u, v)| self.activity(p, u, v)).product()
    }

    pub fn summary(&self) -> ScheduleSummary {
        ScheduleSummary {
            n: self.n(),
            r: self.r(),
            step_factor: self.step_factor,
            phi_final_nonedge: self.nonedge_activity(self.r()),
        }
    }
}

/// `phi_p(M)` as a free function.
pub fn phi_of_matching(s: &ActivitySchedule, p: usize, m: &Matching) -> f64 {
    s.phi(p, m)
}
