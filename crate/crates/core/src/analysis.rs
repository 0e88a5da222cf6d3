//! Experiment statistics and the analytical constants of the variance bound.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::oracle::enumerate_matchings;
use crate::schedule::ActivitySchedule;
use crate::target::{big_phi, incremental_weight, ExactModel, ETA_MAX_N};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SampleSummary {
    pub count: usize,
    pub mean: f64,
    /// Unbiased (`count - 1`) sample variance; `None` for a single value.
    pub variance: Option<f64>,
    pub relative_variance: Option<f64>,
}

/// Mean, sample variance and `variance / mean^2`, summed in input order.
pub fn summarize(values: &[f64]) -> Result<SampleSummary> {
    if values.is_empty() {
        return Err(Error::invalid("no values to summarize"));
    }
    let count = values.len();
    let mean = values.iter().sum::<f64>() / count as f64;
    let variance = (count >= 2)
        .then(|| values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (count - 1) as f64);
    let relative_variance = variance.filter(|_| mean != 0.0).map(|v| v / (mean * mean));
    Ok(SampleSummary {
        count,
        mean,
        variance,
        relative_variance,
    })
}

/// Sample variance over squared sample mean.
pub fn relative_variance(estimates: &[f64]) -> Result<f64> {
    if estimates.len() < 2 {
        return Err(Error::invalid("relative variance needs at least 2 estimates"));
    }
    let s = summarize(estimates)?;
    if s.mean == 0.0 {
        return Err(Error::invalid("relative variance undefined for zero mean"));
    }
    Ok(s.relative_variance.expect("count >= 2 and mean != 0"))
}

/// `tau(n) = 8 (n^2 + 1) / n^2`.
pub fn tau(n: usize) -> f64 {
    let n2 = (n * n) as f64;
    8.0 * (n2 + 1.0) / n2
}

/// `rho(n) = (1 - 1/(C n^2))^2`.
pub fn rho(n: usize, c_poincare: f64) -> f64 {
    let x = 1.0 - 1.0 / (c_poincare * (n * n) as f64);
    x * x
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ComplexityConstants {
    pub n: usize,
    pub c_poincare: f64,
    pub r: usize,
    pub particles: usize,
    pub tau: f64,
    pub rho: f64,
    /// `tau^3 (1 - rho) < 1`.
    pub condition_holds: bool,
    /// `(tau^(3/4) / (1 - (1 - rho) tau^3))^2`, when the condition holds.
    pub cbar: Option<f64>,
    /// `2 cbar (r + 1)(3 + cbar^2)`: the bound needs `N` above this.
    pub n_min_particles: Option<f64>,
    /// `((r+1) cbar^2 / N)(1 + 2 (r+1) cbar (3 + cbar^2) / N)`.
    pub bound_value: Option<f64>,
    pub particles_sufficient: bool,
}

pub fn complexity_constants(n: usize, c_poincare: f64, r: usize, particles: usize) -> Result<ComplexityConstants> {
    if n == 0 || particles == 0 {
        return Err(Error::invalid("n and N must be positive"));
    }
    if !(c_poincare > 0.0 && c_poincare.is_finite()) {
        return Err(Error::invalid("Poincare constant must be positive"));
    }
    let tau = tau(n);
    let rho = rho(n, c_poincare);
    let tau3 = tau * tau * tau;
    let condition_holds = tau3 * (1.0 - rho) < 1.0;
    let (cbar, n_min, bound) = if condition_holds {
        let c = libm::pow(libm::pow(tau, 0.75) / (1.0 - (1.0 - rho) * tau3), 2.0);
        let rp1 = (r + 1) as f64;
        let big_n = particles as f64;
        let n_min = 2.0 * c * rp1 * (3.0 + c * c);
        let bound = rp1 * c * c / big_n * (1.0 + 2.0 * rp1 * c * (3.0 + c * c) / big_n);
        (Some(c), Some(n_min), Some(bound))
    } else {
        (None, None, None)
    };
    Ok(ComplexityConstants {
        n,
        c_poincare,
        r,
        particles,
        tau,
        rho,
        condition_holds,
        cbar,
        n_min_particles: n_min,
        bound_value: bound,
        particles_sufficient: n_min.is_some_and(|m| particles as f64 > m),
    })
}

/// Exact check of the incremental-weight bounds at one step, ideal weights.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Lemma1Step {
    pub p: usize,
    /// `lambda_p = sum_M eta_p(M) G_p(M)`.
    pub lambda: f64,
    pub sup_g: f64,
    pub ratio: f64,
    /// `8 (n^2 + 1) / n^2`.
    pub ratio_bound: f64,
    /// `n^2 / (4 sqrt(2) (n^2 + 1))`.
    pub lambda_lower_bound: f64,
    pub ratio_ok: bool,
    pub sup_g_ok: bool,
    pub lambda_ok: bool,
}

impl Lemma1Step {
    pub fn passed(&self) -> bool {
        self.ratio_ok && self.sup_g_ok && self.lambda_ok
    }
}

/// For every `p < r`: exact `lambda_p`, `sup_M G_p(M)` and their ratio with
/// ideal weights, against `tau(n)`, `sqrt 2` and the lower bound on
/// `lambda_p`. Enumerates the completed state space (`n <= 5`).
pub fn lemma1_ratio_check(s: &ActivitySchedule) -> Result<Vec<Lemma1Step>> {
    let n = s.n();
    Error::guard("lemma1_ratio_check", n, ETA_MAX_N)?;
    let model = ExactModel::new(s)?;
    let tables = model.ideal_tables();
    let states = enumerate_matchings(s.matrix(), true)?.items;
    let n2 = (n * n) as f64;
    let ratio_bound = tau(n);
    let lambda_lower_bound = n2 / (4.0 * core::f64::consts::SQRT_2 * (n2 + 1.0));
    let tol = 1e-12;
    Ok((0..s.r())
        .map(|p| {
            let z = model.z(p, &tables[p]);
            let mut lambda = 0.0;
            let mut sup_g: f64 = 0.0;
            for m in &states {
                let eta = big_phi(s, p, &tables[p], m) / z;
                let g = incremental_weight(s, p, &tables[p], &tables[p + 1], m);
                lambda += eta * g;
                sup_g = sup_g.max(g);
            }
            let ratio = sup_g / lambda;
            Lemma1Step {
                p,
                lambda,
                sup_g,
                ratio,
                ratio_bound,
                lambda_lower_bound,
                ratio_ok: ratio <= ratio_bound * (1.0 + tol),
                sup_g_ok: sup_g <= core::f64::consts::SQRT_2 * (1.0 + tol),
                lambda_ok: lambda >= lambda_lower_bound * (1.0 - tol),
            }
        })
        .collect())
}
