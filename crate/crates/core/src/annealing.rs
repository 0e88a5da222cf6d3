//! Simulated-annealing baseline: one Markov chain per level and the
//! telescoping product `Z_r = Z_0 prod_k Z_k / Z_{k-1}`.
//!
//! Level `k` runs a chain targeting `eta_{k-1}` (warm-started from the
//! previous level's final state) and estimates `Z_k / Z_{k-1}` by the sample
//! mean of `Phi_k / Phi_{k-1}`. The permanent estimate is `Z_r / (n^2 + 1)`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::kernel::KernelContext;
use crate::math::{ln_factorial, log_sum_exp};
use crate::matrix::BinaryMatrix;
use crate::rng::{substream, Purpose};
use crate::schedule::ActivitySchedule;
use crate::smc::{sample_eta0, EstimatorReport};
use crate::target::{incremental_weight, ExactModel};
use crate::weights::{Provenance, WeightTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SaWeights {
    /// Exact ideal tables (`n <= 7`).
    Ideal,
    /// `w_k` estimated from the level-`(k-1)` samples, same rule as the
    /// adaptive SMC update with equal particle weights.
    AdaptiveFromSamples,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaConfig {
    pub samples_per_level: usize,
    pub burn_in: usize,
    /// Proposals between samples; `None` means `n^2`.
    pub sweeps: Option<usize>,
    pub seed: u64,
    pub weights: SaWeights,
    pub delta: f64,
}

impl SaConfig {
    pub fn new(samples_per_level: usize, seed: u64) -> Self {
        Self {
            samples_per_level,
            burn_in: 0,
            sweeps: None,
            seed,
            weights: SaWeights::AdaptiveFromSamples,
            delta: 1e-10,
        }
    }
}

pub fn run_simulated_annealing(a: &BinaryMatrix, s: &ActivitySchedule, cfg: &SaConfig) -> Result<EstimatorReport> {
    if cfg.samples_per_level == 0 {
        return Err(Error::invalid("samples_per_level must be at least 1"));
    }
    if s.matrix() != a {
        return Err(Error::invalid("schedule was built for a different matrix"));
    }
    let n = a.n();
    let r = s.r();
    let sweeps = cfg.sweeps.unwrap_or(n * n);
    if sweeps == 0 {
        return Err(Error::invalid("sweeps must be at least 1"));
    }
    let ideal = match cfg.weights {
        SaWeights::Ideal => Some(ExactModel::new(s)?.ideal_tables()),
        SaWeights::AdaptiveFromSamples => None,
    };
    let mut table = match &ideal {
        Some(t) => t[0].clone(),
        None => WeightTable::uniform(0, n, n as f64, Provenance::Ideal)?,
    };

    // ln Z_0 = ln(n! + (n-1)! sum w_0)
    let mut log_z = ln_factorial(n.saturating_sub(1)) + libm::log(n as f64 + table.values().iter().sum::<f64>());
    let mut state = sample_eta0(&table, &mut substream(cfg.seed, Purpose::Annealing, 0, 0));
    let mut samples = Vec::with_capacity(cfg.samples_per_level);
    let mut ratio_trace = Vec::with_capacity(r);
    // eta_r mass on perfect matchings of the original graph
    let mut perfect_fraction = if r == 0 { 1.0 / (n * n + 1) as f64 } else { 0.0 };

    for k in 1..=r {
        let ctx = KernelContext::new(s, k - 1, &table, sweeps)?;
        let mut rng = substream(cfg.seed, Purpose::Annealing, k as u64, 0);
        for _ in 0..cfg.burn_in {
            ctx.step_in_place(&mut state, &mut rng);
        }
        samples.clear();
        for _ in 0..cfg.samples_per_level {
            ctx.step_in_place(&mut state, &mut rng);
            samples.push(state.clone());
        }
        let next = match &ideal {
            Some(t) => t[k].clone(),
            None => estimate_next_table(s, k - 1, &table, &samples, cfg.delta),
        };
        let log_g: Vec<f64> = samples
            .iter()
            .map(|m| libm::log(incremental_weight(s, k - 1, &table, &next, m)))
            .collect();
        let log_ratio = log_sum_exp(&log_g) - libm::log(samples.len() as f64);
        if k == r {
            let top = log_g.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let (mut hit, mut all) = (0.0, 0.0);
            for (m, lg) in samples.iter().zip(&log_g) {
                let g = libm::exp(lg - top);
                all += g;
                if m.is_perfect() && m.pairs().all(|(u, v)| a.get(u, v)) {
                    hit += g;
                }
            }
            perfect_fraction = hit / all;
        }
        ratio_trace.push(libm::exp(log_ratio));
        log_z += log_ratio;
        table = next;
    }

    let log_est = log_z - libm::log((n * n + 1) as f64);
    let log_gamma = log_est - ln_factorial(n);
    Ok(EstimatorReport {
        n,
        mode: String::from("SA"),
        particles: cfg.samples_per_level,
        ess_threshold: 0.0,
        delta: cfg.delta,
        seed: cfg.seed,
        r,
        sweeps,
        estimate_gamma: libm::exp(log_gamma),
        estimate_est1: libm::exp(log_est),
        estimate_est2: Some(libm::exp(log_z) * perfect_fraction),
        log_gamma,
        log_est1: log_est,
        ess_trace: Vec::new(),
        lambda_trace: ratio_trace,
        resample_steps: Vec::new(),
        wall_time_s: None,
    })
}

fn estimate_next_table(
    s: &ActivitySchedule,
    p: usize,
    table: &WeightTable,
    samples: &[crate::matching::Matching],
    delta: f64,
) -> WeightTable {
    let n = s.n();
    let step = s.nonedge_log_activity(p + 1) - s.nonedge_log_activity(p);
    let q = 1.0 / samples.len() as f64;
    let mut perfect = 0.0;
    let mut holes = vec![0.0; n * n];
    for m in samples {
        let rho = libm::exp(s.nonedges_in(m) as f64 * step);
        match m.hole() {
            None => perfect += q * rho,
            Some((u, v)) => holes[u * n + v] += q * rho,
        }
    }
    let values = (0..n * n)
        .map(|k| (perfect + delta) / (holes[k] / table.values()[k] + delta))
        .collect();
    WeightTable::new(p + 1, n, values, Provenance::Adaptive).expect("delta keeps entries positive")
}
