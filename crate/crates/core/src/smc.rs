//! Adaptive sequential Monte Carlo over the cooling schedule.
//!
//! One run moves `N` weighted matchings from `eta_0` to `eta_r`:
//!
//! 1. draw the population i.i.d. from `eta_0`, all weights 1;
//! 2. build the weight table of the next target (estimated from the current
//!    population in adaptive mode, exact in ideal mode, given in user mode);
//! 3. multiply every weight by its incremental weight `Phi_{p+1} / Phi_p`,
//!    and resample multinomially when the ESS drops below `T`;
//! 4. move every particle with `sweeps` Metropolis-Hastings proposals
//!    targeting `eta_{p+1}`, and continue with step 2 until `p = r`.
//!
//! The normalizer ratio `Z_r / Z_0` is the product of the mean weights over
//! the resampling epochs, accumulated in log space. When the run ends with
//! unresampled weights their mean closes the last epoch.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::kernel::KernelContext;
use crate::math::{ln_factorial, log_sum_exp};
use crate::matching::Matching;
use crate::matrix::BinaryMatrix;
use crate::rng::{substream, Purpose};
use crate::schedule::{build_schedule, default_step_factor, ActivitySchedule};
use crate::target::ExactModel;
use crate::weights::{Provenance, WeightTable};

/// How the weight table of each target is obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightMode {
    /// Estimated from the population before each reweighting.
    Adaptive,
    /// Exact ideal weights (`n <= 7`); no adaptation.
    Ideal,
    /// One table per step `0..=r`.
    UserWeights(Vec<WeightTable>),
}

impl WeightMode {
    pub fn label(&self) -> &'static str {
        match self {
            WeightMode::Adaptive => "adaptive",
            WeightMode::Ideal => "ideal",
            WeightMode::UserWeights(_) => "user",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmcConfig {
    pub particles: usize,
    /// Absolute ESS threshold `T`: resample when `ESS < T`.
    pub ess_threshold: f64,
    pub delta: f64,
    pub mode: WeightMode,
    /// Proposals per mutation; `None` means `n^2`.
    pub sweeps: Option<usize>,
    pub seed: u64,
    /// `None` means `2^(-1/(2n))`.
    pub step_factor: Option<f64>,
    pub r_override: Option<usize>,
    pub lazy: bool,
    /// Resample after every reweighting regardless of the ESS.
    pub resample_every_step: bool,
}

impl SmcConfig {
    /// Adaptive mode, `T = N/2`, `delta = 1e-10`.
    pub fn new(particles: usize, seed: u64) -> Self {
        Self {
            particles,
            ess_threshold: particles as f64 / 2.0,
            delta: 1e-10,
            mode: WeightMode::Adaptive,
            sweeps: None,
            seed,
            step_factor: None,
            r_override: None,
            lazy: false,
            resample_every_step: false,
        }
    }

    pub fn with_mode(mut self, mode: WeightMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_ess_threshold(mut self, t: f64) -> Self {
        self.ess_threshold = t;
        self
    }

    pub fn with_sweeps(mut self, sweeps: usize) -> Self {
        self.sweeps = Some(sweeps);
        self
    }

    pub fn with_r_override(mut self, r: usize) -> Self {
        self.r_override = Some(r);
        self
    }

    pub fn with_resampling_every_step(mut self) -> Self {
        self.resample_every_step = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.particles == 0 {
            return Err(Error::invalid("particle count must be at least 1"));
        }
        if !(self.ess_threshold >= 1.0 && self.ess_threshold <= self.particles as f64) {
            return Err(Error::invalid("ESS threshold must satisfy 1 <= T <= N"));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::invalid("delta must be positive"));
        }
        if self.sweeps == Some(0) {
            return Err(Error::invalid("sweeps must be at least 1"));
        }
        Ok(())
    }

    pub fn schedule_for(&self, a: &BinaryMatrix) -> Result<ActivitySchedule> {
        let factor = self.step_factor.unwrap_or_else(|| default_step_factor(a.n()));
        build_schedule(a, factor, self.r_override)
    }

    pub fn sweeps_for(&self, n: usize) -> usize {
        self.sweeps.unwrap_or(n * n)
    }
}

/// Runs a closure over every particle. Implementations may parallelise; the
/// closure only touches its own particle and draws from its own substream, so
/// results do not depend on scheduling.
pub trait Executor {
    fn for_each_particle(&self, particles: &mut [Matching], f: &(dyn Fn(usize, &mut Matching) + Sync));
}

/// Runs particles one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn for_each_particle(&self, particles: &mut [Matching], f: &(dyn Fn(usize, &mut Matching) + Sync)) {
        for (i, m) in particles.iter_mut().enumerate() {
            f(i, m);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResampleEvent {
    pub step: usize,
    /// `ln((1/N) sum_i omega_i)` just before the reset.
    pub log_mean_weight: f64,
}

/// The weighted population at step `p`.
#[derive(Debug, Clone)]
pub struct ParticleSystem {
    pub p: usize,
    pub particles: Vec<Matching>,
    /// `ln omega_i`.
    pub log_weights: Vec<f64>,
    /// Tables `w_0 .. w_p` used so far.
    pub weight_tables: Vec<WeightTable>,
    pub resample_log: Vec<ResampleEvent>,
    pub seed: u64,
}

impl ParticleSystem {
    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    /// `omega_i`, scaled by a common factor so the largest is 1.
    pub fn weights(&self) -> Vec<f64> {
        let max = self.log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        self.log_weights.iter().map(|&l| libm::exp(l - max)).collect()
    }

    /// `omega_i / sum_j omega_j`.
    pub fn normalized_weights(&self) -> Vec<f64> {
        let lse = log_sum_exp(&self.log_weights);
        self.log_weights.iter().map(|&l| libm::exp(l - lse)).collect()
    }

    /// `ln((1/N) sum_i omega_i)`.
    pub fn log_mean_weight(&self) -> f64 {
        log_sum_exp(&self.log_weights) - libm::log(self.len() as f64)
    }

    pub fn ess(&self) -> f64 {
        ess_from_log(&self.log_weights)
    }

    pub fn current_table(&self) -> &WeightTable {
        self.weight_tables.last().expect("w_0 is always present")
    }
}

/// `(sum w)^2 / sum w^2`.
pub fn ess(weights: &[f64]) -> Result<f64> {
    let s: f64 = weights.iter().sum();
    if !(s > 0.0) {
        return Err(Error::ZeroWeights);
    }
    let s2: f64 = weights.iter().map(|w| w * w).sum();
    Ok((s * s / s2).clamp(1.0, weights.len() as f64))
}

fn ess_from_log(log_weights: &[f64]) -> f64 {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut s = 0.0;
    let mut s2 = 0.0;
    for &l in log_weights {
        let w = libm::exp(l - max);
        s += w;
        s2 += w * w;
    }
    (s * s / s2).clamp(1.0, log_weights.len() as f64)
}

/// Draws one matching from `eta_0` for weights `w0`: the perfect class has
/// mass `n!`, hole class `(u, v)` has mass `(n-1)! w0(u, v)`, and within a
/// class the bijection is uniform.
pub fn sample_eta0<R: Rng + ?Sized>(w0: &WeightTable, rng: &mut R) -> Matching {
    let n = w0.n();
    let total = n as f64 + w0.values().iter().sum::<f64>();
    let mut x = rng.gen::<f64>() * total;
    let mut hole = None;
    if x >= n as f64 {
        x -= n as f64;
        let vals = w0.values();
        let mut k = vals.len() - 1;
        for (i, &w) in vals.iter().enumerate() {
            if x < w {
                k = i;
                break;
            }
            x -= w;
        }
        hole = Some((k / n, k % n));
    }
    let mut cols: Vec<u16> = (0..n as u16).filter(|&c| hole.map_or(true, |(_, v)| c as usize != v)).collect();
    cols.shuffle(rng);
    let mut cols = cols.into_iter();
    let map = (0..n)
        .map(|u| match hole {
            Some((hu, _)) if hu == u => u16::MAX,
            _ => cols.next().expect("one column per matched row"),
        })
        .collect();
    Matching::from_row_map(map, hole.map(|(u, v)| (u as u16, v as u16)))
}

/// Step 1: `N` i.i.d. draws from `eta_0`, all weights 1.
pub fn init_particles(cfg: &SmcConfig, w0: WeightTable) -> Result<ParticleSystem> {
    cfg.validate()?;
    if w0.p != 0 {
        return Err(Error::invalid("initial table must be for step 0"));
    }
    let particles = (0..cfg.particles)
        .map(|i| sample_eta0(&w0, &mut substream(cfg.seed, Purpose::Init, 0, i as u64)))
        .collect();
    Ok(ParticleSystem {
        p: 0,
        particles,
        log_weights: vec![0.0; cfg.particles],
        weight_tables: vec![w0],
        resample_log: Vec::new(),
        seed: cfg.seed,
    })
}

/// Step 2: estimate `w_{p+1}` from the population at step `p`.
///
/// With `pi_i` the normalized weights and `rho_i = phi_{p+1}(M_i)/phi_p(M_i)`:
/// `w_{p+1}(u, v) = (sum_{perfect} pi_i rho_i + delta)
///                 / (sum_{hole (u,v)} pi_i rho_i / w_p(u, v) + delta)`.
/// One pass buckets particles by class.
pub fn adaptive_weight_update(ps: &ParticleSystem, s: &ActivitySchedule, delta: f64) -> WeightTable {
    let n = s.n();
    let p = ps.p;
    let step = s.nonedge_log_activity(p + 1) - s.nonedge_log_activity(p);
    let pi = ps.normalized_weights();
    let mut perfect = 0.0;
    let mut holes = vec![0.0; n * n];
    for (m, &q) in ps.particles.iter().zip(&pi) {
        let rho = libm::exp(s.nonedges_in(m) as f64 * step);
        match m.hole() {
            None => perfect += q * rho,
            Some((u, v)) => holes[u * n + v] += q * rho,
        }
    }
    let prev = ps.current_table();
    let values = (0..n * n)
        .map(|k| (perfect + delta) / (holes[k] / prev.values()[k] + delta))
        .collect();
    WeightTable::new(p + 1, n, values, Provenance::Adaptive).expect("delta keeps entries positive and finite")
}

/// Step 3 reweighting: returns `G_i = Phi_{p+1}(M_i) / Phi_p(M_i)` and
/// multiplies the weights by it. Advances the system to step `p + 1`.
pub fn incremental_weights(ps: &mut ParticleSystem, s: &ActivitySchedule, new_table: WeightTable) -> Result<Vec<f64>> {
    if new_table.p != ps.p + 1 {
        return Err(Error::invalid("new table must be for step p + 1"));
    }
    let step = s.nonedge_log_activity(ps.p + 1) - s.nonedge_log_activity(ps.p);
    let old = ps.current_table();
    let n = s.n();
    let log_g: Vec<f64> = ps
        .particles
        .iter()
        .map(|m| {
            let base = s.nonedges_in(m) as f64 * step;
            match m.hole() {
                None => base,
                Some((u, v)) => base + libm::log(new_table.values()[u * n + v] / old.values()[u * n + v]),
            }
        })
        .collect();
    for (lw, lg) in ps.log_weights.iter_mut().zip(&log_g) {
        *lw += lg;
    }
    ps.weight_tables.push(new_table);
    ps.p += 1;
    Ok(log_g.into_iter().map(libm::exp).collect())
}

/// `count` indices drawn with replacement, `P(i) proportional to weights[i]`.
pub fn multinomial_indices<R: Rng + ?Sized>(weights: &[f64], count: usize, rng: &mut R) -> Result<Vec<usize>> {
    let mut cdf = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for &w in weights {
        if !(w >= 0.0) {
            return Err(Error::invalid("weights must be nonnegative"));
        }
        acc += w;
        cdf.push(acc);
    }
    if !(acc > 0.0) {
        return Err(Error::ZeroWeights);
    }
    Ok((0..count)
        .map(|_| {
            let x = rng.gen::<f64>() * acc;
            let i = cdf.partition_point(|&c| c <= x);
            // skip zero-weight entries that share the boundary
            i.min(weights.len() - 1)
        })
        .collect())
}

/// Multinomial resampling of the whole population. The pre-reset mean
/// weight goes to the resample log, then all weights become 1.
pub fn multinomial_resample<R: Rng + ?Sized>(ps: &mut ParticleSystem, rng: &mut R) -> Result<()> {
    let n = ps.len();
    let log_mean = ps.log_mean_weight();
    let idx = multinomial_indices(&ps.weights(), n, rng)?;
    ps.particles = idx.into_iter().map(|i| ps.particles[i].clone()).collect();
    ps.log_weights.iter_mut().for_each(|l| *l = 0.0);
    ps.resample_log.push(ResampleEvent {
        step: ps.p,
        log_mean_weight: log_mean,
    });
    Ok(())
}

/// Result of a run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EstimatorReport {
    pub n: usize,
    pub mode: String,
    #[cfg_attr(feature = "serde", serde(rename = "N"))]
    pub particles: usize,
    #[cfg_attr(feature = "serde", serde(rename = "T"))]
    pub ess_threshold: f64,
    pub delta: f64,
    pub seed: u64,
    pub r: usize,
    pub sweeps: usize,
    /// Estimate of `Z_r / Z_0`.
    pub estimate_gamma: f64,
    /// `n! * estimate_gamma`; may be `inf` for large `n`, see `log_est1`.
    pub estimate_est1: f64,
    pub estimate_est2: Option<f64>,
    /// `ln estimate_gamma`.
    pub log_gamma: f64,
    pub log_est1: f64,
    pub ess_trace: Vec<f64>,
    pub lambda_trace: Vec<f64>,
    pub resample_steps: Vec<usize>,
    /// Filled in by callers that time the run.
    pub wall_time_s: Option<f64>,
}

/// `n! * Z_r/Z_0`-estimate from a finished report.
pub fn estimate_est1(report: &EstimatorReport) -> f64 {
    libm::exp(ln_factorial(report.n) + report.log_gamma)
}

/// `n! (n^2 + 1) (Z_r/Z_0 estimate) * (weighted fraction of final particles
/// that are perfect matchings of the original graph)`.
pub fn estimate_est2(ps: &ParticleSystem, log_gamma: f64, a: &BinaryMatrix) -> f64 {
    let n = a.n();
    let pi = ps.normalized_weights();
    let frac: f64 = ps
        .particles
        .iter()
        .zip(&pi)
        .filter(|(m, _)| m.is_perfect() && m.pairs().all(|(u, v)| a.get(u, v)))
        .map(|(_, &q)| q)
        .sum();
    if frac == 0.0 {
        return 0.0;
    }
    libm::exp(ln_factorial(n) + libm::log((n * n + 1) as f64) + log_gamma + libm::log(frac))
}

/// The sampler with its state exposed between steps.
#[derive(Debug, Clone)]
pub struct Smc {
    matrix: BinaryMatrix,
    schedule: ActivitySchedule,
    cfg: SmcConfig,
    sweeps: usize,
    /// Precomputed tables for ideal and user modes.
    fixed_tables: Option<Vec<WeightTable>>,
    system: ParticleSystem,
    log_gamma: f64,
    ess_trace: Vec<f64>,
    lambda_trace: Vec<f64>,
    last_resampled: bool,
}

impl Smc {
    pub fn new(a: &BinaryMatrix, cfg: SmcConfig) -> Result<Self> {
        let schedule = cfg.schedule_for(a)?;
        Self::with_schedule(a, schedule, cfg)
    }

    pub fn with_schedule(a: &BinaryMatrix, schedule: ActivitySchedule, cfg: SmcConfig) -> Result<Self> {
        cfg.validate()?;
        if schedule.matrix() != a {
            return Err(Error::invalid("schedule was built for a different matrix"));
        }
        let n = a.n();
        let r = schedule.r();
        let fixed_tables = match &cfg.mode {
            WeightMode::Adaptive => None,
            WeightMode::Ideal => Some(ExactModel::new(&schedule)?.ideal_tables()),
            WeightMode::UserWeights(tables) => {
                if tables.len() != r + 1 {
                    return Err(Error::InvalidParameter(alloc::format!(
                        "expected {} weight tables (steps 0..={r}), got {}",
                        r + 1,
                        tables.len()
                    )));
                }
                if tables.iter().enumerate().any(|(p, t)| t.p != p || t.n() != n) {
                    return Err(Error::invalid("user tables must be indexed 0..=r with dimension n"));
                }
                Some(tables.clone())
            }
        };
        let w0 = match &fixed_tables {
            Some(t) => t[0].clone(),
            None => WeightTable::uniform(0, n, n as f64, Provenance::Ideal)?,
        };
        let system = init_particles(&cfg, w0)?;
        Ok(Self {
            matrix: a.clone(),
            schedule,
            sweeps: cfg.sweeps_for(n),
            cfg,
            fixed_tables,
            system,
            log_gamma: 0.0,
            ess_trace: Vec::new(),
            lambda_trace: Vec::new(),
            last_resampled: false,
        })
    }

    pub fn schedule(&self) -> &ActivitySchedule {
        &self.schedule
    }

    pub fn system(&self) -> &ParticleSystem {
        &self.system
    }

    pub fn is_done(&self) -> bool {
        self.system.p == self.schedule.r()
    }

    /// Steps 2-4 once: table, reweight, maybe resample, mutate.
    pub fn step(&mut self, exec: &dyn Executor) -> Result<()> {
        if self.is_done() {
            return Err(Error::invalid("run already reached p = r"));
        }
        let p = self.system.p;
        let table = match &self.fixed_tables {
            Some(t) => t[p + 1].clone(),
            None => adaptive_weight_update(&self.system, &self.schedule, self.cfg.delta),
        };
        let pi = self.system.normalized_weights();
        let g = incremental_weights(&mut self.system, &self.schedule, table)?;
        self.lambda_trace.push(pi.iter().zip(&g).map(|(q, g)| q * g).sum());

        let ess = self.system.ess();
        self.ess_trace.push(ess);
        self.last_resampled = self.cfg.resample_every_step || ess < self.cfg.ess_threshold;
        if self.last_resampled {
            let mut rng = substream(self.cfg.seed, Purpose::Resample, (p + 1) as u64, 0);
            multinomial_resample(&mut self.system, &mut rng)?;
            let event = self.system.resample_log.last().expect("just pushed");
            self.log_gamma += event.log_mean_weight;
        }

        let ParticleSystem {
            particles,
            weight_tables,
            ..
        } = &mut self.system;
        let table = weight_tables.last().expect("w_0 is always present");
        let ctx = KernelContext::new(&self.schedule, p + 1, table, self.sweeps)?.lazy(self.cfg.lazy);
        let seed = self.cfg.seed;
        let step = (p + 1) as u64;
        exec.for_each_particle(particles, &|i, m| {
            let mut rng = substream(seed, Purpose::Mutate, step, i as u64);
            ctx.step_in_place(m, &mut rng);
        });
        Ok(())
    }

    /// Runs to `p = r` and closes the last epoch.
    pub fn run(mut self, exec: &dyn Executor) -> Result<SmcOutcome> {
        while !self.is_done() {
            self.step(exec)?;
        }
        if !self.last_resampled {
            self.log_gamma += self.system.log_mean_weight();
        }
        let n = self.matrix.n();
        let log_est1 = ln_factorial(n) + self.log_gamma;
        let est2 = estimate_est2(&self.system, self.log_gamma, &self.matrix);
        let report = EstimatorReport {
            n,
            mode: String::from(self.cfg.mode.label()),
            particles: self.cfg.particles,
            ess_threshold: self.cfg.ess_threshold,
            delta: self.cfg.delta,
            seed: self.cfg.seed,
            r: self.schedule.r(),
            sweeps: self.sweeps,
            estimate_gamma: libm::exp(self.log_gamma),
            estimate_est1: libm::exp(log_est1),
            estimate_est2: Some(est2),
            log_gamma: self.log_gamma,
            log_est1,
            ess_trace: self.ess_trace,
            lambda_trace: self.lambda_trace,
            resample_steps: self.system.resample_log.iter().map(|e| e.step).collect(),
            wall_time_s: None,
        };
        Ok(SmcOutcome {
            report,
            system: self.system,
        })
    }
}

#[derive(Debug, Clone)]
pub struct SmcOutcome {
    pub report: EstimatorReport,
    pub system: ParticleSystem,
}

/// Full run of the sampler.
pub fn run_smc(a: &BinaryMatrix, cfg: SmcConfig, exec: &dyn Executor) -> Result<EstimatorReport> {
    Ok(Smc::new(a, cfg)?.run(exec)?.report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::parse_matrix;

    fn toy() -> BinaryMatrix {
        parse_matrix("3\n1 1 0\n0 1 1\n1 1 0").unwrap()
    }

    #[test]
    fn ess_examples() {
        assert!((ess(&[1.0; 10]).unwrap() - 10.0).abs() < 1e-12);
        assert!((ess(&[0.0, 3.0, 0.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((ess(&[1.0, 1.0, 2.0]).unwrap() - 16.0 / 6.0).abs() < 1e-12);
        assert_eq!(ess(&[0.0, 0.0]), Err(Error::ZeroWeights));
        let lw = [0.0f64, 0.0, libm::log(2.0)];
        assert!((ess_from_log(&lw) - 16.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_resample_copies_the_only_weighted_particle() {
        let mut rng = substream(1, Purpose::Resample, 0, 0);
        let idx = multinomial_indices(&[1.0, 0.0, 0.0, 0.0], 50, &mut rng).unwrap();
        assert!(idx.iter().all(|&i| i == 0));
        let idx = multinomial_indices(&[0.0, 0.0, 2.0], 50, &mut rng).unwrap();
        assert!(idx.iter().all(|&i| i == 2));
        assert!(multinomial_indices(&[0.0, 0.0], 5, &mut rng).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(SmcConfig::new(0, 1).validate().is_err());
        assert!(SmcConfig::new(10, 1).with_ess_threshold(11.0).validate().is_err());
        assert!(SmcConfig::new(10, 1).with_ess_threshold(0.5).validate().is_err());
        let mut cfg = SmcConfig::new(10, 1);
        cfg.delta = 0.0;
        assert!(cfg.validate().is_err());
        assert_eq!(SmcConfig::new(10, 1).ess_threshold, 5.0);
    }

    #[test]
    fn init_weights_are_one_and_ess_is_n() {
        let w0 = WeightTable::uniform(0, 3, 3.0, Provenance::Ideal).unwrap();
        let ps = init_particles(&SmcConfig::new(64, 5), w0).unwrap();
        assert!(ps.log_weights.iter().all(|&l| l == 0.0));
        assert_eq!(ps.ess(), 64.0);
        assert!(ps.particles.iter().all(|m| m.is_consistent()));
    }

    #[test]
    fn all_ones_with_no_cooling_is_exact() {
        for n in 1..=5 {
            let a = BinaryMatrix::ones(n).unwrap();
            let report = run_smc(&a, SmcConfig::new(50, 3).with_r_override(0), &Sequential).unwrap();
            let fact = crate::math::factorial_f64(n);
            assert_eq!(report.r, 0);
            assert!((report.estimate_est1 - fact).abs() < 1e-9 * fact);
            assert!(report.ess_trace.is_empty());
        }
    }

    #[test]
    fn n1_is_exact() {
        let a = BinaryMatrix::ones(1).unwrap();
        let report = run_smc(&a, SmcConfig::new(10, 3), &Sequential).unwrap();
        assert_eq!(report.r, 0);
        assert!((report.estimate_est1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stalled_schedule_leaves_weights_alone() {
        let a = BinaryMatrix::ones(3).unwrap();
        let cfg = SmcConfig::new(100, 9).with_mode(WeightMode::Ideal).with_r_override(4);
        let mut smc = Smc::new(&a, cfg).unwrap();
        for _ in 0..4 {
            smc.step(&Sequential).unwrap();
            assert!(smc.system().log_weights.iter().all(|&l| l.abs() < 1e-15));
        }
        assert!(smc.lambda_trace.iter().all(|&l| (l - 1.0).abs() < 1e-12));
    }

    #[test]
    fn edge_only_perfect_matching_has_unit_increment() {
        let a = toy();
        let cfg = SmcConfig::new(20, 2);
        let s = cfg.schedule_for(&a).unwrap();
        let w0 = WeightTable::uniform(0, 3, 3.0, Provenance::Ideal).unwrap();
        let mut ps = init_particles(&cfg, w0).unwrap();
        ps.particles[0] = Matching::perfect(&[0, 2, 1]).unwrap();
        let w1 = WeightTable::uniform(1, 3, 7.0, Provenance::UserSupplied).unwrap();
        let g = incremental_weights(&mut ps, &s, w1).unwrap();
        assert_eq!(g[0], 1.0);
        assert_eq!(ps.p, 1);
    }

    #[test]
    fn empty_hole_class_hits_the_delta_floor() {
        let a = toy();
        let cfg = SmcConfig::new(4, 2);
        let s = cfg.schedule_for(&a).unwrap();
        let w0 = WeightTable::uniform(0, 3, 3.0, Provenance::Ideal).unwrap();
        let mut ps = init_particles(&cfg, w0).unwrap();
        ps.particles = vec![Matching::perfect(&[0, 2, 1]).unwrap(); 4];
        let w = adaptive_weight_update(&ps, &s, 1e-10);
        for &x in w.values() {
            assert!((x - (1.0 + 1e-10) / 1e-10).abs() < 1e-3 * x);
            assert!(x <= (1.0 + 1e-10) / 1e-10 * (1.0 + 1e-12));
        }
        assert_eq!(w.provenance, Provenance::Adaptive);
    }

    #[test]
    fn same_seed_same_report() {
        let a = toy();
        let r1 = run_smc(&a, SmcConfig::new(200, 42), &Sequential).unwrap();
        let r2 = run_smc(&a, SmcConfig::new(200, 42), &Sequential).unwrap();
        assert_eq!(r1, r2);
        let r3 = run_smc(&a, SmcConfig::new(200, 43), &Sequential).unwrap();
        assert_ne!(r1.log_gamma, r3.log_gamma);
    }

    #[test]
    fn every_step_resampling() {
        let cfg = SmcConfig::new(100, 2).with_resampling_every_step();
        let report = run_smc(&toy(), cfg, &Sequential).unwrap();
        assert_eq!(report.resample_steps, (1..=report.r).collect::<Vec<_>>());
        let literal = run_smc(&toy(), SmcConfig::new(100, 2).with_ess_threshold(1.0), &Sequential).unwrap();
        assert!(literal.resample_steps.is_empty());
    }

    #[test]
    fn traces_are_in_range() {
        let report = run_smc(&toy(), SmcConfig::new(300, 1), &Sequential).unwrap();
        assert_eq!(report.ess_trace.len(), report.r);
        assert!(report.ess_trace.iter().all(|&e| (1.0..=300.0).contains(&e)));
        assert!(report.resample_steps.windows(2).all(|w| w[0] < w[1]));
        assert!((report.estimate_est1 - estimate_est1(&report)).abs() < 1e-12 * report.estimate_est1);
    }

    #[test]
    fn user_weights_need_one_table_per_step() {
        let a = toy();
        let bad = SmcConfig::new(10, 1).with_mode(WeightMode::UserWeights(vec![]));
        assert!(Smc::new(&a, bad).is_err());
    }
}
