//! Repeated runs of one estimator on one matrix, their per-repeat records and
//! the summary statistics.
//!
//! Outputs are deterministic functions of the spec: repeats run in parallel
//! but each derives its own seed, and results are gathered in repeat order.
//! Wall-clock times go to a separate `timing.json`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use permsmc_core::analysis::summarize;
use permsmc_core::annealing::{run_simulated_annealing, SaConfig, SaWeights};
use permsmc_core::oracle::{permanent_exact_ryser, ENUMERATION_MAX_N};
use permsmc_core::rng::repeat_seed;
use permsmc_core::schedule::{build_schedule, default_step_factor};
use permsmc_core::smc::{EstimatorReport, Executor, Sequential, Smc, SmcConfig, WeightMode};
use permsmc_core::BinaryMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{AppError, AppResult};
use crate::exec::RayonExecutor;
use crate::io::{read_matrix, to_json, write_json, write_text};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Adaptive,
    Ideal,
    Sa,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorChoice {
    Est1,
    Est2,
    Both,
}

impl EstimatorChoice {
    fn est1(self) -> bool {
        matches!(self, Self::Est1 | Self::Both)
    }

    fn est2(self) -> bool {
        matches!(self, Self::Est2 | Self::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub matrix_path: PathBuf,
    pub method: Method,
    /// Ignored by [`Method::Exact`].
    pub repeats: usize,
    pub estimator: EstimatorChoice,
    /// Particles for SMC, samples per level for SA.
    pub particles: usize,
    /// `None` means `N / 2`.
    pub ess_threshold: Option<f64>,
    pub resample_every_step: bool,
    pub delta: f64,
    pub sweeps: Option<usize>,
    pub seed: u64,
    pub step_factor: Option<f64>,
    pub r_override: Option<usize>,
    pub burn_in: usize,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl ExperimentSpec {
    pub fn new(matrix_path: impl Into<PathBuf>, method: Method) -> Self {
        Self {
            matrix_path: matrix_path.into(),
            method,
            repeats: 1,
            estimator: EstimatorChoice::Both,
            particles: 1000,
            ess_threshold: None,
            resample_every_step: false,
            delta: 1e-10,
            sweeps: None,
            seed: 0,
            step_factor: None,
            r_override: None,
            burn_in: 0,
            threads: None,
            out: None,
            format: Format::Csv,
        }
    }

    pub fn validate(&self) -> AppResult<()> {
        if self.method != Method::Exact && self.repeats == 0 {
            return Err(AppError::config("--repeats must be at least 1"));
        }
        if self.threads == Some(0) {
            return Err(AppError::config("--threads must be at least 1"));
        }
        if let Some(f) = self.step_factor {
            if !(f > 0.0 && f < 1.0) {
                return Err(AppError::config("--step-factor must lie in (0, 1)"));
            }
        }
        Ok(())
    }

    fn smc_config(&self, seed: u64) -> SmcConfig {
        let mode = match self.method {
            Method::Ideal => WeightMode::Ideal,
            _ => WeightMode::Adaptive,
        };
        SmcConfig {
            ess_threshold: self.ess_threshold.unwrap_or(self.particles as f64 / 2.0),
            delta: self.delta,
            sweeps: self.sweeps,
            step_factor: self.step_factor,
            r_override: self.r_override,
            resample_every_step: self.resample_every_step,
            ..SmcConfig::new(self.particles, seed)
        }
        .with_mode(mode)
    }

    fn sa_config(&self, seed: u64) -> SaConfig {
        SaConfig {
            burn_in: self.burn_in,
            sweeps: self.sweeps,
            weights: SaWeights::AdaptiveFromSamples,
            delta: self.delta,
            ..SaConfig::new(self.particles, seed)
        }
    }
}

/// One repeat. Estimates not requested by the spec are left empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub repeat: usize,
    pub seed: u64,
    pub estimate_est1: Option<f64>,
    pub estimate_est2: Option<f64>,
    pub log_gamma: f64,
    pub resample_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorStats {
    pub mean: f64,
    #[serde(with = "availability")]
    pub variance: Option<f64>,
    #[serde(with = "availability")]
    pub relative_variance: Option<f64>,
    /// `|mean - exact| / exact`, when the exact value is known.
    pub relative_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub method: Method,
    pub mode: String,
    pub repeats: usize,
    #[serde(rename = "N")]
    pub particles: Option<usize>,
    #[serde(rename = "T")]
    pub ess_threshold: Option<f64>,
    pub delta: Option<f64>,
    pub sweeps: Option<usize>,
    pub seed: u64,
    pub r: Option<usize>,
    pub step_factor: Option<f64>,
    pub est1: Option<EstimatorStats>,
    pub est2: Option<EstimatorStats>,
    /// Decimal string of the exact permanent.
    pub exact: Option<String>,
    pub exact_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub total_wall_time_s: f64,
    pub repeat_wall_time_s: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub summary: Summary,
    pub runs: Vec<RunRecord>,
    pub reports: Vec<EstimatorReport>,
    pub timing: Timing,
}

/// `None` serializes as the string `"unavailable"`.
mod availability {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Value {
        Number(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) => s.serialize_f64(*x),
            None => s.serialize_str("unavailable"),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Ok(match Value::deserialize(d)? {
            Value::Number(x) => Some(x),
            Value::Text(_) => None,
        })
    }
}

fn stats(values: &[f64], exact: Option<f64>) -> AppResult<EstimatorStats> {
    let s = summarize(values)?;
    Ok(EstimatorStats {
        mean: s.mean,
        variance: s.variance,
        relative_variance: s.relative_variance,
        relative_error: exact.map(|e| (s.mean - e).abs() / e),
    })
}

fn exact_permanent(a: &BinaryMatrix) -> AppResult<(String, f64)> {
    let p = permanent_exact_ryser(a)?;
    let s = p.to_string();
    let v = s.parse::<f64>().expect("decimal digits parse as f64");
    Ok((s, v))
}

/// Summary statistics of `runs`, in repeat order. Used both when running and
/// when re-reading a runs file.
pub fn summarize_runs(template: &Summary, runs: &[RunRecord]) -> AppResult<Summary> {
    let mut summary = template.clone();
    summary.repeats = runs.len();
    let column = |pick: fn(&RunRecord) -> Option<f64>| -> Option<Vec<f64>> { runs.iter().map(pick).collect() };
    summary.est1 = column(|r| r.estimate_est1)
        .map(|v| stats(&v, summary.exact_value))
        .transpose()?;
    summary.est2 = column(|r| r.estimate_est2)
        .map(|v| stats(&v, summary.exact_value))
        .transpose()?;
    Ok(summary)
}

fn run_one(
    a: &BinaryMatrix,
    spec: &ExperimentSpec,
    repeat: usize,
    exec: &dyn Executor,
) -> AppResult<(RunRecord, EstimatorReport, f64)> {
    let seed = repeat_seed(spec.seed, repeat as u64);
    let start = Instant::now();
    let report = match spec.method {
        Method::Adaptive | Method::Ideal => Smc::new(a, spec.smc_config(seed))?.run(exec)?.report,
        Method::Sa => {
            let factor = spec.step_factor.unwrap_or_else(|| default_step_factor(a.n()));
            let s = build_schedule(a, factor, spec.r_override)?;
            run_simulated_annealing(a, &s, &spec.sa_config(seed))?
        }
        Method::Exact => unreachable!("exact runs no repeats"),
    };
    let elapsed = start.elapsed().as_secs_f64();
    let record = RunRecord {
        repeat,
        seed,
        estimate_est1: spec.estimator.est1().then_some(report.estimate_est1),
        estimate_est2: if spec.estimator.est2() { report.estimate_est2 } else { None },
        log_gamma: report.log_gamma,
        resample_count: report.resample_steps.len(),
    };
    Ok((record, report, elapsed))
}

/// Runs the experiment on an already loaded matrix. Nothing is written.
pub fn run_on_matrix(a: &BinaryMatrix, spec: &ExperimentSpec) -> AppResult<ExperimentOutput> {
    spec.validate()?;
    let n = a.n();
    let start = Instant::now();
    if spec.method == Method::Exact {
        let (exact, value) = exact_permanent(a)?;
        let summary = Summary {
            n,
            method: Method::Exact,
            mode: "exact".into(),
            repeats: 0,
            particles: None,
            ess_threshold: None,
            delta: None,
            sweeps: None,
            seed: spec.seed,
            r: None,
            step_factor: None,
            est1: None,
            est2: None,
            exact: Some(exact),
            exact_value: Some(value),
        };
        let timing = Timing {
            total_wall_time_s: start.elapsed().as_secs_f64(),
            repeat_wall_time_s: Vec::new(),
        };
        return Ok(ExperimentOutput {
            summary,
            runs: Vec::new(),
            reports: Vec::new(),
            timing,
        });
    }

    let factor = spec.step_factor.unwrap_or_else(|| default_step_factor(n));
    let schedule = build_schedule(a, factor, spec.r_override)?;
    let (exact, exact_value) = if n <= ENUMERATION_MAX_N {
        let (s, v) = exact_permanent(a)?;
        (Some(s), Some(v))
    } else {
        (None, None)
    };

    let run_all = || -> AppResult<Vec<(RunRecord, EstimatorReport, f64)>> {
        if spec.repeats == 1 {
            Ok(vec![run_one(a, spec, 0, &RayonExecutor)?])
        } else {
            (0..spec.repeats)
                .into_par_iter()
                .map(|k| run_one(a, spec, k, &Sequential))
                .collect()
        }
    };
    let results = match spec.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| AppError::config(format!("cannot start {t} worker threads: {e}")))?
            .install(run_all)?,
        None => run_all()?,
    };

    let mut runs = Vec::with_capacity(results.len());
    let mut reports = Vec::with_capacity(results.len());
    let mut times = Vec::with_capacity(results.len());
    for (rec, rep, t) in results {
        runs.push(rec);
        reports.push(rep);
        times.push(t);
    }
    let first = &reports[0];
    let template = Summary {
        n,
        method: spec.method,
        mode: first.mode.clone(),
        repeats: runs.len(),
        particles: Some(first.particles),
        ess_threshold: Some(first.ess_threshold),
        delta: Some(first.delta),
        sweeps: Some(first.sweeps),
        seed: spec.seed,
        r: Some(schedule.r()),
        step_factor: Some(schedule.step_factor()),
        est1: None,
        est2: None,
        exact,
        exact_value,
    };
    let summary = summarize_runs(&template, &runs)?;
    Ok(ExperimentOutput {
        summary,
        runs,
        reports,
        timing: Timing {
            total_wall_time_s: start.elapsed().as_secs_f64(),
            repeat_wall_time_s: times,
        },
    })
}

/// `summary.json`, `timing.json` and `runs.csv` or `runs.json` (the full
/// per-repeat reports) under `dir`.
pub fn write_outputs(out: &ExperimentOutput, dir: &Path, format: Format) -> AppResult<()> {
    fs::create_dir_all(dir).map_err(|source| AppError::Write {
        path: dir.to_owned(),
        source,
    })?;
    write_json(&dir.join("summary.json"), &out.summary)?;
    write_json(&dir.join("timing.json"), &out.timing)?;
    if out.summary.method == Method::Exact {
        return Ok(());
    }
    match format {
        Format::Csv => write_text(&dir.join("runs.csv"), &runs_to_csv(&out.runs)?),
        Format::Json => write_json(&dir.join("runs.json"), &out.reports),
    }
}

pub fn runs_to_csv(runs: &[RunRecord]) -> AppResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in runs {
        w.serialize(r).map_err(|source| AppError::Csv {
            path: PathBuf::from("runs.csv"),
            source,
        })?;
    }
    let bytes = w.into_inner().expect("in-memory writer");
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn read_runs_csv(path: &Path) -> AppResult<Vec<RunRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(|source| AppError::Csv {
        path: path.to_owned(),
        source,
    })?;
    r.deserialize()
        .collect::<Result<_, _>>()
        .map_err(|source| AppError::Csv {
            path: path.to_owned(),
            source,
        })
}

pub fn read_summary(path: &Path) -> AppResult<Summary> {
    let text = fs::read_to_string(path).map_err(|source| AppError::Read {
        path: path.to_owned(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| AppError::Json {
        path: path.to_owned(),
        source,
    })
}

/// Loads the matrix, runs, and writes outputs when `spec.out` is set.
pub fn run_experiment(spec: &ExperimentSpec) -> AppResult<ExperimentOutput> {
    let a = read_matrix(&spec.matrix_path)?;
    let out = run_on_matrix(&a, spec)?;
    if let Some(dir) = &spec.out {
        write_outputs(&out, dir, spec.format)?;
    }
    Ok(out)
}

/// The summary as printed on stdout.
pub fn summary_json(out: &ExperimentOutput) -> String {
    to_json(&out.summary)
}
