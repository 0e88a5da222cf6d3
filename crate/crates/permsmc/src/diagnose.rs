//! `permsmc diagnose` and `permsmc schedule` payloads.

use permsmc_core::analysis::{complexity_constants, lemma1_ratio_check, ComplexityConstants, Lemma1Step};
use permsmc_core::kernel::{spectral_gap, KernelContext};
use permsmc_core::schedule::{build_schedule, default_step_factor, ScheduleSummary};
use permsmc_core::target::ExactModel;
use permsmc_core::{ActivitySchedule, BinaryMatrix};
use serde::Serialize;

use crate::error::AppResult;

pub fn schedule_for(a: &BinaryMatrix, step_factor: Option<f64>, r_override: Option<usize>) -> AppResult<ActivitySchedule> {
    let f = step_factor.unwrap_or_else(|| default_step_factor(a.n()));
    Ok(build_schedule(a, f, r_override)?)
}

pub fn schedule_summary(a: &BinaryMatrix, step_factor: Option<f64>, r_override: Option<usize>) -> AppResult<ScheduleSummary> {
    Ok(schedule_for(a, step_factor, r_override)?.summary())
}

#[derive(Debug, Clone, Serialize)]
pub struct Lemma1Report {
    pub n: usize,
    pub r: usize,
    pub all_passed: bool,
    pub steps: Vec<Lemma1Step>,
}

pub fn lemma1(s: &ActivitySchedule) -> AppResult<Lemma1Report> {
    let steps = lemma1_ratio_check(s)?;
    Ok(Lemma1Report {
        n: s.n(),
        r: s.r(),
        all_passed: steps.iter().all(Lemma1Step::passed),
        steps,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GapStep {
    pub p: usize,
    /// `1 - lambda_2`.
    pub dirichlet_gap: f64,
    /// `1 - max(|lambda_2|, |lambda_min|)`.
    pub absolute_gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    pub n: usize,
    pub r: usize,
    pub lazy: bool,
    pub min_dirichlet_gap: f64,
    pub min_absolute_gap: f64,
    pub steps: Vec<GapStep>,
}

/// Spectral gaps of the single-proposal kernel at every `p`, ideal weights.
pub fn gaps(s: &ActivitySchedule, lazy: bool) -> AppResult<GapReport> {
    let tables = ExactModel::new(s)?.ideal_tables();
    let mut steps = Vec::with_capacity(s.r() + 1);
    for (p, w) in tables.iter().enumerate() {
        let ctx = KernelContext::new(s, p, w, 1)?.lazy(lazy);
        let g = spectral_gap(&ctx)?;
        steps.push(GapStep {
            p,
            dirichlet_gap: g.dirichlet,
            absolute_gap: g.absolute,
        });
    }
    Ok(GapReport {
        n: s.n(),
        r: s.r(),
        lazy,
        min_dirichlet_gap: steps.iter().map(|g| g.dirichlet_gap).fold(f64::INFINITY, f64::min),
        min_absolute_gap: steps.iter().map(|g| g.absolute_gap).fold(f64::INFINITY, f64::min),
        steps,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantsReport {
    #[serde(flatten)]
    pub constants: ComplexityConstants,
    pub note: &'static str,
}

pub fn constants(s: &ActivitySchedule, c_poincare: f64, particles: usize) -> AppResult<ConstantsReport> {
    Ok(ConstantsReport {
        constants: complexity_constants(s.n(), c_poincare, s.r(), particles)?,
        note: "the Poincare constant is a user input; values are illustrative",
    })
}
