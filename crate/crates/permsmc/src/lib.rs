//! Command-line front end, experiment harness and file formats for
//! [`permsmc_core`].

pub mod diagnose;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod io;

pub use error::{AppError, AppResult};
pub use exec::RayonExecutor;
pub use experiment::{
    run_experiment, EstimatorChoice, ExperimentOutput, ExperimentSpec, Format, Method, RunRecord, Summary,
};
