//! Sequential Monte Carlo estimation of permanents of binary matrices.
//!
//! The crate works on the space of perfect and near-perfect matchings of the
//! *completed* bipartite graph of an `n x n` 0/1 matrix. A cooling schedule
//! drives the activities of non-edges from 1 down to `1/n!`, and a population
//! of matchings is moved along the resulting sequence of targets with
//! reweighting, multinomial resampling and Metropolis-Hastings mutation. The
//! hole-pair weights of each target are either estimated on the fly from the
//! population (adaptive mode), computed exactly (ideal mode, small `n`) or
//! supplied by the caller.
//!
//! Besides the estimator the crate carries exact oracles (Ryser, brute-force
//! permutation sums, matching enumeration, exact normalizers and targets),
//! a simulated-annealing baseline and a few analytical diagnostics.
//!
//! Everything here is pure computation: `no_std` with `alloc`. File formats,
//! the CLI and thread pools live in the `permsmc` crate.
#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

pub mod analysis;
pub mod annealing;
mod error;
pub mod target;
pub mod kernel;
pub mod matching;
mod math;
pub mod matrix;
pub mod oracle;
pub mod rng;
pub mod schedule;
pub mod smc;
pub mod weights;

pub use error::{Error, Result};
pub use matching::{Matching, MatchingClass, MatchingKind};
pub use matrix::{parse_matrix, BinaryMatrix};
pub use schedule::ActivitySchedule;
pub use weights::{Provenance, WeightTable};

pub use math::{factorial_f64, ln_factorial};
