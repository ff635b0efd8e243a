//! Forced covariance adaptation for derandomized evolution strategies.
//!
//! The crate implements `(μ_W, λ)` evolution-strategy kernels with
//! isotropic, separable and full covariance, a forced step-size update
//! that keeps sampling alive at the optimum so that the learned covariance
//! converges to the inverse Hessian, and a Tikhonov-regularised inversion
//! producing a [`HessianEstimate`](focal::HessianEstimate). Benchmark
//! landscapes with analytic Hessians and post-run analysis tools are
//! included so that recovered spectra can be checked against ground truth.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

use alloc::string::String;

pub mod analysis;
pub mod covariance;
pub mod focal;
pub mod landscape;
pub mod linalg;
pub mod phase;
pub mod pulse;
pub mod rng;
pub mod stats;
pub mod strategy;

pub use covariance::{CovarianceModel, Regime};
pub use focal::{
    FocalConfig, HessianEstimate, Phase, PracticalStepRecord, RunOutcome, RunSettings, RunTrace,
    StepSizeControl, Switchover, TraceRow,
};
pub use landscape::{Landscape, Orientation};
pub use linalg::Matrix;
pub use phase::WrapPolicy;
pub use strategy::{Offspring, SearchState, StrategyConfig};

/// Errors raised by the kernels, landscapes and analysis routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite fitness {value} for offspring {index}")]
    NonFiniteFitness { index: usize, value: f64 },
    #[error("symmetric eigensolver failed on a {dim}x{dim} matrix (diagonal max/min {diagonal_ratio:e})")]
    EigenFailure { dim: usize, diagonal_ratio: f64 },
    #[error("non-finite search state at generation {generation}")]
    NonFiniteState { generation: u64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("contract violation: {0}")]
    Contract(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(msg.into())
}
