//! Classification of data streams with distribution uncertainty using
//! kernel MMD statistics.
//!
//! The crate provides the unbiased MMD estimator, cluster geometry for
//! Gaussian families, achievable error exponents, fixed-length, sequential
//! and two-phase tests, and a Monte Carlo harness for estimating their
//! error probabilities and stopping times.

pub mod classifiers;
pub mod cli;
pub mod clusters;
pub mod config;
pub mod error;
pub mod exponents;
pub mod kernel;
pub mod mmd;
pub mod montecarlo;

pub use classifiers::{Decision, Phase, SampleSource, TestConfig, Verdict};
pub use clusters::{ClusterSpec, GaussianModel, Problem, Uncertainty};
pub use error::{Error, Result};
pub use exponents::{achievable_exponents, Case, Exponent, ExponentParams, ExponentReport, TestKind, Thresholds};
pub use kernel::{KernelKind, KernelSpec};
pub use mmd::{mmd2_batch, MmdAccumulator, MmdBank, Sequence, Side};
pub use montecarlo::{ExperimentResult, ExperimentSpec, GridOverride, QPolicy, Runner, Threshold, ThresholdRules, Truth};
