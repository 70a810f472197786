//! Finite-n evaluation of four convergence notions for sequences of random
//! variables described by tail probabilities: statistical convergence of
//! order alpha in probability, strong p-Cesàro summability of order alpha,
//! and the lacunary S_theta and N_theta variants.
//!
//! Counting is exact (big integers and rationals); trend verdicts come from
//! log-log slopes over geometric grids or block windows.

pub mod cli;
pub mod corpus;
pub mod diagnostics;
pub mod dsl;
pub mod error;
pub mod evaluators;
pub mod exact;
pub mod expr;
pub mod harness;
pub mod index_set;
pub mod lacunary;
pub mod model;
pub mod scalar;
pub mod sums;

pub use error::{Error, Result};

/// Default floating scalar.
pub type Real = f64;
/// Sampled profile in double precision.
pub type Profile = diagnostics::DensityProfile<f64>;
/// Sampled profile in single precision.
pub type Profile32 = diagnostics::DensityProfile<f32>;
pub type Verdict64 = diagnostics::Verdict<f64>;
pub type Verdict32 = diagnostics::Verdict<f32>;
