//! Seeded, reproducible simulator and analysis toolkit for
//! generate-verify-accumulate-retrain discovery loops over synthetic
//! knowledge spaces.
//!
//! The crate is organized around the loop's moving parts:
//!
//! - [`knowledge`]: the ambient candidate space, its valid subset, and the
//!   ideal Zipf difficulty distribution.
//! - [`sampler`]: exact O(log n) weighted sampling with mutable weights.
//! - [`verifier`]: stochastic acceptance with configurable true/false
//!   positive behavior and verification-cost models.
//! - [`engine`]: the loop itself — mass decomposition, retained state,
//!   retraining policies, exact increment oracles, human augmentation.
//! - [`estimators`]: frequency profiles, Good-Turing, Good-Toulmin, and the
//!   exact batch-unseen-mass oracle.
//! - [`analysis`]: contamination thresholds, cost laws, amplification
//!   decomposition, sustainability bounds, and power-law fitting.
//!
//! Start with the runnable examples (`cargo run --release --example
//! coverage`) or the `nova-sim` binary.

pub mod analysis;
pub mod config;
pub mod engine;
pub mod error;
pub mod estimators;
pub mod knowledge;
pub mod numeric;
pub mod rng;
pub mod sampler;
pub mod verifier;

pub use error::{Error, Result};
