//! Experiment driver and file formats around `aamr-core`.
//!
//! The binary exposes four subcommands:
//!
//! * `rates` — iteration counts of AAMR against the theoretical bound,
//! * `compare` — AP / RAP / DR / AAMR at optimal parameters,
//! * `surface` — the rate surface γ(α, β, θ_F) with branch and region labels,
//! * `verify` — the built-in invariant suite.
//!
//! Everything the binary does is reachable through this library so the
//! integration tests can drive experiments in-process.

pub mod config;
pub mod error;
pub mod experiments;
pub mod fileio;
pub mod surface;
pub mod verification;

pub use config::{DimsPolicy, ExperimentConfig};
pub use error::CliError;
