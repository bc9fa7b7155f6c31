//! Best approximation onto the intersection of two linear subspaces of R^n.
//!
//! Given orthonormal bases for two subspaces `U` and `V` and an anchor point
//! `z`, this crate solves the best approximation problem — find the point of
//! `U ∩ V` closest to `z` — with five matrix-free projection methods:
//!
//! * alternating projections (AP) and its relaxation (RAP),
//! * generalized alternating projections (GAP),
//! * Douglas–Rachford (DR),
//! * averaged alternating modified reflections (AAMR).
//!
//! Alongside the iterations, the crate carries the exact linear-convergence
//! theory of the AAMR operator on subspaces: the closed-form spectrum of the
//! iteration matrix, the piecewise rate `γ(T_{α,β})` as a function of the
//! Friedrichs angle, the parameter choice minimizing that rate, and the
//! matching optimal rates of the other four methods. Every rate formula is
//! backed by an independent spectral oracle built from 2×2 blocks of the
//! iteration matrix in a principal-vector frame.
//!
//! The crate is `no_std`-compatible (requires `alloc`); disable the default
//! `std` feature for embedded or sandboxed use. File formats, CSV export and
//! the experiment driver live in the companion `aamr-cli` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod error;
mod math;
pub mod methods;
pub mod rates;
pub mod spectrum;
pub mod subspace;

pub use error::{Error, Result};
pub use methods::{IterationTrace, MethodSpec};
pub use rates::{MethodKind, RateBranch, RateReport};
pub use spectrum::Spectrum;
pub use subspace::{Subspace, SubspacePair};

// Re-export the linear-algebra backend so downstream crates can name the
// vector/matrix types without pinning their own copy.
pub use nalgebra;
