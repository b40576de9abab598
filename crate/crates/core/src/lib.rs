//! Quantum frequency conversion through a resonant, backward four-wave-mixing
//! medium driven under electromagnetically induced transparency.
//!
//! The crate is organised bottom-up:
//!
//! - [`params`]: dimensionless medium configuration (rates in units of Γ, lengths in units of L).
//! - [`spectral`]: frequency-domain Heisenberg–Langevin solve producing the propagation
//!   coefficients Λ, κ and the Langevin couplings ζ.
//! - [`transfer`]: 2×2 propagation matrix, backward boundary re-solve, transmittance and
//!   conversion efficiency, and a classical shooting solver for comparison.
//! - [`noise`]: diffusion matrix and the Langevin noise integrals.
//! - [`states`]: truncated-Fock density matrices, the loss channel, fidelities and
//!   quadrature variances.
//! - [`cli`]: deterministic CSV sweeps behind the `qfc` binary.
//!
//! Data-parallel loops (frequency grids, parameter sweeps) run on rayon when the
//! `parallel` feature is enabled (the default) and sequentially otherwise.

// `!(x <= y)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod noise;
pub mod parallel;
pub mod params;
pub mod quadrature;
pub mod spectral;
pub mod states;
pub mod transfer;

pub use error::{QfcError, Result};
pub use params::SystemParams;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
