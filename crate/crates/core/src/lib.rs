//! Direct tomography of a single qubit through projections onto
//! non-orthogonal effective bases, with a full statistical error analysis.
//!
//! A pointer qubit couples to the system through exp(−iθ σ_x⊗σ_x) and is
//! read out in three bases after post-selection. The six outcome
//! probabilities are expectation values of ρ in six effective pure states
//! whose in-basis overlap λ = cos 2θ tunes the scheme continuously from
//! strong MUB tomography (λ = 0) to the weak-measurement limit (λ → 1),
//! and ρ is recovered from them by linear inversion ([`model`]).
//!
//! The per-trial minimum mean-square error of that reconstruction — the
//! Cramér–Rao bound Tr(Q F⁻¹) in Hilbert–Schmidt distance — is available
//! both by exact matrix inversion and in closed form, together with the
//! analytic average over pure states and a tetrahedron SIC-POVM baseline
//! ([`crb`]). Finite-shot experiments, the plug-in estimator and
//! empirical Fisher/MSE oracles live in [`sim`]; seeded Haar and Bures
//! ensembles in [`sampling`]; grid sweeps, crossover location and CSV/SVG
//! emission in [`sweep`].
//!
//! Everything is deterministic: random draws are counter-indexed so any
//! sample can be regenerated from (seed, index), and Monte-Carlo
//! reductions are fixed-order pairwise sums, independent of thread count.

// 2×2 and 3×3 index arithmetic reads better as plain loops.
#![allow(clippy::needless_range_loop)]

pub mod crb;
mod error;
pub mod model;
pub mod qubit;
pub mod sampling;
pub mod sim;
pub mod sweep;
mod util;

pub use error::{Error, Result};
