//! Schatten-q perturbation analysis for truncated-SVD low-rank estimation.
//!
//! Given `B = A + Z` with `A` of rank `r`, the estimate `Â` is the best rank-`r`
//! approximation of `B`. The crate evaluates the estimation error
//! `‖Â − A‖_q`, the projection errors `‖P_{Û⊥} A‖_q`, `‖A P_{V̂⊥}‖_q` and the
//! sin-Θ distances of the estimated singular subspaces, together with the
//! upper bounds they satisfy, classical comparators, adversarial instances
//! that make the bounds tight, and the Monte Carlo sweeps that compare them.
//!
//! Module map:
//!
//! * [`matrix`]: dense matrices, SVD, projectors, Haar sampling, CSV files.
//! * [`norms`]: Schatten, truncated Schatten and Ky Fan norms, dual witnesses,
//!   majorization.
//! * [`subspace`]: principal angles, sin-Θ and related subspace distances.
//! * [`bounds`]: the estimator, every bound evaluator and [`bounds::BoundReport`].
//! * [`constructions`]: tightness, minimax and decaying-spectrum instances.
//! * [`experiment`]: the Monte Carlo sweeps and their CSV output.
//! * [`verify`]: randomized property suites behind `schatten-perturb verify`.
//! * [`cli`]: the command-line front end.

pub mod bounds;
pub mod cli;
pub mod constructions;
pub mod error;
pub mod experiment;
pub mod matrix;
pub mod norms;
pub mod subspace;
pub mod tol;
pub mod verify;

pub use error::{Error, Result};
pub use matrix::{Matrix, OrthonormalFrame, RngSeed, SvdFactors};
pub use norms::SchattenIndex;
