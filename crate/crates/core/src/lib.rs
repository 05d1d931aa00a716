//! Cox processes directed by non-decreasing additive random measures.
//!
//! The crate covers four layers:
//!
//! - [`random_measure`]: parametric directing measures, realized paths and
//!   exact Laplace-transform calculus for their increments.
//! - [`cox_process`]: conditional Poisson sampling given a path, the
//!   atom-aware order-statistics construction and subordination `L(η(t))`.
//! - [`arrival_law`]: exact joint laws of unordered arrival points and counts.
//! - [`shot_noise`] and [`predictor`]: the cluster process
//!   `M(u) = Σ_{j ≤ N(u)} L_j(u − T_j)`, its moments and its conditional
//!   predictor given the observed history.
//!
//! Everything is `no_std` with `alloc`. Randomness always comes from an
//! explicit stream (see [`rng`]) so that every experiment is reproducible.
#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod arrival_law;
pub mod cox_process;
mod error;
pub mod math;
pub mod predictor;
pub mod quadrature;
pub mod random_measure;
pub mod rng;
pub mod shot_noise;

pub use error::{Error, Result};
