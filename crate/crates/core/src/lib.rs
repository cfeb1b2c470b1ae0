//! Numerical laboratory for the damped second-order system
//!
//! ```text
//! ü + γu̇ + ∇φ(u) + A(u) + ε(t)∇Θ(u) = 0
//! ```
//!
//! with `φ` convex with Lipschitz gradient, `A` monotone and `λ`-cocoercive,
//! and an optional vanishing Tikhonov term. Everything lives in ℝⁿ with IEEE
//! doubles. Weak convergence in a Hilbert space is therefore the same as norm
//! convergence here, and that is what the diagnostics measure.
//!
//! Asymptotic statements are checked through finite-horizon surrogates
//! (final velocity, L² tail of the velocity, anchor-distance oscillation,
//! final residual). They are surrogates, not equivalents.

pub mod applications;
pub mod cli;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod operators;
pub mod sampling;
pub mod sharpness;

pub use error::{Error, Result};
pub use linalg::{inner, norm, solve_linear, Matrix, Vector};
