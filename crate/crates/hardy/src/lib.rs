//! Numerical laboratory for weighted boundary Hardy constants.
//!
//! The constant `a` in `‖d^{δ/2-1} ψ‖ ≤ a ‖d^{δ/2} ∇ψ‖` is computed on
//! boundary layers `Γ_r = {x ∈ Ω : d(x) < r}` as `λ_min^{-1/2}` of the pencil
//! built from the weighted stiffness matrix (weight `d^δ`) and the singular
//! mass matrix (weight `d^{δ-2}`). Conforming piecewise-linear subspaces give
//! certified lower bounds.

pub mod assembly;
pub mod cli;
pub mod error;
pub mod estimators;
pub mod geometry;
pub mod linalg;
pub mod mesh;
pub mod quadrature;
pub mod reference;
pub mod spline;
pub mod weights;

pub use error::{HardyError, Result};
