//! Sparse symmetric kernels: CSR storage, Jacobi-preconditioned CG, an
//! envelope Cholesky factorization and the smallest generalized eigenpair.

mod cg;
mod csr;
mod eigen;
mod envelope;

pub use cg::{cg_solve, CgOutcome};
pub use csr::{CsrBuilder, CsrMatrix};
pub use eigen::{rayleigh_quotient, smallest_eigenpair, smallest_eigenpair_with, EigenOptions, EigenResult};
pub use envelope::{reverse_cuthill_mckee, EnvelopeCholesky};

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
