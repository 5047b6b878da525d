use super::{dot, norm2, CsrMatrix};
use crate::error::{HardyError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// `‖Mx - rhs‖ / ‖rhs‖` of the returned iterate.
    pub relative_residual: f64,
}

/// Jacobi-preconditioned conjugate gradients from a zero start, stopping at
/// `‖Mx - rhs‖ ≤ tol·‖rhs‖` or after `50·n` iterations.
pub fn cg_solve(m: &CsrMatrix, rhs: &[f64], tol: f64) -> Result<CgOutcome> {
    let n = m.dim();
    if rhs.len() != n {
        return Err(HardyError::invalid("right-hand side length differs from matrix dimension"));
    }
    let rhs_norm = norm2(rhs);
    let mut x = vec![0.0; n];
    if rhs_norm == 0.0 {
        return Ok(CgOutcome { x, iterations: 0, relative_residual: 0.0 });
    }
    let inv_diag: Vec<f64> = m
        .diag()
        .into_iter()
        .map(|d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let mut r = rhs.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, b)| a * b).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![0.0; n];
    let max_iter = 50 * n.max(1);
    let mut rel = 1.0;
    for it in 1..=max_iter {
        m.mul_vec_into(&p, &mut q);
        let pq = dot(&p, &q);
        if !(pq > 0.0) {
            return Err(HardyError::IterativeFailure { iterations: it, residual: rel });
        }
        let step = rz / pq;
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * q[i];
        }
        rel = norm2(&r) / rhs_norm;
        if rel <= tol {
            return Ok(CgOutcome { x, iterations: it, relative_residual: rel });
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(HardyError::IterativeFailure { iterations: max_iter, residual: rel })
}
