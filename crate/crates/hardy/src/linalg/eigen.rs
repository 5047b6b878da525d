use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{dot, norm2, reverse_cuthill_mckee, CsrMatrix, EnvelopeCholesky};
use crate::error::{HardyError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    pub tol: f64,
    pub seed: u64,
    pub max_outer: usize,
}

impl EigenOptions {
    pub fn new(tol: f64, seed: u64) -> Self {
        EigenOptions { tol, seed, max_outer: 500 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    pub lambda_min: f64,
    /// B-normalized eigenvector.
    pub vector: Vec<f64>,
    /// `‖Ax - λBx‖ / (‖Bx‖·max(1, |λ|))`.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Final shift of the shift-and-invert iteration; always below `lambda_min`.
    pub shift: f64,
}

/// `xᵀAx / xᵀBx`.
pub fn rayleigh_quotient(a: &CsrMatrix, b: &CsrMatrix, x: &[f64]) -> Result<f64> {
    if x.iter().all(|&v| v == 0.0) {
        return Err(HardyError::invalid("Rayleigh quotient of the zero vector"));
    }
    Ok(a.quad_form(x) / b.quad_form(x))
}

pub fn smallest_eigenpair(a: &CsrMatrix, b: &CsrMatrix, tol: f64, seed: u64) -> Result<EigenResult> {
    smallest_eigenpair_with(a, b, &EigenOptions::new(tol, seed))
}

struct ShiftedFactor {
    sigma: f64,
    factor: EnvelopeCholesky,
}

fn try_shift(a: &CsrMatrix, b: &CsrMatrix, sigma: f64, perm: &[usize]) -> Option<ShiftedFactor> {
    let m = if sigma == 0.0 { a.clone() } else { a.lin_comb(1.0, b, -sigma) };
    EnvelopeCholesky::factor(&m, perm).ok().map(|factor| ShiftedFactor { sigma, factor })
}

/// Finds a shift below the spectrum: zero first, then the tiny trace-scaled
/// shift, then increasingly negative shifts.
fn initial_shift(a: &CsrMatrix, b: &CsrMatrix, perm: &[usize]) -> Result<ShiftedFactor> {
    if let Some(f) = try_shift(a, b, 0.0, perm) {
        return Ok(f);
    }
    let n = a.dim() as f64;
    let tiny = -1e-12 * a.trace().abs().max(f64::MIN_POSITIVE) / n;
    if let Some(f) = try_shift(a, b, tiny, perm) {
        return Ok(f);
    }
    let mut scale = 0.0f64;
    for i in 0..a.dim() {
        let row_abs: f64 = a.row(i).map(|(_, v)| v.abs()).sum();
        let bii = b.get(i, i);
        if bii > 0.0 {
            scale = scale.max(row_abs / bii);
        }
    }
    let mut sigma = -scale.max(1.0) * 1e-12;
    for _ in 0..40 {
        if let Some(f) = try_shift(a, b, sigma, perm) {
            return Ok(f);
        }
        sigma *= 10.0;
    }
    Err(HardyError::NotPositiveDefinite { row: 0 })
}

/// Smallest eigenpair of `Ax = λBx` by shift-and-invert inverse iteration.
///
/// Shifts are certified by successful Cholesky factorization of `A - σB`
/// and move toward the Rayleigh quotient once the iteration has settled.
pub fn smallest_eigenpair_with(a: &CsrMatrix, b: &CsrMatrix, opts: &EigenOptions) -> Result<EigenResult> {
    let n = a.dim();
    if n == 0 || b.dim() != n {
        return Err(HardyError::invalid("eigenproblem needs equal nonzero dimensions"));
    }
    if let Some(row) = (0..n).find(|&i| !(b.get(i, i) > 0.0)) {
        return Err(HardyError::NotPositiveDefinite { row });
    }
    let pattern = if a.same_pattern(b) { a.clone() } else { a.lin_comb(1.0, b, 1.0) };
    let perm = reverse_cuthill_mckee(&pattern);
    let mut shifted = initial_shift(a, b, &perm)?;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..1.5)).collect();
    let bn = b.quad_form(&x).sqrt();
    x.iter_mut().for_each(|v| *v /= bn);

    let mut history: Vec<f64> = Vec::new();
    let mut last_shift_iter = 0usize;
    let mut residual = f64::INFINITY;
    let mut bx = vec![0.0; n];
    let mut ax = vec![0.0; n];
    for it in 1..=opts.max_outer {
        b.mul_vec_into(&x, &mut bx);
        let y = shifted.factor.solve(&bx);
        let yn = b.quad_form(&y).sqrt();
        if !(yn.is_finite() && yn > 0.0) {
            return Err(HardyError::Stagnation { iterations: it, residual });
        }
        x = y.into_iter().map(|v| v / yn).collect();
        a.mul_vec_into(&x, &mut ax);
        b.mul_vec_into(&x, &mut bx);
        let theta = dot(&x, &ax) / dot(&x, &bx);
        let r: Vec<f64> = ax.iter().zip(&bx).map(|(p, q)| p - theta * q).collect();
        residual = norm2(&r) / (norm2(&bx) * theta.abs().max(1.0));
        history.push(theta);
        if residual < opts.tol {
            return Ok(EigenResult {
                lambda_min: theta,
                vector: x,
                residual,
                iterations: it,
                converged: true,
                shift: shifted.sigma,
            });
        }
        if it - last_shift_iter >= 3 && history.len() >= 3 {
            let k = history.len();
            let d1 = (history[k - 1] - history[k - 2]).abs();
            let d0 = (history[k - 2] - history[k - 3]).abs();
            let gap = theta - shifted.sigma;
            let slow = d0 > 0.0 && d1 / d0 > 0.05;
            let settled = d1 < 0.05 * gap;
            if gap > 0.0 && (slow || it - last_shift_iter >= 12) && settled {
                for frac in [0.9, 0.5] {
                    if let Some(f) = try_shift(a, b, shifted.sigma + frac * gap, &perm) {
                        shifted = f;
                        break;
                    }
                }
                last_shift_iter = it;
            }
        }
    }
    Err(HardyError::Stagnation { iterations: opts.max_outer, residual })
}
