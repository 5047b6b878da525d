use serde::Serialize;

use crate::error::{HardyError, Result};
use crate::quadrature::integrate_adaptive;
use crate::spline::CubicSpline;

/// Both sides of the one-dimensional inequality with boundary term
/// `∫₀ʳ t^δ f′² ≥ ((δ-1)/2)² ∫₀ʳ t^{δ-2} f² - ((δ-1)/2) r^{δ-1} f(r)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs - rhs`.
    pub slack: f64,
    /// `∫₀ʳ t^{δ-2} f²`.
    pub mass: f64,
    /// Sum of the absolute values of all terms, for relative comparisons.
    pub scale: f64,
}

const QUAD_TOL: f64 = 1e-13;

pub fn verify_1d_inequality(f: &CubicSpline, delta: f64, r: f64) -> Result<InequalityCheck> {
    if !(delta >= 0.0 && delta.is_finite()) || !(r > 0.0 && r.is_finite()) {
        return Err(HardyError::invalid("need delta >= 0 and r > 0"));
    }
    let knots = f.knots();
    if knots[0] != 0.0 || (knots[knots.len() - 1] - r).abs() > 1e-12 * r {
        return Err(HardyError::invalid("spline must be defined on [0, r]"));
    }
    let f0 = f.eval(0.0).0;
    if f0 != 0.0 {
        return Err(HardyError::invalid(format!("spline must vanish at 0, got f(0) = {f0}")));
    }
    let gamma = (delta - 1.0) / 2.0;
    let mut lhs = 0.0;
    let mut mass = 0.0;
    // Integrate knot span by knot span so every panel is polynomial.
    for w in knots.windows(2) {
        lhs += integrate_adaptive(
            |t: f64| {
                let (_, d) = f.eval(t);
                t.powf(delta) * d * d
            },
            w[0],
            w[1],
            1e-300,
            QUAD_TOL,
        )?;
        mass += integrate_adaptive(
            |t: f64| {
                let (v, _) = f.eval(t);
                t.powf(delta - 2.0) * v * v
            },
            w[0],
            w[1],
            1e-300,
            QUAD_TOL,
        )?;
    }
    let fr = f.eval(r).0;
    let boundary = gamma * r.powf(delta - 1.0) * fr * fr;
    let rhs = gamma * gamma * mass - boundary;
    Ok(InequalityCheck { lhs, rhs, slack: lhs - rhs, mass, scale: lhs + gamma * gamma * mass + boundary.abs() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_profile_examples() {
        let f = CubicSpline::natural(vec![0.0, 0.5, 1.0], vec![0.0, 0.5, 1.0]).unwrap();
        let c0 = verify_1d_inequality(&f, 0.0, 1.0).unwrap();
        assert!((c0.lhs - 1.0).abs() < 1e-12);
        assert!((c0.slack - 0.25).abs() < 1e-10);
        let c2 = verify_1d_inequality(&f, 2.0, 1.0).unwrap();
        assert!((c2.lhs - 1.0 / 3.0).abs() < 1e-12);
        assert!((c2.slack - 0.75).abs() < 1e-10);
    }

    #[test]
    fn rejects_nonvanishing_start() {
        let f = CubicSpline::natural(vec![0.0, 1.0], vec![0.5, 1.0]).unwrap();
        assert!(verify_1d_inequality(&f, 0.0, 1.0).is_err());
    }
}
