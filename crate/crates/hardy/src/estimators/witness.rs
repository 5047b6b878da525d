use serde::{Deserialize, Serialize};

use crate::error::{HardyError, Result};
use crate::geometry::{dot, norm, sub, Domain, Point, Shape};
use crate::quadrature::gauss_legendre;
use crate::weights::{chi, xi, WitnessParams};

/// Boundary patch `A = Γ ∩ B(center; radius)` carrying the witness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessPatch {
    pub center: Point,
    pub radius: f64,
}

const GAUSS_POINTS: usize = 10;
const TANGENTIAL_PANELS: usize = 64;

/// `‖d^{δ/2-1}φ_n‖ / ‖d^{δ/2}∇φ_n‖` for `φ_n = d^{-α/2}ψ_n`, `α = (d - d_H) + δ - 2`.
///
/// The patch must sit on a straight piece of Γ (an interval endpoint or the
/// interior of a polygon face) so that the support of `ψ_n` sees a single
/// face; integrals are taken in the face frame `(u, t)` with `t = d_Γ`.
pub fn witness_ratio(domain: &Domain, patch: WitnessPatch, delta: f64, r: f64, n: f64) -> Result<f64> {
    let params = WitnessParams { n, r, center: patch.center, radius: patch.radius };
    params.validate()?;
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(HardyError::invalid(format!("delta must be finite and nonnegative, got {delta}")));
    }
    if (domain.dim as f64 - domain.hausdorff_dim - 1.0).abs() > 1e-12 {
        return Err(HardyError::UnsupportedKind {
            kind: domain.kind_name().into(),
            what: "witness ratios need a boundary of codimension one".into(),
        });
    }
    let alpha = (domain.dim as f64 - domain.hausdorff_dim) + delta - 2.0;
    if alpha == 0.0 {
        return Err(HardyError::ExceptionalValue(format!("delta = {delta} makes the witness exponent vanish")));
    }
    let t_lo = r / n;
    if !(t_lo > 1e-280) {
        return Err(HardyError::Resolution(format!("cutoff r/n = {t_lo:e} is below the quadrature range")));
    }
    let s = patch.radius;
    let planar = match &domain.shape {
        Shape::Interval { a, b } => {
            let z = patch.center[0];
            if (z - a).abs() > 1e-12 && (z - b).abs() > 1e-12 {
                return Err(HardyError::invalid("patch centre must be an interval endpoint"));
            }
            if s > (b - a) / 2.0 {
                return Err(HardyError::invalid("patch radius exceeds half the interval"));
            }
            false
        }
        Shape::ConvexPolygon { vertices } | Shape::PolygonComplement { vertices } => {
            check_face_patch(vertices, patch, matches!(domain.shape, Shape::ConvexPolygon { .. }))?;
            true
        }
        Shape::HalfPlane => {
            if patch.center[1].abs() > 1e-12 {
                return Err(HardyError::invalid("patch centre must lie on the boundary line"));
            }
            true
        }
        _ => {
            return Err(HardyError::UnsupportedKind {
                kind: domain.kind_name().into(),
                what: "witness ratios need a straight boundary piece".into(),
            })
        }
    };

    let t_hi = s;
    let t_panels = geometric_panels(t_lo, t_hi, &[r, s / 2.0]);
    let gauss = gauss_legendre(GAUSS_POINTS);
    // Integrand pair (numerator, denominator) at a point of the face frame.
    let integrand = |u: f64, t: f64| -> (f64, f64) {
        let over = (u.abs() - s).max(0.0);
        let da = over.hypot(t);
        let (x, dx) = xi(n, t / r);
        let (c, dc) = chi(da / s);
        let psi = x * c;
        let dpsi_dt = dx / r * c + x * dc / s * (t / da);
        let dpsi_du = x * dc / s * (over / da);
        let pow = t.powf(-alpha / 2.0);
        let phi = pow * psi;
        let gt = pow * (dpsi_dt - alpha / 2.0 * psi / t);
        let gu = pow * dpsi_du;
        (t.powf(delta - 2.0) * phi * phi, t.powf(delta) * (gt * gt + gu * gu))
    };
    let mut num = 0.0;
    let mut den = 0.0;
    for &(t0, t1) in &t_panels {
        for &(gx, gw) in &gauss {
            let t = t0 + gx * (t1 - t0);
            let wt = gw * (t1 - t0);
            if !planar {
                let (a, b) = integrand(0.0, t);
                num += wt * a;
                den += wt * b;
                continue;
            }
            // |u| ≤ s: the integrand does not depend on u.
            let (a, b) = integrand(0.0, t);
            num += 2.0 * s * wt * a;
            den += 2.0 * s * wt * b;
            for k in 0..TANGENTIAL_PANELS {
                let u0 = s + s * k as f64 / TANGENTIAL_PANELS as f64;
                let u1 = s + s * (k + 1) as f64 / TANGENTIAL_PANELS as f64;
                for &(gy, gv) in &gauss {
                    let (a, b) = integrand(u0 + gy * (u1 - u0), t);
                    let w = 2.0 * wt * gv * (u1 - u0);
                    num += w * a;
                    den += w * b;
                }
            }
        }
    }
    if !(num > 0.0 && den > 0.0 && num.is_finite() && den.is_finite()) {
        return Err(HardyError::Resolution("witness integrals vanished or overflowed".into()));
    }
    Ok((num / den).sqrt())
}

/// Panels of `[lo, hi]` with ratio at most 2, split at the given points.
fn geometric_panels(lo: f64, hi: f64, splits: &[f64]) -> Vec<(f64, f64)> {
    let mut cuts = vec![lo];
    let mut t = lo;
    while t * 2.0 < hi {
        t *= 2.0;
        cuts.push(t);
    }
    cuts.push(hi);
    cuts.extend(splits.iter().copied().filter(|&p| p > lo && p < hi));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs());
    cuts.windows(2).map(|w| (w[0], w[1])).collect()
}

/// The support `{d_A ≤ s}` must only see face `j` through `center`.
fn check_face_patch(vertices: &[Point], patch: WitnessPatch, inside: bool) -> Result<()> {
    let n = vertices.len();
    let s = patch.radius;
    for j in 0..n {
        let a = vertices[j];
        let b = vertices[(j + 1) % n];
        let e = sub(b, a);
        let len = norm(e);
        let rel = sub(patch.center, a);
        let u = dot(rel, e) / len;
        let off = (e[0] * rel[1] - e[1] * rel[0]).abs() / len;
        if off <= 1e-12 && u > 0.0 && u < len {
            // Interior polygons need room for the facial wedge at each corner.
            let need = if inside { 4.0 * s } else { 2.0 * s };
            if u < need || len - u < need {
                return Err(HardyError::invalid("patch reaches too close to a polygon vertex"));
            }
            return Ok(());
        }
    }
    Err(HardyError::invalid("patch centre must lie in the interior of a polygon face"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_panels_cover_range() {
        let p = geometric_panels(1e-6, 0.5, &[0.1, 0.25]);
        assert_eq!(p[0].0, 1e-6);
        assert_eq!(p.last().unwrap().1, 0.5);
        assert!(p.windows(2).all(|w| w[0].1 == w[1].0));
        assert!(p.iter().all(|(a, b)| b / a <= 2.0 + 1e-12));
    }
}
