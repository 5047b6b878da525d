//! Weight fields `d^p` and the logarithmic-cutoff witness functions.

use serde::{Deserialize, Serialize};

use crate::error::{HardyError, Result};
use crate::geometry::{clip_pieces_to_ball, norm, sample_pieces, sub, BoundingBox, Domain, Point};

/// Number of sample points used to approximate the patch `A = Γ ∩ B(z; s)`.
pub const PATCH_SAMPLES: usize = 2048;

/// `d^{δ + power_offset}`; the offset is 0 for the gradient weight and -2
/// for the singular mass weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub delta: f64,
    pub power_offset: f64,
}

impl WeightSpec {
    pub fn new(delta: f64, power_offset: f64) -> Result<Self> {
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(HardyError::invalid(format!("delta must be finite and nonnegative, got {delta}")));
        }
        if power_offset != 0.0 && power_offset != -2.0 {
            return Err(HardyError::invalid(format!("power offset must be 0 or -2, got {power_offset}")));
        }
        Ok(WeightSpec { delta, power_offset })
    }

    pub fn gradient(delta: f64) -> Result<Self> {
        Self::new(delta, 0.0)
    }

    pub fn singular_mass(delta: f64) -> Result<Self> {
        Self::new(delta, -2.0)
    }

    pub fn exponent(&self) -> f64 {
        self.delta + self.power_offset
    }
}

/// `d^exponent` for a known distance; `d = 0` with a negative exponent is a
/// singularity.
pub fn weight_from_distance(d: f64, exponent: f64) -> Result<f64> {
    if d <= 0.0 {
        if exponent < 0.0 {
            return Err(HardyError::Singularity { exponent });
        }
        return Ok(if exponent == 0.0 { 1.0 } else { 0.0 });
    }
    Ok(if exponent == 0.0 { 1.0 } else { d.powf(exponent) })
}

pub fn weight_eval(domain: &Domain, spec: WeightSpec, point: Point) -> Result<f64> {
    let d = domain.signed_distance(point)?;
    weight_from_distance(d, spec.exponent())
}

/// Logarithmic cutoff `ξ_n` and its derivative.
pub fn xi(n: f64, t: f64) -> (f64, f64) {
    if t < 1.0 / n {
        (0.0, 0.0)
    } else if t > 1.0 {
        (1.0, 0.0)
    } else {
        let ln_n = n.ln();
        ((n * t).ln() / ln_n, 1.0 / (t * ln_n))
    }
}

/// Decreasing C¹ profile: 1 on `[0, 1/2]`, cubic smoothstep down to 0 at 1.
pub fn chi(t: f64) -> (f64, f64) {
    if t <= 0.5 {
        (1.0, 0.0)
    } else if t >= 1.0 {
        (0.0, 0.0)
    } else {
        let s = 2.0 * (t - 0.5);
        (1.0 - s * s * (3.0 - 2.0 * s), -12.0 * s * (1.0 - s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessParams {
    /// Cutoff index `n ≥ 2`.
    pub n: f64,
    /// Layer depth.
    pub r: f64,
    /// Patch centre `z ∈ Γ`.
    pub center: Point,
    /// Patch radius `s`; distances to the patch are divided by it.
    pub radius: f64,
}

impl WitnessParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.n >= 2.0 && self.n.is_finite()) {
            return Err(HardyError::invalid(format!("witness index must be at least 2, got {}", self.n)));
        }
        if !(self.r > 0.0 && self.r.is_finite()) || !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(HardyError::invalid("witness depth and patch radius must be positive"));
        }
        Ok(())
    }
}

/// Witness `ψ_n = ξ_n(d/r)·χ(d_A/s)` with the patch sampled once.
#[derive(Debug, Clone)]
pub struct Witness {
    pub params: WitnessParams,
    patch: Vec<Point>,
}

impl Witness {
    pub fn new(domain: &Domain, params: WitnessParams) -> Result<Self> {
        params.validate()?;
        let z = params.center;
        if domain.signed_distance(z)? > 1e-12 {
            return Err(HardyError::invalid("patch centre must lie on the boundary"));
        }
        let s = params.radius;
        let bbox = BoundingBox::new(z[0] - 2.0 * s, z[0] + 2.0 * s, z[1] - 2.0 * s, z[1] + 2.0 * s)?;
        let pieces = clip_pieces_to_ball(&domain.boundary_pieces(Some(&bbox))?, z, s);
        let patch = sample_pieces(&pieces, PATCH_SAMPLES);
        if patch.is_empty() {
            return Err(HardyError::Geometry("patch contains no boundary points".into()));
        }
        Ok(Witness { params, patch })
    }

    /// Distance to the sampled patch, unscaled.
    pub fn patch_distance(&self, p: Point) -> f64 {
        self.patch.iter().map(|q| norm(sub(p, *q))).fold(f64::INFINITY, f64::min)
    }

    pub fn value(&self, domain: &Domain, p: Point) -> Result<f64> {
        let d = domain.signed_distance(p)?;
        let WitnessParams { n, r, radius, .. } = self.params;
        let (x, _) = xi(n, d / r);
        if x == 0.0 {
            return Ok(0.0);
        }
        Ok(x * chi(self.patch_distance(p) / radius).0)
    }
}

pub fn witness_function(domain: &Domain, params: WitnessParams, point: Point) -> Result<f64> {
    Witness::new(domain, params)?.value(domain, point)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_examples() {
        let disk = Domain::disk([0.0, 0.0], 1.0).unwrap();
        assert_eq!(weight_eval(&disk, WeightSpec::gradient(2.0).unwrap(), [0.0, 0.0]).unwrap(), 1.0);
        let unit = Domain::interval(0.0, 1.0).unwrap();
        assert_eq!(weight_eval(&unit, WeightSpec::singular_mass(0.0).unwrap(), [0.5, 0.0]).unwrap(), 4.0);
        assert_eq!(weight_eval(&unit, WeightSpec::gradient(0.0).unwrap(), [0.0, 0.0]).unwrap(), 1.0);
        assert!(matches!(
            weight_eval(&unit, WeightSpec::singular_mass(1.0).unwrap(), [1.0, 0.0]),
            Err(HardyError::Singularity { .. })
        ));
        assert!(WeightSpec::new(-0.1, 0.0).is_err());
        assert!(WeightSpec::new(1.0, -1.0).is_err());
    }

    #[test]
    fn chi_profile_bounds() {
        assert_eq!(chi(0.3).0, 1.0);
        assert_eq!(chi(1.0).0, 0.0);
        let worst = (0..=1000).map(|i| chi(0.5 + i as f64 / 2000.0).1.abs()).fold(0.0, f64::max);
        assert!((worst - 3.0).abs() < 1e-12);
    }

    #[test]
    fn witness_examples() {
        let unit = Domain::interval(0.0, 1.0).unwrap();
        let n = 100.0;
        let r = 0.1;
        let params = WitnessParams { n, r, center: [0.0, 0.0], radius: 0.4 };
        let w = Witness::new(&unit, params).unwrap();
        assert_eq!(w.value(&unit, [r / (2.0 * n), 0.0]).unwrap(), 0.0);
        assert_eq!(w.value(&unit, [0.15, 0.0]).unwrap(), 1.0);
        let half = w.value(&unit, [r / n.sqrt(), 0.0]).unwrap();
        assert!((half - 0.5).abs() < 1e-14);
    }
}
