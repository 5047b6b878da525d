//! Closed-form reference values.

use serde::Serialize;

use crate::error::{HardyError, Result};
use crate::geometry::ConvexityClass;

/// A closed-form value together with the inputs that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedForm {
    pub name: String,
    pub inputs: Vec<(String, f64)>,
    pub value: f64,
    pub provenance: String,
}

impl ClosedForm {
    fn new(name: &str, inputs: &[(&str, f64)], value: f64, provenance: &str) -> Result<Self> {
        if !value.is_finite() {
            return Err(HardyError::Invariant(format!("{name} is not finite")));
        }
        Ok(ClosedForm {
            name: name.to_string(),
            inputs: inputs.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            value,
            provenance: provenance.to_string(),
        })
    }
}

pub const SMOOTH_CITATION: &str = "2/|delta-1| for C11 or convex boundaries";
pub const AHLFORS_CITATION: &str = "2/|(d-d_H)+delta-2| Ahlfors-regular lower bound";
pub const CRITICAL_ANGLE_CITATION: &str = "beta_c = pi + 4 atan((2 Gamma(3/4)/Gamma(1/4))^2)";

fn check_delta(delta: f64) -> Result<()> {
    if !delta.is_finite() || delta < 0.0 {
        return Err(HardyError::invalid(format!("delta must be finite and >= 0, got {delta}")));
    }
    Ok(())
}

/// `2/|δ-1|`, the boundary constant of C^{1,1} and convex domains.
pub fn smooth_constant(delta: f64) -> Result<f64> {
    check_delta(delta)?;
    if delta == 1.0 {
        return Err(HardyError::ExceptionalValue(
            "delta = 1 admits no boundary Hardy inequality".into(),
        ));
    }
    Ok(2.0 / (delta - 1.0).abs())
}

pub fn smooth_constant_form(delta: f64) -> Result<ClosedForm> {
    ClosedForm::new("smooth_constant", &[("delta", delta)], smooth_constant(delta)?, SMOOTH_CITATION)
}

/// `2/|(d-d_H)+δ-2|`, the lower bound for Ahlfors-regular boundaries.
pub fn ahlfors_lower_bound(d: usize, d_h: f64, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    // d_H = 0 covers the endpoint pair of an interval.
    if !(d_h >= 0.0 && d_h <= d as f64) {
        return Err(HardyError::invalid(format!("need 0 <= d_H <= d, got d_H = {d_h}, d = {d}")));
    }
    // Grouped so that codimension one reduces to `delta - 1.0` bit for bit.
    let denom = delta - (2.0 - (d as f64 - d_h));
    if denom == 0.0 {
        return Err(HardyError::ExceptionalValue(format!(
            "delta = 2 - (d - d_H) = {delta} is excluded"
        )));
    }
    Ok(2.0 / denom.abs())
}

pub fn ahlfors_form(d: usize, d_h: f64, delta: f64) -> Result<ClosedForm> {
    ClosedForm::new(
        "ahlfors_lower_bound",
        &[("d", d as f64), ("d_H", d_h), ("delta", delta)],
        ahlfors_lower_bound(d, d_h, delta)?,
        AHLFORS_CITATION,
    )
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function by the Lanczos approximation (g = 7, nine terms) with the
/// reflection formula below 1/2.
pub fn gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(HardyError::invalid(format!("gamma requires x > 0, got {x}")));
    }
    Ok(gamma_positive(x))
}

fn gamma_positive(x: f64) -> f64 {
    use std::f64::consts::PI;
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma_positive(1.0 - x));
    }
    let z = x - 1.0;
    let mut series = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        series += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * series
}

/// Critical sector angles: `β_c` is the opening of the sector domain at which
/// the local constant leaves the standard value, `α_c = 2π - β_c` the
/// corresponding opening of the removed wedge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalAngles {
    pub beta_c: f64,
    pub alpha_c: f64,
}

pub fn tidblom_angles() -> CriticalAngles {
    use std::f64::consts::PI;
    let ratio = 2.0 * gamma_positive(0.75) / gamma_positive(0.25);
    let beta_c = PI + 4.0 * (ratio * ratio).atan();
    CriticalAngles { beta_c, alpha_c: 2.0 * PI - beta_c }
}

/// Dihedral angle `arccos(1/d)` of the regular simplex in `R^d`.
pub fn simplex_dihedral(d: usize) -> Result<f64> {
    if d < 2 {
        return Err(HardyError::invalid(format!("simplex dimension must be >= 2, got {d}")));
    }
    Ok((1.0 / d as f64).acos())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimplexComparison {
    pub d: usize,
    pub dihedral: f64,
    pub alpha_c: f64,
    /// The pairwise dihedral criterion `α < α_c` for an anomalous local constant.
    pub below_critical: bool,
}

pub fn simplex_comparison(dims: std::ops::RangeInclusive<usize>) -> Result<Vec<SimplexComparison>> {
    let alpha_c = tidblom_angles().alpha_c;
    dims.map(|d| {
        let dihedral = simplex_dihedral(d)?;
        Ok(SimplexComparison { d, dihedral, alpha_c, below_critical: dihedral < alpha_c })
    })
    .collect()
}

/// Koch snowflake bound: the lower-bound formula evaluated at `d_H = log 4/log 3`
/// next to the value `log 4/log 3` stated for it in the source discussion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KochComparison {
    pub hausdorff_dim: f64,
    pub formula_value: f64,
    pub stated_value: f64,
}

pub fn koch_comparison() -> Result<KochComparison> {
    let d_h = 4f64.ln() / 3f64.ln();
    Ok(KochComparison {
        hausdorff_dim: d_h,
        formula_value: ahlfors_lower_bound(2, d_h, 0.0)?,
        stated_value: d_h,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub delta: f64,
    pub self_adjoint_sufficient: bool,
    pub necessary_met: bool,
    /// Largest β keeping `H - β d^{δ-2}` bounded below, for `δ ∈ [0, 2)`.
    pub semibounded_beta: Option<f64>,
}

pub fn threshold_report(class: ConvexityClass, delta: f64) -> Result<ThresholdReport> {
    check_delta(delta)?;
    if class == ConvexityClass::Other {
        return Err(HardyError::UnsupportedKind {
            kind: "other".into(),
            what: "threshold report needs a C11, convex or convex-complement class".into(),
        });
    }
    if delta == 1.0 {
        return Err(HardyError::ExceptionalValue("delta = 1 has no threshold".into()));
    }
    let semibounded_beta = (delta < 2.0).then(|| {
        let half = (delta - 1.0).abs() / 2.0;
        half * half
    });
    Ok(ThresholdReport {
        delta,
        self_adjoint_sufficient: delta > 1.5,
        necessary_met: delta >= 1.5,
        semibounded_beta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn smooth_constant_values() {
        assert_eq!(smooth_constant(0.0).unwrap(), 2.0);
        assert_eq!(smooth_constant(3.0).unwrap(), 1.0);
        assert_eq!(smooth_constant(0.5).unwrap(), 4.0);
        assert!(matches!(smooth_constant(1.0), Err(HardyError::ExceptionalValue(_))));
        assert!(smooth_constant(-0.1).is_err());
    }

    #[test]
    fn ahlfors_values() {
        assert_eq!(ahlfors_lower_bound(2, 1.0, 0.0).unwrap(), 2.0);
        assert_eq!(ahlfors_lower_bound(3, 2.0, 3.0).unwrap(), 1.0);
        let koch = ahlfors_lower_bound(2, 4f64.ln() / 3f64.ln(), 0.0).unwrap();
        assert!((koch - 2.0 * 3f64.ln() / 4f64.ln()).abs() < 1e-15);
        assert!((koch - 1.5849625007211563).abs() < 1e-12);
        assert!(ahlfors_lower_bound(2, 1.0, 1.0).is_err());
        assert!(ahlfors_lower_bound(2, 2.5, 0.0).is_err());
    }

    #[test]
    fn gamma_special_values() {
        assert!((gamma(1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((gamma(0.5).unwrap() - PI.sqrt()).abs() < 1e-14);
        assert!((gamma(5.0).unwrap() - 24.0).abs() < 24.0 * 1e-14);
        assert!(gamma(0.0).is_err());
        assert!(gamma(-1.5).is_err());
    }

    #[test]
    fn tidblom_anchor_values() {
        let a = tidblom_angles();
        assert!((a.beta_c - 4.856).abs() < 1e-3);
        assert!((a.alpha_c / PI - 0.454).abs() < 1e-3);
        assert!((a.alpha_c.to_degrees() - 81.77).abs() < 0.01);
        assert!((a.alpha_c.cos() - 0.1431).abs() < 1e-4);
    }

    #[test]
    fn simplex_values() {
        assert!((simplex_dihedral(2).unwrap() - PI / 3.0).abs() < 1e-15);
        assert!((simplex_dihedral(3).unwrap() - 1.2309594173407747).abs() < 1e-12);
        assert!(simplex_dihedral(1).is_err());
        let rows = simplex_comparison(2..=10).unwrap();
        assert_eq!(rows.len(), 9);
        assert!(rows.iter().take(5).all(|r| r.below_critical));
        assert!(!rows.iter().find(|r| r.d == 7).unwrap().below_critical);
    }

    #[test]
    fn threshold_values() {
        let t = threshold_report(ConvexityClass::C11, 1.6).unwrap();
        assert!(t.self_adjoint_sufficient);
        let t = threshold_report(ConvexityClass::Convex, 1.5).unwrap();
        assert!(!t.self_adjoint_sufficient && t.necessary_met);
        assert_eq!(t.semibounded_beta, Some(1.0 / 16.0));
        assert!(threshold_report(ConvexityClass::Convex, 1.0).is_err());
        assert!(threshold_report(ConvexityClass::Other, 0.0).is_err());
        assert_eq!(threshold_report(ConvexityClass::Convex, 2.5).unwrap().semibounded_beta, None);
    }
}
