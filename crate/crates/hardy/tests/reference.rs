use std::f64::consts::PI;

use hardy::geometry::ConvexityClass;
use hardy::reference::{
    ahlfors_lower_bound, gamma, koch_comparison, simplex_comparison, smooth_constant, threshold_report, tidblom_angles,
};
use hardy::HardyError;
use proptest::prelude::*;

#[test]
fn gamma_at_quarter_points() {
    // Γ(1/4) and Γ(3/4) to 17 digits.
    assert!((gamma(0.25).unwrap() - 3.625_609_908_221_908_3).abs() < 1e-13);
    assert!((gamma(0.75).unwrap() - 1.225_416_702_465_177_6).abs() < 1e-13);
    assert!((gamma(0.5).unwrap() - PI.sqrt()).abs() < 1e-14);
    assert!((gamma(5.0).unwrap() - 24.0).abs() < 1e-12);
    assert!(gamma(0.0).is_err() && gamma(-1.5).is_err());
}

#[test]
fn critical_angles_match_the_quoted_values() {
    let c = tidblom_angles();
    assert!((c.beta_c - 4.8559).abs() < 1e-3);
    let cosine = (2.0 * PI - c.beta_c).cos();
    assert!((cosine - 0.1431).abs() < 5e-4);
    assert!(1.0 / 7.0 < cosine && cosine < 1.0 / 6.0);
    assert!((c.alpha_c / PI - 0.454).abs() < 5e-4);
    assert!((c.alpha_c.to_degrees() - 81.77).abs() < 0.01);
    assert!((c.alpha_c + c.beta_c - 2.0 * PI).abs() < 1e-15);
}

#[test]
fn simplex_comparison_follows_the_cosines() {
    let cos_c = tidblom_angles().alpha_c.cos();
    for row in simplex_comparison(2..=9).unwrap() {
        assert!((row.dihedral.cos() - 1.0 / row.d as f64).abs() < 1e-15);
        assert_eq!(row.below_critical, 1.0 / row.d as f64 > cos_c, "d = {}", row.d);
    }
}

#[test]
fn koch_reports_formula_and_stated_values() {
    let k = koch_comparison().unwrap();
    assert!((k.hausdorff_dim - 1.261_859_507_142_914_9).abs() < 1e-14);
    assert!((k.formula_value - 2.0 / (2.0 - k.hausdorff_dim - 2.0).abs()).abs() < 1e-14);
    assert!((k.formula_value - 1.585).abs() < 1e-3);
    assert_eq!(k.stated_value, k.hausdorff_dim);
}

#[test]
fn exceptional_weights_are_errors() {
    assert!(matches!(smooth_constant(1.0), Err(HardyError::ExceptionalValue(_))));
    assert!(matches!(ahlfors_lower_bound(2, 1.0, 1.0), Err(HardyError::ExceptionalValue(_))));
    assert!(smooth_constant(-0.5).is_err());
    assert!(ahlfors_lower_bound(2, 2.5, 0.0).is_err());
}

#[test]
fn thresholds() {
    let low = threshold_report(ConvexityClass::Convex, 1.5).unwrap();
    assert_eq!(low.semibounded_beta, Some(1.0 / 16.0));
    let zero = threshold_report(ConvexityClass::C11, 0.0).unwrap();
    assert_eq!(zero.semibounded_beta, Some(0.25));
    assert_eq!(threshold_report(ConvexityClass::Convex, 3.0).unwrap().semibounded_beta, None);
    assert!(threshold_report(ConvexityClass::Other, 0.0).is_err());
}

proptest! {
    #[test]
    fn gamma_reflection(x in 0.01f64..0.99) {
        let lhs = gamma(x).unwrap() * gamma(1.0 - x).unwrap();
        let rhs = PI / (PI * x).sin();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs);
    }

    #[test]
    fn gamma_recurrence(x in 0.05f64..20.0) {
        let lhs = gamma(x + 1.0).unwrap();
        let rhs = x * gamma(x).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs);
    }

    #[test]
    fn codimension_one_bound_is_the_smooth_constant(delta in 0.0f64..10.0) {
        prop_assume!((delta - 1.0).abs() > 1e-6);
        prop_assert_eq!(ahlfors_lower_bound(2, 1.0, delta).unwrap(), smooth_constant(delta).unwrap());
        prop_assert_eq!(ahlfors_lower_bound(1, 0.0, delta).unwrap(), smooth_constant(delta).unwrap());
    }

    #[test]
    fn smooth_constant_is_symmetric_about_one(e in 0.001f64..0.999) {
        let a = smooth_constant(1.0 - e).unwrap();
        let b = smooth_constant(1.0 + e).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }
}
