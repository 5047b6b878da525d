use std::f64::consts::PI;

use hardy::estimators::{
    boundary_constant, boundary_constant_with, full_domain_constant, local_constant, probe_angle, refine_sweep,
    semibounded_scan, verify_1d_inequality, weak_constant_curve, witness_ratio, CriticalAngleProtocol, LocalSetup,
    SolveOptions, Verdict, WitnessPatch,
};
use hardy::geometry::{BoundingBox, Domain};
use hardy::spline::CubicSpline;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn unit() -> Domain {
    Domain::interval(0.0, 1.0).unwrap()
}

#[test]
fn refinement_never_lowers_the_estimate() {
    let cases = [
        (Domain::unit_square(), 0.0, 0.2, 0.04),
        (Domain::disk([0.0, 0.0], 1.0).unwrap(), 1.5, 0.2, 0.04),
        (unit(), 0.5, 0.25, 0.05),
    ];
    for (domain, delta, r, h) in cases {
        let opts = SolveOptions::for_dim(domain.dim);
        let sweep = refine_sweep(&domain, delta, r, h, 3, None, &opts).unwrap();
        assert!(sweep.monotone, "{}: {:?}", domain.key, sweep.constants());
        for w in sweep.constants().windows(2) {
            assert!(w[0] <= w[1] + 1e-9, "{}: {w:?}", domain.key);
        }
        assert!(sweep.extrapolation.is_some());
    }
}

#[test]
fn constants_grow_with_layer_depth() {
    for delta in [0.0, 0.5, 3.0] {
        let values: Vec<f64> =
            [0.1, 0.2, 0.4].iter().map(|&r| boundary_constant(&unit(), delta, r, 0.02, 1e-10).unwrap().constant).collect();
        for w in values.windows(2) {
            assert!(w[0] <= w[1] * 1.01, "delta {delta}: {values:?}");
        }
    }
}

#[test]
fn converged_estimates_respect_the_codimension_one_bound() {
    for delta in [0.0, 3.0] {
        let bound = 2.0 / (delta - 1.0f64).abs();
        let opts = SolveOptions::for_dim(1);
        let sweep = refine_sweep(&unit(), delta, 0.25, 1.0 / 64.0, 4, None, &opts).unwrap();
        assert!(sweep.best() >= bound * 0.98, "delta {delta}: {}", sweep.best());
    }
}

#[test]
fn estimates_carry_their_eigen_data() {
    let est = boundary_constant(&Domain::unit_square(), 0.5, 0.2, 0.04, 1e-10).unwrap();
    assert_eq!(est.constant, est.lambda_min.powf(-0.5));
    assert!(est.residual < 1e-10);
    assert!(est.certified_lower_bound);
    assert_eq!(est.r, 0.2);
    assert!(est.unknowns > 0);
}

#[test]
fn dilation_leaves_the_constant_unchanged() {
    let opts = SolveOptions::for_dim(2);
    let square = Domain::unit_square();
    let complement = Domain::square_complement();
    for s in [0.25, 3.0] {
        let a = boundary_constant_with(&square, 0.5, 0.2, 0.04, None, &opts).unwrap().constant;
        let b = boundary_constant_with(&square.scaled(s).unwrap(), 0.5, 0.2 * s, 0.04 * s, None, &opts).unwrap().constant;
        assert!(((a - b) / a).abs() <= 1e-9, "square s={s}: {a} vs {b}");
        let bbox = BoundingBox::square(3.0);
        let a = boundary_constant_with(&complement, 3.0, 0.2, 0.04, Some(&bbox), &opts).unwrap().constant;
        let b = boundary_constant_with(&complement.scaled(s).unwrap(), 3.0, 0.2 * s, 0.04 * s, Some(&bbox.scaled(s)), &opts)
            .unwrap()
            .constant;
        assert!(((a - b) / a).abs() <= 1e-9, "complement s={s}: {a} vs {b}");
    }
}

#[test]
fn exceptional_weight_keeps_growing() {
    let opts = SolveOptions::for_dim(1);
    let sweep = refine_sweep(&unit(), 1.0, 0.25, 1.0 / 64.0, 3, None, &opts).unwrap();
    let c = sweep.constants();
    assert!(c.windows(2).all(|w| w[1] > w[0]), "{c:?}");
    assert!(*c.last().unwrap() > 10.0);
}

#[test]
fn whole_disk_is_bounded_below_the_critical_weight() {
    let disk = Domain::disk([0.0, 0.0], 1.0).unwrap();
    let est = full_domain_constant(&disk, 0.0, 0.1, 1e-10).unwrap();
    assert!(est.constant <= 2.0 * 1.02 && est.constant > 1.8, "{}", est.constant);
    assert_eq!(est.r, 0.0);
}

#[test]
fn weak_curve_is_nonincreasing_and_starts_at_the_full_constant() {
    let disk = Domain::disk([0.0, 0.0], 1.0).unwrap();
    let opts = SolveOptions::for_dim(2);
    let curve = weak_constant_curve(&disk, 0.0, &[0.0, 1.0, 4.0, 16.0], 0.2, 0, &opts).unwrap();
    for w in curve.windows(2) {
        assert!(w[1].b_of_c <= w[0].b_of_c * (1.0 + 1e-10));
    }
    let full = full_domain_constant(&disk, 0.0, 0.2, 1e-10).unwrap().constant;
    assert!((curve[0].b_of_c - full).abs() <= 1e-8 * full);
}

#[test]
fn weak_curve_rejects_unsorted_penalties() {
    let disk = Domain::disk([0.0, 0.0], 1.0).unwrap();
    let opts = SolveOptions::for_dim(2);
    assert!(weak_constant_curve(&disk, 0.0, &[1.0, 0.5], 0.2, 0, &opts).is_err());
}

#[test]
fn local_constants_at_a_flat_point_are_near_two() {
    let square = Domain::unit_square();
    let opts = SolveOptions::for_dim(2);
    let setup = LocalSetup { r: 0.2, h: 0.04, refinements: 1 };
    let est = local_constant(&square, [0.5, 0.0], 0.0, &[0.3, 0.2], &setup, None, &opts).unwrap();
    for e in &est {
        assert!(e.constant > 1.8 && e.constant < 2.04, "{}", e.constant);
    }
}

#[test]
fn apex_probe_separates_narrow_and_right_angles() {
    let protocol = CriticalAngleProtocol::default();
    let narrow = probe_angle(PI / 6.0, &protocol).unwrap();
    let right = probe_angle(PI / 2.0, &protocol).unwrap();
    assert!(narrow.anomalous, "{:?}", narrow.constants);
    assert!(!right.anomalous, "{:?}", right.constants);
    assert!(narrow.constants.windows(2).all(|w| w[0] <= w[1] + 1e-9));
}

#[test]
fn witness_ratios_climb_toward_the_bound() {
    let patch = WitnessPatch { center: [0.0, 0.0], radius: 0.5 };
    for (delta, bound) in [(0.0, 2.0), (3.0, 1.0)] {
        let ratios: Vec<f64> =
            [1e2, 1e3, 1e4].iter().map(|&n| witness_ratio(&unit(), patch, delta, 1e-12, n).unwrap()).collect();
        assert!(ratios.windows(2).all(|w| w[1] > w[0]), "{ratios:?}");
        let last = *ratios.last().unwrap();
        assert!(last <= bound * 1.001 && last >= bound * 0.85, "delta {delta}: {ratios:?}");
    }
}

#[test]
fn witness_rejects_patches_off_the_boundary() {
    let patch = WitnessPatch { center: [0.5, 0.0], radius: 0.1 };
    assert!(witness_ratio(&unit(), patch, 0.0, 0.1, 100.0).is_err());
    let square_patch = WitnessPatch { center: [0.5, 0.5], radius: 0.1 };
    assert!(witness_ratio(&Domain::unit_square(), square_patch, 0.0, 0.1, 100.0).is_err());
}

#[test]
fn semibounded_verdicts_straddle_the_threshold() {
    let opts = SolveOptions::for_dim(1);
    let v = semibounded_scan(&unit(), 1.5, &[0.05, 0.10], 1.0 / 64.0, 4, &opts).unwrap();
    assert_eq!(v[0].verdict, Verdict::Semibounded, "{:?}", v[0].lambdas);
    assert_eq!(v[1].verdict, Verdict::Unbounded, "{:?}", v[1].lambdas);
    let zero = semibounded_scan(&unit(), 0.0, &[0.0], 1.0 / 64.0, 3, &opts).unwrap();
    assert_eq!(zero[0].verdict, Verdict::Semibounded);
}

#[test]
fn linear_profile_slacks() {
    let f = CubicSpline::natural(vec![0.0, 0.5, 1.0], vec![0.0, 0.5, 1.0]).unwrap();
    let flat = verify_1d_inequality(&f, 0.0, 1.0).unwrap();
    assert!((flat.lhs - 1.0).abs() < 1e-12);
    assert!((flat.slack - 0.25).abs() < 1e-10);
    // Both integrals equal 1/3, so the slack is 1/3 - (1/4·1/3 - 1/2).
    let quadratic = verify_1d_inequality(&f, 2.0, 1.0).unwrap();
    assert!((quadratic.lhs - 1.0 / 3.0).abs() < 1e-12);
    assert!((quadratic.mass - 1.0 / 3.0).abs() < 1e-12);
    assert!((quadratic.slack - 0.75).abs() < 1e-10);
}

/// Five-point Gauss-Legendre nodes and weights on `[-1, 1]`.
const GAUSS5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

fn gauss(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (m, h) = ((a + b) / 2.0, (b - a) / 2.0);
    GAUSS5.iter().map(|&(x, w)| w * h * f(m + h * x)).sum()
}

/// `∫₀ʳ t^δ (f′ + γf/t)² dt` with `γ = (δ-1)/2`, which equals the slack
/// after integrating the cross term by parts.
fn slack_oracle(f: &CubicSpline, delta: f64) -> f64 {
    let gamma = (delta - 1.0) / 2.0;
    let g = |t: f64| {
        let (v, d) = f.eval(t);
        t.powf(delta) * (d + gamma * v / t).powi(2)
    };
    let knots = f.knots();
    let mut total = 0.0;
    for (k, w) in knots.windows(2).enumerate() {
        let panels = 16;
        if k == 0 {
            // Geometric panels toward t = 0, where the integrand is only Hölder.
            let mut hi = w[1];
            for _ in 0..400 {
                let lo = hi * 0.9;
                total += gauss(&g, lo, hi);
                hi = lo;
            }
        } else {
            let step = (w[1] - w[0]) / panels as f64;
            total += (0..panels).map(|i| gauss(&g, w[0] + i as f64 * step, w[0] + (i + 1) as f64 * step)).sum::<f64>();
        }
    }
    total
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inequality_slack_matches_the_square_completion(
        seed in any::<u64>(),
        delta in prop::sample::select(vec![0.0, 0.5, 1.0, 1.5, 2.0, 3.0]),
        r in 0.1f64..2.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = CubicSpline::random_vanishing(&mut rng, r, 6).unwrap();
        let check = verify_1d_inequality(&f, delta, r).unwrap();
        prop_assert!(check.slack >= -1e-9 * check.scale);
        let oracle = slack_oracle(&f, delta);
        prop_assert!(oracle >= 0.0);
        prop_assert!((check.slack - oracle).abs() <= 1e-8 * check.scale, "slack {} vs {}", check.slack, oracle);
    }
}
