use hardy::assembly::{assemble_system, assemble_system_with};
use hardy::geometry::Domain;
use hardy::linalg::{smallest_eigenpair, CsrMatrix};
use hardy::mesh::{build_domain_mesh, build_layer_mesh, Mesh};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `∫_a^b t^q dt`.
fn power_integral(q: f64, a: f64, b: f64) -> f64 {
    if (q + 1.0).abs() < 1e-14 {
        (b / a).ln()
    } else {
        (b.powf(q + 1.0) - a.powf(q + 1.0)) / (q + 1.0)
    }
}

/// Dense `A` and `B` of a 1D mesh from closed-form element integrals of
/// `t^δ` and `t^{δ-2}` against linear hat functions.
fn dense_1d(mesh: &Mesh, delta: f64, dofs: &[usize]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n = dofs.len();
    let index = |v: usize| dofs.iter().position(|&d| d == v);
    let mut a = vec![vec![0.0; n]; n];
    let mut b = vec![vec![0.0; n]; n];
    for e in &mesh.elements {
        let t0 = mesh.distance_at(e, e.local[0]);
        let t1 = mesh.distance_at(e, e.local[1]);
        // Hat of corner 0 is (hi - t)/(hi - lo) when t0 = lo.
        let (lo, hi, lo_id, hi_id) = if t0 < t1 {
            (t0, t1, e.corners[0], e.corners[1])
        } else {
            (t1, t0, e.corners[1], e.corners[0])
        };
        let w = hi - lo;
        let p = delta - 2.0;
        let i = |k: f64| power_integral(p + k, lo, hi);
        let stiff = power_integral(delta, lo, hi) / (w * w);
        // Products of (hi - t) and (t - lo), each over w.
        // The hat of a vertex on Γ is never free, so only (t - lo)² survives there.
        let (m_lo_lo, m_lo_hi, m_hi_hi) = if lo == 0.0 {
            (f64::NAN, f64::NAN, i(2.0) / (w * w))
        } else {
            (
                (hi * hi * i(0.0) - 2.0 * hi * i(1.0) + i(2.0)) / (w * w),
                (-lo * hi * i(0.0) + (lo + hi) * i(1.0) - i(2.0)) / (w * w),
                (lo * lo * i(0.0) - 2.0 * lo * i(1.0) + i(2.0)) / (w * w),
            )
        };
        let ids = [lo_id, hi_id];
        let mass = [[m_lo_lo, m_lo_hi], [m_lo_hi, m_hi_hi]];
        for x in 0..2 {
            for y in 0..2 {
                if let (Some(p), Some(q)) = (index(ids[x]), index(ids[y])) {
                    a[p][q] += if x == y { stiff } else { -stiff };
                    b[p][q] += mass[x][y];
                }
            }
        }
    }
    (a, b)
}

fn max_abs(m: &[Vec<f64>]) -> f64 {
    m.iter().flatten().fold(0.0, |acc, v| acc.max(v.abs()))
}

fn assert_close(got: &CsrMatrix, want: &[Vec<f64>], rel: f64, what: &str) {
    let dense = got.to_dense();
    for (p, row) in want.iter().enumerate() {
        for (q, &w) in row.iter().enumerate() {
            let scale = want[p][p].abs().max(want[q][q].abs());
            assert!((dense[p][q] - w).abs() <= rel * scale, "{what}[{p}][{q}]: {} vs {w}", dense[p][q]);
        }
    }
}

#[test]
fn interval_layer_matches_closed_form_integrals() {
    let unit = Domain::interval(0.0, 1.0).unwrap();
    for delta in [0.0, 0.5, 1.5, 2.0, 3.0] {
        let mesh = build_layer_mesh(&unit, 0.25, 0.05, None).unwrap();
        let sys = assemble_system(&mesh, &unit, delta).unwrap();
        let (a, b) = dense_1d(&mesh, delta, &sys.dofs);
        assert!(max_abs(&a) > 0.0);
        assert_close(&sys.a, &a, 1e-9, &format!("A(delta={delta})"));
        assert_close(&sys.b, &b, 1e-8, &format!("B(delta={delta})"));
    }
}

#[test]
fn matrices_are_symmetric() {
    let cases = [
        (Domain::unit_square(), build_layer_mesh(&Domain::unit_square(), 0.2, 0.04, None).unwrap()),
        (Domain::disk([0.0, 0.0], 1.0).unwrap(), build_domain_mesh(&Domain::disk([0.0, 0.0], 1.0).unwrap(), 0.2).unwrap()),
    ];
    for (domain, mesh) in cases {
        for delta in [0.0, 1.5, 3.0] {
            let sys = assemble_system(&mesh, &domain, delta).unwrap();
            for m in [&sys.a, &sys.b, &sys.b0] {
                let top = m.diag().iter().cloned().fold(0.0, f64::max);
                assert!(m.asymmetry() <= 1e-12 * top, "asymmetry {} against {top}", m.asymmetry());
            }
        }
    }
}

#[test]
fn matrices_are_positive_semidefinite() {
    let square = Domain::unit_square();
    let mesh = build_layer_mesh(&square, 0.2, 0.04, None).unwrap();
    let sys = assemble_system(&mesh, &square, 1.5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let x: Vec<f64> = (0..sys.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        assert!(sys.a.quad_form(&x) >= 0.0);
        assert!(sys.b.quad_form(&x) > 0.0);
        assert!(sys.b0.quad_form(&x) > 0.0);
    }
}

#[test]
fn quadrature_order_doubling_barely_moves_the_eigenvalue() {
    let unit = Domain::interval(0.0, 1.0).unwrap();
    let mesh = build_layer_mesh(&unit, 0.25, 1.0 / 64.0, None).unwrap();
    for delta in [0.0, 0.5, 2.0, 3.0] {
        let lam = |order: usize| {
            let sys = assemble_system_with(&mesh, &unit, delta, order).unwrap();
            smallest_eigenpair(&sys.a, &sys.b, 1e-12, 1).unwrap().lambda_min
        };
        let (coarse, fine) = (lam(4), lam(8));
        assert!(((coarse - fine) / fine).abs() < 1e-6, "delta {delta}: {coarse} vs {fine}");
    }
}

#[test]
fn distances_stay_inside_the_layer() {
    let disk = Domain::disk([0.0, 0.0], 1.0).unwrap();
    let mesh = build_layer_mesh(&disk, 0.3, 0.05, None).unwrap();
    let sys = assemble_system(&mesh, &disk, 0.0).unwrap();
    assert!(sys.min_distance > 0.0 && sys.max_distance < 0.3);
    assert!(sys.certified);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    /// Both forms carry the factor `s^{δ+d-2}` under `x ↦ s·x`.
    #[test]
    fn assembly_scales_homogeneously(s in 0.2f64..5.0, delta in 0.0f64..3.0) {
        prop_assume!((delta - 1.0).abs() > 0.05);
        let square = Domain::unit_square();
        let big = square.scaled(s).unwrap();
        let small_sys = assemble_system(&build_layer_mesh(&square, 0.2, 0.04, None).unwrap(), &square, delta).unwrap();
        let big_sys = assemble_system(&build_layer_mesh(&big, 0.2 * s, 0.04 * s, None).unwrap(), &big, delta).unwrap();
        let factor = s.powf(delta);
        for (m1, m2) in [(&small_sys.a, &big_sys.a), (&small_sys.b, &big_sys.b)] {
            let scaled = m1.scaled(factor);
            let (d1, d2) = (scaled.to_dense(), m2.to_dense());
            let top = d1.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
            for (r1, r2) in d1.iter().zip(&d2) {
                for (x, y) in r1.iter().zip(r2) {
                    prop_assert!((x - y).abs() <= 1e-10 * top);
                }
            }
        }
    }
}
