use std::f64::consts::PI;

use hardy::geometry::{BoundaryPiece, Domain, Feature, Point};
use proptest::prelude::*;

fn seg_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let t = (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
    (p[0] - a[0] - t * dx).hypot(p[1] - a[1] - t * dy)
}

/// Distance to Γ by scanning a polyline description of the boundary.
fn brute_distance(domain: &Domain, p: Point) -> f64 {
    let bbox = hardy::geometry::BoundingBox::square(1e3);
    domain
        .boundary_pieces(Some(&bbox))
        .unwrap()
        .iter()
        .map(|piece| match *piece {
            BoundaryPiece::Point(q) => (p[0] - q[0]).hypot(p[1] - q[1]),
            BoundaryPiece::Segment(a, b) => seg_distance(p, a, b),
            BoundaryPiece::Arc { center, radius, .. } => ((p[0] - center[0]).hypot(p[1] - center[1]) - radius).abs(),
        })
        .fold(f64::INFINITY, f64::min)
}

fn gradient_norm(domain: &Domain, p: Point) -> f64 {
    let eps = 1e-6;
    let d = |q: Point| domain.signed_distance(q).unwrap();
    let gx = (d([p[0] + eps, p[1]]) - d([p[0] - eps, p[1]])) / (2.0 * eps);
    let gy = (d([p[0], p[1] + eps]) - d([p[0], p[1] - eps])) / (2.0 * eps);
    gx.hypot(gy)
}

fn triangle() -> Domain {
    Domain::equilateral_triangle()
}

#[test]
fn catalogue_keys_build() {
    for (key, _) in Domain::catalogue() {
        let key = key.replace("..", "1.5");
        Domain::from_key(&key).unwrap_or_else(|e| panic!("{key}: {e}"));
    }
}

#[test]
fn triangle_vertex_angles_are_sixty_degrees() {
    for a in triangle().dihedral_angles().unwrap() {
        assert!((a - PI / 3.0).abs() < 1e-12);
    }
}

#[test]
fn wedge_apex_is_its_only_vertex() {
    let w = Domain::wedge_complement(PI / 2.0).unwrap();
    assert_eq!(w.vertices(), vec![[0.0, 0.0]]);
    assert_eq!(w.dihedral_angles().unwrap(), vec![PI / 2.0]);
    assert!(w.signed_distance([-1.0, 0.0]).unwrap() > 0.99);
}

proptest! {
    #[test]
    fn square_distance_matches_brute_force(x in 0.0f64..1.0, y in 0.0f64..1.0) {
        let sq = Domain::unit_square();
        let d = sq.signed_distance([x, y]).unwrap();
        prop_assert!((d - brute_distance(&sq, [x, y])).abs() < 1e-13);
    }

    #[test]
    fn disk_distance_matches_brute_force(rho in 0.0f64..1.0, th in 0.0f64..(2.0 * PI)) {
        let disk = Domain::disk([0.3, -0.2], 1.0).unwrap();
        let p = [0.3 + rho * th.cos(), -0.2 + rho * th.sin()];
        prop_assert!((disk.signed_distance(p).unwrap() - brute_distance(&disk, p)).abs() < 1e-12);
    }

    #[test]
    fn square_complement_distance_matches_brute_force(x in -4.0f64..4.0, y in -4.0f64..4.0) {
        let sc = Domain::square_complement();
        let verts = sc.vertices();
        let inside = verts.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min) < x
            && x < verts.iter().map(|v| v[0]).fold(f64::NEG_INFINITY, f64::max)
            && verts.iter().map(|v| v[1]).fold(f64::INFINITY, f64::min) < y
            && y < verts.iter().map(|v| v[1]).fold(f64::NEG_INFINITY, f64::max);
        prop_assume!(!inside);
        prop_assert!((sc.signed_distance([x, y]).unwrap() - brute_distance(&sc, [x, y])).abs() < 1e-12);
    }

    #[test]
    fn wedge_complement_distance_matches_rays(alpha in 0.2f64..3.0, rho in 0.01f64..5.0, th in -PI..PI) {
        let w = Domain::wedge_complement(alpha).unwrap();
        prop_assume!(th.abs() > alpha / 2.0);
        let p = [rho * th.cos(), rho * th.sin()];
        let far = 1e4;
        let a = [far * (alpha / 2.0).cos(), far * (alpha / 2.0).sin()];
        let b = [a[0], -a[1]];
        let brute = seg_distance(p, [0.0, 0.0], a).min(seg_distance(p, [0.0, 0.0], b));
        prop_assert!((w.signed_distance(p).unwrap() - brute).abs() < 1e-12 * rho.max(1.0));
    }

    #[test]
    fn distance_has_unit_gradient_off_the_ridge(x in 0.05f64..0.95, y in 0.05f64..0.95) {
        let sq = Domain::unit_square();
        let mut faces = [x, 1.0 - x, y, 1.0 - y];
        faces.sort_by(f64::total_cmp);
        prop_assume!(faces[1] - faces[0] > 1e-4);
        prop_assert!((gradient_norm(&sq, [x, y]) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn disk_distance_has_unit_gradient(rho in 0.05f64..0.95, th in 0.0f64..(2.0 * PI)) {
        let disk = Domain::disk([0.0, 0.0], 1.0).unwrap();
        prop_assert!((gradient_norm(&disk, [rho * th.cos(), rho * th.sin()]) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn nearest_face_realizes_the_distance(u in 0.0f64..1.0, v in 0.0f64..1.0) {
        let tri = triangle();
        let verts = tri.vertices();
        // Barycentric sample inside the triangle.
        let (u, v) = if u + v > 1.0 { (1.0 - u, 1.0 - v) } else { (u, v) };
        let p = [
            verts[0][0] + u * (verts[1][0] - verts[0][0]) + v * (verts[2][0] - verts[0][0]),
            verts[0][1] + u * (verts[1][1] - verts[0][1]) + v * (verts[2][1] - verts[0][1]),
        ];
        let (feature, d) = tri.nearest_face(p).unwrap();
        let Feature::Face(j) = feature else { panic!("convex polygons report faces") };
        let fd = tri.facial_decomposition().unwrap();
        prop_assert!((fd.face_distance(j, p) - d).abs() < 1e-14);
        prop_assert!((d - tri.signed_distance(p).unwrap()).abs() < 1e-15);
        prop_assert!(fd.in_all_half_planes(p) || d.abs() < 1e-15);
    }

    #[test]
    fn distance_scales_with_the_domain(x in 0.0f64..1.0, y in 0.0f64..1.0, s in 0.1f64..10.0) {
        let sq = Domain::unit_square();
        let big = sq.scaled(s).unwrap();
        let d = sq.signed_distance([x, y]).unwrap();
        prop_assert!((big.signed_distance([s * x, s * y]).unwrap() - s * d).abs() < 1e-13 * s);
    }

    #[test]
    fn face_gradients_are_unit_inward_normals(j in 0usize..3) {
        let tri = triangle();
        let fd = tri.facial_decomposition().unwrap();
        let g = fd.face_gradient(j);
        prop_assert!((g[0].hypot(g[1]) - 1.0).abs() < 1e-15);
        let verts = tri.vertices();
        let centroid = [(verts[0][0] + verts[1][0] + verts[2][0]) / 3.0, (verts[0][1] + verts[1][1] + verts[2][1]) / 3.0];
        prop_assert!(fd.face_distance(j, centroid) > 0.0);
    }
}

/// Derivatives of `d_Γ` along the common unit normal of an interface cancel
/// between the two adjacent facial sets.
#[test]
fn interface_fluxes_cancel() {
    for domain in [Domain::unit_square(), Domain::equilateral_triangle()] {
        let fd = domain.facial_decomposition().unwrap();
        let depth = domain.inradius().unwrap() * 0.8;
        for iface in &fd.interfaces {
            let (j, k) = iface.faces;
            let nu = iface.normal;
            let mut dir = [-nu[1], nu[0]];
            let probe = [iface.vertex[0] + 1e-3 * dir[0], iface.vertex[1] + 1e-3 * dir[1]];
            if !fd.in_all_half_planes(probe) {
                dir = [-dir[0], -dir[1]];
            }
            for step in 1..=8 {
                let s = depth * step as f64 / 8.0;
                let x = [iface.vertex[0] + s * dir[0], iface.vertex[1] + s * dir[1]];
                assert!((fd.face_distance(j, x) - fd.face_distance(k, x)).abs() <= 1e-12, "{}: not equidistant", domain.key);
                let exact = |f: usize| {
                    let g = fd.face_gradient(f);
                    g[0] * nu[0] + g[1] * nu[1]
                };
                assert!((exact(j) + exact(k)).abs() <= 1e-12, "{}: faces ({j}, {k})", domain.key);

                // The same derivatives from finite differences of d_Γ inside each facial set.
                let mut sum = 0.0;
                for f in [j, k] {
                    let side = [1.0, -1.0]
                        .into_iter()
                        .map(|sg| [x[0] + sg * 1e-4 * nu[0], x[1] + sg * 1e-4 * nu[1]])
                        .find(|p| fd.minimizing_face(*p).0 == f)
                        .unwrap();
                    let h = 1e-7;
                    let d = |p: Point| domain.signed_distance(p).unwrap();
                    let forward = [side[0] + h * nu[0], side[1] + h * nu[1]];
                    let backward = [side[0] - h * nu[0], side[1] - h * nu[1]];
                    sum += (d(forward) - d(backward)) / (2.0 * h);
                }
                assert!(sum.abs() <= 1e-7, "{}: finite-difference flux {sum:e}", domain.key);
            }
        }
    }
}
