//! Conforming inner meshes of boundary layers and whole domains.
//!
//! Elements are simplices in the parameter space of a chart (a Cartesian
//! frame, a polar or a log-polar map). Basis functions are piecewise linear
//! in chart coordinates, which keeps them in `H¹₀` of the meshed region, so
//! every discrete Rayleigh quotient is an admissible test value. Each patch
//! also carries a closed-form distance law, which keeps `d_Γ` exact even
//! where it is far below the resolution of physical coordinates.

mod build;

use std::collections::HashMap;
use std::io::Write;

use serde::Serialize;

use crate::geometry::Point;

pub use build::{
    build_cone_mesh, build_domain_mesh, build_domain_mesh_with, build_layer_mesh, build_layer_mesh_with,
    graded_levels, ConeSpec, MeshOptions,
};

/// Map from parameter coordinates to the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Chart {
    /// `x = origin + sign·p₀` on the real line.
    Frame1D { origin: f64, sign: f64 },
    /// `x = origin + p₀·e1 + p₁·e2` with orthonormal `e1, e2`.
    Frame { origin: Point, e1: Point, e2: Point },
    /// `p = (θ, t)`, `x = center + (radius - t)(cos θ, sin θ)`.
    Polar { center: Point, radius: f64 },
    /// `p = (φ, s)`, `x = apex + e^s (cos(angle0 + sign·φ), sin(angle0 + sign·φ))`.
    LogPolar { apex: Point, angle0: f64, sign: f64 },
}

/// Closed-form distance to Γ in chart coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum DistanceLaw {
    /// `d = p[k]`.
    Coordinate(usize),
    /// `d = |p|`, for frames centred at a boundary vertex.
    Radial,
    /// `d = e^s·m(φ)` with `m = sin(min(φ, opening - φ))` below `π/2` and 1 above.
    Cone { opening: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Patch {
    pub chart: Chart,
    pub law: DistanceLaw,
}

impl Chart {
    pub fn to_physical(&self, p: Point) -> Point {
        match *self {
            Chart::Frame1D { origin, sign } => [origin + sign * p[0], 0.0],
            Chart::Frame { origin, e1, e2 } => {
                [origin[0] + p[0] * e1[0] + p[1] * e2[0], origin[1] + p[0] * e1[1] + p[1] * e2[1]]
            }
            Chart::Polar { center, radius } => {
                let rho = radius - p[1];
                [center[0] + rho * p[0].cos(), center[1] + rho * p[0].sin()]
            }
            Chart::LogPolar { apex, angle0, sign } => {
                let rho = p[1].exp();
                let a = angle0 + sign * p[0];
                [apex[0] + rho * a.cos(), apex[1] + rho * a.sin()]
            }
        }
    }

    /// `(√det G · G⁻¹, √det G)` for the pulled-back metric `G`; the first
    /// entry is the symmetric matrix `[m00, m01, m11]`.
    pub fn metric(&self, p: Point) -> ([f64; 3], f64) {
        match *self {
            Chart::Frame1D { .. } | Chart::Frame { .. } => ([1.0, 0.0, 1.0], 1.0),
            Chart::Polar { radius, .. } => {
                let rho = radius - p[1];
                ([1.0 / rho, 0.0, rho], rho)
            }
            Chart::LogPolar { .. } => {
                let rho2 = (2.0 * p[1]).exp();
                ([1.0, 0.0, 1.0], rho2)
            }
        }
    }

    /// Parameter value with a zero-radius image, if the chart has one.
    fn collapses_at(&self, p: Point) -> bool {
        matches!(*self, Chart::Polar { radius, .. } if p[1] == radius)
    }

    fn canonical(&self, p: Point) -> Point {
        match self {
            Chart::Polar { .. } => [p[0].rem_euclid(std::f64::consts::TAU), p[1]],
            _ => p,
        }
    }
}

impl DistanceLaw {
    pub fn distance(&self, p: Point) -> f64 {
        match *self {
            DistanceLaw::Coordinate(k) => p[k],
            DistanceLaw::Radial => p[0].hypot(p[1]),
            DistanceLaw::Cone { opening } => {
                let phi = p[0].min(opening - p[0]);
                let m = if phi < std::f64::consts::FRAC_PI_2 { phi.sin() } else { 1.0 };
                p[1].exp() * m
            }
        }
    }
}

/// Simplex with corners given by global vertex ids and their coordinates in
/// the patch chart. 1D elements use the first two corners.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Element {
    pub corners: [usize; 3],
    pub local: [Point; 3],
    pub patch: usize,
}

impl Element {
    /// True when two corners share a vertex (the chart collapses an edge).
    pub fn is_merged(&self, dim: usize) -> bool {
        let c = &self.corners;
        dim == 2 && (c[0] == c[1] || c[1] == c[2] || c[0] == c[2])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mesh {
    pub dim: usize,
    pub vertices: Vec<Point>,
    pub elements: Vec<Element>,
    pub patches: Vec<Patch>,
    /// `true` for unknowns, `false` for Dirichlet-fixed vertices.
    pub free: Vec<bool>,
    pub h: f64,
    /// Layer depth, 0 for whole-domain meshes.
    pub r: f64,
    pub level: usize,
    /// Vertex counts of all coarser levels, coarsest first.
    pub lineage: Vec<usize>,
    /// Extra Dirichlet condition outside a closed ball `(center, radius)`.
    pub ball: Option<(Point, f64)>,
}

impl Mesh {
    pub(crate) fn new(dim: usize, vertices: Vec<Point>, elements: Vec<Element>, patches: Vec<Patch>, h: f64, r: f64) -> Self {
        let mut mesh = Mesh {
            dim,
            free: vec![true; vertices.len()],
            vertices,
            elements,
            patches,
            h,
            r,
            level: 0,
            lineage: Vec::new(),
            ball: None,
        };
        mesh.classify();
        mesh
    }

    pub fn corners_per_element(&self) -> usize {
        self.dim + 1
    }

    pub fn num_free(&self) -> usize {
        self.free.iter().filter(|&&f| f).count()
    }

    /// Global vertex id → free unknown index.
    pub fn free_index(&self) -> Vec<Option<usize>> {
        let mut next = 0;
        self.free
            .iter()
            .map(|&f| {
                f.then(|| {
                    next += 1;
                    next - 1
                })
            })
            .collect()
    }

    /// Restricts the free set to vertices whose surrounding elements lie in
    /// the closed ball.
    pub fn with_ball_mask(mut self, center: Point, radius: f64) -> Self {
        self.ball = Some((center, radius));
        self.classify();
        self
    }

    /// Distance law value at chart point `p` of element `e`.
    pub fn distance_at(&self, e: &Element, p: Point) -> f64 {
        self.patches[e.patch].law.distance(p)
    }

    /// Fixes every vertex on an edge owned by exactly one element, and with a
    /// ball mask every vertex touching an element that leaves the ball.
    fn classify(&mut self) {
        let k = self.corners_per_element();
        let mut fixed = vec![false; self.vertices.len()];
        if self.dim == 1 {
            let mut count = vec![0usize; self.vertices.len()];
            for e in &self.elements {
                count[e.corners[0]] += 1;
                count[e.corners[1]] += 1;
            }
            for (v, &c) in count.iter().enumerate() {
                fixed[v] = c < 2;
            }
        } else {
            let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
            for e in &self.elements {
                for a in 0..k {
                    let (u, v) = (e.corners[a], e.corners[(a + 1) % k]);
                    if u != v {
                        *edges.entry((u.min(v), u.max(v))).or_insert(0) += 1;
                    }
                }
            }
            for (&(u, v), &c) in &edges {
                if c == 1 {
                    fixed[u] = true;
                    fixed[v] = true;
                }
            }
        }
        if let Some((center, radius)) = self.ball {
            let inside = |p: Point| (p[0] - center[0]).hypot(p[1] - center[1]) <= radius;
            for e in &self.elements {
                let chart = self.patches[e.patch].chart;
                let centroid = [
                    (e.local[0][0] + e.local[1][0] + e.local[2][0]) / 3.0,
                    (e.local[0][1] + e.local[1][1] + e.local[2][1]) / 3.0,
                ];
                let mut ok = inside(chart.to_physical(centroid));
                for c in 0..k {
                    ok &= inside(self.vertices[e.corners[c]]);
                }
                if !ok {
                    for c in 0..k {
                        fixed[e.corners[c]] = true;
                    }
                }
            }
        }
        let mut used = vec![false; self.vertices.len()];
        for e in &self.elements {
            for c in 0..k {
                used[e.corners[c]] = true;
            }
        }
        self.free = fixed.iter().zip(&used).map(|(&f, &u)| !f && u).collect();
    }

    /// Uniform refinement: bisection in 1D, red refinement in 2D. Existing
    /// vertices keep their ids, so coarse nodal vectors embed exactly.
    pub fn refine(&self) -> Mesh {
        let mut vertices = self.vertices.clone();
        let mut elements = Vec::with_capacity(self.elements.len() * if self.dim == 1 { 2 } else { 4 });
        let mut midpoints: HashMap<(usize, usize), Vec<(usize, Point, usize)>> = HashMap::new();
        let mut midpoint = |e: &Element, a: usize, b: usize, vertices: &mut Vec<Point>| -> (usize, Point) {
            let (u, v) = (e.corners[a], e.corners[b]);
            let pa = e.local[a];
            let pb = e.local[b];
            let local = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
            if u == v {
                return (u, local);
            }
            let chart = self.patches[e.patch].chart;
            let canon = chart.canonical(local);
            let key = (u.min(v), u.max(v));
            let variants = midpoints.entry(key).or_default();
            let tol = 1e-12 * (1.0 + canon[0].abs() + canon[1].abs());
            for &(patch, c, id) in variants.iter() {
                if patch != e.patch || ((c[0] - canon[0]).abs() <= tol && (c[1] - canon[1]).abs() <= tol) {
                    return (id, local);
                }
            }
            let id = vertices.len();
            vertices.push(chart.to_physical(local));
            variants.push((e.patch, canon, id));
            (id, local)
        };
        for e in &self.elements {
            if self.dim == 1 {
                let (m, pm) = midpoint(e, 0, 1, &mut vertices);
                let c = e.corners;
                let l = e.local;
                elements.push(Element { corners: [c[0], m, 0], local: [l[0], pm, [0.0; 2]], patch: e.patch });
                elements.push(Element { corners: [m, c[1], 0], local: [pm, l[1], [0.0; 2]], patch: e.patch });
                continue;
            }
            let (m01, p01) = midpoint(e, 0, 1, &mut vertices);
            let (m12, p12) = midpoint(e, 1, 2, &mut vertices);
            let (m20, p20) = midpoint(e, 2, 0, &mut vertices);
            let c = e.corners;
            let l = e.local;
            let children = [
                ([c[0], m01, m20], [l[0], p01, p20]),
                ([m01, c[1], m12], [p01, l[1], p12]),
                ([m20, m12, c[2]], [p20, p12, l[2]]),
                ([m01, m12, m20], [p01, p12, p20]),
            ];
            for (corners, local) in children {
                elements.push(Element { corners, local, patch: e.patch });
            }
        }
        let mut lineage = self.lineage.clone();
        lineage.push(self.vertices.len());
        let mut mesh = Mesh {
            dim: self.dim,
            free: vec![true; vertices.len()],
            vertices,
            elements,
            patches: self.patches.clone(),
            h: self.h / 2.0,
            r: self.r,
            level: self.level + 1,
            lineage,
            ball: self.ball,
        };
        mesh.classify();
        mesh
    }

    /// Largest and smallest distance over the given barycentric sample points
    /// of every element (chart-exact).
    pub fn distance_range(&self, bary: &[[f64; 3]]) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for e in &self.elements {
            for b in bary {
                let p = self.local_point(e, *b);
                let d = self.distance_at(e, p);
                lo = lo.min(d);
                hi = hi.max(d);
            }
        }
        (lo, hi)
    }

    /// Chart point with barycentric coordinates `b` (the third entry is
    /// ignored for 1D elements).
    pub fn local_point(&self, e: &Element, b: [f64; 3]) -> Point {
        let k = self.corners_per_element();
        let mut p = [0.0; 2];
        for c in 0..k {
            p[0] += b[c] * e.local[c][0];
            p[1] += b[c] * e.local[c][1];
        }
        p
    }

    pub(crate) fn collapsed_corner(&self, e: &Element) -> Option<usize> {
        if self.dim != 2 || e.is_merged(2) {
            return None;
        }
        let chart = self.patches[e.patch].chart;
        let hits: Vec<usize> = (0..3).filter(|&c| chart.collapses_at(e.local[c])).collect();
        (hits.len() == 1).then(|| hits[0])
    }

    /// Smallest interior angle over non-merged triangles, in chart coordinates.
    pub fn min_angle(&self) -> f64 {
        let mut worst = std::f64::consts::PI;
        if self.dim != 2 {
            return worst;
        }
        for e in self.elements.iter().filter(|e| !e.is_merged(2)) {
            for c in 0..3 {
                let a = e.local[c];
                let b = e.local[(c + 1) % 3];
                let d = e.local[(c + 2) % 3];
                let u = [b[0] - a[0], b[1] - a[1]];
                let v = [d[0] - a[0], d[1] - a[1]];
                let ang = (u[0] * v[1] - u[1] * v[0]).abs().atan2(u[0] * v[0] + u[1] * v[1]);
                worst = worst.min(ang);
            }
        }
        worst
    }

    /// Plain-text dump: `v x y`, `e i j k` (or `e i j`), `fix i`.
    pub fn write_dump<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for v in &self.vertices {
            writeln!(out, "v {:.16e} {:.16e}", v[0], v[1])?;
        }
        for e in &self.elements {
            if self.dim == 1 {
                writeln!(out, "e {} {}", e.corners[0], e.corners[1])?;
            } else {
                writeln!(out, "e {} {} {}", e.corners[0], e.corners[1], e.corners[2])?;
            }
        }
        for (i, &f) in self.free.iter().enumerate() {
            if !f {
                writeln!(out, "fix {i}")?;
            }
        }
        Ok(())
    }
}
