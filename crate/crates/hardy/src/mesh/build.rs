use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use super::{Chart, DistanceLaw, Element, Mesh, Patch};
use crate::error::{HardyError, Result};
use crate::geometry::{dot, interior_angles, norm, sub, BoundingBox, Domain, Point, Shape};

/// Grading and resolution knobs shared by the builders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MeshOptions {
    /// Ratio of consecutive layer thicknesses toward Γ.
    pub grading_ratio: f64,
    /// `ln(r / t_min)`, the logarithmic depth resolved next to Γ.
    pub grading_depth: f64,
    /// Cells along each polygon face, or per quarter turn along arcs.
    pub tangential_cells: usize,
    /// Log-radial extent of apex meshes.
    pub cone_log_depth: f64,
    /// Log-radial cell size of apex meshes.
    pub cone_log_step: f64,
    /// Angular grading depth of apex meshes, `ln(cap / φ_min)`.
    pub cone_angular_depth: f64,
    /// Largest angular cell of apex meshes.
    pub cone_angular_cap: f64,
}

impl Default for MeshOptions {
    fn default() -> Self {
        Self::for_dim(2)
    }
}

impl MeshOptions {
    pub fn for_dim(dim: usize) -> Self {
        MeshOptions {
            grading_ratio: if dim == 1 { 1.05 } else { 1.5 },
            grading_depth: 100.0,
            tangential_cells: 2,
            cone_log_depth: 60.0,
            cone_log_step: 1.0,
            cone_angular_depth: 30.0,
            cone_angular_cap: 0.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.grading_ratio > 1.0 && self.grading_ratio.is_finite()) {
            return Err(HardyError::invalid("grading ratio must exceed 1"));
        }
        if !(self.grading_depth > 0.0 && self.grading_depth <= 600.0) {
            return Err(HardyError::invalid("grading depth must lie in (0, 600]"));
        }
        if self.tangential_cells == 0 {
            return Err(HardyError::invalid("tangential cell count must be positive"));
        }
        if !(self.cone_log_depth > 0.0 && self.cone_log_step > 0.0 && self.cone_log_step < self.cone_log_depth) {
            return Err(HardyError::invalid("apex mesh needs 0 < log step < log depth"));
        }
        if !(self.cone_angular_depth > 0.0 && self.cone_angular_cap > 0.0) {
            return Err(HardyError::invalid("apex mesh angular grading must be positive"));
        }
        Ok(())
    }
}

/// Layer coordinates `0 = t_0 < … < t_K = r`: spacing `h` away from Γ,
/// geometric with ratio `q` toward Γ, down to `r·e^{-depth}`.
pub fn graded_levels(r: f64, h: f64, q: f64, depth: f64) -> Vec<f64> {
    let t_min = r * (-depth).exp();
    let mut desc = vec![r];
    let mut cur = r;
    loop {
        let step = h.min(cur * (1.0 - 1.0 / q));
        let next = cur - step;
        if next <= t_min {
            break;
        }
        desc.push(next);
        cur = next;
    }
    desc.push(0.0);
    desc.reverse();
    desc
}

fn check_h(h: f64, depth: f64, what: &str) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(HardyError::invalid(format!("mesh size must be positive, got {h}")));
    }
    if !(h < depth / 4.0) {
        return Err(HardyError::Resolution(format!("h = {h} must stay below {what}/4 = {}", depth / 4.0)));
    }
    Ok(())
}

/// Layer mesh with the default options for the domain dimension.
pub fn build_layer_mesh(domain: &Domain, r: f64, h: f64, bbox: Option<&BoundingBox>) -> Result<Mesh> {
    build_layer_mesh_with(domain, r, h, bbox, &MeshOptions::for_dim(domain.dim))
}

pub fn build_layer_mesh_with(
    domain: &Domain,
    r: f64,
    h: f64,
    bbox: Option<&BoundingBox>,
    opts: &MeshOptions,
) -> Result<Mesh> {
    opts.validate()?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(HardyError::invalid(format!("layer depth must be positive, got {r}")));
    }
    check_h(h, r, "r")?;
    let need_box = || bbox.ok_or_else(|| HardyError::invalid(format!("{} needs a bounding box", domain.key)));
    let mesh = match &domain.shape {
        Shape::Interval { a, b } => {
            if r > (b - a) / 2.0 {
                return Err(HardyError::LayerOverlap { r, limit: (b - a) / 2.0 });
            }
            interval_mesh(*a, None, r, h, opts)
        }
        Shape::Disk { center, radius } => {
            if r >= *radius {
                return Err(HardyError::LayerOverlap { r, limit: *radius });
            }
            disk_mesh(*center, *radius, r, h, opts)
        }
        Shape::ConvexPolygon { vertices } => polygon_mesh(vertices, Some(r), h, opts)?,
        Shape::PolygonComplement { vertices } => complement_mesh(vertices, r, h, need_box()?, opts)?,
        Shape::WedgeComplement { alpha } => wedge_mesh(*alpha, r, h, need_box()?, opts)?,
        Shape::HalfPlane => half_plane_mesh(r, h, need_box()?, opts)?,
        Shape::KochSnowflake => {
            return Err(HardyError::UnsupportedKind { kind: "koch".into(), what: "meshing".into() })
        }
    };
    if mesh.num_free() == 0 {
        return Err(HardyError::Resolution("layer mesh has no free vertices".into()));
    }
    Ok(mesh)
}

pub fn build_domain_mesh(domain: &Domain, h: f64) -> Result<Mesh> {
    build_domain_mesh_with(domain, h, &MeshOptions::for_dim(domain.dim))
}

/// Mesh of the whole bounded domain, Dirichlet on Γ only.
pub fn build_domain_mesh_with(domain: &Domain, h: f64, opts: &MeshOptions) -> Result<Mesh> {
    opts.validate()?;
    let inradius = domain.inradius()?;
    check_h(h, inradius, "inradius")?;
    let mut mesh = match &domain.shape {
        Shape::Interval { a, b } => interval_mesh(*a, Some(*b), (b - a) / 2.0, h, opts),
        Shape::Disk { center, radius } => disk_mesh(*center, *radius, *radius, h, opts),
        Shape::ConvexPolygon { vertices } => polygon_mesh(vertices, None, h, opts)?,
        _ => {
            return Err(HardyError::UnsupportedKind {
                kind: domain.kind_name().into(),
                what: "whole-domain meshing of an unbounded domain".into(),
            })
        }
    };
    mesh.r = 0.0;
    Ok(mesh)
}

/// `(0, depth)` graded toward `a`; with `b` given, the whole interval graded
/// toward both ends with `depth` the half-length.
fn interval_mesh(a: f64, b: Option<f64>, depth: f64, h: f64, opts: &MeshOptions) -> Mesh {
    let levels = graded_levels(depth, h, opts.grading_ratio, opts.grading_depth);
    let mut patches = vec![Patch { chart: Chart::Frame1D { origin: a, sign: 1.0 }, law: DistanceLaw::Coordinate(0) }];
    let mut vertices: Vec<Point> = levels.iter().map(|t| [a + t, 0.0]).collect();
    let mut elements: Vec<Element> = levels
        .windows(2)
        .enumerate()
        .map(|(i, w)| Element { corners: [i, i + 1, 0], local: [[w[0], 0.0], [w[1], 0.0], [0.0; 2]], patch: 0 })
        .collect();
    if let Some(b) = b {
        patches.push(Patch { chart: Chart::Frame1D { origin: b, sign: -1.0 }, law: DistanceLaw::Coordinate(0) });
        let mid = levels.len() - 1;
        let base = vertices.len();
        // Right half: vertex for level k (k < K) sits at b - t_k; level K is the shared midpoint.
        let id = |k: usize| if k == mid { mid } else { base + k };
        for t in &levels[..mid] {
            vertices.push([b - t, 0.0]);
        }
        for (k, w) in levels.windows(2).enumerate() {
            elements.push(Element { corners: [id(k), id(k + 1), 0], local: [[w[0], 0.0], [w[1], 0.0], [0.0; 2]], patch: 1 });
        }
    }
    Mesh::new(1, vertices, elements, patches, h, depth)
}

/// Builds a structured sheet of quads split into two triangles; `id(k, c)`
/// names the vertex at level `k`, column `c`, `local(k, c)` its chart point.
fn push_sheet(
    elements: &mut Vec<Element>,
    patch: usize,
    levels: usize,
    columns: usize,
    id: &dyn Fn(usize, usize) -> usize,
    local: &dyn Fn(usize, usize) -> Point,
    drop_degenerate: bool,
) {
    for k in 0..levels - 1 {
        for c in 0..columns {
            let (a, b, cc, d) = ((k, c), (k, c + 1), (k + 1, c + 1), (k + 1, c));
            for tri in [[a, b, cc], [a, cc, d]] {
                let corners = tri.map(|(k, c)| id(k, c));
                let merged = corners[0] == corners[1] || corners[1] == corners[2] || corners[0] == corners[2];
                if merged && (drop_degenerate || corners[0] == corners[1] && corners[1] == corners[2]) {
                    continue;
                }
                elements.push(Element { corners, local: tri.map(|(k, c)| local(k, c)), patch });
            }
        }
    }
}

/// Annulus `R - depth < |x - c| < R` in polar coordinates; `depth = R`
/// meshes the whole disk with the centre as a single vertex.
fn disk_mesh(center: Point, radius: f64, depth: f64, h: f64, opts: &MeshOptions) -> Mesh {
    let levels = graded_levels(depth, h, opts.grading_ratio, opts.grading_depth);
    let full = depth == radius;
    let n_theta = 4 * opts.tangential_cells.max(1);
    let chart = Chart::Polar { center, radius };
    let top = levels.len() - 1;
    let mut vertices = Vec::new();
    for (k, &t) in levels.iter().enumerate() {
        if full && k == top {
            vertices.push(center);
            break;
        }
        for j in 0..n_theta {
            vertices.push(chart.to_physical([TAU * j as f64 / n_theta as f64, t]));
        }
    }
    let id = |k: usize, c: usize| if full && k == top { k * n_theta } else { k * n_theta + c % n_theta };
    let local = |k: usize, c: usize| [TAU * c as f64 / n_theta as f64, levels[k]];
    let mut elements = Vec::new();
    push_sheet(&mut elements, 0, levels.len(), n_theta, &id, &local, false);
    let law = DistanceLaw::Coordinate(1);
    Mesh::new(2, vertices, elements, vec![Patch { chart, law }], h, depth)
}

fn unit(v: Point) -> Point {
    let n = norm(v);
    [v[0] / n, v[1] / n]
}

fn rot90(v: Point) -> Point {
    [-v[1], v[0]]
}

/// Facial trapezoids of a convex polygon. With `r = None` the trapezoids
/// run up to the incircle, which must touch every face.
fn polygon_mesh(vertices: &[Point], r: Option<f64>, h: f64, opts: &MeshOptions) -> Result<Mesh> {
    let n = vertices.len();
    let angles = interior_angles(vertices)?;
    let cot_half: Vec<f64> = angles.iter().map(|a| 1.0 / (a / 2.0).tan()).collect();
    let edge: Vec<Point> = (0..n).map(|j| sub(vertices[(j + 1) % n], vertices[j])).collect();
    let len: Vec<f64> = edge.iter().map(|e| norm(*e)).collect();
    let collapse: Vec<f64> = (0..n).map(|j| len[j] / (cot_half[j] + cot_half[(j + 1) % n])).collect();
    let min_collapse = collapse.iter().cloned().fold(f64::INFINITY, f64::min);
    let full = r.is_none();
    let depth = match r {
        Some(r) => {
            if r >= min_collapse {
                return Err(HardyError::LayerOverlap { r, limit: min_collapse });
            }
            r
        }
        None => {
            let max_collapse = collapse.iter().cloned().fold(0.0, f64::max);
            if max_collapse - min_collapse > 1e-9 * max_collapse {
                return Err(HardyError::UnsupportedKind {
                    kind: "convex-polygon".into(),
                    what: "whole-domain meshes need a polygon with an incircle touching every face".into(),
                });
            }
            min_collapse
        }
    };
    let levels = graded_levels(depth, h, opts.grading_ratio, opts.grading_depth);
    let top = levels.len() - 1;
    let m = opts.tangential_cells;
    let frames: Vec<Chart> = (0..n)
        .map(|j| {
            let e1 = unit(edge[j]);
            Chart::Frame { origin: vertices[j], e1, e2: rot90(e1) }
        })
        .collect();
    // Incenter, for the collapsed top row of whole-domain meshes.
    let incenter = {
        let t = depth;
        let Chart::Frame { origin, e1, e2 } = frames[0] else { unreachable!() };
        let u = t * cot_half[0];
        [origin[0] + u * e1[0] + t * e2[0], origin[1] + u * e1[1] + t * e2[1]]
    };
    let ring = n * m;
    let id = |k: usize, j: usize, c: usize| -> usize {
        if full && k == top {
            return top * ring;
        }
        k * ring + (j * m + c) % ring
    };
    let local = |k: usize, j: usize, c: usize| -> Point {
        let t = levels[k];
        if full && k == top {
            let Chart::Frame { origin, e1, .. } = frames[j] else { unreachable!() };
            return [dot(sub(incenter, origin), e1), t];
        }
        let us = t * cot_half[j];
        let ue = len[j] - t * cot_half[(j + 1) % n];
        [us + (ue - us) * c as f64 / m as f64, t]
    };
    let mut verts = vec![[0.0; 2]; if full { top * ring + 1 } else { levels.len() * ring }];
    for k in 0..levels.len() {
        for j in 0..n {
            for c in 0..m {
                verts[id(k, j, c)] = frames[j].to_physical(local(k, j, c));
            }
        }
    }
    let mut elements = Vec::new();
    let mut patches = Vec::with_capacity(n);
    for j in 0..n {
        patches.push(Patch { chart: frames[j], law: DistanceLaw::Coordinate(1) });
        push_sheet(&mut elements, j, levels.len(), m, &|k, c| id(k, j, c), &|k, c| local(k, j, c), true);
    }
    Ok(Mesh::new(2, verts, elements, patches, h, depth))
}

/// Exterior layer of a convex polygon: a strip along each face and a fan at
/// each vertex.
fn complement_mesh(vertices: &[Point], r: f64, h: f64, bbox: &BoundingBox, opts: &MeshOptions) -> Result<Mesh> {
    let n = vertices.len();
    let angles = interior_angles(vertices)?;
    let levels = graded_levels(r, h, opts.grading_ratio, opts.grading_depth);
    let nl = levels.len();
    let m = opts.tangential_cells;
    let e1: Vec<Point> = (0..n).map(|j| unit(sub(vertices[(j + 1) % n], vertices[j]))).collect();
    let outward: Vec<Point> = e1.iter().map(|e| [e[1], -e[0]]).collect();
    let len: Vec<f64> = (0..n).map(|j| norm(sub(vertices[(j + 1) % n], vertices[j]))).collect();
    let fan_cells: Vec<usize> = angles
        .iter()
        .map(|a| (((PI - a) / FRAC_PI_2) * opts.tangential_cells as f64).ceil().max(1.0) as usize)
        .collect();

    // Vertex numbering: polygon vertices, then per level k ≥ 1 a ring made of
    // each fan's nodes 0..=M_k followed by the strip's interior columns.
    let ring_len: usize = (0..n).map(|k| fan_cells[k] + m).sum();
    let ring_offset: Vec<usize> = (0..n)
        .scan(0, |acc, k| {
            let s = *acc;
            *acc += fan_cells[k] + m;
            Some(s)
        })
        .collect();
    let base = |k: usize| n + (k - 1) * ring_len;
    let strip_base = |j: usize, lev: usize| base(lev) + ring_offset[j] + fan_cells[j] + 1;
    let fan_id = |v: usize, lev: usize, a: usize| -> usize {
        if lev == 0 {
            v
        } else {
            base(lev) + ring_offset[v] + a
        }
    };
    let strip_id = |j: usize, lev: usize, c: usize| -> usize {
        if c == 0 {
            return fan_id(j, lev, fan_cells[j]);
        }
        if c == m {
            return fan_id((j + 1) % n, lev, 0);
        }
        if lev == 0 {
            return n + (nl - 1) * ring_len + j * (m - 1) + c - 1;
        }
        strip_base(j, lev) + c - 1
    };
    let total = n + (nl - 1) * ring_len + n * (m - 1);
    let mut verts = vec![[0.0; 2]; total];
    let mut patches = Vec::new();
    let mut elements = Vec::new();
    for j in 0..n {
        let chart = Chart::Frame { origin: vertices[j], e1: e1[j], e2: outward[j] };
        let local = |lev: usize, c: usize| [len[j] * c as f64 / m as f64, levels[lev]];
        for lev in 0..nl {
            for c in 0..=m {
                verts[strip_id(j, lev, c)] = chart.to_physical(local(lev, c));
            }
        }
        patches.push(Patch { chart, law: DistanceLaw::Coordinate(1) });
        push_sheet(&mut elements, patches.len() - 1, nl, m, &|lev, c| strip_id(j, lev, c), &local, true);
    }
    for v in 0..n {
        let prev = (v + n - 1) % n;
        let start = outward[prev];
        let chart = Chart::Frame { origin: vertices[v], e1: start, e2: rot90(start) };
        let psi = PI - angles[v];
        let cells = fan_cells[v];
        let local = |lev: usize, a: usize| {
            let phi = psi * a as f64 / cells as f64;
            [levels[lev] * phi.cos(), levels[lev] * phi.sin()]
        };
        for lev in 0..nl {
            for a in 0..=cells {
                verts[fan_id(v, lev, a)] = chart.to_physical(local(lev, a));
            }
        }
        patches.push(Patch { chart, law: DistanceLaw::Radial });
        push_sheet(&mut elements, patches.len() - 1, nl, cells, &|lev, a| fan_id(v, lev, a), &local, true);
    }
    if let Some(p) = verts.iter().find(|p| !bbox.contains(**p)) {
        return Err(HardyError::invalid(format!(
            "layer of depth {r} leaves the bounding box at ({}, {})",
            p[0], p[1]
        )));
    }
    Ok(Mesh::new(2, verts, elements, patches, h, r))
}

fn exit_length(bbox: &BoundingBox, origin: Point, dir: Point) -> f64 {
    let mut t = f64::INFINITY;
    for (o, d, lo, hi) in [(origin[0], dir[0], bbox.xmin, bbox.xmax), (origin[1], dir[1], bbox.ymin, bbox.ymax)] {
        if d > 0.0 {
            t = t.min((hi - o) / d);
        } else if d < 0.0 {
            t = t.min((lo - o) / d);
        }
    }
    t
}

/// Layer of the wedge complement: one strip per ray, clipped to the box,
/// and a fan around the apex.
fn wedge_mesh(alpha: f64, r: f64, h: f64, bbox: &BoundingBox, opts: &MeshOptions) -> Result<Mesh> {
    let (c, s) = ((alpha / 2.0).cos(), (alpha / 2.0).sin());
    let rays = [([c, s], [-s, c]), ([c, -s], [-s, -c])];
    if !bbox.contains([0.0, 0.0]) {
        return Err(HardyError::invalid("bounding box must contain the apex"));
    }
    let levels = graded_levels(r, h, opts.grading_ratio, opts.grading_depth);
    let nl = levels.len();
    let psi = PI - alpha;
    let fan_cells = ((psi / FRAC_PI_2) * opts.tangential_cells as f64).ceil().max(1.0) as usize;
    let mut verts: Vec<Point> = vec![[0.0, 0.0]];
    let mut patches = Vec::new();
    let mut elements = Vec::new();
    // Fan nodes: apex at level 0, then (lev, a) for lev ≥ 1.
    let fan_id = |lev: usize, a: usize| if lev == 0 { 0 } else { 1 + (lev - 1) * (fan_cells + 1) + a };
    let fan_chart = Chart::Frame { origin: [0.0, 0.0], e1: rays[0].1, e2: rot90(rays[0].1) };
    let fan_local = |lev: usize, a: usize| {
        let phi = psi * a as f64 / fan_cells as f64;
        [levels[lev] * phi.cos(), levels[lev] * phi.sin()]
    };
    verts.resize(1 + (nl - 1) * (fan_cells + 1), [0.0; 2]);
    for lev in 1..nl {
        for a in 0..=fan_cells {
            verts[fan_id(lev, a)] = fan_chart.to_physical(fan_local(lev, a));
        }
    }
    patches.push(Patch { chart: fan_chart, law: DistanceLaw::Radial });
    push_sheet(&mut elements, 0, nl, fan_cells, &fan_id, &fan_local, true);

    for (side, (e, nrm)) in rays.iter().enumerate() {
        let u_max = exit_length(bbox, [0.0, 0.0], *e).min(exit_length(bbox, [r * nrm[0], r * nrm[1]], *e));
        if !(u_max > r) {
            return Err(HardyError::invalid("bounding box too small for the wedge layer"));
        }
        let cols = ((u_max / r).ceil() as usize * opts.tangential_cells).max(2);
        let base = verts.len();
        let apex_column = if side == 0 { 0 } else { fan_cells };
        let id = move |lev: usize, col: usize| -> usize {
            if col == 0 {
                return fan_id(lev, apex_column);
            }
            base + lev * cols + col - 1
        };
        let chart = Chart::Frame { origin: [0.0, 0.0], e1: *e, e2: *nrm };
        let levels = &levels;
        let local = move |lev: usize, col: usize| [u_max * col as f64 / cols as f64, levels[lev]];
        verts.resize(base + nl * cols, [0.0; 2]);
        for lev in 0..nl {
            for col in 1..=cols {
                verts[id(lev, col)] = chart.to_physical(local(lev, col));
            }
        }
        patches.push(Patch { chart, law: DistanceLaw::Coordinate(1) });
        push_sheet(&mut elements, patches.len() - 1, nl, cols, &id, &local, true);
    }
    if verts.iter().any(|p| !bbox.contains(*p)) {
        return Err(HardyError::invalid("wedge layer leaves the bounding box"));
    }
    Ok(Mesh::new(2, verts, elements, patches, h, r))
}

fn half_plane_mesh(r: f64, h: f64, bbox: &BoundingBox, opts: &MeshOptions) -> Result<Mesh> {
    if !(bbox.ymin <= 0.0 && bbox.ymax >= r) {
        return Err(HardyError::invalid("bounding box must span 0 <= y <= r"));
    }
    let levels = graded_levels(r, h, opts.grading_ratio, opts.grading_depth);
    let width = bbox.xmax - bbox.xmin;
    let cols = ((width / r).ceil() as usize * opts.tangential_cells).max(2);
    let chart = Chart::Frame { origin: [bbox.xmin, 0.0], e1: [1.0, 0.0], e2: [0.0, 1.0] };
    let id = |lev: usize, col: usize| lev * (cols + 1) + col;
    let local = |lev: usize, col: usize| [width * col as f64 / cols as f64, levels[lev]];
    let mut verts = vec![[0.0; 2]; levels.len() * (cols + 1)];
    for lev in 0..levels.len() {
        for col in 0..=cols {
            verts[id(lev, col)] = chart.to_physical(local(lev, col));
        }
    }
    let mut elements = Vec::new();
    push_sheet(&mut elements, 0, levels.len(), cols, &id, &local, true);
    Ok(Mesh::new(2, verts, elements, vec![Patch { chart, law: DistanceLaw::Coordinate(1) }], h, r))
}

/// Sector `{apex + ρ(cos θ, sin θ) : ρ < radius, angle0 < θ < angle0 + opening}`
/// whose straight sides are part of Γ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeSpec {
    pub apex: Point,
    pub angle0: f64,
    pub opening: f64,
    pub radius: f64,
}

impl ConeSpec {
    /// The sector seen from boundary point `x` of a polygonal domain, if the
    /// ball `B(x; radius)` meets no other boundary feature.
    pub fn at_boundary_point(domain: &Domain, x: Point, radius: f64) -> Result<Option<ConeSpec>> {
        let d0 = domain.signed_distance(x)?;
        if d0 > 1e-12 {
            return Err(HardyError::invalid("local constants need a boundary point"));
        }
        let spec = match &domain.shape {
            Shape::WedgeComplement { alpha } => {
                if norm(x) > 0.0 {
                    let dir = if x[1] >= 0.0 { alpha / 2.0 } else { -alpha / 2.0 };
                    let angle0 = if x[1] >= 0.0 { dir } else { dir + PI };
                    if radius > norm(x) {
                        return Ok(None);
                    }
                    ConeSpec { apex: x, angle0, opening: PI, radius }
                } else {
                    ConeSpec { apex: x, angle0: alpha / 2.0, opening: TAU - alpha, radius }
                }
            }
            Shape::ConvexPolygon { vertices } | Shape::PolygonComplement { vertices } => {
                let inside = matches!(domain.shape, Shape::ConvexPolygon { .. });
                let n = vertices.len();
                let angles = interior_angles(vertices)?;
                let mut found = None;
                for k in 0..n {
                    let v = vertices[k];
                    let next = vertices[(k + 1) % n];
                    let prev = vertices[(k + n - 1) % n];
                    let to_next = unit(sub(next, v));
                    let to_prev = unit(sub(prev, v));
                    if norm(sub(x, v)) <= 1e-12 {
                        // Interior sector swept counter-clockwise from the edge toward `next`.
                        let (angle0, opening) = if inside {
                            (to_next[1].atan2(to_next[0]), angles[k])
                        } else {
                            (to_prev[1].atan2(to_prev[0]), TAU - angles[k])
                        };
                        found = Some(ConeSpec { apex: x, angle0, opening, radius });
                        break;
                    }
                    let e = sub(next, v);
                    let t = dot(sub(x, v), e) / dot(e, e);
                    let off = (e[0] * (x[1] - v[1]) - e[1] * (x[0] - v[0])).abs() / norm(e);
                    if off <= 1e-12 && t > 0.0 && t < 1.0 {
                        let dir = unit(e);
                        let angle0 = if inside { dir[1].atan2(dir[0]) } else { (-dir[1]).atan2(-dir[0]) };
                        found = Some(ConeSpec { apex: x, angle0, opening: PI, radius });
                        break;
                    }
                }
                let Some(spec) = found else {
                    return Err(HardyError::invalid("point is not on the polygon boundary"));
                };
                // The ball must avoid every boundary feature not incident to x.
                for k in 0..n {
                    let a = vertices[k];
                    let b = vertices[(k + 1) % n];
                    let on_segment = {
                        let e = sub(b, a);
                        let t = dot(sub(x, a), e) / dot(e, e);
                        let off = (e[0] * (x[1] - a[1]) - e[1] * (x[0] - a[0])).abs() / norm(e);
                        off <= 1e-12 && (-1e-12..=1.0 + 1e-12).contains(&t)
                    };
                    if !on_segment && segment_distance(x, a, b) < radius {
                        return Ok(None);
                    }
                    if on_segment && norm(sub(a, x)) > 1e-12 && norm(sub(a, x)) < radius {
                        return Ok(None);
                    }
                    if on_segment && norm(sub(b, x)) > 1e-12 && norm(sub(b, x)) < radius {
                        return Ok(None);
                    }
                }
                spec
            }
            Shape::HalfPlane => ConeSpec { apex: x, angle0: 0.0, opening: PI, radius },
            _ => return Ok(None),
        };
        Ok(Some(spec))
    }
}

fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let e = sub(b, a);
    let t = (dot(sub(p, a), e) / dot(e, e)).clamp(0.0, 1.0);
    norm(sub(p, [a[0] + t * e[0], a[1] + t * e[1]]))
}

/// Log-polar mesh of a sector: `s = ln ρ` uniform over
/// `(ln radius - depth, ln radius)`, angles graded toward both sides.
pub fn build_cone_mesh(spec: &ConeSpec, opts: &MeshOptions) -> Result<Mesh> {
    opts.validate()?;
    if !(spec.opening > 0.0 && spec.opening < TAU && spec.radius > 0.0) {
        return Err(HardyError::invalid("sector needs 0 < opening < 2π and a positive radius"));
    }
    let half = spec.opening / 2.0;
    let cap = opts.cone_angular_cap.min(half / 2.0);
    // Each half is measured from its own edge so small angles stay exact.
    let phis = graded_levels(half, cap, opts.grading_ratio, opts.cone_angular_depth + (half / cap).ln());
    let s_out = spec.radius.ln();
    let cells = (opts.cone_log_depth / opts.cone_log_step).ceil() as usize;
    let s_nodes: Vec<f64> = (0..=cells)
        .map(|i| s_out - opts.cone_log_depth + opts.cone_log_depth * i as f64 / cells as f64)
        .collect();
    let cols = phis.len() - 1;
    // Columns 0..=cols belong to the lower half, cols..=2·cols to the upper
    // half, which runs backwards from the far edge.
    let id = |k: usize, c: usize| k * (2 * cols + 1) + c;
    let mut verts = vec![[0.0; 2]; s_nodes.len() * (2 * cols + 1)];
    let mut elements = Vec::new();
    let mut patches = Vec::new();
    let law = DistanceLaw::Cone { opening: spec.opening };
    for (side, (angle0, sign)) in [(spec.angle0, 1.0), (spec.angle0 + spec.opening, -1.0)].into_iter().enumerate() {
        let chart = Chart::LogPolar { apex: spec.apex, angle0, sign };
        let column = |c: usize| if side == 0 { c } else { 2 * cols - c };
        let local = |k: usize, c: usize| [phis[c], s_nodes[k]];
        for k in 0..s_nodes.len() {
            for c in 0..=cols {
                verts[id(k, column(c))] = chart.to_physical(local(k, c));
            }
        }
        push_sheet(&mut elements, side, s_nodes.len(), cols, &|k, c| id(k, column(c)), &local, true);
        patches.push(Patch { chart, law });
    }
    Ok(Mesh::new(2, verts, elements, patches, opts.cone_log_step, spec.radius))
}
