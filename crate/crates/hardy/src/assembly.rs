//! Weighted P1 stiffness and mass matrices over the free vertices of a mesh.

use std::collections::BTreeSet;

use crate::error::{HardyError, Result};
use crate::geometry::Domain;
use crate::linalg::CsrMatrix;
use crate::mesh::{Element, Mesh};
use crate::quadrature::{collapsed, gauss_legendre, triangle_rule, TrianglePoint};
use crate::weights::weight_from_distance;

/// Default quadrature order: Gauss points per segment, or the 6-point rule
/// on triangles.
pub const DEFAULT_QUAD_ORDER: usize = 4;

/// Geometric sub-panels on segments with an end on Γ, each `PANEL_RATIO`
/// times the previous one.
const SEGMENT_PANELS: usize = 200;
const PANEL_RATIO: f64 = 0.8;

/// `A = ∫ d^δ ∇φᵢ·∇φⱼ`, `B = ∫ d^{δ-2} φᵢφⱼ`, `B₀ = ∫ φᵢφⱼ` on a shared
/// sparsity pattern.
#[derive(Debug, Clone)]
pub struct SparseSystem {
    pub a: CsrMatrix,
    pub b: CsrMatrix,
    pub b0: CsrMatrix,
    pub delta: f64,
    pub quad_order: usize,
    /// Global vertex id of each unknown.
    pub dofs: Vec<usize>,
    /// Extremes of `d_Γ` over all quadrature nodes.
    pub min_distance: f64,
    pub max_distance: f64,
    /// Every quadrature node lies strictly inside the meshed layer.
    pub certified: bool,
}

impl SparseSystem {
    pub fn dim(&self) -> usize {
        self.dofs.len()
    }

    /// `A + c²B₀`, the weak-inequality stiffness.
    pub fn penalized(&self, c: f64) -> CsrMatrix {
        self.a.lin_comb(1.0, &self.b0, c * c)
    }

    /// `A - βB`.
    pub fn shifted(&self, beta: f64) -> CsrMatrix {
        self.a.lin_comb(1.0, &self.b, -beta)
    }
}

pub fn assemble_system(mesh: &Mesh, domain: &Domain, delta: f64) -> Result<SparseSystem> {
    assemble_system_with(mesh, domain, delta, DEFAULT_QUAD_ORDER)
}

/// Local contributions of one element, merged over repeated vertex ids.
struct LocalBlock {
    ids: Vec<usize>,
    a: Vec<f64>,
    b: Vec<f64>,
    b0: Vec<f64>,
}

pub fn assemble_system_with(mesh: &Mesh, domain: &Domain, delta: f64, quad_order: usize) -> Result<SparseSystem> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(HardyError::invalid(format!("delta must be finite and nonnegative, got {delta}")));
    }
    if quad_order == 0 {
        return Err(HardyError::invalid("quadrature order must be positive"));
    }
    if mesh.dim != domain.dim {
        return Err(HardyError::invalid("mesh and domain dimensions differ"));
    }
    let free = mesh.free_index();
    let dofs: Vec<usize> = (0..mesh.vertices.len()).filter(|&v| free[v].is_some()).collect();
    let n = dofs.len();
    if n == 0 {
        return Err(HardyError::Resolution("mesh has no free vertices".into()));
    }

    let mut pattern: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for e in &mesh.elements {
        let k = mesh.corners_per_element();
        for i in 0..k {
            let Some(fi) = free[e.corners[i]] else { continue };
            for j in 0..k {
                if let Some(fj) = free[e.corners[j]] {
                    pattern[fi].insert(fj);
                }
            }
        }
    }
    let mut row_ptr = Vec::with_capacity(n + 1);
    row_ptr.push(0);
    let mut cols = Vec::new();
    for row in &pattern {
        cols.extend(row.iter().copied());
        row_ptr.push(cols.len());
    }
    drop(pattern);
    let mut va = vec![0.0; cols.len()];
    let mut vb = vec![0.0; cols.len()];
    let mut vb0 = vec![0.0; cols.len()];

    let line_rule = gauss_legendre(quad_order);
    let tri_rule = triangle_rule(quad_order);
    let corner_rules: Vec<Vec<TrianglePoint>> = (0..3).map(|c| collapsed(quad_order.max(6), c)).collect();
    let mut min_d = f64::INFINITY;
    let mut max_d = f64::NEG_INFINITY;
    for e in &mesh.elements {
        let block = if mesh.dim == 1 {
            segment_block(mesh, e, delta, &line_rule, &mut min_d, &mut max_d)?
        } else {
            let rule = match mesh.collapsed_corner(e) {
                Some(c) => &corner_rules[c],
                None => &tri_rule,
            };
            triangle_block(mesh, e, delta, rule, &mut min_d, &mut max_d)?
        };
        let m = block.ids.len();
        for i in 0..m {
            let Some(fi) = free[block.ids[i]] else { continue };
            let row = &cols[row_ptr[fi]..row_ptr[fi + 1]];
            for j in 0..m {
                let Some(fj) = free[block.ids[j]] else { continue };
                let pos = row_ptr[fi] + row.binary_search(&fj).expect("pattern covers element");
                va[pos] += block.a[i * m + j];
                vb[pos] += block.b[i * m + j];
                vb0[pos] += block.b0[i * m + j];
            }
        }
    }
    let layer_ok = mesh.r == 0.0 || max_d <= mesh.r * (1.0 + 1e-12);
    let certified = min_d > 0.0 && layer_ok;
    Ok(SparseSystem {
        a: CsrMatrix::from_parts(n, row_ptr.clone(), cols.clone(), va)?,
        b: CsrMatrix::from_parts(n, row_ptr.clone(), cols.clone(), vb)?,
        b0: CsrMatrix::from_parts(n, row_ptr, cols, vb0)?,
        delta,
        quad_order,
        dofs,
        min_distance: min_d,
        max_distance: max_d,
        certified,
    })
}

fn checked_weights(d: f64, delta: f64) -> Result<(f64, f64)> {
    if !(d > 0.0) {
        return Err(HardyError::Invariant(format!("quadrature node at distance {d} from the boundary")));
    }
    Ok((weight_from_distance(d, delta)?, weight_from_distance(d, delta - 2.0)?))
}

fn segment_block(
    mesh: &Mesh,
    e: &Element,
    delta: f64,
    rule: &[(f64, f64)],
    min_d: &mut f64,
    max_d: &mut f64,
) -> Result<LocalBlock> {
    let (p0, p1) = (e.local[0][0], e.local[1][0]);
    let len = (p1 - p0).abs();
    let g = [-1.0 / (p1 - p0), 1.0 / (p1 - p0)];
    let mut block = LocalBlock { ids: vec![e.corners[0], e.corners[1]], a: vec![0.0; 4], b: vec![0.0; 4], b0: vec![0.0; 4] };
    let touches = |c: usize| mesh.distance_at(e, e.local[c]) == 0.0;
    let graded;
    let rule = if touches(0) || touches(1) {
        graded = toward_zero_end(rule, touches(1));
        &graded[..]
    } else {
        rule
    };
    for &(x, w) in rule {
        let lam = [1.0 - x, x];
        let p = mesh.local_point(e, [1.0 - x, x, 0.0]);
        let d = mesh.distance_at(e, p);
        *min_d = min_d.min(d);
        *max_d = max_d.max(d);
        let (wa, wb) = checked_weights(d, delta)?;
        for i in 0..2 {
            for j in 0..2 {
                block.a[i * 2 + j] += w * len * wa * g[i] * g[j];
                block.b[i * 2 + j] += w * len * wb * lam[i] * lam[j];
                block.b0[i * 2 + j] += w * len * lam[i] * lam[j];
            }
        }
    }
    Ok(block)
}

/// Composite rule on `[0, 1]` with panels shrinking toward the end where the
/// distance vanishes; the weight there is only Hölder continuous.
fn toward_zero_end(rule: &[(f64, f64)], zero_at_one: bool) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(rule.len() * SEGMENT_PANELS);
    let mut hi = 1.0;
    for _ in 0..SEGMENT_PANELS {
        let lo = hi * PANEL_RATIO;
        for &(x, w) in rule {
            let t = lo + (hi - lo) * x;
            out.push((if zero_at_one { 1.0 - t } else { t }, w * (hi - lo)));
        }
        hi = lo;
    }
    out
}

fn triangle_block(
    mesh: &Mesh,
    e: &Element,
    delta: f64,
    rule: &[TrianglePoint],
    min_d: &mut f64,
    max_d: &mut f64,
) -> Result<LocalBlock> {
    let [p0, p1, p2] = e.local;
    let j = [[p1[0] - p0[0], p2[0] - p0[0]], [p1[1] - p0[1], p2[1] - p0[1]]];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    if det == 0.0 {
        return Err(HardyError::Invariant("degenerate element in chart coordinates".into()));
    }
    let area = det.abs() / 2.0;
    // Rows of J⁻¹ are the chart gradients of λ₁, λ₂.
    let g1 = [j[1][1] / det, -j[0][1] / det];
    let g2 = [-j[1][0] / det, j[0][0] / det];
    let grads = [[-g1[0] - g2[0], -g1[1] - g2[1]], g1, g2];

    // Group corners sharing a vertex id; a merged basis function is the sum
    // of its barycentric pieces.
    let mut ids: Vec<usize> = Vec::with_capacity(3);
    let mut members: Vec<Vec<usize>> = Vec::with_capacity(3);
    for c in 0..3 {
        match ids.iter().position(|&v| v == e.corners[c]) {
            Some(k) => members[k].push(c),
            None => {
                ids.push(e.corners[c]);
                members.push(vec![c]);
            }
        }
    }
    let m = ids.len();
    let group_grad: Vec<[f64; 2]> = members
        .iter()
        .map(|cs| {
            if cs.len() == 2 {
                // Exact complement of the remaining corner's gradient.
                let other = (0..3).find(|c| !cs.contains(c)).expect("three corners");
                [-grads[other][0], -grads[other][1]]
            } else {
                cs.iter().fold([0.0; 2], |acc, &c| [acc[0] + grads[c][0], acc[1] + grads[c][1]])
            }
        })
        .collect();
    let chart = mesh.patches[e.patch].chart;
    let mut block = LocalBlock { ids, a: vec![0.0; m * m], b: vec![0.0; m * m], b0: vec![0.0; m * m] };
    for q in rule {
        let p = mesh.local_point(e, q.bary);
        let d = mesh.distance_at(e, p);
        *min_d = min_d.min(d);
        *max_d = max_d.max(d);
        let (wa, wb) = checked_weights(d, delta)?;
        let (metric, vol) = chart.metric(p);
        let lam: Vec<f64> = members.iter().map(|cs| cs.iter().map(|&c| q.bary[c]).sum()).collect();
        let wq = q.weight * area;
        for i in 0..m {
            let gi = group_grad[i];
            let mg = [metric[0] * gi[0] + metric[1] * gi[1], metric[1] * gi[0] + metric[2] * gi[1]];
            for k in 0..m {
                let gk = group_grad[k];
                block.a[i * m + k] += wq * wa * (mg[0] * gk[0] + mg[1] * gk[1]);
                block.b[i * m + k] += wq * vol * wb * lam[i] * lam[k];
                block.b0[i * m + k] += wq * vol * lam[i] * lam[k];
            }
        }
    }
    Ok(block)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{Chart, DistanceLaw, Patch};

    fn uniform_unit_mesh(cells: usize) -> Mesh {
        let h = 1.0 / cells as f64;
        let vertices = (0..=cells).map(|i| [i as f64 * h, 0.0]).collect();
        let elements = (0..cells)
            .map(|i| Element {
                corners: [i, i + 1, 0],
                local: [[i as f64 * h, 0.0], [(i + 1) as f64 * h, 0.0], [0.0; 2]],
                patch: 0,
            })
            .collect();
        let patch = Patch { chart: Chart::Frame1D { origin: 0.0, sign: 1.0 }, law: DistanceLaw::Coordinate(0) };
        Mesh::new(1, vertices, elements, vec![patch], h, 0.5)
    }

    #[test]
    fn unweighted_1d_matrices() {
        let mesh = uniform_unit_mesh(4);
        let unit = Domain::interval(0.0, 1.0).unwrap();
        let sys = assemble_system(&mesh, &unit, 0.0).unwrap();
        assert_eq!(sys.dim(), 3);
        let h = 0.25;
        for i in 0..3 {
            for j in 0..3 {
                let (stiff, mass) = match (i as i64 - j as i64).abs() {
                    0 => (2.0 / h, h * 2.0 / 3.0),
                    1 => (-1.0 / h, h / 6.0),
                    _ => (0.0, 0.0),
                };
                assert!((sys.a.get(i, j) - stiff).abs() < 1e-13);
                assert!((sys.b0.get(i, j) - mass).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn constant_distance_field_makes_b_equal_b0() {
        let mut mesh = uniform_unit_mesh(8);
        mesh.patches[0].law = DistanceLaw::Coordinate(1);
        mesh.elements.iter_mut().for_each(|e| e.local.iter_mut().for_each(|p| p[1] = 1.0));
        mesh.r = 0.0;
        let unit = Domain::interval(0.0, 1.0).unwrap();
        let sys = assemble_system(&mesh, &unit, 2.0).unwrap();
        for i in 0..sys.dim() {
            for j in 0..sys.dim() {
                assert_eq!(sys.b.get(i, j), sys.b0.get(i, j));
            }
        }
    }
}
