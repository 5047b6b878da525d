use serde::{Deserialize, Serialize};

use super::{check_delta, SolveOptions};
use crate::assembly::assemble_system_with;
use crate::error::{HardyError, Result};
use crate::geometry::{Domain, Shape};
use crate::linalg::smallest_eigenpair_with;
use crate::mesh::build_domain_mesh_with;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakCurvePoint {
    pub c: f64,
    /// Infinite when the zero-order term is too weak to bound the pencil.
    pub b_of_c: f64,
    pub lambda_min: f64,
    pub residual: f64,
}

/// `b(c) = λ_min(A + c²B₀, B)^{-1/2}` on one whole-domain mesh.
pub fn weak_constant_curve(
    domain: &Domain,
    delta: f64,
    c_list: &[f64],
    h: f64,
    refinements: usize,
    opts: &SolveOptions,
) -> Result<Vec<WeakCurvePoint>> {
    check_delta(delta)?;
    if c_list.is_empty() || c_list[0] < 0.0 || c_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(HardyError::invalid("c values must be nonnegative and strictly increasing"));
    }
    let mut mesh = build_domain_mesh_with(domain, h, &opts.mesh)?;
    for _ in 0..refinements {
        mesh = mesh.refine();
    }
    let sys = assemble_system_with(&mesh, domain, delta, opts.quad_order)?;
    let mut out = Vec::with_capacity(c_list.len());
    for &c in c_list {
        let stiff = sys.penalized(c);
        let eig = smallest_eigenpair_with(&stiff, &sys.b, &opts.eigen())?;
        // The pencil is semidefinite, so a nonpositive value is a rounded zero.
        let b_of_c = if eig.lambda_min > 0.0 { eig.lambda_min.powf(-0.5) } else { f64::INFINITY };
        out.push(WeakCurvePoint { c, b_of_c, lambda_min: eig.lambda_min, residual: eig.residual });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Semibounded,
    Unbounded,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemiboundedVerdict {
    pub beta: f64,
    /// `λ_min(A - βB, B₀)` by level.
    pub lambdas: Vec<f64>,
    /// `|λ_min(A, B₀)|` on the coarsest mesh.
    pub scale: f64,
    pub verdict: Verdict,
}

/// Relative change over the last two levels below which a sequence counts as bounded.
pub const BOUNDED_VARIATION: f64 = 0.05;
/// Multiple of the unperturbed scale beyond which a decreasing sequence counts as unbounded.
pub const UNBOUNDED_FACTOR: f64 = 1e3;

/// Lower semiboundedness of `d^δ`-weighted forms minus `β d^{δ-2}` on an
/// interval, judged from `λ_min(A - βB, B₀)` under refinement.
pub fn semibounded_scan(
    domain: &Domain,
    delta: f64,
    betas: &[f64],
    h0: f64,
    levels: usize,
    opts: &SolveOptions,
) -> Result<Vec<SemiboundedVerdict>> {
    if !matches!(domain.shape, Shape::Interval { .. }) {
        return Err(HardyError::UnsupportedKind {
            kind: domain.kind_name().into(),
            what: "semiboundedness scans".into(),
        });
    }
    if !(0.0..2.0).contains(&delta) {
        return Err(HardyError::invalid(format!("semiboundedness scans need 0 <= delta < 2, got {delta}")));
    }
    if levels < 2 {
        return Err(HardyError::invalid("semiboundedness scans need at least two levels"));
    }
    let mut mesh = build_domain_mesh_with(domain, h0, &opts.mesh)?;
    let mut systems = Vec::with_capacity(levels);
    for l in 0..levels {
        if l > 0 {
            mesh = mesh.refine();
        }
        systems.push(assemble_system_with(&mesh, domain, delta, opts.quad_order)?);
    }
    let base = smallest_eigenpair_with(&systems[0].a, &systems[0].b0, &opts.eigen())?;
    let scale = base.lambda_min.abs();
    let mut out = Vec::with_capacity(betas.len());
    for &beta in betas {
        let mut lambdas = Vec::with_capacity(levels);
        for sys in &systems {
            let eig = smallest_eigenpair_with(&sys.shifted(beta), &sys.b0, &opts.eigen())?;
            lambdas.push(eig.lambda_min);
        }
        let k = lambdas.len();
        let (prev, last) = (lambdas[k - 2], lambdas[k - 1]);
        let bounded = (last - prev).abs() < BOUNDED_VARIATION * prev.abs().max(last.abs());
        let decreasing = lambdas.windows(2).all(|w| w[1] < w[0]);
        let verdict = if bounded {
            Verdict::Semibounded
        } else if decreasing && last < -UNBOUNDED_FACTOR * scale {
            Verdict::Unbounded
        } else {
            Verdict::Inconclusive
        };
        out.push(SemiboundedVerdict { beta, lambdas, scale, verdict });
    }
    Ok(out)
}
