//! Hardy constants from discrete eigenvalues.
//!
//! Every estimate is `λ_min^{-1/2}` of a pencil assembled on a conforming
//! subspace, hence a lower bound of the continuous constant of the meshed
//! region. Sweeps refine uniformly and extrapolate the monotone sequence.

mod inequality;
mod local;
mod weak;
mod witness;

use serde::{Deserialize, Serialize};

use crate::assembly::{assemble_system_with, SparseSystem, DEFAULT_QUAD_ORDER};
use crate::error::{HardyError, Result};
use crate::geometry::{BoundingBox, Domain};
use crate::linalg::{smallest_eigenpair_with, EigenOptions, EigenResult};
use crate::mesh::{build_domain_mesh_with, build_layer_mesh_with, Mesh, MeshOptions};

pub use inequality::{verify_1d_inequality, InequalityCheck};
pub use local::{critical_angle, local_constant, probe_angle, AngleProbe, CriticalAngleProtocol, CriticalAngleReport, LocalSetup};
pub use weak::{semibounded_scan, weak_constant_curve, SemiboundedVerdict, Verdict, WeakCurvePoint};
pub use witness::{witness_ratio, WitnessPatch};

/// Slack allowed when checking that refinement never lowers an estimate.
pub const MONOTONE_SLACK: f64 = 1e-9;

/// Solver and discretization knobs shared by all estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    /// Eigen-residual tolerance.
    pub tol: f64,
    pub seed: u64,
    pub quad_order: usize,
    pub mesh: MeshOptions,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-10, seed: 1, quad_order: DEFAULT_QUAD_ORDER, mesh: MeshOptions::default() }
    }
}

impl SolveOptions {
    pub fn for_dim(dim: usize) -> Self {
        SolveOptions { mesh: MeshOptions::for_dim(dim), ..Default::default() }
    }

    fn eigen(&self) -> EigenOptions {
        EigenOptions::new(self.tol, self.seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardyEstimate {
    pub delta: f64,
    /// Layer depth; 0 for whole-domain runs.
    pub r: f64,
    pub h: f64,
    pub lambda_min: f64,
    /// `lambda_min^{-1/2}`.
    pub constant: f64,
    pub residual: f64,
    pub certified_lower_bound: bool,
    pub level: usize,
    pub unknowns: usize,
    pub iterations: usize,
}

impl HardyEstimate {
    fn from_eigen(mesh: &Mesh, sys: &SparseSystem, eig: &EigenResult) -> Result<Self> {
        if !(eig.lambda_min > 0.0) {
            return Err(HardyError::Invariant(format!(
                "nonpositive smallest eigenvalue {} for the Hardy pencil",
                eig.lambda_min
            )));
        }
        Ok(HardyEstimate {
            delta: sys.delta,
            r: mesh.r,
            h: mesh.h,
            lambda_min: eig.lambda_min,
            constant: eig.lambda_min.powf(-0.5),
            residual: eig.residual,
            certified_lower_bound: sys.certified && eig.converged,
            level: mesh.level,
            unknowns: sys.dim(),
            iterations: eig.iterations,
        })
    }
}

/// Estimate on a prepared mesh.
pub fn estimate_on_mesh(mesh: &Mesh, domain: &Domain, delta: f64, opts: &SolveOptions) -> Result<HardyEstimate> {
    let sys = assemble_system_with(mesh, domain, delta, opts.quad_order)?;
    let eig = smallest_eigenpair_with(&sys.a, &sys.b, &opts.eigen())?;
    HardyEstimate::from_eigen(mesh, &sys, &eig)
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(HardyError::invalid(format!("delta must be finite and nonnegative, got {delta}")));
    }
    Ok(())
}

/// Lower bound of `a_δ(Γ_r)` on a single layer mesh.
pub fn boundary_constant(domain: &Domain, delta: f64, r: f64, h: f64, tol: f64) -> Result<HardyEstimate> {
    let opts = SolveOptions { tol, ..SolveOptions::for_dim(domain.dim) };
    boundary_constant_with(domain, delta, r, h, None, &opts)
}

pub fn boundary_constant_with(
    domain: &Domain,
    delta: f64,
    r: f64,
    h: f64,
    bbox: Option<&BoundingBox>,
    opts: &SolveOptions,
) -> Result<HardyEstimate> {
    check_delta(delta)?;
    let mesh = build_layer_mesh_with(domain, r, h, bbox, &opts.mesh)?;
    estimate_on_mesh(&mesh, domain, delta, opts)
}

/// Lower bound of `a_δ(Ω)` with Dirichlet conditions on Γ only.
pub fn full_domain_constant(domain: &Domain, delta: f64, h: f64, tol: f64) -> Result<HardyEstimate> {
    let opts = SolveOptions { tol, ..SolveOptions::for_dim(domain.dim) };
    check_delta(delta)?;
    let mesh = build_domain_mesh_with(domain, h, &opts.mesh)?;
    estimate_on_mesh(&mesh, domain, delta, &opts)
}

/// Richardson fit `c∞ - K·h^p` through three consecutive halvings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub value: f64,
    /// Fitted exponent, clamped to `[0.5, 2]`.
    pub exponent: f64,
}

/// Extrapolates the last three of a sequence computed at `h, h/2, h/4, …`.
pub fn extrapolate(values: &[f64]) -> Option<Extrapolation> {
    let k = values.len();
    if k < 3 {
        return None;
    }
    let (c1, c2, c3) = (values[k - 3], values[k - 2], values[k - 1]);
    let (d1, d2) = (c2 - c1, c3 - c2);
    if !(d1 > 0.0 && d2 > 0.0) {
        // Converged (or stalled) sequences extrapolate to their last value.
        return Some(Extrapolation { value: c3, exponent: 2.0 });
    }
    let p = (d1 / d2).log2().clamp(0.5, 2.0);
    Some(Extrapolation { value: c3 + d2 / (2f64.powf(p) - 1.0), exponent: p })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub estimates: Vec<HardyEstimate>,
    /// `None` when the sequence was not monotone.
    pub extrapolation: Option<Extrapolation>,
    pub monotone: bool,
}

impl Sweep {
    pub fn constants(&self) -> Vec<f64> {
        self.estimates.iter().map(|e| e.constant).collect()
    }

    pub fn finest(&self) -> &HardyEstimate {
        self.estimates.last().expect("sweeps are nonempty")
    }

    /// Extrapolated value, or the finest estimate when extrapolation was withheld.
    pub fn best(&self) -> f64 {
        self.extrapolation.map(|x| x.value).unwrap_or(self.finest().constant)
    }
}

/// Solves on `mesh` and `levels - 1` uniform refinements of it.
pub fn sweep_mesh(mesh: Mesh, domain: &Domain, delta: f64, levels: usize, opts: &SolveOptions) -> Result<Sweep> {
    if levels == 0 {
        return Err(HardyError::invalid("a sweep needs at least one level"));
    }
    let mut estimates = Vec::with_capacity(levels);
    let mut mesh = mesh;
    for l in 0..levels {
        if l > 0 {
            mesh = mesh.refine();
        }
        estimates.push(estimate_on_mesh(&mesh, domain, delta, opts)?);
    }
    let constants: Vec<f64> = estimates.iter().map(|e| e.constant).collect();
    let monotone = constants.windows(2).all(|w| w[1] >= w[0] - MONOTONE_SLACK * w[0].abs().max(1.0));
    let extrapolation = if monotone { extrapolate(&constants) } else { None };
    Ok(Sweep { estimates, extrapolation, monotone })
}

/// Layer estimates at `h0, h0/2, …` with extrapolation over the last three.
pub fn refine_sweep(
    domain: &Domain,
    delta: f64,
    r: f64,
    h0: f64,
    levels: usize,
    bbox: Option<&BoundingBox>,
    opts: &SolveOptions,
) -> Result<Sweep> {
    check_delta(delta)?;
    if levels < 3 {
        return Err(HardyError::invalid(format!("refinement sweeps need at least 3 levels, got {levels}")));
    }
    let mesh = build_layer_mesh_with(domain, r, h0, bbox, &opts.mesh)?;
    sweep_mesh(mesh, domain, delta, levels, opts)
}

/// Whole-domain counterpart of [`refine_sweep`].
pub fn full_domain_sweep(domain: &Domain, delta: f64, h0: f64, levels: usize, opts: &SolveOptions) -> Result<Sweep> {
    check_delta(delta)?;
    if levels < 1 {
        return Err(HardyError::invalid("a sweep needs at least one level"));
    }
    let mesh = build_domain_mesh_with(domain, h0, &opts.mesh)?;
    sweep_mesh(mesh, domain, delta, levels, opts)
}
