use std::f64::consts::{FRAC_PI_2, FRAC_PI_8};

use serde::{Deserialize, Serialize};

use super::{check_delta, estimate_on_mesh, sweep_mesh, HardyEstimate, SolveOptions};
use crate::error::{HardyError, Result};
use crate::geometry::{BoundingBox, Domain, Point};
use crate::mesh::{build_cone_mesh, build_layer_mesh_with, ConeSpec};

/// Geometry shared by every radius of a local-constant family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalSetup {
    /// Layer depth.
    pub r: f64,
    /// Mesh size of the layer mesh used away from polygonal points.
    pub h: f64,
    /// Uniform refinements applied before solving.
    pub refinements: usize,
}

/// Estimates of `a_δ(Γ_r ∩ B(x; s))` for each radius `s`.
///
/// Where the boundary near `x` is straight (polygon faces, vertices, wedge
/// apexes) the region contains the sector of radius `min(r, s)` at `x`,
/// which is meshed in log-polar coordinates; elsewhere the layer mesh is
/// restricted to the ball.
pub fn local_constant(
    domain: &Domain,
    x: Point,
    delta: f64,
    radii: &[f64],
    setup: &LocalSetup,
    bbox: Option<&BoundingBox>,
    opts: &SolveOptions,
) -> Result<Vec<HardyEstimate>> {
    check_delta(delta)?;
    if radii.is_empty() || radii.iter().any(|s| !(*s > 0.0)) || radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(HardyError::invalid("radii must be positive and strictly decreasing"));
    }
    if domain.dim != 2 {
        return Err(HardyError::UnsupportedKind { kind: domain.kind_name().into(), what: "local constants".into() });
    }
    let mut out = Vec::with_capacity(radii.len());
    for &s in radii {
        let sector = ConeSpec::at_boundary_point(domain, x, s.min(setup.r))?;
        let mut mesh = match sector {
            Some(spec) => build_cone_mesh(&spec, &opts.mesh)?,
            None => {
                let mesh = build_layer_mesh_with(domain, setup.r, setup.h, bbox, &opts.mesh)?.with_ball_mask(x, s);
                if mesh.num_free() == 0 {
                    return Err(HardyError::Resolution(format!("ball of radius {s} holds no free vertex")));
                }
                mesh
            }
        };
        for _ in 0..setup.refinements {
            mesh = mesh.refine();
        }
        let mut est = estimate_on_mesh(&mesh, domain, delta, opts)?;
        est.r = setup.r;
        out.push(est);
    }
    Ok(out)
}

/// Bisection protocol for the critical apex angle of wedge complements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CriticalAngleProtocol {
    pub lower: f64,
    pub upper: f64,
    /// Bisection stops once the bracket is narrower than this.
    pub tol_angle: f64,
    /// An angle is anomalous when the certified apex constant exceeds `2 + margin`.
    pub margin: f64,
    /// Sector radius (the result does not depend on it).
    pub radius: f64,
    /// Apex-mesh levels; the finest one classifies.
    pub levels: usize,
    pub solve: SolveOptions,
}

impl Default for CriticalAngleProtocol {
    fn default() -> Self {
        CriticalAngleProtocol {
            lower: FRAC_PI_8,
            upper: FRAC_PI_2,
            tol_angle: 0.01,
            margin: 0.02,
            radius: 1.0,
            levels: 2,
            solve: SolveOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleProbe {
    pub alpha: f64,
    /// Apex constants by level.
    pub constants: Vec<f64>,
    pub anomalous: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalAngleReport {
    pub angle: f64,
    pub bracket: (f64, f64),
    pub trace: Vec<AngleProbe>,
}

/// Apex constant of the wedge complement with interior angle `alpha` (δ = 0).
pub fn probe_angle(alpha: f64, protocol: &CriticalAngleProtocol) -> Result<AngleProbe> {
    let domain = Domain::wedge_complement(alpha)?;
    let spec = ConeSpec::at_boundary_point(&domain, [0.0, 0.0], protocol.radius)?
        .ok_or_else(|| HardyError::Geometry("apex sector unavailable".into()))?;
    let mesh = build_cone_mesh(&spec, &protocol.solve.mesh)?;
    let sweep = sweep_mesh(mesh, &domain, 0.0, protocol.levels.max(1), &protocol.solve)?;
    let finest = sweep.finest();
    let anomalous = finest.certified_lower_bound && finest.constant > 2.0 + protocol.margin;
    Ok(AngleProbe { alpha, constants: sweep.constants(), anomalous })
}

/// Bisects `[lower, upper]` for the angle where the apex constant stops
/// exceeding `2 + margin`.
pub fn critical_angle(protocol: &CriticalAngleProtocol) -> Result<CriticalAngleReport> {
    if !(0.0 < protocol.lower && protocol.lower < protocol.upper && protocol.upper < std::f64::consts::PI) {
        return Err(HardyError::invalid("angle bracket must satisfy 0 < lower < upper < π"));
    }
    if !(protocol.tol_angle > 0.0) {
        return Err(HardyError::invalid("angle tolerance must be positive"));
    }
    let mut trace = Vec::new();
    let lo_probe = probe_angle(protocol.lower, protocol)?;
    let hi_probe = probe_angle(protocol.upper, protocol)?;
    let (lo_anom, hi_anom) = (lo_probe.anomalous, hi_probe.anomalous);
    trace.push(lo_probe);
    trace.push(hi_probe);
    if !lo_anom || hi_anom {
        return Err(HardyError::Protocol(format!(
            "expected anomalous at {} and standard at {}, got {} and {}",
            protocol.lower,
            protocol.upper,
            if lo_anom { "anomalous" } else { "standard" },
            if hi_anom { "anomalous" } else { "standard" },
        )));
    }
    let (mut lo, mut hi) = (protocol.lower, protocol.upper);
    while hi - lo > protocol.tol_angle {
        let mid = 0.5 * (lo + hi);
        let probe = probe_angle(mid, protocol)?;
        if probe.anomalous {
            lo = mid;
        } else {
            hi = mid;
        }
        trace.push(probe);
    }
    Ok(CriticalAngleReport { angle: 0.5 * (lo + hi), bracket: (lo, hi), trace })
}
