use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{HardyError, Result};
use crate::estimators::{CriticalAngleProtocol, SolveOptions, WitnessPatch};
use crate::geometry::{BoundingBox, ConvexityClass, Domain, Point, Shape};
use crate::mesh::MeshOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    BoundaryConstant,
    FullDomain,
    Local,
    WeakCurve,
    CriticalAngle,
    Witness,
    #[serde(rename = "verify-1d")]
    Verify1d,
    Semibounded,
    ReferenceReport,
}

impl ExperimentKind {
    pub fn key(self) -> &'static str {
        match self {
            ExperimentKind::BoundaryConstant => "boundary-constant",
            ExperimentKind::FullDomain => "full-domain",
            ExperimentKind::Local => "local",
            ExperimentKind::WeakCurve => "weak-curve",
            ExperimentKind::CriticalAngle => "critical-angle",
            ExperimentKind::Witness => "witness",
            ExperimentKind::Verify1d => "verify-1d",
            ExperimentKind::Semibounded => "semibounded",
            ExperimentKind::ReferenceReport => "reference-report",
        }
    }
}

/// Report destinations; relative paths resolve against the config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputPaths {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
    /// Directory receiving one SVG per sweep.
    pub svg_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplineSampling {
    /// Total number of splines, cycled over the `(δ, r)` grid.
    pub count: usize,
    pub knots: usize,
}

impl Default for SplineSampling {
    fn default() -> Self {
        SplineSampling { count: 200, knots: 6 }
    }
}

/// One experiment, as read from a JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// Catalogue key, see `hardy list-domains`.
    #[serde(default)]
    pub domain: Option<String>,
    #[serde(default)]
    pub deltas: Vec<f64>,
    /// Layer depths.
    #[serde(default)]
    pub r: Vec<f64>,
    #[serde(default)]
    pub h0: Option<f64>,
    #[serde(default = "default_levels")]
    pub levels: usize,
    /// `[xmin, xmax, ymin, ymax]`, required for unbounded domains.
    #[serde(default)]
    pub bbox: Option<[f64; 4]>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub quad_order: Option<usize>,
    #[serde(default)]
    pub mesh: Option<MeshOptions>,
    #[serde(default)]
    pub output: OutputPaths,
    /// Runs δ = 1 instead of rejecting it.
    #[serde(default)]
    pub allow_exceptional: bool,
    /// Fills the `wall_ms` column; off by default so reruns are byte-identical.
    #[serde(default)]
    pub record_wall_time: bool,

    #[serde(default)]
    pub c_values: Vec<f64>,
    #[serde(default)]
    pub betas: Vec<f64>,
    #[serde(default)]
    pub point: Option<Point>,
    #[serde(default)]
    pub radii: Vec<f64>,
    #[serde(default)]
    pub refinements: usize,
    #[serde(default)]
    pub patch: Option<WitnessPatch>,
    #[serde(default)]
    pub n_values: Vec<f64>,
    #[serde(default)]
    pub splines: Option<SplineSampling>,
    #[serde(default)]
    pub protocol: Option<CriticalAngleProtocol>,
    #[serde(default)]
    pub domain_class: Option<String>,
}

fn default_levels() -> usize {
    4
}

fn default_tol() -> f64 {
    1e-10
}

fn default_seed() -> u64 {
    1
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| HardyError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HardyError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::from_json(&text)
    }

    pub fn domain(&self) -> Result<Domain> {
        let key = self.domain.as_deref().ok_or_else(|| HardyError::Config("missing 'domain'".into()))?;
        Domain::from_key(key)
    }

    pub fn bounding_box(&self) -> Result<Option<BoundingBox>> {
        self.bbox.map(|[x0, x1, y0, y1]| BoundingBox::new(x0, x1, y0, y1)).transpose()
    }

    pub fn solve_options(&self, dim: usize) -> SolveOptions {
        let mut opts = SolveOptions { tol: self.tol, seed: self.seed, ..SolveOptions::for_dim(dim) };
        if let Some(mesh) = self.mesh {
            opts.mesh = mesh;
        }
        if let Some(q) = self.quad_order {
            opts.quad_order = q;
        }
        opts
    }

    /// Checks every precondition of the targeted operation without running it.
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(HardyError::Config(format!("tol must lie in (0, 1), got {}", self.tol)));
        }
        if let Some(mesh) = &self.mesh {
            mesh.validate()?;
        }
        if self.quad_order == Some(0) {
            return Err(HardyError::Config("quad_order must be positive".into()));
        }
        self.bounding_box()?;
        for &d in &self.deltas {
            if !(d >= 0.0 && d.is_finite()) {
                return Err(HardyError::Config(format!("delta must be finite and nonnegative, got {d}")));
            }
        }
        match self.experiment {
            ExperimentKind::BoundaryConstant => {
                let domain = self.layer_domain()?;
                self.need_deltas(true)?;
                self.need_positive("r", &self.r)?;
                let h0 = self.need_h0()?;
                if self.levels < 3 {
                    return Err(HardyError::Config("boundary-constant sweeps need levels >= 3".into()));
                }
                self.check_layer_resolution(&domain, h0)
            }
            ExperimentKind::FullDomain => {
                let domain = self.domain()?;
                if !domain.is_bounded() {
                    return Err(HardyError::Config("full-domain runs need a bounded domain".into()));
                }
                self.need_deltas(true)?;
                self.need_h0()?;
                if self.levels == 0 {
                    return Err(HardyError::Config("levels must be positive".into()));
                }
                Ok(())
            }
            ExperimentKind::Local => {
                let domain = self.layer_domain()?;
                if domain.dim != 2 {
                    return Err(HardyError::Config("local constants need a planar domain".into()));
                }
                self.need_deltas(true)?;
                self.need_positive("r", &self.r)?;
                self.need_h0()?;
                let point = self.point.ok_or_else(|| HardyError::Config("local runs need 'point'".into()))?;
                let d = domain.signed_distance(point)?;
                if d.abs() > 1e-12 {
                    return Err(HardyError::Config(format!("point lies at distance {d} from the boundary")));
                }
                self.need_positive("radii", &self.radii)?;
                if self.radii.windows(2).any(|w| w[1] >= w[0]) {
                    return Err(HardyError::Config("radii must decrease strictly".into()));
                }
                Ok(())
            }
            ExperimentKind::WeakCurve => {
                let domain = self.domain()?;
                if !domain.is_bounded() {
                    return Err(HardyError::Config("weak-curve runs need a bounded domain".into()));
                }
                self.need_deltas(true)?;
                self.need_h0()?;
                if self.c_values.is_empty()
                    || self.c_values[0] < 0.0
                    || self.c_values.windows(2).any(|w| w[1] <= w[0])
                    || self.c_values.iter().any(|c| !c.is_finite())
                {
                    return Err(HardyError::Config("c_values must be nonnegative and strictly increasing".into()));
                }
                Ok(())
            }
            ExperimentKind::CriticalAngle => {
                if self.deltas.iter().any(|&d| d != 0.0) {
                    return Err(HardyError::Config("the critical-angle protocol is fixed at delta = 0".into()));
                }
                let p = self.protocol.unwrap_or_default();
                if !(0.0 < p.lower && p.lower < p.upper && p.upper < std::f64::consts::PI) {
                    return Err(HardyError::Config("protocol bracket must satisfy 0 < lower < upper < pi".into()));
                }
                if !(p.tol_angle > 0.0 && p.margin >= 0.0 && p.radius > 0.0 && p.levels >= 1) {
                    return Err(HardyError::Config("protocol tolerances, radius and levels must be positive".into()));
                }
                p.solve.mesh.validate()
            }
            ExperimentKind::Witness => {
                let domain = self.domain()?;
                if (domain.dim as f64 - domain.hausdorff_dim - 1.0).abs() > 1e-12 {
                    return Err(HardyError::Config("witness ratios need a boundary of codimension one".into()));
                }
                self.need_deltas(false)?;
                for &d in &self.deltas {
                    if (domain.dim as f64 - domain.hausdorff_dim) + d - 2.0 == 0.0 {
                        return Err(HardyError::ExceptionalValue(format!("delta = {d} makes the witness exponent vanish")));
                    }
                }
                self.need_positive("r", &self.r)?;
                if self.patch.is_none() {
                    return Err(HardyError::Config("witness runs need 'patch'".into()));
                }
                if self.n_values.is_empty() || self.n_values.iter().any(|&n| !(n >= 2.0 && n.is_finite())) {
                    return Err(HardyError::Config("n_values must be finite and >= 2".into()));
                }
                Ok(())
            }
            ExperimentKind::Verify1d => {
                self.need_deltas(false)?;
                self.need_positive("r", &self.r)?;
                let s = self.splines.unwrap_or_default();
                if s.count == 0 || s.knots < 2 {
                    return Err(HardyError::Config("splines need count >= 1 and knots >= 2".into()));
                }
                Ok(())
            }
            ExperimentKind::Semibounded => {
                let domain = self.domain()?;
                if !matches!(domain.shape, Shape::Interval { .. }) {
                    return Err(HardyError::Config("semibounded scans run on intervals".into()));
                }
                self.need_deltas(false)?;
                if let Some(d) = self.deltas.iter().find(|d| !(0.0..2.0).contains(*d)) {
                    return Err(HardyError::Config(format!("semibounded scans need 0 <= delta < 2, got {d}")));
                }
                self.need_h0()?;
                if self.levels < 2 {
                    return Err(HardyError::Config("semibounded scans need levels >= 2".into()));
                }
                if self.betas.is_empty() || self.betas.iter().any(|b| !b.is_finite()) {
                    return Err(HardyError::Config("betas must be a nonempty list of finite values".into()));
                }
                Ok(())
            }
            ExperimentKind::ReferenceReport => {
                self.need_deltas(false)?;
                self.convexity_class()?;
                Ok(())
            }
        }
    }

    pub fn convexity_class(&self) -> Result<ConvexityClass> {
        ConvexityClass::parse(self.domain_class.as_deref().unwrap_or("convex"))
    }

    fn layer_domain(&self) -> Result<Domain> {
        let domain = self.domain()?;
        if matches!(domain.shape, Shape::KochSnowflake) {
            return Err(HardyError::Config("the Koch snowflake has closed-form values only".into()));
        }
        if !domain.is_bounded() && self.bbox.is_none() {
            return Err(HardyError::Config(format!("domain '{}' is unbounded and needs 'bbox'", domain.key)));
        }
        Ok(domain)
    }

    fn need_deltas(&self, reject_exceptional: bool) -> Result<()> {
        if self.deltas.is_empty() {
            return Err(HardyError::Config("'deltas' must not be empty".into()));
        }
        if reject_exceptional && !self.allow_exceptional && self.deltas.contains(&1.0) {
            return Err(HardyError::ExceptionalValue(
                "delta = 1 admits no boundary Hardy inequality; set allow_exceptional to run it anyway".into(),
            ));
        }
        Ok(())
    }

    fn need_positive(&self, name: &str, values: &[f64]) -> Result<()> {
        if values.is_empty() || values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(HardyError::Config(format!("'{name}' must be a nonempty list of positive values")));
        }
        Ok(())
    }

    fn need_h0(&self) -> Result<f64> {
        match self.h0 {
            Some(h) if h > 0.0 && h.is_finite() => Ok(h),
            Some(h) => Err(HardyError::Config(format!("h0 must be positive, got {h}"))),
            None => Err(HardyError::Config("missing 'h0'".into())),
        }
    }

    fn check_layer_resolution(&self, domain: &Domain, h0: f64) -> Result<()> {
        for &r in &self.r {
            if h0 > r {
                return Err(HardyError::Config(format!("h0 = {h0} exceeds the layer depth r = {r}")));
            }
            if let Ok(limit) = domain.inradius() {
                if r > limit {
                    return Err(HardyError::LayerOverlap { r, limit });
                }
            }
        }
        Ok(())
    }

    /// Resolves an output path against the directory holding the config.
    pub fn resolve(base: &Path, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        }
    }
}
