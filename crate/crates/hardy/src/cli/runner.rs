use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use super::config::{ExperimentConfig, ExperimentKind};
use crate::error::{HardyError, Result};
use crate::estimators::{
    critical_angle, full_domain_sweep, local_constant, refine_sweep, semibounded_scan, verify_1d_inequality,
    weak_constant_curve, witness_ratio, HardyEstimate, LocalSetup, Sweep, Verdict,
};
use crate::geometry::{interior_angles, BoundingBox, ConvexityClass, Domain, Shape};
use crate::reference::{
    ahlfors_lower_bound, koch_comparison, simplex_comparison, smooth_constant, threshold_report, tidblom_angles,
    AHLFORS_CITATION, SMOOTH_CITATION,
};
use crate::spline::CubicSpline;

/// Slack allowed when checking that `b(c)` does not increase.
const WEAK_CURVE_SLACK: f64 = 1e-10;
/// Relative slack below which a 1D inequality check counts as violated.
const INEQUALITY_SLACK: f64 = 1e-9;

/// One CSV/JSON line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    /// Experiment key, optionally followed by `:name=value` for the swept parameter.
    pub experiment: String,
    pub domain: String,
    pub delta: f64,
    pub r: Option<f64>,
    pub h: Option<f64>,
    /// Refinement level, or `"extrapolated"`.
    pub level: String,
    pub lambda_min: Option<f64>,
    pub constant: Option<f64>,
    pub reference: Option<f64>,
    pub ref_citation: Option<String>,
    pub residual: Option<f64>,
    pub certified: bool,
    pub wall_ms: u64,
    pub unknowns: Option<usize>,
    pub iterations: Option<usize>,
}

/// Values plotted against their index in one SVG.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub title: String,
    pub x_label: String,
    pub points: Vec<(f64, f64)>,
    pub reference: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub label: String,
    pub rows: Vec<ReportRow>,
    #[serde(skip)]
    pub series: Option<Series>,
    pub details: serde_json::Value,
    /// Set when the run failed or tripped an invariant.
    pub error: Option<String>,
}

/// Independent unit of work; reports keep the order units are listed in.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Unit {
    Boundary { delta: f64, r: f64 },
    Full { delta: f64 },
    Local { delta: f64, r: f64 },
    Weak { delta: f64 },
    CriticalAngle,
    Witness { delta: f64, r: f64 },
    Verify1d,
    Semibounded { delta: f64 },
    Reference,
}

fn units(cfg: &ExperimentConfig) -> Vec<Unit> {
    let grid = |f: fn(f64, f64) -> Unit| -> Vec<Unit> {
        cfg.deltas.iter().flat_map(|&d| cfg.r.iter().map(move |&r| f(d, r))).collect()
    };
    match cfg.experiment {
        ExperimentKind::BoundaryConstant => grid(|delta, r| Unit::Boundary { delta, r }),
        ExperimentKind::Local => grid(|delta, r| Unit::Local { delta, r }),
        ExperimentKind::Witness => grid(|delta, r| Unit::Witness { delta, r }),
        ExperimentKind::FullDomain => cfg.deltas.iter().map(|&delta| Unit::Full { delta }).collect(),
        ExperimentKind::WeakCurve => cfg.deltas.iter().map(|&delta| Unit::Weak { delta }).collect(),
        ExperimentKind::Semibounded => cfg.deltas.iter().map(|&delta| Unit::Semibounded { delta }).collect(),
        ExperimentKind::CriticalAngle => vec![Unit::CriticalAngle],
        ExperimentKind::Verify1d => vec![Unit::Verify1d],
        ExperimentKind::ReferenceReport => vec![Unit::Reference],
    }
}

/// Worker count from `HARDY_THREADS` (default 1).
pub fn thread_count() -> usize {
    std::env::var("HARDY_THREADS").ok().and_then(|v| v.trim().parse().ok()).filter(|&n| n > 0).unwrap_or(1)
}

/// Executes every unit of a validated config, `threads` at a time.
pub fn execute(cfg: &ExperimentConfig, threads: usize) -> Vec<RunRecord> {
    let units = units(cfg);
    let slots: Mutex<Vec<Option<RunRecord>>> = Mutex::new(vec![None; units.len()]);
    let next = AtomicUsize::new(0);
    let work = || loop {
        let i = next.fetch_add(1, Ordering::Relaxed);
        if i >= units.len() {
            break;
        }
        let record = run_unit(cfg, units[i]);
        slots.lock().expect("no worker panics while holding the lock")[i] = Some(record);
    };
    if threads <= 1 || units.len() <= 1 {
        work();
    } else {
        std::thread::scope(|s| {
            for _ in 0..threads.min(units.len()) {
                s.spawn(work);
            }
        });
    }
    slots.into_inner().expect("workers joined").into_iter().map(|r| r.expect("every unit ran")).collect()
}

fn run_unit(cfg: &ExperimentConfig, unit: Unit) -> RunRecord {
    let start = Instant::now();
    let label = unit_label(cfg, unit);
    let result = match unit {
        Unit::Boundary { delta, r } => boundary_unit(cfg, delta, r),
        Unit::Full { delta } => full_unit(cfg, delta),
        Unit::Local { delta, r } => local_unit(cfg, delta, r),
        Unit::Weak { delta } => weak_unit(cfg, delta),
        Unit::CriticalAngle => critical_unit(cfg),
        Unit::Witness { delta, r } => witness_unit(cfg, delta, r),
        Unit::Verify1d => verify_unit(cfg),
        Unit::Semibounded { delta } => semibounded_unit(cfg, delta),
        Unit::Reference => reference_unit(cfg),
    };
    let wall_ms = if cfg.record_wall_time { start.elapsed().as_millis() as u64 } else { 0 };
    match result {
        Ok(mut record) => {
            record.label = label;
            for row in &mut record.rows {
                row.wall_ms = wall_ms;
            }
            record
        }
        Err(e) => RunRecord {
            rows: vec![error_row(cfg, unit, wall_ms)],
            label,
            series: None,
            details: serde_json::Value::Null,
            error: Some(e.to_string()),
        },
    }
}

fn unit_label(cfg: &ExperimentConfig, unit: Unit) -> String {
    let kind = cfg.experiment.key();
    match unit {
        Unit::Boundary { delta, r } | Unit::Local { delta, r } | Unit::Witness { delta, r } => {
            format!("{kind}:delta={delta}:r={r}")
        }
        Unit::Full { delta } | Unit::Weak { delta } | Unit::Semibounded { delta } => format!("{kind}:delta={delta}"),
        Unit::CriticalAngle | Unit::Verify1d | Unit::Reference => kind.to_string(),
    }
}

fn domain_key(cfg: &ExperimentConfig) -> String {
    cfg.domain.clone().unwrap_or_else(|| "none".into())
}

fn error_row(cfg: &ExperimentConfig, unit: Unit, wall_ms: u64) -> ReportRow {
    let (delta, r) = match unit {
        Unit::Boundary { delta, r } | Unit::Local { delta, r } | Unit::Witness { delta, r } => (delta, Some(r)),
        Unit::Full { delta } | Unit::Weak { delta } | Unit::Semibounded { delta } => (delta, None),
        _ => (cfg.deltas.first().copied().unwrap_or(0.0), None),
    };
    ReportRow {
        experiment: format!("{}:error", cfg.experiment.key()),
        domain: domain_key(cfg),
        delta,
        r,
        h: None,
        level: "none".into(),
        lambda_min: None,
        constant: None,
        reference: None,
        ref_citation: None,
        residual: None,
        certified: false,
        wall_ms,
        unknowns: None,
        iterations: None,
    }
}

/// Closed-form boundary constant of the domain, when the catalogue knows it.
pub fn reference_value(domain: &Domain, delta: f64) -> Option<(f64, &'static str)> {
    let value = smooth_constant(delta).ok()?;
    let standard = match (&domain.shape, domain.convexity_class) {
        (_, ConvexityClass::C11 | ConvexityClass::Convex) => true,
        (_, ConvexityClass::Other) => false,
        // Convex complements keep the smooth value for δ > 1 and, at δ ≤ 1,
        // only while every corner is at least the critical angle.
        (_, ConvexityClass::ConvexComplement) if delta > 1.0 => true,
        (Shape::PolygonComplement { vertices }, _) => {
            let alpha_c = tidblom_angles().alpha_c;
            interior_angles(vertices).map(|a| a.iter().all(|&x| x >= alpha_c)).unwrap_or(false)
        }
        (Shape::WedgeComplement { alpha }, _) => *alpha >= tidblom_angles().alpha_c,
        (Shape::HalfPlane, _) => true,
        _ => false,
    };
    standard.then_some((value, SMOOTH_CITATION))
}

fn estimate_row(cfg: &ExperimentConfig, label: &str, est: &HardyEstimate, reference: Option<(f64, &str)>) -> ReportRow {
    ReportRow {
        experiment: label.to_string(),
        domain: domain_key(cfg),
        delta: est.delta,
        r: Some(est.r),
        h: Some(est.h),
        level: est.level.to_string(),
        lambda_min: Some(est.lambda_min),
        constant: Some(est.constant),
        reference: reference.map(|r| r.0),
        ref_citation: reference.map(|r| r.1.to_string()),
        residual: Some(est.residual),
        certified: est.certified_lower_bound,
        wall_ms: 0,
        unknowns: Some(est.unknowns),
        iterations: Some(est.iterations),
    }
}

/// Row for a derived constant `a`, with `λ = a^{-2}` so the pair stays consistent.
fn value_row(cfg: &ExperimentConfig, label: String, delta: f64, level: String, value: f64) -> ReportRow {
    let lambda = value.powi(-2);
    ReportRow {
        experiment: label,
        domain: domain_key(cfg),
        delta,
        r: None,
        h: None,
        level,
        lambda_min: Some(lambda),
        constant: Some(lambda.powf(-0.5)),
        reference: None,
        ref_citation: None,
        residual: None,
        certified: false,
        wall_ms: 0,
        unknowns: None,
        iterations: None,
    }
}

fn sweep_record(cfg: &ExperimentConfig, domain: &Domain, delta: f64, sweep: Sweep, title: String) -> RunRecord {
    let kind = cfg.experiment.key();
    let reference = reference_value(domain, delta);
    let mut rows: Vec<ReportRow> = sweep.estimates.iter().map(|e| estimate_row(cfg, kind, e, reference)).collect();
    if let Some(x) = sweep.extrapolation {
        let mut row = value_row(cfg, kind.to_string(), delta, "extrapolated".into(), x.value);
        row.r = Some(sweep.finest().r);
        row.reference = reference.map(|r| r.0);
        row.ref_citation = reference.map(|r| r.1.to_string());
        rows.push(row);
    }
    let series = Series {
        title,
        x_label: "level".into(),
        points: sweep.estimates.iter().map(|e| (e.level as f64, e.constant)).collect(),
        reference: reference.map(|r| r.0),
    };
    let error = (!sweep.monotone).then(|| "refinement lowered the estimate".to_string());
    RunRecord {
        label: String::new(),
        rows,
        series: Some(series),
        details: json!({ "extrapolation": sweep.extrapolation, "monotone": sweep.monotone }),
        error,
    }
}

fn bbox(cfg: &ExperimentConfig) -> Result<Option<BoundingBox>> {
    cfg.bounding_box()
}

fn h0(cfg: &ExperimentConfig) -> Result<f64> {
    cfg.h0.ok_or_else(|| HardyError::Config("missing 'h0'".into()))
}

fn boundary_unit(cfg: &ExperimentConfig, delta: f64, r: f64) -> Result<RunRecord> {
    let domain = cfg.domain()?;
    let opts = cfg.solve_options(domain.dim);
    let sweep = refine_sweep(&domain, delta, r, h0(cfg)?, cfg.levels, bbox(cfg)?.as_ref(), &opts)?;
    Ok(sweep_record(cfg, &domain, delta, sweep, format!("{} delta={delta} r={r}", domain.key)))
}

fn full_unit(cfg: &ExperimentConfig, delta: f64) -> Result<RunRecord> {
    let domain = cfg.domain()?;
    let opts = cfg.solve_options(domain.dim);
    let sweep = full_domain_sweep(&domain, delta, h0(cfg)?, cfg.levels, &opts)?;
    let mut record = sweep_record(cfg, &domain, delta, sweep, format!("{} (whole domain) delta={delta}", domain.key));
    // Whole bounded domains only keep the boundary constant for δ < 1.
    if delta > 1.0 {
        for row in &mut record.rows {
            row.reference = None;
            row.ref_citation = None;
        }
        if let Some(s) = record.series.as_mut() {
            s.reference = None;
        }
    }
    Ok(record)
}

fn local_unit(cfg: &ExperimentConfig, delta: f64, r: f64) -> Result<RunRecord> {
    let domain = cfg.domain()?;
    let opts = cfg.solve_options(domain.dim);
    let point = cfg.point.ok_or_else(|| HardyError::Config("missing 'point'".into()))?;
    let setup = LocalSetup { r, h: h0(cfg)?, refinements: cfg.refinements };
    let estimates = local_constant(&domain, point, delta, &cfg.radii, &setup, bbox(cfg)?.as_ref(), &opts)?;
    let reference = match domain.convexity_class {
        ConvexityClass::C11 | ConvexityClass::Convex => reference_value(&domain, delta),
        _ => None,
    };
    let rows = estimates
        .iter()
        .zip(&cfg.radii)
        .map(|(e, s)| estimate_row(cfg, &format!("local:s={s}"), e, reference))
        .collect();
    let nested = estimates.windows(2).all(|w| w[1].constant <= w[0].constant * (1.0 + 1e-9));
    Ok(RunRecord {
        label: String::new(),
        rows,
        series: Some(Series {
            title: format!("{} local constant at ({}, {}) delta={delta}", domain.key, point[0], point[1]),
            x_label: "radius index".into(),
            points: estimates.iter().enumerate().map(|(i, e)| (i as f64, e.constant)).collect(),
            reference: reference.map(|r| r.0),
        }),
        details: json!({ "point": point, "radii": cfg.radii, "nonincreasing_in_radius": nested }),
        error: None,
    })
}

fn weak_unit(cfg: &ExperimentConfig, delta: f64) -> Result<RunRecord> {
    let domain = cfg.domain()?;
    let opts = cfg.solve_options(domain.dim);
    let points = weak_constant_curve(&domain, delta, &cfg.c_values, h0(cfg)?, cfg.refinements, &opts)?;
    let reference = reference_value(&domain, delta);
    let rows = points
        .iter()
        .map(|p| ReportRow {
            experiment: format!("weak-curve:c={}", p.c),
            domain: domain_key(cfg),
            delta,
            r: None,
            h: Some(h0(cfg).unwrap_or(0.0) / f64::from(1u32 << cfg.refinements.min(31))),
            level: cfg.refinements.to_string(),
            lambda_min: Some(p.lambda_min),
            constant: p.b_of_c.is_finite().then_some(p.b_of_c),
            reference: reference.map(|r| r.0),
            ref_citation: reference.map(|r| r.1.to_string()),
            residual: Some(p.residual),
            certified: p.b_of_c.is_finite(),
            wall_ms: 0,
            unknowns: None,
            iterations: None,
        })
        .collect();
    let monotone = points.windows(2).all(|w| w[1].b_of_c <= w[0].b_of_c + WEAK_CURVE_SLACK * w[0].b_of_c.abs());
    Ok(RunRecord {
        label: String::new(),
        rows,
        series: Some(Series {
            title: format!("{} weak constant b(c) delta={delta}", domain.key),
            x_label: "c index".into(),
            points: points.iter().enumerate().filter(|(_, p)| p.b_of_c.is_finite()).map(|(i, p)| (i as f64, p.b_of_c)).collect(),
            reference: reference.map(|r| r.0),
        }),
        details: json!({ "curve": points, "nonincreasing": monotone }),
        error: (!monotone).then(|| "b(c) increased with c".to_string()),
    })
}

fn critical_unit(cfg: &ExperimentConfig) -> Result<RunRecord> {
    let mut protocol = cfg.protocol.unwrap_or_default();
    protocol.solve.tol = cfg.tol;
    protocol.solve.seed = cfg.seed;
    let report = critical_angle(&protocol)?;
    let alpha_c = tidblom_angles().alpha_c;
    let rows = report
        .trace
        .iter()
        .map(|p| {
            let finest = *p.constants.last().expect("probes solve at least one level");
            let mut row = value_row(
                cfg,
                format!("critical-angle:alpha={}", p.alpha),
                0.0,
                (p.constants.len() - 1).to_string(),
                finest,
            );
            row.domain = format!("wedge-complement(alpha={})", p.alpha);
            row.r = Some(protocol.radius);
            row.reference = Some(2.0);
            row.ref_citation = Some(SMOOTH_CITATION.into());
            row.certified = true;
            row
        })
        .collect();
    Ok(RunRecord {
        label: String::new(),
        rows,
        series: None,
        details: json!({
            "angle": report.angle,
            "bracket": report.bracket,
            "closed_form_alpha_c": alpha_c,
            "deviation": (report.angle - alpha_c).abs(),
            "trace": report.trace,
            "protocol": protocol,
        }),
        error: None,
    })
}

fn witness_unit(cfg: &ExperimentConfig, delta: f64, r: f64) -> Result<RunRecord> {
    let domain = cfg.domain()?;
    let patch = cfg.patch.ok_or_else(|| HardyError::Config("missing 'patch'".into()))?;
    let bound = ahlfors_lower_bound(domain.dim, domain.hausdorff_dim, delta)?;
    let ratios = cfg.n_values.iter().map(|&n| witness_ratio(&domain, patch, delta, r, n)).collect::<Result<Vec<f64>>>()?;
    let rows = cfg
        .n_values
        .iter()
        .zip(&ratios)
        .map(|(&n, &q)| {
            let mut row = value_row(cfg, format!("witness:n={n}"), delta, "none".into(), q);
            row.r = Some(r);
            row.reference = Some(bound);
            row.ref_citation = Some(AHLFORS_CITATION.into());
            row
        })
        .collect();
    let increasing = ratios.windows(2).all(|w| w[1] > w[0]);
    Ok(RunRecord {
        label: String::new(),
        rows,
        series: Some(Series {
            title: format!("{} witness ratio delta={delta} r={r}", domain.key),
            x_label: "n index".into(),
            points: ratios.iter().enumerate().map(|(i, &q)| (i as f64, q)).collect(),
            reference: Some(bound),
        }),
        details: json!({ "n_values": cfg.n_values, "ratios": ratios, "increasing": increasing, "bound": bound }),
        error: None,
    })
}

fn verify_unit(cfg: &ExperimentConfig) -> Result<RunRecord> {
    let sampling = cfg.splines.unwrap_or_default();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let cases: Vec<(f64, f64)> = cfg.deltas.iter().flat_map(|&d| cfg.r.iter().map(move |&r| (d, r))).collect();
    let mut rows = Vec::with_capacity(sampling.count);
    let mut checks = Vec::with_capacity(sampling.count);
    let mut violations = 0usize;
    for i in 0..sampling.count {
        let (delta, r) = cases[i % cases.len()];
        let f = CubicSpline::random_vanishing(&mut rng, r, sampling.knots)?;
        let check = verify_1d_inequality(&f, delta, r)?;
        let held = check.slack >= -INEQUALITY_SLACK * check.scale;
        violations += usize::from(!held);
        // Rayleigh quotient of the sample against the singular mass.
        let quotient = (check.mass > 0.0 && check.lhs > 0.0).then(|| check.lhs / check.mass);
        rows.push(ReportRow {
            experiment: format!("verify-1d:sample={i}"),
            domain: "interval".into(),
            delta,
            r: Some(r),
            h: None,
            level: "none".into(),
            lambda_min: quotient,
            constant: quotient.map(|q| q.powf(-0.5)),
            reference: smooth_constant(delta).ok(),
            ref_citation: smooth_constant(delta).ok().map(|_| SMOOTH_CITATION.to_string()),
            residual: None,
            certified: held,
            wall_ms: 0,
            unknowns: None,
            iterations: None,
        });
        checks.push(json!({ "delta": delta, "r": r, "check": check, "knots": f.knots() }));
    }
    Ok(RunRecord {
        label: String::new(),
        rows,
        series: None,
        details: json!({ "checks": checks, "violations": violations }),
        error: (violations > 0).then(|| format!("{violations} samples violated the inequality")),
    })
}

fn semibounded_unit(cfg: &ExperimentConfig, delta: f64) -> Result<RunRecord> {
    let domain = cfg.domain()?;
    let opts = cfg.solve_options(domain.dim);
    let verdicts = semibounded_scan(&domain, delta, &cfg.betas, h0(cfg)?, cfg.levels, &opts)?;
    let h = h0(cfg)?;
    let mut rows = Vec::new();
    for v in &verdicts {
        for (level, &lambda) in v.lambdas.iter().enumerate() {
            rows.push(ReportRow {
                experiment: format!("semibounded:beta={}", v.beta),
                domain: domain_key(cfg),
                delta,
                r: None,
                h: Some(h / f64::from(1u32 << level.min(31))),
                level: level.to_string(),
                lambda_min: Some(lambda),
                constant: (lambda > 0.0).then(|| lambda.powf(-0.5)),
                reference: None,
                ref_citation: None,
                residual: None,
                certified: v.verdict == Verdict::Semibounded,
                wall_ms: 0,
                unknowns: None,
                iterations: None,
            });
        }
    }
    let threshold = threshold_report(ConvexityClass::Convex, delta).ok().and_then(|t| t.semibounded_beta);
    Ok(RunRecord {
        label: String::new(),
        rows,
        series: None,
        details: json!({ "verdicts": verdicts, "beta_star": threshold }),
        error: None,
    })
}

fn reference_unit(cfg: &ExperimentConfig) -> Result<RunRecord> {
    let class = cfg.convexity_class()?;
    let mut rows = Vec::new();
    let mut thresholds = Vec::new();
    for &delta in &cfg.deltas {
        if let Ok(a) = smooth_constant(delta) {
            let mut row = value_row(cfg, "reference:smooth".into(), delta, "none".into(), a);
            row.reference = Some(a);
            row.ref_citation = Some(SMOOTH_CITATION.into());
            rows.push(row);
        }
        thresholds.push(match threshold_report(class, delta) {
            Ok(t) => json!(t),
            Err(e) => json!({ "delta": delta, "error": e.to_string() }),
        });
    }
    let koch = koch_comparison()?;
    let mut row = value_row(cfg, "reference:koch-formula".into(), 0.0, "none".into(), koch.formula_value);
    row.ref_citation = Some(AHLFORS_CITATION.into());
    rows.push(row);
    rows.push(value_row(cfg, "reference:koch-stated".into(), 0.0, "none".into(), koch.stated_value));
    Ok(RunRecord {
        label: String::new(),
        rows,
        series: None,
        details: json!({
            "class": class,
            "thresholds": thresholds,
            "critical_angles": tidblom_angles(),
            "simplex": simplex_comparison(2..=10)?,
            "koch": koch,
        }),
        error: None,
    })
}
