use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::config::ExperimentConfig;
use super::runner::{ReportRow, RunRecord, Series};
use crate::error::{HardyError, Result};

pub const CSV_HEADER: [&str; 13] = [
    "experiment",
    "domain",
    "delta",
    "r",
    "h",
    "level",
    "lambda_min",
    "constant",
    "reference",
    "ref_citation",
    "residual",
    "certified",
    "wall_ms",
];

/// 17 significant digits, so every value round-trips.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_float(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_else(|| "none".into())
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> HardyError {
    HardyError::Io { path: path.display().to_string(), message: e.to_string() }
}

pub fn csv_string(rows: &[ReportRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| HardyError::Io { path: "<csv>".into(), message: e.to_string() };
    w.write_record(CSV_HEADER).map_err(err)?;
    for row in rows {
        w.write_record([
            row.experiment.clone(),
            row.domain.clone(),
            format_float(row.delta),
            opt_float(row.r),
            opt_float(row.h),
            row.level.clone(),
            opt_float(row.lambda_min),
            opt_float(row.constant),
            opt_float(row.reference),
            row.ref_citation.clone().unwrap_or_else(|| "none".into()),
            opt_float(row.residual),
            row.certified.to_string(),
            row.wall_ms.to_string(),
        ])
        .map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| HardyError::Io { path: "<csv>".into(), message: e.to_string() })?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Serialize)]
struct JsonReport<'a> {
    experiment: &'static str,
    config: &'a ExperimentConfig,
    failures: usize,
    runs: &'a [RunRecord],
}

pub fn json_string(cfg: &ExperimentConfig, runs: &[RunRecord]) -> Result<String> {
    let report = JsonReport {
        experiment: cfg.experiment.key(),
        config: cfg,
        failures: runs.iter().filter(|r| r.error.is_some()).count(),
        runs,
    };
    serde_json::to_string_pretty(&report).map_err(|e| HardyError::Io { path: "<json>".into(), message: e.to_string() })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| io_error(path, e))
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN: f64 = 70.0;
const TICKS: usize = 5;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Line plot of the series with a dashed horizontal reference line.
pub fn svg_string(series: &Series) -> String {
    let xs: Vec<f64> = series.points.iter().map(|p| p.0).collect();
    let mut ys: Vec<f64> = series.points.iter().map(|p| p.1).collect();
    ys.extend(series.reference);
    let span = |v: &[f64]| {
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !lo.is_finite() {
            (0.0, 1.0)
        } else if hi - lo < 1e-12 * lo.abs().max(1.0) {
            (lo - 0.5 * lo.abs().max(1.0) * 0.01, hi + 0.5 * hi.abs().max(1.0) * 0.01)
        } else {
            let pad = 0.05 * (hi - lo);
            (lo - pad, hi + pad)
        }
    };
    let (x0, x1) = span(&xs);
    let (y0, y1) = span(&ys);
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 800 600" width="800" height="600">"#);
    let _ = writeln!(s, r#"<rect width="800" height="600" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="400" y="30" text-anchor="middle" font-size="16">{}</text>"#, escape(&series.title));
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(s, r#"<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="black"/>"#);
    let _ = writeln!(s, r#"<line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}" stroke="black"/>"#);
    for k in 0..=TICKS {
        let f = k as f64 / TICKS as f64;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let (tx, ty) = (px(xv), py(yv));
        let _ = writeln!(s, r#"<line x1="{tx:.2}" y1="{bottom}" x2="{tx:.2}" y2="{:.2}" stroke="black"/>"#, bottom + 5.0);
        let _ = writeln!(s, r#"<text x="{tx:.2}" y="{:.2}" text-anchor="middle" font-size="12">{xv:.2}</text>"#, bottom + 20.0);
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{ty:.2}" x2="{left}" y2="{ty:.2}" stroke="black"/>"#, left - 5.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="12">{yv:.4}</text>"#, left - 8.0, ty + 4.0);
    }
    let _ = writeln!(s, r#"<text x="400" y="{:.2}" text-anchor="middle" font-size="13">{}</text>"#, HEIGHT - 20.0, escape(&series.x_label));
    let _ = writeln!(s, r#"<text x="18" y="300" text-anchor="middle" font-size="13" transform="rotate(-90 18 300)">constant</text>"#);
    if let Some(r) = series.reference {
        let y = py(r);
        let _ = writeln!(s, r#"<line x1="{left}" y1="{y:.2}" x2="{right}" y2="{y:.2}" stroke="gray" stroke-dasharray="6 4"/>"#);
    }
    let pts: Vec<String> = series.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
    let _ = writeln!(s, r#"<polyline fill="none" stroke="steelblue" stroke-width="2" points="{}"/>"#, pts.join(" "));
    for &(x, y) in &series.points {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="steelblue"/>"#, px(x), py(y));
    }
    s.push_str("</svg>\n");
    s
}
