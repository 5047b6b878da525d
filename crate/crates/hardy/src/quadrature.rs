//! Quadrature rules: Gauss–Legendre on [0, 1], triangle rules on the
//! reference triangle, and adaptive Gauss–Kronrod integration.

use crate::error::{HardyError, Result};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [0, 1].
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1, "Gauss rule needs at least one point");
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push(((1.0 - x) / 2.0, w / 2.0));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Point of a triangle rule: barycentric coordinates and weight (weights sum
/// to 1 over the triangle, so integrals are `area · Σ w f`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrianglePoint {
    pub bary: [f64; 3],
    pub weight: f64,
}

/// Six-point symmetric rule, exact for polynomials of degree 4.
pub fn dunavant6() -> Vec<TrianglePoint> {
    const A: f64 = 0.445_948_490_915_964_886;
    const B: f64 = 0.091_576_213_509_770_743;
    const WA: f64 = 0.223_381_589_678_011_466;
    const WB: f64 = 0.109_951_743_655_321_868;
    let mut pts = Vec::with_capacity(6);
    for (x, w) in [(A, WA), (B, WB)] {
        let y = 1.0 - 2.0 * x;
        for bary in [[y, x, x], [x, y, x], [x, x, y]] {
            pts.push(TrianglePoint { bary, weight: w });
        }
    }
    pts
}

/// Collapsed (Duffy) product rule with `n × n` Gauss points; the collapsed
/// edge sits at barycentric corner `corner`, so integrands with a point
/// singularity of order `ρ^{-1}` there are integrated smoothly.
pub fn collapsed(n: usize, corner: usize) -> Vec<TrianglePoint> {
    let g = gauss_legendre(n);
    let mut pts = Vec::with_capacity(n * n);
    for &(u, wu) in &g {
        for &(v, wv) in &g {
            let mut bary = [0.0; 3];
            bary[corner] = 1.0 - u;
            bary[(corner + 1) % 3] = u * (1.0 - v);
            bary[(corner + 2) % 3] = u * v;
            pts.push(TrianglePoint { bary, weight: 2.0 * u * wu * wv });
        }
    }
    pts
}

/// Triangle rule for quadrature order `order`: the six-point rule at order 4
/// and below, a collapsed product rule otherwise.
pub fn triangle_rule(order: usize) -> Vec<TrianglePoint> {
    if order <= 4 {
        dunavant6()
    } else {
        collapsed(order, 0)
    }
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_639,
    0.949_107_912_342_758_525,
    0.864_864_423_359_769_073,
    0.741_531_185_599_394_440,
    0.586_087_235_467_691_130,
    0.405_845_151_377_397_167,
    0.207_784_955_007_898_468,
    0.0,
];
const K15_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_553,
    0.104_790_010_322_250_184,
    0.140_653_259_715_525_919,
    0.169_004_726_639_267_903,
    0.190_350_578_064_785_410,
    0.204_432_940_075_298_892,
    0.209_482_141_084_727_828,
];
const G7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_693,
    0.279_705_391_489_276_668,
    0.381_830_050_505_118_945,
    0.417_959_183_673_469_388,
];

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = K15_WEIGHTS[7] * fc;
    let mut g = G7_WEIGHTS[3] * fc;
    for i in 0..7 {
        let x = h * GK_NODES[i];
        let s = f(c - x) + f(c + x);
        k += K15_WEIGHTS[i] * s;
        if i % 2 == 1 {
            g += G7_WEIGHTS[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive G7–K15 integration to `|err| ≤ max(abs_tol, rel_tol·|I|)`,
/// always bisecting the panel with the largest error estimate.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    const MAX_PANELS: usize = 4000;
    let (v, e) = gauss_kronrod(&f, a, b);
    let mut panels = vec![(a, b, v, e)];
    loop {
        let total: f64 = panels.iter().map(|p| p.2).sum();
        let err: f64 = panels.iter().map(|p| p.3).sum();
        if !total.is_finite() || !err.is_finite() {
            return Err(HardyError::Quadrature { a, b });
        }
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        if panels.len() >= MAX_PANELS {
            let worst = panels.iter().max_by(|x, y| x.3.total_cmp(&y.3)).expect("nonempty");
            return Err(HardyError::Quadrature { a: worst.0, b: worst.1 });
        }
        let k = (0..panels.len()).max_by(|&i, &j| panels[i].3.total_cmp(&panels[j].3)).expect("nonempty");
        let (lo, hi, _, _) = panels.swap_remove(k);
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            return Err(HardyError::Quadrature { a: lo, b: hi });
        }
        let (v1, e1) = gauss_kronrod(&f, lo, mid);
        let (v2, e2) = gauss_kronrod(&f, mid, hi);
        panels.push((lo, mid, v1, e1));
        panels.push((mid, hi, v2, e2));
    }
}
