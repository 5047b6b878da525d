//! Natural cubic splines.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{HardyError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubicSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    /// Second derivatives at the knots.
    moments: Vec<f64>,
}

impl CubicSpline {
    /// Natural spline (zero second derivative at both ends) through the data.
    pub fn natural(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let n = knots.len();
        if n < 2 || values.len() != n {
            return Err(HardyError::invalid("spline needs at least two knots and matching values"));
        }
        if knots.windows(2).any(|w| !(w[0] < w[1])) || values.iter().any(|v| !v.is_finite()) {
            return Err(HardyError::invalid("spline knots must increase strictly and values be finite"));
        }
        let mut moments = vec![0.0; n];
        if n > 2 {
            // Thomas algorithm for the interior moment equations.
            let m = n - 2;
            let mut diag = vec![0.0; m];
            let mut upper = vec![0.0; m];
            let mut rhs = vec![0.0; m];
            for i in 1..n - 1 {
                let h0 = knots[i] - knots[i - 1];
                let h1 = knots[i + 1] - knots[i];
                diag[i - 1] = 2.0 * (h0 + h1);
                upper[i - 1] = h1;
                rhs[i - 1] = 6.0 * ((values[i + 1] - values[i]) / h1 - (values[i] - values[i - 1]) / h0);
            }
            for i in 1..m {
                let lower = knots[i + 1] - knots[i];
                let f = lower / diag[i - 1];
                diag[i] -= f * upper[i - 1];
                rhs[i] -= f * rhs[i - 1];
            }
            moments[m] = rhs[m - 1] / diag[m - 1];
            for i in (0..m - 1).rev() {
                moments[i + 1] = (rhs[i] - upper[i] * moments[i + 2]) / diag[i];
            }
        }
        Ok(CubicSpline { knots, values, moments })
    }

    /// Random spline on `[0, r]` with `f(0) = 0`: jittered knots and values
    /// uniform in `[-1, 1]` at the other knots.
    pub fn random_vanishing<R: Rng>(rng: &mut R, r: f64, knots: usize) -> Result<Self> {
        if knots < 2 || !(r > 0.0 && r.is_finite()) {
            return Err(HardyError::invalid("random spline needs two knots and r > 0"));
        }
        let last = knots - 1;
        let ts: Vec<f64> = (0..knots)
            .map(|i| match i {
                0 => 0.0,
                i if i == last => r,
                i => r * (i as f64 + rng.gen_range(-0.4..0.4)) / last as f64,
            })
            .collect();
        let vs: Vec<f64> = (0..knots).map(|i| if i == 0 { 0.0 } else { rng.gen_range(-1.0..1.0) }).collect();
        Self::natural(ts, vs)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    fn segment(&self, t: f64) -> usize {
        let n = self.knots.len();
        match self.knots.binary_search_by(|k| k.total_cmp(&t)) {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        }
    }

    /// Value and first derivative at `t`.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let i = self.segment(t);
        let (x0, x1) = (self.knots[i], self.knots[i + 1]);
        let h = x1 - x0;
        let (a, b) = ((x1 - t) / h, (t - x0) / h);
        let (m0, m1) = (self.moments[i], self.moments[i + 1]);
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let value = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let slope = (y1 - y0) / h + ((1.0 - 3.0 * a * a) * m0 + (3.0 * b * b - 1.0) * m1) * h / 6.0;
        (value, slope)
    }
}
