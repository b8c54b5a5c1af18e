//! Scaling-exponent extraction from polarisation time series.
//!
//! The growth laws under study are power laws `mean_n ∝ t^p`, so the
//! estimator is an ordinary least-squares line through `(log t, log mean_n)`
//! restricted to a window that drops the early transient (`mean_n < 2`,
//! where the lattice offset masks the power) and every point whose guard
//! leakage shows the truncated boundary has been reached.

use crate::chain::PolarisationSeries;
use crate::error::{Error, Result};

/// Guard population above which a point is boundary-contaminated.
pub const LEAKAGE_LIMIT: f64 = 1e-6;

/// Fewest usable points a fit will accept.
pub const MIN_FIT_POINTS: usize = 8;

/// Result of a log-log slope fit.
#[derive(Clone, Copy, Debug)]
pub struct ExponentFit {
    pub exponent: f64,
    pub std_error: f64,
    pub points_used: usize,
}

/// Evenly spaced grid from `a` to `b` inclusive with `n ≥ 2` points.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "linspace needs at least two points");
    let step = (b - a) / (n - 1) as f64;
    let mut v: Vec<f64> = (0..n).map(|i| a + step * i as f64).collect();
    v[n - 1] = b;
    v
}

/// Fit `log(mean_n) = p·log(t) + c` over `window = (t_lo, t_hi)` inclusive,
/// skipping early-transient and boundary-contaminated points.
pub fn fit_exponent(series: &PolarisationSeries, window: (f64, f64)) -> Result<ExponentFit> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(Error::InvalidInput(format!(
            "bad fit window [{lo}, {hi}]"
        )));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..series.times.len() {
        let t = series.times[i];
        let m = series.mean_n[i];
        if t <= 0.0 || t < lo || t > hi {
            continue;
        }
        if m < 2.0 {
            continue;
        }
        if series.leakage[i] > LEAKAGE_LIMIT {
            continue;
        }
        xs.push(t.ln());
        ys.push(m.ln());
    }
    let m = xs.len();
    if m < MIN_FIT_POINTS {
        return Err(Error::InsufficientData(format!(
            "{m} usable points in window [{lo}, {hi}], need {MIN_FIT_POINTS}"
        )));
    }

    let xm = xs.iter().sum::<f64>() / m as f64;
    let ym = ys.iter().sum::<f64>() / m as f64;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..m {
        let dx = xs[i] - xm;
        sxx += dx * dx;
        sxy += dx * (ys[i] - ym);
    }
    if sxx == 0.0 {
        return Err(Error::InsufficientData(
            "all usable points share one time".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let ss_res: f64 = (0..m)
        .map(|i| {
            let r = ys[i] - (intercept + slope * xs[i]);
            r * r
        })
        .sum();
    let std_error = (ss_res / (m - 2) as f64 / sxx).sqrt();

    Ok(ExponentFit {
        exponent: slope,
        std_error,
        points_used: m,
    })
}

/// The standard window: from 20% of the series span up to the last time
/// before the guard certificate first fails. `None` when no certified
/// stretch survives.
pub fn default_window(series: &PolarisationSeries) -> Option<(f64, f64)> {
    let t_max = *series.times.last()?;
    let t_guard = match series.leakage.iter().position(|&l| l > LEAKAGE_LIMIT) {
        Some(0) => return None,
        Some(i) => series.times[i - 1],
        None => t_max,
    };
    let lo = 0.2 * t_max;
    if t_guard <= lo {
        return None;
    }
    Some((lo, t_guard))
}
