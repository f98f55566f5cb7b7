//! Small regression helpers for order and scaling fits.

use serde::Serialize;

use crate::error::{Error, Result};

/// Errors below this are treated as rounding noise and dropped from slope fits.
pub const NOISE_FLOOR: f64 = 1e-12;

/// `n` points spaced geometrically from `lo` to `hi` inclusive.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let ratio = (hi / lo).ln() / (n - 1) as f64;
    (0..n).map(|i| lo * (ratio * i as f64).exp()).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

impl LinearFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Ordinary least squares `y = a + b x`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidInput(format!(
            "fit inputs differ in length: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 points to fit, got {n}")));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("fit abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
        points: n,
    })
}

/// Slope of `ln y` against `ln x`, skipping points with `y < floor`.
/// Returns `None` when fewer than two points survive.
pub fn loglog_fit(xs: &[f64], ys: &[f64], floor: f64) -> Option<LinearFit> {
    let (lx, ly): (Vec<f64>, Vec<f64>) = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **y >= floor && **x > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .unzip();
    linear_fit(&lx, &ly).ok()
}
