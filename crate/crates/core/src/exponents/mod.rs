//! Concave hulls, finite-n exponent proxies, and the inequality suite.
//!
//! Exponents of sequences such as `−ln P^(n)(e)` or `𝔼|P^(n)|` are limits;
//! at desk scale they are replaced by least-squares slopes of `ln f` against
//! `ln n` over the top dyadic window, with the extreme slopes over sliding
//! half-windows reported as upper and lower proxies.

mod checks;
mod hull;

pub use checks::*;
pub use hull::{concave_hull, ConcaveHull, SubadditiveSeries};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::least_squares;

/// Fitted exponent proxies of one series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    /// Slope over the whole window.
    pub central: f64,
    /// Largest slope over sliding half-windows.
    pub upper: f64,
    /// Smallest slope over sliding half-windows.
    pub lower: f64,
    pub window: (usize, usize),
    pub rms_residual: f64,
}

/// Minimum number of points in a fit window.
pub const MIN_WINDOW_POINTS: usize = 8;

fn slope(values: &[f64], lo: usize, hi: usize) -> Option<crate::numeric::LineFit> {
    let xs: Vec<f64> = (lo..=hi).map(|n| (n as f64).ln()).collect();
    let ys: Vec<f64> = (lo..=hi).map(|n| values[n].ln()).collect();
    least_squares(&xs, &ys)
}

/// Fits `ln f(n)` against `ln n` on `[lo, hi]` (indices into `values`).
pub fn fit_window(values: &[f64], lo: usize, hi: usize) -> Result<ExponentFit> {
    let lo = lo.max(1);
    if hi >= values.len() || hi < lo || hi - lo + 1 < MIN_WINDOW_POINTS {
        return Err(Error::Series(format!(
            "fit window [{lo}, {hi}] needs at least {MIN_WINDOW_POINTS} points inside 0..{}",
            values.len()
        )));
    }
    if let Some(n) = (lo..=hi).find(|&n| !(values[n] > 0.0 && values[n].is_finite())) {
        return Err(Error::Series(format!("value at n = {n} is not positive")));
    }
    let whole = slope(values, lo, hi).ok_or_else(|| Error::Series("degenerate window".into()))?;
    let width = (hi - lo) / 2;
    let (mut upper, mut lower) = (f64::NEG_INFINITY, f64::INFINITY);
    for start in lo..=hi - width {
        if let Some(fit) = slope(values, start, start + width) {
            upper = upper.max(fit.slope);
            lower = lower.min(fit.slope);
        }
    }
    Ok(ExponentFit {
        central: whole.slope,
        upper,
        lower,
        window: (lo, hi),
        rms_residual: whole.rms_residual(),
    })
}

/// Fit on the dyadic window `[n_max/2, n_max]`, `n_max` being the last index.
pub fn fit_exponents(values: &[f64]) -> Result<ExponentFit> {
    let n_max = values.len().saturating_sub(1);
    fit_window(values, n_max / 2, n_max)
}
