//! Small least-squares helpers for scaling checks.

use serde::Serialize;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Ordinary least squares `y = slope * x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() {
        return Err(Error::WidthMismatch { expected: xs.len(), got: ys.len() });
    }
    if xs.len() < 2 {
        return Err(Error::InvalidParameter("a fit needs at least two points".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("all x values coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(LinearFit { slope, intercept, r2 })
}

/// Slope of `ln y` against `ln x`: the growth exponent.
pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.iter().chain(ys).any(|&v| v <= 0.0) {
        return Err(Error::InvalidParameter("log-log fit needs positive data".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    linear_fit(&lx, &ly)
}

/// A single constant `c` with `y ~ c * model`, fitted in log space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaleFit {
    pub c: f64,
    /// Largest `|y / (c * model) - 1|`.
    pub max_residual: f64,
}

pub fn scale_fit(ys: &[f64], model: &[f64]) -> Result<ScaleFit> {
    if ys.len() != model.len() || ys.is_empty() {
        return Err(Error::WidthMismatch { expected: model.len(), got: ys.len() });
    }
    if ys.iter().chain(model).any(|&v| v <= 0.0) {
        return Err(Error::InvalidParameter("scale fit needs positive data".into()));
    }
    let mean = ys.iter().zip(model).map(|(y, m)| (y / m).ln()).sum::<f64>() / ys.len() as f64;
    let c = mean.exp();
    let max_residual = ys
        .iter()
        .zip(model)
        .map(|(y, m)| (y / (c * m) - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(ScaleFit { c, max_residual })
}

/// Ratios `y / model` in order, and whether each ratio stays within a
/// factor `1 + tol` of the one before: growth no faster than the model.
pub fn ratio_trend(ys: &[f64], model: &[f64], tol: f64) -> (Vec<f64>, bool) {
    let ratios: Vec<f64> = ys.iter().zip(model).map(|(y, m)| y / m).collect();
    let ok = ratios.windows(2).all(|w| w[1] <= w[0] * (1.0 + tol));
    (ratios, ok)
}
