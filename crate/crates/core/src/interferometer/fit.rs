use nalgebra::{DMatrix, DVector};

use super::series::PhaseSeries;
use crate::error::{Error, Result};

/// Fewest samples a cubic fit is attempted on.
pub const MIN_FIT_SAMPLES: usize = 8;

/// Largest condition diagnostic accepted before the fit is refused.
pub const MAX_CONDITION: f64 = 1e12;

/// Least-squares polynomial `c0 + c1 t + c2 t² + c3 t³` (with `c3 = 0` for a
/// quadratic fit).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicFit {
    /// Coefficients in physical units, rad/sⁿ.
    pub coeffs: [f64; 4],
    pub degree: usize,
    /// Root-mean-square residual in radians.
    pub rms_residual: f64,
    /// Singular-value ratio of the scaled design times the amplification of
    /// the back-transform to unscaled time.
    pub condition: f64,
    /// `max |φ|` of the fitted data.
    pub scale: f64,
}

impl CubicFit {
    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }
}

pub fn fit_cubic(series: &PhaseSeries) -> Result<CubicFit> {
    fit_series(series, 3)
}

pub fn fit_quadratic(series: &PhaseSeries) -> Result<CubicFit> {
    fit_series(series, 2)
}

fn fit_series(series: &PhaseSeries, degree: usize) -> Result<CubicFit> {
    if series.len() < MIN_FIT_SAMPLES {
        return Err(Error::param("series", format!("needs at least {MIN_FIT_SAMPLES} samples, got {}", series.len())));
    }
    if let Some(window) = series.fall_time {
        let span = series.times[series.len() - 1] - series.times[0];
        if span < 0.5 * window {
            return Err(Error::Conditioning(format!(
                "samples span {span:.3e}, less than half the fall window {window:.3e}"
            )));
        }
    }
    fit_polynomial(&series.times, &series.phases_unwrapped, degree)
}

/// Fits a polynomial of `degree ≤ 3` through `(t, y)`.
///
/// The design is built on `s = (t - c)/h`, with `c` and `h` the midpoint and
/// half-width of the time span, solved by SVD, and expanded back to powers
/// of `t`.
pub fn fit_polynomial(t: &[f64], y: &[f64], degree: usize) -> Result<CubicFit> {
    if degree > 3 {
        return Err(Error::param("degree", "at most 3"));
    }
    if t.len() != y.len() {
        return Err(Error::param("y", "length differs from t"));
    }
    if t.len() <= degree {
        return Err(Error::Conditioning(format!("{} samples cannot fix {} coefficients", t.len(), degree + 1)));
    }
    if t.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::param("series", "values must be finite"));
    }
    let (lo, hi) = t.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    if half <= 0.0 {
        return Err(Error::Conditioning("all samples at the same time".into()));
    }

    let cols = degree + 1;
    let s: Vec<f64> = t.iter().map(|&v| (v - center) / half).collect();
    let a = DMatrix::from_fn(t.len(), cols, |i, j| s[i].powi(j as i32));
    let b = DVector::from_column_slice(y);
    let svd = a.clone().svd(true, true);
    let sv_max = svd.singular_values.max();
    let sv_min = svd.singular_values.min();
    if !(sv_min > 1e-12 * sv_max) {
        return Err(Error::Conditioning(format!("rank-deficient design, singular values {sv_min:.3e}/{sv_max:.3e}")));
    }
    let amplification = (1.0 + center.abs() / half).powi(degree as i32);
    let condition = sv_max / sv_min * amplification;
    if condition > MAX_CONDITION {
        return Err(Error::Conditioning(format!(
            "time span too narrow for its offset, condition {condition:.3e}"
        )));
    }
    let scaled = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::Conditioning(e.to_string()))?;

    let residual = &a * &scaled - &b;
    let rms_residual = (residual.norm_squared() / t.len() as f64).sqrt();

    // Horner in the linear polynomial (t - c)/h
    let mut coeffs = [0.0; 4];
    let (u0, u1) = (-center / half, 1.0 / half);
    for j in (0..cols).rev() {
        let mut next = [0.0; 4];
        for (k, &ck) in coeffs.iter().enumerate().take(3) {
            next[k] += ck * u0;
            next[k + 1] += ck * u1;
        }
        next[0] += scaled[j];
        coeffs = next;
    }

    Ok(CubicFit {
        coeffs,
        degree,
        rms_residual,
        condition,
        scale: y.iter().fold(0.0f64, |m, v| m.max(v.abs())),
    })
}

/// `rms(quadratic) / rms(cubic)`. Residuals are floored at `1e-12·max|φ|`,
/// the resolution of double-precision phase data, so exactly polynomial
/// inputs give finite ratios.
pub fn t3_significance(cubic: &CubicFit, quadratic: &CubicFit) -> f64 {
    let floor = 1e-12 * cubic.scale.max(quadratic.scale).max(f64::MIN_POSITIVE);
    quadratic.rms_residual.max(floor) / cubic.rms_residual.max(floor)
}
