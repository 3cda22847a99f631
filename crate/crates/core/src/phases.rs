//! Closed-form phases of a mass in a uniform field, and the weak-field
//! relativistic checks that reproduce them.
//!
//! The frame change from free fall to rest in a field `g` is the gauge
//! transformation
//!
//! ```text
//! Λ(x, t) = -m g x t - m g² t³ / 6
//! ```
//!
//! and [`gauge_phase`] reports both `Λ` and the phase `-Λ/ħ`, so either sign
//! convention can be recovered by the caller. The numerically validated map
//! between wavefunctions lives in [`crate::qdynamics::gauge_map`].

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadOptions};
use crate::units::PhysParams;

/// `m g² t³ / 6`, shared by every t³ expression so they agree bit for bit.
#[inline]
fn cubic_action(m: f64, g: f64, t: f64) -> f64 {
    m * g * g * (t * t * t) / 6.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaugeEval {
    /// Λ(x, t) in units of action.
    pub lambda_action: f64,
    /// `-Λ/ħ` in radians.
    pub phase: f64,
}

pub fn gauge_phase(p: &PhysParams, x: f64, t: f64) -> GaugeEval {
    let lambda_action = -(p.m * p.g * x * t) - cubic_action(p.m, p.g, t);
    GaugeEval {
        lambda_action,
        phase: -lambda_action / p.hbar,
    }
}

/// Phase between two stationary heights `delta_h` apart after time `t`.
pub fn cow_phase(p: &PhysParams, delta_h: f64, t: f64) -> f64 {
    p.m * p.g * delta_h * t / p.hbar
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DropPhase {
    pub phase: f64,
    /// `t` lies outside `[0, sqrt(2d/g)]`, i.e. the dropped branch would have
    /// passed the lower arm. The value is still the closed form.
    pub outside_fall_window: bool,
}

/// Phase between the held branch and the branch dropped from height `d`,
/// `(m g/ħ)(d t - g t³/6)`.
pub fn drop_phase(p: &PhysParams, d: f64, t: f64) -> DropPhase {
    let phase = p.m * p.g / p.hbar * (d * t - p.g * (t * t * t) / 6.0);
    let window = p.fall_time(d);
    DropPhase {
        phase,
        outside_fall_window: !(0.0..=window).contains(&t),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrPhaseBudget {
    /// `m g Δh τ / ħ` with the local field `g = GM/x²`.
    pub newtonian_term: f64,
    /// `m g² Δh² τ / (c² ħ)`.
    pub gr_term: f64,
    /// Proper-time difference between the clock at `x + Δh` and the clock at `x`.
    pub dt_exact: f64,
    /// First two terms of the weak-field expansion of `dt_exact`.
    pub dt_series: f64,
    /// `m c² / ħ`.
    pub omega: f64,
}

/// Clock-rate budget for two static heights `x` and `x + Δh` above a mass `M`.
pub fn gr_budget(p: &PhysParams, x: f64, delta_h: f64, tau: f64) -> Result<GrPhaseBudget> {
    if !(x.is_finite() && delta_h.is_finite() && tau.is_finite()) {
        return Err(Error::Domain("non-finite GR budget input".into()));
    }
    if x <= 0.0 || x + delta_h <= 0.0 {
        return Err(Error::Domain(format!(
            "radii must be positive, got x = {x}, x + dh = {}",
            x + delta_h
        )));
    }
    let c2 = p.c * p.c;
    let mu = p.grav_const * p.body_mass / c2;
    let lower = 2.0 * mu / x;
    let upper = 2.0 * mu / (x + delta_h);
    if lower >= 1.0 || upper >= 1.0 {
        return Err(Error::Domain(format!(
            "inside horizon: 2GM/(c^2 r) = {:.3} at r = {}",
            lower.max(upper),
            if lower >= upper { x } else { x + delta_h }
        )));
    }
    // sqrt(1 - upper) - sqrt(1 - lower), rationalised so there is no cancellation
    let dt_exact = 2.0 * mu * delta_h / (x * (x + delta_h))
        / ((1.0 - upper).sqrt() + (1.0 - lower).sqrt())
        * tau;
    let eps = mu * delta_h / (x * x);
    let dt_series = (eps + 0.5 * eps * eps) * tau;

    let g_loc = p.grav_const * p.body_mass / (x * x);
    Ok(GrPhaseBudget {
        newtonian_term: p.m * g_loc * delta_h * tau / p.hbar,
        gr_term: p.m * g_loc * g_loc * delta_h * delta_h * tau / (c2 * p.hbar),
        dt_exact,
        dt_series,
        omega: p.m * c2 / p.hbar,
    })
}

/// Below this `a t / c` the arcsinh is replaced by its Taylor series.
pub const RINDLER_SERIES_CROSSOVER: f64 = 1e-4;

/// Proper time `(c/a) asinh(a t / c)` of an observer with constant proper
/// acceleration `a`. Returns `t` for `a = 0`.
pub fn rindler_time(p: &PhysParams, a: f64, t: f64) -> Result<f64> {
    if !(a.is_finite() && t.is_finite()) {
        return Err(Error::Domain("non-finite Rindler input".into()));
    }
    if a < 0.0 {
        return Err(Error::Domain(format!("acceleration must be >= 0, got {a}")));
    }
    if a == 0.0 {
        return Ok(t);
    }
    let z = a * t / p.c;
    if z.abs() < RINDLER_SERIES_CROSSOVER {
        let z2 = z * z;
        // asinh(z)/z = 1 - z²/6 + 3z⁴/40 - 15z⁶/336; the z⁶ term is below 1e-25
        return Ok(t * (1.0 - z2 / 6.0 + 3.0 * z2 * z2 / 40.0));
    }
    Ok(p.c / a * z.asinh())
}

/// The cubic Rindler term `a² t³/(6c²)` times `m c²/ħ`.
pub fn rindler_cubic_phase(p: &PhysParams, a: f64, t: f64) -> f64 {
    cubic_action(p.m, a, t) / p.hbar
}

/// Compares the relativistic action difference `m c² (t - T)` with
/// `m g x t + m g² t³/6` and returns the relative residual.
///
/// `T` is the proper time of a clock that starts from rest, picks up the
/// fall velocity `g τ`, and sits at the potential of the height `x`:
///
/// ```text
/// T = ∫₀ᵗ sqrt(1 - (gτ/c)² - 2 g x / c²) dτ
/// ```
///
/// The integrand is rewritten as `c²(1 - sqrt(1-ε)) = c² ε / (1 + sqrt(1-ε))`
/// so `t - T` is integrated directly.
pub fn action_difference_check(p: &PhysParams, x: f64, t: f64) -> Result<f64> {
    if !(x.is_finite() && t.is_finite()) {
        return Err(Error::Domain("non-finite action check input".into()));
    }
    let c2 = p.c * p.c;
    let eps = |tau: f64| (p.g * p.g * tau * tau + 2.0 * p.g * x) / c2;
    let worst = eps(t).max(eps(0.0));
    if worst >= 1.0 {
        return Err(Error::Domain(format!(
            "not a weak field: (g t/c)² + 2 g x/c² = {worst:.3}"
        )));
    }
    // c²(1 - sqrt(1 - ε))
    let integrand = |tau: f64| {
        let e = eps(tau);
        c2 * e / (1.0 + (1.0 - e).sqrt())
    };
    let action = p.m * integrate(integrand, 0.0, t, QuadOptions::default())?.value;
    let expected = p.m * p.g * x * t + cubic_action(p.m, p.g, t);
    if expected == 0.0 {
        return Ok(if action == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok((action - expected) / expected.abs())
}
