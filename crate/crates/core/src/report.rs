//! End-to-end verification report: one pass/fail line per criterion.
//!
//! Every threshold lives in [`Tolerances`] and can be overridden by name, so
//! a deliberately tightened tolerance makes the corresponding line fail.

use std::fmt;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::interferometer::{fit_cubic, fit_quadratic, run_protocol, t3_significance, Method, Protocol};
use crate::phases::{action_difference_check, gauge_phase, gr_budget, rindler_cubic_phase, rindler_time};
use crate::qdynamics::{
    evolve, evolve_to, free_propagate, gauge_check, gauge_map, gaussian_packet, stable_dt, Frame, Grid, Potential,
};
use crate::units::{codata, PhysParams};

macro_rules! tolerances {
    ($($field:ident = $default:expr, $doc:literal;)*) => {
        /// Thresholds of the report, addressable as `tol.<name>` in configs.
        #[derive(Debug, Clone, PartialEq)]
        pub struct Tolerances {
            $(#[doc = $doc] pub $field: f64,)*
        }

        impl Default for Tolerances {
            fn default() -> Self {
                Tolerances { $($field: $default,)* }
            }
        }

        impl Tolerances {
            pub const KEYS: &'static [&'static str] = &[$(stringify!($field)),*];

            pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
                match key {
                    $(stringify!($field) => self.$field = value,)*
                    _ => return Err(Error::Domain(format!("unknown tolerance `{key}`"))),
                }
                Ok(())
            }

            pub fn get(&self, key: &str) -> Option<f64> {
                match key {
                    $(stringify!($field) => Some(self.$field),)*
                    _ => None,
                }
            }
        }
    };
}

tolerances! {
    gauge_fidelity = 1e-6, "Allowed `1 - fidelity` between direct and mapped evolution.";
    gauge_phase = 1e-5, "Allowed overlap phase between direct and mapped evolution.";
    gauge_seconds = 30.0, "Runtime budget of the gauge criterion.";
    c3_rel = 1e-3, "Relative error of the wavepacket cubic coefficient.";
    t3_ratio = 100.0, "Smallest quadratic/cubic residual ratio on the analytic series.";
    t3_seconds = 60.0, "Runtime budget of the t³ detection criterion.";
    method_agreement = 1e-10, "Analytic vs quadrature phase difference.";
    spot = 1e-10, "Deviation of the quadrature phase from 5/6 at m = g = ħ = d = t = 1.";
    rindler_coeff = 0.08, "Coefficient of the `(a t/c)⁴ t` Rindler remainder bound.";
    rindler_cubic_rel = 1e-15, "Relative mismatch of the Rindler and gauge cubic phases.";
    rindler_seconds = 1.0, "Runtime budget of the Rindler criterion.";
    gr_linear = 2.0, "Coefficient of `G M Δh/(c² x²)` in the clock-series bound.";
    gr_quadratic = 10.0, "Coefficient of `(G M/(c² x))²` in the clock-series bound.";
    gr_seconds = 1.0, "Runtime budget of the GR criterion.";
    norm_drift = 1e-10, "Norm drift over 10⁴ split steps.";
    width_rel = 1e-8, "Relative error of the free Gaussian width.";
    ehrenfest_rel = 1e-8, "Relative error of `<x>` against the classical fall.";
    reversal = 1e-10, "Allowed `1 - fidelity` after forward and backward evolution.";
    order = 2.0, "Expected convergence order of the split step.";
    order_band = 0.2, "Allowed deviation from the expected order.";
    dynamics_seconds = 60.0, "Runtime budget of the dynamics gates.";
    universality_rel = 1e-8, "Relative change of the wavepacket `<x>(t)` under doubled mass.";
    coeff_rel = 1e-9, "Relative error of the doubled fit coefficients.";
    action_coeff = 10.0, "Coefficient of `(g t/c)²` in the action residual bound.";
}

/// One line of the report.
#[derive(Debug, Clone, PartialEq)]
pub struct Criterion {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {:<22} {} ({:.2} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.seconds
        )
    }
}

pub const CRITERIA: [(u8, &str); 8] = [
    (1, "gauge-equivalence"),
    (2, "t3-detection"),
    (3, "method-agreement"),
    (4, "rindler-consistency"),
    (5, "gr-budget"),
    (6, "dynamics-gates"),
    (7, "universality"),
    (8, "action-difference"),
];

/// Runs criterion `id` (1 to 8).
pub fn run_criterion(id: u8, tol: &Tolerances) -> Criterion {
    let name = CRITERIA
        .iter()
        .find(|(i, _)| *i == id)
        .map(|(_, n)| *n)
        .unwrap_or("unknown");
    let start = Instant::now();
    let outcome = match id {
        1 => gauge_equivalence(tol),
        2 => t3_detection(tol),
        3 => method_agreement(tol),
        4 => rindler_consistency(tol),
        5 => gr_series(tol),
        6 => dynamics_gates(tol),
        7 => universality(tol),
        8 => action_difference(tol),
        _ => Err(Error::Domain(format!("no criterion {id}"))),
    };
    let seconds = start.elapsed().as_secs_f64();
    let budget = match id {
        1 => tol.gauge_seconds,
        2 => tol.t3_seconds,
        4 => tol.rindler_seconds,
        5 => tol.gr_seconds,
        6 => tol.dynamics_seconds,
        _ => f64::INFINITY,
    };
    let (passed, mut detail) = match outcome {
        Ok((ok, detail)) => (ok, detail),
        Err(e) => (false, format!("error: {e}")),
    };
    let in_time = seconds <= budget;
    if !in_time {
        detail.push_str(&format!(" runtime {seconds:.1} s over budget {budget} s"));
    }
    Criterion {
        id,
        name,
        passed: passed && in_time,
        detail,
        seconds,
    }
}

pub fn run_all(tol: &Tolerances) -> Vec<Criterion> {
    CRITERIA.iter().map(|(id, _)| run_criterion(*id, tol)).collect()
}

type Outcome = Result<(bool, String)>;

fn rng(stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x7133_d0e5 ^ stream)
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn gauge_equivalence(tol: &Tolerances) -> Outcome {
    let mut r = rng(1);
    let cases: Vec<(f64, f64, f64)> = (0..10)
        .map(|_| {
            let m = r.random_range(0.5..=2.0);
            let g: f64 = r.random_range(0.5..=2.0);
            let t = r.random_range(0.05..=0.8) * (2.0 / g).sqrt();
            (m, g, t)
        })
        .collect();
    let grid = Grid::new(-256.0, 256.0, 4096)?;
    let psi0 = gaussian_packet(&grid, 1.0, 0.0, 1.0, 1.0)?;
    let checks = cases
        .par_iter()
        .map(|&(m, g, t)| gauge_check(&psi0, &PhysParams::with_mgh(m, g, 1.0), t, None))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let worst_fid = checks.iter().map(|c| c.fidelity).fold(f64::INFINITY, f64::min);
    let worst_phase = checks.iter().map(|c| c.phase.abs()).fold(0.0, f64::max);
    Ok((
        1.0 - worst_fid <= tol.gauge_fidelity && worst_phase <= tol.gauge_phase,
        format!("10 cases n=4096: min fidelity {worst_fid:.12}, max |phase| {worst_phase:.2e} rad"),
    ))
}

fn t3_detection(tol: &Tolerances) -> Outcome {
    let p = PhysParams::with_mgh(1.0, 1.0, 1.0);
    let wave = run_protocol(&Protocol::new(p.clone(), 1.0, Method::Wavepacket))?;
    let fit = fit_cubic(&wave)?;
    let expected = -p.m * p.g * p.g / (6.0 * p.hbar);
    let c3_err = rel(fit.coeffs[3], expected);

    let analytic = run_protocol(&Protocol::new(p, 1.0, Method::Analytic))?;
    let ratio = t3_significance(&fit_cubic(&analytic)?, &fit_quadratic(&analytic)?);
    Ok((
        c3_err <= tol.c3_rel && ratio >= tol.t3_ratio,
        format!(
            "wavepacket c3 {:.10} (rel err {c3_err:.2e}, rms {:.1e}), analytic t3 ratio {ratio:.2e}",
            fit.coeffs[3], fit.rms_residual
        ),
    ))
}

fn method_agreement(tol: &Tolerances) -> Outcome {
    let p = PhysParams::with_mgh(1.0, 1.0, 1.0);
    let a = run_protocol(&Protocol::new(p.clone(), 1.0, Method::Analytic))?;
    let q = run_protocol(&Protocol::new(p.clone(), 1.0, Method::Quadrature))?;
    let worst = a
        .phases_unwrapped
        .iter()
        .zip(&q.phases_unwrapped)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let spot = run_protocol(&Protocol {
        t_samples: vec![1.0],
        ..Protocol::new(p, 1.0, Method::Quadrature)
    })?;
    let spot_err = (spot.phases_unwrapped[0] - 5.0 / 6.0).abs();
    Ok((
        worst <= tol.method_agreement && spot_err <= tol.spot,
        format!("max |analytic - quadrature| {worst:.2e} rad, |phase(1) - 5/6| {spot_err:.2e}"),
    ))
}

fn rindler_consistency(tol: &Tolerances) -> Outcome {
    let p = PhysParams::dimensionless();
    let mut r = rng(4);
    let (lo, hi) = (1e-3f64.ln(), 0.3f64.ln());
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let z = r.random_range(lo..=hi).exp();
        let t = r.random_range(0.1..10.0);
        let a = z * p.c / t;
        let approx = t - a * a * t * t * t / (6.0 * p.c * p.c);
        let bound = tol.rindler_coeff * z.powi(4) * t;
        worst = worst.max((rindler_time(&p, a, t)? - approx).abs() / bound);
    }
    let mut cubic_worst = 0.0f64;
    for _ in 0..50 {
        let q = PhysParams::with_mgh(r.random_range(0.1..10.0), r.random_range(0.1..10.0), r.random_range(0.5..2.0));
        let t = r.random_range(0.01..5.0);
        let gauge = gauge_phase(&q, 0.0, t).phase;
        cubic_worst = cubic_worst.max(rel(rindler_cubic_phase(&q, q.g, t), gauge));
    }
    Ok((
        worst <= 1.0 && cubic_worst <= tol.rindler_cubic_rel,
        format!("1000 samples at/c in [1e-3, 0.3]: worst error/bound {worst:.3}, cubic mismatch {cubic_worst:.1e}"),
    ))
}

fn gr_series(tol: &Tolerances) -> Outcome {
    let mut r = rng(5);
    let mut worst = 0.0f64;
    let mut worst_at = (0.0, 0.0);
    for _ in 0..1000 {
        let p = PhysParams {
            body_mass: codata::EARTH_MASS * r.random_range(0.1f64..10.0),
            ..PhysParams::neutron()
        };
        let x = r.random_range(6.4e6f64.ln()..4.2e7f64.ln()).exp();
        let dh = r.random_range(1e-2f64.ln()..1e4f64.ln()).exp();
        let b = gr_budget(&p, x, dh, 1.0)?;
        let u = p.grav_const * p.body_mass / (p.c * p.c * x);
        let bound = tol.gr_linear * u * dh / x + tol.gr_quadratic * u * u;
        let ratio = rel(b.dt_series, b.dt_exact) / bound;
        if ratio > worst {
            worst = ratio;
            worst_at = (x, dh);
        }
    }
    let earth = PhysParams::neutron();
    let flat = PhysParams {
        body_mass: 0.0,
        ..PhysParams::neutron()
    };
    let zero_h = gr_budget(&earth, 6.4e6, 0.0, 1.0)?;
    let zero_m = gr_budget(&flat, 6.4e6, 10.0, 1.0)?;
    let zeros = [zero_h.dt_exact, zero_h.dt_series, zero_m.dt_exact, zero_m.dt_series]
        .iter()
        .all(|v| *v == 0.0);
    Ok((
        worst <= 1.0 && zeros,
        format!(
            "1000 samples: worst rel error/bound {worst:.3e} (x = {:.3e}, dh = {:.3e}); exact zeros {zeros}",
            worst_at.0, worst_at.1
        ),
    ))
}

fn dynamics_gates(tol: &Tolerances) -> Outcome {
    let unit = PhysParams::with_mgh(1.0, 1.0, 1.0);
    let flat = PhysParams::with_mgh(1.0, 0.0, 1.0);
    let grid = Grid::centered(0.0, 128.0, 1024)?;
    let mut notes = Vec::new();
    let mut ok = true;

    // norm over 10⁴ steps
    let psi0 = gaussian_packet(&grid, 5.0, 0.0, 1.0, 1.0)?;
    let long = evolve(psi0.clone(), Potential::LinearGravity, &unit, 2e-4, 10_000)?;
    let drift = (long.norm_sq() - psi0.norm_sq()).abs();
    ok &= drift <= tol.norm_drift;
    notes.push(format!("norm drift {drift:.1e}"));

    // free dispersion
    let free0 = gaussian_packet(&grid, 0.0, 0.0, 1.0, 1.0)?;
    let free = evolve_to(free0, Potential::Free, &flat, 2.0, stable_dt(&grid, Potential::Free, &flat))?;
    let width_err = rel(free.width(), (1.0f64 + 1.0).sqrt());
    ok &= width_err <= tol.width_rel;
    notes.push(format!("width {width_err:.1e}"));

    // Ehrenfest: <x> = x0 - g t²/2
    let dt = stable_dt(&grid, Potential::LinearGravity, &unit);
    let mut psi = psi0.clone();
    let mut ehrenfest = 0.0f64;
    for k in 1..=4 {
        let t = 0.5 * k as f64;
        psi = evolve_to(psi, Potential::LinearGravity, &unit, t, dt)?;
        ehrenfest = ehrenfest
            .max(rel(psi.mean_x(), 5.0 - 0.5 * t * t))
            .max(rel(psi.mean_p(1.0), -t));
    }
    ok &= ehrenfest <= tol.ehrenfest_rel;
    notes.push(format!("ehrenfest {ehrenfest:.1e}"));

    // forward then backward
    let there = evolve(psi0.clone(), Potential::LinearGravity, &unit, 5e-4, 2000)?;
    let back = evolve(there, Potential::LinearGravity, &unit, -5e-4, 2000)?;
    let loss = 1.0 - psi0.fidelity(&back)?;
    ok &= loss <= tol.reversal;
    notes.push(format!("reversal loss {loss:.1e}"));

    // phase error against the exact mapped solution under dt halving
    let coarse = Grid::centered(0.0, 128.0, 512)?;
    let start = gaussian_packet(&coarse, 1.0, 0.0, 1.5, 1.0)?;
    let exact = gauge_map(&free_propagate(start.clone().in_frame(Frame::FreelyFalling), &unit, 1.0)?, &unit)?;
    let errors = [500usize, 1000, 2000]
        .iter()
        .map(|&n| {
            let psi = evolve(start.clone(), Potential::LinearGravity, &unit, 1.0 / n as f64, n)?;
            Ok(exact.inner(&psi)?.arg().abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    let orders = [(errors[0] / errors[1]).log2(), (errors[1] / errors[2]).log2()];
    ok &= orders.iter().all(|o| (o - tol.order).abs() <= tol.order_band);
    notes.push(format!("orders {:.3}/{:.3}", orders[0], orders[1]));

    Ok((ok, notes.join(", ")))
}

fn universality(tol: &Tolerances) -> Outcome {
    let light = PhysParams::with_mgh(1.0, 1.0, 1.0);
    let heavy = PhysParams::with_mgh(2.0, 1.0, 1.0);
    let runs = [light.clone(), heavy.clone()]
        .par_iter()
        .map(|p| run_protocol(&Protocol::new(p.clone(), 1.0, Method::Wavepacket)))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let (a, b) = (runs[0].centroid.as_ref(), runs[1].centroid.as_ref());
    let (a, b) = a.zip(b).ok_or_else(|| Error::Domain("wavepacket run without centroids".into()))?;
    let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let shift = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale;

    let fa = fit_cubic(&run_protocol(&Protocol::new(light, 1.0, Method::Analytic))?)?;
    let fb = fit_cubic(&run_protocol(&Protocol::new(heavy, 1.0, Method::Analytic))?)?;
    let c1 = rel(fb.coeffs[1], 2.0 * fa.coeffs[1]);
    let c3 = rel(fb.coeffs[3], 2.0 * fa.coeffs[3]);
    Ok((
        shift <= tol.universality_rel && c1 <= tol.coeff_rel && c3 <= tol.coeff_rel,
        format!("<x>(t) change {shift:.1e}, c1 ratio err {c1:.1e}, c3 ratio err {c3:.1e}"),
    ))
}

fn action_difference(tol: &Tolerances) -> Outcome {
    let mut worst = 0.0f64;
    for k in 0..=20 {
        let c = 10f64.powf(1.0 + 0.1 * k as f64);
        let p = PhysParams {
            c,
            ..PhysParams::with_mgh(1.0, 1.0, 1.0)
        };
        let bound = tol.action_coeff * (p.g / c).powi(2);
        worst = worst.max(action_difference_check(&p, 1.0, 1.0)?.abs() / bound);
    }
    Ok((worst <= 1.0, format!("c/(g t) in [10, 1000]: worst residual/bound {worst:.3}")))
}
