use std::f64::consts::{PI, TAU};
use std::io::{self, Write};

use super::Method;
use crate::error::{Error, Result};

/// Reduces `phi` to `(-π, π]`.
pub fn wrap_phase(phi: f64) -> f64 {
    let w = phi - TAU * (phi / TAU).round();
    if w <= -PI {
        w + TAU
    } else if w > PI {
        w - TAU
    } else {
        w
    }
}

/// Lifts wrapped phases onto a continuous curve that starts from the
/// reference `Δφ(0) = 0`: each value is moved by whole turns to the branch
/// nearest its predecessor.
pub fn unwrap_phases(raw: &[f64]) -> Vec<f64> {
    let mut prev = 0.0;
    raw.iter()
        .map(|&r| {
            let turns = ((prev - r) / TAU).round();
            let u = r + TAU * turns;
            prev = u;
            u
        })
        .collect()
}

/// Δφ sampled at a sequence of drop times.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSeries {
    pub times: Vec<f64>,
    /// Phases as measured, in `(-π, π]`.
    pub raw: Vec<f64>,
    pub phases_unwrapped: Vec<f64>,
    pub method: Method,
    /// `|<held|dropped>|` per sample; 1 for the closed-form methods.
    pub overlap_mag: Vec<f64>,
    /// Lab-frame `<x>` of the dropped branch per sample (wavepacket runs only).
    pub centroid: Option<Vec<f64>>,
    /// `sqrt(2d/g)` of the protocol that produced the series, if any.
    pub fall_time: Option<f64>,
}

impl PhaseSeries {
    /// A series whose values are already continuous (closed form, quadrature
    /// or synthetic data).
    pub fn from_continuous(times: Vec<f64>, phases: Vec<f64>, method: Method) -> Result<Self> {
        check_times(&times, phases.len())?;
        let raw = phases.iter().map(|&p| wrap_phase(p)).collect();
        let overlap_mag = vec![1.0; times.len()];
        Ok(PhaseSeries {
            times,
            raw,
            phases_unwrapped: phases,
            method,
            overlap_mag,
            centroid: None,
            fall_time: None,
        })
    }

    /// A series of phases known only modulo 2π, unwrapped from `Δφ(0) = 0`.
    pub fn from_wrapped(times: Vec<f64>, raw: Vec<f64>, method: Method, overlap_mag: Vec<f64>) -> Result<Self> {
        check_times(&times, raw.len())?;
        if overlap_mag.len() != times.len() {
            return Err(Error::param("overlap_mag", "length differs from times"));
        }
        let raw: Vec<f64> = raw.into_iter().map(wrap_phase).collect();
        let phases_unwrapped = unwrap_phases(&raw);
        Ok(PhaseSeries {
            times,
            raw,
            phases_unwrapped,
            method,
            overlap_mag,
            centroid: None,
            fall_time: None,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// The unwrapped phases reduced back to `(-π, π]`.
    pub fn rewrap(&self) -> Vec<f64> {
        self.phases_unwrapped.iter().map(|&p| wrap_phase(p)).collect()
    }

    /// CSV with columns `t,phase_rad,method,overlap_mag`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,phase_rad,method,overlap_mag")?;
        for ((t, phi), v) in self.times.iter().zip(&self.phases_unwrapped).zip(&self.overlap_mag) {
            writeln!(w, "{},{},{},{}", sci(*t), sci(*phi), self.method.name(), sci(*v))?;
        }
        Ok(())
    }
}

fn check_times(times: &[f64], values: usize) -> Result<()> {
    if times.len() != values {
        return Err(Error::param("phases", "length differs from times"));
    }
    if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("times", "must be finite and strictly increasing"));
    }
    Ok(())
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn sci(v: f64) -> String {
    format!("{v:.16e}")
}
