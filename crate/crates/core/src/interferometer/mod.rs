//! The drop interferometer: one branch held at height `d`, the other released
//! at `t = 0`, recombined after time `t`.
//!
//! The phase difference
//!
//! ```text
//! Δφ(t) = (m g/ħ)(d t - g t³/6)
//! ```
//!
//! is produced three independent ways ([`Method`]) and its cubic coefficient
//! recovered by [`fit_cubic`].

mod fit;
mod series;

use num_complex::Complex64;
use rayon::prelude::*;

pub use fit::{fit_cubic, fit_polynomial, fit_quadratic, t3_significance, CubicFit, MAX_CONDITION, MIN_FIT_SAMPLES};
pub use series::{sci, unwrap_phases, wrap_phase, PhaseSeries};

use crate::error::{Error, Result};
use crate::phases::drop_phase;
use crate::qdynamics::{
    boost, evolve_interaction, gaussian_packet, interaction_energy_bound, translate, Frame, Grid, Wavefunction,
    MAX_STEP_PHASE, MIN_OVERLAP,
};
use crate::quadrature::{integrate, QuadOptions};
use crate::units::PhysParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Closed form.
    Analytic,
    /// `(1/ħ) ∫ m g x(τ) dτ` along `x(τ) = d - g τ²/2`, adaptively integrated.
    Quadrature,
    /// Split-step simulation of the dropped packet.
    Wavepacket,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Analytic, Method::Quadrature, Method::Wavepacket];

    pub fn name(self) -> &'static str {
        match self {
            Method::Analytic => "analytic",
            Method::Quadrature => "quadrature",
            Method::Wavepacket => "wavepacket",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Method::ALL.into_iter().find(|m| m.name() == s)
    }
}

/// Numerical settings of the wavepacket method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavepacketSettings {
    pub n: usize,
    /// Explicit grid bounds; default `d ± 10 d`.
    pub x_range: Option<(f64, f64)>,
    /// Largest split step; default is 80 % of the accuracy guard at the
    /// latest sample time.
    pub max_dt: Option<f64>,
}

impl Default for WavepacketSettings {
    fn default() -> Self {
        WavepacketSettings {
            n: 4096,
            x_range: None,
            max_dt: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Protocol {
    pub params: PhysParams,
    /// Height of the held branch above the lower arm.
    pub d: f64,
    /// Packet width (standard deviation of `|ψ|²`).
    pub sigma: f64,
    pub t_samples: Vec<f64>,
    pub method: Method,
    pub wavepacket: WavepacketSettings,
}

/// `count` times spread uniformly over `[0.1, 1.0]·sqrt(2d/g)`.
pub fn default_times(p: &PhysParams, d: f64, count: usize) -> Vec<f64> {
    let fall = p.fall_time(d);
    match count {
        0 => Vec::new(),
        1 => vec![fall],
        _ => (0..count)
            .map(|i| fall * (0.1 + 0.9 * i as f64 / (count - 1) as f64))
            .collect(),
    }
}

impl Protocol {
    /// Defaults: `sigma = d/50`, 20 samples from [`default_times`].
    pub fn new(params: PhysParams, d: f64, method: Method) -> Self {
        let t_samples = default_times(&params, d, 20);
        Protocol {
            params,
            d,
            sigma: d / 50.0,
            t_samples,
            method,
            wavepacket: WavepacketSettings::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.d.is_finite() && self.d > 0.0) {
            return Err(Error::param("d", "must be positive"));
        }
        if !(self.sigma > 0.0 && self.sigma <= self.d / 10.0) {
            return Err(Error::param("sigma", format!("must lie in (0, d/10] = (0, {}]", self.d / 10.0)));
        }
        let t = &self.t_samples;
        if t.is_empty() {
            return Err(Error::param("t_samples", "empty"));
        }
        if t.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::param("t_samples", "must be positive"));
        }
        if t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param("t_samples", "must be strictly increasing"));
        }
        let limit = 1.2 * self.params.fall_time(self.d);
        if t[t.len() - 1] > limit {
            return Err(Error::param("t_samples", format!("latest time exceeds 1.2·sqrt(2d/g) = {limit}")));
        }
        if self.method == Method::Wavepacket && self.params.g <= 0.0 {
            return Err(Error::param("g", "the wavepacket method needs g > 0"));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        match self.wavepacket.x_range {
            Some((lo, hi)) => Grid::new(lo, hi, self.wavepacket.n),
            None => Grid::centered(self.d, 20.0 * self.d, self.wavepacket.n),
        }
    }
}

/// Runs every sample of the protocol. Samples are independent and run in
/// parallel; the series is assembled in sample order.
pub fn run_protocol(proto: &Protocol) -> Result<PhaseSeries> {
    proto.validate()?;
    let p = &proto.params;
    let times = proto.t_samples.clone();
    let mut series = match proto.method {
        Method::Analytic => {
            let phases = times.iter().map(|&t| drop_phase(p, proto.d, t).phase).collect();
            PhaseSeries::from_continuous(times, phases, Method::Analytic)?
        }
        Method::Quadrature => {
            let phases = times
                .iter()
                .map(|&t| quadrature_phase(p, proto.d, t))
                .collect::<Result<Vec<_>>>()?;
            PhaseSeries::from_continuous(times, phases, Method::Quadrature)?
        }
        Method::Wavepacket => wavepacket_series(proto)?,
    };
    series.fall_time = Some(p.fall_time(proto.d));
    Ok(series)
}

/// `(1/ħ) ∫₀ᵗ m g (d - g τ²/2) dτ`.
pub fn quadrature_phase(p: &PhysParams, d: f64, t: f64) -> Result<f64> {
    let opts = QuadOptions {
        abs_tol: 1e-15,
        ..QuadOptions::default()
    };
    let integral = integrate(|tau| p.m * p.g * (d - 0.5 * p.g * tau * tau), 0.0, t, opts)?;
    Ok(integral.value / p.hbar)
}

struct Sample {
    phase: f64,
    overlap: f64,
    centroid: f64,
}

fn wavepacket_series(proto: &Protocol) -> Result<PhaseSeries> {
    let p = &proto.params;
    let grid = proto.grid()?;
    let psi0 = gaussian_packet(&grid, proto.d, 0.0, proto.sigma, p.hbar)?;
    let t_last = proto.t_samples[proto.t_samples.len() - 1];
    let max_dt = proto
        .wavepacket
        .max_dt
        .unwrap_or_else(|| 0.8 * MAX_STEP_PHASE * p.hbar / interaction_energy_bound(&grid, p, t_last));

    let results: Vec<Result<Sample>> = proto
        .t_samples
        .par_iter()
        .enumerate()
        .map(|(i, &t)| wavepacket_sample(proto, &psi0, t, max_dt, i))
        .collect();
    let samples = results.into_iter().collect::<Result<Vec<_>>>()?;

    let raw = samples.iter().map(|s| s.phase).collect();
    let overlaps = samples.iter().map(|s| s.overlap).collect();
    let mut series = PhaseSeries::from_wrapped(proto.t_samples.clone(), raw, Method::Wavepacket, overlaps)?;
    series.centroid = Some(samples.iter().map(|s| s.centroid).collect());
    Ok(series)
}

/// One drop of duration `t`.
///
/// The branch is evolved in the interaction picture with respect to free
/// motion, so the kinetic zero-point phase of the packet is removed from the
/// start and the packet keeps its initial shape. After the run it sits at
/// `d + g t²/2` with momentum `-m g t`; it is translated back to `d`, the
/// momentum is removed, and the result is compared with the held packet,
/// whose only phase is `exp(-i m g d t/ħ)`.
fn wavepacket_sample(proto: &Protocol, psi0: &Wavefunction, t: f64, max_dt: f64, index: usize) -> Result<Sample> {
    let p = &proto.params;
    let steps = (t / max_dt).ceil().max(1.0) as usize;
    let dropped = evolve_interaction(psi0.clone().in_frame(Frame::GravitationalInteraction), p, t / steps as f64, steps)?;
    // lab-frame centroid: <x> + t <p>/m undoes the free drift divided out above
    let centroid = dropped.mean_x() + t * dropped.mean_p(p.hbar) / p.m;

    let (phase, overlap) = read_out(proto, psi0, dropped, t, index)?;
    Ok(Sample { phase, overlap, centroid })
}

/// Phase and magnitude of `<held|dropped>` after moving the dropped branch
/// back onto the held one.
fn read_out(proto: &Protocol, psi0: &Wavefunction, dropped: Wavefunction, t: f64, index: usize) -> Result<(f64, f64)> {
    let p = &proto.params;
    let back = translate(dropped, -0.5 * p.g * t * t)?;
    let back = boost(back, p.m * p.g * t, p.hbar)?;

    let held_phase = Complex64::from_polar(1.0, -p.m * p.g * proto.d * t / p.hbar);
    let z = psi0.inner(&back)? * held_phase.conj();
    let overlap = z.norm();
    if overlap < MIN_OVERLAP {
        return Err(Error::NoOverlap {
            magnitude: overlap,
            sample: Some(index),
        });
    }
    Ok((wrap_phase(z.arg()), overlap))
}

/// `I = ½(1 + V cos Δφ)` per sample, with `V` the branch overlap.
pub fn fringes(series: &PhaseSeries) -> Vec<f64> {
    series
        .phases_unwrapped
        .iter()
        .zip(&series.overlap_mag)
        .map(|(phi, v)| 0.5 * (1.0 + v * phi.cos()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> PhysParams {
        PhysParams::with_mgh(1.0, 1.0, 1.0)
    }

    fn single(method: Method, t: f64) -> Protocol {
        Protocol {
            t_samples: vec![t],
            ..Protocol::new(unit(), 1.0, method)
        }
    }

    #[test]
    fn default_protocol() {
        let proto = Protocol::new(unit(), 1.0, Method::Analytic);
        assert_eq!(proto.t_samples.len(), 20);
        assert!((proto.t_samples[0] - 0.1 * 2f64.sqrt()).abs() < 1e-15);
        assert!((proto.t_samples[19] - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(proto.sigma, 0.02);
        proto.validate().unwrap();
    }

    #[test]
    fn protocol_invariants() {
        let mut proto = Protocol::new(unit(), 1.0, Method::Analytic);
        proto.sigma = 0.2;
        assert!(proto.validate().is_err());
        let mut proto = Protocol::new(unit(), 1.0, Method::Analytic);
        proto.t_samples = vec![0.5, 0.4];
        assert!(proto.validate().is_err());
        proto.t_samples = vec![0.0, 0.4];
        assert!(proto.validate().is_err());
        proto.t_samples = vec![0.5, 1.8];
        assert!(proto.validate().is_err());
    }

    #[test]
    fn vanishing_time_gives_vanishing_phase() {
        for method in Method::ALL {
            let s = run_protocol(&single(method, 1e-9)).unwrap();
            assert!(s.phases_unwrapped[0].abs() < 1e-8, "{method:?}: {}", s.phases_unwrapped[0]);
        }
    }

    #[test]
    fn quadrature_spot_value() {
        let s = run_protocol(&single(Method::Quadrature, 1.0)).unwrap();
        assert!((s.phases_unwrapped[0] - 5.0 / 6.0).abs() < 1e-10);
    }

    #[test]
    fn wavepacket_spot_value() {
        let s = run_protocol(&single(Method::Wavepacket, 1.0)).unwrap();
        assert!((s.phases_unwrapped[0] - 5.0 / 6.0).abs() < 1e-4, "{}", s.phases_unwrapped[0]);
        assert!((s.overlap_mag[0] - 1.0).abs() < 1e-8);
        let x = s.centroid.unwrap()[0];
        assert!((x - 0.5).abs() < 1e-8, "{x}");
    }

    #[test]
    fn analytic_and_quadrature_agree() {
        let a = run_protocol(&Protocol::new(unit(), 1.0, Method::Analytic)).unwrap();
        let q = run_protocol(&Protocol::new(unit(), 1.0, Method::Quadrature)).unwrap();
        for (x, y) in a.phases_unwrapped.iter().zip(&q.phases_unwrapped) {
            assert!((x - y).abs() <= 1e-10);
        }
    }

    #[test]
    fn analytic_fit_coefficients() {
        let s = run_protocol(&Protocol::new(unit(), 1.0, Method::Analytic)).unwrap();
        let fit = fit_cubic(&s).unwrap();
        assert!((fit.coeffs[1] - 1.0).abs() <= 1e-9);
        assert!((fit.coeffs[3] * 6.0 + 1.0).abs() <= 1e-9);
        let ratio = t3_significance(&fit, &fit_quadratic(&s).unwrap());
        assert!(ratio >= 100.0, "{ratio}");
    }

    #[test]
    fn doubling_mass_doubles_coefficients() {
        let a = fit_cubic(&run_protocol(&Protocol::new(unit(), 1.0, Method::Analytic)).unwrap()).unwrap();
        let heavy = PhysParams::with_mgh(2.0, 1.0, 1.0);
        let b = fit_cubic(&run_protocol(&Protocol::new(heavy, 1.0, Method::Analytic)).unwrap()).unwrap();
        assert!((b.coeffs[1] / a.coeffs[1] - 2.0).abs() < 1e-9);
        assert!((b.coeffs[3] / a.coeffs[3] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn fringe_extremes() {
        let s = PhaseSeries::from_continuous(vec![1.0, 2.0], vec![0.0, std::f64::consts::PI], Method::Analytic).unwrap();
        let i = fringes(&s);
        assert_eq!(i[0], 1.0);
        assert!(i[1].abs() < 1e-16);
        let w = PhaseSeries::from_wrapped(vec![1.0], vec![0.0], Method::Wavepacket, vec![0.6]).unwrap();
        assert!((fringes(&w)[0] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn lost_overlap_names_the_sample() {
        let proto = Protocol::new(unit(), 1.0, Method::Wavepacket);
        let psi0 = gaussian_packet(&proto.grid().unwrap(), 1.0, 0.0, proto.sigma, 1.0).unwrap();
        // a branch that missed the held one by ten widths
        let stray = translate(psi0.clone(), 0.2).unwrap();
        let stray = Wavefunction { t: 0.0, ..stray };
        match read_out(&proto, &psi0, stray, 0.0, 3) {
            Err(Error::NoOverlap { sample, magnitude }) => {
                assert_eq!(sample, Some(3));
                assert!(magnitude < MIN_OVERLAP);
            }
            other => panic!("expected no-overlap, got {other:?}"),
        }
    }

    #[test]
    fn oversized_step_is_refused() {
        let mut proto = single(Method::Wavepacket, 1.0);
        proto.wavepacket.max_dt = Some(0.1);
        assert!(matches!(run_protocol(&proto), Err(Error::StepTooLarge(_))));
    }
}
