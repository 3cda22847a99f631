//! Grid wavefunctions and their spectral split-step evolution.
//!
//! A state in the gravitational frame evolves under `H = p²/2m + m g x`; a
//! state in the freely-falling frame evolves under `H = p²/2m`. The two are
//! related by [`gauge_map`], and [`schrodinger_residual`] checks that a
//! mapped family of states really solves the gravitational equation.
//!
//! Each step is the symmetric splitting
//!
//! ```text
//! exp(-i V dt/2ħ) · F⁻¹ exp(-i ħ k² dt/2m) F · exp(-i V dt/2ħ)
//! ```
//!
//! For a linear potential every commutator beyond the second is a c-number,
//! so the splitting error is a pure global phase of `-m g² t dt²/(12ħ)`:
//! shapes and expectation values are exact, phases converge at second order.

mod dump;
mod gauge;
mod grid;
mod spectral;
mod wavefunction;

use num_complex::Complex64;

pub use dump::{read_dump, write_dump};
pub use gauge::{gauge_check, gauge_map, schrodinger_residual, GaugeCheck, Trajectory};
pub use grid::Grid;
pub use wavefunction::{gaussian_packet, overlap_phase, Frame, Wavefunction, CONTAINMENT_RATIO, MIN_OVERLAP};

use crate::error::{Error, Result};
use crate::units::PhysParams;
use spectral::Spectral;

/// Largest allowed `|dt| E_max / ħ` for a split step.
pub const MAX_STEP_PHASE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Potential {
    /// `V = 0`.
    Free,
    /// `V = m g x`, zero at `x = 0`. Requires `g > 0`.
    LinearGravity,
}

impl Potential {
    pub fn value(self, p: &PhysParams, x: f64) -> f64 {
        match self {
            Potential::Free => 0.0,
            Potential::LinearGravity => p.m * p.g * x,
        }
    }

    fn check(self, p: &PhysParams) -> Result<()> {
        p.validate()?;
        if self == Potential::LinearGravity && p.g <= 0.0 {
            return Err(Error::param("g", "linear gravity needs g > 0"));
        }
        Ok(())
    }
}

/// Largest kinetic plus potential energy representable on `grid`.
pub fn energy_bound(grid: &Grid, v: Potential, p: &PhysParams) -> f64 {
    let pk = p.hbar * grid.k_max();
    pk * pk / (2.0 * p.m) + v.value(p, grid.max_abs_x()).abs()
}

/// A step size comfortably inside the accuracy guard.
pub fn stable_dt(grid: &Grid, v: Potential, p: &PhysParams) -> f64 {
    0.8 * MAX_STEP_PHASE * p.hbar / energy_bound(grid, v, p)
}

fn check_step(dt: f64, e_max: f64, hbar: f64) -> Result<()> {
    if !dt.is_finite() {
        return Err(Error::param("dt", "must be finite"));
    }
    let phase = dt.abs() * e_max / hbar;
    if phase >= MAX_STEP_PHASE {
        return Err(Error::StepTooLarge(phase));
    }
    Ok(())
}

fn phases(values: impl Iterator<Item = f64>, scale: f64) -> Vec<Complex64> {
    values.map(|v| Complex64::from_polar(1.0, -v * scale)).collect()
}

/// Advances `psi` by `steps` split steps of size `dt` (negative `dt` runs
/// backwards). The edge amplitude is checked after every step in both
/// position and momentum space.
pub fn evolve(mut psi: Wavefunction, v: Potential, p: &PhysParams, dt: f64, steps: usize) -> Result<Wavefunction> {
    v.check(p)?;
    match (v, psi.frame) {
        (_, Frame::GravitationalInteraction) => {
            return Err(Error::FrameMismatch {
                expected: "gravitational or freely-falling",
                got: psi.frame.name(),
            })
        }
        (Potential::LinearGravity, Frame::FreelyFalling) => {
            return Err(Error::FrameMismatch {
                expected: Frame::Gravitational.name(),
                got: psi.frame.name(),
            })
        }
        _ => {}
    }
    check_step(dt, energy_bound(&psi.grid, v, p), p.hbar)?;
    if steps == 0 {
        return Ok(psi);
    }

    let grid = psi.grid;
    let mut fourier = Spectral::new(&grid);
    let drift = phases(fourier.k.iter().map(|k| k * k), p.hbar * dt / (2.0 * p.m));
    let kicks = match v {
        Potential::Free => None,
        Potential::LinearGravity => {
            let vs: Vec<f64> = grid.xs().map(|x| v.value(p, x)).collect();
            Some((
                phases(vs.iter().copied(), dt / (2.0 * p.hbar)),
                phases(vs.iter().copied(), dt / p.hbar),
            ))
        }
    };

    let amps = &mut psi.amps;
    if let Some((half, _)) = &kicks {
        amps.iter_mut().zip(half).for_each(|(z, k)| *z *= k);
    }
    for step in 0..steps {
        fourier.forward(amps);
        amps.iter_mut().zip(&drift).for_each(|(z, d)| *z *= d);
        let spectral_edge = spectral::edge_ratio(amps, true);
        fourier.inverse(amps);
        if let Some((half, full)) = &kicks {
            let kick = if step + 1 == steps { half } else { full };
            amps.iter_mut().zip(kick).for_each(|(z, k)| *z *= k);
        }
        let ratio = spectral_edge.max(spectral::edge_ratio(amps, false));
        if ratio > CONTAINMENT_RATIO {
            return Err(Error::Containment { step: step + 1, ratio });
        }
    }
    psi.t += dt * steps as f64;
    Ok(psi)
}

/// Evolves to `t_final` with the smallest number of equal steps no longer than `max_dt`.
pub fn evolve_to(psi: Wavefunction, v: Potential, p: &PhysParams, t_final: f64, max_dt: f64) -> Result<Wavefunction> {
    let span = t_final - psi.t;
    if span == 0.0 {
        return Ok(psi);
    }
    let steps = (span.abs() / max_dt).ceil().max(1.0) as usize;
    let t0 = psi.t;
    let mut out = evolve(psi, v, p, span / steps as f64, steps)?;
    out.t = t0 + span;
    Ok(out)
}

/// Exact free propagation by `dt` in one spectral step (no splitting).
pub fn free_propagate(mut psi: Wavefunction, p: &PhysParams, dt: f64) -> Result<Wavefunction> {
    if psi.frame == Frame::GravitationalInteraction {
        return Err(Error::FrameMismatch {
            expected: "gravitational or freely-falling",
            got: psi.frame.name(),
        });
    }
    let mut fourier = Spectral::new(&psi.grid);
    let c = p.hbar * dt / (2.0 * p.m);
    fourier.apply_diagonal(&mut psi.amps, |k| c * k * k);
    psi.t += dt;
    psi.check_contained(0)?;
    Ok(psi)
}

/// Energy bound for the interaction-picture Hamiltonian `m g x + g t p` up to time `t_max`.
pub fn interaction_energy_bound(grid: &Grid, p: &PhysParams, t_max: f64) -> f64 {
    p.m * p.g * grid.max_abs_x() + p.g * t_max.abs() * p.hbar * grid.k_max()
}

/// Split-step evolution of a gravitational-frame state in the interaction
/// picture with respect to free motion.
///
/// The generator is `H_I(t) = m g x + g t p`: a kick in position space and
/// a rigid translation by `g t dt` in momentum space. `psi` must already be
/// tagged [`Frame::GravitationalInteraction`]; at `t = 0` the two pictures agree.
pub fn evolve_interaction(mut psi: Wavefunction, p: &PhysParams, dt: f64, steps: usize) -> Result<Wavefunction> {
    Potential::LinearGravity.check(p)?;
    if psi.frame != Frame::GravitationalInteraction {
        return Err(Error::FrameMismatch {
            expected: Frame::GravitationalInteraction.name(),
            got: psi.frame.name(),
        });
    }
    let t0 = psi.t;
    let t_end = t0 + dt * steps as f64;
    check_step(dt, interaction_energy_bound(&psi.grid, p, t0.abs().max(t_end.abs())), p.hbar)?;
    if steps == 0 {
        return Ok(psi);
    }
    let grid = psi.grid;
    let mut fourier = Spectral::new(&grid);
    let vs: Vec<f64> = grid.xs().map(|x| p.m * p.g * x).collect();
    let half = phases(vs.iter().copied(), dt / (2.0 * p.hbar));
    let full = phases(vs.iter().copied(), dt / p.hbar);

    let amps = &mut psi.amps;
    amps.iter_mut().zip(&half).for_each(|(z, k)| *z *= k);
    for step in 0..steps {
        let t_mid = t0 + (step as f64 + 0.5) * dt;
        let shift = p.g * t_mid * dt;
        fourier.forward(amps);
        amps.iter_mut()
            .zip(&fourier.k)
            .for_each(|(z, &k)| *z *= Complex64::from_polar(1.0, -k * shift));
        let spectral_edge = spectral::edge_ratio(amps, true);
        fourier.inverse(amps);
        let kick = if step + 1 == steps { &half } else { &full };
        amps.iter_mut().zip(kick).for_each(|(z, k)| *z *= k);
        let ratio = spectral_edge.max(spectral::edge_ratio(amps, false));
        if ratio > CONTAINMENT_RATIO {
            return Err(Error::Containment { step: step + 1, ratio });
        }
    }
    psi.t = t_end;
    Ok(psi)
}

/// Re-applies the free evolution `exp(-i p² t/2mħ)` to an interaction-picture
/// state, giving the ordinary gravitational-frame wavefunction at the same `t`.
pub fn interaction_to_lab(mut psi: Wavefunction, p: &PhysParams) -> Result<Wavefunction> {
    if psi.frame != Frame::GravitationalInteraction {
        return Err(Error::FrameMismatch {
            expected: Frame::GravitationalInteraction.name(),
            got: psi.frame.name(),
        });
    }
    let mut fourier = Spectral::new(&psi.grid);
    let c = p.hbar * psi.t / (2.0 * p.m);
    fourier.apply_diagonal(&mut psi.amps, |k| c * k * k);
    psi.frame = Frame::Gravitational;
    psi.check_contained(0)?;
    Ok(psi)
}

/// `ψ(x) -> ψ(x - shift)`, exact for band-limited states.
pub fn translate(mut psi: Wavefunction, shift: f64) -> Result<Wavefunction> {
    let mut fourier = Spectral::new(&psi.grid);
    fourier.translate(&mut psi.amps, shift);
    psi.check_contained(0)?;
    Ok(psi)
}

/// `ψ(x) -> exp(i p x/ħ) ψ(x)`.
pub fn boost(mut psi: Wavefunction, momentum: f64, hbar: f64) -> Result<Wavefunction> {
    let grid = psi.grid;
    psi.amps
        .iter_mut()
        .zip(grid.xs())
        .for_each(|(z, x)| *z *= Complex64::from_polar(1.0, momentum * x / hbar));
    psi.check_contained(0)?;
    Ok(psi)
}

/// `H ψ` with the kinetic term applied spectrally.
pub fn apply_hamiltonian(psi: &Wavefunction, v: Potential, p: &PhysParams) -> Vec<Complex64> {
    let mut fourier = Spectral::new(&psi.grid);
    let mut kin = psi.amps.clone();
    fourier.forward(&mut kin);
    let c = p.hbar * p.hbar / (2.0 * p.m);
    kin.iter_mut().zip(&fourier.k).for_each(|(z, &k)| *z *= c * k * k);
    fourier.inverse(&mut kin);
    kin.iter_mut()
        .zip(psi.grid.xs())
        .zip(&psi.amps)
        .for_each(|((h, x), z)| *h += v.value(p, x) * z);
    kin
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> PhysParams {
        PhysParams::with_mgh(1.0, 1.0, 1.0)
    }

    fn grid() -> Grid {
        Grid::centered(0.0, 64.0, 512).unwrap()
    }

    #[test]
    fn free_packet_at_rest_stays_centred() {
        let p = PhysParams::with_mgh(1.0, 0.0, 1.0);
        let psi = gaussian_packet(&grid(), 0.0, 0.0, 1.0, 1.0).unwrap();
        let dt = stable_dt(&grid(), Potential::Free, &p);
        let out = evolve(psi, Potential::Free, &p, dt, 400).unwrap();
        assert!(out.mean_x().abs() < 1e-10);
        assert!((out.t - 400.0 * dt).abs() < 1e-15);
    }

    #[test]
    fn free_width_follows_dispersion_law() {
        let p = PhysParams::with_mgh(1.0, 0.0, 1.0);
        let psi = gaussian_packet(&grid(), 0.0, 0.0, 1.0, 1.0).unwrap();
        let out = evolve_to(psi, Potential::Free, &p, 1.0, stable_dt(&grid(), Potential::Free, &p)).unwrap();
        let expected = (1.0f64 + 0.25).sqrt();
        assert!(((out.width() - expected) / expected).abs() < 1e-8);
    }

    #[test]
    fn linear_potential_follows_classical_trajectory() {
        let p = unit();
        let psi = gaussian_packet(&grid(), 1.0, 0.0, 1.0, 1.0).unwrap();
        let out = evolve_to(psi, Potential::LinearGravity, &p, 0.5, stable_dt(&grid(), Potential::LinearGravity, &p)).unwrap();
        assert!((out.mean_x() - 0.875).abs() < 1e-8);
        assert!((out.mean_p(1.0) + 0.5).abs() < 1e-8);
    }

    #[test]
    fn exact_free_step_matches_split_free_evolution() {
        let p = PhysParams::with_mgh(0.7, 0.0, 1.0);
        let psi = gaussian_packet(&grid(), 0.0, 0.4, 1.0, 1.0).unwrap();
        let a = free_propagate(psi.clone(), &p, 0.8).unwrap();
        let b = evolve_to(psi, Potential::Free, &p, 0.8, stable_dt(&grid(), Potential::Free, &p)).unwrap();
        let z = a.inner(&b).unwrap();
        assert!((z.norm() - 1.0).abs() < 1e-12);
        assert!(z.arg().abs() < 1e-10);
    }

    #[test]
    fn step_guard() {
        let p = unit();
        let psi = gaussian_packet(&grid(), 0.0, 0.0, 1.0, 1.0).unwrap();
        let e = energy_bound(&grid(), Potential::LinearGravity, &p);
        assert!(matches!(
            evolve(psi.clone(), Potential::LinearGravity, &p, 0.6 / e, 1),
            Err(Error::StepTooLarge(_))
        ));
        assert!(evolve(psi, Potential::LinearGravity, &p, 0.4 / e, 1).is_ok());
    }

    #[test]
    fn gravity_needs_positive_field_and_right_frame() {
        let psi = gaussian_packet(&grid(), 0.0, 0.0, 1.0, 1.0).unwrap();
        let flat = PhysParams::with_mgh(1.0, 0.0, 1.0);
        assert!(evolve(psi.clone(), Potential::LinearGravity, &flat, 1e-3, 1).is_err());
        let falling = psi.in_frame(Frame::FreelyFalling);
        assert!(matches!(
            evolve(falling, Potential::LinearGravity, &unit(), 1e-3, 1),
            Err(Error::FrameMismatch { .. })
        ));
    }

    #[test]
    fn containment_loss_names_the_step() {
        let p = unit();
        let g = Grid::centered(0.0, 24.0, 256).unwrap();
        let psi = gaussian_packet(&g, 0.0, 0.0, 1.0, 1.0).unwrap();
        let dt = stable_dt(&g, Potential::LinearGravity, &p);
        match evolve(psi, Potential::LinearGravity, &p, dt, 100_000) {
            Err(Error::Containment { step, .. }) => assert!(step > 1 && step < 100_000),
            other => panic!("expected containment error, got {other:?}"),
        }
    }

    #[test]
    fn interaction_picture_matches_lab_frame() {
        let p = PhysParams::with_mgh(1.0, 1.0, 1.0);
        let g = Grid::centered(0.0, 64.0, 1024).unwrap();
        let psi = gaussian_packet(&g, 1.0, 0.0, 1.0, 1.0).unwrap();
        let t = 0.9;
        let lab = evolve_to(psi.clone(), Potential::LinearGravity, &p, t, stable_dt(&g, Potential::LinearGravity, &p)).unwrap();
        let steps = 900;
        let inter = evolve_interaction(psi.in_frame(Frame::GravitationalInteraction), &p, t / steps as f64, steps).unwrap();
        let back = interaction_to_lab(inter, &p).unwrap();
        let z = lab.inner(&back).unwrap();
        assert!((z.norm() - 1.0).abs() < 1e-10, "{}", z.norm());
        assert!(z.arg().abs() < 1e-6, "{}", z.arg());
    }

    #[test]
    fn translate_and_boost_round_trip() {
        let psi = gaussian_packet(&grid(), 0.0, 0.0, 1.0, 1.0).unwrap();
        let moved = translate(psi.clone(), 2.5).unwrap();
        assert!((moved.mean_x() - 2.5).abs() < 1e-10);
        let back = translate(moved, -2.5).unwrap();
        assert!((back.inner(&psi).unwrap() - 1.0).norm() < 1e-12);
        let kicked = boost(psi, 1.5, 2.0).unwrap();
        assert!((kicked.mean_p(2.0) - 1.5).abs() < 1e-8);
    }

    #[test]
    fn hamiltonian_of_plane_wave() {
        let p = PhysParams::with_mgh(2.0, 0.0, 1.0);
        let g = Grid::new(0.0, 2.0 * std::f64::consts::PI, 64).unwrap();
        let amps: Vec<Complex64> = g.xs().map(|x| Complex64::from_polar(1.0, 3.0 * x)).collect();
        let psi = Wavefunction::from_amps(g, amps.clone(), Frame::FreelyFalling, 0.0).unwrap();
        let h = apply_hamiltonian(&psi, Potential::Free, &p);
        for (a, b) in h.iter().zip(&amps) {
            assert!((a - b * 2.25).norm() < 1e-12);
        }
    }
}
