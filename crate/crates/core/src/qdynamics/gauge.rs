use num_complex::Complex64;

use super::spectral::Spectral;
use super::{apply_hamiltonian, energy_bound, evolve, free_propagate, stable_dt, Frame, Potential, Wavefunction};
use crate::error::{Error, Result};
use crate::phases::gauge_phase;
use crate::units::PhysParams;

/// Maps a freely-falling-frame state to the gravitational frame at the same `t`:
///
/// ```text
/// ψ_G(x, t) = exp(i Λ(x, t)/ħ) ψ_F(x + g t²/2, t),   Λ = -m g x t - m g² t³/6
/// ```
///
/// The coordinate shift is applied spectrally. The bilinear part of `Λ` is the
/// momentum `-m g t` of the falling packet; the cubic part is a global phase
/// that direct evolution under `V = m g x` reproduces.
///
/// The sign is fixed by requiring the mapped family to solve the gravitational
/// Schrödinger equation (see [`schrodinger_residual`]). In terms of the phase
/// reported by [`gauge_phase`], the pointwise factor is `exp(-i·phase)`.
pub fn gauge_map(psi_f: &Wavefunction, p: &PhysParams) -> Result<Wavefunction> {
    if psi_f.frame != Frame::FreelyFalling {
        return Err(Error::FrameMismatch {
            expected: Frame::FreelyFalling.name(),
            got: psi_f.frame.name(),
        });
    }
    let t = psi_f.t;
    let mut amps = psi_f.amps.clone();
    if t != 0.0 && p.g != 0.0 {
        let mut fourier = Spectral::new(&psi_f.grid);
        fourier.translate(&mut amps, -0.5 * p.g * t * t);
        for (z, x) in amps.iter_mut().zip(psi_f.grid.xs()) {
            *z *= Complex64::from_polar(1.0, -gauge_phase(p, x, t).phase);
        }
    }
    let out = Wavefunction {
        grid: psi_f.grid,
        amps,
        frame: Frame::Gravitational,
        t,
    };
    out.check_contained(0)?;
    Ok(out)
}

/// Outcome of comparing direct evolution with the gauge-mapped route.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaugeCheck {
    /// `|<direct|mapped>|`.
    pub fidelity: f64,
    /// `arg <direct|mapped>`.
    pub phase: f64,
    /// Split steps taken by the direct route.
    pub steps: usize,
}

/// Evolves `psi0` to time `t` twice: split-step under `V = m g x`, and exactly
/// as a free particle followed by [`gauge_map`]. `max_dt` defaults to
/// [`stable_dt`].
pub fn gauge_check(psi0: &Wavefunction, p: &PhysParams, t: f64, max_dt: Option<f64>) -> Result<GaugeCheck> {
    if psi0.frame != Frame::Gravitational {
        return Err(Error::FrameMismatch {
            expected: Frame::Gravitational.name(),
            got: psi0.frame.name(),
        });
    }
    let max_dt = max_dt.unwrap_or_else(|| stable_dt(&psi0.grid, Potential::LinearGravity, p));
    let span = t - psi0.t;
    let steps = (span.abs() / max_dt).ceil().max(1.0) as usize;
    let direct = evolve(psi0.clone(), Potential::LinearGravity, p, span / steps as f64, steps)?;
    let free = free_propagate(psi0.clone().in_frame(Frame::FreelyFalling), p, span)?;
    let mapped = gauge_map(&free, p)?;
    let z = direct.inner(&mapped)?;
    Ok(GaugeCheck {
        fidelity: z.norm(),
        phase: z.arg(),
        steps,
    })
}

/// A one-parameter family of states `t -> ψ(t)` whose time derivative the
/// residual probes.
#[derive(Debug, Clone)]
pub enum Trajectory {
    /// The same amplitudes at every time.
    Static(Wavefunction),
    /// Exact free propagation of the given state.
    Free(Wavefunction),
    /// Split-step evolution under `V = m g x`.
    Gravity(Wavefunction),
    /// Free propagation of a freely-falling state followed by [`gauge_map`].
    GaugeMapped(Wavefunction),
}

impl Trajectory {
    pub fn origin(&self) -> &Wavefunction {
        match self {
            Trajectory::Static(w) | Trajectory::Free(w) | Trajectory::Gravity(w) | Trajectory::GaugeMapped(w) => w,
        }
    }

    pub fn at(&self, t: f64, p: &PhysParams) -> Result<Wavefunction> {
        match self {
            Trajectory::Static(w) => Ok(Wavefunction { t, ..w.clone() }),
            Trajectory::Free(w) => free_propagate(w.clone(), p, t - w.t),
            Trajectory::Gravity(w) => {
                let span = t - w.t;
                let max_dt = stable_dt(&w.grid, Potential::LinearGravity, p);
                let steps = (span.abs() / max_dt).ceil().max(1.0) as usize;
                evolve(w.clone(), Potential::LinearGravity, p, span / steps as f64, steps)
            }
            Trajectory::GaugeMapped(w) => gauge_map(&free_propagate(w.clone(), p, t - w.t)?, p),
        }
    }
}

fn norm(v: &[Complex64], dx: f64) -> f64 {
    (v.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx).sqrt()
}

/// `‖iħ ∂ψ/∂t - Hψ‖ / ‖Hψ‖` for the family `traj` at time `t`.
///
/// The time derivative is a fourth-order centred difference of the family
/// itself; `H` is the Hamiltonian of `v`, applied spectrally. A family that
/// solves the equation scores at the discretisation floor; a state that does
/// not scores O(1).
pub fn schrodinger_residual(traj: &Trajectory, t: f64, v: Potential, p: &PhysParams) -> Result<f64> {
    let psi = traj.at(t, p)?;
    let dx = psi.grid.dx();
    let h = apply_hamiltonian(&psi, v, p);
    let h_norm = norm(&h, dx);
    if h_norm == 0.0 {
        return Err(Error::Domain("H ψ vanishes; residual undefined".into()));
    }
    let e_rms = h_norm / norm(&psi.amps, dx);
    let e_max = energy_bound(&psi.grid, Potential::LinearGravity, p)
        .max(energy_bound(&psi.grid, Potential::Free, p));
    let delta = (1e-3 * p.hbar / e_rms).min(0.2 * p.hbar / e_max);

    let plus1 = traj.at(t + delta, p)?;
    let minus1 = traj.at(t - delta, p)?;
    let plus2 = traj.at(t + 2.0 * delta, p)?;
    let minus2 = traj.at(t - 2.0 * delta, p)?;

    let i_hbar = Complex64::new(0.0, p.hbar);
    let scale = 1.0 / (12.0 * delta);
    let diff: Vec<Complex64> = (0..psi.amps.len())
        .map(|j| {
            let dpsi = (8.0 * (plus1.amps[j] - minus1.amps[j]) - (plus2.amps[j] - minus2.amps[j])) * scale;
            i_hbar * dpsi - h[j]
        })
        .collect();
    Ok(norm(&diff, dx) / h_norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qdynamics::{evolve_to, gaussian_packet, overlap_phase, Grid};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit() -> PhysParams {
        PhysParams::with_mgh(1.0, 1.0, 1.0)
    }

    fn grid() -> Grid {
        Grid::centered(0.0, 64.0, 512).unwrap()
    }

    #[test]
    fn map_is_identity_at_time_zero() {
        let psi = gaussian_packet(&grid(), 1.0, 0.3, 1.0, 1.0).unwrap().in_frame(Frame::FreelyFalling);
        let out = gauge_map(&psi, &unit()).unwrap();
        assert_eq!(out.amps, psi.amps);
        assert_eq!(out.frame, Frame::Gravitational);
    }

    #[test]
    fn map_preserves_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let x0 = rng.random_range(-3.0..3.0);
            let p0 = rng.random_range(-2.0..2.0);
            let sigma = rng.random_range(0.8..2.0);
            let t = rng.random_range(0.0..1.5);
            let psi = gaussian_packet(&grid(), x0, p0, sigma, 1.0).unwrap().in_frame(Frame::FreelyFalling);
            let psi = free_propagate(psi, &unit(), t).unwrap();
            let out = gauge_map(&psi, &unit()).unwrap();
            assert!((out.norm_sq() - psi.norm_sq()).abs() < 1e-12);
        }
    }

    #[test]
    fn map_rejects_wrong_frame() {
        let psi = gaussian_packet(&grid(), 0.0, 0.0, 1.0, 1.0).unwrap();
        assert!(matches!(gauge_map(&psi, &unit()), Err(Error::FrameMismatch { .. })));
    }

    #[test]
    fn map_reports_shift_out_of_grid() {
        let g = Grid::centered(0.0, 24.0, 256).unwrap();
        let psi = gaussian_packet(&g, -1.0, 0.0, 1.0, 1.0).unwrap().in_frame(Frame::FreelyFalling);
        let psi = Wavefunction { t: 4.0, ..psi };
        assert!(matches!(gauge_map(&psi, &unit()), Err(Error::Containment { .. })));
    }

    #[test]
    fn mapped_free_evolution_equals_direct_gravity_evolution() {
        let p = unit();
        let psi0 = gaussian_packet(&grid(), 1.0, 0.0, 1.0, 1.0).unwrap();
        let direct = evolve_to(psi0.clone(), Potential::LinearGravity, &p, 0.4, stable_dt(&grid(), Potential::LinearGravity, &p)).unwrap();
        let free = free_propagate(psi0.clone().in_frame(Frame::FreelyFalling), &p, 0.4).unwrap();
        let mapped = gauge_map(&free, &p).unwrap();
        assert!(direct.fidelity(&mapped).unwrap() >= 1.0 - 1e-6);
        assert!(overlap_phase(&direct, &mapped).unwrap().abs() <= 1e-5);
        let check = gauge_check(&psi0, &p, 0.4, None).unwrap();
        assert_eq!(check.fidelity, direct.fidelity(&mapped).unwrap());
        assert!(matches!(gauge_check(&free, &p, 0.4, None), Err(Error::FrameMismatch { .. })));
    }

    #[test]
    fn residuals() {
        let p = unit();
        let psi0 = gaussian_packet(&grid(), 1.0, 0.0, 1.0, 1.0).unwrap().in_frame(Frame::FreelyFalling);

        let free = schrodinger_residual(&Trajectory::Free(psi0.clone()), 0.0, Potential::Free, &p).unwrap();
        assert!(free <= 1e-6, "free {free}");

        let mapped = Trajectory::GaugeMapped(psi0.clone());
        let r = schrodinger_residual(&mapped, 0.3, Potential::LinearGravity, &p).unwrap();
        assert!(r <= 1e-5, "mapped {r}");

        let gravity = Trajectory::Gravity(psi0.clone().in_frame(Frame::Gravitational));
        let r = schrodinger_residual(&gravity, 0.0, Potential::LinearGravity, &p).unwrap();
        assert!(r <= 1e-5, "gravity {r}");

        // the free family is not a solution once the field is on
        let wrong = schrodinger_residual(&Trajectory::Free(psi0), 0.3, Potential::LinearGravity, &p).unwrap();
        assert!(wrong >= 0.1, "wrong {wrong}");
    }

    #[test]
    fn opposite_sign_convention_fails_the_residual() {
        // exp(-iΛ/ħ) with the same shift does not solve the gravitational equation
        let p = unit();
        let psi0 = gaussian_packet(&grid(), 1.0, 0.0, 1.0, 1.0).unwrap().in_frame(Frame::FreelyFalling);
        let t = 0.3;
        let family = |t: f64| -> Result<Wavefunction> {
            let mut w = gauge_map(&free_propagate(psi0.clone(), &p, t)?, &p)?;
            for (z, x) in w.amps.iter_mut().zip(w.grid.xs()) {
                *z *= Complex64::from_polar(1.0, 2.0 * gauge_phase(&p, x, t).phase);
            }
            Ok(w)
        };
        let snapshots: Vec<Wavefunction> = [-2.0, -1.0, 0.0, 1.0, 2.0]
            .iter()
            .map(|k| family(t + k * 1e-3).unwrap())
            .collect();
        let h = apply_hamiltonian(&snapshots[2], Potential::LinearGravity, &p);
        let dx = grid().dx();
        let diff: Vec<Complex64> = (0..h.len())
            .map(|j| {
                let d = (8.0 * (snapshots[3].amps[j] - snapshots[1].amps[j]) - (snapshots[4].amps[j] - snapshots[0].amps[j])) / 12e-3;
                Complex64::i() * d - h[j]
            })
            .collect();
        assert!(norm(&diff, dx) / norm(&h, dx) > 0.1);
    }

    #[test]
    fn noise_is_not_a_solution() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = grid();
        let mut amps: Vec<Complex64> = (0..g.len())
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let s = (amps.iter().map(|z| z.norm_sqr()).sum::<f64>() * g.dx()).sqrt();
        amps.iter_mut().for_each(|z| *z /= s);
        let noise = Wavefunction::from_amps(g, amps, Frame::Gravitational, 0.0).unwrap();
        let r = schrodinger_residual(&Trajectory::Static(noise), 0.0, Potential::LinearGravity, &unit()).unwrap();
        assert!(r >= 0.1);
    }
}
