use std::f64::consts::PI;

use num_complex::Complex64;

use super::grid::Grid;
use super::spectral::{edge_ratio, Spectral};
use crate::error::{Error, Result};

/// Edge amplitude allowed relative to the peak before a state counts as
/// touching the periodic boundary.
pub const CONTAINMENT_RATIO: f64 = 1e-8;

/// Overlap magnitude below which a relative phase is meaningless.
pub const MIN_OVERLAP: f64 = 0.1;

/// Coordinate system (and picture) a wavefunction is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Frame {
    /// At rest in the uniform field, `H = p²/2m + m g x`.
    Gravitational,
    /// Comoving with free fall, `H = p²/2m`.
    FreelyFalling,
    /// Gravitational frame with the free kinetic evolution divided out
    /// (interaction picture). The packet neither spreads nor shears, so
    /// narrow packets can be followed for long times on small grids.
    GravitationalInteraction,
}

impl Frame {
    pub fn name(self) -> &'static str {
        match self {
            Frame::Gravitational => "gravitational",
            Frame::FreelyFalling => "freely-falling",
            Frame::GravitationalInteraction => "gravitational-interaction",
        }
    }

    pub(crate) fn tag(self) -> u64 {
        match self {
            Frame::Gravitational => 0,
            Frame::FreelyFalling => 1,
            Frame::GravitationalInteraction => 2,
        }
    }

    pub(crate) fn from_tag(tag: u64) -> Option<Self> {
        match tag {
            0 => Some(Frame::Gravitational),
            1 => Some(Frame::FreelyFalling),
            2 => Some(Frame::GravitationalInteraction),
            _ => None,
        }
    }
}

/// Complex amplitudes on a [`Grid`], normalised so that `Σ|ψ|² dx = 1`.
///
/// No operation in this crate rescales or rephases a wavefunction after
/// construction: the global phase is physical.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavefunction {
    pub grid: Grid,
    pub amps: Vec<Complex64>,
    pub frame: Frame,
    pub t: f64,
}

impl Wavefunction {
    /// Wraps raw amplitudes. The caller is responsible for normalisation.
    pub fn from_amps(grid: Grid, amps: Vec<Complex64>, frame: Frame, t: f64) -> Result<Self> {
        if amps.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(Wavefunction { grid, amps, frame, t })
    }

    pub fn in_frame(mut self, frame: Frame) -> Self {
        self.frame = frame;
        self
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    pub fn mean_x(&self) -> f64 {
        let dx = self.grid.dx();
        self.grid
            .xs()
            .zip(&self.amps)
            .map(|(x, z)| x * z.norm_sqr())
            .sum::<f64>()
            * dx
            / self.norm_sq()
    }

    pub fn variance_x(&self) -> f64 {
        let mean = self.mean_x();
        let dx = self.grid.dx();
        self.grid
            .xs()
            .zip(&self.amps)
            .map(|(x, z)| (x - mean).powi(2) * z.norm_sqr())
            .sum::<f64>()
            * dx
            / self.norm_sq()
    }

    pub fn width(&self) -> f64 {
        self.variance_x().sqrt()
    }

    /// `<p>` from the discrete spectrum.
    pub fn mean_p(&self, hbar: f64) -> f64 {
        let mut fourier = Spectral::new(&self.grid);
        let mut data = self.amps.clone();
        fourier.forward(&mut data);
        let (num, den) = data
            .iter()
            .zip(&fourier.k)
            .fold((0.0, 0.0), |(num, den), (z, &k)| {
                let w = z.norm_sqr();
                (num + k * w, den + w)
            });
        hbar * num / den
    }

    /// Edge-to-peak amplitude ratio in position space.
    pub fn edge_ratio(&self) -> f64 {
        edge_ratio(&self.amps, false)
    }

    /// Edge-to-peak amplitude ratio in momentum space.
    pub fn spectral_edge_ratio(&self) -> f64 {
        let mut fourier = Spectral::new(&self.grid);
        let mut data = self.amps.clone();
        fourier.forward(&mut data);
        edge_ratio(&data, true)
    }

    pub fn is_contained(&self) -> bool {
        self.edge_ratio() <= CONTAINMENT_RATIO && self.spectral_edge_ratio() <= CONTAINMENT_RATIO
    }

    pub(crate) fn check_contained(&self, step: usize) -> Result<()> {
        let ratio = self.edge_ratio().max(self.spectral_edge_ratio());
        if ratio > CONTAINMENT_RATIO {
            return Err(Error::Containment { step, ratio });
        }
        Ok(())
    }

    /// `<self|other> = Σ conj(a) b dx`.
    pub fn inner(&self, other: &Wavefunction) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let s: Complex64 = self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(s * self.grid.dx())
    }

    /// `|<self|other>|`.
    pub fn fidelity(&self, other: &Wavefunction) -> Result<f64> {
        Ok(self.inner(other)?.norm())
    }
}

/// Normalised Gaussian `exp(-(x-x0)²/(4σ²) + i p0 x/ħ)` at `t = 0` in the
/// gravitational frame.
pub fn gaussian_packet(grid: &Grid, x0: f64, p0: f64, sigma: f64, hbar: f64) -> Result<Wavefunction> {
    if !(x0.is_finite() && p0.is_finite() && sigma.is_finite() && hbar.is_finite()) || sigma <= 0.0 || hbar <= 0.0 {
        return Err(Error::param("packet", "x0, p0, sigma, hbar must be finite with sigma, hbar > 0"));
    }
    let last = grid.x(grid.len() - 1);
    if x0 - 5.0 * sigma < grid.x_min() || x0 + 5.0 * sigma > last {
        return Err(Error::GridTooSmall(format!(
            "packet at {x0} with sigma {sigma} is within 5 sigma of the grid edge [{}, {last}]",
            grid.x_min()
        )));
    }
    if sigma < 4.0 * grid.dx() {
        return Err(Error::GridTooSmall(format!(
            "sigma {sigma} is below 4 dx = {}",
            4.0 * grid.dx()
        )));
    }
    let amps: Vec<Complex64> = grid
        .xs()
        .map(|x| {
            let u = x - x0;
            Complex64::from_polar((-u * u / (4.0 * sigma * sigma)).exp(), p0 * x / hbar)
        })
        .collect();
    let mut psi = Wavefunction {
        grid: *grid,
        amps,
        frame: Frame::Gravitational,
        t: 0.0,
    };
    let scale = psi.norm_sq().sqrt().recip();
    for z in &mut psi.amps {
        *z *= scale;
    }
    let ratio = psi.edge_ratio().max(psi.spectral_edge_ratio());
    if ratio > CONTAINMENT_RATIO {
        return Err(Error::GridTooSmall(format!(
            "packet not contained: edge ratio {ratio:.3e} (needs roughly 8.6 sigma of margin and k_max > 5/sigma + |p0|/hbar)"
        )));
    }
    Ok(psi)
}

/// `arg <a|b>` in `(-π, π]`.
pub fn overlap_phase(a: &Wavefunction, b: &Wavefunction) -> Result<f64> {
    let z = a.inner(b)?;
    if z.norm() < MIN_OVERLAP {
        return Err(Error::NoOverlap {
            magnitude: z.norm(),
            sample: None,
        });
    }
    let phase = z.arg();
    Ok(if phase == -PI { PI } else { phase })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::centered(0.0, 40.0, 1024).unwrap()
    }

    #[test]
    fn packet_moments() {
        let psi = gaussian_packet(&grid(), 0.7, 0.0, 1.0, 1.0).unwrap();
        assert!((psi.norm_sq() - 1.0).abs() < 1e-12);
        assert!((psi.mean_x() - 0.7).abs() < 1e-10);
        assert!((psi.variance_x() - 1.0).abs() < 1e-8);
        assert!(psi.mean_p(1.0).abs() < 1e-10);
        assert!(psi.is_contained());
    }

    #[test]
    fn packet_momentum_from_spectrum() {
        let psi = gaussian_packet(&grid(), 0.0, 2.0, 1.0, 1.0).unwrap();
        assert!((psi.mean_p(1.0) - 2.0).abs() < 2e-8);
    }

    #[test]
    fn packet_requires_room() {
        let g = grid();
        assert!(matches!(gaussian_packet(&g, 18.0, 0.0, 1.0, 1.0), Err(Error::GridTooSmall(_))));
        // inside 5 sigma but amplitude still visible at the edge
        assert!(matches!(gaussian_packet(&g, 13.0, 0.0, 1.0, 1.0), Err(Error::GridTooSmall(_))));
        // narrower than 4 dx
        assert!(matches!(gaussian_packet(&g, 0.0, 0.0, 0.1, 1.0), Err(Error::GridTooSmall(_))));
        // momentum beyond the grid's band
        assert!(matches!(gaussian_packet(&g, 0.0, 78.0, 1.0, 1.0), Err(Error::GridTooSmall(_))));
    }

    #[test]
    fn overlap_phase_identities() {
        let a = gaussian_packet(&grid(), 0.0, 0.5, 1.3, 1.0).unwrap();
        assert_eq!(overlap_phase(&a, &a).unwrap(), 0.0);
        let mut b = a.clone();
        let rot = Complex64::from_polar(1.0, 0.7);
        b.amps.iter_mut().for_each(|z| *z *= rot);
        assert!((overlap_phase(&a, &b).unwrap() - 0.7).abs() < 1e-12);
        let far = gaussian_packet(&grid(), 8.0, 0.0, 1.0, 1.0).unwrap();
        assert!(matches!(overlap_phase(&a, &far), Err(Error::NoOverlap { .. })));
        let other = gaussian_packet(&Grid::centered(0.0, 40.0, 512).unwrap(), 0.0, 0.0, 1.0, 1.0).unwrap();
        assert_eq!(overlap_phase(&a, &other), Err(Error::GridMismatch));
    }

    #[test]
    fn overlap_phase_range_is_half_open() {
        let a = gaussian_packet(&grid(), 0.0, 0.0, 1.0, 1.0).unwrap();
        let mut b = a.clone();
        b.amps.iter_mut().for_each(|z| *z = -*z);
        assert_eq!(overlap_phase(&a, &b).unwrap(), PI);
    }
}
