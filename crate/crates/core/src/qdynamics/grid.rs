use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Uniform periodic grid `x_j = x_min + j dx`, `j = 0..n`, with `dx = (x_max - x_min)/n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n: usize,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(Error::param(
                "grid",
                format!("need finite x_max > x_min, got [{x_min}, {x_max}]"),
            ));
        }
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::param(
                "grid",
                format!("point count must be a power of two >= 16, got {n}"),
            ));
        }
        Ok(Grid { x_min, x_max, n })
    }

    /// Grid of `n` points centred on `center` with total width `width`.
    pub fn centered(center: f64, width: f64, n: usize) -> Result<Self> {
        Grid::new(center - 0.5 * width, center + 0.5 * width, n)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn dx(&self) -> f64 {
        self.width() / self.n as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx()
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|j| self.x(j))
    }

    /// Wavenumber of FFT bin `j` in standard order; bin `n/2` carries `-π/dx`.
    pub fn k(&self, j: usize) -> f64 {
        let dk = 2.0 * PI / self.width();
        if j < self.n / 2 {
            j as f64 * dk
        } else {
            (j as f64 - self.n as f64) * dk
        }
    }

    pub fn ks(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.k(j)).collect()
    }

    pub fn k_max(&self) -> f64 {
        PI / self.dx()
    }

    /// Largest `|x|` on the grid, which bounds a linear potential.
    pub fn max_abs_x(&self) -> f64 {
        self.x_min.abs().max(self.x(self.n - 1).abs())
    }
}
