//! Physical parameters, presets and the reversible rescaling used before any
//! numerical dynamics.
//!
//! Everything numerical in this crate runs at O(1) magnitudes. For the drop
//! experiment the natural scales are the arm separation `d`, the classical
//! fall time through it and the potential energy difference across it:
//!
//! ```text
//! L0 = d,   T0 = sqrt(2 d / g),   E0 = m g d
//! ```
//!
//! With `g = 0` there is no fall time and the dispersion time of a packet of
//! size `d` is used instead (`T0 = m d^2 / hbar`, `E0 = hbar / T0`).

use crate::error::{Error, Result};

/// CODATA 2018 values.
pub mod codata {
    pub const HBAR: f64 = 1.054_571_817e-34;
    pub const C: f64 = 299_792_458.0;
    pub const G: f64 = 6.674_30e-11;
    pub const NEUTRON_MASS: f64 = 1.674_927_498_04e-27;
    pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
    /// Rb-87 atomic mass in unified atomic mass units.
    pub const RB87_MASS_U: f64 = 86.909_180_531;
    pub const EARTH_MASS: f64 = 5.9722e24;
    pub const STANDARD_GRAVITY: f64 = 9.81;
}

/// Mass, field strength and constants for one experiment.
///
/// `grav_const` and `body_mass` only enter the general-relativistic clock
/// budget; the uniform-field physics uses `g` alone.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysParams {
    pub m: f64,
    pub g: f64,
    pub hbar: f64,
    pub c: f64,
    pub grav_const: f64,
    pub body_mass: f64,
    pub label: String,
}

impl PhysParams {
    /// Unit mass, field and action with `c = 100`, so relativistic
    /// corrections are small but visible. No central body.
    pub fn dimensionless() -> Self {
        PhysParams {
            m: 1.0,
            g: 1.0,
            hbar: 1.0,
            c: 100.0,
            grav_const: 0.0,
            body_mass: 0.0,
            label: "dimensionless".into(),
        }
    }

    pub fn neutron() -> Self {
        PhysParams {
            m: codata::NEUTRON_MASS,
            g: codata::STANDARD_GRAVITY,
            hbar: codata::HBAR,
            c: codata::C,
            grav_const: codata::G,
            body_mass: codata::EARTH_MASS,
            label: "neutron".into(),
        }
    }

    pub fn rb87() -> Self {
        PhysParams {
            m: codata::RB87_MASS_U * codata::ATOMIC_MASS_UNIT,
            label: "rb87".into(),
            ..Self::neutron()
        }
    }

    /// Looks up a named preset.
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "dimensionless" => Some(Self::dimensionless()),
            "neutron" => Some(Self::neutron()),
            "rb87" => Some(Self::rb87()),
            _ => None,
        }
    }

    pub const PRESETS: [&'static str; 3] = ["dimensionless", "neutron", "rb87"];

    /// Convenience constructor for unit-less work: `c`, `G` and `M` default to
    /// the dimensionless preset.
    pub fn with_mgh(m: f64, g: f64, hbar: f64) -> Self {
        PhysParams {
            m,
            g,
            hbar,
            label: "custom".into(),
            ..Self::dimensionless()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("m", self.m),
            ("g", self.g),
            ("hbar", self.hbar),
            ("c", self.c),
            ("G", self.grav_const),
            ("M", self.body_mass),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::param(name, format!("must be finite, got {v}")));
            }
        }
        if self.m <= 0.0 {
            return Err(Error::param("m", "must be > 0"));
        }
        if self.hbar <= 0.0 {
            return Err(Error::param("hbar", "must be > 0"));
        }
        if self.c <= 0.0 {
            return Err(Error::param("c", "must be > 0"));
        }
        if self.g < 0.0 {
            return Err(Error::param("g", "must be >= 0"));
        }
        if self.grav_const < 0.0 {
            return Err(Error::param("G", "must be >= 0"));
        }
        if self.body_mass < 0.0 {
            return Err(Error::param("M", "must be >= 0"));
        }
        Ok(())
    }

    /// Classical time to fall through `d` from rest; infinite when `g = 0`.
    pub fn fall_time(&self, d: f64) -> f64 {
        (2.0 * d / self.g).sqrt()
    }
}

/// Which rule produced a [`ScaleSystem`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleRule {
    /// `L0 = d`, `T0 = sqrt(2d/g)`, `E0 = m g d`.
    FallTime,
    /// `g = 0`: `T0 = m d^2 / hbar`, `E0 = hbar / T0`.
    Dispersion,
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleSystem {
    pub length: f64,
    pub time: f64,
    pub energy: f64,
    pub rule: ScaleRule,
}

impl ScaleSystem {
    pub fn identity() -> Self {
        ScaleSystem {
            length: 1.0,
            time: 1.0,
            energy: 1.0,
            rule: ScaleRule::Identity,
        }
    }

    /// Mass unit implied by the length, time and energy scales.
    pub fn mass(&self) -> f64 {
        self.energy * self.time * self.time / (self.length * self.length)
    }

    /// Action unit `E0 T0`; `hbar / action()` is the dimensionless Planck constant.
    pub fn action(&self) -> f64 {
        self.energy * self.time
    }
}

/// Picks scales so the drop experiment through `d` runs at O(1) magnitudes.
pub fn build_scales(p: &PhysParams, d: f64) -> Result<ScaleSystem> {
    p.validate()?;
    if !d.is_finite() || d <= 0.0 {
        return Err(Error::param("d", format!("must be finite and > 0, got {d}")));
    }
    let s = if p.g > 0.0 {
        ScaleSystem {
            length: d,
            time: (2.0 * d / p.g).sqrt(),
            energy: p.m * p.g * d,
            rule: ScaleRule::FallTime,
        }
    } else {
        let time = p.m * d * d / p.hbar;
        ScaleSystem {
            length: d,
            time,
            energy: p.hbar / time,
            rule: ScaleRule::Dispersion,
        }
    };
    let unit = s.action() / p.hbar;
    if ![s.length, s.time, s.energy, unit]
        .iter()
        .all(|v| v.is_finite() && *v > 0.0)
    {
        return Err(Error::param(
            "scales",
            format!("degenerate scale system {s:?} for parameters {p:?}"),
        ));
    }
    Ok(s)
}

/// Expresses `p` in units of `s`.
pub fn to_dimensionless(p: &PhysParams, s: &ScaleSystem) -> PhysParams {
    let mass = s.mass();
    PhysParams {
        m: p.m / mass,
        g: p.g * s.time * s.time / s.length,
        hbar: p.hbar / s.action(),
        c: p.c * s.time / s.length,
        grav_const: p.grav_const * mass * s.time * s.time / s.length.powi(3),
        body_mass: p.body_mass / mass,
        label: p.label.clone(),
    }
}

/// Inverse of [`to_dimensionless`].
pub fn from_dimensionless(p: &PhysParams, s: &ScaleSystem) -> PhysParams {
    let mass = s.mass();
    PhysParams {
        m: p.m * mass,
        g: p.g * s.length / (s.time * s.time),
        hbar: p.hbar * s.action(),
        c: p.c * s.length / s.time,
        grav_const: p.grav_const * s.length.powi(3) / (mass * s.time * s.time),
        body_mass: p.body_mass * mass,
        label: p.label.clone(),
    }
}
