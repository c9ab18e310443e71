//! Laboratory <-> dimensionless conversion.
//!
//! Frequencies quoted in "Hz" in the published tables are angular
//! frequencies (`T = 2 pi / omega`), so `omega` is always rad/s here.

use serde::{Deserialize, Serialize};

use crate::error::{LgiError, Result};

/// Reduced Planck constant, J s (CODATA 2018, exact).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Unified atomic mass unit, kg (CODATA 2018).
pub const AMU: f64 = 1.660_539_066_60e-27;

/// Oscillator description in SI units (mass in amu).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub mass_amu: f64,
    /// Angular frequency, rad/s.
    pub omega: f64,
    /// Initial peak momentum, kg m/s.
    pub p0: f64,
    /// First measurement instant, s.
    pub t1: f64,
    /// Spacing between consecutive measurements, s.
    pub dt: f64,
}

/// The three numbers that fully determine the LGI quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessParams {
    /// `p0 / sqrt(m omega hbar)`.
    pub p_tilde: f64,
    /// `omega t1`, radians.
    pub tau1: f64,
    /// `omega dt`, radians.
    pub dtau: f64,
}

impl PhysicalParams {
    pub fn new(mass_amu: f64, omega: f64, p0: f64, t1: f64, dt: f64) -> Result<Self> {
        let p = Self {
            mass_amu,
            omega,
            p0,
            t1,
            dt,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        positive("mass_amu", self.mass_amu)?;
        positive("omega", self.omega)?;
        positive("dt", self.dt)?;
        if !self.p0.is_finite() {
            return Err(LgiError::Parameter(format!("p0 must be finite, got {}", self.p0)));
        }
        if !(self.t1.is_finite() && self.t1 >= 0.0) {
            return Err(LgiError::Parameter(format!(
                "t1 must be finite and >= 0, got {}",
                self.t1
            )));
        }
        let s = self.sigma0();
        if !(s.is_finite() && s > 0.0) {
            return Err(LgiError::Parameter(format!(
                "derived sigma0 is not a positive finite length ({s})"
            )));
        }
        Ok(())
    }

    pub fn mass_kg(&self) -> f64 {
        self.mass_amu * AMU
    }

    /// Ground-state width `sqrt(hbar / (2 m omega))`, m.
    pub fn sigma0(&self) -> f64 {
        (HBAR / (2.0 * self.mass_kg() * self.omega)).sqrt()
    }

    /// Oscillation period `2 pi / omega`, s.
    pub fn period(&self) -> f64 {
        std::f64::consts::TAU / self.omega
    }

    /// Classical amplitude `p0 / (m omega)`, m.
    pub fn classical_amplitude(&self) -> f64 {
        self.p0 / (self.mass_kg() * self.omega)
    }

    /// Initial peak velocity `p0 / m`, m/s.
    pub fn v0(&self) -> f64 {
        self.p0 / self.mass_kg()
    }

    /// Momentum scale `sqrt(m omega hbar)`, kg m/s.
    pub fn momentum_scale(&self) -> f64 {
        (self.mass_kg() * self.omega * HBAR).sqrt()
    }

    pub fn to_dimensionless(&self) -> Result<DimensionlessParams> {
        self.validate()?;
        Ok(DimensionlessParams {
            p_tilde: self.p0 / self.momentum_scale(),
            tau1: self.omega * self.t1,
            dtau: self.omega * self.dt,
        })
    }

    /// Laboratory parameters for a given mass and frequency that map onto `d`.
    pub fn from_dimensionless(mass_amu: f64, omega: f64, d: &DimensionlessParams) -> Result<Self> {
        positive("mass_amu", mass_amu)?;
        positive("omega", omega)?;
        d.validate()?;
        let scale = (mass_amu * AMU * omega * HBAR).sqrt();
        Self::new(mass_amu, omega, d.p_tilde * scale, d.tau1 / omega, d.dtau / omega)
    }
}

impl DimensionlessParams {
    pub fn new(p_tilde: f64, tau1: f64, dtau: f64) -> Result<Self> {
        let d = Self {
            p_tilde,
            tau1,
            dtau,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.p_tilde.is_finite() {
            return Err(LgiError::Parameter(format!(
                "p_tilde must be finite, got {}",
                self.p_tilde
            )));
        }
        if !self.tau1.is_finite() {
            return Err(LgiError::Parameter(format!("tau1 must be finite, got {}", self.tau1)));
        }
        positive("dtau", self.dtau)
    }

    /// Classical amplitude in units of `sigma0`.
    pub fn amplitude_over_sigma0(&self) -> f64 {
        std::f64::consts::SQRT_2 * self.p_tilde
    }
}

/// Classical amplitude `p0 / (m omega)` in metres.
pub fn classical_amplitude(p: &PhysicalParams) -> f64 {
    p.classical_amplitude()
}

pub fn to_dimensionless(p: &PhysicalParams) -> Result<DimensionlessParams> {
    p.to_dimensionless()
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(LgiError::Parameter(format!("{name} must be finite and > 0, got {v}")))
    }
}
