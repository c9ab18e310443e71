//! The freely evolving coherent state in dimensionless form.
//!
//! Position is `y = x / sigma0`, time is `tau = omega t`. With
//! `s = sigma_t / sigma0 = exp(i tau)` the evolved packet reads
//!
//! ```text
//! psi(y, tau) = (2 pi)^(-1/4) s^(-1/2) exp(-(a + b y + c y^2) / s)
//! a = i p^2 sin(tau) / 2,   b = -i p / sqrt(2),   c = exp(i tau) / 4
//! ```
//!
//! where `p = p_tilde`. The laboratory coefficients follow from
//! `a = kappa A`, `b = kappa sigma0 B`, `c = kappa sigma0^2 C` with
//! `kappa = sqrt(m omega) / ((2 hbar)^(3/2) sigma0) = m omega / (2 hbar^2)`.
//! The density is a unit-variance Gaussian centred at `sqrt(2) p sin(tau)`.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use num_complex::Complex64;

use crate::specfun::erfc_real;

/// Coefficients of the analytically evolved coherent state at phase `tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolvedGaussian {
    pub p_tilde: f64,
    pub tau: f64,
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    /// `sigma_t / sigma0`; always of unit modulus.
    pub sigma_t: Complex64,
}

impl EvolvedGaussian {
    pub fn new(p_tilde: f64, tau: f64) -> Self {
        let (sin, cos) = tau.sin_cos();
        let sigma_t = Complex64::new(cos, sin);
        Self {
            p_tilde,
            tau,
            a: Complex64::new(0.0, 0.5 * p_tilde * p_tilde * sin),
            b: Complex64::new(0.0, -p_tilde * FRAC_1_SQRT_2),
            c: sigma_t * 0.25,
            sigma_t,
        }
    }

    /// Wavefunction at dimensionless position `y`.
    pub fn psi(&self, y: f64) -> Complex64 {
        let exponent = -(self.a + self.b * y + self.c * y * y) / self.sigma_t;
        exponent.exp() * self.sigma_t.sqrt().inv() * (2.0 * PI).powf(-0.25)
    }

    /// `|psi|^2` in closed form.
    pub fn density(&self, y: f64) -> f64 {
        let d = y - self.center();
        (-0.5 * d * d).exp() / (2.0 * PI).sqrt()
    }

    /// Mean position `sqrt(2) p_tilde sin(tau)`.
    pub fn center(&self) -> f64 {
        center(self.p_tilde, self.tau)
    }

    /// Mean wavenumber `p_tilde cos(tau) / sqrt(2)`.
    pub fn wavenumber(&self) -> f64 {
        self.p_tilde * self.tau.cos() * FRAC_1_SQRT_2
    }

    pub fn marginal_plus(&self) -> f64 {
        marginal_plus(self.p_tilde, self.tau)
    }

    pub fn marginal_minus(&self) -> f64 {
        marginal_minus(self.p_tilde, self.tau)
    }
}

/// Packet centre `sqrt(2) p_tilde sin(tau)` in units of sigma0.
pub fn center(p_tilde: f64, tau: f64) -> f64 {
    SQRT_2 * p_tilde * tau.sin()
}

/// Probability of outcome +1 (particle at `x < 0`).
pub fn marginal_plus(p_tilde: f64, tau: f64) -> f64 {
    0.5 * erfc_real(center(p_tilde, tau) * FRAC_1_SQRT_2)
}

/// Probability of outcome -1 (particle at `x > 0`).
pub fn marginal_minus(p_tilde: f64, tau: f64) -> f64 {
    0.5 * erfc_real(-center(p_tilde, tau) * FRAC_1_SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, integrate_halfline, Direction, Envelope, QuadConfig};
    use crate::units::{PhysicalParams, AMU, HBAR};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // Laboratory-unit wavefunction written directly from the dimensional
    // coefficients, in SI.
    fn psi_si(p: &PhysicalParams, x: f64, t: f64) -> Complex64 {
        let m = p.mass_amu * AMU;
        let w = p.omega;
        let (s, c) = (w * t).sin_cos();
        let a = Complex64::new(0.0, HBAR * p.p0 * p.p0 / (m * w).powi(2) * s);
        let b = Complex64::new(0.0, -2.0 * p.p0 * HBAR / (m * w));
        let cc = Complex64::new(HBAR * c, HBAR * s);
        let sigma_t = Complex64::new(c, s) / (2.0 * m * w / HBAR).sqrt();
        let expo = -(m * w).sqrt() * (a + b * x + cc * x * x) / ((2.0 * HBAR).powf(1.5) * sigma_t);
        ((2.0 * PI).sqrt() * sigma_t).inv().sqrt() * expo.exp()
    }

    #[test]
    fn matches_dimensional_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..3 {
            let mass = 10f64.powf(rng.gen_range(0.0..6.0));
            let omega = 10f64.powf(rng.gen_range(2.0..7.0));
            let probe = PhysicalParams::new(mass, omega, 0.0, 0.0, 1.0).unwrap();
            let p_tilde = rng.gen_range(-4.0..4.0);
            let p0 = p_tilde * probe.momentum_scale();
            let p = PhysicalParams::new(mass, omega, p0, 0.0, 1.0).unwrap();
            let sigma0 = p.sigma0();
            for _ in 0..20 {
                let tau = rng.gen_range(0.0..4.0 * PI);
                let y = rng.gen_range(-8.0..8.0);
                let lab = psi_si(&p, y * sigma0, tau / omega) * sigma0.sqrt();
                let ours = EvolvedGaussian::new(p_tilde, tau).psi(y);
                assert!((lab - ours).norm() < 1e-9 * ours.norm().max(1e-3), "{lab} vs {ours}");
            }
        }
    }

    #[test]
    fn peak_value_at_rest() {
        let g = EvolvedGaussian::new(0.0, 0.0);
        assert!((g.psi(0.0).norm() - (2.0 * PI).powf(-0.25)).abs() < 1e-15);
    }

    #[test]
    fn psi_and_density_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let p = rng.gen_range(-20.0..20.0);
            let tau = rng.gen_range(-10.0..10.0);
            let g = EvolvedGaussian::new(p, tau);
            let y = g.center() + rng.gen_range(-6.0..6.0);
            let d = g.density(y);
            assert!((g.psi(y).norm_sqr() - d).abs() < 1e-11 * d.max(1e-3));
        }
    }

    #[test]
    fn sigma_t_has_unit_modulus() {
        for k in 0..200 {
            let g = EvolvedGaussian::new(1.0, 0.1 * k as f64);
            assert!((g.sigma_t.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn norm_and_variance_are_conserved() {
        let cfg = QuadConfig::default();
        let p = 2.5;
        for k in 0..=16 {
            let tau = 4.0 * PI * k as f64 / 16.0;
            let g = EvolvedGaussian::new(p, tau);
            let c = g.center();
            let norm = integrate(|y| g.psi(y).norm_sqr(), c - 20.0, c + 20.0, &cfg).unwrap().value;
            assert!((norm - 1.0).abs() < 1e-10);
            let mean = integrate(|y| y * g.psi(y).norm_sqr(), c - 20.0, c + 20.0, &cfg).unwrap().value;
            assert!((mean - c).abs() < 1e-9);
            let var = integrate(|y| (y - mean).powi(2) * g.psi(y).norm_sqr(), c - 20.0, c + 20.0, &cfg)
                .unwrap()
                .value;
            assert!((var - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn center_follows_classical_orbit() {
        let g = EvolvedGaussian::new(3.0, PI / 2.0);
        assert!((g.center() - 3.0 * SQRT_2).abs() < 1e-14);
        assert!(EvolvedGaussian::new(3.0, PI).center().abs() < 1e-14);
    }

    #[test]
    fn marginals() {
        assert_eq!(marginal_plus(7.0, 0.0), 0.5);
        assert_eq!(marginal_minus(7.0, 0.0), 0.5);
        let expected = 0.5 * (1.0 - crate::specfun::erf_real(1.0));
        assert!((marginal_plus(1.0, PI / 2.0) - expected).abs() < 1e-15);
        assert!((marginal_plus(1.0, PI / 2.0) - 0.07865).abs() < 1e-5);
        assert!(marginal_plus(1e3, PI / 2.0) < 1e-300);
    }

    #[test]
    fn marginals_match_density_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let cfg = QuadConfig::default();
        for _ in 0..100 {
            let p = rng.gen_range(0.0..50.0);
            let tau = rng.gen_range(0.0..2.0 * PI);
            let g = EvolvedGaussian::new(p, tau);
            let env = Envelope::Gaussian {
                center: g.center(),
                width: 1.0,
            };
            let q = integrate_halfline(|y| g.density(y), 0.0, Direction::Minus, env, &cfg).unwrap();
            assert!((q.value - g.marginal_plus()).abs() < 1e-9);
        }
    }

    #[test]
    fn parity_swaps_marginals() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..200 {
            let p = rng.gen_range(-30.0..30.0);
            let tau = rng.gen_range(0.0..10.0);
            assert!((marginal_plus(p, tau) - marginal_minus(-p, tau)).abs() < 1e-12);
            assert!((marginal_plus(p, tau) + marginal_minus(p, tau) - 1.0).abs() < 1e-15);
        }
    }
}
