//! Dichotomic "which half" measurement, post-measurement evolution and
//! joint probabilities.
//!
//! Internally the kernel works in oscillator units `u = y / sqrt(2)`. For a
//! packet measured at phase `tau1` and evolved for `D = tau2 - tau1`, let
//! `q = p sin(tau1)`, `k = p cos(tau1)` (the packet's position and wavenumber
//! at `tau1` in oscillator units). Completing the square in the half-line
//! propagator integral gives, up to a phase,
//!
//! ```text
//! psi_+(u) = pi^(-1/4) / 2 * exp(-q^2 / 2) * w( i z(u))   (kept x < 0)
//! psi_-(u) = pi^(-1/4) / 2 * exp(-q^2 / 2) * w(-i z(u))   (kept x > 0)
//! z(u) = chi(u) / sqrt(xi),  chi(u) = (q + i k - i u / sin D) / 2,
//! xi = (1 - i cot D) / 2
//! ```
//!
//! with the principal square root (`Re xi = 1/2 > 0`). `w(iz) = exp(z^2)
//! erfc(z)`, so this is the `(1 + erf)` form with the sign of the argument
//! fixed by the kept half. The two branches add up to the freely evolved
//! packet.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coherent;
use crate::error::{LgiError, Result};
use crate::quadrature::{integrate_halfline_panels, Direction, Envelope, QuadConfig, QuadResult};
use crate::specfun::{erfc_real, faddeeva_w};

/// `|sin D|` below which the propagator is treated as singular.
pub const SINGULAR_GUARD: f64 = 1e-6;

/// Branch probability below which a measurement is treated as deterministic.
/// The joint probabilities then follow from the unmeasured marginals with an
/// error below `2 sqrt(P) + P`, i.e. 2e-14.
pub const DETERMINISTIC_THRESHOLD: f64 = 1e-28;

/// Value of `Q(t)`: `+1` when the particle is found at `x < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub const ALL: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    pub fn value(self) -> i32 {
        match self {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Outcome::Plus => Outcome::Minus,
            Outcome::Minus => Outcome::Plus,
        }
    }

    /// Whether position `y` lies in this outcome's half-line.
    pub fn contains(self, y: f64) -> bool {
        match self {
            Outcome::Plus => y < 0.0,
            Outcome::Minus => y > 0.0,
        }
    }

    fn direction(self) -> Direction {
        match self {
            Outcome::Plus => Direction::Minus,
            Outcome::Minus => Direction::Plus,
        }
    }
}

/// Single-time probability of `outcome` for the unmeasured packet.
pub fn marginal(p_tilde: f64, tau: f64, outcome: Outcome) -> f64 {
    match outcome {
        Outcome::Plus => coherent::marginal_plus(p_tilde, tau),
        Outcome::Minus => coherent::marginal_minus(p_tilde, tau),
    }
}

/// Half-line truncation of the coherent state at `tau1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PostMeasurementState {
    pub outcome: Outcome,
    pub p_tilde: f64,
    pub tau1: f64,
    /// Unnormalized norm, equal to the marginal probability of the outcome.
    pub norm: f64,
}

pub fn project(p_tilde: f64, tau1: f64, outcome: Outcome) -> PostMeasurementState {
    PostMeasurementState {
        outcome,
        p_tilde,
        tau1,
        norm: marginal(p_tilde, tau1, outcome),
    }
}

impl PostMeasurementState {
    /// Unnormalized density at `tau1`.
    pub fn density(&self, y: f64) -> f64 {
        if self.outcome.contains(y) {
            coherent::EvolvedGaussian::new(self.p_tilde, self.tau1).density(y)
        } else if y == 0.0 {
            0.5 * coherent::EvolvedGaussian::new(self.p_tilde, self.tau1).density(y)
        } else {
            0.0
        }
    }

    /// Evolves the state to `tau2` in closed form.
    pub fn evolve_pm(&self, tau2: f64) -> Result<EvolvedPostMeasurement> {
        if !tau2.is_finite() {
            return Err(LgiError::Parameter(format!("tau2 must be finite, got {tau2}")));
        }
        let delta = tau2 - self.tau1;
        let (sin_d, cos_d) = delta.sin_cos();
        if sin_d.abs() < SINGULAR_GUARD {
            return Err(LgiError::SingularInterval {
                pair: None,
                sin_delta: sin_d.abs(),
            });
        }
        let (sin1, cos1) = self.tau1.sin_cos();
        let q = self.p_tilde * sin1;
        let k = self.p_tilde * cos1;
        let xi = Complex64::new(0.5, -0.5 * cos_d / sin_d);
        Ok(EvolvedPostMeasurement {
            outcome: self.outcome,
            p_tilde: self.p_tilde,
            tau1: self.tau1,
            tau2,
            norm: self.norm,
            q,
            k,
            sin_delta: sin_d,
            cos_delta: cos_d,
            xi,
            inv_sqrt_xi: xi.sqrt().inv(),
        })
    }
}

/// A post-measurement state evolved to `tau2`; evaluable pointwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolvedPostMeasurement {
    pub outcome: Outcome,
    pub p_tilde: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub norm: f64,
    q: f64,
    k: f64,
    sin_delta: f64,
    cos_delta: f64,
    xi: Complex64,
    inv_sqrt_xi: Complex64,
}

impl EvolvedPostMeasurement {
    /// `chi` at dimensionless position `y`.
    pub fn chi(&self, y: f64) -> Complex64 {
        self.chi_u(y * FRAC_1_SQRT_2)
    }

    pub fn xi(&self) -> Complex64 {
        self.xi
    }

    fn chi_u(&self, u: f64) -> Complex64 {
        Complex64::new(0.5 * self.q, 0.5 * (self.k - u / self.sin_delta))
    }

    /// `exp(-q^2/2) w(+-i z)`, overflow-safe in both half-planes.
    fn kernel_u(&self, u: f64) -> Complex64 {
        let z = self.chi_u(u) * self.inv_sqrt_xi;
        // w(i z) for the + branch, w(-i z) for the - branch
        let zeta = match self.outcome {
            Outcome::Plus => Complex64::new(-z.im, z.re),
            Outcome::Minus => Complex64::new(z.im, -z.re),
        };
        let damp = -0.5 * self.q * self.q;
        if zeta.im >= 0.0 {
            faddeeva_w(zeta) * damp.exp()
        } else {
            // w(zeta) = 2 exp(-zeta^2) - w(-zeta), and -zeta^2 = z^2
            2.0 * (z * z + damp).exp() - faddeeva_w(-zeta) * damp.exp()
        }
    }

    /// Unnormalized density in oscillator units.
    fn density_u(&self, u: f64) -> f64 {
        self.kernel_u(u).norm_sqr() / (4.0 * PI.sqrt())
    }

    /// Unnormalized density `|psi(y, tau2)|^2`; integrates to `norm`.
    pub fn density(&self, y: f64) -> f64 {
        self.density_u(y * FRAC_1_SQRT_2) * FRAC_1_SQRT_2
    }

    /// Density of the normalized state.
    pub fn normalized_density(&self, y: f64) -> f64 {
        self.density(y) / self.norm
    }

    /// Centre of the Gaussian part, in `y` units.
    pub fn gaussian_center(&self) -> f64 {
        SQRT_2 * self.gaussian_center_u()
    }

    fn gaussian_center_u(&self) -> f64 {
        self.q * self.cos_delta + self.k * self.sin_delta
    }

    fn edge_u(&self) -> f64 {
        self.k * self.sin_delta
    }

    /// Initial panel boundaries in `u`.
    ///
    /// Where the Gaussian part overlaps the wave diffracted from the cut, the
    /// two interfere with local wavenumber `|q + d cos D| / |sin D|` at
    /// distance `d` from the Gaussian centre. Panels there span at most two
    /// fringes, and never more than two packet wavelengths `2 pi / p`.
    fn panels_u(&self) -> (Vec<f64>, f64, f64) {
        const WINDOW: f64 = 8.0;
        let gc = self.gaussian_center_u();
        let ec = self.edge_u();
        let s = self.sin_delta.abs();
        let c = self.cos_delta.abs();
        let packet = if self.p_tilde != 0.0 {
            4.0 * PI / self.p_tilde.abs()
        } else {
            f64::INFINITY
        };
        let step_at = |d: f64| {
            let fringe = 4.0 * PI * s / (self.q.abs() + d * c);
            fringe.min(packet).clamp(1e-5, 0.5)
        };
        let mut pts = vec![gc];
        for dir in [-1.0, 1.0] {
            let mut d = 0.0;
            while d < WINDOW {
                d = (d + step_at(d)).min(WINDOW);
                pts.push(gc + dir * d);
            }
        }
        let edge_step = (0.5 * s.sqrt()).clamp(1e-3, 0.5);
        push_range(&mut pts, ec - 10.0, ec + 10.0, edge_step);
        let lo = gc.min(ec).min(0.0) - 20.0;
        let hi = gc.max(ec).max(0.0) + 20.0;
        push_range(&mut pts, lo, hi, 1.0);
        pts.sort_by(|a, b| a.total_cmp(b));
        pts.dedup();
        (pts, lo, hi)
    }

    /// Unnormalized probability of finding the state in the half-line of `second`.
    pub fn half_probability(&self, second: Outcome, cfg: &QuadConfig) -> Result<QuadResult> {
        let (pts, lo, hi) = self.panels_u();
        let envelope = match second {
            Outcome::Plus => Envelope::Algebraic { from: lo, scale: 10.0 },
            Outcome::Minus => Envelope::Algebraic { from: hi, scale: 10.0 },
        };
        integrate_halfline_panels(|u| self.density_u(u), 0.0, second.direction(), envelope, &pts, cfg)
    }

    /// `P(second at tau2 | outcome at tau1)`.
    pub fn conditional_prob(&self, second: Outcome, cfg: &QuadConfig) -> Result<f64> {
        if !(self.norm > 0.0) {
            return Err(LgiError::BranchUnreachable(self.norm));
        }
        Ok(self.half_probability(second, cfg)?.value / self.norm)
    }
}

fn push_range(pts: &mut Vec<f64>, a: f64, b: f64, h: f64) {
    let n = ((b - a) / h).ceil() as usize;
    for i in 0..=n {
        pts.push(a + (b - a) * i as f64 / n as f64);
    }
}

/// `P(second at tau2 | outcome of s at tau1)`.
pub fn conditional_prob(s: &PostMeasurementState, tau2: f64, second: Outcome, cfg: &QuadConfig) -> Result<f64> {
    s.evolve_pm(tau2)?.conditional_prob(second, cfg)
}

/// How a joint table was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JointMethod {
    Quadrature,
    /// Interval is a multiple of the period: evolution is the identity.
    IdentityMap,
    /// Interval is an odd multiple of half the period: evolution is parity.
    ParityMap,
    /// One outcome at the first time has negligible probability.
    DeterministicBranch,
    Grid,
}

impl JointMethod {
    pub fn is_shortcut(self) -> bool {
        matches!(
            self,
            JointMethod::IdentityMap | JointMethod::ParityMap | JointMethod::DeterministicBranch
        )
    }
}

/// Joint probabilities `P(a at t_i, b at t_j)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointTable {
    pub p_pp: f64,
    pub p_pm: f64,
    pub p_mp: f64,
    pub p_mm: f64,
    pub method: JointMethod,
}

impl JointTable {
    pub fn get(&self, a: Outcome, b: Outcome) -> f64 {
        match (a, b) {
            (Outcome::Plus, Outcome::Plus) => self.p_pp,
            (Outcome::Plus, Outcome::Minus) => self.p_pm,
            (Outcome::Minus, Outcome::Plus) => self.p_mp,
            (Outcome::Minus, Outcome::Minus) => self.p_mm,
        }
    }

    pub(crate) fn set(&mut self, a: Outcome, b: Outcome, v: f64) {
        match (a, b) {
            (Outcome::Plus, Outcome::Plus) => self.p_pp = v,
            (Outcome::Plus, Outcome::Minus) => self.p_pm = v,
            (Outcome::Minus, Outcome::Plus) => self.p_mp = v,
            (Outcome::Minus, Outcome::Minus) => self.p_mm = v,
        }
    }

    pub fn from_fn(method: JointMethod, mut f: impl FnMut(Outcome, Outcome) -> f64) -> Self {
        let mut t = JointTable {
            p_pp: 0.0,
            p_pm: 0.0,
            p_mp: 0.0,
            p_mm: 0.0,
            method,
        };
        for a in Outcome::ALL {
            for b in Outcome::ALL {
                t.set(a, b, f(a, b));
            }
        }
        t
    }

    pub fn sum(&self) -> f64 {
        self.p_pp + self.p_pm + self.p_mp + self.p_mm
    }

    /// `P++ - P+- + P-- - P-+`.
    pub fn correlator(&self) -> f64 {
        self.p_pp - self.p_pm + self.p_mm - self.p_mp
    }

    pub fn entries(&self) -> [f64; 4] {
        [self.p_pp, self.p_pm, self.p_mp, self.p_mm]
    }
}

/// What to do when an interval hits the singular-propagator guard.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularPolicy {
    /// Use the exact identity / parity map.
    #[default]
    Shortcut,
    /// Report a singular-interval error.
    Error,
}

/// Closed-form identity or parity map for `|sin D| < SINGULAR_GUARD`.
fn singular_table(p_tilde: f64, ti: f64, delta: f64) -> JointTable {
    let half_periods = (delta / PI).round() as i64;
    let parity = half_periods % 2 != 0;
    let method = if parity {
        JointMethod::ParityMap
    } else {
        JointMethod::IdentityMap
    };
    JointTable::from_fn(method, |a, b| {
        let same = a == b;
        if same != parity {
            marginal(p_tilde, ti, a)
        } else {
            0.0
        }
    })
}

/// Joint table when the branch `rare` at `ti` has negligible probability.
fn deterministic_table(p_tilde: f64, ti: f64, tj: f64, rare: Outcome) -> JointTable {
    let p_rare = marginal(p_tilde, ti, rare);
    JointTable::from_fn(JointMethod::DeterministicBranch, |a, b| {
        if a == rare {
            0.5 * p_rare
        } else {
            (marginal(p_tilde, tj, b) - 0.5 * p_rare).max(0.0)
        }
    })
}

fn check_pair(p_tilde: f64, ti: f64, tj: f64) -> Result<()> {
    if !p_tilde.is_finite() {
        return Err(LgiError::Parameter(format!("p_tilde must be finite, got {p_tilde}")));
    }
    if !(ti.is_finite() && tj.is_finite()) {
        return Err(LgiError::Parameter(format!("measurement phases must be finite, got {ti}, {tj}")));
    }
    if !(tj > ti) {
        return Err(LgiError::Parameter(format!(
            "second measurement must follow the first (t_i = {ti}, t_j = {tj})"
        )));
    }
    Ok(())
}

/// Joint probabilities of the sharp measurement pair on a fresh coherent state.
pub fn joint_table(p_tilde: f64, ti: f64, tj: f64, cfg: &QuadConfig, policy: SingularPolicy) -> Result<JointTable> {
    check_pair(p_tilde, ti, tj)?;
    let delta = tj - ti;
    let sin_d = delta.sin().abs();
    if sin_d < SINGULAR_GUARD {
        return match policy {
            SingularPolicy::Shortcut => Ok(singular_table(p_tilde, ti, delta)),
            SingularPolicy::Error => Err(LgiError::SingularInterval {
                pair: None,
                sin_delta: sin_d,
            }),
        };
    }
    let pp = marginal(p_tilde, ti, Outcome::Plus);
    let pm = marginal(p_tilde, ti, Outcome::Minus);
    if pp.min(pm) < DETERMINISTIC_THRESHOLD {
        let rare = if pp < pm { Outcome::Plus } else { Outcome::Minus };
        return Ok(deterministic_table(p_tilde, ti, tj, rare));
    }
    let mut table = JointTable::from_fn(JointMethod::Quadrature, |_, _| 0.0);
    for a in Outcome::ALL {
        let evolved = project(p_tilde, ti, a).evolve_pm(tj)?;
        let plus = evolved.half_probability(Outcome::Plus, cfg)?.value;
        let minus = evolved.half_probability(Outcome::Minus, cfg)?.value;
        // The smaller half carries the smaller absolute error; the larger
        // one is its complement so the row sums to the exact marginal.
        let (small, big) = if plus <= minus {
            (Outcome::Plus, Outcome::Minus)
        } else {
            (Outcome::Minus, Outcome::Plus)
        };
        let s = plus.min(minus).min(evolved.norm);
        table.set(a, small, s);
        table.set(a, big, evolved.norm - s);
    }
    Ok(table)
}

/// `C_ij = P++ - P+- + P-- - P-+`.
pub fn correlator(p_tilde: f64, ti: f64, tj: f64, cfg: &QuadConfig) -> Result<f64> {
    Ok(joint_table(p_tilde, ti, tj, cfg, SingularPolicy::Shortcut)?.correlator())
}

/// Unsharp position measurement with Gaussian-smoothed boundary.
///
/// Outcome weights are `w+(y) = erfc(y / (sqrt(2) s)) / 2` and
/// `w- = 1 - w+`, with `s` in units of sigma0. The post-measurement amplitude
/// is multiplied by `sqrt(w)`. `s = 0` is the sharp measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmearedMeasurement {
    pub width: f64,
}

impl SmearedMeasurement {
    pub fn new(width: f64) -> Result<Self> {
        if !(width >= 0.0) || width.is_nan() {
            return Err(LgiError::Parameter(format!("smearing width must be >= 0, got {width}")));
        }
        Ok(Self { width })
    }

    pub fn sharp() -> Self {
        Self { width: 0.0 }
    }

    pub fn is_sharp(&self) -> bool {
        self.width == 0.0
    }

    pub fn weight(&self, outcome: Outcome, y: f64) -> f64 {
        let s = match outcome {
            Outcome::Plus => 1.0,
            Outcome::Minus => -1.0,
        };
        if self.is_sharp() {
            return if y == 0.0 {
                0.5
            } else if outcome.contains(y) {
                1.0
            } else {
                0.0
            };
        }
        if self.width.is_infinite() {
            return 0.5;
        }
        0.5 * erfc_real(s * y / (SQRT_2 * self.width))
    }
}

/// Source of joint tables for one measurement pair.
pub trait JointEngine: Sync {
    fn joint_table(&self, p_tilde: f64, ti: f64, tj: f64) -> Result<JointTable>;
    fn name(&self) -> &'static str;
}

/// Closed-form evolution plus adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AnalyticEngine {
    pub quad: QuadConfig,
    pub singular: SingularPolicy,
}

impl AnalyticEngine {
    pub fn new(quad: QuadConfig) -> Self {
        Self {
            quad,
            singular: SingularPolicy::Shortcut,
        }
    }

    pub fn with_policy(mut self, singular: SingularPolicy) -> Self {
        self.singular = singular;
        self
    }

    /// Only sharp measurements have a closed form.
    pub fn check_smearing(m: &SmearedMeasurement) -> Result<()> {
        if m.is_sharp() {
            Ok(())
        } else {
            Err(LgiError::Capability(format!(
                "smearing s = {} has no closed form; use the grid engine",
                m.width
            )))
        }
    }
}

impl JointEngine for AnalyticEngine {
    fn joint_table(&self, p_tilde: f64, ti: f64, tj: f64) -> Result<JointTable> {
        joint_table(p_tilde, ti, tj, &self.quad, self.singular)
    }

    fn name(&self) -> &'static str {
        "analytic"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherent::EvolvedGaussian;
    use crate::quadrature::{integrate, QuadConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg() -> QuadConfig {
        QuadConfig::default()
    }

    // Brute-force half-line propagator integral in oscillator units.
    fn propagated_amplitude(p_tilde: f64, tau1: f64, tau2: f64, outcome: Outcome, u: f64) -> Complex64 {
        let g = EvolvedGaussian::new(p_tilde, tau1);
        let d = tau2 - tau1;
        let (s, c) = d.sin_cos();
        let q = p_tilde * tau1.sin();
        let integrand = |v: f64| {
            let psi = g.psi(SQRT_2 * v) * 2f64.powf(0.25);
            let phase = Complex64::new(0.0, ((v * v + u * u) * c - 2.0 * u * v) / (2.0 * s)).exp();
            psi * phase
        };
        let qc = QuadConfig {
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            max_subdivisions: 20000,
        };
        let (lo, hi) = match outcome {
            Outcome::Plus => ((q - 14.0).min(-1.0), 0.0),
            Outcome::Minus => (0.0, (q + 14.0).max(1.0)),
        };
        let re = integrate(|v| integrand(v).re, lo, hi, &qc).unwrap().value;
        let im = integrate(|v| integrand(v).im, lo, hi, &qc).unwrap().value;
        let pref = (Complex64::new(0.0, 2.0 * PI * s)).sqrt().inv();
        pref * Complex64::new(re, im)
    }

    #[test]
    fn kernel_matches_direct_propagator_quadrature() {
        let (p, t1, t2) = (2.0, 0.3, 1.8);
        for outcome in Outcome::ALL {
            let e = project(p, t1, outcome).evolve_pm(t2).unwrap();
            for &u in &[-3.0, -1.2, -0.1, 0.4, 1.5, 2.7] {
                let direct = propagated_amplitude(p, t1, t2, outcome, u).norm_sqr();
                let ours = e.density_u(u);
                assert!((direct - ours).abs() < 1e-10, "{outcome:?} u={u}: {direct} vs {ours}");
            }
        }
    }

    #[test]
    fn other_square_root_branch_fails_the_propagator_check() {
        // -sqrt(xi) flips z, which yields the complementary half-packet
        let (p, t1, t2) = (2.0, 0.3, 1.8);
        let mut e = project(p, t1, Outcome::Plus).evolve_pm(t2).unwrap();
        e.inv_sqrt_xi = -e.inv_sqrt_xi;
        let mut worst: f64 = 0.0;
        for &u in &[-3.0, -1.2, 0.4, 1.5] {
            let direct = propagated_amplitude(p, t1, t2, Outcome::Plus, u).norm_sqr();
            worst = worst.max((direct - e.density_u(u)).abs());
        }
        assert!(worst > 1e-3);
    }

    #[test]
    fn branches_add_to_free_evolution() {
        let (p, t1, t2) = (3.0, 0.7, 2.9);
        let plus = project(p, t1, Outcome::Plus).evolve_pm(t2).unwrap();
        let minus = project(p, t1, Outcome::Minus).evolve_pm(t2).unwrap();
        let free = EvolvedGaussian::new(p, t2);
        for k in -40..=40 {
            let y = free.center() + 0.2 * k as f64;
            let u = y * FRAC_1_SQRT_2;
            // the two kernels share their phase, so amplitudes add
            let sum = (plus.kernel_u(u) + minus.kernel_u(u)).norm_sqr() / (4.0 * PI.sqrt()) * FRAC_1_SQRT_2;
            assert!((sum - free.density(y)).abs() < 1e-12, "y={y}");
        }
    }

    #[test]
    fn unnormalized_norm_equals_marginal() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..30 {
            let p = rng.gen_range(-6.0..6.0);
            let t1 = rng.gen_range(0.0..2.0 * PI);
            let t2 = t1 + rng.gen_range(0.05..6.2);
            if (t2 - t1).sin().abs() < 1e-3 {
                continue;
            }
            for a in Outcome::ALL {
                let e = project(p, t1, a).evolve_pm(t2).unwrap();
                let total = e.half_probability(Outcome::Plus, &cfg()).unwrap().value
                    + e.half_probability(Outcome::Minus, &cfg()).unwrap().value;
                assert!((total - marginal(p, t1, a)).abs() < 1e-9, "p={p} t1={t1} t2={t2}");
                let cp = e.conditional_prob(Outcome::Plus, &cfg()).unwrap();
                let cm = e.conditional_prob(Outcome::Minus, &cfg()).unwrap();
                assert!((cp + cm - 1.0).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn symmetric_packet_gives_symmetric_table() {
        for &(t1, t2) in &[(0.0, 1.0), (0.4, 2.5), (1.0, 5.0)] {
            let t = joint_table(0.0, t1, t2, &cfg(), SingularPolicy::Shortcut).unwrap();
            assert!((t.p_pp - t.p_mm).abs() < 1e-10);
            assert!((t.p_pm - t.p_mp).abs() < 1e-10);
            assert!((t.sum() - 1.0).abs() < 1e-8);
        }
        let s = project(0.0, 0.0, Outcome::Plus);
        assert_eq!(s.norm, 0.5);
    }

    #[test]
    fn parity_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..8 {
            let p = rng.gen_range(0.2..5.0);
            let t1 = rng.gen_range(0.0..3.0);
            let t2 = t1 + rng.gen_range(0.2..3.0);
            let a = joint_table(p, t1, t2, &cfg(), SingularPolicy::Shortcut).unwrap();
            let b = joint_table(-p, t1, t2, &cfg(), SingularPolicy::Shortcut).unwrap();
            for x in Outcome::ALL {
                for y in Outcome::ALL {
                    assert!((a.get(x, y) - b.get(x.flip(), y.flip())).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn short_interval_suppresses_switching() {
        let t = joint_table(1.5, 0.4, 0.4 + 1e-4, &cfg(), SingularPolicy::Shortcut).unwrap();
        assert!(t.p_pm < 5e-3 && t.p_mp < 5e-3, "{t:?}");
        assert!(t.correlator() > 0.99);
        let t2 = joint_table(1.5, 0.4, 0.4 + 1e-2, &cfg(), SingularPolicy::Shortcut).unwrap();
        assert!(t2.p_pm > t.p_pm);
    }

    #[test]
    fn post_measurement_density_vanishes_on_far_side_just_after() {
        let e = project(2.0, 0.5, Outcome::Plus).evolve_pm(0.5 + 1e-5).unwrap();
        for &y in &[0.5, 1.0, 2.0] {
            assert!(e.normalized_density(y) < 1e-4, "y={y}: {}", e.normalized_density(y));
        }
        assert!(e.normalized_density(-1.0) > 0.05);
    }

    #[test]
    fn half_and_full_period() {
        let (p, t1) = (1.3, 0.8);
        for (d, method) in [(PI, JointMethod::ParityMap), (2.0 * PI, JointMethod::IdentityMap)] {
            let t = joint_table(p, t1, t1 + d, &cfg(), SingularPolicy::Shortcut).unwrap();
            assert_eq!(t.method, method);
            assert!((t.sum() - 1.0).abs() < 1e-12);
        }
        let full = joint_table(p, t1, t1 + 2.0 * PI, &cfg(), SingularPolicy::Shortcut).unwrap();
        assert!((full.p_pp / marginal(p, t1, Outcome::Plus) - 1.0).abs() < 1e-12);
        let half = joint_table(p, t1, t1 + PI, &cfg(), SingularPolicy::Shortcut).unwrap();
        assert!((half.p_pm - marginal(p, t1, Outcome::Plus)).abs() < 1e-12);
        assert!(matches!(
            project(p, t1, Outcome::Plus).evolve_pm(t1 + PI),
            Err(LgiError::SingularInterval { .. })
        ));
        assert!(joint_table(p, t1, t1 + PI, &cfg(), SingularPolicy::Error).is_err());
    }

    #[test]
    fn near_half_period_density_is_mirrored() {
        let (p, t1) = (1.3, 0.8);
        let e = project(p, t1, Outcome::Plus).evolve_pm(t1 + PI - 1e-3).unwrap();
        let before = project(p, t1, Outcome::Plus);
        // compare mass on the mirrored side
        let mirrored = e.half_probability(Outcome::Minus, &cfg()).unwrap().value;
        assert!((mirrored - before.norm).abs() < 5e-2);
        let t = joint_table(p, t1, t1 + PI - 1e-3, &cfg(), SingularPolicy::Shortcut).unwrap();
        let exact = singular_table(p, t1, PI);
        for (a, b) in t.entries().iter().zip(exact.entries()) {
            assert!((a - b).abs() < 5e-2);
        }
    }

    #[test]
    fn deterministic_shortcut_agrees_with_quadrature() {
        // q = 6.5 keeps the rare branch near 1e-20: quadrature still applies
        // and the shortcut formula must agree within its error bound
        let p = 6.5 / 1.2f64.sin();
        let (t1, t2) = (1.2, 3.1);
        let full = joint_table(p, t1, t2, &cfg(), SingularPolicy::Shortcut).unwrap();
        assert_eq!(full.method, JointMethod::Quadrature);
        let rare = Outcome::Plus;
        let p_rare = marginal(p, t1, rare);
        let short = deterministic_table(p, t1, t2, rare);
        let bound = 2.0 * p_rare.sqrt() + p_rare + 1e-11;
        for (a, b) in full.entries().iter().zip(short.entries()) {
            assert!((a - b).abs() < bound, "{a} vs {b}");
        }
        let far = joint_table(100.0, 1.2, 3.1, &cfg(), SingularPolicy::Shortcut).unwrap();
        assert_eq!(far.method, JointMethod::DeterministicBranch);
        assert!((far.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tables_are_probabilities() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for _ in 0..10 {
            let p = rng.gen_range(0.0..20.0);
            let t1 = rng.gen_range(0.0..6.0);
            let t2 = t1 + rng.gen_range(0.01..6.2);
            let t = joint_table(p, t1, t2, &cfg(), SingularPolicy::Shortcut).unwrap();
            assert!((t.sum() - 1.0).abs() < 1e-8, "{t:?}");
            for v in t.entries() {
                assert!((-1e-12..=1.0 + 1e-12).contains(&v));
            }
            assert!(t.correlator().abs() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn large_momentum_fringes_are_resolved() {
        // packet crossing the boundary at t1 with p ~ 1e3
        let p = 1763.0;
        let t1 = PI + 0.002;
        let t2 = t1 + 4.8;
        let t = joint_table(p, t1, t2, &cfg(), SingularPolicy::Shortcut).unwrap();
        assert_eq!(t.method, JointMethod::Quadrature);
        assert!((t.sum() - 1.0).abs() < 1e-8, "{t:?}");
    }

    #[test]
    fn rejects_bad_pairs() {
        assert!(joint_table(1.0, 2.0, 1.0, &cfg(), SingularPolicy::Shortcut).is_err());
        assert!(joint_table(f64::NAN, 0.0, 1.0, &cfg(), SingularPolicy::Shortcut).is_err());
    }

    #[test]
    fn smearing_weights() {
        let sharp = SmearedMeasurement::sharp();
        assert_eq!(sharp.weight(Outcome::Plus, -1.0), 1.0);
        assert_eq!(sharp.weight(Outcome::Plus, 1.0), 0.0);
        let s = SmearedMeasurement::new(0.2).unwrap();
        for &y in &[-1.0, -0.1, 0.0, 0.3] {
            assert!((s.weight(Outcome::Plus, y) + s.weight(Outcome::Minus, y) - 1.0).abs() < 1e-15);
        }
        let wide = SmearedMeasurement::new(f64::INFINITY).unwrap();
        assert_eq!(wide.weight(Outcome::Minus, 5.0), 0.5);
        assert!(SmearedMeasurement::new(-1.0).is_err());
        assert!(matches!(
            AnalyticEngine::check_smearing(&s),
            Err(LgiError::Capability(_))
        ));
    }

    #[test]
    fn rows_sum_to_marginals_without_overshoot() {
        // near-deterministic pairs where the dominant half integrates to ~1
        for &(p, ti, tj) in &[(13.24, 2.684, 7.562), (22.5, 0.3297, 1.886), (6.543, 2.427, 8.503), (2.0, 0.7, 2.1)] {
            let t = joint_table(p, ti, tj, &cfg(), SingularPolicy::Shortcut).unwrap();
            for a in Outcome::ALL {
                let row = t.get(a, Outcome::Plus) + t.get(a, Outcome::Minus);
                assert!((row - marginal(p, ti, a)).abs() <= 2.0 * f64::EPSILON);
            }
            assert!(t.entries().iter().all(|&x| (0.0..=1.0).contains(&x)));
            assert!(t.correlator().abs() <= 1.0 + 2.0 * f64::EPSILON);
        }
    }
}
