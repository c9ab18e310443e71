//! Split-operator grid propagation: an engine independent of the closed-form
//! kernel, also used for unsharp measurements.
//!
//! The grid is cell-centred and symmetric about the boundary, `y_j = -L +
//! (j + 1/2) dy`, so no node sits at `y = 0` and a sharp projection
//! partitions the nodes exactly. The Hamiltonian in `y` units is
//! `H = -d^2/dy^2 + y^2 / 4`; one Strang step of length `h` applies
//! `exp(-i h y^2 / 8)`, `exp(-i h k^2)` in Fourier space, then
//! `exp(-i h y^2 / 8)` again.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::coherent::EvolvedGaussian;
use crate::error::{LgiError, Result};
use crate::measurement::{JointEngine, JointMethod, JointTable, Outcome, SmearedMeasurement};

/// Default number of grid points for a single grid.
pub const DEFAULT_POINTS: usize = 4096;
/// Default Strang step.
pub const DEFAULT_STEP: f64 = 2.0 * PI / 4096.0;
/// Branch probability below which projection reports the branch as unreachable.
pub const UNREACHABLE: f64 = 1e-14;
/// Largest grid the engine will allocate.
pub const MAX_POINTS: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Half-width of the box, in sigma0 units.
    pub half_extent: f64,
    pub n_points: usize,
    pub dtau_step: f64,
}

impl GridSpec {
    /// Box `L = sqrt(pi N)`, which balances the position and wavenumber
    /// extents (`k_max = sqrt(pi N) / 2`).
    pub fn balanced(n_points: usize) -> Self {
        Self {
            half_extent: (PI * n_points as f64).sqrt(),
            n_points,
            dtau_step: DEFAULT_STEP,
        }
    }

    /// Smallest balanced grid with at least `min_points` points that
    /// satisfies the coverage requirements for `p_tilde`.
    pub fn for_p_tilde(p_tilde: f64, min_points: usize) -> Result<Self> {
        let mut n = min_points.next_power_of_two().max(16);
        while n <= MAX_POINTS {
            let spec = Self::balanced(n);
            if spec.check(p_tilde).is_ok() {
                return Ok(spec);
            }
            n *= 2;
        }
        let need = required_points(p_tilde);
        Err(LgiError::Capability(format!(
            "p_tilde = {p_tilde} needs about {need} grid points ({} MiB per state); limit is {MAX_POINTS}",
            need * 16 / (1 << 20)
        )))
    }

    pub fn dy(&self) -> f64 {
        2.0 * self.half_extent / self.n_points as f64
    }

    /// Nyquist wavenumber `pi / dy`.
    pub fn k_max(&self) -> f64 {
        PI / self.dy()
    }

    pub fn positions(&self) -> Vec<f64> {
        let dy = self.dy();
        (0..self.n_points)
            .map(|j| -self.half_extent + (j as f64 + 0.5) * dy)
            .collect()
    }

    /// Checks coverage of the orbit and of the packet's wavenumber content.
    pub fn check(&self, p_tilde: f64) -> Result<()> {
        if !(self.n_points >= 16 && self.n_points.is_power_of_two()) {
            return Err(LgiError::GridConfig(format!(
                "n_points must be a power of two >= 16, got {}",
                self.n_points
            )));
        }
        if !(self.dtau_step > 0.0 && self.dtau_step.is_finite()) {
            return Err(LgiError::GridConfig(format!("dtau_step must be positive, got {}", self.dtau_step)));
        }
        let need_l = std::f64::consts::SQRT_2 * p_tilde.abs() + 12.0;
        if self.half_extent < need_l {
            return Err(LgiError::GridConfig(format!(
                "half extent {:.3} below orbit coverage {:.3}",
                self.half_extent, need_l
            )));
        }
        let need_k = 2.0 * (p_tilde.abs() + 6.0);
        if self.k_max() < need_k {
            return Err(LgiError::GridConfig(format!(
                "Nyquist wavenumber {:.3} below {:.3}",
                self.k_max(),
                need_k
            )));
        }
        Ok(())
    }
}

fn required_points(p_tilde: f64) -> usize {
    // L = sqrt(pi N) >= sqrt(2) p + 12 and sqrt(pi N) / 2 >= 2 (p + 6)
    let a = (std::f64::consts::SQRT_2 * p_tilde.abs() + 12.0).powi(2) / PI;
    let b = (4.0 * (p_tilde.abs() + 6.0)).powi(2) / PI;
    a.max(b).ceil() as usize
}

/// Sampled wavefunction.
#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    pub spec: GridSpec,
    pub psi: Vec<Complex64>,
    pub tau: f64,
}

impl GridState {
    pub fn norm(&self) -> f64 {
        self.psi.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.spec.dy()
    }

    pub fn density(&self) -> Vec<f64> {
        self.psi.iter().map(|c| c.norm_sqr()).collect()
    }

    /// `sum_j weight(y_j) |psi_j|^2 dy`.
    pub fn weighted_probability(&self, weight: impl Fn(f64) -> f64) -> f64 {
        let dy = self.spec.dy();
        self.spec
            .positions()
            .iter()
            .zip(&self.psi)
            .map(|(&y, c)| weight(y) * c.norm_sqr())
            .sum::<f64>()
            * dy
    }

    pub fn mean_position(&self) -> f64 {
        self.weighted_probability(|y| y) / self.norm()
    }

    /// `<k>` from the discrete spectrum.
    pub fn mean_wavenumber(&self) -> f64 {
        let (spectrum, k) = self.spectrum();
        let total: f64 = spectrum.iter().map(|c| c.norm_sqr()).sum();
        spectrum.iter().zip(&k).map(|(c, k)| c.norm_sqr() * k).sum::<f64>() / total
    }

    /// `<H>` with `H = -d^2/dy^2 + y^2/4`, kinetic part evaluated spectrally.
    pub fn energy(&self) -> f64 {
        let (spectrum, k) = self.spectrum();
        let total: f64 = spectrum.iter().map(|c| c.norm_sqr()).sum();
        let kinetic = spectrum.iter().zip(&k).map(|(c, k)| c.norm_sqr() * k * k).sum::<f64>() / total;
        let potential = self.weighted_probability(|y| 0.25 * y * y) / self.norm();
        kinetic + potential
    }

    fn spectrum(&self) -> (Vec<Complex64>, Vec<f64>) {
        let mut buf = self.psi.clone();
        FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
        (buf, wavenumbers(&self.spec))
    }

    fn normalize(&mut self) {
        let n = self.norm().sqrt();
        for c in &mut self.psi {
            *c /= n;
        }
    }
}

fn wavenumbers(spec: &GridSpec) -> Vec<f64> {
    let n = spec.n_points;
    let dk = 2.0 * PI / (n as f64 * spec.dy());
    (0..n)
        .map(|j| {
            let m = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
            m * dk
        })
        .collect()
}

/// Coherent state at `tau = 0` sampled on the grid and normalized discretely.
pub fn init_coherent(spec: &GridSpec, p_tilde: f64) -> Result<GridState> {
    init_coherent_at(spec, p_tilde, 0.0)
}

/// Coherent state sampled at phase `tau`. Free evolution of a coherent
/// state is exact in closed form, so pair evaluations start here instead of
/// stepping from `tau = 0`.
pub fn init_coherent_at(spec: &GridSpec, p_tilde: f64, tau: f64) -> Result<GridState> {
    spec.check(p_tilde)?;
    let g = EvolvedGaussian::new(p_tilde, tau);
    let mut state = GridState {
        spec: *spec,
        psi: spec.positions().iter().map(|&y| g.psi(y)).collect(),
        tau,
    };
    state.normalize();
    Ok(state)
}

/// Reusable FFT plans and phase tables for one grid.
pub struct Propagator {
    spec: GridSpec,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    positions: Vec<f64>,
    k2: Vec<f64>,
    scratch: Vec<Complex64>,
    substeps: usize,
}

impl Propagator {
    pub fn new(spec: &GridSpec) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(spec.n_points);
        let inverse = planner.plan_fft_inverse(spec.n_points);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            spec: *spec,
            forward,
            inverse,
            positions: spec.positions(),
            k2: wavenumbers(spec).iter().map(|k| k * k).collect(),
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
            substeps: 1,
        }
    }

    /// Splits every step into `k` equal ones, so the step is exactly `1/k`
    /// of the unrefined one for any interval.
    pub fn with_substeps(mut self, k: usize) -> Self {
        self.substeps = k.max(1);
        self
    }

    /// Strang stepping over `delta_tau` (either sign) with steps no longer
    /// than the spec's step.
    pub fn evolve(&mut self, state: &mut GridState, delta_tau: f64) {
        let steps = (delta_tau.abs() / self.spec.dtau_step).ceil() as usize * self.substeps;
        if steps == 0 {
            return;
        }
        let h = delta_tau / steps as f64;
        let n = self.spec.n_points as f64;
        let half: Vec<Complex64> = self
            .positions
            .iter()
            .map(|y| Complex64::from_polar(1.0, -h * y * y / 8.0))
            .collect();
        let full: Vec<Complex64> = half.iter().map(|c| c * c).collect();
        let kinetic: Vec<Complex64> = self
            .k2
            .iter()
            .map(|k2| Complex64::from_polar(1.0 / n, -h * k2))
            .collect();
        let psi = &mut state.psi;
        for (c, v) in psi.iter_mut().zip(&half) {
            *c *= v;
        }
        for step in 0..steps {
            self.forward.process_with_scratch(psi, &mut self.scratch);
            for (c, v) in psi.iter_mut().zip(&kinetic) {
                *c *= v;
            }
            self.inverse.process_with_scratch(psi, &mut self.scratch);
            // adjacent potential half-steps fuse into one full step
            let pot = if step + 1 == steps { &half } else { &full };
            for (c, v) in psi.iter_mut().zip(pot) {
                *c *= v;
            }
        }
        state.tau += delta_tau;
    }

    /// Evolution over `delta_tau` using the exact symmetries `U(2 pi) = -1`
    /// and `U(pi) = -i P` (parity) so at most a quarter period is stepped.
    pub fn propagate(&mut self, state: &mut GridState, delta_tau: f64) {
        let periods = (delta_tau / (2.0 * PI)).round();
        let mut r = delta_tau - periods * 2.0 * PI;
        let mut phase = if periods as i64 % 2 != 0 {
            Complex64::new(-1.0, 0.0)
        } else {
            Complex64::new(1.0, 0.0)
        };
        if r.abs() > PI / 2.0 {
            // U(r) = U(r - pi) U(pi) for r > 0, U(r + pi) U(-pi) for r < 0
            state.psi.reverse();
            if r > 0.0 {
                phase *= Complex64::new(0.0, -1.0);
                r -= PI;
            } else {
                phase *= Complex64::new(0.0, 1.0);
                r += PI;
            }
        }
        for c in &mut state.psi {
            *c *= phase;
        }
        let start = state.tau;
        self.evolve(state, r);
        state.tau = start + delta_tau;
    }
}

/// Genuine Strang stepping over `delta_tau`.
pub fn evolve(state: &GridState, delta_tau: f64) -> GridState {
    let mut out = state.clone();
    Propagator::new(&state.spec).evolve(&mut out, delta_tau);
    out
}

/// Evolution with the period / half-period reduction.
pub fn propagate(state: &GridState, delta_tau: f64) -> GridState {
    let mut out = state.clone();
    Propagator::new(&state.spec).propagate(&mut out, delta_tau);
    out
}

/// Applies the (possibly smeared) measurement and returns the outcome
/// probability with the normalized post-measurement state.
pub fn project_grid(state: &GridState, measurement: &SmearedMeasurement, outcome: Outcome) -> Result<(f64, GridState)> {
    let mut out = state.clone();
    for (c, y) in out.psi.iter_mut().zip(state.spec.positions()) {
        *c *= measurement.weight(outcome, y).sqrt();
    }
    let prob = out.norm();
    if prob < UNREACHABLE {
        return Err(LgiError::BranchUnreachable(prob));
    }
    out.normalize();
    Ok((prob, out))
}

/// Settings of the grid engine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    /// Minimum points of the coarse grid; raised to satisfy coverage.
    pub min_points: usize,
    pub dtau_step: f64,
    /// Extrapolate away the leading errors: the `O(dy^2)` error of the sharp
    /// cut from grids of `N` and `4N` points, and the `O(h^2)` Strang error
    /// from a second `N`-point run at half the step.
    pub richardson: bool,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            min_points: 16384,
            dtau_step: DEFAULT_STEP,
            richardson: true,
        }
    }
}

impl GridConfig {
    /// One grid of the spec defaults, no extrapolation.
    pub fn single(min_points: usize) -> Self {
        Self {
            min_points,
            dtau_step: DEFAULT_STEP,
            richardson: false,
        }
    }
}

/// Joint tables from grid propagation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridEngine {
    pub config: GridConfig,
    pub measurement: SmearedMeasurement,
}

impl GridEngine {
    pub fn new(config: GridConfig, measurement: SmearedMeasurement) -> Self {
        Self { config, measurement }
    }

    pub fn sharp() -> Self {
        Self::new(GridConfig::default(), SmearedMeasurement::sharp())
    }

    fn spec_for(&self, p_tilde: f64, min_points: usize) -> Result<GridSpec> {
        let mut spec = GridSpec::for_p_tilde(p_tilde, min_points)?;
        spec.dtau_step = self.config.dtau_step;
        Ok(spec)
    }

    fn table_on(&self, spec: &GridSpec, substeps: usize, p_tilde: f64, ti: f64, tj: f64) -> Result<JointTable> {
        let start = init_coherent_at(spec, p_tilde, ti)?;
        let mut prop = Propagator::new(spec).with_substeps(substeps);
        let mut probs = [[0.0; 2]; 2];
        for (ia, a) in Outcome::ALL.into_iter().enumerate() {
            let (pa, mut branch) = match project_grid(&start, &self.measurement, a) {
                Ok(v) => v,
                Err(LgiError::BranchUnreachable(_)) => continue,
                Err(e) => return Err(e),
            };
            prop.propagate(&mut branch, tj - ti);
            // divides out the FFT round-off drift of the norm (~1e-13)
            let norm = branch.norm();
            for (ib, b) in Outcome::ALL.into_iter().enumerate() {
                probs[ia][ib] = pa * branch.weighted_probability(|y| self.measurement.weight(b, y)) / norm;
            }
        }
        Ok(JointTable::from_fn(JointMethod::Grid, |a, b| probs[index(a)][index(b)]))
    }
}

fn index(o: Outcome) -> usize {
    match o {
        Outcome::Plus => 0,
        Outcome::Minus => 1,
    }
}

impl JointEngine for GridEngine {
    fn joint_table(&self, p_tilde: f64, ti: f64, tj: f64) -> Result<JointTable> {
        if !(p_tilde.is_finite() && ti.is_finite() && tj.is_finite() && tj > ti) {
            return Err(LgiError::Parameter(format!(
                "invalid pair: p_tilde = {p_tilde}, t_i = {ti}, t_j = {tj}"
            )));
        }
        let coarse_spec = self.spec_for(p_tilde, self.config.min_points)?;
        let coarse = self.table_on(&coarse_spec, 1, p_tilde, ti, tj)?;
        if !self.config.richardson {
            return Ok(coarse);
        }
        let fine_spec = self.spec_for(p_tilde, coarse_spec.n_points * 4)?;
        let fine = self.table_on(&fine_spec, 1, p_tilde, ti, tj)?;
        let halved = self.table_on(&coarse_spec, 2, p_tilde, ti, tj)?;
        // P(N, h) = P + A + B with A ~ dy^2 (quartered on 4N points) and
        // B ~ h^2 (quartered at h/2)
        let extrapolate = |f: &dyn Fn(&JointTable) -> f64| {
            let (c, h) = (f(&coarse), f(&halved));
            (4.0 * f(&fine) - c) / 3.0 - 4.0 * (c - h) / 3.0
        };
        // The smaller of each complementary pair is extrapolated and the
        // larger taken as its complement, so the table stays a distribution.
        let split = |x: f64| {
            let x = x.clamp(0.0, 1.0);
            [x, 1.0 - x]
        };
        let row = |t: &JointTable, a: Outcome| t.get(a, Outcome::Plus) + t.get(a, Outcome::Minus);
        let rare_a = if row(&coarse, Outcome::Plus) <= row(&coarse, Outcome::Minus) {
            Outcome::Plus
        } else {
            Outcome::Minus
        };
        let [pr, pc] = split(extrapolate(&|t| row(t, rare_a)));
        let mut table = JointTable::from_fn(JointMethod::Grid, |_, _| 0.0);
        for (a, pa) in [(rare_a, pr), (rare_a.flip(), pc)] {
            let cond = |t: &JointTable, b: Outcome| {
                let r = row(t, a);
                if r > 0.0 {
                    t.get(a, b) / r
                } else {
                    0.0
                }
            };
            let rare_b = if cond(&coarse, Outcome::Plus) <= cond(&coarse, Outcome::Minus) {
                Outcome::Plus
            } else {
                Outcome::Minus
            };
            let [qr, qc] = split(extrapolate(&|t| cond(t, rare_b)));
            table.set(a, rare_b, pa * qr);
            table.set(a, rare_b.flip(), pa * qc);
        }
        Ok(table)
    }

    fn name(&self) -> &'static str {
        "grid"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherent;

    fn spec() -> GridSpec {
        GridSpec::balanced(DEFAULT_POINTS)
    }

    #[test]
    fn spec_checks() {
        assert!(spec().check(20.0).is_ok());
        assert!(matches!(spec().check(60.0), Err(LgiError::GridConfig(_))));
        let s = GridSpec::for_p_tilde(60.0, 4096).unwrap();
        assert!(s.n_points > 4096 && s.check(60.0).is_ok());
        assert!(matches!(GridSpec::for_p_tilde(1e5, 4096), Err(LgiError::Capability(_))));
        let bad = GridSpec {
            n_points: 1000,
            ..spec()
        };
        assert!(bad.check(0.0).is_err());
    }

    #[test]
    fn grid_is_symmetric_without_boundary_node() {
        let ys = spec().positions();
        assert!(ys.iter().all(|&y| y != 0.0));
        let n = ys.len();
        for j in 0..n {
            assert!((ys[j] + ys[n - 1 - j]).abs() < 1e-12);
        }
    }

    #[test]
    fn initial_state() {
        let s = init_coherent(&spec(), 0.0).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-12);
        let g = coherent::EvolvedGaussian::new(0.0, 0.0);
        for (y, d) in spec().positions().iter().zip(s.density()) {
            assert!((d - g.density(*y)).abs() < 1e-10);
        }
        let s = init_coherent(&spec(), 3.0).unwrap();
        // wavenumber in y units is p / sqrt(2)
        assert!((s.mean_wavenumber() - 3.0 / 2f64.sqrt()).abs() < 1e-8);
        assert!(init_coherent(&spec(), 100.0).is_err());
    }

    #[test]
    fn ground_state_is_stationary() {
        let s0 = init_coherent(&spec(), 0.0).unwrap();
        let s1 = evolve(&s0, 2.0 * PI);
        for (a, b) in s0.density().iter().zip(s1.density()) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn full_period_revival_and_norm() {
        let s0 = init_coherent(&spec(), 3.0).unwrap();
        let s1 = evolve(&s0, 2.0 * PI);
        assert!((s1.norm() - 1.0).abs() < 1e-10);
        // Strang error, O(h^2) with h = 2 pi / 4096
        for (a, b) in s0.density().iter().zip(s1.density()) {
            assert!((a - b).abs() < 2e-6);
        }
        let e0 = s0.energy();
        assert!(((s1.energy() - e0) / e0).abs() < 1e-8);
    }

    #[test]
    fn center_follows_orbit_and_marginals_match() {
        let p = 3.0;
        let mut prop = Propagator::new(&spec());
        let mut s = init_coherent(&spec(), p).unwrap();
        let step = 2.0 * PI / 16.0;
        for _ in 0..16 {
            prop.evolve(&mut s, step);
            assert!((s.mean_position() - coherent::center(p, s.tau)).abs() < 1e-5);
            let plus = s.weighted_probability(|y| if y < 0.0 { 1.0 } else { 0.0 });
            assert!((plus - coherent::marginal_plus(p, s.tau)).abs() < 5e-5);
        }
    }

    #[test]
    fn symmetry_reduction_matches_stepping() {
        let s0 = init_coherent(&spec(), 2.0).unwrap();
        for &d in &[0.4, 2.0, 3.5, -1.9, 5.0, 8.0] {
            let a = evolve(&s0, d);
            let b = propagate(&s0, d);
            let worst = a
                .psi
                .iter()
                .zip(&b.psi)
                .map(|(x, y)| (x - y).norm())
                .fold(0.0, f64::max);
            assert!(worst < 2e-6, "d={d}: {worst}");
        }
    }

    #[test]
    fn projection() {
        let s = init_coherent(&spec(), 0.0).unwrap();
        let sharp = SmearedMeasurement::sharp();
        let (pp, _) = project_grid(&s, &sharp, Outcome::Plus).unwrap();
        let (pm, _) = project_grid(&s, &sharp, Outcome::Minus).unwrap();
        assert!((pp - 0.5).abs() < 1e-12 && (pm - 0.5).abs() < 1e-12);

        // the cut sits on a cell edge: midpoint error is O(dy^2)
        let exact = coherent::marginal_plus(2.0, 1.0);
        let moving = init_coherent_at(&spec(), 2.0, 1.0).unwrap();
        let (pp, st) = project_grid(&moving, &sharp, Outcome::Plus).unwrap();
        assert!((st.norm() - 1.0).abs() < 1e-12);
        let fine = init_coherent_at(&GridSpec::balanced(4 * DEFAULT_POINTS), 2.0, 1.0).unwrap();
        let (pf, _) = project_grid(&fine, &sharp, Outcome::Plus).unwrap();
        // L grows with N, so dy shrinks by 2 when N quadruples
        let ratio = (pp - exact) / (pf - exact);
        assert!((ratio - 4.0).abs() < 0.05, "{ratio}");
        assert!(((4.0 * pf - pp) / 3.0 - exact).abs() < 1e-9);

        let wide = SmearedMeasurement::new(1e6).unwrap();
        let (pw, _) = project_grid(&moving, &wide, Outcome::Plus).unwrap();
        assert!((pw - 0.5).abs() < 1e-5);

        let far = init_coherent_at(&GridSpec::balanced(16384), 20.0, PI / 2.0).unwrap();
        assert!(matches!(
            project_grid(&far, &sharp, Outcome::Plus),
            Err(LgiError::BranchUnreachable(_))
        ));
    }

    #[test]
    fn richardson_table_matches_analytic() {
        use crate::measurement::{joint_table, SingularPolicy};
        use crate::quadrature::QuadConfig;
        let (p, t1, t2) = (2.0, 0.3, 1.8);
        let a = joint_table(p, t1, t2, &QuadConfig::default(), SingularPolicy::Shortcut).unwrap();
        let g = GridEngine::sharp().joint_table(p, t1, t2).unwrap();
        for (x, y) in a.entries().iter().zip(g.entries()) {
            assert!((x - y).abs() < 1e-6, "{a:?} vs {g:?}");
        }
    }

    #[test]
    fn evolved_post_measurement_density_matches_analytic_pointwise() {
        use crate::measurement::project;
        let (p, t1, t2) = (2.0, 0.3, 1.8);
        let e = project(p, t1, Outcome::Plus).evolve_pm(t2).unwrap();
        let spec = GridSpec::balanced(65536);
        let start = init_coherent_at(&spec, p, t1).unwrap();
        let (pa, mut branch) = project_grid(&start, &SmearedMeasurement::sharp(), Outcome::Plus).unwrap();
        Propagator::new(&spec).propagate(&mut branch, t2 - t1);
        let ys = spec.positions();
        let mut worst: f64 = 0.0;
        for (j, y) in ys.iter().enumerate() {
            if y.abs() < 6.0 {
                worst = worst.max((branch.psi[j].norm_sqr() * pa - e.density(*y)).abs());
            }
        }
        assert!(worst < 1e-5, "{worst}");
    }
}
