//! The four-term LGI quantity `C = C12 + C23 + C34 - C14`, sweeps and a
//! maximizer over the measurement schedule.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LgiError, Result};
use crate::grid::{GridConfig, GridEngine};
use crate::measurement::{AnalyticEngine, JointEngine, JointTable, SmearedMeasurement};
use crate::quadrature::QuadConfig;
use crate::units::{DimensionlessParams, PhysicalParams};

/// Measured pairs `(i, j)` of the four instants, in the order of the
/// correlators `C12, C23, C34, C14`.
pub const PAIRS: [(usize, usize); 4] = [(0, 1), (1, 2), (2, 3), (0, 3)];
pub const PAIR_LABELS: [&str; 4] = ["C12", "C23", "C34", "C14"];

/// Upper bound of `C` for projective dichotomic measurements.
pub const QUANTUM_BOUND: f64 = 2.0 * std::f64::consts::SQRT_2;

/// Four measurement phases `tau_1 < tau_2 < tau_3 < tau_4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub times: [f64; 4],
}

impl Schedule {
    pub fn uniform(tau1: f64, dtau: f64) -> Self {
        Self {
            times: [tau1, tau1 + dtau, tau1 + 2.0 * dtau, tau1 + 3.0 * dtau],
        }
    }

    pub fn new(times: [f64; 4]) -> Result<Self> {
        let s = Self { times };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.times.iter().any(|t| !t.is_finite()) {
            return Err(LgiError::Parameter(format!("schedule must be finite: {:?}", self.times)));
        }
        if !self.times.windows(2).all(|w| w[1] > w[0]) {
            return Err(LgiError::Parameter(format!(
                "schedule must be strictly increasing: {:?}",
                self.times
            )));
        }
        Ok(())
    }
}

/// Result of one evaluation of `C`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LgiResult {
    pub params: DimensionlessParams,
    pub times: [f64; 4],
    pub c12: f64,
    pub c23: f64,
    pub c34: f64,
    pub c14: f64,
    pub c_value: f64,
    /// Joint tables for the pairs in [`PAIRS`] order.
    pub joint_tables: [JointTable; 4],
    pub engine: String,
    /// Indices into [`PAIRS`] whose table came from an exact shortcut
    /// (identity/parity map or deterministic branch).
    pub shortcut_pairs: Vec<usize>,
}

impl LgiResult {
    pub fn correlators(&self) -> [f64; 4] {
        [self.c12, self.c23, self.c34, self.c14]
    }

    pub fn violates(&self) -> bool {
        self.c_value > 2.0
    }
}

/// `C` for the uniform schedule in `params`, analytic engine with defaults.
pub fn lgi_value(params: &DimensionlessParams) -> Result<LgiResult> {
    lgi_value_with(&AnalyticEngine::default(), params)
}

pub fn lgi_value_with(engine: &dyn JointEngine, params: &DimensionlessParams) -> Result<LgiResult> {
    params.validate()?;
    lgi_schedule(engine, params.p_tilde, &Schedule::uniform(params.tau1, params.dtau))
}

/// `C` for an arbitrary schedule. Each pair is evaluated on a fresh state.
pub fn lgi_schedule(engine: &dyn JointEngine, p_tilde: f64, schedule: &Schedule) -> Result<LgiResult> {
    schedule.validate()?;
    let t = schedule.times;
    let tables: Vec<Result<JointTable>> = PAIRS
        .par_iter()
        .enumerate()
        .map(|(k, &(i, j))| engine.joint_table(p_tilde, t[i], t[j]).map_err(|e| e.with_pair(k)))
        .collect();
    let mut out = Vec::with_capacity(4);
    for table in tables {
        out.push(table?);
    }
    let joint_tables: [JointTable; 4] = [out[0], out[1], out[2], out[3]];
    let [c12, c23, c34, c14] = joint_tables.map(|t| t.correlator());
    Ok(LgiResult {
        params: DimensionlessParams {
            p_tilde,
            tau1: t[0],
            dtau: t[1] - t[0],
        },
        times: t,
        c12,
        c23,
        c34,
        c14,
        c_value: c12 + c23 + c34 - c14,
        shortcut_pairs: (0..4).filter(|&k| joint_tables[k].method.is_shortcut()).collect(),
        joint_tables,
        engine: engine.name().to_string(),
    })
}

/// Which engine computes joint tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EngineKind {
    #[default]
    Analytic,
    Grid,
}

impl std::str::FromStr for EngineKind {
    type Err = LgiError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "analytic" => Ok(EngineKind::Analytic),
            "grid" | "oracle" => Ok(EngineKind::Grid),
            other => Err(LgiError::Parameter(format!("unknown engine '{other}' (analytic|grid)"))),
        }
    }
}

/// Builds an engine; smearing requires the grid engine.
pub fn build_engine(kind: EngineKind, smearing: f64, quad: QuadConfig, grid: GridConfig) -> Result<Box<dyn JointEngine>> {
    let m = SmearedMeasurement::new(smearing)?;
    match kind {
        EngineKind::Analytic => {
            AnalyticEngine::check_smearing(&m)?;
            Ok(Box::new(AnalyticEngine::new(quad)))
        }
        EngineKind::Grid => Ok(Box::new(GridEngine::new(grid, m))),
    }
}

/// Settings of [`maximize_c`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaximizeOptions {
    /// Coarse grid cells per axis.
    pub grid: usize,
    /// Stop once the simplex is smaller than this (radians).
    pub resolution: f64,
    pub max_iterations: usize,
}

impl Default for MaximizeOptions {
    fn default() -> Self {
        Self {
            grid: 24,
            resolution: 1e-4 * 2.0 * PI,
            max_iterations: 400,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Maximum {
    pub tau1: f64,
    pub dtau: f64,
    pub result: LgiResult,
    pub evaluations: usize,
}

/// Rectangular search region in `(tau1, dtau)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchBox {
    pub tau1: (f64, f64),
    pub dtau: (f64, f64),
}

impl SearchBox {
    /// `tau1 in [0, 2 pi]`, `dtau in (0, 2 pi)`.
    pub fn full_period() -> Self {
        let eps = 1e-3;
        Self {
            tau1: (0.0, 2.0 * PI),
            dtau: (eps, 2.0 * PI - eps),
        }
    }

    pub fn around(tau1: f64, dtau: f64, half_width: f64) -> Self {
        let full = Self::full_period();
        Self {
            tau1: ((tau1 - half_width).max(full.tau1.0), (tau1 + half_width).min(full.tau1.1)),
            dtau: ((dtau - half_width).max(full.dtau.0), (dtau + half_width).min(full.dtau.1)),
        }
    }

    fn clip(&self, x: [f64; 2]) -> [f64; 2] {
        [x[0].clamp(self.tau1.0, self.tau1.1), x[1].clamp(self.dtau.0, self.dtau.1)]
    }
}

/// Maximizes `C` over the uniform schedule: coarse grid over one period,
/// then Nelder-Mead from the best cell and from the seeds `tau1 in {0.05,
/// pi}` x `dtau in {pi/2, 3 pi/2}`.
pub fn maximize_c(engine: &dyn JointEngine, p_tilde: f64, opts: &MaximizeOptions) -> Result<Maximum> {
    if !p_tilde.is_finite() {
        return Err(LgiError::Parameter(format!("p_tilde must be finite, got {p_tilde}")));
    }
    if opts.grid < 2 {
        return Err(LgiError::Parameter("maximizer grid needs at least 2 cells per axis".into()));
    }
    let region = SearchBox::full_period();
    let n = opts.grid;
    let cells: Vec<[f64; 2]> = (0..n)
        .flat_map(|i| {
            (0..n).map(move |j| {
                [
                    2.0 * PI * i as f64 / n as f64,
                    2.0 * PI * (j as f64 + 0.5) / n as f64,
                ]
            })
        })
        .collect();
    let values: Vec<Result<f64>> = cells
        .par_iter()
        .map(|x| c_at(engine, p_tilde, *x))
        .collect();
    let mut best = (f64::NEG_INFINITY, cells[0]);
    for (x, v) in cells.iter().zip(values) {
        let v = v?;
        if v > best.0 {
            best = (v, *x);
        }
    }
    let mut evaluations = cells.len();

    let step = 2.0 * PI / n as f64;
    let mut seeds = vec![best.1];
    for tau1 in [0.05, PI] {
        for dtau in [PI / 2.0, 1.5 * PI] {
            seeds.push([tau1, dtau]);
        }
    }
    let mut winner = (best.0, best.1);
    for seed in seeds {
        let (x, v, evals) = nelder_mead(|x| c_at(engine, p_tilde, x), seed, step, &region, opts)?;
        evaluations += evals;
        if v > winner.0 {
            winner = (v, x);
        }
    }
    finish(engine, p_tilde, winner.1, evaluations)
}

/// Local maximization inside `region`, started from its centre.
pub fn maximize_in_box(
    engine: &dyn JointEngine,
    p_tilde: f64,
    region: &SearchBox,
    opts: &MaximizeOptions,
) -> Result<Maximum> {
    let start = [
        0.5 * (region.tau1.0 + region.tau1.1),
        0.5 * (region.dtau.0 + region.dtau.1),
    ];
    let step = 0.25 * (region.tau1.1 - region.tau1.0).max(region.dtau.1 - region.dtau.0);
    let (x, _, evals) = nelder_mead(|x| c_at(engine, p_tilde, x), start, step, region, opts)?;
    finish(engine, p_tilde, x, evals)
}

fn finish(engine: &dyn JointEngine, p_tilde: f64, x: [f64; 2], evaluations: usize) -> Result<Maximum> {
    let result = lgi_schedule(engine, p_tilde, &Schedule::uniform(x[0], x[1]))?;
    Ok(Maximum {
        tau1: x[0],
        dtau: x[1],
        result,
        evaluations: evaluations + 1,
    })
}

fn c_at(engine: &dyn JointEngine, p_tilde: f64, x: [f64; 2]) -> Result<f64> {
    Ok(lgi_schedule(engine, p_tilde, &Schedule::uniform(x[0], x[1]))?.c_value)
}

/// Nelder-Mead maximization in two variables with clipping to `region`.
/// Returns the best point, its value and the number of evaluations.
fn nelder_mead(
    f: impl Fn([f64; 2]) -> Result<f64>,
    start: [f64; 2],
    step: f64,
    region: &SearchBox,
    opts: &MaximizeOptions,
) -> Result<([f64; 2], f64, usize)> {
    let mut evals = 0;
    let mut eval = |x: [f64; 2]| -> Result<f64> {
        evals += 1;
        f(x)
    };
    let x0 = region.clip(start);
    let mut simplex: Vec<([f64; 2], f64)> = Vec::with_capacity(3);
    for x in [x0, region.clip([x0[0] + step, x0[1]]), region.clip([x0[0], x0[1] + step])] {
        // a clipped vertex can collapse onto x0; push it the other way
        let x = if x == x0 && simplex.len() > 0 {
            let k = simplex.len() - 1;
            let mut y = x0;
            y[k] -= step;
            region.clip(y)
        } else {
            x
        };
        let v = eval(x)?;
        simplex.push((x, v));
    }

    for _ in 0..opts.max_iterations {
        simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
        let size = simplex
            .iter()
            .skip(1)
            .map(|(x, _)| (x[0] - simplex[0].0[0]).abs().max((x[1] - simplex[0].0[1]).abs()))
            .fold(0.0, f64::max);
        if size < opts.resolution {
            break;
        }
        let centroid = [
            0.5 * (simplex[0].0[0] + simplex[1].0[0]),
            0.5 * (simplex[0].0[1] + simplex[1].0[1]),
        ];
        let worst = simplex[2];
        let towards = |t: f64| {
            region.clip([
                centroid[0] + t * (worst.0[0] - centroid[0]),
                centroid[1] + t * (worst.0[1] - centroid[1]),
            ])
        };
        let xr = towards(-1.0);
        let vr = eval(xr)?;
        if vr > simplex[0].1 {
            let xe = towards(-2.0);
            let ve = eval(xe)?;
            simplex[2] = if ve > vr { (xe, ve) } else { (xr, vr) };
        } else if vr > simplex[1].1 {
            simplex[2] = (xr, vr);
        } else {
            let xc = if vr > worst.1 { towards(-0.5) } else { towards(0.5) };
            let vc = eval(xc)?;
            if vc > worst.1.max(vr) {
                simplex[2] = (xc, vc);
            } else {
                let best = simplex[0].0;
                for k in 1..3 {
                    let x = region.clip([
                        best[0] + 0.5 * (simplex[k].0[0] - best[0]),
                        best[1] + 0.5 * (simplex[k].0[1] - best[1]),
                    ]);
                    let v = eval(x)?;
                    simplex[k] = (x, v);
                }
            }
        }
    }
    simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
    Ok((simplex[0].0, simplex[0].1, evals))
}

/// Parameter that a sweep axis varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    /// First measurement: seconds for a physical base, phase otherwise.
    T1,
    /// Measurement spacing: seconds for a physical base, phase otherwise.
    Dt,
    PTilde,
    /// Mass in amu at fixed `p0` (physical base only).
    Mass,
    /// Peak momentum in kg m/s (physical base only).
    P0,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::T1 => "t1",
            SweepParam::Dt => "dt",
            SweepParam::PTilde => "p_tilde",
            SweepParam::Mass => "mass",
            SweepParam::P0 => "p0",
        }
    }
}

impl std::str::FromStr for SweepParam {
    type Err = LgiError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "t1" | "tau1" => Ok(SweepParam::T1),
            "dt" | "dtau" => Ok(SweepParam::Dt),
            "p_tilde" | "ptilde" => Ok(SweepParam::PTilde),
            "mass" | "mass_amu" => Ok(SweepParam::Mass),
            "p0" => Ok(SweepParam::P0),
            other => Err(LgiError::Parameter(format!("unknown sweep parameter '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub param: SweepParam,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl SweepAxis {
    pub fn values(&self) -> Vec<f64> {
        (0..self.steps)
            .map(|i| self.min + (self.max - self.min) * i as f64 / (self.steps - 1) as f64)
            .collect()
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = LgiError;

    /// `name:min:max:steps`
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 4 {
            return Err(LgiError::Parameter(format!("sweep axis '{s}' is not name:min:max:steps")));
        }
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| LgiError::Parameter(format!("bad number '{t}' in sweep axis '{s}'")))
        };
        Ok(SweepAxis {
            param: parts[0].trim().parse()?,
            min: num(parts[1])?,
            max: num(parts[2])?,
            steps: parts[3]
                .trim()
                .parse()
                .map_err(|_| LgiError::Parameter(format!("bad step count in sweep axis '{s}'")))?,
        })
    }
}

/// Fixed values of the swept parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepBase {
    Physical(PhysicalParams),
    Dimensionless(DimensionlessParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base: SweepBase,
    pub axes: Vec<SweepAxis>,
    /// Maximize over the schedule at every row instead of using `t1`, `dt`.
    pub maximize: bool,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.axes.len() > 2 {
            return Err(LgiError::Parameter("a sweep varies at most two parameters".into()));
        }
        if self.axes.len() == 2 && self.axes[0].param == self.axes[1].param {
            return Err(LgiError::Parameter("sweep axes must differ".into()));
        }
        for a in &self.axes {
            if a.steps < 2 {
                return Err(LgiError::Parameter(format!("axis {} needs at least 2 steps", a.param.name())));
            }
            if !(a.min.is_finite() && a.max.is_finite()) {
                return Err(LgiError::Parameter(format!("axis {} range must be finite", a.param.name())));
            }
            if matches!(self.base, SweepBase::Dimensionless(_)) && matches!(a.param, SweepParam::Mass | SweepParam::P0) {
                return Err(LgiError::Parameter(format!(
                    "axis {} needs a physical parameter block",
                    a.param.name()
                )));
            }
            if self.maximize && matches!(a.param, SweepParam::T1 | SweepParam::Dt) {
                return Err(LgiError::Parameter("cannot sweep the schedule while maximizing over it".into()));
            }
        }
        Ok(())
    }

    /// Axis values for every row, first axis slowest.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let mut rows = vec![Vec::new()];
        for axis in &self.axes {
            let mut next = Vec::new();
            for row in &rows {
                for v in axis.values() {
                    let mut r = row.clone();
                    r.push(v);
                    next.push(r);
                }
            }
            rows = next;
        }
        rows
    }

    fn params_at(&self, values: &[f64]) -> Result<(DimensionlessParams, Option<PhysicalParams>)> {
        match self.base {
            SweepBase::Physical(mut p) => {
                let mut p_tilde = None;
                for (axis, &v) in self.axes.iter().zip(values) {
                    match axis.param {
                        SweepParam::T1 => p.t1 = v,
                        SweepParam::Dt => p.dt = v,
                        SweepParam::Mass => p.mass_amu = v,
                        SweepParam::P0 => p.p0 = v,
                        SweepParam::PTilde => p_tilde = Some(v),
                    }
                }
                if let Some(pt) = p_tilde {
                    p.validate()?;
                    p.p0 = pt * p.momentum_scale();
                }
                Ok((p.to_dimensionless()?, Some(p)))
            }
            SweepBase::Dimensionless(mut d) => {
                for (axis, &v) in self.axes.iter().zip(values) {
                    match axis.param {
                        SweepParam::T1 => d.tau1 = v,
                        SweepParam::Dt => d.dtau = v,
                        SweepParam::PTilde => d.p_tilde = v,
                        SweepParam::Mass | SweepParam::P0 => unreachable!("rejected by validate"),
                    }
                }
                d.validate()?;
                Ok((d, None))
            }
        }
    }
}

/// One sweep row; failures are kept in the row.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub index: usize,
    pub values: Vec<f64>,
    pub params: Option<DimensionlessParams>,
    pub physical: Option<PhysicalParams>,
    pub result: std::result::Result<LgiResult, LgiError>,
}

/// Evaluates every grid point of `spec`. Rows are computed in parallel and
/// returned in row order.
pub fn sweep(engine: &dyn JointEngine, spec: &SweepSpec, opts: &MaximizeOptions) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    sweep_streaming(engine, spec, opts, usize::MAX, |row| {
        rows.push(row);
        Ok(())
    })?;
    Ok(rows)
}

/// Like [`sweep`], but hands rows to `sink` in order, `chunk` rows at a
/// time, so output can be written while later rows are still pending.
pub fn sweep_streaming(
    engine: &dyn JointEngine,
    spec: &SweepSpec,
    opts: &MaximizeOptions,
    chunk: usize,
    mut sink: impl FnMut(SweepRow) -> Result<()>,
) -> Result<()> {
    spec.validate()?;
    let points: Vec<(usize, Vec<f64>)> = spec.points().into_iter().enumerate().collect();
    for block in points.chunks(chunk.max(1)) {
        let rows: Vec<SweepRow> = block
            .par_iter()
            .map(|(index, values)| sweep_row(engine, spec, opts, *index, values.clone()))
            .collect();
        for row in rows {
            sink(row)?;
        }
    }
    Ok(())
}

fn sweep_row(engine: &dyn JointEngine, spec: &SweepSpec, opts: &MaximizeOptions, index: usize, values: Vec<f64>) -> SweepRow {
    let (params, physical, result) = match spec.params_at(&values) {
        Ok((d, phys)) => {
            let r = if spec.maximize {
                maximize_c(engine, d.p_tilde, opts).map(|m| m.result)
            } else {
                lgi_value_with(engine, &d)
            };
            (Some(d), phys, r)
        }
        Err(e) => (None, None, Err(e)),
    };
    SweepRow {
        index,
        values,
        params,
        physical,
        result,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn analytic() -> AnalyticEngine {
        AnalyticEngine::default()
    }

    #[test]
    fn c_is_the_signed_sum() {
        let r = lgi_value(&DimensionlessParams::new(2.0, 0.7217, 5.802).unwrap()).unwrap();
        assert_eq!(r.c_value, r.c12 + r.c23 + r.c34 - r.c14);
        assert!(r.c_value.abs() <= 4.0);
        for c in r.correlators() {
            assert!(c.abs() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn known_violation() {
        // located by a Nelder-Mead search of the same function
        let r = lgi_value(&DimensionlessParams::new(2.0, 0.7217, 5.802).unwrap()).unwrap();
        assert!((r.c_value - 2.1468).abs() < 1e-3, "{}", r.c_value);
        assert!(r.violates());
    }

    #[test]
    fn momentum_sign_and_period_invariance() {
        let a = lgi_value(&DimensionlessParams::new(3.0, 0.374, 6.034).unwrap()).unwrap();
        let b = lgi_value(&DimensionlessParams::new(-3.0, 0.374, 6.034).unwrap()).unwrap();
        assert!((a.c_value - b.c_value).abs() < 1e-9);
        let c = lgi_value(&DimensionlessParams::new(3.0, 0.374 + 2.0 * PI, 6.034).unwrap()).unwrap();
        assert!((a.c_value - c.c_value).abs() < 1e-9);
    }

    #[test]
    fn short_spacing_tends_to_two_from_below() {
        let mut prev = 0.0;
        for &d in &[1e-1, 1e-2, 1e-3] {
            let r = lgi_value(&DimensionlessParams::new(1.0, 0.3, d).unwrap()).unwrap();
            assert!(r.c_value <= 2.0 + 1e-9);
            assert!(r.c_value > prev);
            prev = r.c_value;
        }
        assert!(prev > 1.9);
    }

    #[test]
    fn singular_pair_is_reported_with_index() {
        // dtau = pi/3 puts pair (1,4) at exactly pi
        let d = DimensionlessParams::new(1.0, 0.2, PI / 3.0).unwrap();
        let r = lgi_value(&d).unwrap();
        assert_eq!(r.shortcut_pairs, vec![3]);
        let strict = analytic().with_policy(crate::measurement::SingularPolicy::Error);
        match lgi_value_with(&strict, &d) {
            Err(LgiError::SingularInterval { pair: Some(3), .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn schedule_validation() {
        assert!(Schedule::new([0.0, 1.0, 0.5, 2.0]).is_err());
        assert!(Schedule::new([0.0, 1.0, 1.5, 2.0]).is_ok());
        let r = lgi_schedule(&analytic(), 1.0, &Schedule::new([0.1, 0.9, 2.0, 2.2]).unwrap()).unwrap();
        assert_eq!(r.times, [0.1, 0.9, 2.0, 2.2]);
    }

    #[test]
    fn nelder_mead_finds_quadratic_peak() {
        let region = SearchBox::full_period();
        let (x, v, _) = nelder_mead(
            |x| Ok(-(x[0] - 1.3).powi(2) - 2.0 * (x[1] - 4.1).powi(2)),
            [3.0, 2.0],
            0.5,
            &region,
            &MaximizeOptions::default(),
        )
        .unwrap();
        assert!((x[0] - 1.3).abs() < 1e-3 && (x[1] - 4.1).abs() < 1e-3);
        assert!(v > -1e-6);
        // a peak outside the box ends on the boundary
        let (x, _, _) = nelder_mead(
            |x| Ok(-(x[0] + 1.0).powi(2) - (x[1] - 3.0).powi(2)),
            [2.0, 2.0],
            0.5,
            &region,
            &MaximizeOptions::default(),
        )
        .unwrap();
        assert!(x[0].abs() < 1e-3 && (x[1] - 3.0).abs() < 1e-3);
    }

    #[test]
    fn sweep_single_point_equals_direct() {
        let d = DimensionlessParams::new(2.0, 0.5, 1.2).unwrap();
        let spec = SweepSpec {
            base: SweepBase::Dimensionless(d),
            axes: vec![],
            maximize: false,
        };
        let rows = sweep(&analytic(), &spec, &MaximizeOptions::default()).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].result.as_ref().unwrap().c_value, lgi_value(&d).unwrap().c_value);
    }

    #[test]
    fn sweep_rows_are_ordered_and_errors_stay_in_row() {
        let d = DimensionlessParams::new(1.0, 0.5, 1.2).unwrap();
        let spec = SweepSpec {
            base: SweepBase::Dimensionless(d),
            axes: vec![
                "p_tilde:0:2:3".parse().unwrap(),
                SweepAxis {
                    param: SweepParam::Dt,
                    min: -1.0,
                    max: 1.0,
                    steps: 2,
                },
            ],
            maximize: false,
        };
        let rows = sweep(&analytic(), &spec, &MaximizeOptions::default()).unwrap();
        assert_eq!(rows.len(), 6);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.index, i);
        }
        assert_eq!(rows[0].values, vec![0.0, -1.0]);
        assert!(rows[0].result.is_err());
        assert!(rows[1].result.is_ok());
        assert_eq!(rows[5].values, vec![2.0, 1.0]);
    }

    #[test]
    fn sweep_spec_validation() {
        let d = DimensionlessParams::new(1.0, 0.5, 1.2).unwrap();
        let mk = |axes: Vec<SweepAxis>, maximize| SweepSpec {
            base: SweepBase::Dimensionless(d),
            axes,
            maximize,
        };
        let one: SweepAxis = "mass:1:10:3".parse().unwrap();
        assert!(mk(vec![one], false).validate().is_err());
        let t: SweepAxis = "t1:0:1:1".parse().unwrap();
        assert!(mk(vec![t], false).validate().is_err());
        let t: SweepAxis = "t1:0:1:4".parse().unwrap();
        assert!(mk(vec![t], true).validate().is_err());
        assert!("bogus:0:1:3".parse::<SweepAxis>().is_err());
        assert!("t1:0:1".parse::<SweepAxis>().is_err());
    }

    #[test]
    fn physical_sweep_maps_through_units() {
        let base = PhysicalParams::new(1e3, 2e6, 3.32e-25, 1.5e-6, 2.4e-6).unwrap();
        let spec = SweepSpec {
            base: SweepBase::Physical(base),
            axes: vec!["p0:3.32e-25:3.32e-24:2".parse().unwrap()],
            maximize: false,
        };
        let rows = sweep(&analytic(), &spec, &MaximizeOptions::default()).unwrap();
        let expect = PhysicalParams { p0: 3.32e-24, ..base }.to_dimensionless().unwrap();
        let got = rows[1].params.unwrap();
        assert!((got.p_tilde - expect.p_tilde).abs() < 1e-12 * expect.p_tilde);
    }

    #[test]
    fn engine_factory() {
        assert!(build_engine(EngineKind::Analytic, 0.0, QuadConfig::default(), GridConfig::default()).is_ok());
        assert!(matches!(
            build_engine(EngineKind::Analytic, 0.2, QuadConfig::default(), GridConfig::default()),
            Err(LgiError::Capability(_))
        ));
        let g = build_engine(EngineKind::Grid, 0.2, QuadConfig::default(), GridConfig::default()).unwrap();
        assert_eq!(g.name(), "grid");
        assert!("nope".parse::<EngineKind>().is_err());
    }
}
