//! Adaptive Gauss-Kronrod (10/21) quadrature on finite and half-infinite
//! intervals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{LgiError, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Tolerances and subdivision budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum number of bisections before giving up.
    pub max_subdivisions: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_subdivisions: 5000,
        }
    }
}

impl QuadConfig {
    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(LgiError::Parameter(format!(
                "quadrature tolerances must be positive (rel {}, abs {})",
                self.rel_tol, self.abs_tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

/// Which way a half-line extends from its finite end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `[a, +inf)`
    Plus,
    /// `(-inf, a]`
    Minus,
}

/// How the integrand decays at infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Envelope {
    /// Decays at least like a Gaussian of the given centre and width;
    /// the half-line is truncated 14 widths past the centre.
    Gaussian { center: f64, width: f64 },
    /// Decays algebraically (at least like `1/x^2`). The tail beyond
    /// `from` is mapped onto a finite interval by `x = from + scale t/(1-t)`.
    Algebraic { from: f64, scale: f64 },
    /// Unknown; decay is probed numerically and the call fails if none is found.
    Unknown,
}

/// Truncation point for the Gaussian mode, in envelope widths.
pub const GAUSSIAN_WIDTHS: f64 = 14.0;

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resg = 0.0;
    let mut resk = fc * WGK[10];
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = resk * 0.5;
    let mut resasc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let result = resk * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut err = ((resk - resg) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (result, err)
}

/// Integrates `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<QuadResult> {
    integrate_panels(f, &[a, b], cfg)
}

/// Integrates `f` over `[points[0], points.last()]`, starting from the panels
/// delimited by the (increasing) breakpoints.
pub fn integrate_panels<F: Fn(f64) -> f64>(f: F, points: &[f64], cfg: &QuadConfig) -> Result<QuadResult> {
    cfg.validate()?;
    if points.len() < 2 {
        return Err(LgiError::Parameter("integration needs at least two breakpoints".into()));
    }
    for w in points.windows(2) {
        if !(w[0].is_finite() && w[1].is_finite() && w[0] < w[1]) {
            return Err(LgiError::Parameter(format!(
                "integration limits must be finite and increasing, got [{}, {}]",
                w[0], w[1]
            )));
        }
    }

    let mut heap = BinaryHeap::with_capacity(points.len() + 64);
    let mut total = 0.0;
    let mut total_err = 0.0;
    let mut evaluations = 0;
    for w in points.windows(2) {
        let (value, error) = kronrod21(&f, w[0], w[1]);
        evaluations += 21;
        total += value;
        total_err += error;
        heap.push(Segment {
            a: w[0],
            b: w[1],
            value,
            error,
        });
    }
    // segments too narrow to bisect keep their error here
    let mut frozen_err = 0.0;
    let mut frozen_value = 0.0;
    let mut splits = 0;

    loop {
        let tolerance = cfg.abs_tol.max(cfg.rel_tol * total.abs());
        if total_err <= tolerance {
            return Ok(QuadResult {
                value: total,
                abs_error_estimate: total_err,
                evaluations,
            });
        }
        let worst = match heap.pop() {
            Some(s) => s,
            None => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        if !(worst.a < mid && mid < worst.b) || (worst.b - worst.a) < 1e3 * f64::EPSILON * mid.abs().max(1e-300) {
            frozen_err += worst.error;
            frozen_value += worst.value;
            if frozen_err > tolerance {
                break;
            }
            continue;
        }
        if splits >= cfg.max_subdivisions {
            heap.push(worst);
            break;
        }
        splits += 1;
        let (v1, e1) = kronrod21(&f, worst.a, mid);
        let (v2, e2) = kronrod21(&f, mid, worst.b);
        evaluations += 42;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }

    // recompute the sums to shed drift from the incremental updates
    let value: f64 = heap.iter().map(|s| s.value).sum::<f64>() + frozen_value;
    let err: f64 = heap.iter().map(|s| s.error).sum::<f64>() + frozen_err;
    let tolerance = cfg.abs_tol.max(cfg.rel_tol * value.abs());
    if err <= tolerance {
        return Ok(QuadResult {
            value,
            abs_error_estimate: err,
            evaluations,
        });
    }
    Err(LgiError::Convergence {
        estimate: value,
        abs_error: err,
        evaluations,
    })
}

/// Integrates `f` over a half-line starting at `a`.
pub fn integrate_halfline<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    direction: Direction,
    envelope: Envelope,
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    integrate_halfline_panels(f, a, direction, envelope, &[], cfg)
}

/// Like [`integrate_halfline`] with extra interior breakpoints. Breakpoints
/// outside the integration range are ignored.
pub fn integrate_halfline_panels<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    direction: Direction,
    envelope: Envelope,
    breakpoints: &[f64],
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    cfg.validate()?;
    if !a.is_finite() {
        return Err(LgiError::Parameter(format!("half-line start must be finite, got {a}")));
    }
    // reflect the Minus case onto [-a, inf)
    let sign = match direction {
        Direction::Plus => 1.0,
        Direction::Minus => -1.0,
    };
    let g = |x: f64| f(sign * x);
    let start = sign * a;
    let mut points: Vec<f64> = breakpoints.iter().map(|&p| sign * p).filter(|&p| p > start).collect();

    match envelope {
        Envelope::Gaussian { center, width } => {
            if !(width > 0.0 && width.is_finite() && center.is_finite()) {
                return Err(LgiError::Parameter(format!(
                    "Gaussian envelope needs finite centre and positive width, got ({center}, {width})"
                )));
            }
            let end = sign * center + GAUSSIAN_WIDTHS * width;
            if end <= start {
                return Ok(QuadResult {
                    value: 0.0,
                    abs_error_estimate: 0.0,
                    evaluations: 0,
                });
            }
            // Mills-ratio bound on the discarded tail, scaled by the integrand there
            let tail = g(end).abs() * width / GAUSSIAN_WIDTHS;
            if tail > cfg.abs_tol / 10.0 {
                return Err(LgiError::Parameter(format!(
                    "integrand does not follow the Gaussian envelope: tail bound {tail:.3e} at x = {}",
                    sign * end
                )));
            }
            points.retain(|&p| p < end);
            points.insert(0, start);
            points.push(end);
            sort_dedup(&mut points);
            let mut r = integrate_panels(g, &points, cfg)?;
            r.abs_error_estimate += tail;
            Ok(r)
        }
        Envelope::Algebraic { from, scale } => {
            if !(scale > 0.0 && scale.is_finite() && from.is_finite()) {
                return Err(LgiError::Parameter(format!(
                    "algebraic envelope needs finite start and positive scale, got ({from}, {scale})"
                )));
            }
            let cut = (sign * from).max(start);
            points.retain(|&p| p < cut);
            points.insert(0, start);
            points.push(cut);
            sort_dedup(&mut points);
            let core = if points.len() >= 2 {
                integrate_panels(&g, &points, cfg)?
            } else {
                QuadResult {
                    value: 0.0,
                    abs_error_estimate: 0.0,
                    evaluations: 0,
                }
            };
            let mapped = |t: f64| {
                let s = 1.0 - t;
                g(cut + scale * t / s) * scale / (s * s)
            };
            let tail = integrate(mapped, 0.0, 1.0, cfg)?;
            Ok(QuadResult {
                value: core.value + tail.value,
                abs_error_estimate: core.abs_error_estimate + tail.abs_error_estimate,
                evaluations: core.evaluations + tail.evaluations,
            })
        }
        Envelope::Unknown => {
            let end = detect_decay(&g, start, cfg.abs_tol).ok_or_else(|| {
                LgiError::Parameter(
                    "no decay envelope supplied and the integrand was not seen to decay; pass an envelope".into(),
                )
            })?;
            points.retain(|&p| p < end);
            points.insert(0, start);
            points.push(end);
            sort_dedup(&mut points);
            integrate_panels(g, &points, cfg)
        }
    }
}

fn sort_dedup(points: &mut Vec<f64>) {
    points.sort_by(|a, b| a.total_cmp(b));
    points.dedup();
}

/// Finds a point past which `|g(x)| * (1 + |x|)` stays below `abs_tol * 1e-3`
/// on three consecutive doublings of the probe distance.
fn detect_decay<G: Fn(f64) -> f64>(g: &G, start: f64, abs_tol: f64) -> Option<f64> {
    let threshold = abs_tol * 1e-3;
    let mut d = 1.0;
    let mut quiet = 0;
    let mut first_quiet = None;
    for _ in 0..80 {
        let x = start + d;
        if (g(x).abs() * (1.0 + x.abs())) < threshold {
            if quiet == 0 {
                first_quiet = Some(x);
            }
            quiet += 1;
            if quiet == 3 {
                return first_quiet;
            }
        } else {
            quiet = 0;
        }
        d *= 2.0;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn gauss(x: f64) -> f64 {
        (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
    }

    fn tight() -> QuadConfig {
        QuadConfig {
            rel_tol: 1e-13,
            abs_tol: 1e-13,
            max_subdivisions: 5000,
        }
    }

    // composite Gauss-Legendre with nodes from Newton iteration; independent of GK21
    fn gauss_legendre_composite<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, order: usize) -> f64 {
        let mut nodes = Vec::with_capacity(order);
        for i in 0..order {
            let mut x = (PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
            let mut w = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=order {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                let dp = order as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                w = 2.0 / ((1.0 - x * x) * dp * dp);
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes.push((x, w));
        }
        let h = (b - a) / panels as f64;
        let mut sum = 0.0;
        for p in 0..panels {
            let c = a + (p as f64 + 0.5) * h;
            for &(x, w) in &nodes {
                sum += w * f(c + 0.5 * h * x);
            }
        }
        sum * 0.5 * h
    }

    #[test]
    fn gaussian_normalization() {
        let r = integrate(gauss, -40.0, 40.0, &QuadConfig::default()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        let r = integrate(gauss, 0.0, 40.0, &QuadConfig::default()).unwrap();
        assert!((r.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn oscillatory_against_fixed_rule() {
        let f = |x: f64| (-x * x).exp() * (50.0 * x).cos();
        let r = integrate(f, -10.0, 10.0, &tight()).unwrap();
        // exact value sqrt(pi) exp(-625) underflows to zero at this scale
        let oracle = gauss_legendre_composite(f, -10.0, 10.0, 400, 30);
        assert!((r.value - oracle).abs() < 1e-13, "{} vs {}", r.value, oracle);
        assert!(r.value.abs() < 1e-13);
        let g = |x: f64| (-x * x).exp() * (3.0 * x).cos();
        let r = integrate(g, -10.0, 10.0, &tight()).unwrap();
        let exact = PI.sqrt() * (-9.0f64 / 4.0).exp();
        assert!((r.value - exact).abs() < 1e-13);
        let oracle = gauss_legendre_composite(g, -10.0, 10.0, 200, 30);
        assert!((r.value - oracle).abs() < 1e-13);
    }

    #[test]
    fn error_estimate_is_honest_on_hard_integrand() {
        let f = |x: f64| x.sqrt().ln();
        let r = integrate(f, 1e-300, 1.0, &QuadConfig::default()).unwrap();
        assert!((r.value + 0.5).abs() <= r.abs_error_estimate.max(1e-12) * 10.0);
    }

    #[test]
    fn budget_exhaustion_reports_best_estimate() {
        let cfg = QuadConfig {
            rel_tol: 1e-14,
            abs_tol: 1e-16,
            max_subdivisions: 3,
        };
        match integrate(|x: f64| (200.0 * x).sin().abs(), 0.0, 10.0, &cfg) {
            Err(LgiError::Convergence { estimate, evaluations, .. }) => {
                assert!(estimate.is_finite());
                assert!(evaluations > 0);
            }
            other => panic!("expected convergence error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_limits_and_tolerances() {
        assert!(integrate(gauss, 1.0, 0.0, &QuadConfig::default()).is_err());
        assert!(integrate(gauss, 0.0, f64::INFINITY, &QuadConfig::default()).is_err());
        let cfg = QuadConfig {
            rel_tol: 0.0,
            ..QuadConfig::default()
        };
        assert!(integrate(gauss, 0.0, 1.0, &cfg).is_err());
    }

    #[test]
    fn halfline_gaussian_mode() {
        let env = Envelope::Gaussian {
            center: 0.0,
            width: 1.0,
        };
        let r = integrate_halfline(gauss, 0.0, Direction::Plus, env, &QuadConfig::default()).unwrap();
        assert!((r.value - 0.5).abs() < 1e-12);
        let r = integrate_halfline(gauss, 0.0, Direction::Minus, env, &QuadConfig::default()).unwrap();
        assert!((r.value - 0.5).abs() < 1e-12);

        let shifted = |x: f64| gauss(x - 8.0);
        let env = Envelope::Gaussian {
            center: 8.0,
            width: 1.0,
        };
        let r = integrate_halfline(shifted, 0.0, Direction::Plus, env, &QuadConfig::default()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
        let r = integrate_halfline(shifted, 0.0, Direction::Minus, env, &QuadConfig::default()).unwrap();
        assert!(r.value.abs() < 1e-14);
    }

    #[test]
    fn halfline_rejects_misdeclared_envelope() {
        let wide = |x: f64| (-x * x / 50.0).exp();
        let env = Envelope::Gaussian {
            center: 0.0,
            width: 0.1,
        };
        assert!(matches!(
            integrate_halfline(wide, 0.0, Direction::Plus, env, &QuadConfig::default()),
            Err(LgiError::Parameter(_))
        ));
    }

    #[test]
    fn halfline_algebraic_mode() {
        // Cauchy density: half-line mass 1/2, tails ~ 1/x^2
        let f = |x: f64| 1.0 / (PI * (1.0 + x * x));
        let env = Envelope::Algebraic { from: 5.0, scale: 5.0 };
        let r = integrate_halfline(f, 0.0, Direction::Plus, env, &QuadConfig::default()).unwrap();
        assert!((r.value - 0.5).abs() < 1e-11);
        let env = Envelope::Algebraic { from: -3.0, scale: 2.0 };
        let r = integrate_halfline(f, 1.0, Direction::Minus, env, &QuadConfig::default()).unwrap();
        let exact = 0.5 + 1.0f64.atan() / PI;
        assert!((r.value - exact).abs() < 1e-11);
    }

    #[test]
    fn halfline_unknown_envelope() {
        let r = integrate_halfline(gauss, 0.0, Direction::Plus, Envelope::Unknown, &QuadConfig::default()).unwrap();
        assert!((r.value - 0.5).abs() < 1e-12);
        let flat = |_x: f64| 1.0;
        assert!(matches!(
            integrate_halfline(flat, 0.0, Direction::Plus, Envelope::Unknown, &QuadConfig::default()),
            Err(LgiError::Parameter(_))
        ));
    }

    #[test]
    fn halfline_pair_sums_to_whole_line() {
        let f = |x: f64| (-(x - 1.3) * (x - 1.3) / 2.0).exp() * (1.0 + 0.5 * (7.0 * x).sin());
        let env = Envelope::Gaussian {
            center: 1.3,
            width: 1.0,
        };
        let cfg = QuadConfig::default();
        let lo = integrate_halfline(f, 0.4, Direction::Minus, env, &cfg).unwrap();
        let hi = integrate_halfline(f, 0.4, Direction::Plus, env, &cfg).unwrap();
        let whole = integrate(f, -20.0, 25.0, &cfg).unwrap();
        assert!((lo.value + hi.value - whole.value).abs() < 1e-9);
    }

    #[test]
    fn doubling_budget_stays_within_error_estimate() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..25 {
            let k = rng.gen_range(1.0..60.0);
            let c = rng.gen_range(-2.0..2.0);
            let w = rng.gen_range(0.05..2.0);
            let f = move |x: f64| (-(x - c) * (x - c) / (2.0 * w * w)).exp() * (k * x).cos();
            let small = QuadConfig {
                max_subdivisions: 400,
                ..QuadConfig::default()
            };
            let big = QuadConfig {
                max_subdivisions: 800,
                ..QuadConfig::default()
            };
            let a = integrate(f, -15.0, 15.0, &small).unwrap();
            let b = integrate(f, -15.0, 15.0, &big).unwrap();
            assert!((a.value - b.value).abs() <= a.abs_error_estimate.max(1e-15));
        }
    }
}
