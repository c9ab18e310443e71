//! Run configuration: a `key = value` file merged with command-line values,
//! the latter winning.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{LgiError, Result};
use crate::grid::GridConfig;
use crate::lgi::EngineKind;
use crate::quadrature::QuadConfig;
use crate::units::{DimensionlessParams, PhysicalParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    Csv,
    Json,
    #[default]
    Pretty,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Pretty => "pretty",
        }
    }
}

impl std::str::FromStr for Format {
    type Err = LgiError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "pretty" => Ok(Format::Pretty),
            other => Err(LgiError::Parameter(format!("unknown format '{other}' (csv|json|pretty)"))),
        }
    }
}

/// Recognized keys, in echo order.
pub const KEYS: [&str; 18] = [
    "engine",
    "mass_amu",
    "omega",
    "p0",
    "t1",
    "dt",
    "p_tilde",
    "tau1",
    "dtau",
    "maximize",
    "smearing",
    "format",
    "rel_tol",
    "abs_tol",
    "max_subdivisions",
    "grid_points",
    "grid_step",
    "richardson",
];

/// Unvalidated settings from one source. Keys are stored as given.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
}

impl RawConfig {
    /// Parses `key = value` lines; `#` starts a comment, blank lines are
    /// skipped, dashes in keys are read as underscores.
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = Self::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| LgiError::Parameter(format!("config line {}: expected key = value", n + 1)))?;
            out.set(k.trim(), v.trim())
                .map_err(|e| LgiError::Parameter(format!("config line {}: {e}", n + 1)))?;
        }
        Ok(out)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LgiError::Io(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        let key = key.replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(LgiError::Parameter(format!("unknown key '{key}'")));
        }
        self.values.insert(key, value.into());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// `other` wins on every key it sets.
    pub fn merged(mut self, other: &RawConfig) -> Self {
        for (k, v) in &other.values {
            self.values.insert(k.clone(), v.clone());
        }
        self
    }

    fn num(&self, key: &str) -> Result<Option<f64>> {
        self.get(key)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| LgiError::Parameter(format!("{key}: '{v}' is not a number")))
            })
            .transpose()
    }

    fn count(&self, key: &str) -> Result<Option<usize>> {
        self.get(key)
            .map(|v| {
                v.parse::<usize>()
                    .map_err(|_| LgiError::Parameter(format!("{key}: '{v}' is not a non-negative integer")))
            })
            .transpose()
    }

    fn flag(&self, key: &str) -> Result<Option<bool>> {
        self.get(key)
            .map(|v| match v.to_ascii_lowercase().as_str() {
                "1" | "true" | "yes" | "on" => Ok(true),
                "0" | "false" | "no" | "off" => Ok(false),
                _ => Err(LgiError::Parameter(format!("{key}: '{v}' is not a boolean"))),
            })
            .transpose()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamBlock {
    Physical(PhysicalParams),
    Dimensionless(DimensionlessParams),
}

impl ParamBlock {
    pub fn dimensionless(&self) -> Result<DimensionlessParams> {
        match self {
            ParamBlock::Physical(p) => p.to_dimensionless(),
            ParamBlock::Dimensionless(d) => Ok(*d),
        }
    }

    pub fn physical(&self) -> Option<&PhysicalParams> {
        match self {
            ParamBlock::Physical(p) => Some(p),
            ParamBlock::Dimensionless(_) => None,
        }
    }
}

/// Validated configuration of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub engine: EngineKind,
    pub params: ParamBlock,
    pub maximize: bool,
    /// Boundary smearing in units of sigma0.
    pub smearing: f64,
    pub format: Format,
    pub quad: QuadConfig,
    pub grid: GridConfig,
    raw: RawConfig,
}

/// Compact, exact text for echoed numbers: plain for moderate magnitudes,
/// exponent form otherwise.
fn echo_num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-3..1e6).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

const PHYSICAL: [&str; 5] = ["mass_amu", "omega", "p0", "t1", "dt"];
const DIMENSIONLESS: [&str; 3] = ["p_tilde", "tau1", "dtau"];

impl RunConfig {
    pub fn from_raw(raw: RawConfig) -> Result<Self> {
        let maximize = raw.flag("maximize")?.unwrap_or(false);
        let has = |k: &&str| raw.get(k).is_some();
        let phys = PHYSICAL.iter().any(has);
        let dimless = DIMENSIONLESS.iter().any(has);
        let schedule_default = |key: &str| -> Result<f64> {
            match raw.num(key)? {
                Some(v) => Ok(v),
                // the schedule is overwritten by the maximizer
                None if maximize => Ok(if key == "dt" || key == "dtau" { 1.0 } else { 0.0 }),
                None => Err(LgiError::Parameter(format!("missing {key} (or pass maximize)"))),
            }
        };
        let required = |key: &str| -> Result<f64> {
            raw.num(key)?
                .ok_or_else(|| LgiError::Parameter(format!("missing {key}")))
        };
        let params = match (phys, dimless) {
            (true, true) => {
                return Err(LgiError::Parameter(
                    "give either mass_amu/omega/p0/t1/dt or p_tilde/tau1/dtau, not both".into(),
                ))
            }
            (false, false) => return Err(LgiError::Parameter("no parameter block given".into())),
            (true, false) => {
                let p = PhysicalParams::new(
                    required("mass_amu")?,
                    required("omega")?,
                    required("p0")?,
                    schedule_default("t1")?,
                    schedule_default("dt")?,
                )?;
                if maximize {
                    p.to_dimensionless()?;
                }
                ParamBlock::Physical(p)
            }
            (false, true) => ParamBlock::Dimensionless(DimensionlessParams::new(
                required("p_tilde")?,
                schedule_default("tau1")?,
                schedule_default("dtau")?,
            )?),
        };

        let defaults_q = QuadConfig::default();
        let quad = QuadConfig {
            rel_tol: raw.num("rel_tol")?.unwrap_or(defaults_q.rel_tol),
            abs_tol: raw.num("abs_tol")?.unwrap_or(defaults_q.abs_tol),
            max_subdivisions: raw.count("max_subdivisions")?.unwrap_or(defaults_q.max_subdivisions),
        };
        if !(quad.rel_tol >= 1e-15 && quad.rel_tol <= 1e-2 && quad.abs_tol >= 1e-16 && quad.abs_tol <= 1e-2) {
            return Err(LgiError::Parameter(
                "tolerances must lie in [1e-15, 1e-2] (rel) and [1e-16, 1e-2] (abs)".into(),
            ));
        }
        if !(10..=1_000_000).contains(&quad.max_subdivisions) {
            return Err(LgiError::Parameter("max_subdivisions must lie in [10, 1e6]".into()));
        }
        let defaults_g = GridConfig::default();
        let grid = GridConfig {
            min_points: raw.count("grid_points")?.unwrap_or(defaults_g.min_points),
            dtau_step: raw.num("grid_step")?.unwrap_or(defaults_g.dtau_step),
            richardson: raw.flag("richardson")?.unwrap_or(defaults_g.richardson),
        };
        if !(16..=crate::grid::MAX_POINTS).contains(&grid.min_points) {
            return Err(LgiError::Parameter(format!(
                "grid_points must lie in [16, {}]",
                crate::grid::MAX_POINTS
            )));
        }
        if !(grid.dtau_step > 0.0 && grid.dtau_step <= 0.1) {
            return Err(LgiError::Parameter("grid_step must lie in (0, 0.1]".into()));
        }
        let smearing = raw.num("smearing")?.unwrap_or(0.0);
        if !(smearing >= 0.0 && smearing.is_finite()) {
            return Err(LgiError::Parameter(format!("smearing must be finite and >= 0, got {smearing}")));
        }
        Ok(Self {
            engine: raw.get("engine").map(str::parse).transpose()?.unwrap_or_default(),
            params,
            maximize,
            smearing,
            format: raw.get("format").map(str::parse).transpose()?.unwrap_or_default(),
            quad,
            grid,
            raw,
        })
    }

    /// Effective settings as `key=value` pairs, explicit keys first then
    /// the defaults that were applied.
    pub fn echo(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("engine".to_string(), format!("{:?}", self.engine).to_ascii_lowercase()),
            ("format".to_string(), self.format.name().to_string()),
            ("maximize".to_string(), self.maximize.to_string()),
            ("smearing".to_string(), echo_num(self.smearing)),
        ];
        match self.params {
            ParamBlock::Physical(p) => {
                out.push(("mass_amu".into(), echo_num(p.mass_amu)));
                out.push(("omega".into(), echo_num(p.omega)));
                out.push(("p0".into(), echo_num(p.p0)));
                if !self.maximize {
                    out.push(("t1".into(), echo_num(p.t1)));
                    out.push(("dt".into(), echo_num(p.dt)));
                }
            }
            ParamBlock::Dimensionless(d) => {
                out.push(("p_tilde".into(), echo_num(d.p_tilde)));
                if !self.maximize {
                    out.push(("tau1".into(), echo_num(d.tau1)));
                    out.push(("dtau".into(), echo_num(d.dtau)));
                }
            }
        }
        match self.engine {
            EngineKind::Analytic => {
                out.push(("rel_tol".into(), echo_num(self.quad.rel_tol)));
                out.push(("abs_tol".into(), echo_num(self.quad.abs_tol)));
                out.push(("max_subdivisions".into(), self.quad.max_subdivisions.to_string()));
            }
            EngineKind::Grid => {
                out.push(("grid_points".into(), self.grid.min_points.to_string()));
                out.push(("grid_step".into(), echo_num(self.grid.dtau_step)));
                out.push(("richardson".into(), self.grid.richardson.to_string()));
            }
        }
        out.sort_by_key(|(k, _)| KEYS.iter().position(|x| x == k));
        out
    }

    pub fn raw(&self) -> &RawConfig {
        &self.raw
    }
}
