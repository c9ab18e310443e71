//! Output assembly: CSV, JSON and a human-readable layout.
//!
//! Machine formats carry 12 significant digits; the pretty layout uses 4.
//! Every report starts with the effective configuration.

use std::io::Write;

use serde_json::{json, Map, Value};

use crate::config::Format;
use crate::error::{LgiError, Result};
use crate::lgi::{LgiResult, Maximum, SweepRow, SweepSpec, PAIR_LABELS};
use crate::measurement::{JointTable, Outcome};
use crate::tables::ComputedRow;
use crate::units::PhysicalParams;

pub const NO_VIOLATION: &str = "no violation (C ≤ 2)";
pub const VIOLATION: &str = "violation (C > 2)";

pub fn verdict(c: f64) -> &'static str {
    if c > 2.0 {
        VIOLATION
    } else {
        NO_VIOLATION
    }
}

/// Machine number: 12 significant digits.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        x.to_string()
    }
}

/// Pretty number: 4 significant digits.
pub fn short(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 {
        "0".into()
    } else if (1e-3..1e5).contains(&a) {
        let decimals = (3 - a.log10().floor() as i32).max(0) as usize;
        format!("{x:.decimals$}")
    } else if x.is_finite() {
        format!("{x:.3e}")
    } else {
        x.to_string()
    }
}

/// JSON number rounded to 12 significant digits.
fn jnum(x: f64) -> Value {
    num(x).parse::<f64>().map(Value::from).unwrap_or(Value::Null)
}

fn io(e: std::io::Error) -> LgiError {
    LgiError::Io(e.to_string())
}

pub fn write_echo(out: &mut dyn Write, echo: &[(String, String)]) -> Result<()> {
    for (k, v) in echo {
        writeln!(out, "# {k}={v}").map_err(io)?;
    }
    Ok(())
}

/// Derived laboratory quantities shown alongside a result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derived {
    pub sigma0: f64,
    pub a_cl: f64,
    pub v0: f64,
    pub period: f64,
}

impl Derived {
    pub fn of(p: &PhysicalParams) -> Self {
        Self {
            sigma0: p.sigma0(),
            a_cl: p.classical_amplitude(),
            v0: p.v0(),
            period: p.period(),
        }
    }
}

/// Everything `compute` prints.
#[derive(Debug, Clone, PartialEq)]
pub struct ComputeReport {
    pub echo: Vec<(String, String)>,
    pub result: LgiResult,
    pub derived: Option<Derived>,
    pub omega: Option<f64>,
    pub maximum: Option<Maximum>,
}

impl ComputeReport {
    /// Schedule in seconds when a physical block was given.
    fn seconds(&self) -> Option<(f64, f64)> {
        self.omega
            .map(|w| (self.result.times[0] / w, (self.result.times[1] - self.result.times[0]) / w))
    }

    pub fn write(&self, out: &mut dyn Write, format: Format) -> Result<()> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => self.write_json(out),
            Format::Pretty => self.write_pretty(out),
        }
    }

    fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        write_echo(out, &self.echo)?;
        let mut header = vec![
            "p_tilde", "tau1", "dtau", "t1_s", "dt_s", "sigma0_m", "A_cl_m", "v0_m_s", "c12", "c23", "c34", "c14",
            "C",
        ]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>();
        for label in PAIR_LABELS {
            for o in ["pp", "pm", "mp", "mm"] {
                header.push(format!("{}_{o}", label.to_ascii_lowercase()));
            }
        }
        header.push("verdict".into());
        writeln!(out, "{}", header.join(",")).map_err(io)?;

        let r = &self.result;
        let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
        let secs = self.seconds();
        let mut row = vec![
            num(r.params.p_tilde),
            num(r.params.tau1),
            num(r.params.dtau),
            opt(secs.map(|s| s.0)),
            opt(secs.map(|s| s.1)),
            opt(self.derived.map(|d| d.sigma0)),
            opt(self.derived.map(|d| d.a_cl)),
            opt(self.derived.map(|d| d.v0)),
        ];
        row.extend(r.correlators().iter().map(|&c| num(c)));
        row.push(num(r.c_value));
        for t in &r.joint_tables {
            row.extend(t.entries().iter().map(|&p| num(p)));
        }
        row.push(verdict(r.c_value).into());
        writeln!(out, "{}", row.join(",")).map_err(io)
    }

    pub fn to_json(&self) -> Value {
        let r = &self.result;
        let mut config = Map::new();
        for (k, v) in &self.echo {
            config.insert(k.clone(), Value::String(v.clone()));
        }
        let mut doc = json!({
            "config": config,
            "engine": r.engine,
            "params": {
                "p_tilde": jnum(r.params.p_tilde),
                "tau1": jnum(r.params.tau1),
                "dtau": jnum(r.params.dtau),
            },
            "times": r.times.iter().map(|&t| jnum(t)).collect::<Vec<_>>(),
            "c12": jnum(r.c12),
            "c23": jnum(r.c23),
            "c34": jnum(r.c34),
            "c14": jnum(r.c14),
            "c_value": jnum(r.c_value),
            "joint_tables": r.joint_tables.iter().zip(PAIR_LABELS).map(|(t, l)| table_json(l, t)).collect::<Vec<_>>(),
            "shortcut_pairs": r.shortcut_pairs,
            "verdict": verdict(r.c_value),
        });
        if let (Some(d), Some((t1, dt))) = (self.derived, self.seconds()) {
            doc["derived"] = json!({
                "sigma0_m": jnum(d.sigma0),
                "A_cl_m": jnum(d.a_cl),
                "v0_m_s": jnum(d.v0),
                "period_s": jnum(d.period),
                "t1_s": jnum(t1),
                "dt_s": jnum(dt),
            });
        }
        if let Some(m) = &self.maximum {
            doc["maximize"] = json!({ "evaluations": m.evaluations });
        }
        doc
    }

    fn write_json(&self, out: &mut dyn Write) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.to_json()).map_err(|e| LgiError::Io(e.to_string()))?;
        writeln!(out, "{text}").map_err(io)
    }

    fn write_pretty(&self, out: &mut dyn Write) -> Result<()> {
        write_echo(out, &self.echo)?;
        let r = &self.result;
        let w = |out: &mut dyn Write, s: String| writeln!(out, "{s}").map_err(io);
        w(out, format!("engine     {}", r.engine))?;
        w(
            out,
            format!(
                "p_tilde    {}   tau1 {}   dtau {}",
                short(r.params.p_tilde),
                short(r.params.tau1),
                short(r.params.dtau)
            ),
        )?;
        if let (Some(d), Some((t1, dt))) = (self.derived, self.seconds()) {
            w(out, format!("t1         {} s   dt {} s   T {} s", short(t1), short(dt), short(d.period)))?;
            w(
                out,
                format!("sigma0     {} m   A_cl {} m   v0 {} m/s", short(d.sigma0), short(d.a_cl), short(d.v0)),
            )?;
        }
        if let Some(m) = &self.maximize_note() {
            w(out, m.clone())?;
        }
        w(out, "pair   P++        P+-        P-+        P--        C_ij".into())?;
        for ((t, label), c) in r.joint_tables.iter().zip(PAIR_LABELS).zip(r.correlators()) {
            let e = t.entries();
            let mut line = format!("{label}  ");
            for p in e.iter().chain(std::iter::once(&c)) {
                line.push_str(&format!(" {:<10}", short(*p)));
            }
            if t.method.is_shortcut() {
                line.push_str(&format!(" ({:?})", t.method));
            }
            w(out, line.trim_end().to_string())?;
        }
        w(out, format!("C = {}   {}", short(r.c_value), verdict(r.c_value)))
    }

    fn maximize_note(&self) -> Option<String> {
        self.maximum
            .as_ref()
            .map(|m| format!("maximized over the schedule ({} evaluations)", m.evaluations))
    }
}

fn table_json(label: &str, t: &JointTable) -> Value {
    json!({
        "pair": label,
        "p_pp": jnum(t.get(Outcome::Plus, Outcome::Plus)),
        "p_pm": jnum(t.get(Outcome::Plus, Outcome::Minus)),
        "p_mp": jnum(t.get(Outcome::Minus, Outcome::Plus)),
        "p_mm": jnum(t.get(Outcome::Minus, Outcome::Minus)),
        "correlator": jnum(t.correlator()),
        "method": t.method,
    })
}

pub const TABLE_COLUMNS: [&str; 8] = ["m_amu", "sigma0_m", "p0", "v0", "A_cl", "C_paper", "C_computed", "abs_dev"];

/// Table recomputation. Failed rows leave `C_computed` and `abs_dev` empty
/// and are explained in trailing comment lines.
pub fn write_table(
    out: &mut dyn Write,
    format: Format,
    echo: &[(String, String)],
    which: u8,
    rows: &[ComputedRow],
) -> Result<()> {
    match format {
        Format::Csv => {
            write_echo(out, echo)?;
            writeln!(out, "{}", TABLE_COLUMNS.join(",")).map_err(io)?;
            for r in rows {
                let d = Derived::of(&r.params);
                let fields = [
                    num(r.row.mass_amu),
                    num(d.sigma0),
                    num(r.row.p0),
                    num(d.v0),
                    num(d.a_cl),
                    num(r.row.c_published),
                    r.c_computed.as_ref().map(|&c| num(c)).unwrap_or_default(),
                    r.abs_dev().map(num).unwrap_or_default(),
                ];
                writeln!(out, "{}", fields.join(",")).map_err(io)?;
            }
            for (i, r) in rows.iter().enumerate() {
                if let Err(e) = &r.c_computed {
                    writeln!(out, "# row {}: {e}", i + 1).map_err(io)?;
                }
            }
            Ok(())
        }
        Format::Json => {
            let doc = json!({
                "config": echo.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect::<Map<_, _>>(),
                "table": which,
                "rows": rows.iter().map(|r| {
                    let d = Derived::of(&r.params);
                    json!({
                        "m_amu": jnum(r.row.mass_amu),
                        "sigma0_m": jnum(d.sigma0),
                        "p0": jnum(r.row.p0),
                        "v0": jnum(d.v0),
                        "A_cl": jnum(d.a_cl),
                        "C_paper": jnum(r.row.c_published),
                        "C_computed": r.c_computed.as_ref().map(|&c| jnum(c)).unwrap_or(Value::Null),
                        "abs_dev": r.abs_dev().map(jnum).unwrap_or(Value::Null),
                        "error": r.c_computed.as_ref().err().map(|e| e.to_string()),
                    })
                }).collect::<Vec<_>>(),
            });
            let text = serde_json::to_string_pretty(&doc).map_err(|e| LgiError::Io(e.to_string()))?;
            writeln!(out, "{text}").map_err(io)
        }
        Format::Pretty => {
            write_echo(out, echo)?;
            writeln!(out, "table {which}").map_err(io)?;
            writeln!(
                out,
                "{:<10} {:<10} {:<10} {:<10} {:<10} {:<8} {:<10} {:<8}",
                "m (amu)", "sigma0 (m)", "p0", "v0 (m/s)", "A_cl (m)", "C pub", "C", "|dev|"
            )
            .map_err(io)?;
            for r in rows {
                let d = Derived::of(&r.params);
                let (c, dev) = match &r.c_computed {
                    Ok(c) => (short(*c), r.abs_dev().map(short).unwrap_or_default()),
                    Err(e) => (format!("error: {e}"), String::new()),
                };
                writeln!(
                    out,
                    "{:<10} {:<10} {:<10} {:<10} {:<10} {:<8} {:<10} {:<8}",
                    short(r.row.mass_amu),
                    short(d.sigma0),
                    short(r.row.p0),
                    short(d.v0),
                    short(d.a_cl),
                    short(r.row.c_published),
                    c,
                    dev
                )
                .map_err(io)?;
            }
            Ok(())
        }
    }
}

pub fn sweep_header(spec: &SweepSpec) -> Vec<String> {
    let mut h = vec!["index".to_string()];
    h.extend(spec.axes.iter().map(|a| a.param.name().to_string()));
    for k in ["p_tilde", "tau1", "dtau", "c12", "c23", "c34", "c14", "C", "error"] {
        h.push(k.into());
    }
    h
}

/// One CSV line of a sweep. Errors go to the last column with commas
/// replaced so the row stays parseable.
pub fn sweep_line(row: &SweepRow) -> String {
    let mut f = vec![row.index.to_string()];
    f.extend(row.values.iter().map(|&v| num(v)));
    match &row.result {
        Ok(r) => {
            f.extend([r.params.p_tilde, r.params.tau1, r.params.dtau].map(num));
            f.extend(r.correlators().map(num));
            f.push(num(r.c_value));
            f.push(String::new());
        }
        Err(e) => {
            match row.params {
                Some(d) => f.extend([d.p_tilde, d.tau1, d.dtau].map(num)),
                None => f.extend(["", "", ""].map(String::from)),
            }
            f.extend(std::iter::repeat_n(String::new(), 5));
            f.push(e.to_string().replace(',', ";"));
        }
    }
    f.join(",")
}

/// Side-by-side engine comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub echo: Vec<(String, String)>,
    pub analytic: LgiResult,
    pub grid: LgiResult,
}

impl OracleReport {
    pub fn max_joint_deviation(&self) -> f64 {
        self.analytic
            .joint_tables
            .iter()
            .zip(&self.grid.joint_tables)
            .flat_map(|(a, g)| a.entries().into_iter().zip(g.entries()).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }

    pub fn c_deviation(&self) -> f64 {
        (self.analytic.c_value - self.grid.c_value).abs()
    }

    pub fn write(&self, out: &mut dyn Write, format: Format) -> Result<()> {
        let pairs = self.analytic.joint_tables.iter().zip(&self.grid.joint_tables).zip(PAIR_LABELS);
        match format {
            Format::Json => {
                let doc = json!({
                    "config": self.echo.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect::<Map<_, _>>(),
                    "pairs": pairs.map(|((a, g), l)| json!({
                        "pair": l,
                        "analytic": table_json(l, a),
                        "grid": table_json(l, g),
                    })).collect::<Vec<_>>(),
                    "c_analytic": jnum(self.analytic.c_value),
                    "c_grid": jnum(self.grid.c_value),
                    "max_joint_deviation": jnum(self.max_joint_deviation()),
                    "c_deviation": jnum(self.c_deviation()),
                });
                let text = serde_json::to_string_pretty(&doc).map_err(|e| LgiError::Io(e.to_string()))?;
                writeln!(out, "{text}").map_err(io)
            }
            Format::Csv => {
                write_echo(out, &self.echo)?;
                writeln!(out, "pair,outcome,analytic,grid,abs_dev").map_err(io)?;
                for ((a, g), l) in pairs {
                    for (o, (x, y)) in ["pp", "pm", "mp", "mm"].iter().zip(a.entries().into_iter().zip(g.entries())) {
                        writeln!(out, "{l},{o},{},{},{}", num(x), num(y), num((x - y).abs())).map_err(io)?;
                    }
                }
                writeln!(
                    out,
                    "C,,{},{},{}",
                    num(self.analytic.c_value),
                    num(self.grid.c_value),
                    num(self.c_deviation())
                )
                .map_err(io)
            }
            Format::Pretty => {
                write_echo(out, &self.echo)?;
                for ((a, g), l) in pairs {
                    let dev = a
                        .entries()
                        .into_iter()
                        .zip(g.entries())
                        .map(|(x, y)| (x - y).abs())
                        .fold(0.0, f64::max);
                    writeln!(
                        out,
                        "{l}  analytic {}  grid {}  max |dP| {}",
                        short(a.correlator()),
                        short(g.correlator()),
                        short(dev)
                    )
                    .map_err(io)?;
                }
                writeln!(
                    out,
                    "C    analytic {}  grid {}  |dC| {}",
                    short(self.analytic.c_value),
                    short(self.grid.c_value),
                    short(self.c_deviation())
                )
                .map_err(io)?;
                writeln!(out, "max joint deviation {}", short(self.max_joint_deviation())).map_err(io)
            }
        }
    }
}
