use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lgi_core::config::{Format, ParamBlock, RawConfig, RunConfig};
use lgi_core::grid::{init_coherent_at, project_grid, GridSpec, Propagator};
use lgi_core::lgi::{
    build_engine, lgi_value_with, maximize_c, sweep_streaming, EngineKind, MaximizeOptions, SweepAxis, SweepBase,
    SweepParam, SweepSpec,
};
use lgi_core::measurement::{project, Outcome, SmearedMeasurement};
use lgi_core::report::{self, ComputeReport, Derived, OracleReport};
use lgi_core::tables::compute_table;
use lgi_core::{LgiError, Result};

/// Exit status when engines disagree in `oracle-check`.
const MISMATCH: u8 = 1;
const ORACLE_TOLERANCE: f64 = 1e-5;

#[derive(Parser)]
#[command(name = "lgi", version, about = "Four-term Leggett-Garg quantity for a harmonic-oscillator coherent state")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate C for one parameter set, or maximize it over the schedule.
    Compute(RunArgs),
    /// Recompute one of the three published tables.
    Table(TableArgs),
    /// Scan up to two parameters; writes CSV rows as they finish.
    Sweep(SweepArgs),
    /// Compare analytic and grid engines on one parameter set.
    OracleCheck(RunArgs),
    /// Dump analytic and grid densities of a post-measurement branch.
    Density(DensityArgs),
}

#[derive(Args, Clone, Default)]
struct RunArgs {
    /// key = value file; command-line flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    mass_amu: Option<String>,
    /// Angular frequency, rad/s.
    #[arg(long)]
    omega: Option<String>,
    /// Initial peak momentum, kg m/s.
    #[arg(long, allow_hyphen_values = true)]
    p0: Option<String>,
    /// First measurement, s.
    #[arg(long, allow_hyphen_values = true)]
    t1: Option<String>,
    /// Measurement spacing, s.
    #[arg(long, allow_hyphen_values = true)]
    dt: Option<String>,
    /// Dimensionless momentum (instead of mass/omega/p0).
    #[arg(long, allow_hyphen_values = true)]
    p_tilde: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    tau1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    dtau: Option<String>,
    /// analytic or grid.
    #[arg(long)]
    engine: Option<String>,
    /// Boundary smearing in units of sigma0 (grid engine only).
    #[arg(long)]
    smearing: Option<String>,
    /// Maximize C over t1 and dt.
    #[arg(long)]
    maximize: bool,
    /// csv, json or pretty.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    rel_tol: Option<String>,
    #[arg(long)]
    abs_tol: Option<String>,
    #[arg(long)]
    max_subdivisions: Option<String>,
    #[arg(long)]
    grid_points: Option<String>,
    #[arg(long)]
    grid_step: Option<String>,
    /// true or false.
    #[arg(long)]
    richardson: Option<String>,
}

impl RunArgs {
    fn raw(&self) -> Result<RawConfig> {
        let mut raw = match &self.config {
            Some(path) => RawConfig::load(path)?,
            None => RawConfig::default(),
        };
        let mut flags = RawConfig::default();
        let pairs = [
            ("mass_amu", &self.mass_amu),
            ("omega", &self.omega),
            ("p0", &self.p0),
            ("t1", &self.t1),
            ("dt", &self.dt),
            ("p_tilde", &self.p_tilde),
            ("tau1", &self.tau1),
            ("dtau", &self.dtau),
            ("engine", &self.engine),
            ("smearing", &self.smearing),
            ("format", &self.format),
            ("rel_tol", &self.rel_tol),
            ("abs_tol", &self.abs_tol),
            ("max_subdivisions", &self.max_subdivisions),
            ("grid_points", &self.grid_points),
            ("grid_step", &self.grid_step),
            ("richardson", &self.richardson),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                flags.set(key, v.as_str())?;
            }
        }
        if self.maximize {
            flags.set("maximize", "true")?;
        }
        raw = raw.merged(&flags);
        Ok(raw)
    }

    fn run_config(&self) -> Result<RunConfig> {
        RunConfig::from_raw(self.raw()?)
    }
}

#[derive(Args)]
struct TableArgs {
    /// 1, 2 or 3.
    which: u8,
    #[arg(long, default_value = "analytic")]
    engine: String,
    #[arg(long, default_value = "csv")]
    format: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// name:min:max:steps with name one of t1, dt, p_tilde, mass, p0; no
    /// axis evaluates the base point once.
    #[arg(long = "axis")]
    axes: Vec<String>,
    /// Rows evaluated between writes.
    #[arg(long, default_value_t = 64)]
    chunk: usize,
}

#[derive(Args)]
struct DensityArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Outcome of the first measurement: + or -.
    #[arg(long, default_value = "+", allow_hyphen_values = true)]
    outcome: String,
    /// Half-width of the dumped window in sigma0.
    #[arg(long, default_value_t = 10.0)]
    window: f64,
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| LgiError::Io(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn flush(mut out: Box<dyn Write>) -> Result<()> {
    out.flush().map_err(|e| LgiError::Io(e.to_string()))
}

fn engine_for(cfg: &RunConfig) -> Result<Box<dyn lgi_core::JointEngine>> {
    build_engine(cfg.engine, cfg.smearing, cfg.quad, cfg.grid)
}

fn omega_of(cfg: &RunConfig) -> Option<f64> {
    cfg.params.physical().map(|p| p.omega)
}

fn cmd_compute(args: &RunArgs) -> Result<u8> {
    let cfg = args.run_config()?;
    let engine = engine_for(&cfg)?;
    let d = cfg.params.dimensionless()?;
    let (result, maximum) = if cfg.maximize {
        let m = maximize_c(engine.as_ref(), d.p_tilde, &MaximizeOptions::default())?;
        (m.result.clone(), Some(m))
    } else {
        (lgi_value_with(engine.as_ref(), &d)?, None)
    };
    let report = ComputeReport {
        echo: cfg.echo(),
        result,
        derived: cfg.params.physical().map(Derived::of),
        omega: omega_of(&cfg),
        maximum,
    };
    let mut out = output(&args.out)?;
    report.write(out.as_mut(), cfg.format)?;
    flush(out)?;
    Ok(0)
}

fn cmd_table(args: &TableArgs) -> Result<u8> {
    let kind: EngineKind = args.engine.parse()?;
    let format: Format = args.format.parse()?;
    let engine = build_engine(kind, 0.0, Default::default(), Default::default())?;
    let rows = compute_table(engine.as_ref(), args.which)?;
    let echo = vec![
        ("table".to_string(), args.which.to_string()),
        ("engine".to_string(), args.engine.to_ascii_lowercase()),
        ("omega".to_string(), lgi_core::tables::OMEGA.to_string()),
        ("t1".to_string(), lgi_core::tables::T1.to_string()),
        ("dt".to_string(), lgi_core::tables::DT.to_string()),
    ];
    let mut out = output(&args.out)?;
    report::write_table(out.as_mut(), format, &echo, args.which, &rows)?;
    flush(out)?;
    Ok(0)
}

fn cmd_sweep(args: &SweepArgs) -> Result<u8> {
    let axes = args
        .axes
        .iter()
        .map(|a| a.parse::<SweepAxis>())
        .collect::<Result<Vec<_>>>()?;
    let mut raw = args.run.raw()?;
    // swept values need no fixed value; fill placeholders so the base parses
    let physical = ["mass_amu", "omega", "p0", "t1", "dt"].iter().any(|k| raw.get(k).is_some())
        || axes.iter().any(|a| matches!(a.param, SweepParam::Mass | SweepParam::P0));
    for a in &axes {
        let key = match (a.param, physical) {
            (SweepParam::T1, true) => "t1",
            (SweepParam::Dt, true) => "dt",
            (SweepParam::T1, false) => "tau1",
            (SweepParam::Dt, false) => "dtau",
            (SweepParam::PTilde, true) => "p0",
            (SweepParam::PTilde, false) => "p_tilde",
            (SweepParam::Mass, _) => "mass_amu",
            (SweepParam::P0, _) => "p0",
        };
        if raw.get(key).is_none() {
            raw.set(key, if key == "p0" { "0" } else { "1" })?;
        }
    }
    let cfg = RunConfig::from_raw(raw)?;
    let spec = SweepSpec {
        base: match cfg.params {
            ParamBlock::Physical(p) => SweepBase::Physical(p),
            ParamBlock::Dimensionless(d) => SweepBase::Dimensionless(d),
        },
        axes,
        maximize: cfg.maximize,
    };
    spec.validate()?;
    let engine = engine_for(&cfg)?;
    let mut out = output(&args.run.out)?;
    let io = |e: io::Error| LgiError::Io(e.to_string());
    report::write_echo(out.as_mut(), &cfg.echo())?;
    writeln!(out, "{}", report::sweep_header(&spec).join(",")).map_err(io)?;
    out.flush().map_err(io)?;
    sweep_streaming(engine.as_ref(), &spec, &MaximizeOptions::default(), args.chunk, |row| {
        writeln!(out, "{}", report::sweep_line(&row)).map_err(io)?;
        out.flush().map_err(io)
    })?;
    flush(out)?;
    Ok(0)
}

fn cmd_oracle(args: &RunArgs) -> Result<u8> {
    let cfg = args.run_config()?;
    let d = cfg.params.dimensionless()?;
    let analytic = build_engine(EngineKind::Analytic, 0.0, cfg.quad, cfg.grid)?;
    let grid = build_engine(EngineKind::Grid, cfg.smearing, cfg.quad, cfg.grid)?;
    let report = OracleReport {
        echo: cfg.echo(),
        analytic: lgi_value_with(analytic.as_ref(), &d)?,
        grid: lgi_value_with(grid.as_ref(), &d)?,
    };
    let mut out = output(&args.out)?;
    report.write(out.as_mut(), cfg.format)?;
    flush(out)?;
    let worst = report.max_joint_deviation().max(report.c_deviation());
    if worst > ORACLE_TOLERANCE {
        eprintln!("lgi: engines differ by {worst:.3e} (> {ORACLE_TOLERANCE:e})");
        return Ok(MISMATCH);
    }
    Ok(0)
}

fn cmd_density(args: &DensityArgs) -> Result<u8> {
    let cfg = args.run.run_config()?;
    let d = cfg.params.dimensionless()?;
    let outcome = match args.outcome.as_str() {
        "+" | "plus" | "+1" => Outcome::Plus,
        "-" | "minus" | "-1" => Outcome::Minus,
        other => return Err(LgiError::Parameter(format!("outcome must be + or -, got '{other}'"))),
    };
    if !(args.window > 0.0 && args.window.is_finite()) {
        return Err(LgiError::Parameter("window must be positive".into()));
    }
    let (t1, t2) = (d.tau1, d.tau1 + d.dtau);
    let mut spec = GridSpec::for_p_tilde(d.p_tilde, cfg.grid.min_points)?;
    spec.dtau_step = cfg.grid.dtau_step;
    let start = init_coherent_at(&spec, d.p_tilde, t1)?;
    let measurement = SmearedMeasurement::new(cfg.smearing)?;
    let (pa, mut branch) = project_grid(&start, &measurement, outcome)?;
    Propagator::new(&spec).propagate(&mut branch, t2 - t1);
    let analytic = if measurement.is_sharp() {
        Some(project(d.p_tilde, t1, outcome).evolve_pm(t2)?)
    } else {
        None
    };

    let io = |e: io::Error| LgiError::Io(e.to_string());
    let mut out = output(&args.run.out)?;
    report::write_echo(out.as_mut(), &cfg.echo())?;
    writeln!(out, "# outcome={}", if outcome == Outcome::Plus { "+" } else { "-" }).map_err(io)?;
    writeln!(out, "y,grid_density,analytic_density").map_err(io)?;
    for (y, psi) in spec.positions().iter().zip(&branch.psi) {
        if y.abs() > args.window {
            continue;
        }
        let a = analytic.as_ref().map(|e| report::num(e.density(*y))).unwrap_or_default();
        writeln!(out, "{},{},{a}", report::num(*y), report::num(pa * psi.norm_sqr())).map_err(io)?;
    }
    flush(out)?;
    Ok(0)
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("LGI_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| LgiError::Parameter(format!("LGI_THREADS must be a positive integer, got '{v}'")))?;
        if n == 0 {
            return Err(LgiError::Parameter("LGI_THREADS must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| LgiError::Parameter(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<u8> {
    configure_threads()?;
    match &cli.command {
        Command::Compute(a) => cmd_compute(a),
        Command::Table(a) => cmd_table(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::OracleCheck(a) => cmd_oracle(a),
        Command::Density(a) => cmd_density(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("lgi: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
