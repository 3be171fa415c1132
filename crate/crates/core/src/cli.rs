//! The `hyst` command line.
//!
//! Exit codes: 0 success, 1 usage or config error, 2 numerical failure,
//! 3 I/O error. Every output file is written to a temporary sibling first
//! and renamed into place.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use crate::config::{load_config, ConfigError, RunConfig};
use crate::equilibrium::{
    bifurcation_diagram, find_equilibria, multistability_check, solve_bifurcations, write_diagram_csv,
    write_equilibria_csv, EquilibriumError, MultistabilityVerdict,
};
use crate::integrator::{integrate, to_io_curve, SimParams};
use crate::loopanal::{JumpEvent, SteadyLoop};
use crate::model::{preset, ModelError, ModelSpec, Order, Overrides, PRESETS};
use crate::plot::loop_svg;
use crate::signal::{Signal, SignalKind};
use crate::verdict::{classify, frequency_sweep, jump_bifurcation_match, Report, VerdictError};

#[derive(Debug, Parser)]
#[command(name = "hyst", version, about = "Detect hysteresis in scalar-input ODE systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List catalog models with their equations.
    ListPresets,
    /// Simulate one run; writes trajectory.csv and io_curve.csv.
    Simulate(RunArgs),
    /// Equilibria of the input-frozen system; writes equilibria.csv.
    Equilibria(RunArgs),
    /// Solve for bifurcation inputs; writes bifurcations.csv.
    Bifurcations(RunArgs),
    /// Equilibria over a range of inputs; writes diagram.csv.
    Diagram(RunArgs),
    /// Frequency sweep and verdict; writes report.json and one loop per frequency.
    Hysteresis(RunArgs),
    /// Loop metrics of a `u,x` CSV written by this tool.
    AnalyzeLoop {
        csv: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// TOML config file.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// Shorthand for `--set preset=NAME`.
    #[arg(long)]
    pub preset: Option<String>,
    /// Override a config key, e.g. `--set params.alpha=-1`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Shorthand for `--set omega=W`.
    #[arg(long)]
    pub omega: Option<f64>,
    /// Shorthand for `--set level=U`.
    #[arg(long, allow_hyphen_values = true)]
    pub level: Option<f64>,
    /// Shorthand for `--set out_dir=DIR`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Read { .. } => CliError::Io(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<EquilibriumError> for CliError {
    fn from(e: EquilibriumError) -> Self {
        match e {
            EquilibriumError::Model(m) => m.into(),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<VerdictError> for CliError {
    fn from(e: VerdictError) -> Self {
        match e {
            VerdictError::AllFailed(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Writes `bytes` to `path` through a temporary file and a rename, so a
/// reader never sees a half-written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes).map_err(|e| io_err(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

fn write_csv_with<F>(path: &Path, f: F) -> Result<(), CliError>
where
    F: FnOnce(&mut Vec<u8>) -> csv::Result<()>,
{
    let mut buf = Vec::new();
    f(&mut buf).map_err(|e| io_err(path, e))?;
    write_atomic(path, &buf)
}

impl RunArgs {
    pub fn config(&self) -> Result<RunConfig, CliError> {
        let mut sets = self.set.clone();
        if let Some(p) = &self.preset {
            sets.push(format!("preset=\"{p}\""));
        }
        if let Some(w) = self.omega {
            sets.push(format!("omega={w:?}"));
        }
        if let Some(u) = self.level {
            sets.push(format!("level={u:?}"));
        }
        if let Some(o) = &self.out {
            sets.push(format!("out_dir={:?}", o.display().to_string()));
        }
        Ok(load_config(self.config.as_deref(), &sets)?)
    }
}

fn pool(cfg: &RunConfig) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))
}

fn levels(model: &ModelSpec, n: usize) -> Vec<f64> {
    let (lo, hi) = model.input_range;
    if n <= 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Runs one parsed command, printing a summary to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let result = match &cli.command {
        Command::ListPresets => list_presets(out),
        Command::Simulate(a) => simulate(&a.config()?, out),
        Command::Equilibria(a) => equilibria(&a.config()?, out),
        Command::Bifurcations(a) => bifurcations(&a.config()?, out),
        Command::Diagram(a) => diagram(&a.config()?, out),
        Command::Hysteresis(a) => hysteresis(&a.config()?, out),
        Command::AnalyzeLoop { csv, run } => analyze_loop(csv, &run.config()?, out),
    };
    out.flush().map_err(|e| CliError::Io(e.to_string()))?;
    result
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match run(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

macro_rules! say {
    ($out:expr, $($arg:tt)*) => {
        writeln!($out, $($arg)*).map_err(|e| CliError::Io(e.to_string()))
    };
}

fn list_presets(out: &mut dyn Write) -> Result<(), CliError> {
    let rows: Vec<(String, String, String)> = PRESETS
        .iter()
        .map(|info| {
            let m = preset(info.name, &Overrides::new())?;
            let lhs = match m.order {
                Order::First => "x1'",
                Order::Second => "x1' = x2, x2'",
            };
            Ok((info.name.to_string(), format!("{lhs} = {}", m.rhs.to_text()), info.family.to_string()))
        })
        .collect::<Result<_, ModelError>>()?;
    let w0 = rows.iter().map(|r| r.0.len()).max().unwrap_or(4).max(4);
    let w1 = rows.iter().map(|r| r.1.len()).max().unwrap_or(8).max(8);
    say!(out, "{:w0$}  {:w1$}  family", "name", "equation")?;
    for (name, eq, family) in rows {
        say!(out, "{name:w0$}  {eq:w1$}  {family}")?;
    }
    Ok(())
}

fn simulate(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let model = cfg.model()?;
    let (signal, params) = match model.signal_kind {
        SignalKind::Constant => {
            let params = SimParams {
                periods: cfg.periods.unwrap_or(1),
                steps_per_period: cfg.steps_per_period.unwrap_or(4096),
                duration: cfg.duration.unwrap_or(100.0),
                ..SimParams::default()
            };
            (Signal::constant(cfg.level.unwrap_or(0.0)), params)
        }
        kind => (
            Signal::periodic(kind, cfg.omega.unwrap_or(1.0)),
            SimParams::new(cfg.periods.unwrap_or(3), cfg.steps_per_period.unwrap_or(4096)),
        ),
    };
    let traj = integrate(&model, &signal, &params).map_err(|e| CliError::Numerical(e.to_string()))?;
    let io = to_io_curve(&traj);
    let dir = cfg.out_dir();
    write_csv_with(&dir.join("trajectory.csv"), |b| traj.write_csv(b))?;
    write_csv_with(&dir.join("io_curve.csv"), |b| io.write_csv(b))?;
    let (lo, hi) = traj.x1().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| (l.min(x), h.max(x)));
    say!(out, "model {}: {} samples, x1 in [{lo:.6}, {hi:.6}]", model.name, traj.len())?;
    say!(out, "wrote {} and {}", dir.join("trajectory.csv").display(), dir.join("io_curve.csv").display())?;
    if let Some(i) = traj.diverged_at {
        return Err(CliError::Numerical(format!("trajectory diverged at t = {}", traj.times[i.min(traj.len() - 1)])));
    }
    Ok(())
}

fn equilibria(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let model = cfg.model()?;
    let sampled = levels(&model, cfg.multistability_levels.unwrap_or(21));
    let probe = match cfg.level {
        Some(u) => vec![u],
        None => sampled.clone(),
    };
    let reports = probe
        .iter()
        .map(|&u| find_equilibria(&model, u, model.search_interval, cfg.grid_n()))
        .collect::<Result<Vec<_>, _>>()?;
    let path = cfg.out_dir().join("equilibria.csv");
    write_csv_with(&path, |b| write_equilibria_csv(&reports, model.order, b))?;
    for rep in &reports {
        if let Some(stab) = rep.continuum_stability {
            say!(out, "U = {}: continuum of equilibria, {}", rep.level, stab.name())?;
        }
        for e in &rep.equilibria {
            say!(out, "U = {}: x1 = {:.10}  {}", rep.level, e.x(), e.stability.name())?;
        }
        if !rep.continuum && rep.equilibria.is_empty() {
            say!(out, "U = {}: no equilibria in [{}, {}]", rep.level, model.search_interval.0, model.search_interval.1)?;
        }
    }
    let all = if cfg.level.is_some() { probe } else { sampled };
    match multistability_check(&model, &all, model.search_interval, cfg.grid_n()) {
        Ok(MultistabilityVerdict::Impossible { rule }) => say!(out, "hysteresis impossible: {}", rule.describe())?,
        Ok(MultistabilityVerdict::NecessaryConditionMet { level }) => {
            say!(out, "multistable at U = {level}: necessary condition for hysteresis met")?
        }
        Err(e) => say!(out, "multistability check skipped: {e}")?,
    }
    say!(out, "wrote {}", path.display())
}

fn bifurcations(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let model = cfg.model()?;
    let set = pool(cfg)?.install(|| {
        solve_bifurcations(&model, model.input_range, model.search_interval, &cfg.newton_options())
    })?;
    let path = cfg.out_dir().join("bifurcations.csv");
    write_csv_with(&path, |b| set.write_csv(b))?;
    for p in &set.points {
        say!(out, "U = {:.10}  x = {:.10}", p.level, p.x)?;
    }
    if set.points.is_empty() {
        say!(out, "no bifurcation in U {:?}, x {:?}", set.input_range, set.state_range)?;
    }
    say!(out, "wrote {}", path.display())
}

fn diagram(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let model = cfg.model()?;
    let rows = bifurcation_diagram(
        &model,
        model.input_range,
        cfg.diagram_points.unwrap_or(201),
        model.search_interval,
        cfg.grid_n(),
    )?;
    let path = cfg.out_dir().join("diagram.csv");
    write_csv_with(&path, |b| write_diagram_csv(&rows, b))?;
    say!(out, "{} rows over U in [{}, {}]", rows.len(), model.input_range.0, model.input_range.1)?;
    say!(out, "wrote {}", path.display())
}

fn hysteresis(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let model = cfg.model()?;
    let opts = cfg.sweep_options();
    let pool = pool(cfg)?;
    let sweep = pool.install(|| frequency_sweep(&model, model.signal_kind, &cfg.omegas(), &opts))?;
    let verdict = classify(&sweep, &cfg.thresholds());
    let mut report = Report::new(&model, &sweep, &opts, verdict);
    let sampled = levels(&model, cfg.multistability_levels.unwrap_or(21));
    report.multistability = multistability_check(&model, &sampled, model.search_interval, cfg.grid_n()).ok();
    if sweep.points.iter().any(|p| p.closed_loop().is_some_and(|l| !l.jumps.is_empty())) {
        let bif = pool.install(|| {
            solve_bifurcations(&model, model.input_range, model.search_interval, &cfg.newton_options())
        });
        report.jump_match = bif.ok().map(|b| jump_bifurcation_match(&sweep, &b));
    }

    let dir = cfg.out_dir();
    let svg = cfg.svg.unwrap_or(true);
    for p in &sweep.points {
        let Some(lp) = &p.steady_loop else { continue };
        let stem = format!("loop_w{}", p.omega);
        write_csv_with(&dir.join(format!("{stem}.csv")), |b| lp.write_csv(b))?;
        if svg {
            let title = format!("{}, omega = {}", model.name, p.omega);
            write_atomic(&dir.join(format!("{stem}.svg")), loop_svg(&lp.points, &title).as_bytes())?;
        }
    }
    let path = dir.join("report.json");
    write_atomic(&path, report.to_json().as_bytes())?;

    let v = &report.verdict;
    say!(out, "model {}: {}, rate {}", model.name, v.verdict.name(), v.rate.name())?;
    say!(out, "reason: {}", v.reason)?;
    if !v.jumps.u_at_smallest.is_empty() {
        let u: Vec<String> = v.jumps.u_at_smallest.iter().map(|u| format!("{u:.4}")).collect();
        say!(out, "jumps at u = {}", u.join(", "))?;
    }
    say!(out, "wrote {}", path.display())
}

#[derive(Serialize)]
struct LoopSummary<'a> {
    samples: usize,
    closed: bool,
    closure_gap: f64,
    signed_area: f64,
    geometric_area: f64,
    diameter: f64,
    pinch_points: &'a [(f64, f64)],
    jumps: &'a [JumpEvent],
}

fn analyze_loop(csv: &Path, cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let file = std::fs::File::open(csv).map_err(|e| io_err(csv, e))?;
    let lp = SteadyLoop::read_csv(file, &cfg.loop_options()).map_err(|e| CliError::Usage(format!("{}: {e}", csv.display())))?;
    let summary = LoopSummary {
        samples: lp.points.len(),
        closed: lp.closed,
        closure_gap: lp.closure_gap,
        signed_area: lp.signed_area,
        geometric_area: lp.geometric_area,
        diameter: lp.diameter,
        pinch_points: &lp.pinch_points,
        jumps: &lp.jumps,
    };
    say!(out, "{}", serde_json::to_string_pretty(&summary).expect("summary serializes"))
}
