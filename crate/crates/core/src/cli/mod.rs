//! Command-line front end: `bloch`, `gp`, `surface`, `compare` and `verify`.
//!
//! Exit codes: 0 on success, 1 for usage or configuration errors, 2 for
//! numerical failures (under-resolved grids, failed checks, eigensolver).

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::dynamics::{bloch_trajectory, literal_trajectory, BlochTrajectory, Dynamics, DynamicsError, TimeGrid};
use crate::experiments::{
    figure_strategies, frustration_scan, strategy_compare_with, verify_suite, AngleGrid, ExperimentError,
    SurfaceOptions,
};
use crate::model::{validate_config, InitialStateAngles, ModelError, SystemConfig};
use crate::oracle::{oracle_trajectory, OracleError, OracleLimits};
use crate::phase::{gp_closed_form, gp_discrete_holonomy, gp_south_pole, polar_track, GpMethod, PhaseError};

pub use config::{load_config, ConfigError, RunConfig, Setting, Source};
pub use output::{fmt_real, write_json, write_surface_csv, SURFACE_HEADER};

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "FRUSTRA_GP_THREADS";
const DEFAULT_VERIFY_REPORT: &str = "verify_report.json";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numerical(String),
    #[error("cannot write output: {0}")]
    Output(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Output(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        match e {
            DynamicsError::InvalidGrid(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<PhaseError> for CliError {
    fn from(e: PhaseError) -> Self {
        match e {
            PhaseError::NotSouthPole { .. } | PhaseError::MixedInitialState { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::BathTooLarge { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Cell { .. } => CliError::Numerical(e.to_string()),
            ExperimentError::Dynamics(d) => d.into(),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "frustra-gp", version, about = "Geometric phase of a qubit under two non-commuting spin baths")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Reduced Bloch vector over time.
    Bloch {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        time: TimeArgs,
        /// analytic (sector sum) or oracle (exact evolution, small N only).
        #[arg(long)]
        engine: Option<String>,
        /// Largest bath size the oracle accepts (at most 6).
        #[arg(long)]
        oracle_cap: Option<String>,
    },
    /// Geometric phase of one initial state.
    Gp {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        time: TimeArgs,
        /// closed-form, south-pole, holonomy or all.
        #[arg(long)]
        method: Option<String>,
    },
    /// Phase surface over a grid of initial states.
    Surface {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, allow_hyphen_values = true)]
        t_end: Option<String>,
        /// Time nodes per period of the fastest sector frequency.
        #[arg(long)]
        sampling: Option<String>,
    },
    /// Ranks the four standard coupling strategies.
    Compare {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, allow_hyphen_values = true)]
        omega: Option<String>,
        #[arg(long)]
        bath_size: Option<String>,
        /// Comma-separated bath sizes; runs one comparison per size.
        #[arg(long)]
        bath_sizes: Option<String>,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, allow_hyphen_values = true)]
        t_end: Option<String>,
        #[arg(long)]
        sampling: Option<String>,
        /// mean-dist-to-unitary or mean-abs-gp.
        #[arg(long)]
        metric: Option<String>,
    },
    /// Runs the built-in cross-checks and writes a report.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        oracle_cap: Option<String>,
    },
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// key=value file; keys are flag names, flags win over file values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Output file (stdout when absent).
    #[arg(long)]
    output: Option<String>,
    /// Print every resolved setting and its origin to stderr.
    #[arg(long)]
    show_config: bool,
}

#[derive(Args, Debug)]
struct SystemArgs {
    #[arg(long, allow_hyphen_values = true)]
    omega: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha2: Option<String>,
    /// Spins per bath (required).
    #[arg(long)]
    bath_size: Option<String>,
    /// physical or literal.
    #[arg(long)]
    mode: Option<String>,
}

#[derive(Args, Debug)]
struct StateArgs {
    /// Preparation angle in [0, π]; 0 prepares spin down.
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    phi: Option<String>,
}

#[derive(Args, Debug)]
struct TimeArgs {
    #[arg(long, allow_hyphen_values = true)]
    t_start: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    t_end: Option<String>,
    /// Number of time nodes; chosen from --sampling when absent.
    #[arg(long)]
    steps: Option<String>,
    #[arg(long)]
    sampling: Option<String>,
}

#[derive(Args, Debug)]
struct GridArgs {
    #[arg(long)]
    n_theta: Option<String>,
    #[arg(long)]
    n_phi: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    theta_min: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    theta_max: Option<String>,
}

type Pairs<'a> = Vec<(&'static str, Option<&'a String>)>;

impl SystemArgs {
    fn pairs(&self) -> Pairs<'_> {
        vec![
            ("omega", self.omega.as_ref()),
            ("alpha1", self.alpha1.as_ref()),
            ("alpha2", self.alpha2.as_ref()),
            ("bath-size", self.bath_size.as_ref()),
            ("mode", self.mode.as_ref()),
        ]
    }
}

impl StateArgs {
    fn pairs(&self) -> Pairs<'_> {
        vec![("theta", self.theta.as_ref()), ("phi", self.phi.as_ref())]
    }
}

impl TimeArgs {
    fn pairs(&self) -> Pairs<'_> {
        vec![
            ("t-start", self.t_start.as_ref()),
            ("t-end", self.t_end.as_ref()),
            ("steps", self.steps.as_ref()),
            ("sampling", self.sampling.as_ref()),
        ]
    }
}

impl GridArgs {
    fn pairs(&self) -> Pairs<'_> {
        vec![
            ("n-theta", self.n_theta.as_ref()),
            ("n-phi", self.n_phi.as_ref()),
            ("theta-min", self.theta_min.as_ref()),
            ("theta-max", self.theta_max.as_ref()),
        ]
    }
}

/// Defaults, then the `--config` file, then explicit flags.
fn resolve(common: &CommonArgs, groups: &[Pairs<'_>]) -> Result<RunConfig, CliError> {
    let mut cfg = match &common.config {
        Some(path) => load_config(path)?,
        None => RunConfig::defaults(),
    };
    let own = [("format", common.format.as_ref()), ("output", common.output.as_ref())];
    for (key, value) in groups.iter().flatten().chain(own.iter()) {
        if let Some(v) = value {
            cfg.set_flag(key, v)?;
        }
    }
    if common.show_config {
        for (key, setting) in cfg.values().keys().map(|k| (k, cfg.setting(k).expect("listed key"))) {
            eprintln!("{key}={}  # {}", setting.value, setting.source);
        }
    }
    Ok(cfg)
}

fn system_config(cfg: &RunConfig) -> Result<SystemConfig, CliError> {
    let raw = SystemConfig {
        omega: cfg.real("omega")?,
        alpha1: cfg.real("alpha1")?,
        alpha2: cfg.real("alpha2")?,
        bath_size: cfg.count("bath-size")?,
    };
    validate_config(raw).map_err(|e| CliError::Usage(e.to_string()))
}

fn initial_angles(cfg: &RunConfig) -> Result<InitialStateAngles, CliError> {
    Ok(InitialStateAngles::new(cfg.real("theta")?, cfg.real("phi")?)?)
}

// Values are already known to be finite.
fn sampling_factor(cfg: &RunConfig) -> Result<f64, CliError> {
    let sampling = cfg.real("sampling")?;
    if sampling <= 0.0 {
        return Err(CliError::Usage(format!("--sampling must be positive, got {sampling}")));
    }
    Ok(sampling)
}

fn time_grid(cfg: &RunConfig, system: &SystemConfig) -> Result<TimeGrid, CliError> {
    let (t0, t1) = (cfg.real("t-start")?, cfg.real("t-end")?);
    let steps = match cfg.optional_count("steps") {
        Some(n) => n as usize,
        None => {
            let sampling = sampling_factor(cfg)?;
            let periods = (t1 - t0).abs() * system.gamma_max() / std::f64::consts::TAU;
            (periods * sampling).ceil().max(1.0) as usize + 1
        }
    };
    Ok(TimeGrid::new(t0, t1, steps)?)
}

fn angle_grid(cfg: &RunConfig) -> Result<AngleGrid, CliError> {
    Ok(AngleGrid::new(
        cfg.count("n-theta")? as usize,
        cfg.real("theta-min")?,
        cfg.real("theta-max")?,
        cfg.count("n-phi")? as usize,
    )?)
}

fn surface_options(cfg: &RunConfig) -> Result<SurfaceOptions, CliError> {
    Ok(SurfaceOptions { sampling_factor: sampling_factor(cfg)?, ..SurfaceOptions::default() })
}

fn oracle_limits(cfg: &RunConfig) -> Result<OracleLimits, CliError> {
    Ok(OracleLimits::with_override(cfg.count("oracle-cap")?))
}

fn trajectory(cfg: &RunConfig, system: &SystemConfig, angles: &InitialStateAngles) -> Result<BlochTrajectory, CliError> {
    let grid = time_grid(cfg, system)?;
    Ok(match cfg.mode() {
        Dynamics::Physical => bloch_trajectory(system, angles, &grid)?,
        Dynamics::Literal => literal_trajectory(system, angles, &grid)?,
    })
}

fn is_json(cfg: &RunConfig) -> bool {
    cfg.text("format") == Some("json")
}

/// Opens `--output` or falls back to stdout (or `fallback` when given).
fn sink(cfg: &RunConfig, fallback: Option<&str>) -> Result<Box<dyn Write>, CliError> {
    match cfg.text("output").or(fallback) {
        Some(path) => Ok(Box::new(BufWriter::new(File::create(path)?))),
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

fn cmd_bloch(cfg: &RunConfig) -> Result<(), CliError> {
    let system = system_config(cfg)?;
    let angles = initial_angles(cfg)?;
    let traj = match cfg.text("engine") {
        Some("oracle") => {
            if cfg.mode() == Dynamics::Literal {
                return Err(CliError::Usage("the oracle engine only evolves physical dynamics".into()));
            }
            oracle_trajectory(&system, &angles, &time_grid(cfg, &system)?, &oracle_limits(cfg)?)?
        }
        _ => trajectory(cfg, &system, &angles)?,
    };
    let mut out = sink(cfg, None)?;
    if is_json(cfg) {
        write_json(&traj, &mut out)?;
    } else {
        output::write_trajectory_csv(&traj, &mut out)?;
    }
    out.flush()?;
    Ok(())
}

fn cmd_gp(cfg: &RunConfig) -> Result<(), CliError> {
    let system = system_config(cfg)?;
    let angles = initial_angles(cfg)?;
    if cfg.real("t-start")? != 0.0 {
        return Err(CliError::Usage("geometric phases are measured from t = 0; drop --t-start".into()));
    }
    let traj = trajectory(cfg, &system, &angles)?;
    let method = cfg.text("method").unwrap_or("closed-form");
    let mut results = Vec::new();
    let needs_track = method != "holonomy" && method != "discrete-holonomy";
    let track = if needs_track { Some(polar_track(&traj)?) } else { None };
    let all = method == "all";
    let chosen = if all { None } else { Some(method.parse::<GpMethod>().map_err(CliError::Usage)?) };
    let wants = |m: GpMethod| all || chosen == Some(m);

    if let Some(track) = &track {
        if wants(GpMethod::ClosedForm) {
            results.push(gp_closed_form(track, &angles)?);
        }
        if wants(GpMethod::SouthPole) {
            match gp_south_pole(track) {
                Ok(r) => results.push(r),
                Err(PhaseError::NotSouthPole { .. }) if all => {
                    eprintln!("note: south-pole method skipped, the initial state is not at the south pole")
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    if wants(GpMethod::DiscreteHolonomy) {
        match gp_discrete_holonomy(&traj) {
            Ok(r) => results.push(r),
            Err(PhaseError::MixedInitialState { .. }) if all => {
                eprintln!("note: holonomy method skipped, literal mode starts from a mixed state")
            }
            Err(e) => return Err(e.into()),
        }
    }

    let mut out = sink(cfg, None)?;
    if is_json(cfg) {
        write_json(&results, &mut out)?;
    } else {
        output::write_gp_csv(&results, &mut out)?;
    }
    out.flush()?;
    Ok(())
}

fn cmd_surface(cfg: &RunConfig) -> Result<(), CliError> {
    let system = system_config(cfg)?;
    let surface = crate::experiments::gp_surface_with(
        &system,
        &angle_grid(cfg)?,
        cfg.real("t-end")?,
        cfg.mode(),
        &surface_options(cfg)?,
    )?;
    let mut out = sink(cfg, None)?;
    if is_json(cfg) {
        write_json(&surface, &mut out)?;
    } else {
        write_surface_csv(&surface, &mut out)?;
    }
    out.flush()?;
    Ok(())
}

fn cmd_compare(cfg: &RunConfig) -> Result<(), CliError> {
    let omega = cfg.real("omega")?;
    let t = cfg.real("t-end")?;
    let grid = angle_grid(cfg)?;
    let opts = surface_options(cfg)?;
    let mut out = sink(cfg, None)?;
    match cfg.count_list("bath-sizes") {
        Some(sizes) => {
            if let Some(&n) = sizes.iter().find(|&&n| n == 0) {
                return Err(CliError::Usage(format!("bath sizes must be positive, got {n}")));
            }
            let records = frustration_scan(omega, t, &sizes, &grid, &opts)?;
            for r in &records {
                eprintln!(
                    "N={}: ranking {} | (1/4,1/4) {} (1,0) on distance to unitary ({} vs {})",
                    r.bath_size,
                    r.report.ranking.join(" > "),
                    if r.dual_beats_single { "beats" } else { "does not beat" },
                    fmt_real(r.dual_distance),
                    fmt_real(r.single_distance)
                );
            }
            if is_json(cfg) {
                write_json(&records, &mut out)?;
            } else {
                let reports: Vec<_> = records.into_iter().map(|r| r.report).collect();
                output::write_reports_csv(&reports, &mut out)?;
            }
        }
        None => {
            let strategies = figure_strategies(omega, cfg.count("bath-size")?)?;
            let report = strategy_compare_with(&strategies, &grid, t, cfg.metric(), &opts)?;
            eprintln!("ranking ({}): {}; winner {}", report.metric, report.ranking.join(" > "), report.winner);
            if is_json(cfg) {
                write_json(&report, &mut out)?;
            } else {
                output::write_reports_csv(std::slice::from_ref(&report), &mut out)?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn cmd_verify(cfg: &RunConfig) -> Result<(), CliError> {
    let report = verify_suite(&oracle_limits(cfg)?);
    for c in &report.checks {
        println!(
            "{} {}: measured {} tolerance {} ({})",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            fmt_real(c.measured),
            fmt_real(c.tolerance),
            c.detail
        );
    }
    let path = cfg.text("output").unwrap_or(DEFAULT_VERIFY_REPORT);
    let mut out = BufWriter::new(File::create(path)?);
    // The report is JSON unless csv was asked for explicitly.
    if is_json(cfg) || cfg.setting("format").is_none_or(|s| s.source == Source::Default) {
        write_json(&report, &mut out)?;
    } else {
        writeln!(out, "name,passed,measured,tolerance")?;
        for c in &report.checks {
            writeln!(out, "{},{},{},{}", c.name, c.passed, fmt_real(c.measured), fmt_real(c.tolerance))?;
        }
    }
    out.flush()?;
    println!("report written to {path}");
    if report.all_passed {
        Ok(())
    } else {
        let failed: Vec<_> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        Err(CliError::Numerical(format!("failed checks: {}", failed.join(", "))))
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Bloch { common, system, state, time, engine, oracle_cap } => {
            let extra = vec![("engine", engine.as_ref()), ("oracle-cap", oracle_cap.as_ref())];
            let cfg = resolve(&common, &[system.pairs(), state.pairs(), time.pairs(), extra])?;
            cmd_bloch(&cfg)
        }
        Command::Gp { common, system, state, time, method } => {
            let cfg = resolve(&common, &[system.pairs(), state.pairs(), time.pairs(), vec![("method", method.as_ref())]])?;
            cmd_gp(&cfg)
        }
        Command::Surface { common, system, grid, t_end, sampling } => {
            let extra = vec![("t-end", t_end.as_ref()), ("sampling", sampling.as_ref())];
            let cfg = resolve(&common, &[system.pairs(), grid.pairs(), extra])?;
            cmd_surface(&cfg)
        }
        Command::Compare { common, omega, bath_size, bath_sizes, grid, t_end, sampling, metric } => {
            let extra = vec![
                ("omega", omega.as_ref()),
                ("bath-size", bath_size.as_ref()),
                ("bath-sizes", bath_sizes.as_ref()),
                ("t-end", t_end.as_ref()),
                ("sampling", sampling.as_ref()),
                ("metric", metric.as_ref()),
            ];
            let cfg = resolve(&common, &[grid.pairs(), extra])?;
            cmd_compare(&cfg)
        }
        Command::Verify { common, oracle_cap } => {
            let cfg = resolve(&common, &[vec![("oracle-cap", oracle_cap.as_ref())]])?;
            cmd_verify(&cfg)
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got '{raw}'")))?;
    // A second call in the same process (tests) finds the pool already built.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Parses `args` (including the program name) and runs one subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match configure_threads().and_then(|()| execute(cli)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
