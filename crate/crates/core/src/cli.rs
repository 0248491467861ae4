//! `apf-sim` command-line driver.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::engine::{simulate, Guidance, RunMetrics, SimConfig, StepMode, TrajectoryLog, Verdict};
use crate::scenario::{
    builtin_scenarios, format_sig9, resolve_scenario, write_metrics, write_trajectory,
    ScenarioConfig, ScenarioError,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_COLLISION: i32 = 3;
pub const EXIT_INCOMPLETE: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "apf-sim",
    version,
    about = "Potential-field collision avoidance simulator for fixed-wing UAVs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the bundled scenarios.
    List,
    /// Run one scenario and write its trajectory and metrics.
    Run(RunArgs),
    /// Run a scenario with both guidance laws and tabulate the results.
    Compare(RunArgs),
    /// Load and validate a scenario, printing the resolved configuration.
    Validate(ScenarioArgs),
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Builtin scenario name or path to a JSON document.
    pub scenario: String,
    /// Dotted override, e.g. `gains.k_rep0=45` or `sim.goal_radius=5`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long, value_enum)]
    pub guidance: Option<GuidanceArg>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long = "t-max")]
    pub t_max: Option<f64>,
    #[arg(long = "out", default_value = "out")]
    pub output_dir: PathBuf,
    /// Reserved; every run is deterministic.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GuidanceArg {
    Proposed,
    Baseline,
}

impl From<GuidanceArg> for Guidance {
    fn from(g: GuidanceArg) -> Self {
        match g {
            GuidanceArg::Proposed => Guidance::Proposed,
            GuidanceArg::Baseline => Guidance::Baseline,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Direct,
    Coordinated,
}

impl From<ModeArg> for StepMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Direct => StepMode::Direct,
            ModeArg::Coordinated => StepMode::Coordinated,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("override error: {0}")]
    Override(String),
    #[error("config error: {0}")]
    Config(String),
}

fn guidance_label(g: Guidance) -> &'static str {
    match g {
        Guidance::Proposed => "proposed",
        Guidance::Baseline => "baseline",
    }
}

pub fn exit_code(verdict: &Verdict) -> i32 {
    match verdict {
        Verdict::Reached => EXIT_OK,
        Verdict::Collision { .. } => EXIT_COLLISION,
        Verdict::Stall { .. } | Verdict::Timeout { .. } => EXIT_INCOMPLETE,
    }
}

/// Applies `key=value` onto a serde struct by round-tripping through JSON;
/// unknown keys fail on the way back in.
fn apply_override<T: Serialize + DeserializeOwned>(
    target: &T,
    path: &[&str],
    value: serde_json::Value,
    full_key: &str,
) -> Result<T, CliError> {
    let mut tree = serde_json::to_value(target).expect("config serializes");
    let mut node = &mut tree;
    for (i, part) in path.iter().enumerate() {
        let map = node
            .as_object_mut()
            .ok_or_else(|| CliError::Override(format!("unknown key '{full_key}'")))?;
        if i + 1 == path.len() {
            map.insert(part.to_string(), value.clone());
            break;
        }
        node = map
            .get_mut(*part)
            .ok_or_else(|| CliError::Override(format!("unknown key '{full_key}'")))?;
    }
    serde_json::from_value(tree).map_err(|e| CliError::Override(format!("'{full_key}': {e}")))
}

fn parse_value(raw: &str) -> serde_json::Value {
    serde_json::from_str(raw).unwrap_or_else(|_| serde_json::Value::String(raw.to_string()))
}

/// Splits and applies every override; all are checked before anything runs.
pub fn apply_overrides(
    scenario: &mut ScenarioConfig,
    sim: &mut SimConfig,
    overrides: &[String],
) -> Result<(), CliError> {
    for item in overrides {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| CliError::Override(format!("expected KEY=VALUE, got '{item}'")))?;
        let parts: Vec<&str> = key.trim().split('.').collect();
        let value = parse_value(raw.trim());
        match parts.as_slice() {
            ["gains", rest @ ..] if !rest.is_empty() => {
                scenario.gains = apply_override(&scenario.gains, rest, value, key)?;
            }
            ["sim", rest @ ..] if !rest.is_empty() => {
                *sim = apply_override(sim, rest, value, key)?;
            }
            _ => return Err(CliError::Override(format!("unknown key '{key}'"))),
        }
    }
    scenario.validate()?;
    sim.validate().map_err(CliError::Config)
}

fn prepare(args: &RunArgs) -> Result<(ScenarioConfig, SimConfig), CliError> {
    let mut scenario = resolve_scenario(&args.scenario.scenario)?;
    let mut sim = SimConfig::for_scenario(&scenario);
    if let Some(g) = args.guidance {
        sim.guidance = g.into();
    }
    if let Some(m) = args.mode {
        sim.mode = m.into();
    }
    if let Some(dt) = args.dt {
        sim.dt = dt;
    }
    if let Some(t) = args.t_max {
        sim.t_max = t;
    }
    apply_overrides(&mut scenario, &mut sim, &args.scenario.overrides)?;
    Ok((scenario, sim))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.3}"))
}

pub fn verdict_line(metrics: &RunMetrics) -> String {
    format!(
        "verdict={} min_separation={} max_cross_track={:.3} jitter={:.4}",
        metrics.verdict.label(),
        fmt_opt(metrics.min_separation()),
        metrics.max_cross_track(),
        metrics.mean_heading_jitter()
    )
}

fn write_outputs(
    dir: &Path,
    stem: &str,
    log: &TrajectoryLog,
    metrics: &RunMetrics,
) -> Result<(PathBuf, PathBuf), ScenarioError> {
    fs::create_dir_all(dir).map_err(|source| ScenarioError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let csv = dir.join(format!("{stem}_trajectory.csv"));
    let json = dir.join(format!("{stem}_metrics.json"));
    write_trajectory(log, &csv)?;
    write_metrics(metrics, &json)?;
    Ok((csv, json))
}

fn cmd_list(out: &mut dyn Write) -> i32 {
    for s in builtin_scenarios() {
        let tag = if s.invented {
            " [invented geometry]"
        } else {
            ""
        };
        let _ = writeln!(
            out,
            "{:<16} {} agents, {} obstacles{}",
            s.name,
            s.agents.len(),
            s.obstacles.len(),
            tag
        );
    }
    EXIT_OK
}

fn cmd_validate(
    args: &ScenarioArgs,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, CliError> {
    let mut scenario = resolve_scenario(&args.scenario)?;
    let mut sim = SimConfig::for_scenario(&scenario);
    apply_overrides(&mut scenario, &mut sim, &args.overrides)?;
    for w in scenario.warnings() {
        let _ = writeln!(err, "warning: {w}");
    }
    let resolved = serde_json::json!({ "scenario": scenario, "sim": sim });
    let _ = writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(&resolved).expect("serializable")
    );
    Ok(EXIT_OK)
}

fn cmd_run(args: &RunArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let (scenario, sim) = prepare(args)?;
    let (log, metrics) = simulate(&scenario, &sim);
    let stem = format!("{}_{}", scenario.name, guidance_label(sim.guidance));
    write_outputs(&args.output_dir, &stem, &log, &metrics)?;
    let _ = writeln!(
        out,
        "{} {}: {}",
        scenario.name,
        guidance_label(sim.guidance),
        verdict_line(&metrics)
    );
    Ok(exit_code(&metrics.verdict))
}

fn cmd_compare(args: &RunArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let (scenario, sim) = prepare(args)?;
    let configs =
        [Guidance::Proposed, Guidance::Baseline].map(|guidance| SimConfig { guidance, ..sim });
    let [proposed, baseline] = std::thread::scope(|scope| {
        configs
            .map(|cfg| {
                let scenario = &scenario;
                scope.spawn(move || simulate(scenario, &cfg))
            })
            .map(|h| h.join().expect("simulation thread"))
    });

    let mut table = String::from(
        "guidance,verdict,reached,min_separation,max_cross_track,path_length,jitter\n",
    );
    for (cfg, (log, metrics)) in configs.iter().zip([&proposed, &baseline]) {
        let label = guidance_label(cfg.guidance);
        write_outputs(
            &args.output_dir,
            &format!("{}_{label}", scenario.name),
            log,
            metrics,
        )?;
        let path_length: f64 = metrics.agents.iter().map(|a| a.path_length).sum();
        table.push_str(&format!(
            "{label},{},{},{},{},{},{}\n",
            metrics.verdict.label(),
            metrics.all_reached(),
            metrics.min_separation().map_or("n/a".into(), format_sig9),
            format_sig9(metrics.max_cross_track()),
            format_sig9(path_length),
            format_sig9(metrics.mean_heading_jitter()),
        ));
    }
    let table_path = args
        .output_dir
        .join(format!("{}_compare.csv", scenario.name));
    fs::write(&table_path, &table).map_err(|source| ScenarioError::Io {
        path: table_path,
        source,
    })?;

    let _ = writeln!(
        out,
        "{:<9} {:<10} {:>8} {:>14} {:>15} {:>12} {:>10}",
        "guidance", "verdict", "reached", "min_sep[m]", "cross_track[m]", "path[m]", "jitter"
    );
    for (cfg, (_, m)) in configs.iter().zip([&proposed, &baseline]) {
        let path_length: f64 = m.agents.iter().map(|a| a.path_length).sum();
        let _ = writeln!(
            out,
            "{:<9} {:<10} {:>8} {:>14} {:>15.3} {:>12.3} {:>10.4}",
            guidance_label(cfg.guidance),
            m.verdict.label(),
            m.all_reached(),
            fmt_opt(m.min_separation()),
            m.max_cross_track(),
            path_length,
            m.mean_heading_jitter()
        );
    }
    Ok(exit_code(&proposed.1.verdict))
}

/// Parses `argv` and runs the command; returns the process exit status.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_CONFIG;
            }
            let _ = write!(out, "{e}");
            return EXIT_OK;
        }
    };
    let result = match &cli.command {
        Command::List => Ok(cmd_list(out)),
        Command::Validate(args) => cmd_validate(args, out, err),
        Command::Run(args) => cmd_run(args, out),
        Command::Compare(args) => cmd_compare(args, out),
    };
    result.unwrap_or_else(|e| {
        let _ = writeln!(err, "error: {e}");
        EXIT_CONFIG
    })
}
