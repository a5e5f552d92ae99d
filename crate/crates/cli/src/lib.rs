//! `papsim`: run photoassociation scenarios from TOML files or shipped presets.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod presets;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

pub use commands::Command;
pub use config::{Loaded, Scenario, Source};
pub use error::CliError;
use output::{render_json, write_atomic, Artifacts};

/// Environment variable holding the worker count.
pub const THREADS_ENV: &str = "PAPSIM_THREADS";

#[derive(Debug, Parser)]
#[command(name = "papsim", version, about = "Photoassociation by adiabatic passage: scenario runner")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Bound levels of one surface in an energy window.
    Levels(RunArgs),
    /// Scattering length, phase shifts and threshold overlaps.
    Scatter(RunArgs),
    /// Franck-Condon tables and branching ratios.
    Fc(RunArgs),
    /// Amplitude dynamics of a linkage scheme, with optional intensity scan.
    Dynamics(RunArgs),
    /// Maxwell-Boltzmann averaged dynamics and campaign budget.
    Ensemble(RunArgs),
    /// Per-pulse fraction, collision count and wave-packet parameters.
    Rates(RunArgs),
    /// List presets, or print one.
    Presets { name: Option<String> },
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Scenario file.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Shipped scenario name.
    #[arg(long)]
    preset: Option<String>,
    /// Override an existing key, e.g. --set pulses.P1.intensity="2e4 W/cm^2".
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory (default: outputs.dir of the scenario).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Outcome of a successful run.
#[derive(Debug)]
pub struct Report {
    pub out_dir: PathBuf,
    pub written: Vec<PathBuf>,
    pub artifacts: Artifacts,
}

/// Load, run and write artifacts plus `manifest.json`.
pub fn run(cmd: Command, source: Source, overrides: &[String], out: Option<PathBuf>) -> Result<Report, CliError> {
    let start = Instant::now();
    let loaded = config::load(source, overrides)?;
    let artifacts = commands::execute(cmd, &loaded)?;
    let out_dir = out.unwrap_or_else(|| PathBuf::from(&loaded.scenario.outputs.dir));
    let mut written = artifacts.write_all(&out_dir)?;
    let manifest = json!({
        "tool": "papsim",
        "version": env!("CARGO_PKG_VERSION"),
        "command": cmd.name(),
        "config_source": loaded.source.describe(),
        "config_sha256": loaded.sha256(),
        "overrides": overrides,
        "outputs": artifacts.names().collect::<Vec<_>>(),
        "threads": rayon::current_num_threads(),
        "wall_time_s": start.elapsed().as_secs_f64(),
    });
    let path = out_dir.join("manifest.json");
    write_atomic(&path, &render_json(&manifest))?;
    written.push(path);
    Ok(Report { out_dir, written, artifacts })
}

fn init_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|n| *n > 0) {
        // a pool built earlier in the process keeps its size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Entry point of the binary; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    init_threads();
    let (cmd, a) = match cli.cmd {
        Cmd::Presets { name: None } => {
            presets::NAMES.iter().for_each(|n| println!("{n}"));
            return 0;
        }
        Cmd::Presets { name: Some(n) } => match presets::get(&n) {
            Some(text) => {
                print!("{text}");
                return 0;
            }
            None => {
                eprintln!("error[PRESET_UNKNOWN]: no preset '{n}'");
                return 2;
            }
        },
        Cmd::Levels(a) => (Command::Levels, a),
        Cmd::Scatter(a) => (Command::Scatter, a),
        Cmd::Fc(a) => (Command::Fc, a),
        Cmd::Dynamics(a) => (Command::Dynamics, a),
        Cmd::Ensemble(a) => (Command::Ensemble, a),
        Cmd::Rates(a) => (Command::Rates, a),
    };
    let source = match (a.config, a.preset) {
        (Some(p), _) => Source::File(p),
        (None, Some(n)) => Source::Preset(n),
        (None, None) => unreachable!("clap requires one of --config / --preset"),
    };
    match run(cmd, source, &a.overrides, a.out) {
        Ok(r) => {
            for p in &r.written {
                println!("{}", p.display());
            }
            0
        }
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error[{}]: {msg}", e.tag());
            e.exit_code()
        }
    }
}
