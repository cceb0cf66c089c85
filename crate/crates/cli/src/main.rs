//! `occrisk`: batch experiments on occlusion-aware intersection driving.

mod overlay;
mod params;
mod run;

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use occlusion_risk::risk::RiskMode;
use occlusion_risk::scene::{validate, IntersectionFile};
use serde::Deserialize;

use params::Params;
use run::{Exports, MapSource, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Map(String),
    #[error(transparent)]
    Other(#[from] anyhow::Error),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "occrisk",
    version,
    args_override_self = true,
    about = "Occlusion-aware risk assessment and planning at intersections"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run Monte Carlo batches and write summaries.
    Run(RunArgs),
    /// Check an intersection file against the map invariants.
    Validate { path: PathBuf },
    /// Merge summary files into one collision-rate table per intersection.
    Overlay {
        #[arg(required = true)]
        summaries: Vec<PathBuf>,
        /// Write the table here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Default)]
struct RunArgs {
    /// TOML file with run settings; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `synthetic` or an intersection JSON file.
    #[arg(long, conflicts_with = "map_dir")]
    map: Option<String>,
    /// Run every `*.json` intersection in a directory.
    #[arg(long)]
    map_dir: Option<PathBuf>,
    #[arg(long)]
    scenarios: Option<usize>,
    #[arg(long)]
    others: Option<usize>,
    /// Comma-separated: occlusion_aware, observed_only.
    #[arg(long, value_delimiter = ',')]
    modes: Option<Vec<String>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    parallelism: Option<usize>,
    /// Ego route id; the map's default otherwise.
    #[arg(long)]
    ego_route: Option<String>,
    #[arg(long, env = "OCCRISK_OUT")]
    out: Option<PathBuf>,
    #[arg(long)]
    export_traces: bool,
    #[arg(long)]
    export_particles: bool,
    #[arg(long)]
    export_profiles: bool,
    #[arg(long)]
    export_cdfs: bool,
    /// Override a parameter, e.g. `--set lambda=0.02`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Print the effective parameters and exit.
    #[arg(long)]
    print_params: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    map: Option<String>,
    map_dir: Option<PathBuf>,
    scenarios: Option<usize>,
    others: Option<usize>,
    modes: Option<Vec<String>>,
    seed: Option<u64>,
    parallelism: Option<usize>,
    ego_route: Option<String>,
    out: Option<PathBuf>,
    #[serde(default)]
    export_traces: bool,
    #[serde(default)]
    export_particles: bool,
    #[serde(default)]
    export_profiles: bool,
    #[serde(default)]
    export_cdfs: bool,
    #[serde(default)]
    set: BTreeMap<String, f64>,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn resolve_params(file: &FileConfig, args: &RunArgs) -> Result<Params, CliError> {
    let mut params = Params::default();
    for (k, &v) in &file.set {
        params.set(k, v).map_err(usage)?;
    }
    for a in &args.set {
        params.assign(a).map_err(usage)?;
    }
    params.validate().map_err(usage)?;
    Ok(params)
}

fn resolve(args: RunArgs) -> Result<(RunConfig, bool), CliError> {
    let file = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            toml::from_str::<FileConfig>(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };
    let params = resolve_params(&file, &args)?;

    let maps = match (&args.map, &args.map_dir, &file.map, &file.map_dir) {
        (Some(m), _, _, _) | (None, None, Some(m), None) => match m.as_str() {
            "synthetic" => MapSource::Synthetic,
            path => MapSource::File(path.into()),
        },
        (None, Some(d), _, _) | (None, None, None, Some(d)) => MapSource::Dir(d.clone()),
        (None, None, Some(_), Some(_)) => return Err(usage("config sets both map and map_dir")),
        (None, None, None, None) => MapSource::Synthetic,
    };
    let n_scenarios = args.scenarios.or(file.scenarios).unwrap_or(100);
    if n_scenarios < 1 {
        return Err(usage("--scenarios must be at least 1"));
    }
    let parallelism = args
        .parallelism
        .or(file.parallelism)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if parallelism < 1 {
        return Err(usage("--parallelism must be at least 1"));
    }
    let mode_names = args
        .modes
        .or(file.modes)
        .unwrap_or_else(|| RiskMode::ALL.iter().map(|m| m.name().to_string()).collect());
    let mut modes = Vec::new();
    for name in &mode_names {
        let m: RiskMode = name
            .parse()
            .map_err(|e: occlusion_risk::risk::RiskError| usage(e.to_string()))?;
        if modes.contains(&m) {
            return Err(usage(format!("mode {m} listed twice")));
        }
        modes.push(m);
    }
    if modes.is_empty() {
        return Err(usage("no modes given"));
    }
    let cfg = RunConfig {
        maps,
        n_scenarios,
        n_others: args.others.or(file.others).unwrap_or(5),
        modes,
        seed: args.seed.or(file.seed).unwrap_or(0),
        parallelism,
        ego_route: args.ego_route.or(file.ego_route),
        out: args.out.or(file.out).unwrap_or_else(|| PathBuf::from("occrisk-out")),
        exports: Exports {
            traces: args.export_traces || file.export_traces,
            particles: args.export_particles || file.export_particles,
            profiles: args.export_profiles || file.export_profiles,
            cdfs: args.export_cdfs || file.export_cdfs,
        },
        params,
    };
    Ok((cfg, args.print_params))
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    let (cfg, print_only) = resolve(args)?;
    if print_only {
        print!("{}", cfg.params.listing());
        return Ok(());
    }
    run::execute(&cfg)
}

fn cmd_validate(path: PathBuf) -> Result<(), CliError> {
    let text = fs::read_to_string(&path).map_err(|e| CliError::Map(format!("{}: {e}", path.display())))?;
    let file = IntersectionFile::from_json(&text)
        .map_err(|e| CliError::Map(format!("{}: malformed intersection file: {e}", path.display())))?;
    let violations = validate(&file);
    if violations.is_empty() {
        println!("OK");
        return Ok(());
    }
    for v in &violations {
        println!("{v}");
    }
    Err(CliError::Map(format!(
        "{}: {} violation(s)",
        path.display(),
        violations.len()
    )))
}

fn cmd_overlay(summaries: Vec<PathBuf>, out: Option<PathBuf>) -> Result<(), CliError> {
    let sites = overlay::merge(&summaries)?;
    match out {
        Some(path) => {
            let f = fs::File::create(&path).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
            overlay::write_table(&sites, f)?;
        }
        None => overlay::write_table(&sites, std::io::stdout().lock())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Validate { path } => cmd_validate(path),
        Command::Overlay { summaries, out } => cmd_overlay(summaries, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(e.code())
        }
    }
}
