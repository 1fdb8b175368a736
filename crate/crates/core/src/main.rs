use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use chemolab::cli::{
    parse_scenario, parse_sweep, preset, preset_document, run_scenario, run_sweep, ExitStatus,
    Mode, Scenario, ScenarioError, PRESETS,
};

#[derive(Parser)]
#[command(
    name = "chemolab",
    version,
    about = "Two-species chemotaxis laboratory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the regime and evaluate the hypothesis checks.
    Analyze(ScenarioArgs),
    /// Analyze, then integrate in time.
    Simulate(ScenarioArgs),
    /// Run a parameter sweep described by a sweep file.
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// List presets, or print one as a scenario document.
    Presets {
        #[arg(long)]
        preset: Option<String>,
    },
}

#[derive(Args)]
struct ScenarioArgs {
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    scenario: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Seed for random initial data.
    #[arg(long)]
    seed: Option<u64>,
}

/// `Ok(Err(_))` is a document that was read but did not validate.
fn load(args: &ScenarioArgs) -> Result<std::result::Result<Scenario, ScenarioError>> {
    let mut scenario = match (&args.scenario, &args.preset) {
        (Some(path), _) => {
            let text = read(path)?;
            match parse_scenario(&text) {
                Ok(s) => s,
                Err(e) => return Ok(Err(e)),
            }
        }
        (None, Some(name)) => match preset(name) {
            Some(s) => s,
            None => bail!("unknown preset `{name}`; see `chemolab presets`"),
        },
        (None, None) => unreachable!("clap requires one of the two"),
    };
    if let Some(seed) = args.seed {
        scenario.seed = seed;
    }
    Ok(Ok(scenario))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn validation_failure(e: ScenarioError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(ExitStatus::Validation.code() as u8)
}

fn scenario_command(args: ScenarioArgs, mode: Mode) -> Result<ExitCode> {
    let scenario = match load(&args)? {
        Ok(s) => s,
        Err(e) => return Ok(validation_failure(e)),
    };
    let report = run_scenario(&scenario, mode, Some(&args.out))?;
    eprintln!(
        "{}: {:?}, report in {}",
        scenario.name.as_deref().unwrap_or("scenario"),
        report.status,
        args.out.join("report.json").display()
    );
    Ok(ExitCode::from(report.exit_code as u8))
}

fn main() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Analyze(args) => scenario_command(args, Mode::Analyze),
        Command::Simulate(args) => scenario_command(args, Mode::Simulate),
        Command::Sweep { scenario, out } => {
            let spec = match parse_sweep(&read(&scenario)?) {
                Ok(s) => s,
                Err(e) => return Ok(validation_failure(e)),
            };
            let table = run_sweep(&spec, Some(&out))?;
            eprintln!(
                "{} points, table in {}",
                table.rows.len(),
                out.join("sweep.csv").display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Presets { preset: None } => {
            for (name, summary) in PRESETS {
                println!("{name:<14} {summary}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Presets { preset: Some(name) } => match preset_document(&name) {
            Some(doc) => {
                println!("{}", serde_json::to_string_pretty(&doc)?);
                Ok(ExitCode::SUCCESS)
            }
            None => bail!("unknown preset `{name}`"),
        },
    }
}
