//! `metapulse`: run, validate and list pulse-propagation scenarios.
//!
//! Exit status: 0 on success, 1 when the configuration or the run fails,
//! 3 when the run completes but a gating check fails.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use metapulse::scenario::{
    parse_config_with, parse_override, run_scenario, Override, ScenarioConfig, ScenarioKind,
};

const EXIT_FAILED_CHECKS: u8 = 3;

#[derive(Parser)]
#[command(name = "metapulse", version, about = "Directed-wave pulse propagation in Drude metamaterials")]
struct Cli {
    /// Log progress (repeat for more detail). RUST_LOG takes precedence.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its tables and manifest.
    Run {
        config: PathBuf,
        /// Output directory; defaults to `output.directory` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replace one value, as `section.key=value`. May be repeated.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Check a configuration and report every violation.
    Validate {
        config: PathBuf,
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// List scenarios and their required keys.
    Scenarios,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    match cli.command {
        Command::Scenarios => {
            list_scenarios();
            ExitCode::SUCCESS
        }
        Command::Validate { config, overrides } => match load(&config, &overrides) {
            Ok(c) => {
                println!("{}: valid {} scenario", config.display(), c.scenario);
                for (key, value) in &c.defaulted {
                    println!("  default {key} = {value}");
                }
                ExitCode::SUCCESS
            }
            Err(msg) => fail(&msg),
        },
        Command::Run { config, out, overrides } => {
            let c = match load(&config, &overrides) {
                Ok(c) => c,
                Err(msg) => return fail(&msg),
            };
            let out_dir = out.unwrap_or_else(|| c.output.directory.clone());
            match run_scenario(&c, &out_dir) {
                Ok(summary) => {
                    for check in &summary.checks {
                        let status = match (check.passed, check.gating) {
                            (true, _) => "pass",
                            (false, true) => "FAIL",
                            (false, false) => "note",
                        };
                        println!("{status} {}: {:e} (limit {:e})", check.name, check.value, check.limit);
                    }
                    println!("wrote {} files to {}", summary.files.len(), out_dir.display());
                    if summary.passed {
                        ExitCode::SUCCESS
                    } else {
                        eprintln!("error: gating checks failed");
                        ExitCode::from(EXIT_FAILED_CHECKS)
                    }
                }
                Err(err) => fail(&format!(
                    "{err}\ndiagnostics written to {}",
                    out_dir.join(metapulse::scenario::run::DIAGNOSTIC).display()
                )),
            }
        }
    }
}

fn fail(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::FAILURE
}

/// Parse the file with overrides; a relative pulse file resolves against the
/// directory holding the config.
fn load(path: &Path, overrides: &[String]) -> Result<ScenarioConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let overrides = overrides
        .iter()
        .map(|o| parse_override(o))
        .collect::<Result<Vec<Override>, _>>()
        .map_err(|e| e.to_string())?;
    let mut config = parse_config_with(&text, &overrides).map_err(|e| format!("{}: {e}", path.display()))?;
    if let Some(file) = &config.pulse.file {
        if file.is_relative() {
            let base = path.parent().unwrap_or(Path::new("."));
            config.pulse.file = Some(base.join(file));
        }
    }
    Ok(config)
}

fn list_scenarios() {
    for kind in ScenarioKind::ALL {
        println!("{:<26} {}", kind.name(), kind.description());
        println!("{:<26} requires: {}", "", kind.required_keys().join(", "));
    }
}
