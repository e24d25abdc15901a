use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use formation_core::scenario::{
    builtin, builtins, resolve_scenario, Overrides, Scenario, BUILTIN_NAMES,
};
use formation_core::{run_batch, ControllerVariant};

/// Exit status: 0 clean, 1 a run raised a violation flag, 2 validation or IO error.
#[derive(Parser)]
#[command(
    name = "formation",
    version,
    about = "Prescribed-performance formation control simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate scenario files or built-in scenarios (in parallel).
    Run {
        /// Paths to scenario JSON files, or built-in names.
        #[arg(required = true)]
        scenarios: Vec<String>,
        /// Directory for per-scenario CSV traces and the summary.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        duration: Option<f64>,
        /// ppc, ppc_maneuver, conventional or robust_conventional.
        #[arg(long)]
        variant: Option<ControllerVariant>,
        #[arg(long)]
        disturbance_scale: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check scenario files without simulating.
    Validate {
        #[arg(required = true)]
        scenarios: Vec<String>,
    },
    /// Print the names of the built-in scenarios.
    ListBuiltins,
    /// Write built-in scenarios as JSON files.
    ExportBuiltin {
        /// Names to export; all built-ins when empty.
        names: Vec<String>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn load_all(args: &[String]) -> (Vec<Scenario>, bool) {
    let mut failed = false;
    let scenarios = args
        .iter()
        .filter_map(|arg| match resolve_scenario(arg) {
            Ok(s) => Some(s),
            Err(err) => {
                eprintln!("error: {err}");
                failed = true;
                None
            }
        })
        .collect();
    (scenarios, failed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run {
            scenarios,
            out,
            dt,
            duration,
            variant,
            disturbance_scale,
            seed,
        } => {
            let overrides = Overrides {
                dt,
                duration,
                variant,
                disturbance_scale,
                seed,
            };
            let (mut scenarios, load_failed) = load_all(&scenarios);
            for s in &mut scenarios {
                s.apply(&overrides);
            }
            match run_batch(&scenarios, out.as_deref()) {
                Ok(report) => {
                    print!("{}", report.table());
                    for s in report.scenarios.iter().filter(|s| s.error.is_some()) {
                        eprintln!("error: {}", s.error.as_deref().unwrap_or_default());
                    }
                    if load_failed {
                        2
                    } else {
                        report.exit_code()
                    }
                }
                Err(err) => {
                    eprintln!("error: {err}");
                    2
                }
            }
        }
        Command::Validate { scenarios } => {
            let (scenarios, mut failed) = load_all(&scenarios);
            for s in &scenarios {
                match s.prepare() {
                    Ok(p) => {
                        let margin = match s.checks.vartheta_bar {
                            Some(v) => format!("within margin {v}"),
                            None => "margin not enforced".into(),
                        };
                        println!(
                            "ok: {} ({} agents, {} edges, initial bound sum {:.4}, {margin})",
                            s.name,
                            p.initial.agent_count(),
                            p.specs().len(),
                            p.margin.sum
                        );
                    }
                    Err(err) => {
                        eprintln!("error: {err}");
                        failed = true;
                    }
                }
            }
            if failed {
                2
            } else {
                0
            }
        }
        Command::ListBuiltins => {
            for s in builtins() {
                println!("{:<32} {}", s.name, s.description);
            }
            0
        }
        Command::ExportBuiltin { names, out } => {
            let names: Vec<String> = if names.is_empty() {
                BUILTIN_NAMES.iter().map(|s| s.to_string()).collect()
            } else {
                names
            };
            let mut code = 0;
            if let Err(err) = std::fs::create_dir_all(&out) {
                eprintln!("error: {}: {err}", out.display());
                return ExitCode::from(2);
            }
            for name in names {
                let Some(s) = builtin(&name) else {
                    eprintln!("error: unknown built-in scenario `{name}`");
                    code = 2;
                    continue;
                };
                let path = out.join(format!("{name}.json"));
                match s.save(&path) {
                    Ok(()) => println!("{}", path.display()),
                    Err(err) => {
                        eprintln!("error: {err}");
                        code = 2;
                    }
                }
            }
            code
        }
    };
    ExitCode::from(code)
}
