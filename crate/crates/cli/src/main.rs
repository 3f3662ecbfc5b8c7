use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{error, info};

use qlks_core::io::{compare_fields, parse_config, resources, run_case, Backend, Overrides, RunError};

#[derive(Parser)]
#[command(name = "qlks", version, about = "Lattice kinetic scheme solver with classical and statevector backends")]
struct Cli {
    /// Only print errors.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a case and write its artifacts.
    Run(RunArgs),
    /// Max and RMS difference between two field CSV files.
    Compare { a: PathBuf, b: PathBuf },
    /// Print the circuit resource report for a case without running it.
    Resources {
        #[arg(long)]
        config: PathBuf,
        /// Also write resources.json here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_parser = |s: &str| s.parse::<Backend>())]
    backend: Option<Backend>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, conflicts_with = "tstar")]
    steps: Option<usize>,
    #[arg(long)]
    tstar: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "error" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(command: Command) -> Result<(), RunError> {
    match command {
        Command::Run(args) => {
            let overrides = Overrides {
                backend: args.backend,
                output: args.out,
                steps: args.steps,
                tstar: args.tstar,
            };
            let case = parse_config(&args.config, &overrides)?;
            info!("{}", case.echo());
            let summary = run_case(&case)?;
            for b in &summary.backends {
                if let Some(l2) = &b.l2 {
                    info!("{}: L2 {:?}", b.backend, l2);
                }
                if let Some(g) = &b.ghia {
                    info!("{}: Ghia centerline rms u {:.4e} v {:.4e}", b.backend, g[0].rms, g[1].rms);
                }
            }
            if let Some(d) = summary.max_discrepancy {
                info!("max backend discrepancy {d:.3e}");
            }
            info!("wrote {} files to {}", summary.files.len(), case.config.output.display());
            Ok(())
        }
        Command::Compare { a, b } => {
            let read = |p: &PathBuf| {
                fs::read_to_string(p).map_err(|e| RunError::Io {
                    path: p.display().to_string(),
                    reason: e.to_string(),
                })
            };
            let diff = compare_fields(&read(&a)?, &read(&b)?).map_err(|reason| RunError::Io {
                path: format!("{} / {}", a.display(), b.display()),
                reason,
            })?;
            println!("nodes={}", diff.nodes);
            for (i, name) in ["rho", "u", "v", "w"].iter().enumerate() {
                println!("{name}: max={:.6e} rms={:.6e}", diff.max[i], diff.rms[i]);
            }
            Ok(())
        }
        Command::Resources { config, out } => {
            let case = parse_config(&config, &Overrides::default())?;
            let json = resources(&case)?;
            print!("{json}");
            if let Some(dir) = out {
                fs::create_dir_all(&dir)
                    .and_then(|_| fs::write(dir.join("resources.json"), &json))
                    .map_err(|e| RunError::Io {
                        path: dir.display().to_string(),
                        reason: e.to_string(),
                    })?;
            }
            Ok(())
        }
    }
}
