mod config;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{CheckMode, Overrides, RunConfig};
use run::RunError;

#[derive(Parser)]
#[command(name = "chns", version, about = "Cahn-Hilliard-Navier-Stokes splitting schemes on a MAC grid")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario, writing energy.csv and snapshots.
    Simulate(RunArgs),
    /// Run the manufactured-solution convergence study.
    Converge(RunArgs),
    /// Run a scenario with every invariant check and no output files.
    Validate(RunArgs),
    /// Print every config key with its default.
    Describe {
        /// Scenario whose defaults are shown.
        #[arg(long, default_value = "bubble-merging")]
        scenario: String,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Config file (same as --config).
    #[arg(value_name = "CONFIG", conflicts_with = "config")]
    config_file: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Stop at the first violated invariant (the default).
    #[arg(long, conflicts_with = "record_only")]
    strict: bool,
    /// Record violated invariants and keep going.
    #[arg(long)]
    record_only: bool,
    /// Worker threads for the convergence levels.
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
}

impl RunArgs {
    fn load(&self) -> Result<RunConfig, RunError> {
        let mut ov = match self.config_file.as_ref().or(self.config.as_ref()) {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| RunError::Io {
                    path: path.clone(),
                    source,
                })?;
                Overrides::parse_toml(&text)?
            }
            None => Overrides::default(),
        };
        ov.apply_env(std::env::vars())?;
        let mut cfg = RunConfig::resolve(&ov)?;
        if self.strict {
            cfg.mode = CheckMode::Strict;
        }
        if self.record_only {
            cfg.mode = CheckMode::RecordOnly;
        }
        Ok(cfg)
    }

    fn threads(&self) -> usize {
        self.threads
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
            .max(1)
    }
}

fn print_summary(s: &run::RunSummary) {
    println!("steps: {}", s.steps);
    println!("max |div u|: {:e}", s.max_div);
    if let Some(d) = s.max_mass_drift {
        println!("max relative mass drift: {d:e}");
    }
    println!("energy checks: {}", if s.energy_checked { "on" } else { "off (forced run)" });
    println!("violations: {}", s.violations.len());
    for v in &s.violations {
        println!("- violation\n{v}");
    }
}

fn execute(cli: Cli) -> Result<(), RunError> {
    match cli.cmd {
        Cmd::Describe { scenario } => {
            print!("{}", config::describe(&scenario)?);
        }
        Cmd::Simulate(args) => {
            let cfg = args.load()?;
            let s = run::simulate(&cfg, Some(&args.out), false)?;
            print_summary(&s);
            println!("files written: {} in {}", s.files, args.out.display());
        }
        Cmd::Validate(args) => {
            let cfg = args.load()?;
            let s = run::simulate(&cfg, None, true)?;
            print_summary(&s);
        }
        Cmd::Converge(args) => {
            let cfg = args.load()?;
            let (table, bad) = run::converge(&cfg, args.threads())?;
            print!("{}", table.to_text());
            std::fs::create_dir_all(&args.out).map_err(|source| RunError::Io {
                path: args.out.clone(),
                source,
            })?;
            let path = args.out.join("convergence.csv");
            std::fs::write(&path, table.to_csv()).map_err(|source| RunError::Io { path, source })?;
            if !bad.is_empty() {
                if cfg.mode == CheckMode::Strict {
                    return Err(RunError::Rates(bad));
                }
                println!("rates outside the expected band (recorded):");
                bad.iter().for_each(|b| println!("  {b}"));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("chns: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
