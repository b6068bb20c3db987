use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use prp_core::experiment::{self, RunResult, SweepError, SweepSpec, PRESET_NAMES};
use prp_core::ScenarioConfig;

/// Route-discovery experiments for PRP and blind flooding.
#[derive(Debug, Parser)]
#[command(name = "prp-sim", version, about)]
struct Cli {
    /// Append a per-discovery CSV after the summary table.
    #[arg(long, global = true)]
    verbose_records: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a single scenario from a TOML config.
    Run { config: PathBuf },
    /// Run a parameter sweep from a TOML spec.
    Sweep {
        spec: PathBuf,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
        parallel: u16,
    },
    /// Run a built-in sweep.
    Preset {
        name: String,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
        parallel: u16,
        /// Override the simulated duration in seconds.
        #[arg(long)]
        duration: Option<f64>,
    },
    /// List the built-in sweeps.
    Presets,
}

fn exit_code(err: &SweepError) -> u8 {
    match err {
        SweepError::RunFailed { .. } | SweepError::Pool(_) => 2,
        _ => 1,
    }
}

fn emit(body: &str, results: &[RunResult], verbose: bool) -> std::io::Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(body.as_bytes())?;
    if verbose {
        out.write_all(b"\n")?;
        out.write_all(experiment::records_csv(results).as_bytes())?;
    }
    out.flush()
}

fn run_spec(spec: &SweepSpec, parallel: u16, verbose: bool) -> Result<(), SweepError> {
    eprintln!("running {} simulation(s) on {parallel} thread(s)", spec.run_count());
    let results = experiment::run_sweep(spec, parallel.into())?;
    emit(&experiment::render(spec, &results), &results, verbose)
        .map_err(|e| SweepError::RunFailed {
            key: results[0].key,
            reason: format!("writing output: {e}"),
        })
}

fn execute(cli: Cli) -> Result<(), SweepError> {
    match cli.command {
        Command::Run { config } => {
            let config = ScenarioConfig::from_file(&config)?;
            let spec = SweepSpec {
                seeds: vec![config.rng_seed],
                base: config,
                axes: Default::default(),
                report: Default::default(),
            };
            run_spec(&spec, 1, cli.verbose_records)
        }
        Command::Sweep { spec, parallel } => {
            let spec = SweepSpec::from_file(&spec)?;
            run_spec(&spec, parallel, cli.verbose_records)
        }
        Command::Preset {
            name,
            parallel,
            duration,
        } => {
            let mut spec = experiment::preset(&name)?;
            if let Some(d) = duration {
                spec.base.sim_duration_s = d;
            }
            run_spec(&spec, parallel, cli.verbose_records)
        }
        Command::Presets => {
            for name in PRESET_NAMES {
                println!("{name}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage mistakes are validation errors; help and version are not errors.
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
