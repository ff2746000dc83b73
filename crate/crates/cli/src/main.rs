use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use vsds::io::{
    emit_report, load_scenario, read_trajectory_csv, render_svg, run_command, sample_via,
    write_plot_csv, write_via_csv, ReportTolerances, RunOptions, EXIT_ERROR, EXIT_NON_CONVERGENCE,
    EXIT_OK,
};
use vsds::sim::{DEFAULT_EPS_STOP, DEFAULT_OMEGA_STOP};
use vsds::VsdsPolicy;

/// Orientation control with variable stiffness dynamical systems.
#[derive(Parser)]
#[command(name = "vsds", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile the policy and simulate every start of a scenario.
    Run {
        config: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Seed for random starts (overrides the config).
        #[arg(long)]
        seed: Option<u64>,
        /// Rerun each start at half the step and compare final states.
        #[arg(long)]
        dt_check: bool,
    },
    /// Sample the via-points of a scenario and print them as CSV.
    SampleVia { config: PathBuf },
    /// Recompute the report of a recorded trajectory.
    Report {
        trajectory: PathBuf,
        policy: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_EPS_STOP)]
        eps_stop: f64,
        #[arg(long, default_value_t = DEFAULT_OMEGA_STOP)]
        omega_stop: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}

fn execute(command: Command) -> Result<i32> {
    match command {
        Command::Run {
            config,
            out_dir,
            seed,
            dt_check,
        } => {
            let cfg = load_scenario(&config)?;
            let outcome = run_command(
                &cfg,
                &RunOptions {
                    out_dir,
                    seed,
                    dt_check,
                },
            )
            .with_context(|| format!("running {}", config.display()))?;
            for r in &outcome.report.runs {
                eprintln!(
                    "run {:>2}: converged={} t={:.3}s final_dist={:.2e} max_dev={:.3}",
                    r.run,
                    r.metrics.converged,
                    r.metrics.duration,
                    r.metrics.final_dist,
                    r.metrics.max_path_deviation
                );
            }
            if let Some(ok) = outcome.report.dt_check_passed {
                eprintln!("dt-check: {}", if ok { "passed" } else { "FAILED" });
            }
            eprintln!("wrote {}", outcome.out_dir.display());
            Ok(outcome.exit_code)
        }
        Command::SampleVia { config } => {
            let cfg = load_scenario(&config)?;
            let via = sample_via(&cfg).with_context(|| format!("sampling {}", config.display()))?;
            write_via_csv(&via, io::stdout().lock())?;
            Ok(EXIT_OK)
        }
        Command::Report {
            trajectory,
            policy,
            out_dir,
            eps_stop,
            omega_stop,
        } => {
            let samples = read_trajectory_csv(&trajectory)?;
            let text = fs::read_to_string(&policy)
                .with_context(|| format!("reading {}", policy.display()))?;
            let policy = VsdsPolicy::from_json(&text)?;
            let report = emit_report(
                &samples,
                policy.via_points(),
                &ReportTolerances {
                    eps_stop,
                    omega_stop,
                },
            )?;
            let json = serde_json::to_string_pretty(&report)?;
            if let Some(dir) = out_dir {
                fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
                fs::write(dir.join("report.json"), format!("{json}\n"))?;
                write_plot_csv(&samples, &policy.goal(), dir.join("plot.csv"))?;
                fs::write(dir.join("trajectory.svg"), render_svg(&samples))?;
            }
            writeln!(io::stdout().lock(), "{json}")?;
            Ok(if report.converged {
                EXIT_OK
            } else {
                EXIT_NON_CONVERGENCE
            })
        }
    }
}
