//! Command-line front end: exact analyses, Monte Carlo sessions, efficiency
//! sweeps, and the verification suite.
//!
//! Exit codes: 0 on success, 1 on usage/configuration/IO errors, 2 when the
//! verification suite finds a failing check.

mod config;
mod report;

use std::fs;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pingpong_core::analysis::{exact_joint, info_report, sweep};
use pingpong_core::protocol::run_session;
use pingpong_core::verify;

use config::{CommonArgs, RunConfig};
use report::{render_sweep_csv, ExactReport, SimulateReport};

#[derive(Debug, Parser)]
#[command(
    name = "pingpong",
    version,
    about = "Simulator and analysis toolkit for the ping-pong protocol under optical eavesdropping attacks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact joint distribution, mutual informations, error, loss, and
    /// detection figures for one attack variant.
    Exact(CommonArgs),
    /// Seeded Monte Carlo session over a lossy channel.
    Simulate(CommonArgs),
    /// Channel-efficiency sweep comparing the attacks (CSV).
    Sweep(CommonArgs),
    /// Run every model invariant and report each as PASS or FAIL.
    Verify(CommonArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let usage_only = matches!(
                err.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            );
            let _ = err.print();
            return if usage_only {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    let (args, run) = match &cli.command {
        Command::Exact(args) => (args, cmd_exact as fn(&RunConfig) -> Result<ExitCode, String>),
        Command::Simulate(args) => (args, cmd_simulate as _),
        Command::Sweep(args) => (args, cmd_sweep as _),
        Command::Verify(args) => (args, cmd_verify as _),
    };
    let config = match RunConfig::resolve(args) {
        Ok(config) => config,
        Err(message) => {
            eprintln!("error: {message}");
            return ExitCode::from(1);
        }
    };
    match run(&config) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

fn write_output(config: &RunConfig, contents: &str) -> Result<(), String> {
    if let Some(path) = &config.output {
        fs::write(path, contents)
            .map_err(|err| format!("cannot write {}: {err}", path.display()))?;
    }
    Ok(())
}

fn cmd_exact(config: &RunConfig) -> Result<ExitCode, String> {
    let joint = exact_joint(config.attack()).map_err(|err| err.to_string())?;
    let info = info_report(config.attack()).map_err(|err| err.to_string())?;
    let report = ExactReport::new(config, &joint, &info);
    print!("{}", report.render_text());
    let json = serde_json::to_string_pretty(&report).map_err(|err| err.to_string())?;
    write_output(config, &format!("{json}\n"))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(config: &RunConfig) -> Result<ExitCode, String> {
    let stats =
        run_session(&config.protocol(), &config.channel()).map_err(|err| err.to_string())?;
    let report = SimulateReport::new(config, &stats);
    print!("{}", report.render_text());
    let json = serde_json::to_string_pretty(&report).map_err(|err| err.to_string())?;
    write_output(config, &format!("{json}\n"))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(config: &RunConfig) -> Result<ExitCode, String> {
    let points = sweep(&config.eta_grid()).map_err(|err| err.to_string())?;
    let csv = render_sweep_csv(&points);
    match &config.output {
        Some(_) => {
            write_output(config, &csv)?;
            println!("wrote {} rows", points.len());
        }
        None => print!("{csv}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(_config: &RunConfig) -> Result<ExitCode, String> {
    let checks = verify::run_all();
    let mut failed = 0usize;
    for check in &checks {
        let status = if check.passed { "PASS" } else { "FAIL" };
        println!(
            "{}: {status} (measured {}, expected {})",
            check.name, check.measured, check.expected
        );
        if !check.passed {
            failed += 1;
        }
    }
    println!(
        "verification: {}/{} checks passed",
        checks.len() - failed,
        checks.len()
    );
    if failed > 0 {
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}
