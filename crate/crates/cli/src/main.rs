use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use flatdisc_cli::{analyze, exit_code, render_text, MethodChoice, EXIT_INPUT};
use flatdisc_core::flatness::verify_parametrization;
use flatdisc_core::io::{ParametrizationFile, SystemDefinitionFile};

#[derive(Parser)]
#[command(name = "flatdisc", version, about = "Flatness analysis of discrete-time nonlinear systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the flatness tests on a system definition file.
    Analyze {
        system: PathBuf,
        #[arg(long, value_enum, default_value = "both")]
        method: MethodChoice,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Iteration cap (default: number of states).
        #[arg(long)]
        max_iter: Option<usize>,
        /// Write the assembled parametrization to this file.
        #[arg(long)]
        emit_parametrization: Option<PathBuf>,
        /// Write the structured report to this file.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the structured report instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Check a flat parametrization against a system.
    Verify { system: PathBuf, parametrization: PathBuf },
}

fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn run() -> Result<i32> {
    match Cli::parse().command {
        Command::Analyze {
            system,
            method,
            seed,
            max_iter,
            emit_parametrization,
            out,
            json,
        } => {
            let def = SystemDefinitionFile::from_json(&read(&system)?).with_context(|| system.display().to_string())?;
            let report = analyze(&def, method, seed, max_iter).with_context(|| system.display().to_string())?;
            if json {
                println!("{}", report.to_json());
            } else {
                print!("{}", render_text(&report));
            }
            if let Some(path) = out {
                std::fs::write(&path, report.to_json()).with_context(|| format!("writing {}", path.display()))?;
            }
            if let Some(path) = emit_parametrization {
                match report.methods.iter().find_map(|m| m.parametrization.as_ref()) {
                    Some(p) => std::fs::write(&path, p.to_json()).with_context(|| format!("writing {}", path.display()))?,
                    None => eprintln!("no parametrization available; {} not written", path.display()),
                }
            }
            Ok(exit_code(&report.verdict))
        }
        Command::Verify { system, parametrization } => {
            let s = SystemDefinitionFile::from_json(&read(&system)?)
                .and_then(|d| d.to_system())
                .with_context(|| system.display().to_string())?;
            let p = ParametrizationFile::from_json(&read(&parametrization)?)
                .and_then(|f| f.to_parametrization())
                .with_context(|| parametrization.display().to_string())?;
            let v = verify_parametrization(&s, &p);
            if let Some(e) = &v.chart_error {
                anyhow::bail!("chart mismatch: {e}");
            }
            for (i, r) in &v.residuals {
                println!("residual in component {}: {r}", i + 1);
            }
            if !v.depth_violations.is_empty() {
                println!("shift depth exceeded by: {}", v.depth_violations.join(", "));
            }
            println!("submersion: {}", v.submersion);
            println!("rank d_y0 F_x: {}/{}", v.y0_rank.0, v.y0_rank.1);
            println!("{}", if v.passed() { "verified" } else { "not verified" });
            Ok(if v.passed() { 0 } else { 2 })
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT as u8)
        }
    }
}
