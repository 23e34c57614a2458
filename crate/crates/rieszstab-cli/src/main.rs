use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rieszstab::FamilyKind;
use rieszstab_cli::commands::{geometric_grid, DEFAULT_DEGREE, DEFAULT_ERROR_FACTOR, DEFAULT_NODES};
use rieszstab_cli::error::{EXIT_FAIL, EXIT_PASS};
use rieszstab_cli::{
    cmd_ball, cmd_multipliers, cmd_reduce, cmd_scan, cmd_verify, rayset_from_json, CliError, Format, Output,
    ScanConfig, VerifyConfig,
};

/// Riesz energy deficits of zonal sets near the unit ball.
#[derive(Parser)]
#[command(name = "rieszstab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Output format.
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    format: Format,
    /// Write the output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Kernel {
    /// Dimension of the ambient space.
    #[arg(long)]
    n: usize,
    /// Riesz exponent, 1 < lambda < n.
    #[arg(long)]
    lambda: f64,
}

#[derive(Args)]
struct EpsGrid {
    #[arg(long, default_value_t = 0.005)]
    eps_min: f64,
    #[arg(long, default_value_t = 0.05)]
    eps_max: f64,
    #[arg(long, default_value_t = 8)]
    eps_steps: usize,
    /// Angular grid nodes.
    #[arg(long, default_value_t = DEFAULT_NODES)]
    nodes: usize,
    /// Spectral truncation degree.
    #[arg(long, default_value_t = DEFAULT_DEGREE)]
    degree: usize,
    /// Multiple of the combined error tolerated below a bound.
    #[arg(long, default_value_t = DEFAULT_ERROR_FACTOR)]
    tol: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Funk-Hecke multipliers by recursion, checked against quadrature.
    Multipliers {
        #[command(flatten)]
        kernel: Kernel,
        /// Highest degree.
        #[arg(long, short = 'K', default_value_t = 20)]
        max_degree: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Potential, gradient and energy of the unit ball.
    Ball {
        #[command(flatten)]
        kernel: Kernel,
        #[command(flatten)]
        common: Common,
    },
    /// Deficits along a deformation family with a power-law fit.
    Scan {
        #[command(flatten)]
        kernel: Kernel,
        #[arg(long, value_parser = parse_family)]
        family: FamilyKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        grid: EpsGrid,
        #[command(flatten)]
        common: Common,
    },
    /// Stability inequality on random zonal perturbations.
    Verify {
        #[command(flatten)]
        kernel: Kernel,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        grid: EpsGrid,
        #[command(flatten)]
        common: Common,
    },
    /// Reduce a set to a thin annulus; --out receives the reduced set.
    Reduce {
        /// RaySet JSON file.
        input: PathBuf,
        #[arg(long)]
        lambda: f64,
        #[arg(long = "constant-C", default_value_t = 10.0)]
        constant_c: f64,
        #[arg(long, default_value_t = DEFAULT_DEGREE)]
        degree: usize,
        /// Write the property report here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, default_value = "csv", value_parser = parse_format)]
        format: Format,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse().map_err(|e: CliError| e.to_string())
}

fn parse_family(s: &str) -> Result<FamilyKind, String> {
    s.parse().map_err(|e: rieszstab::Error| e.to_string())
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let finish = |o: Output, c: &Common| -> Result<bool, CliError> {
        emit(&o.text, c.out.as_ref())?;
        Ok(o.passed)
    };
    match cli.command {
        Command::Multipliers { kernel, max_degree, common } => {
            finish(cmd_multipliers(kernel.n, kernel.lambda, max_degree, common.format)?, &common)
        }
        Command::Ball { kernel, common } => finish(cmd_ball(kernel.n, kernel.lambda, common.format)?, &common),
        Command::Scan { kernel, family, seed, grid, common } => {
            let cfg = ScanConfig {
                eps: geometric_grid(grid.eps_min, grid.eps_max, grid.eps_steps)?,
                seed,
                nodes: grid.nodes,
                degree: grid.degree,
                error_factor: grid.tol,
                format: common.format,
                ..ScanConfig::new(kernel.n, kernel.lambda, family)
            };
            finish(cmd_scan(&cfg)?, &common)
        }
        Command::Verify { kernel, trials, seed, grid, common } => {
            let cfg = VerifyConfig {
                eps: geometric_grid(grid.eps_min, grid.eps_max, grid.eps_steps)?,
                nodes: grid.nodes,
                degree: grid.degree,
                error_factor: grid.tol,
                format: common.format,
                ..VerifyConfig::new(kernel.n, kernel.lambda, trials, seed)
            };
            finish(cmd_verify(&cfg)?, &common)
        }
        Command::Reduce { input, lambda, constant_c, degree, report, format, out } => {
            let a = rayset_from_json(&fs::read_to_string(&input)?)?;
            let (o, reduced) = cmd_reduce(&a, lambda, constant_c, degree, format)?;
            fs::write(&out, reduced)?;
            emit(&o.text, report.as_ref())?;
            Ok(o.passed)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::from(EXIT_PASS as u8),
        Ok(false) => ExitCode::from(EXIT_FAIL as u8),
        Err(e) => {
            eprintln!("rieszstab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
