use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_rational::Rational64;

use quasilab_cli::config::{parse_config_for, parse_rational, Command};
use quasilab_cli::run::{dispatch, exponents_text, output_dir};
use quasilab_cli::verify::{run_verify, DEFAULT_SEED};
use quasilab_cli::CliError;

#[derive(Parser)]
#[command(name = "quasilab", version, about = "Porous-medium, quasi-solution and compressible Navier-Stokes laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print similarity and decay exponents.
    Exponents {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_parser = rational)]
        alpha: Option<Rational64>,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long, value_parser = rational)]
        theta: Option<Rational64>,
        #[arg(long, value_parser = rational)]
        gamma: Option<Rational64>,
    },
    /// Porous-medium / fast-diffusion run.
    Pme(RunArgs),
    /// Compressible Navier-Stokes run.
    Cns(RunArgs),
    /// Vanishing-pressure sweep over `pressure.eps_list`.
    Sweep(RunArgs),
    /// Seeded invariant suites; exit status 1 when a check fails.
    Verify {
        #[arg(long)]
        suite: Option<String>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Also write the report to DIR/report.txt.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn rational(s: &str) -> Result<Rational64, String> {
    parse_rational(s).ok_or_else(|| format!("`{s}` is not an exact number"))
}

fn read_config(path: &PathBuf, command: Command) -> Result<quasilab_cli::RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io { path: path.clone(), source: e })?;
    parse_config_for(&text, Some(command))
}

fn solver(args: RunArgs, command: Command) -> Result<ExitCode, CliError> {
    let cfg = read_config(&args.config, command)?;
    let dir = output_dir(args.out, &cfg)?;
    dispatch(&cfg, &dir)?;
    println!("{command}: wrote {}", dir.display());
    Ok(ExitCode::SUCCESS)
}

fn execute(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Cmd::Exponents { config, alpha, dim, theta, gamma } => {
            let base = match &config {
                Some(p) => read_config(p, Command::Exponents)?,
                None => parse_config_for("", Some(Command::Exponents))?,
            };
            let alpha = alpha.unwrap_or(base.law.alpha_exact);
            let mut spec = base.exponents.clone();
            spec.theta = theta.or(spec.theta);
            spec.gamma = gamma.or(spec.gamma);
            print!("{}", exponents_text(alpha, dim.unwrap_or(base.law.dim), spec.pair(alpha))?);
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Pme(a) => solver(a, Command::Pme),
        Cmd::Cns(a) => solver(a, Command::Cns),
        Cmd::Sweep(a) => solver(a, Command::Sweep),
        Cmd::Verify { suite, seed, out } => {
            let report = run_verify(suite.as_deref(), seed)?;
            let text = report.text();
            print!("{text}");
            if let Some(dir) = out {
                fs::create_dir_all(&dir).map_err(|e| CliError::Io { path: dir.clone(), source: e })?;
                let path = dir.join("report.txt");
                fs::write(&path, &text).map_err(|e| CliError::Io { path, source: e })?;
            }
            Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
