//! Command-line front end: `bethelab <verify|equations|spectrum|hamiltonian> --config run.json`.

pub mod commands;
pub mod config;
pub mod equations;

use std::fmt;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, ValueEnum};

use commands::{Format, Overrides};
use config::{parse_config, ConfigError};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Bad flags or a request the chain cannot satisfy; maps to exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Verify,
    Equations,
    Spectrum,
    Hamiltonian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Latex,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "bethelab", version, about = "Yangian spin chains: checks, Bethe equations, spectra and Hamiltonians")]
pub struct Cli {
    pub command: Command,
    /// JSON run configuration
    #[arg(short, long)]
    pub config: PathBuf,
    /// Output format for `equations`
    #[arg(long, value_enum, default_value = "latex")]
    pub format: OutFormat,
    /// Magnon numbers M^(1),...,M^(N-1), e.g. "2,1" or "1=2,2=1"
    #[arg(long)]
    pub magnons: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for the data-parallel parts
    #[arg(long)]
    pub threads: Option<usize>,
    /// Overrides the tolerance of the chosen command
    #[arg(long)]
    pub tol: Option<f64>,
    /// Write the report here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Hamiltonian: xxx, impurity, spin_s, alternating, open, zarembo or log_derivative
    #[arg(long)]
    pub which: Option<String>,
    /// Dump the Hamiltonian matrix as row-major [re, im] pairs
    #[arg(long)]
    pub matrix: Option<PathBuf>,
}

/// Accepts "2,1" or "1=2,2=1" (level=count, any order, all levels present).
pub fn parse_magnons(text: &str) -> Result<Vec<usize>, String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).filter(|p| !p.is_empty()).collect();
    if parts.is_empty() {
        return Err("empty magnon list".into());
    }
    if parts.iter().all(|p| p.contains('=')) {
        let mut out = vec![None; parts.len()];
        for p in parts {
            let (k, v) = p.split_once('=').unwrap();
            let k: usize = k.trim().parse().map_err(|_| format!("bad level in '{p}'"))?;
            let v: usize = v.trim().parse().map_err(|_| format!("bad count in '{p}'"))?;
            if k == 0 || k > out.len() || out[k - 1].is_some() {
                return Err(format!("level {k} is out of range or repeated"));
            }
            out[k - 1] = Some(v);
        }
        Ok(out.into_iter().map(Option::unwrap).collect())
    } else {
        parts.iter().map(|p| p.parse().map_err(|_| format!("bad magnon count '{p}'"))).collect()
    }
}

fn write_out(path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, format!("{text}\n")).with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn execute(cli: &Cli) -> Result<bool> {
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| UsageError(format!("cannot read {}: {e}", cli.config.display())))?;
    let cfg = parse_config(&text)?;
    let magnons = match &cli.magnons {
        Some(m) => Some(parse_magnons(m).map_err(UsageError)?),
        None => None,
    };
    if let Some(m) = &magnons {
        if m.len() + 1 != cfg.rank {
            return Err(UsageError(format!("--magnons needs {} entries, got {}", cfg.rank - 1, m.len())).into());
        }
    }
    if let Some(n) = cli.threads {
        set_threads(n)?;
    }
    let o = Overrides { magnons, seed: cli.seed, tol: cli.tol, which: cli.which.clone() };
    let out = cli.out.clone().or_else(|| cfg.options().out.map(PathBuf::from));
    let report = match cli.command {
        Command::Verify => commands::cmd_verify(&cfg, &o)?,
        Command::Equations => {
            let f = match cli.format {
                OutFormat::Latex => Format::Latex,
                OutFormat::Json => Format::Json,
            };
            commands::cmd_equations(&cfg, &o, f)?
        }
        Command::Spectrum => commands::cmd_spectrum(&cfg, &o)?,
        Command::Hamiltonian => {
            let (report, ham) = commands::cmd_hamiltonian(&cfg, &o)?;
            if let Some(p) = &cli.matrix {
                write_out(Some(p), &commands::matrix_json(&ham.matrix))?;
            }
            report
        }
    };
    write_out(out.as_ref(), &report.text)?;
    Ok(report.pass)
}

#[cfg(feature = "parallel")]
fn set_threads(n: usize) -> Result<()> {
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")
}

#[cfg(not(feature = "parallel"))]
fn set_threads(_n: usize) -> Result<()> {
    Ok(())
}

/// Runs the parsed command and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_CHECK_FAILED,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<UsageError>() || e.is::<ConfigError>() {
                EXIT_USAGE
            } else {
                EXIT_CHECK_FAILED
            }
        }
    }
}
