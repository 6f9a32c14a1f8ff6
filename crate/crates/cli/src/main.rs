use anyhow::{Context, Result};
use cassini_core::stab::ExponentVariant;
use cassini_stab::commands::{Command, Session};
use cassini_stab::config::{parse_str, ConfigError, Format};
use cassini_stab::CliError;
use clap::{Parser, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Cmd {
    /// Averaged potential and resonant Hamiltonian
    Model,
    /// Cassini state, quadratic part and action-angle scales
    Equilibrium,
    /// Birkhoff normal form term counts, divisors and residuals
    Normalform,
    /// T(rho0) curve and per-order table
    Stability,
    /// log10 T over a two-parameter grid
    Scan,
    /// Numerical integration from the polydisk boundary
    CheckIntegrate,
    All,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Model => Command::Model,
            Cmd::Equilibrium => Command::Equilibrium,
            Cmd::Normalform => Command::NormalForm,
            Cmd::Stability => Command::Stability,
            Cmd::Scan => Command::Scan,
            Cmd::CheckIntegrate => Command::CheckIntegrate,
            Cmd::All => Command::All,
        }
    }
}

/// Normal forms and effective stability times around Cassini states.
#[derive(Debug, Parser)]
#[command(name = "cassini-stab", version)]
struct Cli {
    #[arg(value_enum)]
    command: Cmd,
    /// Run configuration (`key = value` lines)
    #[arg(long, env = "CASSINI_STAB_CONFIG")]
    config: PathBuf,
    /// Normalization order r
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    rho0: Option<f64>,
    /// Scan grid size as NX,NY
    #[arg(long, value_parser = parse_grid)]
    grid: Option<(usize, usize)>,
    #[arg(long, value_parser = ["csv", "json", "gnuplot"])]
    format: Option<String>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for scans and series kernels
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_parser = ["printed", "homogeneous"])]
    exponent_variant: Option<String>,
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected NX,NY, got `{s}`"))?;
    let n = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("`{v}`: {e}"));
    Ok((n(a)?, n(b)?))
}

fn set_threads(n: usize) -> Result<()> {
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("setting up the thread pool")?;
    #[cfg(not(feature = "parallel"))]
    if n > 1 {
        eprintln!("warning: built without the `parallel` feature; --threads {n} has no effect");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        set_threads(n)?;
    }
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|source| CliError::from(ConfigError::Io { path: cli.config.clone(), source }))?;
    let parsed = parse_str(&text).map_err(CliError::from)?;
    for w in &parsed.warnings {
        eprintln!("warning: {}: {w}", cli.config.display());
    }
    let mut cfg = parsed.config;
    if let Some(r) = cli.order {
        cfg.order = r;
        cfg.curve.orders.retain(|&m| m <= r);
    }
    if let Some(rho0) = cli.rho0 {
        cfg.rho0 = rho0;
    }
    if let Some((nx, ny)) = cli.grid {
        cfg.scan.x.n = nx;
        cfg.scan.y.n = ny;
    }
    if let Some(f) = &cli.format {
        cfg.format = f.parse::<Format>().map_err(anyhow::Error::msg)?;
    }
    if let Some(v) = &cli.exponent_variant {
        cfg.variant = v.parse::<ExponentVariant>().map_err(anyhow::Error::msg)?;
    }
    if let Some(d) = cli.out {
        cfg.directory = d;
    }
    cfg.validate().map_err(CliError::from)?;

    let dir = cfg.directory.clone();
    let command = Command::from(cli.command);
    let mut session = Session::new(cfg, command, text.as_bytes());
    let artifacts = session.execute(command)?;
    std::fs::create_dir_all(&dir).map_err(|source| CliError::Output { path: dir.clone(), source })?;
    for a in &artifacts {
        let path = a.write_to(&dir).map_err(|source| CliError::Output { path: dir.join(&a.name), source })?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<CliError>().map_or(1, CliError::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
