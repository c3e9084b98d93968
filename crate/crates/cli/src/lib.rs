//! Batch driver for TETRIS experiments: configuration, subcommands and
//! CSV outputs.

pub mod commands;
pub mod config;
pub mod experiment;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use commands::Output;
use config::ExperimentConfig;
use experiment::{model_options, Experiment};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "tetris", version, about = "Randomized adiabatic state preparation experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Experiment configuration (TOML).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Overrides the configured output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// FCIDUMP to a Pauli-sum file and metadata.
    Ingest {
        /// FCIDUMP file; defaults to the one named in the config.
        input: Option<PathBuf>,
        #[arg(long)]
        no_reduce: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Optimal gate angle, search costs, scaling and comparison tables.
    Plan(Common),
    /// Exact and sampled ASP error against total time.
    AspSweep(Common),
    /// Exact, Trotter and sampled ASP energies.
    TrotterCompare(Common),
    /// ρ(E) scan with raw and parity-filtered amplitudes.
    RhoScan(Common),
    /// Ground-energy estimator run.
    Measure(Common),
    /// Single-shot variance at τ = n/(Tμ_I).
    VarianceStudy(Common),
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Ingest { common, .. } => common,
            Command::Plan(c)
            | Command::AspSweep(c)
            | Command::TrotterCompare(c)
            | Command::RhoScan(c)
            | Command::Measure(c)
            | Command::VarianceStudy(c) => c,
        }
    }
}

fn load(common: &Common) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => toml::from_str("").map_err(|e| CliError::Config(e.to_string()))?,
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(o) = &common.out {
        cfg.output = o.clone();
    }
    Ok(cfg)
}

fn need_config(common: &Common) -> Result<(), CliError> {
    if common.config.is_none() {
        return Err(CliError::Config("--config is required".into()));
    }
    Ok(())
}

/// Run one subcommand; returns the text printed on success.
pub fn run(cli: Cli) -> Result<String, CliError> {
    let common = cli.command.common().clone();
    if let Some(n) = common.threads {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let cfg = load(&common)?;
    let out = Output::new(cfg.output.clone());
    match cli.command {
        Command::Ingest { input, no_reduce, .. } => {
            let mut h = cfg.hamiltonian.clone();
            if no_reduce {
                h.reduce = false;
            }
            let input = input
                .or(h.fcidump.clone())
                .ok_or_else(|| CliError::Config("no FCIDUMP given".into()))?;
            let r = commands::ingest(&input, model_options(&h, &cfg.circuit.layout)?, &out)?;
            Ok(r.metadata.to_text())
        }
        Command::Plan(_) => {
            let exp = commands::optional_experiment(&cfg)?;
            if let Some(e) = &exp {
                commands::write_resolved(e, &out)?;
            } else {
                out.write("config.resolved.toml", &cfg.to_toml()?)?;
            }
            let r = commands::plan(&cfg, exp.as_ref(), &out)?;
            Ok(r.report.to_text())
        }
        Command::AspSweep(_) => {
            need_config(&common)?;
            let exp = Experiment::new(cfg)?;
            commands::write_resolved(&exp, &out)?;
            let r = commands::asp_sweep(&exp, &out)?;
            Ok(r.t_min.iter().map(|(p, t)| format!("T_min[{p}] = {}\n", t.map_or("none".into(), |v| v.to_string()))).collect())
        }
        Command::TrotterCompare(_) => {
            need_config(&common)?;
            let exp = Experiment::new(cfg)?;
            commands::write_resolved(&exp, &out)?;
            let rows = commands::trotter_compare(&exp, &out)?;
            Ok(format!("{} times written to {}\n", rows.len(), out.dir.display()))
        }
        Command::RhoScan(_) => {
            need_config(&common)?;
            let exp = Experiment::new(cfg)?;
            commands::write_resolved(&exp, &out)?;
            let r = commands::rho_scan(&exp, &out)?;
            Ok(format!(
                "filtered: q = {:.4} ± {:.4}, δ₀ = {:.3e} ± {:.1e}\nraw:      q = {:.4} ± {:.4}, δ₀ = {:.3e} ± {:.1e}\ntwo-qubit gates per circuit: {:.1}\n",
                r.filtered_fit.damping,
                r.filtered_fit.damping_error,
                r.filtered_fit.offset,
                r.filtered_fit.offset_error,
                r.raw_fit.damping,
                r.raw_fit.damping_error,
                r.raw_fit.offset,
                r.raw_fit.offset_error,
                r.mean_two_qubit_gates
            ))
        }
        Command::Measure(_) => {
            need_config(&common)?;
            let exp = Experiment::new(cfg)?;
            commands::write_resolved(&exp, &out)?;
            commands::measure(&exp, &out)?;
            std::fs::read_to_string(out.dir.join("summary.txt")).map_err(|e| CliError::Io(e.to_string()))
        }
        Command::VarianceStudy(_) => {
            need_config(&common)?;
            let exp = Experiment::new(cfg)?;
            commands::write_resolved(&exp, &out)?;
            let rows = commands::variance_study(&exp, &out)?;
            Ok(rows
                .iter()
                .map(|r| format!("n = {} T = {}: Var = {:.3} (1/λ² = {:.3})\n", r.n, r.total_time, r.variance, r.bound))
                .collect())
        }
    }
}
