//! `scissorsim`: run quantum-scissors and qudit-teleportation experiments
//! from the command line.

mod input;
mod render;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rayon::prelude::*;
use scissorsim_core::verify::{self, VerifyOptions};
use scissorsim_core::{run_scissors, teleport_qudit, teleport_qudit_to_basis, QuditVector, Teleporter};
use serde::Serialize;

use input::{check_eta, eta_grid, normalize, resolve_gammas, ComplexList, GammaSource};
use render::{Format, SweepRow, VerifySummary};

const THREADS_VAR: &str = "SCISSORSIM_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "scissorsim",
    version,
    about = "Quantum scissors and photonic qudit teleportation simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Output format. Defaults to csv for sweep-eta, table for verify and json otherwise.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct QuditArgs {
    /// Qudit dimension (number of paths).
    #[arg(short = 'd', long = "dim", value_parser = clap::value_parser!(u32).range(1..=8))]
    d: u32,
    /// Comma-separated amplitudes (`re` or `re+imi`), or `random:SEED`.
    #[arg(long)]
    gammas: GammaSource,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Single quantum scissors on a photon-number superposition.
    Scissors {
        /// Comma-separated amplitudes α_0, α_1, ... of |0⟩, |1⟩, ...
        #[arg(long)]
        alphas: ComplexList,
        /// Detector efficiency.
        #[arg(long, default_value_t = 1.0)]
        eta: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Teleport a path-encoded qudit with d scissors.
    Teleport {
        #[command(flatten)]
        qudit: QuditArgs,
        #[arg(long, default_value_t = 1.0)]
        eta: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Teleport into ancilla photons of another transverse species.
    TeleportBasis {
        #[command(flatten)]
        qudit: QuditArgs,
        #[arg(long, default_value_t = 1.0)]
        eta: f64,
        /// Species label of the ancilla on path i; give once per path.
        /// Defaults to `HG:i,0`.
        #[arg(long = "target-species")]
        target_species: Vec<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Tabulate success and fidelity over a grid of detector efficiencies.
    SweepEta {
        #[command(flatten)]
        qudit: QuditArgs,
        /// Grid as FROM,TO,STEPS with both ends included.
        #[arg(long = "eta-range")]
        eta_range: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run every end-to-end check and report pass/fail.
    Verify {
        #[arg(long, default_value_t = 4)]
        d_max: usize,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        #[arg(long, hide = true)]
        inject_bs_sign_error: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Clone, Serialize)]
struct EtaRange {
    from: f64,
    to: f64,
    steps: usize,
}

#[derive(Debug, Clone, Serialize)]
struct ExperimentConfig {
    command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gammas: Option<Vec<Complex64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alphas: Option<Vec<Complex64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eta_range: Option<EtaRange>,
    #[serde(skip_serializing_if = "Option::is_none")]
    target_species: Option<Vec<String>>,
    output_format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trials: Option<usize>,
}

impl ExperimentConfig {
    fn new(command: &'static str, output_format: Format) -> Self {
        Self {
            command,
            d: None,
            gammas: None,
            alphas: None,
            eta: None,
            eta_range: None,
            target_species: None,
            output_format,
            seed: None,
            trials: None,
        }
    }

    fn with_qudit(mut self, q: &QuditVector, source: &GammaSource) -> Self {
        self.d = Some(q.dim());
        self.gammas = Some(q.gammas().to_vec());
        if let GammaSource::Random(seed) = source {
            self.seed = Some(*seed);
        }
        self
    }
}

/// Bad input. Reported with exit code 2, like clap's own usage errors.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage<T>(r: std::result::Result<T, String>) -> Result<T> {
    r.map_err(|e| UsageError(e).into())
}

fn warn(warning: Option<String>) {
    if let Some(w) = warning {
        eprintln!("warning: {w}");
    }
}

fn qudit(args: &QuditArgs) -> Result<QuditVector> {
    let (q, warning) = usage(resolve_gammas(&args.gammas, args.d as usize))?;
    warn(warning);
    Ok(q)
}

fn emit(output: &OutputArgs, text: &str) -> Result<()> {
    match &output.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var(THREADS_VAR) {
        let n: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| UsageError(format!("{THREADS_VAR} must be a positive integer, got {raw:?}")))?;
        builder = builder.num_threads(n);
    }
    Ok(builder.build()?)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Scissors { alphas, eta, output } => {
            let format = output.format.unwrap_or(Format::Json);
            let eta = usage(check_eta(eta))?;
            let (alphas, warning) = usage(normalize("alphas", &alphas.0))?;
            warn(warning);
            let report = run_scissors(&alphas, eta)?;
            let mut config = ExperimentConfig::new("scissors", format);
            config.alphas = Some(alphas);
            config.eta = Some(eta);
            let text = match format {
                Format::Json => render::json(&config, &report)?,
                Format::Csv => render::scissors_csv(&report)?,
                Format::Table => render::scissors_table(&report),
            };
            emit(&output, &text)?;
        }
        Command::Teleport {
            qudit: args,
            eta,
            output,
        } => {
            let format = output.format.unwrap_or(Format::Json);
            let eta = usage(check_eta(eta))?;
            let q = qudit(&args)?;
            let report = teleport_qudit(&q, q.dim(), eta)?;
            let mut config = ExperimentConfig::new("teleport", format).with_qudit(&q, &args.gammas);
            config.eta = Some(eta);
            let text = match format {
                Format::Json => render::json(&config, &report)?,
                Format::Csv => render::teleport_csv(&report)?,
                Format::Table => render::teleport_table(&report),
            };
            emit(&output, &text)?;
        }
        Command::TeleportBasis {
            qudit: args,
            eta,
            target_species,
            output,
        } => {
            let format = output.format.unwrap_or(Format::Json);
            let eta = usage(check_eta(eta))?;
            let q = qudit(&args)?;
            let d = q.dim();
            let species = if target_species.is_empty() {
                (0..d).map(|i| format!("HG:{i},0")).collect()
            } else if target_species.len() == d {
                target_species
            } else {
                return Err(UsageError(format!(
                    "expected {d} --target-species values, got {}",
                    target_species.len()
                ))
                .into());
            };
            let report = teleport_qudit_to_basis(&q, d, eta, &species)?;
            let mut config = ExperimentConfig::new("teleport-basis", format).with_qudit(&q, &args.gammas);
            config.eta = Some(eta);
            config.target_species = Some(species);
            let text = match format {
                Format::Json => render::json(&config, &report)?,
                Format::Csv => render::teleport_csv(&report)?,
                Format::Table => render::teleport_table(&report),
            };
            emit(&output, &text)?;
        }
        Command::SweepEta {
            qudit: args,
            eta_range,
            output,
        } => {
            let format = output.format.unwrap_or(Format::Csv);
            let grid = usage(eta_grid(&eta_range))?;
            let q = qudit(&args)?;
            let tele = Teleporter::new(q.dim())?;
            let rows = thread_pool()?.install(|| {
                grid.par_iter()
                    .map(|&eta| tele.run(&q, eta).map(|r| SweepRow::from(&r)))
                    .collect::<std::result::Result<Vec<_>, _>>()
            })?;
            let mut config = ExperimentConfig::new("sweep-eta", format).with_qudit(&q, &args.gammas);
            config.eta_range = Some(EtaRange {
                from: grid[0],
                to: grid[grid.len() - 1],
                steps: grid.len(),
            });
            let text = match format {
                Format::Json => render::json(&config, &rows)?,
                Format::Csv => render::sweep_csv(&rows)?,
                Format::Table => render::sweep_table(q.dim(), &rows),
            };
            emit(&output, &text)?;
        }
        Command::Verify {
            d_max,
            trials,
            seed,
            inject_bs_sign_error,
            output,
        } => {
            let format = output.format.unwrap_or(Format::Table);
            if d_max == 0 || trials == 0 {
                return Err(UsageError("--d-max and --trials must be positive".into()).into());
            }
            let opts = VerifyOptions {
                d_max,
                trials,
                seed,
                flip_bs2_sign: inject_bs_sign_error,
            };
            let summary = VerifySummary::from(&verify::run_all(&opts));
            let mut config = ExperimentConfig::new("verify", format);
            config.d = Some(d_max);
            config.seed = Some(seed);
            config.trials = Some(trials);
            let text = match format {
                Format::Json => render::json(&config, &summary)?,
                Format::Csv => render::verify_csv(&summary)?,
                Format::Table => render::verify_table(&summary),
            };
            emit(&output, &text)?;
            if !summary.passed {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<UsageError>() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
