//! `cvqc`: experiment runner and split verifier/prover endpoints.
//!
//! Exit codes: 0 success, 2 bad flags or configuration, 3 I/O failure,
//! 4 transport failure while talking to an external prover.

mod commands;
mod manifest;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

use cvqc::curve::CurveMode;
use cvqc::protocol::{ProverStrategy, RoundPolicy};
use cvqc::Variant;

#[derive(Debug, Parser)]
#[command(name = "cvqc", version, about = "Classical verification of a delegated quantum computation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Energy curve over a grid of angles.
    Sweep(SweepArgs),
    /// Term-sampling verification of one instance.
    Verify(VerifyArgs),
    /// Per-basis rejection rates of test or measurement rounds.
    Rounds(RoundsArgs),
    /// Native gate counts and fidelity budgets of the delegation circuits.
    CompileReport(CompileArgs),
    /// Two-to-one function test of quantumness.
    Quantumness(QuantumnessArgs),
    /// Prover endpoint speaking the line protocol on stdio or TCP.
    Prover(ProverArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long, default_value = "p0")]
    pub variant: Variant,
    /// `start:stop:count`, endpoints included.
    #[arg(long, default_value = "0:1.5707963267948966:9")]
    pub alphas: String,
    #[arg(long, default_value_t = 2000)]
    pub shots: u64,
    #[arg(long, default_value_t = 0.05)]
    pub lambda: f64,
    #[arg(long, default_value = "delegated")]
    pub mode: CurveMode,
    #[arg(long, env = "CVQC_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value = "p0")]
    pub variant: Variant,
    /// Answer forced on the in-process prover; `auto` answers truthfully.
    #[arg(long, default_value = "auto")]
    pub claim: String,
    #[arg(long, default_value_t = 1000)]
    pub n_terms: usize,
    /// Copies per sampled term.
    #[arg(long, default_value_t = 1)]
    pub repetitions: usize,
    /// Accepted for symmetry with the other subcommands; the term-sampling
    /// protocol runs one round per copy.
    #[arg(long, default_value_t = 1)]
    pub shots: u64,
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    #[arg(long, env = "CVQC_SEED", default_value_t = 0)]
    pub seed: u64,
    /// `inproc`, `exec:COMMAND` or `tcp:HOST:PORT`.
    #[arg(long, default_value = "inproc")]
    pub prover: String,
    #[arg(long, default_value = "none")]
    pub cheat: ProverStrategy,
    #[arg(long, default_value = "auto")]
    pub round: RoundPolicy,
    /// Transcript file; the verifier-private sidecar goes next to it.
    #[arg(long)]
    pub transcript: Option<PathBuf>,
    /// Copy of every byte sent towards the prover.
    #[arg(long)]
    pub capture: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RoundsArgs {
    #[arg(long, default_value = "measure")]
    pub round: RoundPolicy,
    #[arg(long, default_value_t = 2000)]
    pub shots: u64,
    #[arg(long, default_value_t = 0.05)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    #[arg(long, default_value = "p0")]
    pub variant: Variant,
    #[arg(long, env = "CVQC_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CompileArgs {
    /// `00`, `01`, `10`, `11` or `all`.
    #[arg(long, default_value = "all")]
    pub keys: String,
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_4)]
    pub alpha: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct QuantumnessArgs {
    #[arg(long, default_value_t = 2)]
    pub m_bits: usize,
    #[arg(long, default_value_t = 10000)]
    pub trials: usize,
    /// `honest` or `classical-baseline`.
    #[arg(long, default_value = "honest")]
    pub prover: String,
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    #[arg(long, env = "CVQC_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ProverArgs {
    /// Serve TCP connections on this address instead of stdio.
    #[arg(long)]
    pub listen: Option<String>,
    /// With `--listen`, exit after the first connection.
    #[arg(long)]
    pub once: bool,
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    #[arg(long, default_value = "none")]
    pub cheat: ProverStrategy,
    #[arg(long, default_value = "auto")]
    pub claim: String,
    #[arg(long, env = "CVQC_SEED", default_value_t = 0)]
    pub seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sweep(a) => commands::sweep(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::Rounds(a) => commands::rounds(&a),
        Command::CompileReport(a) => commands::compile_report(&a),
        Command::Quantumness(a) => commands::quantumness(&a),
        Command::Prover(a) => commands::prover(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cvqc: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
