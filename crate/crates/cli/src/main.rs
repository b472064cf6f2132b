//! `cqcap`: capacity of classical-quantum channels from JSON channel files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use cqcap::channel_file::{channel_to_json, parse_channel};
use cqcap::oracle::{grid_capacity, GridSpec, MAX_GRID_ALPHABET};
use cqcap::{
    constrained_capacity, independence_check, random_channel, random_costs, unconstrained_capacity,
    CapacityOptions, CapacityResult, CqChannel, EnsembleKind, Error,
};
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

const EXIT_INPUT: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_ORACLE: u8 = 4;

/// Grid value may exceed the certified upper bound by at most this (bits).
const ORACLE_UPPER_TOL: f64 = 1e-9;

#[derive(Parser)]
#[command(
    name = "cqcap",
    version,
    about = "Classical capacity of classical-quantum channels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the capacity and print a JSON report.
    Capacity {
        #[arg(long)]
        channel: PathBuf,
        /// Expected-cost budget; omit for the unconstrained capacity.
        #[arg(long, allow_negative_numbers = true)]
        cost_limit: Option<f64>,
        /// Target accuracy in bits.
        #[arg(long, default_value_t = 1e-6, allow_negative_numbers = true)]
        eps: f64,
        #[arg(long, default_value_t = 1_000_000)]
        max_iter: usize,
        /// Write the per-iteration trace of the final solve as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Check a channel file and cross-check the solver against a grid search.
    Validate {
        #[arg(long)]
        channel: PathBuf,
        /// Grid resolution; defaults depend on the alphabet size.
        #[arg(long)]
        oracle_grid: Option<usize>,
    },
    /// Write a random channel file.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        costs: Option<Costs>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Pure,
    Mixed,
    Diagonal,
}

impl From<Kind> for EnsembleKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Pure => EnsembleKind::Pure,
            Kind::Mixed => EnsembleKind::Mixed,
            Kind::Diagonal => EnsembleKind::Diagonal,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Costs {
    /// Every letter costs 1.
    Uniform,
    /// Costs drawn from `[0, 1)` with the same seed.
    Random,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

impl Failure {
    fn input(kind: &'static str, message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            kind,
            message: message.into(),
        }
    }

    fn from_input(e: Error) -> Self {
        Self::input(e.kind(), e.to_string())
    }

    /// Bad parameters are the caller's fault; anything else came from the solve.
    fn from_solver(e: Error) -> Self {
        let code = match e {
            Error::BadParams(_) => EXIT_INPUT,
            _ => EXIT_SOLVER,
        };
        Self {
            code,
            kind: e.kind(),
            message: e.to_string(),
        }
    }
}

#[derive(Serialize)]
struct InputDigest {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct ConfigEcho {
    cost_limit: Option<f64>,
    eps_bits: f64,
    max_iter: usize,
}

#[derive(Serialize)]
struct ResultFields {
    capacity_bits: f64,
    input_distribution: Vec<f64>,
    lambda_bits_per_cost: f64,
    expected_cost: f64,
    constraint_active: bool,
    gap_certificate_bits: [f64; 2],
    outer_iterations: usize,
    inner_iterations: usize,
    termination: &'static str,
}

#[derive(Serialize)]
struct RunReport {
    input: InputDigest,
    config: ConfigEcho,
    n: usize,
    m: usize,
    result: ResultFields,
    timing_seconds: f64,
    trace_path: Option<String>,
}

fn read_channel(path: &Path) -> Result<(CqChannel, InputDigest), Failure> {
    let bytes =
        fs::read(path).map_err(|e| Failure::input("Io", format!("{}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|e| Failure::input("Parse", format!("{}: {e}", path.display())))?;
    let ch = parse_channel(text).map_err(Failure::from_input)?;
    let digest = InputDigest {
        path: path.display().to_string(),
        sha256: hex::encode(Sha256::digest(&bytes)),
    };
    Ok((ch, digest))
}

fn trace_csv(res: &CapacityResult) -> String {
    let mut out = String::from("t,f_bits,lower_bits,upper_bits,expected_cost,l1_step\n");
    for r in &res.trace.records {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.t, r.f_bits, r.lower_bits, r.upper_bits, r.expected_cost, r.l1_step
        )
        .expect("writing to a String");
    }
    out
}

fn capacity(
    channel: &Path,
    cost_limit: Option<f64>,
    eps: f64,
    max_iter: usize,
    trace: Option<&Path>,
) -> Result<(), Failure> {
    let (ch, input) = read_channel(channel)?;
    let options = CapacityOptions {
        epsilon: eps,
        max_iter,
        trace_every: 1,
    };
    if max_iter == 0 {
        return Err(Failure::input("BadParams", "max-iter must be positive"));
    }
    let start = Instant::now();
    let res = match cost_limit {
        Some(limit) => constrained_capacity(&ch, limit, &options),
        None => unconstrained_capacity(&ch, &options),
    }
    .map_err(Failure::from_solver)?;
    let timing_seconds = start.elapsed().as_secs_f64();

    if let Some(path) = trace {
        fs::write(path, trace_csv(&res))
            .map_err(|e| Failure::input("Io", format!("{}: {e}", path.display())))?;
    }

    let report = RunReport {
        input,
        config: ConfigEcho {
            cost_limit,
            eps_bits: eps,
            max_iter,
        },
        n: ch.n(),
        m: ch.m(),
        result: ResultFields {
            capacity_bits: res.capacity,
            input_distribution: res.p.probs().to_vec(),
            lambda_bits_per_cost: res.lambda,
            expected_cost: res.expected_cost,
            constraint_active: res.constraint_active,
            gap_certificate_bits: res.gap_certificate,
            outer_iterations: res.outer_iterations,
            inner_iterations: res.inner_iterations,
            termination: res.termination.as_str(),
        },
        timing_seconds,
        trace_path: trace.map(|p| p.display().to_string()),
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("report serializes")
    );
    Ok(())
}

fn validate(channel: &Path, oracle_grid: Option<usize>) -> Result<(), Failure> {
    let (ch, input) = read_channel(channel)?;
    let independence = independence_check(&ch);
    let mut report = json!({
        "input": input,
        "n": ch.n(),
        "m": ch.m(),
        "states_valid": true,
        "independent": independence.independent,
        "min_gram_eigenvalue": independence.min_gram_eigenvalue,
        "oracle": null,
    });

    let mut disagreement = None;
    if ch.n() <= MAX_GRID_ALPHABET {
        let spec = oracle_grid.map_or_else(|| GridSpec::default_for(ch.n()), GridSpec::new);
        let solved = unconstrained_capacity(&ch, &CapacityOptions::with_epsilon(1e-9))
            .map_err(Failure::from_solver)?;
        let grid = grid_capacity(&ch, &spec, None).map_err(Failure::from_solver)?;
        let [lower, upper] = solved.gap_certificate;
        let agrees = grid.value <= upper + ORACLE_UPPER_TOL && grid.value >= lower - grid.slack;
        report["oracle"] = json!({
            "grid_resolution": spec.resolution,
            "solver_bits": solved.capacity,
            "solver_interval_bits": [lower, upper],
            "grid_bits": grid.value,
            "grid_slack_bits": grid.slack,
            "gap_bits": solved.capacity - grid.value,
            "agrees": agrees,
        });
        if !agrees {
            disagreement = Some(format!(
                "grid value {} outside [{}, {}] widened by slack {}",
                grid.value, lower, upper, grid.slack
            ));
        }
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("report serializes")
    );
    match disagreement {
        None => Ok(()),
        Some(message) => Err(Failure {
            code: EXIT_ORACLE,
            kind: "OracleDisagreement",
            message,
        }),
    }
}

fn generate(
    n: usize,
    m: usize,
    seed: u64,
    kind: Kind,
    out: &Path,
    costs: Option<Costs>,
) -> Result<(), Failure> {
    let ch = random_channel(n, m, seed, kind.into()).map_err(Failure::from_input)?;
    let ch = match costs {
        None => Ok(ch),
        Some(Costs::Uniform) => ch.with_costs(vec![1.0; n]),
        Some(Costs::Random) => ch.with_costs(random_costs(n, seed)),
    }
    .map_err(Failure::from_input)?;
    let mut text = channel_to_json(&ch, costs.is_some());
    text.push('\n');
    fs::write(out, text).map_err(|e| Failure::input("Io", format!("{}: {e}", out.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Capacity {
            channel,
            cost_limit,
            eps,
            max_iter,
            trace,
        } => capacity(channel, *cost_limit, *eps, *max_iter, trace.as_deref()),
        Command::Validate {
            channel,
            oracle_grid,
        } => validate(channel, *oracle_grid),
        Command::Gen {
            n,
            m,
            seed,
            kind,
            out,
            costs,
        } => generate(*n, *m, *seed, *kind, out, *costs),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!(
                "{}",
                json!({ "error": f.kind, "message": f.message, "exit_code": f.code })
            );
            ExitCode::from(f.code)
        }
    }
}
