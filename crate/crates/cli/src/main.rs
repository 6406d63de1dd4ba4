//! Experiment harness: `horoflow <subcommand> --config <path> [--out <dir>]
//! [--threads N]`. Exit codes: 0 success, 2 validation failure, 3 numeric
//! guard failure.

mod commands;
mod config;
mod output;

use commands::CmdError;
use std::path::PathBuf;
use std::process::ExitCode;

const USAGE: &str = "usage: horoflow <subcommand> --config <path> [--out <dir>] [--threads N]

subcommands:
  validate-geometry   octagon relation, side pairings, commutation, det drift
  tau-tables          renormalization times tau(s, t) and normalizing times
  winding-orbit       geodesic winding traces and word-length growth
  estimate-sigma      Monte Carlo covariance of the winding cycle
  clt-test            whitened KS diagnostics against the standard normal
  ulam-spectrum       twisted-transfer-operator eigenvalue curve
  theorem-a           horocycle integral asymptotics with oscillating factor
  theorem-b           equidistribution of geodesic-pushed horocycle arcs
  theorem-c           compact-case power deviation fit
  reconstruct-check   omega-grid reconstruction exactness

environment: HOROFLOW_THREADS overrides the worker count.";

struct Args {
    subcommand: String,
    config: PathBuf,
    out: PathBuf,
    threads: Option<usize>,
}

fn parse_args() -> Result<Args, String> {
    let mut argv = std::env::args().skip(1);
    let subcommand = argv.next().ok_or("missing subcommand")?;
    if subcommand == "--help" || subcommand == "-h" || subcommand == "help" {
        return Err(String::new());
    }
    let mut config = None;
    let mut out = PathBuf::from("out");
    let mut threads = None;
    while let Some(flag) = argv.next() {
        match flag.as_str() {
            "--config" | "-c" => {
                config = Some(PathBuf::from(argv.next().ok_or("--config needs a path")?))
            }
            "--out" | "-o" => out = PathBuf::from(argv.next().ok_or("--out needs a dir")?),
            "--threads" => {
                threads = Some(
                    argv.next()
                        .ok_or("--threads needs a count")?
                        .parse()
                        .map_err(|_| "--threads needs an integer".to_string())?,
                )
            }
            other => return Err(format!("unknown flag `{other}`")),
        }
    }
    let config = config.ok_or("missing --config <path>")?;
    Ok(Args { subcommand, config, out, threads })
}

fn main() -> ExitCode {
    let args = match parse_args() {
        Ok(a) => a,
        Err(msg) => {
            if !msg.is_empty() {
                eprintln!("error: {msg}\n");
            }
            eprintln!("{USAGE}");
            return ExitCode::from(2);
        }
    };

    let threads = args
        .threads
        .or_else(|| {
            std::env::var("HOROFLOW_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(0);
    if threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    }

    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read config {}: {e}", args.config.display());
            return ExitCode::from(2);
        }
    };
    let cfg = match config::Config::parse(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };

    match commands::run(&args.subcommand, &cfg, &args.out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CmdError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CmdError::Numeric(msg)) => {
            eprintln!("error: numeric guard: {msg}");
            ExitCode::from(3)
        }
    }
}
