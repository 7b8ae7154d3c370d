//! `detproc CONFIG.json [--out DIR] [--seed N]`
//!
//! Runs one experiment and writes its CSV files plus `manifest.json` into the
//! output directory. The manifest is written last, also on failure.

mod config;
mod experiments;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime};

use clap::Parser;
use detproc::Error;
use serde::Serialize;
use serde_json::Value;

use config::ExperimentConfig;

#[derive(Parser, Debug)]
#[command(name = "detproc", version, about = "Determinantal point process experiments")]
struct Args {
    /// JSON experiment configuration.
    config: PathBuf,
    /// Output directory, overrides out_dir.
    #[arg(long)]
    out: Option<PathBuf>,
    /// RNG seed, overrides seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Serialize)]
struct Failure {
    kind: &'static str,
    message: String,
    exit_code: u8,
}

#[derive(Serialize)]
struct Manifest {
    config: Value,
    version: &'static str,
    started: String,
    elapsed_s: f64,
    status: &'static str,
    failures: Vec<Failure>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 2,
        Error::Precondition(_) | Error::Validity(_) | Error::Gap(_) | Error::Domain(_) => 3,
        Error::Numerical { .. } | Error::WindowTooSmall { .. } | Error::Size(_) => 4,
    }
}

fn kind(e: &Error) -> &'static str {
    match e {
        Error::Config(_) => "config",
        Error::Precondition(_) => "precondition",
        Error::Validity(_) => "validity",
        Error::Gap(_) => "gap",
        Error::Domain(_) => "domain",
        Error::Numerical { .. } => "numerical",
        Error::WindowTooSmall { .. } => "window_too_small",
        Error::Size(_) => "size",
    }
}

fn write_manifest(dir: &Path, config: Value, started: SystemTime, clock: Instant, err: Option<&Error>) {
    let manifest = Manifest {
        config,
        version: env!("CARGO_PKG_VERSION"),
        started: humantime::format_rfc3339_seconds(started).to_string(),
        elapsed_s: clock.elapsed().as_secs_f64(),
        status: if err.is_some() { "failed" } else { "ok" },
        failures: err
            .map(|e| vec![Failure { kind: kind(e), message: e.to_string(), exit_code: exit_code(e) }])
            .unwrap_or_default(),
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    if let Err(e) = std::fs::create_dir_all(dir).and_then(|_| std::fs::write(dir.join("manifest.json"), text + "\n")) {
        eprintln!("detproc: cannot write manifest: {e}");
    }
}

/// Where to put a manifest when the config itself is rejected.
fn fallback_dir(args: &Args, text: &str) -> Option<(PathBuf, Value)> {
    let raw: Value = serde_json::from_str(text).unwrap_or(Value::Null);
    let dir = args
        .out
        .clone()
        .or_else(|| raw.get("out_dir").and_then(Value::as_str).map(PathBuf::from))?;
    Some((dir, raw))
}

fn main() -> ExitCode {
    let args = Args::parse();
    let started = SystemTime::now();
    let clock = Instant::now();
    let fail = |e: &Error| {
        eprintln!("detproc: {e}");
        ExitCode::from(exit_code(e))
    };
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => return fail(&Error::Config(format!("cannot read {}: {e}", args.config.display()))),
    };
    let cfg = match ExperimentConfig::parse(&text, args.out.clone(), args.seed) {
        Ok(c) => c,
        Err(e) => {
            if let Some((dir, raw)) = fallback_dir(&args, &text) {
                write_manifest(&dir, raw, started, clock, Some(&e));
            }
            return fail(&e);
        }
    };
    let result = std::fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| Error::Config(format!("cannot create out_dir {}: {e}", cfg.out_dir.display())))
        .and_then(|_| experiments::run(&cfg));
    write_manifest(&cfg.out_dir, cfg.raw.clone(), started, clock, result.as_ref().err());
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
