use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use spherelab::experiment::{exit_code, run, Command, ExperimentConfig};

#[derive(Parser)]
#[command(name = "spherelab", version, about = "Norm experiments for zonal operators on the round sphere")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Lower and upper bounds for the degree-k spectral projector.
    ProjScaling(Common),
    /// Lower and upper bounds for the truncated resolvent.
    ResolventScaling(Common),
    /// Dyadic piece norms and the restricted weak-type check.
    DyadicCertify(Common),
    /// Observed constants in the zonal kernel size bounds.
    Envelope(Common),
    /// Resolvent multiplier closed form against its time integral.
    MultiplierCheck(Common),
    /// Marked points of the exponent diagram.
    ExponentMap(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    sigma: f64,
    /// Defaults to the midpoint of the admissible interval in 1/r.
    #[arg(long)]
    r: Option<f64>,
    #[arg(long, value_delimiter = ',', default_value = "4,8,16,32")]
    k: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "8,16,32")]
    lambda: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    /// Defaults to 4 * max_degree + 16 per run.
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// CSV path; the JSON summary goes next to it with a .json extension.
    #[arg(long)]
    out: PathBuf,
}

fn config(command: Command, c: &Common) -> ExperimentConfig {
    ExperimentConfig {
        command,
        n: c.n,
        sigma: c.sigma,
        r: c.r,
        k: c.k.clone(),
        lambda: c.lambda.clone(),
        mu: c.mu,
        grid_points: c.grid_points,
        restarts: c.restarts,
        seed: c.seed,
    }
}

fn write(path: &Path, text: &str) -> Result<(), String> {
    std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = match &cli.command {
        Cmd::ProjScaling(c) => (Command::ProjScaling, c),
        Cmd::ResolventScaling(c) => (Command::ResolventScaling, c),
        Cmd::DyadicCertify(c) => (Command::DyadicCertify, c),
        Cmd::Envelope(c) => (Command::Envelope, c),
        Cmd::MultiplierCheck(c) => (Command::MultiplierCheck, c),
        Cmd::ExponentMap(c) => (Command::ExponentMap, c),
    };
    let cfg = config(command, common);
    let start = Instant::now();
    let report = match run(&cfg) {
        Ok(report) => report,
        Err(err) => {
            eprintln!("spherelab {}: {err}", command.name());
            return ExitCode::from(exit_code(&err) as u8);
        }
    };
    let summary = serde_json::json!({
        "config": report.config,
        "rows": report.rows,
        "slope": report.slope,
        "intercept": report.intercept,
        "residual": report.residual,
        "wall_seconds": start.elapsed().as_secs_f64(),
        "version": env!("CARGO_PKG_VERSION"),
    });
    let json = match serde_json::to_string_pretty(&summary) {
        Ok(json) => json,
        Err(err) => {
            eprintln!("spherelab: cannot serialize summary: {err}");
            return ExitCode::from(3);
        }
    };
    let result = write(&common.out, &report.csv).and_then(|_| write(&common.out.with_extension("json"), &json));
    if let Err(msg) = result {
        eprintln!("spherelab: {msg}");
        return ExitCode::from(3);
    }
    if let Some(slope) = report.slope {
        println!("{}: slope {slope:.4}", command.name());
    }
    ExitCode::SUCCESS
}
