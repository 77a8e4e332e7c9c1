use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nogaps_cli::certify::certify_lemmas;
use nogaps_cli::config::ExperimentConfig;
use nogaps_cli::error::HarnessError;
use nogaps_cli::experiment::run_experiment;
use nogaps_cli::export::export;
use nogaps_cli::plot::write_plots;
use nogaps_cli::summary::Summary;

/// Monte Carlo harness for no-gaps delocalization statistics of random
/// matrices.
#[derive(Parser)]
#[command(name = "nogaps", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON config file.
    Run(RunArgs),
    /// Run the deterministic lemma checkers on random instances.
    Certify(CertifyArgs),
    /// Render SVG plots from a JSON summary.
    Plot(PlotArgs),
    /// Bracket the least common denominator of a vector.
    Lcd(LcdArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to the JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the worker thread count.
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory (overrides the config's `output`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CertifyArgs {
    /// Instances per checker.
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct PlotArgs {
    /// Path to a JSON summary produced by `run`.
    #[arg(long)]
    summary: PathBuf,
    /// Output directory for the SVG files.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LcdArgs {
    /// Vector: a CSV file path, or inline comma-separated values.
    #[arg(long)]
    vector: String,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    gamma: f64,
    /// Search ceiling for theta.
    #[arg(long)]
    cap: f64,
    /// Grid step (defaults to cap/10^5).
    #[arg(long)]
    grid_step: Option<f64>,
}

fn parse_vector(arg: &str) -> Result<Vec<f64>, HarnessError> {
    let path = PathBuf::from(arg);
    let text = if path.is_file() {
        fs::read_to_string(&path).map_err(|e| HarnessError::io(&path, e))?
    } else {
        arg.to_string()
    };
    let mut coords = Vec::new();
    for tok in text
        .split([',', '\n', ';', ' '])
        .filter(|s| !s.trim().is_empty())
    {
        let v: f64 = tok
            .trim()
            .parse()
            .map_err(|_| HarnessError::ConfigInvalid(format!("bad vector entry '{tok}'")))?;
        coords.push(v);
    }
    if coords.is_empty() {
        return Err(HarnessError::ConfigInvalid("empty vector".into()));
    }
    Ok(coords)
}

fn cmd_run(args: &RunArgs) -> Result<(), HarnessError> {
    let text = fs::read_to_string(&args.config).map_err(|e| HarnessError::io(&args.config, e))?;
    let mut config = ExperimentConfig::from_json(&text)?;
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    if let Some(threads) = args.threads {
        config.threads = threads;
    }
    if let Some(out) = &args.out {
        config.output = Some(out.display().to_string());
    }
    config.validate()?;
    let summary = run_experiment(&config)?;
    eprintln!(
        "{}: {} trials, {} failed, {:.2}s",
        summary.kind, summary.total_trials, summary.failed_trials, summary.runtime_secs
    );
    match &config.output {
        Some(dir) => {
            let dir = PathBuf::from(dir);
            let format = config.format.clone().unwrap_or_else(|| "both".into());
            let written = export(&summary, &dir, &format)?;
            for p in &written {
                eprintln!("wrote {}", p.display());
            }
        }
        None => println!("{}", summary.to_json()?),
    }
    Ok(())
}

fn cmd_certify(args: &CertifyArgs) -> Result<(), HarnessError> {
    let report = certify_lemmas(args.trials, args.seed);
    print!("{}", report.render());
    if report.all_pass() {
        Ok(())
    } else {
        Err(HarnessError::PartialFailure {
            failed: report.checks.iter().filter(|c| !c.ok()).count(),
            total: report.checks.len(),
        })
    }
}

fn cmd_plot(args: &PlotArgs) -> Result<(), HarnessError> {
    let text = fs::read_to_string(&args.summary).map_err(|e| HarnessError::io(&args.summary, e))?;
    let summary = Summary::from_json(&text)?;
    let out = args.out.clone().unwrap_or_else(|| {
        args.summary
            .parent()
            .map(|p| p.to_path_buf())
            .unwrap_or_else(|| PathBuf::from("."))
    });
    let written = write_plots(&summary, &out)?;
    for p in &written {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn cmd_lcd(args: &LcdArgs) -> Result<(), HarnessError> {
    let coords = parse_vector(&args.vector)?;
    let params = nogaps_core::lcd::LCDParams {
        alpha: args.alpha,
        gamma: args.gamma,
        theta_cap: args.cap,
        grid_step: args.grid_step.unwrap_or(args.cap / 1e5),
    };
    params
        .validate()
        .map_err(|e| HarnessError::ConfigInvalid(e.to_string()))?;
    let v = nogaps_core::linalg::Vect::<f64>::from_column_slice(&coords);
    nogaps_core::linalg::ensure_finite_vec(&v)
        .map_err(|e| HarnessError::ConfigInvalid(e.to_string()))?;
    let bracket = nogaps_core::lcd::lcd_vector(&v, &params).map_err(HarnessError::Core)?;
    if bracket.is_unbounded() {
        println!(
            "lcd: no violation below cap {} (lower bracket {})",
            args.cap, bracket.lower
        );
    } else {
        println!("lcd bracket: [{}, {}]", bracket.lower, bracket.upper);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Certify(args) => cmd_certify(args),
        Command::Plot(args) => cmd_plot(args),
        Command::Lcd(args) => cmd_lcd(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
