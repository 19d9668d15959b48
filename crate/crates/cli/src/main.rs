use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rarelink::harness::{
    compare_methods, emit_results, emit_results_to_path, read_results_path, run_experiment_logged,
    write_records_to_path, ExperimentConfig, Method, OutputFormat, DIFFERENCE_COLUMNS,
};
use rarelink::Error;

#[derive(Parser)]
#[command(name = "rarelink", version, about = "Rare-event BER/WER sweeps for AWGN links")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an SNR sweep described by a key = value config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated SNR list in dB.
        #[arg(long)]
        snr: Option<String>,
        /// Comma-separated method list.
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        seed: Option<String>,
        /// Result file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        format: Option<String>,
        /// JSON-lines trace of every adaptive iteration.
        #[arg(long)]
        run_log: Option<PathBuf>,
    },
    /// Difference of each method against a baseline method from a results CSV.
    Compare {
        #[arg(long)]
        baseline: String,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, snr, method, seed, out, format, run_log } => {
            let overrides = [
                ("snr", snr),
                ("method", method),
                ("seed", seed),
                ("out", out.map(|p| p.display().to_string())),
                ("format", format),
                ("run_log", run_log.map(|p| p.display().to_string())),
            ];
            run(&config, &overrides)
        }
        Command::Compare { baseline, input, out } => compare(&baseline, &input, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. } | Error::InvalidArgument(_) => 2,
        Error::Io(_) => 3,
        Error::Csv(c) if c.is_io_error() => 3,
        Error::Json(j) if j.is_io() => 3,
        _ => 1,
    }
}

fn run(config: &Path, overrides: &[(&str, Option<String>)]) -> rarelink::Result<()> {
    let text = std::fs::read_to_string(config)?;
    let mut cfg = ExperimentConfig::default();
    cfg.apply_text(&text)?;
    for (key, value) in overrides {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    cfg.validate()?;
    for w in cfg.warnings() {
        log::warn!("{w}");
    }

    let outcome = run_experiment_logged(&cfg)?;
    match &cfg.out {
        Some(path) => emit_results_to_path(&outcome.rows, cfg.format, path)?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            emit_results(&outcome.rows, cfg.format, &mut lock)?;
            lock.flush()?;
        }
    }
    if let Some(path) = &cfg.run_log {
        write_records_to_path(&outcome.run_log, &[], OutputFormat::JsonLines, path)?;
    }
    Ok(())
}

fn compare(baseline: &str, input: &Path, out: &Path) -> rarelink::Result<()> {
    let baseline: Method = baseline.parse()?;
    let rows = read_results_path(input)?;
    let diffs = compare_methods(&rows, baseline)?;
    write_records_to_path(&diffs, &DIFFERENCE_COLUMNS, OutputFormat::Csv, out)
}
