//! `simulate <config.toml>`: run one experiment and write its curve.

use clap::Parser;
use cntfiber::runner::{dump_mode, parse_config, run_experiment, write_output, OutputFormat, RunnerError};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(version, about = "Photon absorption of zigzag nanotubes in nanofiber fields")]
struct Args {
    /// TOML run configuration.
    config: PathBuf,
    /// Output file; defaults to `[output] path`, then standard output.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Overrides `[output] format`.
    #[arg(long, value_parser = ["csv", "json", "svg"])]
    format: Option<String>,
    /// Overrides the config's top-level seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 lets the pool decide.
    #[arg(long, env = "CNTFIBER_THREADS", default_value_t = 0)]
    threads: usize,
    /// Also write the guided-mode field map (CSV) to this path.
    #[arg(long)]
    dump_mode: Option<PathBuf>,
}

fn run(args: Args) -> Result<(), RunnerError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|source| RunnerError::Io { path: args.config.clone(), source })?;
    let mut cfg = parse_config(&text)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(f) = &args.format {
        cfg.output.format = match f.as_str() {
            "json" => OutputFormat::Json,
            "svg" => OutputFormat::Svg,
            _ => OutputFormat::Csv,
        };
    }
    if let Some(p) = &args.output {
        cfg.output.path = Some(p.clone());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads)
        .build_global()
        .map_err(|e| RunnerError::Config(format!("thread pool: {e}")))?;

    if let Some(p) = &args.dump_mode {
        let csv = dump_mode(&cfg)?;
        std::fs::write(p, csv).map_err(|source| RunnerError::Io { path: p.clone(), source })?;
    }
    let result = run_experiment(&cfg)?;
    write_output(&result, cfg.output.format, cfg.output.path.as_deref())
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
