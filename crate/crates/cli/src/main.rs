use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use zdet_cli::{run, RunOptions};

/// Run one zdet experiment and write its report.
#[derive(Debug, Parser)]
#[command(name = "zdet", version)]
struct Args {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Report directory; overrides the config's `out`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Cache root; caching is off when unset.
    #[arg(long, env = "ZDET_CACHE")]
    cache: Option<PathBuf>,
    /// Worker threads for grids and sweeps.
    #[arg(long)]
    threads: Option<usize>,
    /// Seed for generated operators and symbols that do not fix their own.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let threads = args.threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let opts = RunOptions { config: args.config, out: args.out, cache: args.cache, threads, seed: args.seed };
    match run(&opts) {
        Ok(summary) => {
            println!("{} {}", serde_json::to_string(&summary.status).unwrap_or_default().trim_matches('"'), summary.report_path.display());
            for w in summary.document["metadata"]["cache"]["warnings"].as_array().into_iter().flatten() {
                eprintln!("warning: {}", w.as_str().unwrap_or_default());
            }
            if let Some(msg) = summary.document["error"]["message"].as_str() {
                eprintln!("error: {msg}");
            }
            ExitCode::from(summary.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
