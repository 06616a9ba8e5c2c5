use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;

use ruusc_cli::{run_spec, run_suite, RunSettings};

/// Runs ru-usc verification problems described in JSON.
///
/// Exit codes: 0 pass, 1 fail, 2 refused, 3 malformed spec or runtime error.
#[derive(Parser, Debug)]
#[command(name = "ruusc", version)]
struct Args {
    /// A single problem spec.
    #[arg(long, conflicts_with = "suite", required_unless_present = "suite")]
    spec: Option<PathBuf>,
    /// A suite file `{"specs": [...]}`.
    #[arg(long)]
    suite: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Added to every seed in the specs.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Multiplies sample counts and grid refinement.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    resolution_scale: u32,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match real_main(&args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}

fn real_main(args: &Args) -> anyhow::Result<i32> {
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring threads")?;
    }
    let settings = RunSettings { seed: args.seed, resolution_scale: args.resolution_scale };
    if let Some(path) = &args.spec {
        let (r, err) = run_spec(path, settings, &args.out)?;
        if let Some(e) = err {
            eprintln!("{}: {e}", path.display());
        }
        println!("{}\t{}\t{}", r.id, r.statement, r.verdict());
        return Ok(r.exit_code);
    }
    let path = args.suite.as_ref().context("--spec or --suite is required")?;
    let (suite, err) = run_suite(path, settings, &args.out)?;
    if let Some(e) = err {
        eprintln!("{}: {e}", path.display());
    }
    for r in &suite.results {
        let mark = if r.effective_code() == 0 { "ok" } else { "UNEXPECTED" };
        println!("{}\t{}\t{}\t{mark}", r.id, r.statement, r.verdict());
    }
    Ok(suite.exit_code)
}
