use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use coinflip_cli::{parse_config_with, run_experiment, CliError, Overrides, Preset};

/// Simulate the pairwise coin-toss asset game and compare the resulting
/// wealth distribution with an exponential.
#[derive(Debug, Parser)]
#[command(name = "coinflip", version)]
struct Args {
    /// JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// fig2a, fig2b or custom.
    #[arg(long)]
    preset: Option<Preset>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Number of players.
    #[arg(long)]
    n: Option<usize>,
    /// Total number of matches.
    #[arg(long)]
    matches: Option<u64>,
    /// Histogram bins.
    #[arg(long)]
    bins: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(args: Args) -> Result<(), CliError> {
    let text = match &args.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            source: e,
        })?,
        None => "{}".to_string(),
    };
    let overrides = Overrides {
        preset: args.preset,
        seed: args.seed,
        output_dir: args.output_dir,
        n: args.n,
        matches: args.matches,
        bins: args.bins,
    };
    let spec = parse_config_with(&text, &overrides)?;
    if spec.seed_generated {
        eprintln!("no seed given, using generated seed {}", spec.seed);
    }
    let summary = run_experiment(&spec)?;
    println!(
        "{:<28} {:>7} {:>10} {:>10} {:>10}",
        "run", "replica", "ks", "l1", "drift"
    );
    for r in &summary.runs {
        println!(
            "{:<28} {:>7} {:>10.5} {:>10.5} {:>10.2e}{}",
            r.name,
            r.replica,
            r.gof.ks,
            r.gof.l1,
            r.conservation_drift,
            if r.ks_pass {
                ""
            } else {
                "  (ks above threshold)"
            }
        );
    }
    for p in &summary.pairwise_ks {
        println!("pairwise ks {} vs {}: {:.5}", p.a, p.b, p.ks);
    }
    println!("outputs written to {}", spec.output_dir.display());
    Ok(())
}
