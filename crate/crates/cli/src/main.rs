use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use corrconv_core::experiments::{emit_plots, run_experiment, ExperimentConfig, ExperimentKind};
use corrconv_core::oracle::count_valid_walk_tuples;

/// Seeded sweeps over contextual stochastic block models.
#[derive(Parser)]
#[command(name = "corrconv", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run(RunArgs),
    /// Render SVG plots from a sweep CSV.
    Plot {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Brute-force reference checks.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `master_seed` from the config.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Count valid walk tuples and compare against the closed-form bound.
    WalkAudit {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        t: usize,
        /// Start vertex.
        #[arg(long, default_value_t = 0)]
        u: usize,
        /// Forbid steps that stay in place.
        #[arg(long)]
        no_self_loops: bool,
        /// Write `ell,count,bound` CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(args: RunArgs) -> Result<()> {
    if let Some(threads) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring thread pool")?;
    }
    let mut cfg = ExperimentConfig::from_path(&args.config)
        .with_context(|| format!("loading {}", args.config.display()))?;
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    let out = run_experiment(&cfg, &args.out)?;
    println!("wrote {} rows to {}", out.rows, out.csv.display());
    if let Some(summary) = &out.summary {
        println!("wrote {}", summary.display());
    }
    if cfg.experiment != ExperimentKind::WalkAudit && out.rows > 0 {
        for path in emit_plots(&out.csv, &args.out)? {
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn walk_audit(
    n: usize,
    k: usize,
    t: usize,
    u: usize,
    self_loops: bool,
    out: Option<PathBuf>,
) -> Result<()> {
    let table = count_valid_walk_tuples(n, k, t, u, self_loops)?;
    match out {
        Some(path) => {
            let file =
                File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            table.write_csv(BufWriter::new(file))?;
        }
        None => table.write_csv(std::io::stdout().lock())?,
    }
    let violations = table.violations();
    let pigeonhole = table.pigeonhole_violations();
    eprintln!(
        "n={n} k={k} t={t}: {} valid tuples, {} bound violations, {} nonzero counts above tk",
        table.total_valid(),
        violations.len(),
        pigeonhole.len()
    );
    anyhow::ensure!(
        violations.is_empty() && pigeonhole.is_empty(),
        "audit failed at ell = {:?}",
        violations.iter().chain(&pigeonhole).collect::<Vec<_>>()
    );
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(args) => run(args),
        Command::Plot { csv, out } => {
            for path in emit_plots(&csv, &out)? {
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Oracle(OracleCommand::WalkAudit {
            n,
            k,
            t,
            u,
            no_self_loops,
            out,
        }) => walk_audit(n, k, t, u, !no_self_loops, out),
    }
}
