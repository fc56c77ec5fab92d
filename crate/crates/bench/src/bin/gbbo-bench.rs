use std::path::PathBuf;

use anyhow::bail;
use clap::{Parser, Subcommand, ValueEnum};
use gbbo_bench::problems::{problem, NAMES};
use gbbo_bench::runner::{aggregate, load_results, run_seeds, write_csv, write_json, Algo, Mode, RunConfig};

#[derive(Parser)]
#[command(name = "gbbo-bench", about = "Run and summarize optimization benchmarks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one problem/algorithm/mode over several seeds.
    Run {
        #[arg(long)]
        problem: String,
        /// Trial budget; defaults to the problem's standard budget.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value = "auto")]
        algo: Algo,
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        #[arg(long, default_value = "sequential")]
        mode: Mode,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Aggregate result files into a per-trial curve.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// List the available problems.
    List,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt().with_writer(std::io::stderr).init();
    match Cli::parse().cmd {
        Cmd::Run { problem: name, n, algo, seeds, mode, out } => {
            let p = problem(&name)?;
            let n = n.unwrap_or(p.default_trials);
            if n == 0 || seeds == 0 {
                bail!("--n and --seeds must be positive");
            }
            let cfg = RunConfig::new(&name, algo, n, 0, mode);
            let results = run_seeds(&cfg, seeds, &out)?;
            for r in &results {
                println!("seed {:>3}  final metric {:?}", r.seed, r.final_metric());
            }
            println!("wrote {} result files to {}", results.len(), out.display());
        }
        Cmd::Report { input, format } => {
            let results = load_results(&input)?;
            if results.is_empty() {
                bail!("no result files in {}", input.display());
            }
            let rows = aggregate(&results);
            let stdout = std::io::stdout().lock();
            let written = match format {
                Format::Csv => write_csv(&rows, stdout),
                Format::Json => write_json(&rows, stdout),
            };
            // A closed pipe (e.g. `| head`) is not an error.
            if let Err(e) = written {
                let closed = e.chain().any(|c| {
                    c.downcast_ref::<std::io::Error>()
                        .is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
                });
                if !closed {
                    return Err(e);
                }
            }
        }
        Cmd::List => {
            for name in NAMES {
                let p = problem(name)?;
                println!("{name:<12} d={:<3} p={} q={} trials={}", p.dim(), p.num_objectives, p.num_constraints, p.default_trials);
            }
        }
    }
    Ok(())
}
