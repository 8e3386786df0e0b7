use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use erlang_periodic::cli;
use erlang_periodic::config::RunConfig;
use erlang_periodic::Error;

#[derive(Parser)]
#[command(version, about = "Periodic steady state of E_k/E_m/1 queues with periodic rates")]
struct Args {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides output.dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for parallel sections.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Series level probabilities against the ODE oracle.
    Analyze,
    /// Characteristic roots.
    Roots,
    /// Periodic ODE boundary probabilities.
    Oracle,
    /// Truncation error bounds against measured error.
    Bounds,
    /// Waiting-time CDFs.
    Waiting {
        #[arg(long)]
        u: Option<f64>,
        /// queue or sojourn
        #[arg(long)]
        kind: Option<String>,
    },
    /// Busy-period CDF.
    Busy {
        #[arg(long)]
        j: Option<usize>,
        #[arg(long)]
        u: Option<f64>,
    },
    /// Cross-method summary.
    Compare,
}

fn run(args: Args) -> Result<Vec<PathBuf>, Error> {
    let path = args.config.ok_or_else(|| Error::Config("--config <path> is required".into()))?;
    let mut cfg = RunConfig::load(&path)?;
    if let Some(out) = args.out {
        cfg.output.dir = out;
    }
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("--threads: {e}")))?;
    }
    match args.command {
        Command::Analyze => cli::cmd_analyze(&cfg),
        Command::Roots => cli::cmd_roots(&cfg),
        Command::Oracle => cli::cmd_oracle(&cfg),
        Command::Bounds => cli::cmd_bounds(&cfg),
        Command::Waiting { u, kind } => {
            if let Some(u) = u {
                cfg.waiting.u = vec![u];
            }
            if let Some(kind) = kind {
                kind.parse::<erlang_periodic::waiting::WaitKind>()?;
                cfg.waiting.kind = kind;
            }
            cli::cmd_waiting(&cfg)
        }
        Command::Busy { j, u } => {
            if let Some(j) = j {
                if j == 0 {
                    return Err(Error::Config("--j must be >= 1".into()));
                }
                cfg.busy.j = j;
            }
            if let Some(u) = u {
                cfg.busy.u = u;
            }
            cli::cmd_busy(&cfg)
        }
        Command::Compare => cli::cmd_compare(&cfg),
    }
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(args) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
