use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use varivery::experiments::{error_line, exit_code, list_table, run_to_dir, ExperimentConfig};
use varivery::Error;

#[derive(Parser)]
#[command(name = "varivery", version, about = "Seeded experiments on variational circuit models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// key=value override; dotted keys address nested parameters.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Print the experiment registry.
    List,
}

fn run(
    config: PathBuf,
    set: Vec<String>,
    out_dir: Option<PathBuf>,
    seed: Option<u64>,
    threads: Option<usize>,
) -> Result<(), Error> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(Error::Validation("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Validation(format!("thread pool: {e}")))?;
    }
    let text = std::fs::read_to_string(&config)
        .map_err(|e| Error::Validation(format!("reading {}: {e}", config.display())))?;
    let mut cfg = ExperimentConfig::from_json(&text)?;
    for s in &set {
        cfg.apply_override(s)?;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if out_dir.is_some() {
        cfg.out_dir = out_dir;
    }
    let dir = cfg
        .out_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("out").join(&cfg.experiment));
    let summary = run_to_dir(&cfg, &dir)?;
    println!(
        "{} done in {:.2}s: {} files in {}",
        summary.experiment,
        summary.seconds,
        summary.files.len(),
        dir.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments");
            eprintln!("error kind=usage message={first}");
            return ExitCode::from(2);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match cli.command {
        Command::List => {
            print!("{}", list_table());
            ExitCode::SUCCESS
        }
        Command::Run {
            config,
            set,
            out_dir,
            seed,
            threads,
        } => match run(config, set, out_dir, seed, threads) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("{}", error_line(&e));
                ExitCode::from(exit_code(&e) as u8)
            }
        },
    }
}
