use std::path::{Path, PathBuf};
use std::process::ExitCode;

use banditlab::catalog::PRESET_NAMES;
use banditlab_bench::config::EnvKind;
use banditlab_bench::{emit_results, parse_config, run_benchmark, BenchError, ExperimentConfig};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bench", version, about = "Run contextual bandit benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every agent in a config and write CSV results.
    Run {
        config: PathBuf,
        /// Output directory, overriding `out` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads, overriding `workers` in the config.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// List the agent presets.
    Presets,
    /// Check a config without running it.
    Validate { config: PathBuf },
}

fn load(path: &Path) -> Result<ExperimentConfig, BenchError> {
    let text = std::fs::read_to_string(path).map_err(|source| BenchError::ReadConfig {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

fn describe(cfg: &ExperimentConfig) -> String {
    let env = match &cfg.env.kind {
        EnvKind::Wheel(w) => format!("wheel (delta {})", w.delta),
        EnvKind::Linear(s) => format!("linear (d {}, k {})", s.d, s.k),
        EnvKind::Dataset(s) => format!("dataset {}", s.path.display()),
    };
    let agents: Vec<&str> = cfg.agents.iter().map(|a| a.name.as_str()).collect();
    format!(
        "environment: {env}\nagents: {}\ntrials: {}, horizon: {}, seed: {}",
        agents.join(", "),
        cfg.run.trials,
        cfg.run.horizon,
        cfg.run.seed
    )
}

fn execute(command: Command) -> Result<(), BenchError> {
    match command {
        Command::Presets => {
            for name in PRESET_NAMES {
                println!("{name}");
            }
        }
        Command::Validate { config } => {
            let cfg = load(&config)?;
            println!("{}", describe(&cfg));
        }
        Command::Run {
            config,
            out,
            workers,
        } => {
            let mut cfg = load(&config)?;
            if let Some(out) = out {
                cfg.run.out = out;
            }
            if let Some(w) = workers {
                cfg.run.workers = w.max(1);
            }
            log::info!("{}", describe(&cfg));
            let outcome = run_benchmark(&cfg)?;
            let files = emit_results(&outcome, &cfg.run.out)?;
            for row in &outcome.summary {
                println!(
                    "{:<28} cum {:>12.2} ± {:<10.2} normalized {:>7.2}",
                    row.agent, row.mean_cum_regret, row.stderr_cum, row.normalized_cum
                );
            }
            println!("wrote {} files to {}", files.len(), cfg.run.out.display());
            if let Some(f) = outcome.failures.into_iter().next() {
                return Err(BenchError::AgentFailed {
                    agent: f.agent,
                    source: f.error,
                });
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
