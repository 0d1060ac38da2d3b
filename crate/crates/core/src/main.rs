use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fedwcm::data;
use fedwcm::privacy;
use fedwcm::runner::{self, ExperimentConfig};
use fedwcm::scoring::ScoreTable;
use fedwcm::{Error, Result};

#[derive(Parser)]
#[command(
    name = "fedwcm",
    version,
    about = "Federated learning simulator for long-tailed non-IID data"
)]
struct Cli {
    /// Overrides the base seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (defaults to the config's `output_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every algorithm × trial in a config and write CSVs and a summary.
    Run { config: PathBuf },
    /// Tabulate final accuracy across run directories.
    Compare {
        #[arg(required = true, num_args = 2..)]
        dirs: Vec<PathBuf>,
    },
    /// Print per-client class counts and scores for a config's partition.
    PartitionStats { config: PathBuf },
    /// Run the encrypted distribution protocol and print its report.
    HeDemo { config: PathBuf },
}

fn load(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig> {
    let mut cfg = runner::load_config(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config } => {
            let cfg = load(&config, cli.seed)?;
            let out = cli.out.unwrap_or_else(|| cfg.output_dir.clone());
            let (report, _) = runner::run_experiment(&cfg, Some(&out))?;
            for s in &report.algorithms {
                println!(
                    "{:<9} final acc {:.2} ± {:.2}{}",
                    s.algorithm.name(),
                    100.0 * s.mean,
                    100.0 * s.std,
                    if s.collapsed { "  (collapsed)" } else { "" }
                );
            }
            for f in &report.failures {
                eprintln!("{} trial {} failed: {}", f.algorithm, f.trial, f.error);
            }
            println!("wrote {}", out.display());
        }
        Command::Compare { dirs } => {
            let table = runner::compare_dirs(&dirs)?;
            print!("{}", table.to_text());
            if let Some(out) = cli.out {
                write_file(&out.join("comparison.csv"), &table.to_csv())?;
                write_file(&out.join("comparison.txt"), &table.to_text())?;
            }
        }
        Command::PartitionStats { config } => {
            let cfg = load(&config, cli.seed)?;
            let trial = runner::prepare_trial(&cfg, cfg.seed)?;
            let target = data::ClassDistribution::uniform(cfg.dataset.classes);
            let scores = ScoreTable::compute(&trial.shards, &trial.global, &target)?;
            println!("global counts: {:?}", trial.global.counts());
            println!("client,size,score,counts");
            for (shard, s) in trial.shards.iter().zip(scores.scores()) {
                println!(
                    "{},{},{s:.6},{:?}",
                    shard.client_id,
                    shard.len(),
                    shard.class_counts
                );
            }
            if let Some(out) = cli.out {
                write_file(
                    &out.join("partition.csv"),
                    &data::partition_csv(&trial.shards),
                )?;
            }
        }
        Command::HeDemo { config } => {
            let cfg = load(&config, cli.seed)?;
            let trial = runner::prepare_trial(&cfg, cfg.seed)?;
            let (decrypted, report) =
                privacy::run_protocol(&trial.shards, cfg.privacy.security_bits, cfg.seed)?;
            let plain = data::global_distribution(&trial.shards)?;
            if decrypted != plain {
                return Err(Error::Protocol(
                    "decrypted distribution differs from plaintext sum".into(),
                ));
            }
            println!("{}", report.to_json());
            if let Some(out) = cli.out {
                write_file(&out.join("he_report.json"), &report.to_json())?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            log::warn!("could not size thread pool: {e}");
        }
    }
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let body = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{body}");
            ExitCode::FAILURE
        }
    }
}
