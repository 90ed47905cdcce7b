//! domsift: lexical detection of maliciously registered, campaign-themed
//! domain names. Wires the pipeline end to end: ingest -> stats ->
//! evaluate -> score, driven by one pinned config and one master seed.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{parse_algorithms, RunConfig, UsageError};

#[derive(Parser)]
#[command(
    name = "domsift",
    version,
    about = "Detect maliciously registered domains from registration-time lexical features"
)]
struct Cli {
    /// Config file in key = value form; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed for every random choice (folds, sampling).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Directory for datasets, reports, and models.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Strict registration-rule validation; scoring errors become fatal.
    #[arg(long, global = true)]
    strict: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Read a domain feed and threat list, filter for campaign keywords,
    /// label, balance, and write the dataset.
    Ingest {
        #[arg(long)]
        feed: Option<PathBuf>,
        /// Feed format: plain or delimited.
        #[arg(long)]
        feed_format: Option<String>,
        #[arg(long)]
        threat_list: Option<PathBuf>,
        /// Risk rating at or above which an entry is threat-positive.
        #[arg(long)]
        threat_threshold: Option<u8>,
        #[arg(long)]
        keywords: Option<PathBuf>,
        #[arg(long)]
        substitutions: Option<PathBuf>,
        /// Target benign share of the balanced dataset, in (0,1).
        #[arg(long)]
        benign_fraction: Option<f64>,
    },
    /// Per-class feature means of a dataset.
    Stats { dataset: PathBuf },
    /// Cross-validate the configured algorithms and write comparison
    /// reports plus final models.
    Evaluate {
        dataset: PathBuf,
        /// Comma-separated algorithm tags (svm,knn,naive_bayes,logistic,adaboost).
        #[arg(long)]
        algorithms: Option<String>,
        #[arg(long)]
        folds: Option<usize>,
    },
    /// Score domains with a saved model.
    Score {
        #[arg(long)]
        model: PathBuf,
        /// Domains to score.
        domains: Vec<String>,
        /// File with one domain per line ('#' comments).
        #[arg(long)]
        file: Option<PathBuf>,
    },
}

fn effective_config(cli: &Cli) -> Result<RunConfig, anyhow::Error> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out_dir) = &cli.out_dir {
        config.out_dir = out_dir.clone();
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<(), anyhow::Error> {
    let mut config = effective_config(&cli)?;
    match &cli.command {
        Command::Ingest {
            feed,
            feed_format,
            threat_list,
            threat_threshold,
            keywords,
            substitutions,
            benign_fraction,
        } => {
            if let Some(feed) = feed {
                config.feed = Some(feed.clone());
            }
            if let Some(format) = feed_format {
                config.feed_format = domsift_core::ingestion::FeedFormat::from_tag(format)
                    .ok_or_else(|| {
                        config::usage(format!(
                            "unknown --feed-format {format:?} (plain or delimited)"
                        ))
                    })?;
            }
            if let Some(threat_list) = threat_list {
                config.threat_list = Some(threat_list.clone());
            }
            if let Some(threshold) = threat_threshold {
                if *threshold > 100 {
                    return Err(config::usage(format!(
                        "--threat-threshold {threshold} not in [0,100]"
                    )));
                }
                config.threat_threshold = *threshold;
            }
            if let Some(keywords) = keywords {
                config.keywords = Some(keywords.clone());
            }
            if let Some(substitutions) = substitutions {
                config.substitutions = Some(substitutions.clone());
            }
            if let Some(fraction) = benign_fraction {
                config.benign_fraction = *fraction;
            }
            config.validate()?;
            commands::cmd_ingest(&config)?;
            Ok(())
        }
        Command::Stats { dataset } => {
            commands::cmd_stats(dataset)?;
            Ok(())
        }
        Command::Evaluate {
            dataset,
            algorithms,
            folds,
        } => {
            if let Some(raw) = algorithms {
                config.algorithms = parse_algorithms(raw)?;
            }
            if let Some(folds) = folds {
                config.folds = *folds;
            }
            config.validate()?;
            commands::cmd_evaluate(dataset, &config)
        }
        Command::Score {
            model,
            domains,
            file,
        } => commands::cmd_score(model, domains, file.as_deref(), cli.strict),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
