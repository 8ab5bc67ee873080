//! Command-line pipeline: corpus preprocessing, embedding training and
//! index export, driven by one TOML config file.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::PipelineConfig;
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "semdex", version, about = "Semantic indices from country-year speech corpora")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Pipeline config file (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Overrides `training.seed`.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Forces single-threaded, reproducible training.
    #[arg(long, global = true)]
    pub deterministic: bool,
    /// Overrides `training.threads`.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BaseYearArg {
    /// Overrides this command's base year.
    #[arg(long, value_name = "Y")]
    pub base_year: Option<i32>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ingest the raw corpus and write the processed token file.
    Preprocess,
    /// Train paragraph vectors on the processed corpus.
    Train,
    /// Topic-related indices for each theme and group.
    Topic(BaseYearArg),
    /// Group centrality indices E and per-country Ė series.
    Centrality(BaseYearArg),
    /// Network density indices, filtered and percentile-only.
    Density(BaseYearArg),
    /// Yearly Spearman correlation between similarity and voting agreement.
    Correlate,
    /// Filtered per-year edge lists.
    ExportGraph,
}

/// Loads the config, applies flag overrides, validates, and runs the
/// command.
pub fn run(cli: Cli) -> Result<(), CliError> {
    let path = cli
        .global
        .config
        .ok_or_else(|| CliError::Usage("--config PATH is required".into()))?;
    let mut cfg = PipelineConfig::load(&path)?;
    if let Some(seed) = cli.global.seed {
        cfg.training.seed = seed;
    }
    if cli.global.deterministic {
        cfg.training.deterministic = true;
    }
    if let Some(threads) = cli.global.threads {
        cfg.training.threads = threads;
    }
    match &cli.command {
        Command::Topic(BaseYearArg { base_year: Some(y) }) => cfg.base_years.topic = *y,
        Command::Centrality(BaseYearArg { base_year: Some(y) }) => cfg.base_years.edot = *y,
        Command::Density(BaseYearArg { base_year: Some(y) }) => cfg.base_years.density = *y,
        _ => {}
    }
    cfg.validate()?;
    match cli.command {
        Command::Preprocess => commands::preprocess(&cfg),
        Command::Train => commands::train(&cfg),
        Command::Topic(_) => commands::topic(&cfg),
        Command::Centrality(_) => commands::centrality(&cfg),
        Command::Density(_) => commands::density(&cfg),
        Command::Correlate => commands::correlate(&cfg),
        Command::ExportGraph => commands::export_graph(&cfg),
    }
}
