//! Command-line front end for the `geopulse` tweet trend pipeline.

pub mod cache;
pub mod chart;
pub mod commands;
pub mod config;
pub mod error;

use std::path::PathBuf;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};

use crate::cache::{CacheOutcome, GeonamesInputs};
use crate::config::{required, RunConfig, ScorerKind, CONFIG_ENV};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "geopulse", version, about = "Weekly economy-tweet trends per country")]
pub struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    /// Log more (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compile GeoNames files into a binary gazetteer cache.
    BuildGazetteer(BuildGazetteerArgs),
    /// Merge seeds, synonyms and country metadata into one lexicon file.
    BuildLexicon(BuildLexiconArgs),
    /// Run the full pipeline and write buckets, report and charts.
    Run(RunArgs),
    /// Recompute the report from a buckets CSV.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Args)]
pub struct BuildGazetteerArgs {
    #[arg(long)]
    pub country_info: Option<PathBuf>,
    #[arg(long)]
    pub admin1: Option<PathBuf>,
    #[arg(long)]
    pub cities: Option<PathBuf>,
    #[arg(long)]
    pub min_city_population: Option<u64>,
    /// Cache file to write.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BuildLexiconArgs {
    #[arg(long)]
    pub seeds: Option<PathBuf>,
    #[arg(long)]
    pub synonyms: Option<PathBuf>,
    #[arg(long)]
    pub country_metadata: Option<PathBuf>,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub tweets: Option<PathBuf>,
    #[arg(long)]
    pub cases: Option<PathBuf>,
    #[arg(short, long)]
    pub output_dir: Option<PathBuf>,
    #[arg(long)]
    pub start_date: Option<NaiveDate>,
    #[arg(long)]
    pub end_date: Option<NaiveDate>,
    #[arg(long)]
    pub sample_k: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated ISO codes to chart.
    #[arg(long, value_delimiter = ',')]
    pub countries: Option<Vec<String>>,
    #[arg(long, value_enum)]
    pub scorer: Option<ScorerKind>,
    /// Adapter command line for the external scorer.
    #[arg(long)]
    pub adapter_command: Option<String>,
    #[arg(long)]
    pub adapter_parallelism: Option<usize>,
    #[arg(long)]
    pub min_city_population: Option<u64>,
    /// Keep retweets instead of dropping them.
    #[arg(long)]
    pub keep_retweets: bool,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Buckets CSV written by `run`.
    pub buckets: PathBuf,
    /// Number of weeks on the axis (default: largest week in the file).
    #[arg(long)]
    pub weeks: Option<usize>,
    /// Write the JSON report here instead of stdout.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

fn base_config(cli_config: &Option<PathBuf>) -> Result<RunConfig, CliError> {
    match cli_config {
        Some(path) => RunConfig::load(path),
        None => Ok(RunConfig::default()),
    }
}

impl RunArgs {
    pub fn apply(self, config: &mut RunConfig) {
        let p = &mut config.paths;
        p.tweets = self.tweets.or(p.tweets.take());
        p.cases = self.cases.or(p.cases.take());
        p.output_dir = self.output_dir.or(p.output_dir.take());
        if let Some(v) = self.start_date {
            config.start_date = v;
        }
        if let Some(v) = self.end_date {
            config.end_date = v;
        }
        if let Some(v) = self.sample_k {
            config.sample_k = v;
        }
        if let Some(v) = self.seed {
            config.seed = v;
        }
        if let Some(v) = self.countries {
            config.countries = v;
        }
        if let Some(v) = self.scorer {
            config.scorer.kind = v;
        }
        if let Some(v) = self.adapter_command {
            config.scorer.command = Some(v);
        }
        if let Some(v) = self.adapter_parallelism {
            config.scorer.parallelism = v;
        }
        if let Some(v) = self.min_city_population {
            config.min_city_population = v;
        }
        if self.keep_retweets {
            config.drop_retweets = false;
        }
    }
}

/// Execute a parsed command line, printing a short summary to stdout.
pub fn execute(cli: Cli) -> Result<(), CliError> {
    let mut config = base_config(&cli.config)?;
    match cli.command {
        Command::BuildGazetteer(args) => {
            let g = &mut config.paths.gazetteer;
            let inputs = GeonamesInputs {
                country_info: required(&args.country_info.or(g.country_info.take()), "--country-info")?.to_path_buf(),
                admin1: required(&args.admin1.or(g.admin1.take()), "--admin1")?.to_path_buf(),
                cities: args.cities.or(g.cities.take()),
                min_city_population: args.min_city_population.unwrap_or(config.min_city_population),
            };
            let output = args.output.or(g.cache.take());
            let summary = commands::build_gazetteer(&inputs, required(&output, "--output")?)?;
            match summary.outcome {
                CacheOutcome::Hit => println!("cache hit: {} entries", summary.entries),
                CacheOutcome::Built => println!("built gazetteer: {} entries", summary.entries),
                CacheOutcome::Rebuilt { reason } => {
                    println!("rebuilt gazetteer ({reason}): {} entries", summary.entries)
                }
            }
        }
        Command::BuildLexicon(args) => {
            let l = &mut config.paths.lexicon;
            l.seeds = args.seeds.or(l.seeds.take());
            l.synonyms = args.synonyms.or(l.synonyms.take());
            l.country_metadata = args.country_metadata.or(l.country_metadata.take());
            let n = commands::build_lexicon(l, &args.output)?;
            println!("wrote {n} terms to {}", args.output.display());
        }
        Command::Run(args) => {
            args.apply(&mut config);
            let summary = commands::run(&config)?;
            println!(
                "wrote {} rows, report and {} charts to {}",
                summary.rows.len(),
                summary.charts.len(),
                summary.output_dir.display()
            );
        }
        Command::Analyze(args) => {
            let report = commands::analyze(&args.buckets, args.weeks, &config.report)?;
            commands::write_json(&report, args.output.as_deref())?;
        }
    }
    Ok(())
}
