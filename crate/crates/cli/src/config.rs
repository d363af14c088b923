//! Run configuration: one TOML file, overridden field by field from flags.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use geopulse_core::analysis::ReportConfig;
use geopulse_core::gazetteer::DEFAULT_MIN_CITY_POPULATION;
use geopulse_core::pipeline::{Region, DEFAULT_SAMPLE_K};
use geopulse_core::CountryCode;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "GEOPULSE_CONFIG";

/// The ten largest economies, charted when no country list is configured.
pub const DEFAULT_COUNTRIES: [&str; 10] = ["US", "CN", "JP", "DE", "IN", "GB", "FR", "IT", "BR", "CA"];

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GazetteerPaths {
    pub country_info: Option<PathBuf>,
    pub admin1: Option<PathBuf>,
    pub cities: Option<PathBuf>,
    /// Compiled gazetteer written by `build-gazetteer`; rebuilt when stale.
    pub cache: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LexiconPaths {
    /// Either raw seeds or the output of `build-lexicon`.
    pub seeds: Option<PathBuf>,
    pub synonyms: Option<PathBuf>,
    pub country_metadata: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    #[serde(default)]
    pub gazetteer: GazetteerPaths,
    #[serde(default)]
    pub lexicon: LexiconPaths,
    pub tweets: Option<PathBuf>,
    pub cases: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ScorerKind {
    #[default]
    Lexicon,
    External,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScorerConfig {
    pub kind: ScorerKind,
    /// Adapter command line, split with shell quoting rules.
    pub command: Option<String>,
    /// Number of adapter processes scoring concurrently.
    pub parallelism: usize,
    pub max_batch: usize,
    /// Valence table replacing the bundled one.
    pub valence: Option<PathBuf>,
    pub dead_band: f64,
    pub negation_window: usize,
}

impl Default for ScorerConfig {
    fn default() -> Self {
        Self {
            kind: ScorerKind::Lexicon,
            command: None,
            parallelism: 1,
            max_batch: geopulse_core::sentiment::external::DEFAULT_MAX_BATCH,
            valence: None,
            dead_band: geopulse_core::sentiment::DEFAULT_DEAD_BAND,
            negation_window: geopulse_core::sentiment::DEFAULT_NEGATION_WINDOW,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub paths: Paths,
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
    pub sample_k: usize,
    pub seed: u64,
    pub countries: Vec<String>,
    pub min_city_population: u64,
    pub drop_retweets: bool,
    /// Keep tweets in this language (tweets without a tag are kept); empty keeps all.
    pub lang: String,
    pub min_matches: usize,
    pub scorer: ScorerConfig,
    pub report: ReportConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            paths: Paths::default(),
            start_date: NaiveDate::from_ymd_opt(2020, 3, 23).expect("valid date"),
            end_date: NaiveDate::from_ymd_opt(2020, 6, 23).expect("valid date"),
            sample_k: DEFAULT_SAMPLE_K,
            seed: 0,
            countries: DEFAULT_COUNTRIES.iter().map(|c| c.to_string()).collect(),
            min_city_population: DEFAULT_MIN_CITY_POPULATION,
            drop_retweets: true,
            lang: "en".to_string(),
            min_matches: 1,
            scorer: ScorerConfig::default(),
            report: ReportConfig::default(),
        }
    }
}

impl RunConfig {
    /// Parse a config file; relative paths inside it resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut config: RunConfig =
            toml::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.paths.rebase(base);
        config.scorer.valence = config.scorer.valence.map(|p| base.join(p));
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.start_date > self.end_date {
            return Err(CliError::Usage(format!(
                "start_date {} is after end_date {}",
                self.start_date, self.end_date
            )));
        }
        if self.sample_k == 0 {
            return Err(CliError::Usage("sample_k must be at least 1".into()));
        }
        if self.min_matches == 0 {
            return Err(CliError::Usage("min_matches must be at least 1".into()));
        }
        if self.scorer.parallelism == 0 || self.scorer.max_batch == 0 {
            return Err(CliError::Usage("scorer parallelism and max_batch must be at least 1".into()));
        }
        if self.scorer.kind == ScorerKind::External && self.scorer.command.as_deref().is_none_or(str::is_empty) {
            return Err(CliError::Usage("scorer kind \"external\" needs scorer.command".into()));
        }
        let (lo, hi) = self.report.peak_window;
        if lo > hi || self.report.peaks_k == 0 {
            return Err(CliError::Usage("report.peak_window must be ordered and peaks_k positive".into()));
        }
        self.regions().map(drop)
    }

    /// Configured countries followed by WORLD.
    pub fn regions(&self) -> Result<Vec<Region>, CliError> {
        let mut out = Vec::with_capacity(self.countries.len() + 1);
        for c in &self.countries {
            let code: CountryCode = c
                .parse()
                .map_err(|_| CliError::Usage(format!("invalid country code {c:?}")))?;
            let region = Region::Country(code);
            if !out.contains(&region) {
                out.push(region);
            }
        }
        out.push(Region::World);
        Ok(out)
    }

    pub fn adapter_command(&self) -> Result<Vec<String>, CliError> {
        let raw = self.scorer.command.as_deref().unwrap_or("");
        let words = shell_words::split(raw).map_err(|e| CliError::Usage(format!("scorer.command: {e}")))?;
        if words.is_empty() {
            return Err(CliError::Usage("scorer.command is empty".into()));
        }
        Ok(words)
    }
}

impl Paths {
    fn rebase(&mut self, base: &Path) {
        let fields = [
            &mut self.gazetteer.country_info,
            &mut self.gazetteer.admin1,
            &mut self.gazetteer.cities,
            &mut self.gazetteer.cache,
            &mut self.lexicon.seeds,
            &mut self.lexicon.synonyms,
            &mut self.lexicon.country_metadata,
            &mut self.tweets,
            &mut self.cases,
            &mut self.output_dir,
        ];
        for p in fields.into_iter().flatten() {
            *p = base.join(&*p);
        }
    }
}

/// Return the configured path or a usage error naming the setting.
pub fn required<'a>(path: &'a Option<PathBuf>, name: &str) -> Result<&'a Path, CliError> {
    path.as_deref()
        .ok_or_else(|| CliError::Usage(format!("{name} is not configured")))
}
