//! The four subcommands as library functions.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use geopulse_core::analysis::{analyze as analyze_rows, CountryReport, ReportConfig};
use geopulse_core::gazetteer::Gazetteer;
use geopulse_core::lexicon::{
    expand_synonyms, load_seed_terms, merge_country_metadata, LexiconTerm, TermOrigin, TopicLexicon,
};
use geopulse_core::pipeline::{
    ingest, join_cases, process_to_buckets, read_trend_csv, sample_scheduled, write_trend_csv, Annotator, Buckets,
    CaseTable, DaySample, IngestFilters, IngestStats, Region, Schedule, Scorer, TrendRow, WeeklyBucket,
};
use geopulse_core::sentiment::external::{AdapterConfig, AdapterHandle};
use geopulse_core::sentiment::{LexiconScorer, ValenceLexicon};
use serde::Serialize;

use crate::cache::{load_or_build, CacheOutcome, GeonamesInputs};
use crate::chart::{Chart, Series};
use crate::config::{required, LexiconPaths, RunConfig, ScorerKind};
use crate::error::CliError;

pub const BUCKETS_FILE: &str = "buckets.csv";
pub const REPORT_JSON: &str = "report.json";
pub const REPORT_TEXT: &str = "report.txt";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GazetteerSummary {
    pub outcome: CacheOutcome,
    pub entries: usize,
}

/// Compile the GeoNames inputs into the binary cache at `output`.
pub fn build_gazetteer(inputs: &GeonamesInputs, output: &Path) -> Result<GazetteerSummary, CliError> {
    let (gazetteer, outcome) = load_or_build(inputs, output)?;
    Ok(GazetteerSummary {
        outcome,
        entries: gazetteer.len(),
    })
}

/// Seeds, expanded by synonyms, then merged with country metadata.
pub fn load_lexicon_terms(paths: &LexiconPaths) -> Result<Vec<LexiconTerm>, CliError> {
    let seeds_path = required(&paths.seeds, "lexicon seeds")?;
    let seeds = load_seed_terms(seeds_path)?;
    seeds.warn_issues(seeds_path);
    let mut terms = seeds.items;
    if let Some(path) = &paths.synonyms {
        let expanded = expand_synonyms(terms, path)?;
        expanded.warn_issues(path);
        terms = expanded.items;
    }
    if let Some(path) = &paths.country_metadata {
        let merged = merge_country_metadata(terms, path)?;
        merged.warn_issues(path);
        terms = merged.items;
    }
    Ok(terms)
}

/// Write the merged lexicon as `term<TAB>category`, grouped by origin.
/// The output is itself a valid seed file.
pub fn build_lexicon(paths: &LexiconPaths, output: &Path) -> Result<usize, CliError> {
    let terms = load_lexicon_terms(paths)?;
    // Dedup and validate exactly as a run would.
    let lexicon = TopicLexicon::build(terms, 1)?;
    let mut out = String::new();
    for (origin, heading) in [
        (TermOrigin::Seed, "seed terms"),
        (TermOrigin::SynonymExpansion, "synonym expansion"),
        (TermOrigin::CountryMetadata, "country currency and bank names"),
    ] {
        let group: Vec<&LexiconTerm> = lexicon.terms().iter().filter(|t| t.origin == origin).collect();
        if group.is_empty() {
            continue;
        }
        out.push_str(&format!("# {heading}\n"));
        for t in group {
            out.push_str(&format!("{}\t{:?}\n", t.surface, t.category));
        }
    }
    write_file(output, out.as_bytes())?;
    Ok(lexicon.terms().len())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn load_gazetteer(config: &RunConfig) -> Result<Gazetteer, CliError> {
    let g = &config.paths.gazetteer;
    let inputs = || -> Result<GeonamesInputs, CliError> {
        Ok(GeonamesInputs {
            country_info: required(&g.country_info, "gazetteer country_info")?.to_path_buf(),
            admin1: required(&g.admin1, "gazetteer admin1")?.to_path_buf(),
            cities: g.cities.clone(),
            min_city_population: config.min_city_population,
        })
    };
    match &g.cache {
        Some(cache) => {
            let (gazetteer, outcome) = load_or_build(&inputs()?, cache)?;
            log::info!("gazetteer cache {}: {outcome:?}", cache.display());
            Ok(gazetteer)
        }
        None => Ok(inputs()?.load()?.0),
    }
}

fn make_scorer(config: &RunConfig) -> Result<(Scorer, Option<String>), CliError> {
    let s = &config.scorer;
    match s.kind {
        ScorerKind::Lexicon => {
            let lexicon = match &s.valence {
                Some(path) => ValenceLexicon::load(path, s.negation_window)?,
                None => ValenceLexicon::builtin().with_negation_window(s.negation_window)?,
            };
            Ok((Scorer::Lexicon(LexiconScorer::new(lexicon, s.dead_band)?), None))
        }
        ScorerKind::External => {
            let mut adapter = AdapterConfig::new(config.adapter_command()?);
            adapter.max_batch = s.max_batch;
            let handles = (0..s.parallelism)
                .map(|_| AdapterHandle::spawn(adapter.clone()))
                .collect::<Result<Vec<_>, _>>()?;
            let model = handles.first().map(|h| h.model().to_string());
            Ok((Scorer::External(handles), model))
        }
    }
}

fn shutdown(scorer: Scorer) -> Result<(), CliError> {
    if let Scorer::External(handles) = scorer {
        for h in handles {
            h.shutdown()?;
        }
    }
    Ok(())
}

/// Every configured region for every week, zero where no tweet landed.
fn dense_buckets(buckets: &Buckets, regions: &[Region], weeks: usize) -> Vec<WeeklyBucket> {
    let mut out = Vec::with_capacity(regions.len() * weeks);
    let mut sorted = regions.to_vec();
    sorted.sort();
    for region in sorted {
        for week_index in 1..=weeks {
            out.push(WeeklyBucket {
                country_code: region,
                week_index,
                counts: buckets.get(region, week_index).copied().unwrap_or_default(),
            });
        }
    }
    out
}

#[derive(Debug, Serialize)]
pub struct AnalysisReport {
    pub weeks: usize,
    pub countries: Vec<CountryReport<f64>>,
}

#[derive(Debug, Serialize)]
struct RunSettings<'a> {
    start_date: NaiveDate,
    end_date: NaiveDate,
    sample_k: usize,
    seed: u64,
    scorer: ScorerKind,
    adapter_model: Option<&'a str>,
    min_city_population: u64,
    drop_retweets: bool,
    lang: &'a str,
    report: ReportConfig,
}

#[derive(Debug, Serialize)]
struct RunReport<'a> {
    settings: RunSettings<'a>,
    schedule: &'a [NaiveDate],
    ingest: &'a IngestStats,
    off_schedule: usize,
    sampling: &'a [DaySample],
    gazetteer_entries: usize,
    lexicon_terms: usize,
    analysis: &'a AnalysisReport,
}

#[derive(Debug)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub rows: Vec<TrendRow>,
    pub analysis: AnalysisReport,
    pub charts: Vec<PathBuf>,
}

/// Ingest, sample, annotate, score, aggregate, join cases, analyse, and
/// write `buckets.csv`, `report.json`, `report.txt` and one chart per region.
pub fn run(config: &RunConfig) -> Result<RunSummary, CliError> {
    config.validate()?;
    let regions = config.regions()?;
    let schedule = Schedule::tuesdays(config.start_date, config.end_date)?;
    let tweets_path = required(&config.paths.tweets, "tweets")?;
    let output_dir = required(&config.paths.output_dir, "output_dir")?.to_path_buf();

    let gazetteer = load_gazetteer(config)?;
    let lexicon = TopicLexicon::build(load_lexicon_terms(&config.paths.lexicon)?, config.min_matches)?;
    let cases = config.paths.cases.as_deref().map(CaseTable::load).transpose()?;

    let file = File::open(tweets_path).map_err(|e| CliError::io(tweets_path, e))?;
    let filters = IngestFilters {
        lang: Some(config.lang.clone()).filter(|l| !l.is_empty()),
        drop_retweets: config.drop_retweets,
    };
    let ingested = ingest(BufReader::new(file), &filters)?;
    log::info!("ingest: {:?}", ingested.stats);
    if ingested.records.is_empty() {
        return Err(CliError::data(format!("{} contains no usable tweets", tweets_path.display())));
    }
    let sample = sample_scheduled(ingested.records, &schedule, config.sample_k, config.seed);
    if sample.records.is_empty() {
        return Err(CliError::data(format!(
            "no tweets fall on a scheduled Tuesday between {} and {}",
            config.start_date, config.end_date
        )));
    }

    let (mut scorer, adapter_model) = make_scorer(config)?;
    let annotator = Annotator::new(&gazetteer, &lexicon);
    let buckets = process_to_buckets(&sample.records, &annotator, &mut scorer, &schedule);
    shutdown(scorer)?;
    let buckets = buckets?;

    let dense = dense_buckets(&buckets, &regions, schedule.len());
    let rows = join_cases(&dense, cases.as_ref().unwrap_or(&CaseTable::default()), &schedule);
    let analysis = AnalysisReport {
        weeks: schedule.len(),
        countries: analyze_rows(&rows, Some(schedule.len()), &config.report),
    };

    fs::create_dir_all(&output_dir).map_err(|e| CliError::io(&output_dir, e))?;
    let csv_path = output_dir.join(BUCKETS_FILE);
    let csv_file = File::create(&csv_path).map_err(|e| CliError::io(&csv_path, e))?;
    write_trend_csv(&rows, BufWriter::new(csv_file))?;

    let report = RunReport {
        settings: RunSettings {
            start_date: config.start_date,
            end_date: config.end_date,
            sample_k: config.sample_k,
            seed: config.seed,
            scorer: config.scorer.kind,
            adapter_model: adapter_model.as_deref(),
            min_city_population: config.min_city_population,
            drop_retweets: config.drop_retweets,
            lang: &config.lang,
            report: config.report,
        },
        schedule: schedule.days(),
        ingest: &ingested.stats,
        off_schedule: sample.off_schedule,
        sampling: &sample.days,
        gazetteer_entries: gazetteer.len(),
        lexicon_terms: lexicon.terms().len(),
        analysis: &analysis,
    };
    let mut json = serde_json::to_string_pretty(&report).map_err(CliError::data)?;
    json.push('\n');
    write_file(&output_dir.join(REPORT_JSON), json.as_bytes())?;
    write_file(&output_dir.join(REPORT_TEXT), render_text(&analysis, &schedule).as_bytes())?;

    let mut charts = Vec::new();
    for region in &regions {
        let path = output_dir.join(format!("{region}.svg"));
        write_file(&path, region_chart(*region, &rows, &schedule).to_svg().as_bytes())?;
        charts.push(path);
    }
    Ok(RunSummary {
        output_dir,
        rows,
        analysis,
        charts,
    })
}

fn region_chart<'a>(region: Region, rows: &[TrendRow], schedule: &Schedule) -> Chart<'a> {
    let mine: Vec<&TrendRow> = rows.iter().filter(|r| r.bucket.country_code == region).collect();
    let field = |f: fn(&TrendRow) -> u64| mine.iter().map(|r| f(r) as f64).collect::<Vec<f64>>();
    let has_cases = mine.iter().any(|r| r.new_cases.is_some());
    Chart {
        title: format!("{region}: economy tweets, sentiment and new cases"),
        weeks: schedule.days().to_vec(),
        series: vec![
            Series {
                name: "economy tweets",
                color: "#1f77b4",
                values: field(|r| r.bucket.counts.n_topical),
            },
            Series {
                name: "positive",
                color: "#2ca02c",
                values: field(|r| r.bucket.counts.n_positive),
            },
            Series {
                name: "negative",
                color: "#d62728",
                values: field(|r| r.bucket.counts.n_negative),
            },
        ],
        cases: has_cases.then(|| Series {
            name: "new cases",
            color: "#7f7f7f",
            values: field(|r| r.new_cases.unwrap_or(0)),
        }),
    }
}

fn render_text(analysis: &AnalysisReport, schedule: &Schedule) -> String {
    let mut out = format!(
        "{} weeks, {} to {}\n\n",
        analysis.weeks,
        schedule.days().first().map(|d| d.to_string()).unwrap_or_default(),
        schedule.days().last().map(|d| d.to_string()).unwrap_or_default(),
    );
    for c in &analysis.countries {
        let r = match (c.pearson_r, c.pearson_error) {
            (Some(r), _) => format!("r = {r:.4}{}", if c.correlated { " (correlated)" } else { "" }),
            (None, Some(e)) => format!("r undefined: {e}"),
            (None, None) => "r undefined".to_string(),
        };
        let peaks: Vec<String> = c
            .peaks
            .iter()
            .map(|p| format!("week {} ({}, {:?})", p.week_index, p.height, p.sentiment_balance))
            .collect();
        out.push_str(&format!("{}: {r}\n", c.country_code));
        out.push_str(&format!(
            "  peaks: {}{}\n",
            if peaks.is_empty() { "none".to_string() } else { peaks.join(", ") },
            if c.peaks_in_window { " [in window]" } else { "" }
        ));
        if !c.divergent_weeks.is_empty() {
            out.push_str(&format!("  cases fell while economy tweets rose: weeks {:?}\n", c.divergent_weeks));
        }
        if !c.imputed_weeks.is_empty() {
            out.push_str(&format!("  weeks without data: {:?}\n", c.imputed_weeks));
        }
    }
    out
}

/// Report every region in a trend CSV produced by `run`.
pub fn analyze(csv: &Path, weeks: Option<usize>, config: &ReportConfig) -> Result<AnalysisReport, CliError> {
    let file = File::open(csv).map_err(|e| CliError::io(csv, e))?;
    let rows = read_trend_csv(BufReader::new(file))?;
    let weeks = weeks.unwrap_or_else(|| rows.iter().map(|r| r.bucket.week_index).max().unwrap_or(0));
    Ok(AnalysisReport {
        weeks,
        countries: analyze_rows(&rows, Some(weeks), config),
    })
}

pub fn write_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), CliError> {
    let mut json = serde_json::to_string_pretty(value).map_err(CliError::data)?;
    json.push('\n');
    match out {
        Some(path) => write_file(path, json.as_bytes()),
        None => std::io::stdout()
            .write_all(json.as_bytes())
            .map_err(|e| CliError::data(format!("stdout: {e}"))),
    }
}
