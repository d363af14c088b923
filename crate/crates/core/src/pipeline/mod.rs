//! Tweet ingestion, sampling, annotation and weekly aggregation.
//!
//! Stages run in a fixed order: [`ingest`] reads NDJSON, [`sample_scheduled`]
//! draws a seeded sample from each scheduled Tuesday, [`Annotator`] geotags
//! and topic-filters the sample (in parallel), a [`Scorer`] labels the
//! topical tweets, and [`aggregate`] counts everything into weekly buckets.
//! Sampling happens before any fan-out, so results depend only on the seed.

pub mod aggregate;
pub mod cases;
pub mod ingest;
pub mod sample;
pub mod schedule;

use std::collections::{BTreeMap, HashMap};

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

pub use aggregate::{aggregate, AggregateError, Buckets, Counts, Region, Scored, WeeklyBucket, WORLD};
pub use cases::{join_cases, read_trend_csv, write_trend_csv, CaseTable, CsvError, TrendRow};
pub use ingest::{ingest, IngestError, IngestFilters, IngestStats, Ingested, TweetRecord};
pub use sample::{day_seed, reservoir_sample};
pub use schedule::{tuesday_schedule, Schedule, ScheduleError};

use crate::gazetteer::{Gazetteer, LocationTag};
use crate::lexicon::TopicLexicon;
use crate::sentiment::external::{score_external_parallel, AdapterError, AdapterHandle};
use crate::sentiment::{LexiconScorer, SentimentLabel};
use crate::text::normalize;

/// Default per-day sample size.
pub const DEFAULT_SAMPLE_K: usize = 10_000;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Aggregate(#[from] AggregateError),
    #[error(transparent)]
    Adapter(#[from] AdapterError),
    #[error("adapter returned no score for record {0}")]
    MissingScore(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DaySample {
    pub day: NaiveDate,
    pub week_index: usize,
    pub available: usize,
    pub sampled: usize,
}

#[derive(Debug, Clone)]
pub struct SampleOutcome {
    /// Ordered by week, then input order.
    pub records: Vec<TweetRecord>,
    pub days: Vec<DaySample>,
    /// Records whose UTC date is not a scheduled Tuesday.
    pub off_schedule: usize,
}

/// Keep only tweets posted on scheduled Tuesdays and draw up to `k` from
/// each day with a seed derived from `seed` and the date.
pub fn sample_scheduled(records: Vec<TweetRecord>, schedule: &Schedule, k: usize, seed: u64) -> SampleOutcome {
    let mut by_week: BTreeMap<usize, Vec<TweetRecord>> = BTreeMap::new();
    let mut off_schedule = 0;
    for r in records {
        match schedule.scheduled_week(r.created_at.date_naive()) {
            Some(week) => by_week.entry(week).or_default().push(r),
            None => off_schedule += 1,
        }
    }
    let mut out = Vec::new();
    let mut days = Vec::new();
    for (week_index, day) in schedule.days().iter().enumerate().map(|(i, d)| (i + 1, *d)) {
        let pool = by_week.remove(&week_index).unwrap_or_default();
        let available = pool.len();
        let picked = reservoir_sample(pool, k, day_seed(seed, day));
        days.push(DaySample {
            day,
            week_index,
            available,
            sampled: picked.len(),
        });
        out.extend(picked);
    }
    SampleOutcome {
        records: out,
        days,
        off_schedule,
    }
}

/// Geotag and topic flag for one tweet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Annotation {
    pub location: Option<LocationTag>,
    pub topical: bool,
    pub normalized_text: String,
}

/// Geotagging plus topical filtering against shared, immutable dictionaries.
#[derive(Debug, Clone, Copy)]
pub struct Annotator<'a> {
    pub gazetteer: &'a Gazetteer,
    pub lexicon: &'a TopicLexicon,
}

impl<'a> Annotator<'a> {
    pub fn new(gazetteer: &'a Gazetteer, lexicon: &'a TopicLexicon) -> Self {
        Self { gazetteer, lexicon }
    }

    pub fn annotate(&self, record: &TweetRecord) -> Annotation {
        let text = normalize(&record.text);
        let profile = record.user_location.as_deref().map(normalize);
        Annotation {
            location: self.gazetteer.resolve_prepared(profile.as_deref(), &text),
            topical: self.lexicon.is_topical_flag_prepared(&text),
            normalized_text: text,
        }
    }

    /// Annotate in parallel; output order matches input order.
    pub fn annotate_all(&self, records: &[TweetRecord]) -> Vec<Annotation> {
        records.par_iter().map(|r| self.annotate(r)).collect()
    }
}

/// Sentiment backend for topical tweets.
pub enum Scorer {
    Lexicon(LexiconScorer<f64>),
    External(Vec<AdapterHandle>),
}

impl Scorer {
    fn score(&mut self, items: &[(&TweetRecord, &Annotation)]) -> Result<Vec<SentimentLabel>, PipelineError> {
        match self {
            Scorer::Lexicon(scorer) => Ok(items
                .par_iter()
                .map(|(_, a)| scorer.score_prepared(&a.normalized_text).label)
                .collect()),
            Scorer::External(adapters) => {
                let batch: Vec<(String, String)> =
                    items.iter().map(|(r, _)| (r.id.clone(), r.text.clone())).collect();
                let mut by_id: HashMap<String, Vec<SentimentLabel>> = HashMap::new();
                for (id, score) in score_external_parallel::<f64>(&batch, adapters)? {
                    by_id.entry(id).or_default().push(score.label);
                }
                items
                    .iter()
                    .map(|(r, _)| {
                        by_id
                            .get_mut(&r.id)
                            .and_then(Vec::pop)
                            .ok_or_else(|| PipelineError::MissingScore(r.id.clone()))
                    })
                    .collect()
            }
        }
    }
}

/// Annotate and score `records`, returning one [`Scored`] per record in input order.
pub fn process(
    records: &[TweetRecord],
    annotator: &Annotator<'_>,
    scorer: &mut Scorer,
) -> Result<Vec<Scored>, PipelineError> {
    let annotations = annotator.annotate_all(records);
    let topical: Vec<(&TweetRecord, &Annotation)> = records
        .iter()
        .zip(&annotations)
        .filter(|(_, a)| a.topical)
        .collect();
    let mut labels = scorer.score(&topical)?.into_iter();
    let scored = records
        .iter()
        .zip(&annotations)
        .map(|(r, a)| Scored {
            id: r.id.clone(),
            created_at: r.created_at,
            country: a.location.as_ref().map(|t| t.country_code),
            sentiment: if a.topical { labels.next() } else { None },
        })
        .collect();
    Ok(scored)
}

/// [`process`] followed by aggregation into mergeable buckets.
pub fn process_to_buckets(
    records: &[TweetRecord],
    annotator: &Annotator<'_>,
    scorer: &mut Scorer,
    schedule: &Schedule,
) -> Result<Buckets, PipelineError> {
    let mut buckets = Buckets::new();
    for s in process(records, annotator, scorer)? {
        buckets.add(&s, schedule)?;
    }
    Ok(buckets)
}
