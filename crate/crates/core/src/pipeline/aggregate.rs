//! Weekly per-country bucket aggregation.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::AddAssign;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::schedule::Schedule;
use crate::gazetteer::{CountryCode, EntryError};
use crate::sentiment::SentimentLabel;

pub const WORLD: &str = "WORLD";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AggregateError {
    #[error("record {id} created at {created_at} falls outside the schedule")]
    UnscheduledDate { id: String, created_at: DateTime<Utc> },
    #[error("topical record {0} has no sentiment score")]
    MissingSentiment(String),
}

/// A bucket's geography: one country or the whole corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Region {
    Country(CountryCode),
    World,
}

impl Region {
    pub fn as_str(&self) -> &str {
        match self {
            Self::Country(c) => c.as_str(),
            Self::World => WORLD,
        }
    }
}

// Buckets sort by the rendered code, so WORLD lands among the countries
// alphabetically.
impl Ord for Region {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.as_str().cmp(other.as_str())
    }
}

impl PartialOrd for Region {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl FromStr for Region {
    type Err = EntryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == WORLD {
            Ok(Self::World)
        } else {
            s.parse().map(Self::Country)
        }
    }
}

impl TryFrom<String> for Region {
    type Error = EntryError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Region> for String {
    fn from(r: Region) -> Self {
        r.as_str().to_string()
    }
}

impl From<CountryCode> for Region {
    fn from(c: CountryCode) -> Self {
        Self::Country(c)
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Counts {
    pub n_sampled: u64,
    pub n_topical: u64,
    pub n_positive: u64,
    pub n_negative: u64,
    pub n_neutral: u64,
}

impl Counts {
    fn add_record(&mut self, sentiment: Option<SentimentLabel>) {
        self.n_sampled += 1;
        if let Some(label) = sentiment {
            self.n_topical += 1;
            match label {
                SentimentLabel::Positive => self.n_positive += 1,
                SentimentLabel::Negative => self.n_negative += 1,
                SentimentLabel::Neutral => self.n_neutral += 1,
            }
        }
    }

    /// `positive + negative + neutral == topical <= sampled`.
    pub fn is_consistent(&self) -> bool {
        self.n_positive + self.n_negative + self.n_neutral == self.n_topical && self.n_topical <= self.n_sampled
    }
}

impl AddAssign for Counts {
    fn add_assign(&mut self, rhs: Self) {
        self.n_sampled += rhs.n_sampled;
        self.n_topical += rhs.n_topical;
        self.n_positive += rhs.n_positive;
        self.n_negative += rhs.n_negative;
        self.n_neutral += rhs.n_neutral;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeeklyBucket {
    pub country_code: Region,
    pub week_index: usize,
    #[serde(flatten)]
    pub counts: Counts,
}

/// One processed tweet as the aggregator sees it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scored {
    pub id: String,
    pub created_at: DateTime<Utc>,
    pub country: Option<CountryCode>,
    /// `Some` exactly when the tweet is topical.
    pub sentiment: Option<SentimentLabel>,
}

impl Scored {
    pub fn new(
        id: impl Into<String>,
        created_at: DateTime<Utc>,
        country: Option<CountryCode>,
        topical: bool,
        sentiment: Option<SentimentLabel>,
    ) -> Result<Self, AggregateError> {
        let id = id.into();
        let sentiment = match (topical, sentiment) {
            (true, None) => return Err(AggregateError::MissingSentiment(id)),
            (true, s) => s,
            (false, _) => None,
        };
        Ok(Self {
            id,
            created_at,
            country,
            sentiment,
        })
    }
}

/// Mergeable bucket accumulator keyed by `(region, week)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Buckets {
    cells: BTreeMap<(Region, usize), Counts>,
}

impl Buckets {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, record: &Scored, schedule: &Schedule) -> Result<(), AggregateError> {
        let week = schedule
            .week_of(record.created_at.date_naive())
            .ok_or_else(|| AggregateError::UnscheduledDate {
                id: record.id.clone(),
                created_at: record.created_at,
            })?;
        self.cells.entry((Region::World, week)).or_default().add_record(record.sentiment);
        if let Some(country) = record.country {
            self.cells
                .entry((Region::Country(country), week))
                .or_default()
                .add_record(record.sentiment);
        }
        Ok(())
    }

    /// Fieldwise sum.
    pub fn merge(&mut self, other: Buckets) {
        for (key, counts) in other.cells {
            *self.cells.entry(key).or_default() += counts;
        }
    }

    pub fn get(&self, region: Region, week_index: usize) -> Option<&Counts> {
        self.cells.get(&(region, week_index))
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Buckets sorted by `(country_code, week_index)`.
    pub fn to_vec(&self) -> Vec<WeeklyBucket> {
        self.cells
            .iter()
            .map(|(&(country_code, week_index), &counts)| WeeklyBucket {
                country_code,
                week_index,
                counts,
            })
            .collect()
    }
}

impl FromIterator<WeeklyBucket> for Buckets {
    fn from_iter<I: IntoIterator<Item = WeeklyBucket>>(iter: I) -> Self {
        let mut out = Self::default();
        for b in iter {
            *out.cells.entry((b.country_code, b.week_index)).or_default() += b.counts;
        }
        out
    }
}

/// Count records into one bucket per (country, week) that has at least one
/// record, plus a WORLD bucket per week covering every record, including
/// those without a resolved location.
pub fn aggregate(records: &[Scored], schedule: &Schedule) -> Result<Vec<WeeklyBucket>, AggregateError> {
    let mut buckets = Buckets::new();
    for r in records {
        buckets.add(r, schedule)?;
    }
    Ok(buckets.to_vec())
}
