//! Official case counts and the trend table.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::aggregate::{Counts, Region, WeeklyBucket};
use super::schedule::Schedule;
use crate::table::{open, LoadError};

pub const CASES_COLUMNS: [&str; 3] = ["date", "country_code", "new_cases"];

pub const TREND_COLUMNS: [&str; 9] = [
    "country_code",
    "week_index",
    "week_ending",
    "n_sampled",
    "n_topical",
    "n_positive",
    "n_negative",
    "n_neutral",
    "new_cases",
];

#[derive(Debug, Error)]
pub enum CsvError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("malformed CSV: missing column {0:?}")]
    MissingColumn(String),
    #[error("malformed CSV at line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
}

fn column_index(headers: &csv::StringRecord, name: &str) -> Result<usize, CsvError> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| CsvError::MissingColumn(name.to_string()))
}

fn row_error(record: &csv::StringRecord, reason: impl Into<String>) -> CsvError {
    CsvError::MalformedRow {
        line: record.position().map_or(0, |p| p.line()),
        reason: reason.into(),
    }
}

/// Daily new-case counts per region.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CaseTable {
    daily: BTreeMap<Region, BTreeMap<NaiveDate, u64>>,
}

impl CaseTable {
    pub fn load(path: &Path) -> Result<Self, CsvError> {
        Self::from_reader(open(path)?)
    }

    /// Parse `date,country_code,new_cases` rows (extra columns ignored).
    /// Empty `new_cases` cells are skipped; repeated dates are summed.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self, CsvError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let [date_col, country_col, cases_col] = CASES_COLUMNS.map(|c| column_index(&headers, c));
        let (date_col, country_col, cases_col) = (date_col?, country_col?, cases_col?);

        let mut table = Self::default();
        for record in rdr.records() {
            let record = record?;
            let field = |i: usize| record.get(i).unwrap_or("");
            if field(cases_col).is_empty() {
                continue;
            }
            let date: NaiveDate = field(date_col)
                .parse()
                .map_err(|_| row_error(&record, format!("bad date {:?}", field(date_col))))?;
            let region: Region = field(country_col)
                .parse()
                .map_err(|_| row_error(&record, format!("bad country_code {:?}", field(country_col))))?;
            let cases = parse_count(field(cases_col)).map_err(|r| row_error(&record, r))?;
            *table.daily.entry(region).or_default().entry(date).or_default() += cases;
        }
        Ok(table)
    }

    pub fn insert(&mut self, region: Region, date: NaiveDate, cases: u64) {
        *self.daily.entry(region).or_default().entry(date).or_default() += cases;
    }

    pub fn contains(&self, region: Region) -> bool {
        self.daily.contains_key(&region) || (region == Region::World && !self.daily.is_empty())
    }

    fn daily_for(&self, region: Region, date: NaiveDate) -> u64 {
        match (region, self.daily.get(&region)) {
            (_, Some(days)) => days.get(&date).copied().unwrap_or(0),
            // Without explicit WORLD rows the world series is the sum over countries.
            (Region::World, None) => self.daily.values().filter_map(|days| days.get(&date)).sum(),
            (Region::Country(_), None) => 0,
        }
    }

    /// New cases in the 7-day window ending on the week's Tuesday, or
    /// `None` if the region never appears in the table.
    pub fn weekly(&self, region: Region, schedule: &Schedule, week_index: usize) -> Option<u64> {
        if !self.contains(region) {
            return None;
        }
        Some(schedule.window(week_index)?.map(|d| self.daily_for(region, d)).sum())
    }
}

fn parse_count(raw: &str) -> Result<u64, String> {
    if let Ok(n) = raw.parse::<u64>() {
        return Ok(n);
    }
    match raw.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x < u64::MAX as f64 => Ok(x as u64),
        _ => Err(format!("new_cases {raw:?} is not a non-negative integer")),
    }
}

/// One output row: a bucket with its week-ending date and weekly case count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrendRow {
    pub bucket: WeeklyBucket,
    pub week_ending: NaiveDate,
    pub new_cases: Option<u64>,
}

/// Attach weekly case totals to every bucket.
pub fn join_cases(buckets: &[WeeklyBucket], cases: &CaseTable, schedule: &Schedule) -> Vec<TrendRow> {
    buckets
        .iter()
        .filter_map(|b| {
            Some(TrendRow {
                bucket: *b,
                week_ending: schedule.week_ending(b.week_index)?,
                new_cases: cases.weekly(b.country_code, schedule, b.week_index),
            })
        })
        .collect()
}

pub fn write_trend_csv<W: Write>(rows: &[TrendRow], writer: W) -> Result<(), CsvError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(TREND_COLUMNS)?;
    for r in rows {
        let c = r.bucket.counts;
        w.write_record([
            r.bucket.country_code.to_string(),
            r.bucket.week_index.to_string(),
            r.week_ending.to_string(),
            c.n_sampled.to_string(),
            c.n_topical.to_string(),
            c.n_positive.to_string(),
            c.n_negative.to_string(),
            c.n_neutral.to_string(),
            r.new_cases.map(|n| n.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_trend_csv<R: Read>(reader: R) -> Result<Vec<TrendRow>, CsvError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let mut idx = [0usize; TREND_COLUMNS.len()];
    for (slot, name) in idx.iter_mut().zip(TREND_COLUMNS) {
        *slot = column_index(&headers, name)?;
    }
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let field = |k: usize| record.get(idx[k]).unwrap_or("");
        let count = |k: usize| -> Result<u64, CsvError> {
            field(k)
                .parse()
                .map_err(|_| row_error(&record, format!("{} {:?} is not a count", TREND_COLUMNS[k], field(k))))
        };
        let country_code: Region = field(0)
            .parse()
            .map_err(|_| row_error(&record, format!("bad country_code {:?}", field(0))))?;
        let week_index: usize = field(1)
            .parse()
            .ok()
            .filter(|w| *w >= 1)
            .ok_or_else(|| row_error(&record, format!("bad week_index {:?}", field(1))))?;
        let week_ending: NaiveDate = field(2)
            .parse()
            .map_err(|_| row_error(&record, format!("bad week_ending {:?}", field(2))))?;
        let counts = Counts {
            n_sampled: count(3)?,
            n_topical: count(4)?,
            n_positive: count(5)?,
            n_negative: count(6)?,
            n_neutral: count(7)?,
        };
        if !counts.is_consistent() {
            return Err(row_error(&record, "bucket counts are inconsistent"));
        }
        let new_cases = match field(8) {
            "" => None,
            _ => Some(count(8)?),
        };
        rows.push(TrendRow {
            bucket: WeeklyBucket {
                country_code,
                week_index,
                counts,
            },
            week_ending,
            new_cases,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schedule() -> Schedule {
        Schedule::tuesdays("2020-03-23".parse().unwrap(), "2020-03-31".parse().unwrap()).unwrap()
    }

    fn bucket(cc: &str, week: usize, topical: u64) -> WeeklyBucket {
        WeeklyBucket {
            country_code: cc.parse().unwrap(),
            week_index: week,
            counts: Counts {
                n_sampled: topical + 1,
                n_topical: topical,
                n_positive: topical,
                ..Counts::default()
            },
        }
    }

    #[test]
    fn weekly_sum_over_seven_days() {
        // Daily 1..7 for the week ending Tuesday 2020-03-24.
        let csv: String = std::iter::once("date,country_code,new_cases\n".to_string())
            .chain((18..=24).zip(1..=7).map(|(d, n)| format!("2020-03-{d},US,{n}\n")))
            .collect();
        let table = CaseTable::from_reader(csv.as_bytes()).unwrap();
        assert_eq!(table.weekly("US".parse().unwrap(), &schedule(), 1), Some(28));
    }

    #[test]
    fn absent_country_has_no_case_count() {
        let table = CaseTable::from_reader("date,country_code,new_cases\n2020-03-24,US,5\n".as_bytes()).unwrap();
        let rows = join_cases(&[bucket("FR", 1, 2), bucket("US", 1, 1)], &table, &schedule());
        assert_eq!(rows[0].new_cases, None);
        assert_eq!(rows[1].new_cases, Some(5));
        let mut out = Vec::new();
        write_trend_csv(&rows, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.contains("FR,1,2020-03-24,3,2,2,0,0,\n"), "{text}");
    }

    #[test]
    fn world_cases_sum_countries_unless_explicit() {
        let csv = "date,country_code,new_cases\n2020-03-24,US,5\n2020-03-20,FR,2\n2020-03-25,FR,4\n";
        let table = CaseTable::from_reader(csv.as_bytes()).unwrap();
        let s = schedule();
        assert_eq!(table.weekly(Region::World, &s, 1), Some(7));
        assert_eq!(table.weekly(Region::World, &s, 2), Some(4));

        let explicit = format!("{csv}2020-03-24,WORLD,100\n");
        let table = CaseTable::from_reader(explicit.as_bytes()).unwrap();
        assert_eq!(table.weekly(Region::World, &s, 1), Some(100));
    }

    #[test]
    fn cases_csv_errors() {
        let err = CaseTable::from_reader("date,country,new_cases\n".as_bytes()).unwrap_err();
        assert!(matches!(err, CsvError::MissingColumn(ref c) if c == "country_code"));
        let err = CaseTable::from_reader("date,country_code,new_cases\n2020-03-24,US,-3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, CsvError::MalformedRow { line: 2, .. }), "{err}");
        let ok = CaseTable::from_reader("date,country_code,new_cases\n2020-03-24,US,3.0\n2020-03-23,US,\n".as_bytes());
        assert!(ok.is_ok());
    }

    #[test]
    fn trend_csv_round_trip() {
        let table = CaseTable::from_reader("date,country_code,new_cases\n2020-03-24,US,5\n".as_bytes()).unwrap();
        let rows = join_cases(&[bucket("US", 1, 1), bucket("WORLD", 2, 3)], &table, &schedule());
        let mut out = Vec::new();
        write_trend_csv(&rows, &mut out).unwrap();
        assert!(out.starts_with(TREND_COLUMNS.join(",").as_bytes()));
        assert_eq!(read_trend_csv(out.as_slice()).unwrap(), rows);
    }

    #[test]
    fn trend_csv_missing_column_is_named() {
        let err = read_trend_csv("country_code,week_index\nUS,1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, CsvError::MissingColumn(ref c) if c == "week_ending"));
    }
}
