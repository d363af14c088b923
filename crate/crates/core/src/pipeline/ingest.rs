//! NDJSON tweet ingestion.

use std::collections::HashSet;
use std::io::{self, BufRead};

use chrono::{DateTime, NaiveDateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

/// Share of malformed lines above which the corpus is rejected outright.
pub const MAX_MALFORMED_FRACTION: f64 = 0.10;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("tweet stream unreadable: {0}")]
    UnreadableStream(#[from] io::Error),
    #[error("{malformed} of {lines} lines are malformed; corpus presumed corrupt")]
    CorruptCorpus { malformed: usize, lines: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub id: String,
    pub created_at: DateTime<Utc>,
    pub text: String,
    pub user_location: Option<String>,
    pub lang: Option<String>,
    pub is_retweet: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestFilters {
    /// Primary language subtag to keep; records without a `lang` are kept.
    pub lang: Option<String>,
    pub drop_retweets: bool,
}

impl Default for IngestFilters {
    fn default() -> Self {
        Self {
            lang: Some("en".to_string()),
            drop_retweets: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestStats {
    /// Non-blank input lines.
    pub lines: usize,
    pub kept: usize,
    pub malformed: usize,
    pub duplicates: usize,
    pub dropped_lang: usize,
    pub dropped_retweets: usize,
}

#[derive(Debug, Clone)]
pub struct Ingested {
    pub records: Vec<TweetRecord>,
    pub stats: IngestStats,
}

#[derive(Deserialize)]
struct RawUser {
    location: Option<String>,
}

#[derive(Deserialize)]
struct RawTweet {
    id: Value,
    created_at: String,
    text: Option<String>,
    full_text: Option<String>,
    user: Option<RawUser>,
    user_location: Option<String>,
    lang: Option<String>,
    retweeted_status: Option<serde::de::IgnoredAny>,
}

/// Read one tweet per line, preserving input order.
///
/// Lines that are not a JSON object with `id`, `created_at` and `text` are
/// logged and skipped; if more than [`MAX_MALFORMED_FRACTION`] of the lines
/// are malformed the whole stream is rejected.
pub fn ingest<R: BufRead>(reader: R, filters: &IngestFilters) -> Result<Ingested, IngestError> {
    let mut stats = IngestStats::default();
    let mut seen = HashSet::new();
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        stats.lines += 1;
        let record = match parse_line(&line) {
            Ok(r) => r,
            Err(reason) => {
                log::warn!("tweet line {}: {reason}", idx + 1);
                stats.malformed += 1;
                continue;
            }
        };
        if !seen.insert(record.id.clone()) {
            stats.duplicates += 1;
            continue;
        }
        if !lang_matches(record.lang.as_deref(), filters.lang.as_deref()) {
            stats.dropped_lang += 1;
            continue;
        }
        if filters.drop_retweets && record.is_retweet {
            stats.dropped_retweets += 1;
            continue;
        }
        records.push(record);
    }
    if stats.malformed as f64 > MAX_MALFORMED_FRACTION * stats.lines as f64 {
        return Err(IngestError::CorruptCorpus {
            malformed: stats.malformed,
            lines: stats.lines,
        });
    }
    stats.kept = records.len();
    Ok(Ingested { records, stats })
}

fn lang_matches(lang: Option<&str>, wanted: Option<&str>) -> bool {
    match (lang, wanted) {
        (_, None) | (None, _) => true,
        (Some(lang), Some(wanted)) => {
            let primary = lang.split(['-', '_']).next().unwrap_or(lang);
            primary.eq_ignore_ascii_case(wanted)
        }
    }
}

fn parse_line(line: &str) -> Result<TweetRecord, String> {
    let raw: RawTweet = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let id = match raw.id {
        Value::String(s) => s,
        Value::Number(n) => n.to_string(),
        other => return Err(format!("id must be a string, found {other}")),
    };
    if id.is_empty() {
        return Err("empty id".to_string());
    }
    let text = raw
        .text
        .or(raw.full_text)
        .ok_or_else(|| "missing text".to_string())?;
    let created_at = parse_timestamp(&raw.created_at)?;
    let user_location = raw
        .user
        .and_then(|u| u.location)
        .or(raw.user_location)
        .filter(|l| !l.trim().is_empty());
    Ok(TweetRecord {
        id,
        created_at,
        text,
        user_location,
        lang: raw.lang,
        is_retweet: raw.retweeted_status.is_some(),
    })
}

/// ISO-8601 / RFC 3339 timestamps; zone-less values are taken as UTC. The
/// legacy Twitter API layout (`Tue Mar 24 10:00:00 +0000 2020`) is accepted too.
pub fn parse_timestamp(raw: &str) -> Result<DateTime<Utc>, String> {
    let raw = raw.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(raw) {
        return Ok(t.with_timezone(&Utc));
    }
    for layout in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(raw, layout) {
            return Ok(t.and_utc());
        }
    }
    if let Ok(t) = DateTime::parse_from_str(raw, "%a %b %d %H:%M:%S %z %Y") {
        return Ok(t.with_timezone(&Utc));
    }
    Err(format!("unparseable created_at {raw:?}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(input: &str) -> Result<Ingested, IngestError> {
        ingest(input.as_bytes(), &IngestFilters::default())
    }

    #[test]
    fn language_filter() {
        let input = r#"{"id":"1","created_at":"2020-03-24T10:00:00Z","text":"a","lang":"en"}
{"id":"2","created_at":"2020-03-24T10:00:00Z","text":"b","lang":"es"}
{"id":"3","created_at":"2020-03-24T10:00:00Z","text":"c","lang":"en-GB"}
"#;
        let out = run(input).unwrap();
        assert_eq!(out.records.iter().map(|r| r.id.as_str()).collect::<Vec<_>>(), ["1", "3"]);
        assert_eq!(out.stats.dropped_lang, 1);
    }

    #[test]
    fn duplicate_ids() {
        let input = r#"{"id":"1","created_at":"2020-03-24T10:00:00Z","text":"a"}
{"id":"1","created_at":"2020-03-24T11:00:00Z","text":"a again"}
"#;
        let out = run(input).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.stats.duplicates, 1);
        assert_eq!(out.records[0].text, "a");
    }

    #[test]
    fn empty_stream() {
        let out = run("").unwrap();
        assert!(out.records.is_empty());
        assert_eq!(out.stats, IngestStats::default());
    }

    #[test]
    fn field_variants() {
        let input = r#"{"id":1234,"created_at":"Tue Mar 24 10:00:00 +0000 2020","text":"x","user":{"location":"Paris"}}
{"id":"5","created_at":"2020-03-24 09:30:00","text":"y","user_location":"Rome","retweeted_status":{"id":"1"}}
"#;
        let out = ingest(
            input.as_bytes(),
            &IngestFilters {
                lang: None,
                drop_retweets: false,
            },
        )
        .unwrap();
        assert_eq!(out.records[0].id, "1234");
        assert_eq!(out.records[0].user_location.as_deref(), Some("Paris"));
        assert_eq!(out.records[0].created_at.to_rfc3339(), "2020-03-24T10:00:00+00:00");
        assert_eq!(out.records[1].user_location.as_deref(), Some("Rome"));
        assert!(out.records[1].is_retweet);
    }

    #[test]
    fn retweets_dropped_by_default() {
        let input = r#"{"id":"5","created_at":"2020-03-24T09:30:00Z","text":"y","retweeted_status":{}}"#;
        let out = run(input).unwrap();
        assert!(out.records.is_empty());
        assert_eq!(out.stats.dropped_retweets, 1);
    }

    #[test]
    fn malformed_lines_tolerated_up_to_ten_percent() {
        let good = r#"{"id":"ID","created_at":"2020-03-24T10:00:00Z","text":"t"}"#;
        let mut input: Vec<String> = (0..9).map(|i| good.replace("ID", &i.to_string())).collect();
        input.push("{not json".to_string());
        let out = run(&input.join("\n")).unwrap();
        assert_eq!((out.records.len(), out.stats.malformed), (9, 1));

        input.push(r#"{"id":"x","text":"no date"}"#.to_string());
        assert!(matches!(
            run(&input.join("\n")),
            Err(IngestError::CorruptCorpus { malformed: 2, lines: 11 })
        ));
    }

    #[test]
    fn timestamps() {
        assert!(parse_timestamp("2020-03-24T10:00:00+02:00").is_ok());
        assert!(parse_timestamp("2020-03-24T10:00:00.123").is_ok());
        assert!(parse_timestamp("yesterday").is_err());
    }
}
