//! Sentiment scoring.
//!
//! [`LexiconScorer`] is a self-contained valence-lexicon scorer with
//! negation handling. [`external`] drives an out-of-process model adapter
//! over a newline-delimited JSON protocol, keeping model dependencies out
//! of this crate.

pub mod external;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;
use crate::table::{for_each_row, LoadError, RowIssue};
use crate::text::{normalize, tokens};

pub const DEFAULT_DEAD_BAND: f64 = 0.05;
pub const DEFAULT_NEGATION_WINDOW: usize = 3;

const BUILTIN_VALENCE: &str = include_str!("../../data/valence.tsv");

#[derive(Debug, Error)]
pub enum SentimentError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("valence weight for {token:?} outside [-1, 1]: {weight}")]
    WeightOutOfRange { token: String, weight: f64 },
    #[error("negation window must be at least 1")]
    ZeroNegationWindow,
    #[error("dead band must be within [0, 1)")]
    DeadBand,
    #[error("confidence {0} outside [0, 1]")]
    Confidence(f64),
    #[error("valence table line {}: {}", .0.line, .0.reason)]
    MalformedRow(RowIssue),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SentimentLabel {
    Positive,
    Negative,
    Neutral,
}

impl SentimentLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Positive => "positive",
            Self::Negative => "negative",
            Self::Neutral => "neutral",
        }
    }
}

impl FromStr for SentimentLabel {
    type Err = String;

    /// Exact protocol tokens only; anything else is the caller's error.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "positive" => Ok(Self::Positive),
            "negative" => Ok(Self::Negative),
            "neutral" => Ok(Self::Neutral),
            other => Err(other.to_string()),
        }
    }
}

impl fmt::Display for SentimentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentimentScore<S> {
    pub label: SentimentLabel,
    pub confidence: S,
}

impl<S: Scalar> SentimentScore<S> {
    pub fn new(label: SentimentLabel, confidence: S) -> Result<Self, SentimentError> {
        if !(confidence >= S::zero() && confidence <= S::one()) {
            return Err(SentimentError::Confidence(confidence.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(Self { label, confidence })
    }
}

/// Token valences plus negation handling parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ValenceLexicon<S> {
    entries: HashMap<String, S>,
    negation_tokens: HashSet<String>,
    negation_window: usize,
}

impl<S: Scalar> ValenceLexicon<S> {
    pub fn new(
        entries: impl IntoIterator<Item = (String, S)>,
        negation_tokens: impl IntoIterator<Item = String>,
        negation_window: usize,
    ) -> Result<Self, SentimentError> {
        if negation_window == 0 {
            return Err(SentimentError::ZeroNegationWindow);
        }
        let mut map = HashMap::new();
        for (token, weight) in entries {
            if !(weight >= -S::one() && weight <= S::one()) {
                return Err(SentimentError::WeightOutOfRange {
                    token,
                    weight: weight.to_f64().unwrap_or(f64::NAN),
                });
            }
            map.insert(normalize(&token), weight);
        }
        Ok(Self {
            entries: map,
            negation_tokens: negation_tokens.into_iter().map(|t| normalize(&t)).collect(),
            negation_window,
        })
    }

    /// Parse `token<TAB>weight` rows; a weight of `negation` marks a negation token.
    pub fn parse_tsv(source: &str, negation_window: usize) -> Result<Self, SentimentError> {
        let mut entries = Vec::new();
        let mut negations = Vec::new();
        for (idx, line) in source.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let row = Self::parse_row(idx + 1, &line.split('\t').collect::<Vec<_>>())?;
            match row {
                ValenceRow::Weight(t, w) => entries.push((t, w)),
                ValenceRow::Negation(t) => negations.push(t),
            }
        }
        Self::new(entries, negations, negation_window)
    }

    pub fn load(path: &Path, negation_window: usize) -> Result<Self, SentimentError> {
        let mut entries = Vec::new();
        let mut negations = Vec::new();
        let mut first_error = None;
        for_each_row(path, |line, cols| match Self::parse_row(line, &cols) {
            Ok(ValenceRow::Weight(t, w)) => entries.push((t, w)),
            Ok(ValenceRow::Negation(t)) => negations.push(t),
            Err(e) => {
                first_error.get_or_insert(e);
            }
        })?;
        if let Some(e) = first_error {
            return Err(e);
        }
        Self::new(entries, negations, negation_window)
    }

    /// The small general-purpose table bundled with the crate.
    pub fn builtin() -> Self {
        Self::parse_tsv(BUILTIN_VALENCE, DEFAULT_NEGATION_WINDOW).expect("bundled valence table is valid")
    }

    fn parse_row(line: usize, cols: &[&str]) -> Result<ValenceRow<S>, SentimentError> {
        let malformed = |reason: &str| SentimentError::MalformedRow(RowIssue::new(line, reason));
        let [token, weight, ..] = cols else {
            return Err(malformed("expected token<TAB>weight"));
        };
        let token = token.trim().to_string();
        if token.is_empty() {
            return Err(malformed("empty token"));
        }
        if weight.trim().eq_ignore_ascii_case("negation") {
            return Ok(ValenceRow::Negation(token));
        }
        let weight: f64 = weight.trim().parse().map_err(|_| malformed("weight is not a number"))?;
        Ok(ValenceRow::Weight(token, S::of(weight)))
    }

    pub fn with_negation_window(mut self, window: usize) -> Result<Self, SentimentError> {
        if window == 0 {
            return Err(SentimentError::ZeroNegationWindow);
        }
        self.negation_window = window;
        Ok(self)
    }

    pub fn valence(&self, token: &str) -> Option<S> {
        self.entries.get(token).copied()
    }

    pub fn is_negation(&self, token: &str) -> bool {
        self.negation_tokens.contains(token)
    }

    pub fn negation_window(&self) -> usize {
        self.negation_window
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

enum ValenceRow<S> {
    Weight(String, S),
    Negation(String),
}

/// Rule-based scorer over a [`ValenceLexicon`].
///
/// The mean valence `s` of the lexicon tokens in a text (signs flipped for
/// tokens within `negation_window` tokens after a negation) is labelled
/// positive above `+dead_band`, negative below `-dead_band`, and neutral in
/// between.
#[derive(Debug, Clone)]
pub struct LexiconScorer<S> {
    lexicon: ValenceLexicon<S>,
    dead_band: S,
}

impl<S: Scalar> LexiconScorer<S> {
    pub fn new(lexicon: ValenceLexicon<S>, dead_band: S) -> Result<Self, SentimentError> {
        if !(dead_band >= S::zero() && dead_band < S::one()) {
            return Err(SentimentError::DeadBand);
        }
        Ok(Self { lexicon, dead_band })
    }

    pub fn with_default_band(lexicon: ValenceLexicon<S>) -> Self {
        Self::new(lexicon, S::of(DEFAULT_DEAD_BAND)).expect("default dead band is valid")
    }

    pub fn lexicon(&self) -> &ValenceLexicon<S> {
        &self.lexicon
    }

    pub fn dead_band(&self) -> S {
        self.dead_band
    }

    /// Mean signed valence over the lexicon tokens in normalized `text`.
    pub fn polarity_prepared(&self, text: &str) -> S {
        let mut raw = S::zero();
        let mut hits = 0usize;
        // Last token position covered by the most recent negation.
        let mut negated_through: Option<usize> = None;
        for (pos, token) in tokens(text).enumerate() {
            let negated = negated_through.is_some_and(|last| pos <= last);
            if let Some(weight) = self.lexicon.valence(token) {
                raw = raw + if negated { -weight } else { weight };
                hits += 1;
            }
            if self.lexicon.is_negation(token) {
                negated_through = Some(pos + self.lexicon.negation_window);
            }
        }
        raw / S::of_count(hits.max(1))
    }

    pub fn score(&self, text: &str) -> SentimentScore<S> {
        self.score_prepared(&normalize(text))
    }

    pub fn score_prepared(&self, text: &str) -> SentimentScore<S> {
        self.label_polarity(self.polarity_prepared(text))
    }

    /// Map a polarity `s` to a label and confidence.
    pub fn label_polarity(&self, s: S) -> SentimentScore<S> {
        let magnitude = s.abs().min(S::one());
        let (label, confidence) = if s > self.dead_band {
            (SentimentLabel::Positive, magnitude)
        } else if s < -self.dead_band {
            (SentimentLabel::Negative, magnitude)
        } else if self.dead_band == S::zero() {
            (SentimentLabel::Neutral, S::one())
        } else {
            let c = S::one() - magnitude / self.dead_band;
            (SentimentLabel::Neutral, c.max(S::zero()).min(S::one()))
        };
        SentimentScore { label, confidence }
    }
}
