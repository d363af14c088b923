//! Geotagged topical sentiment trends for tweet corpora.
//!
//! The pipeline resolves each tweet to a country through a GeoNames-derived
//! [`gazetteer`], keeps the tweets that mention terms from an economics
//! [`lexicon`], scores their [`sentiment`], and aggregates them into weekly
//! per-country buckets ([`pipeline`]) that can be joined with official case
//! counts and analysed for correlation and peaks ([`analysis`]).
//!
//! Both dictionaries are compiled into the shared [`matcher`] automaton.
//! Scoring and analysis are generic over the [`Scalar`] float type; the
//! aliases at the crate root fix it to `f64`.

pub mod analysis;
pub mod gazetteer;
pub mod lexicon;
pub mod matcher;
pub mod pipeline;
pub mod scalar;
pub mod sentiment;
pub mod table;
pub mod text;

pub use gazetteer::{CountryCode, GeoEntry, GeoKind, Gazetteer, LocationSource, LocationTag};
pub use lexicon::{LexiconTerm, TermCategory, TermOrigin, TopicLexicon};
pub use matcher::{Automaton, MatchOptions, MatchSpan, PatternSet};
pub use pipeline::{Schedule, TweetRecord, WeeklyBucket};
pub use scalar::Scalar;
pub use sentiment::SentimentLabel;

pub type SentimentScore = sentiment::SentimentScore<f64>;
pub type ValenceLexicon = sentiment::ValenceLexicon<f64>;
pub type LexiconScorer = sentiment::LexiconScorer<f64>;
pub type TrendSeries = analysis::TrendSeries<f64>;
pub type PeakReport = analysis::PeakReport<f64>;
pub type CountryReport = analysis::CountryReport<f64>;
