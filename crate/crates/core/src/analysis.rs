//! Trend analysis: tweet/case correlation and peak detection.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pipeline::{Counts, Region, TrendRow};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, Error, PartialEq, Eq, Serialize, Deserialize)]
pub enum AnalysisError {
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("series of length {0} is too short")]
    TooShort(usize),
    #[error("series has zero variance; correlation is undefined")]
    ConstantSeries,
    #[error("series contains a non-finite value")]
    NonFinite,
    #[error("no case counts for this region")]
    MissingCases,
}

/// Pearson product-moment correlation of two equal-length series.
pub fn pearson<S: Scalar>(a: &[S], b: &[S]) -> Result<S, AnalysisError> {
    if a.len() != b.len() {
        return Err(AnalysisError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 2 {
        return Err(AnalysisError::TooShort(a.len()));
    }
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(AnalysisError::NonFinite);
    }
    // Compare against the first element rather than testing the variance
    // sum, which rounding can leave slightly non-zero.
    let constant = |s: &[S]| s.iter().all(|x| *x == s[0]);
    if constant(a) || constant(b) {
        return Err(AnalysisError::ConstantSeries);
    }
    let n = S::of_count(a.len());
    let mean_a = a.iter().copied().sum::<S>() / n;
    let mean_b = b.iter().copied().sum::<S>() / n;
    let (mut sab, mut saa, mut sbb) = (S::zero(), S::zero(), S::zero());
    for (&x, &y) in a.iter().zip(b) {
        let (dx, dy) = (x - mean_a, y - mean_b);
        sab = sab + dx * dy;
        saa = saa + dx * dx;
        sbb = sbb + dy * dy;
    }
    let r = sab / (saa.sqrt() * sbb.sqrt());
    Ok(r.max(-S::one()).min(S::one()))
}

/// A local maximum at 1-based `week_index`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak<S> {
    pub week_index: usize,
    pub height: S,
}

/// Strict local maxima of `values`, the `k` highest returned in week order.
///
/// Interior points must exceed both neighbours; endpoints need only exceed
/// their single neighbour. Equal heights rank the earlier week first.
pub fn detect_peaks<S: Scalar>(values: &[S], k: usize) -> Vec<Peak<S>> {
    let n = values.len();
    let mut peaks: Vec<Peak<S>> = (0..n)
        .filter(|&i| {
            let v = values[i];
            let above_left = i == 0 || v > values[i - 1];
            let above_right = i + 1 == n || v > values[i + 1];
            n > 1 && above_left && above_right
        })
        .map(|i| Peak {
            week_index: i + 1,
            height: values[i],
        })
        .collect();
    peaks.sort_by(|a, b| {
        b.height
            .partial_cmp(&a.height)
            .unwrap_or(Ordering::Equal)
            .then(a.week_index.cmp(&b.week_index))
    });
    peaks.truncate(k);
    peaks.sort_by_key(|p| p.week_index);
    peaks
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SentimentBalance {
    PositiveDominant,
    NegativeDominant,
    Tied,
}

impl SentimentBalance {
    pub fn of(positive: u64, negative: u64) -> Self {
        match positive.cmp(&negative) {
            Ordering::Greater => Self::PositiveDominant,
            Ordering::Less => Self::NegativeDominant,
            Ordering::Equal => Self::Tied,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakReport<S> {
    pub week_index: usize,
    pub height: S,
    pub sentiment_balance: SentimentBalance,
}

/// One region's weekly series on the `1..=W` axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendSeries<S> {
    pub country_code: Region,
    pub values: Vec<S>,
}

impl<S: Scalar> TrendSeries<S> {
    pub fn new(country_code: Region, values: Vec<S>) -> Self {
        Self { country_code, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value at 1-based week.
    pub fn week(&self, week_index: usize) -> Option<S> {
        week_index.checked_sub(1).and_then(|i| self.values.get(i)).copied()
    }
}

/// A region's rows laid out on the full week axis.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionTable {
    pub country_code: Region,
    pub counts: Vec<Counts>,
    pub cases: Vec<Option<u64>>,
    /// Weeks with no row, imputed as zero counts.
    pub imputed_weeks: Vec<usize>,
}

impl RegionTable {
    pub fn from_rows<'a>(country_code: Region, rows: impl IntoIterator<Item = &'a TrendRow>, weeks: usize) -> Self {
        let mut counts = vec![None; weeks];
        let mut cases = vec![None; weeks];
        for row in rows.into_iter().filter(|r| r.bucket.country_code == country_code) {
            if let Some(i) = row.bucket.week_index.checked_sub(1).filter(|i| *i < weeks) {
                counts[i] = Some(row.bucket.counts);
                cases[i] = row.new_cases;
            }
        }
        let imputed_weeks: Vec<usize> = (1..=weeks).filter(|w| counts[w - 1].is_none()).collect();
        if !imputed_weeks.is_empty() {
            log::warn!("{country_code}: no bucket for weeks {imputed_weeks:?}; imputing zero");
        }
        Self {
            country_code,
            counts: counts.into_iter().map(Option::unwrap_or_default).collect(),
            cases,
            imputed_weeks,
        }
    }

    pub fn series<S: Scalar>(&self, field: impl Fn(&Counts) -> u64) -> TrendSeries<S> {
        TrendSeries::new(
            self.country_code,
            self.counts.iter().map(|c| S::of(field(c) as f64)).collect(),
        )
    }

    /// Weekly cases, imputing zero for weeks without a row, or `None` if no
    /// week carries a case count.
    pub fn case_series<S: Scalar>(&self) -> Option<TrendSeries<S>> {
        self.cases.iter().any(Option::is_some).then(|| {
            TrendSeries::new(
                self.country_code,
                self.cases.iter().map(|c| S::of(c.unwrap_or(0) as f64)).collect(),
            )
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportConfig {
    pub peaks_k: usize,
    /// Inclusive week window checked by `peaks_in_window`.
    pub peak_window: (usize, usize),
    /// `correlated` is set when `r` reaches this value.
    pub correlation_threshold: f64,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            peaks_k: 2,
            peak_window: (6, 10),
            correlation_threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountryReport<S> {
    pub country_code: Region,
    pub weeks: usize,
    pub pearson_r: Option<S>,
    pub pearson_error: Option<AnalysisError>,
    pub correlated: bool,
    pub peaks: Vec<PeakReport<S>>,
    /// All reported peaks fall inside the configured window (false if none).
    pub peaks_in_window: bool,
    /// Weeks where cases fell from the previous week while topical tweets rose.
    pub divergent_weeks: Vec<usize>,
    pub imputed_weeks: Vec<usize>,
}

pub fn country_report<S: Scalar>(table: &RegionTable, config: &ReportConfig) -> CountryReport<S> {
    let topical = table.series::<S>(|c| c.n_topical);
    let cases = table.case_series::<S>();
    let r = match &cases {
        Some(cases) => pearson(&topical.values, &cases.values),
        None => Err(AnalysisError::MissingCases),
    };
    let peaks: Vec<PeakReport<S>> = detect_peaks(&topical.values, config.peaks_k)
        .into_iter()
        .map(|p| {
            let c = &table.counts[p.week_index - 1];
            PeakReport {
                week_index: p.week_index,
                height: p.height,
                sentiment_balance: SentimentBalance::of(c.n_positive, c.n_negative),
            }
        })
        .collect();
    let (lo, hi) = config.peak_window;
    let peaks_in_window = !peaks.is_empty() && peaks.iter().all(|p| (lo..=hi).contains(&p.week_index));
    let divergent_weeks = match &cases {
        Some(cases) => (2..=table.counts.len())
            .filter(|&w| cases.values[w - 1] < cases.values[w - 2] && topical.values[w - 1] > topical.values[w - 2])
            .collect(),
        None => Vec::new(),
    };
    CountryReport {
        country_code: table.country_code,
        weeks: table.counts.len(),
        pearson_r: r.ok(),
        pearson_error: r.err(),
        correlated: r.is_ok_and(|r| r.to_f64().unwrap_or(f64::NAN) >= config.correlation_threshold),
        peaks,
        peaks_in_window,
        divergent_weeks,
        imputed_weeks: table.imputed_weeks.clone(),
    }
}

/// Reports for every region in `rows`, sorted by region code.
///
/// `weeks` defaults to the largest week index present.
pub fn analyze<S: Scalar>(rows: &[TrendRow], weeks: Option<usize>, config: &ReportConfig) -> Vec<CountryReport<S>> {
    let weeks = weeks.unwrap_or_else(|| rows.iter().map(|r| r.bucket.week_index).max().unwrap_or(0));
    let mut regions: BTreeMap<Region, Vec<&TrendRow>> = BTreeMap::new();
    for r in rows {
        regions.entry(r.bucket.country_code).or_default().push(r);
    }
    regions
        .into_iter()
        .map(|(region, rows)| country_report(&RegionTable::from_rows(region, rows, weeks), config))
        .collect()
}
