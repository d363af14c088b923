//! GeoNames gazetteer and toponym resolution.
//!
//! Place names from the GeoNames `countryInfo.txt`, `admin1CodesASCII.txt`
//! and (optionally) a cities table are compiled into one [`Automaton`]. A
//! tweet is tagged from its profile location first and its text second; see
//! [`Gazetteer::resolve_location`] for the full ranking.

use std::cmp::{Ordering, Reverse};
use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matcher::{Automaton, MatchError, MatchOptions, MatchSpan, PatternSet};
use crate::table::{for_each_row, LoadError, Loaded, RowIssue};
use crate::text::normalize;

/// Default population floor for cities, after the GeoNames `cities15000` dump.
pub const DEFAULT_MIN_CITY_POPULATION: u64 = 15_000;

#[derive(Debug, Error)]
pub enum GazetteerError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("no gazetteer entries survive filtering")]
    EmptyGazetteer,
    #[error(transparent)]
    Match(#[from] MatchError),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EntryError {
    #[error("invalid country code {0:?}")]
    CountryCode(String),
    #[error("place name is empty after normalization")]
    EmptyName,
    #[error("admin1 entry without an admin1 code")]
    MissingAdmin1,
}

/// ISO 3166-1 alpha-2 code: two uppercase ASCII letters.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct CountryCode([u8; 2]);

impl CountryCode {
    pub fn as_str(&self) -> &str {
        // Constructed only from ASCII letters.
        std::str::from_utf8(&self.0).unwrap()
    }
}

impl FromStr for CountryCode {
    type Err = EntryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.as_bytes() {
            &[a, b] if a.is_ascii_uppercase() && b.is_ascii_uppercase() => Ok(Self([a, b])),
            _ => Err(EntryError::CountryCode(s.to_string())),
        }
    }
}

impl TryFrom<String> for CountryCode {
    type Error = EntryError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<CountryCode> for String {
    fn from(c: CountryCode) -> Self {
        c.as_str().to_string()
    }
}

impl fmt::Display for CountryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for CountryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.as_str())
    }
}

/// Entry kind. The declaration order is the resolution rank: earlier wins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GeoKind {
    Country,
    Admin1,
    City,
    AlternateName,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeoEntry {
    pub surface: String,
    pub normalized: String,
    pub kind: GeoKind,
    pub country_code: CountryCode,
    pub admin1_code: Option<String>,
    pub population: u64,
}

impl GeoEntry {
    pub fn new(
        surface: &str,
        kind: GeoKind,
        country_code: CountryCode,
        admin1_code: Option<String>,
        population: u64,
    ) -> Result<Self, EntryError> {
        let normalized = normalize(surface);
        if normalized.is_empty() {
            return Err(EntryError::EmptyName);
        }
        let admin1_code = admin1_code.filter(|c| !c.is_empty());
        if kind == GeoKind::Admin1 && admin1_code.is_none() {
            return Err(EntryError::MissingAdmin1);
        }
        Ok(Self {
            surface: surface.trim().to_string(),
            normalized,
            kind,
            country_code,
            admin1_code,
            population,
        })
    }

    fn sort_key(&self) -> impl Ord + '_ {
        (
            self.normalized.as_str(),
            self.kind,
            self.country_code,
            self.admin1_code.as_deref(),
            Reverse(self.population),
            self.surface.as_str(),
        )
    }
}

/// Column layout of the GeoNames inputs (0-based).
mod columns {
    pub const COUNTRY_ISO: usize = 0;
    pub const COUNTRY_NAME: usize = 4;
    pub const COUNTRY_POPULATION: usize = 7;
    /// Optional trailing column after `EquivalentFipsCode`: comma-separated alternate names.
    pub const COUNTRY_ALTERNATES: usize = 19;

    pub const ADMIN1_CODE: usize = 0;
    pub const ADMIN1_NAME: usize = 1;

    pub const CITY_NAME: usize = 1;
    pub const CITY_COUNTRY: usize = 8;
    pub const CITY_ADMIN1: usize = 10;
    pub const CITY_POPULATION: usize = 14;
}

fn parse_population(raw: &str) -> Result<u64, String> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Ok(0);
    }
    raw.parse()
        .map_err(|_| format!("population {raw:?} is not a non-negative integer"))
}

/// Load GeoNames country, admin1 and optional city tables.
///
/// Malformed rows are skipped and reported in [`Loaded::issues`]. Admin1 and
/// city rows must reference a country present in the country table.
pub fn load_geonames(
    country_info: &Path,
    admin1: &Path,
    cities: Option<&Path>,
) -> Result<Loaded<GeoEntry>, GazetteerError> {
    let mut loaded = Loaded::default();
    let mut countries = BTreeSet::new();

    for_each_row(country_info, |line, cols| {
        match parse_country_row(&cols) {
            Ok(entries) => {
                if let Some(first) = entries.first() {
                    countries.insert(first.country_code);
                }
                loaded.items.extend(entries);
            }
            Err(reason) => loaded.issues.push(RowIssue::new(line, format!("country table: {reason}"))),
        }
    })?;

    for_each_row(admin1, |line, cols| match parse_admin1_row(&cols, &countries) {
        Ok(entry) => loaded.items.push(entry),
        Err(reason) => loaded.issues.push(RowIssue::new(line, format!("admin1 table: {reason}"))),
    })?;

    if let Some(cities) = cities {
        for_each_row(cities, |line, cols| match parse_city_row(&cols, &countries) {
            Ok(entry) => loaded.items.push(entry),
            Err(reason) => loaded.issues.push(RowIssue::new(line, format!("cities table: {reason}"))),
        })?;
    }
    Ok(loaded)
}

fn parse_country_row(cols: &[&str]) -> Result<Vec<GeoEntry>, String> {
    if cols.len() <= columns::COUNTRY_POPULATION {
        return Err(format!(
            "expected at least {} columns, found {}",
            columns::COUNTRY_POPULATION + 1,
            cols.len()
        ));
    }
    let code: CountryCode = cols[columns::COUNTRY_ISO]
        .parse()
        .map_err(|e: EntryError| e.to_string())?;
    let population = parse_population(cols[columns::COUNTRY_POPULATION])?;
    let mut out = vec![
        GeoEntry::new(cols[columns::COUNTRY_NAME], GeoKind::Country, code, None, population)
            .map_err(|e| e.to_string())?,
    ];
    if let Some(alternates) = cols.get(columns::COUNTRY_ALTERNATES) {
        for name in alternates.split(',').filter(|n| !n.trim().is_empty()) {
            out.push(
                GeoEntry::new(name, GeoKind::AlternateName, code, None, population)
                    .map_err(|e| e.to_string())?,
            );
        }
    }
    Ok(out)
}

fn known_country(raw: &str, countries: &BTreeSet<CountryCode>) -> Result<CountryCode, String> {
    let code: CountryCode = raw.parse().map_err(|e: EntryError| e.to_string())?;
    if countries.contains(&code) {
        Ok(code)
    } else {
        Err(format!("country {code} is not in the country table"))
    }
}

fn parse_admin1_row(cols: &[&str], countries: &BTreeSet<CountryCode>) -> Result<GeoEntry, String> {
    if cols.len() <= columns::ADMIN1_NAME {
        return Err(format!("expected at least 2 columns, found {}", cols.len()));
    }
    let (cc, code) = cols[columns::ADMIN1_CODE]
        .split_once('.')
        .ok_or_else(|| format!("admin1 code {:?} is not CC.CODE", cols[columns::ADMIN1_CODE]))?;
    let country = known_country(cc, countries)?;
    GeoEntry::new(
        cols[columns::ADMIN1_NAME],
        GeoKind::Admin1,
        country,
        Some(code.to_string()),
        0,
    )
    .map_err(|e| e.to_string())
}

fn parse_city_row(cols: &[&str], countries: &BTreeSet<CountryCode>) -> Result<GeoEntry, String> {
    if cols.len() <= columns::CITY_POPULATION {
        return Err(format!(
            "expected at least {} columns, found {}",
            columns::CITY_POPULATION + 1,
            cols.len()
        ));
    }
    let country = known_country(cols[columns::CITY_COUNTRY], countries)?;
    let population = parse_population(cols[columns::CITY_POPULATION])?;
    let admin1 = Some(cols[columns::CITY_ADMIN1].trim().to_string());
    GeoEntry::new(cols[columns::CITY_NAME], GeoKind::City, country, admin1, population)
        .map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LocationSource {
    ProfileField,
    TweetText,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocationTag {
    pub country_code: CountryCode,
    pub admin1_code: Option<String>,
    pub source: LocationSource,
    pub matched_surface: String,
}

/// Compiled place-name dictionary. Immutable after [`Gazetteer::build`].
#[derive(Debug, Clone)]
pub struct Gazetteer {
    entries: Vec<GeoEntry>,
    automaton: Automaton,
    countries: BTreeSet<CountryCode>,
}

impl Gazetteer {
    /// Drop cities below `min_city_population` and compile the rest.
    ///
    /// Entries are put into a canonical order first, so any permutation of
    /// the same list yields the same pattern ids and resolution behaviour.
    pub fn build(mut entries: Vec<GeoEntry>, min_city_population: u64) -> Result<Self, GazetteerError> {
        entries.retain(|e| e.kind != GeoKind::City || e.population >= min_city_population);
        if entries.is_empty() {
            return Err(GazetteerError::EmptyGazetteer);
        }
        entries.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));

        let patterns: PatternSet = entries.iter().map(|e| e.normalized.clone()).collect();
        let automaton = Automaton::compile(&patterns, MatchOptions::default())?;
        let countries = entries.iter().map(|e| e.country_code).collect();
        Ok(Self {
            entries,
            automaton,
            countries,
        })
    }

    pub fn entries(&self) -> &[GeoEntry] {
        &self.entries
    }

    /// The entry behind a pattern id reported by [`Gazetteer::find_all`].
    pub fn entry(&self, pattern_id: usize) -> &GeoEntry {
        &self.entries[pattern_id]
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn countries(&self) -> &BTreeSet<CountryCode> {
        &self.countries
    }

    /// Raw place-name matches in `text` (offsets into the normalized text).
    pub fn find_all(&self, text: &str) -> Vec<MatchSpan> {
        self.automaton.find_all(text)
    }

    /// Tag a tweet with the best place-name match.
    ///
    /// Candidates are ranked by, in order: source (profile field before
    /// tweet text), entry kind (country, admin1, city, alternate name),
    /// longer matched surface, larger population, earlier position. Returns
    /// `None` when neither input mentions a known place.
    pub fn resolve_location(&self, profile_location: Option<&str>, tweet_text: &str) -> Option<LocationTag> {
        let profile = profile_location.map(normalize);
        self.resolve_prepared(profile.as_deref(), &normalize(tweet_text))
    }

    /// [`Gazetteer::resolve_location`] over inputs already passed through
    /// [`normalize`](crate::text::normalize).
    pub fn resolve_prepared(&self, profile_location: Option<&str>, tweet_text: &str) -> Option<LocationTag> {
        let sources = [
            (LocationSource::ProfileField, profile_location),
            (LocationSource::TweetText, Some(tweet_text)),
        ];
        sources.into_iter().find_map(|(source, haystack)| {
            let best = self.best_match(haystack?)?;
            let entry = self.entry(best.pattern_id);
            Some(LocationTag {
                country_code: entry.country_code,
                admin1_code: entry.admin1_code.clone(),
                source,
                matched_surface: entry.normalized.clone(),
            })
        })
    }

    fn best_match(&self, haystack: &str) -> Option<MatchSpan> {
        let mut best: Option<MatchSpan> = None;
        self.automaton.for_each_match(haystack, |m| {
            if best.is_none_or(|b| self.rank(&m, &b) == Ordering::Less) {
                best = Some(m);
            }
        });
        best
    }

    fn rank(&self, a: &MatchSpan, b: &MatchSpan) -> Ordering {
        let (ea, eb) = (self.entry(a.pattern_id), self.entry(b.pattern_id));
        ea.kind
            .cmp(&eb.kind)
            .then_with(|| b.len().cmp(&a.len()))
            .then_with(|| eb.population.cmp(&ea.population))
            .then_with(|| a.start.cmp(&b.start))
            .then_with(|| a.pattern_id.cmp(&b.pattern_id))
    }
}
