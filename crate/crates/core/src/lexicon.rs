//! Economics topic lexicon and topical filtering.
//!
//! A lexicon is assembled from three tab-separated sources: curated seed
//! terms, a one-hop synonym table exported offline from a lexical database,
//! and per-country currency and bank names. The merged term list is
//! compiled into an [`Automaton`] and a text is topical when it contains at
//! least `min_matches` whole-word term occurrences.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gazetteer::CountryCode;
use crate::matcher::{Automaton, MatchError, MatchOptions, MatchSpan, PatternSet};
use crate::table::{for_each_row, LoadError, Loaded, RowIssue};
use crate::text::normalize;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("lexicon has no terms")]
    EmptyLexicon,
    #[error("min_matches must be at least 1")]
    ZeroMinMatches,
    #[error(transparent)]
    Match(#[from] MatchError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TermCategory {
    CoreEconomics,
    Currency,
    BankName,
}

impl FromStr for TermCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "coreeconomics" | "core" => Ok(Self::CoreEconomics),
            "currency" => Ok(Self::Currency),
            "bankname" | "bank" => Ok(Self::BankName),
            other => Err(format!("unknown term category {other:?}")),
        }
    }
}

impl fmt::Display for TermCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TermOrigin {
    Seed,
    SynonymExpansion,
    CountryMetadata,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexiconTerm {
    pub surface: String,
    pub normalized: String,
    pub category: TermCategory,
    pub origin: TermOrigin,
}

impl LexiconTerm {
    /// `None` if the surface is empty once normalized. A leading `#` is
    /// dropped so hashtag-style seeds match plain words.
    pub fn new(surface: &str, category: TermCategory, origin: TermOrigin) -> Option<Self> {
        let surface = surface.trim();
        let normalized = normalize(surface.trim_start_matches('#'));
        (!normalized.is_empty()).then(|| Self {
            surface: surface.to_string(),
            normalized,
            category,
            origin,
        })
    }
}

/// Read a seed file: one term per line, optionally `term<TAB>category`.
/// Rows with an unknown category are rejected and reported.
pub fn load_seed_terms(path: &Path) -> Result<Loaded<LexiconTerm>, LexiconError> {
    let mut loaded = Loaded::default();
    for_each_row(path, |line, cols| {
        let category = match cols.get(1).map(|c| c.trim()).filter(|c| !c.is_empty()) {
            None => Ok(TermCategory::CoreEconomics),
            Some(token) => token.parse(),
        };
        match category {
            Ok(category) => match LexiconTerm::new(cols[0], category, TermOrigin::Seed) {
                Some(term) => loaded.items.push(term),
                None => loaded.issues.push(RowIssue::new(line, "empty term")),
            },
            Err(reason) => loaded.issues.push(RowIssue::new(line, reason)),
        }
    })?;
    Ok(loaded)
}

/// Add the listed synonyms of every seed whose normalized surface is a
/// headword in `synonym_table` (`headword<TAB>synonym` rows).
///
/// Expansion is a single hop. Synonyms inherit the seed's category. Seeds
/// are always kept and the result is deduplicated by normalized surface,
/// first occurrence winning.
pub fn expand_synonyms(
    seeds: Vec<LexiconTerm>,
    synonym_table: &Path,
) -> Result<Loaded<LexiconTerm>, LexiconError> {
    let mut table: HashMap<String, Vec<String>> = HashMap::new();
    let mut issues = Vec::new();
    for_each_row(synonym_table, |line, cols| match cols.as_slice() {
        [head, synonym, ..] if !synonym.trim().is_empty() => {
            table
                .entry(normalize(head.trim_start_matches('#')))
                .or_default()
                .push(synonym.to_string());
        }
        _ => issues.push(RowIssue::new(line, "expected headword<TAB>synonym")),
    })?;

    let mut out = Dedup::default();
    for seed in &seeds {
        out.push(seed.clone());
    }
    for seed in &seeds {
        for synonym in table.get(&seed.normalized).into_iter().flatten() {
            if let Some(term) = LexiconTerm::new(synonym, seed.category, TermOrigin::SynonymExpansion) {
                out.push(term);
            }
        }
    }
    Ok(Loaded {
        items: out.terms,
        issues,
    })
}

/// Append currency and bank names from `country_code<TAB>currency|bank<TAB>name` rows.
pub fn merge_country_metadata(
    terms: Vec<LexiconTerm>,
    metadata_path: &Path,
) -> Result<Loaded<LexiconTerm>, LexiconError> {
    let mut out = Dedup::default();
    for term in terms {
        out.push(term);
    }
    let mut issues = Vec::new();
    for_each_row(metadata_path, |line, cols| match parse_metadata_row(&cols) {
        Ok(term) => {
            out.push(term);
        }
        Err(reason) => issues.push(RowIssue::new(line, reason)),
    })?;
    Ok(Loaded {
        items: out.terms,
        issues,
    })
}

fn parse_metadata_row(cols: &[&str]) -> Result<LexiconTerm, String> {
    let [country, kind, name, ..] = cols else {
        return Err("expected country_code<TAB>kind<TAB>name".to_string());
    };
    country
        .trim()
        .parse::<CountryCode>()
        .map_err(|e| e.to_string())?;
    let category = match kind.trim().to_ascii_lowercase().as_str() {
        "currency" => TermCategory::Currency,
        "bank" => TermCategory::BankName,
        other => return Err(format!("unknown metadata kind {other:?}")),
    };
    LexiconTerm::new(name, category, TermOrigin::CountryMetadata).ok_or_else(|| "empty name".to_string())
}

#[derive(Default)]
struct Dedup {
    seen: HashSet<String>,
    terms: Vec<LexiconTerm>,
}

impl Dedup {
    fn push(&mut self, term: LexiconTerm) -> bool {
        if self.seen.insert(term.normalized.clone()) {
            self.terms.push(term);
            true
        } else {
            false
        }
    }
}

/// Result of [`TopicLexicon::is_topical`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topicality {
    pub topical: bool,
    /// Sorted by `(start, pattern_id)`; offsets into the normalized text.
    pub matches: Vec<MatchSpan>,
}

/// Compiled topic lexicon. Pattern id `i` is `terms()[i]`.
#[derive(Debug, Clone)]
pub struct TopicLexicon {
    terms: Vec<LexiconTerm>,
    automaton: Automaton,
    min_matches: usize,
}

impl TopicLexicon {
    pub fn build(terms: Vec<LexiconTerm>, min_matches: usize) -> Result<Self, LexiconError> {
        if min_matches == 0 {
            return Err(LexiconError::ZeroMinMatches);
        }
        let mut dedup = Dedup::default();
        for term in terms {
            dedup.push(term);
        }
        let terms = dedup.terms;
        if terms.is_empty() {
            return Err(LexiconError::EmptyLexicon);
        }
        let patterns: PatternSet = terms.iter().map(|t| t.normalized.clone()).collect();
        let automaton = Automaton::compile(&patterns, MatchOptions::default())?;
        Ok(Self {
            terms,
            automaton,
            min_matches,
        })
    }

    pub fn terms(&self) -> &[LexiconTerm] {
        &self.terms
    }

    pub fn min_matches(&self) -> usize {
        self.min_matches
    }

    pub fn is_topical(&self, text: &str) -> Topicality {
        self.is_topical_prepared(&normalize(text))
    }

    /// [`TopicLexicon::is_topical`] on text already normalized.
    pub fn is_topical_prepared(&self, text: &str) -> Topicality {
        let matches = self.automaton.find_all_prepared(text);
        Topicality {
            topical: matches.len() >= self.min_matches,
            matches,
        }
    }

    /// Topical flag alone; stops scanning at the first hit when `min_matches` is 1.
    pub fn is_topical_flag_prepared(&self, text: &str) -> bool {
        if self.min_matches == 1 {
            self.automaton.is_match_prepared(text)
        } else {
            self.is_topical_prepared(text).topical
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    fn seed(s: &str) -> LexiconTerm {
        LexiconTerm::new(s, TermCategory::CoreEconomics, TermOrigin::Seed).unwrap()
    }

    fn lexicon(terms: &[&str]) -> TopicLexicon {
        TopicLexicon::build(terms.iter().map(|t| seed(t)).collect(), 1).unwrap()
    }

    #[test]
    fn seed_file_parsing() {
        let f = file("economy\nunemployment\tCoreEconomics\n");
        let loaded = load_seed_terms(f.path()).unwrap();
        assert_eq!(loaded.items.len(), 2);
        assert!(loaded.items.iter().all(|t| t.category == TermCategory::CoreEconomics && t.origin == TermOrigin::Seed));

        let f = file("# comment\n\n# another\n");
        assert!(load_seed_terms(f.path()).unwrap().items.is_empty());

        let f = file("yen\tCurrency\n");
        assert_eq!(load_seed_terms(f.path()).unwrap().items[0].category, TermCategory::Currency);
    }

    #[test]
    fn unknown_category_rejects_the_row() {
        let f = file("gdp\nbitcoin\tCrypto\ninflation\n");
        let loaded = load_seed_terms(f.path()).unwrap();
        assert_eq!(loaded.items.len(), 2);
        assert_eq!(loaded.issues.len(), 1);
        assert_eq!(loaded.issues[0].line, 2);
        assert!(loaded.issues[0].reason.contains("crypto"));
    }

    #[test]
    fn missing_seed_file() {
        let err = load_seed_terms(Path::new("/nonexistent/seeds.txt")).unwrap_err();
        assert!(matches!(err, LexiconError::Load(LoadError::MissingFile(_))));
    }

    #[test]
    fn synonym_expansion_one_hop() {
        let table = file("recession\tdownturn\nrecession\tslump\ndownturn\tdecline\nboom\tbubble\n");
        let seeds = vec![
            seed("recession"),
            LexiconTerm::new("dollar", TermCategory::Currency, TermOrigin::Seed).unwrap(),
        ];
        let out = expand_synonyms(seeds, table.path()).unwrap().items;
        let surfaces: Vec<_> = out.iter().map(|t| t.normalized.as_str()).collect();
        assert_eq!(surfaces, ["recession", "dollar", "downturn", "slump"]);
        assert_eq!(out[2].origin, TermOrigin::SynonymExpansion);
        assert_eq!(out[2].category, TermCategory::CoreEconomics);
    }

    #[test]
    fn synonym_categories_follow_the_seed() {
        let table = file("dollar\tbuck\n");
        let seeds = vec![LexiconTerm::new("Dollar", TermCategory::Currency, TermOrigin::Seed).unwrap()];
        let out = expand_synonyms(seeds, table.path()).unwrap().items;
        assert_eq!(out[1].category, TermCategory::Currency);
    }

    #[test]
    fn empty_synonym_table_is_identity() {
        let table = file("");
        let seeds = vec![seed("gdp"), seed("inflation")];
        let out = expand_synonyms(seeds.clone(), table.path()).unwrap().items;
        assert_eq!(out, seeds);
    }

    #[test]
    fn synonym_already_a_seed_appears_once() {
        let table = file("recession\tdepression\n");
        let out = expand_synonyms(vec![seed("recession"), seed("Depression")], table.path())
            .unwrap()
            .items;
        assert_eq!(out.len(), 2);
        assert_eq!(out[1].origin, TermOrigin::Seed);
    }

    #[test]
    fn country_metadata_rows() {
        let meta = file("JP\tcurrency\tyen\nUS\tbank\tFederal Reserve\nDE\tcurrency\teuro\nFR\tcurrency\tEuro\nXX\tstock\tnasdaq\nus\tbank\tChase\n");
        let loaded = merge_country_metadata(vec![seed("economy")], meta.path()).unwrap();
        let terms = loaded.items;
        assert_eq!(terms.len(), 4);
        assert_eq!((terms[1].normalized.as_str(), terms[1].category), ("yen", TermCategory::Currency));
        assert_eq!(
            (terms[2].normalized.as_str(), terms[2].category),
            ("federal reserve", TermCategory::BankName)
        );
        assert_eq!(terms[3].normalized, "euro");
        assert!(terms[1..].iter().all(|t| t.origin == TermOrigin::CountryMetadata));
        assert_eq!(loaded.issues.iter().map(|i| i.line).collect::<Vec<_>>(), [5, 6]);
    }

    #[test]
    fn topical_examples() {
        let lex = lexicon(&["economy"]);
        let t = lex.is_topical("the economy is collapsing");
        assert!(t.topical);
        assert_eq!(t.matches.len(), 1);
        assert!(!lex.is_topical("nice weather today").topical);
        assert!(!lex.is_topical("economical driving tips").topical);
        assert!(lex.is_topical("#Economy tanks").topical);
    }

    #[test]
    fn hashtag_seed_matches_plain_word() {
        let lex = lexicon(&["#gdp"]);
        assert!(lex.is_topical("GDP down 5%").topical);
    }

    #[test]
    fn min_matches_threshold() {
        let terms = vec![seed("jobs"), seed("economy")];
        let lex = TopicLexicon::build(terms, 2).unwrap();
        assert!(!lex.is_topical("jobs report").topical);
        assert!(lex.is_topical("jobs and the economy").topical);
        assert!(!lex.is_topical_flag_prepared("jobs report"));
        assert!(matches!(
            TopicLexicon::build(vec![seed("x")], 0),
            Err(LexiconError::ZeroMinMatches)
        ));
    }

    #[test]
    fn build_dedups_to_a_bijection() {
        let lex = TopicLexicon::build(vec![seed("Euro"), seed("euro"), seed("#euro")], 1).unwrap();
        assert_eq!(lex.terms().len(), 1);
        assert!(matches!(TopicLexicon::build(Vec::new(), 1), Err(LexiconError::EmptyLexicon)));
    }
}
