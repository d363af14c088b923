//! Fixture paths and a seeded synthetic tweet corpus shared by test targets.
#![allow(dead_code)]

use std::path::PathBuf;

use chrono::{Duration, NaiveDate};
use geopulse_core::gazetteer::{load_geonames, Gazetteer};
use geopulse_core::lexicon::{expand_synonyms, load_seed_terms, merge_country_metadata, TopicLexicon};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

pub struct GeonamesPaths {
    pub countries: PathBuf,
    pub admin1: PathBuf,
    pub cities: PathBuf,
}

pub fn geonames_paths() -> GeonamesPaths {
    let dir = fixtures().join("geonames");
    GeonamesPaths {
        countries: dir.join("countryInfo.txt"),
        admin1: dir.join("admin1CodesASCII.txt"),
        cities: dir.join("cities.txt"),
    }
}

pub fn fixture_gazetteer() -> Gazetteer {
    let p = geonames_paths();
    let loaded = load_geonames(&p.countries, &p.admin1, Some(&p.cities)).unwrap();
    Gazetteer::build(loaded.items, 15_000).unwrap()
}

pub fn fixture_lexicon() -> TopicLexicon {
    let dir = fixtures().join("lexicon");
    let seeds = load_seed_terms(&dir.join("seeds.tsv")).unwrap().items;
    let expanded = expand_synonyms(seeds, &dir.join("synonyms.tsv")).unwrap().items;
    let terms = merge_country_metadata(expanded, &dir.join("country_meta.tsv")).unwrap().items;
    TopicLexicon::build(terms, 1).unwrap()
}

const PROFILES: [&str; 16] = [
    "Atlanta, Georgia",
    "London",
    "Paris",
    "Toronto, Ontario",
    "Tokyo",
    "Berlin",
    "Mumbai",
    "São Paulo",
    "Sydney, NSW",
    "Rome",
    "Beijing",
    "New York City",
    "Earth",
    "",
    "somewhere nice",
    "UK",
];

const WORDS: [&str; 24] = [
    "the", "economy", "is", "not", "good", "recession", "jobs", "stay", "home", "great", "crisis", "stock market",
    "lockdown", "recovery", "yen", "layoffs", "bad", "hope", "euro", "masks", "today", "wall street", "unemployment",
    "#covid19",
];

/// NDJSON lines: `n` tweets posted on the Tuesdays from `start`, every
/// tenth on the Monday before. Roughly one in fifty is a retweet.
pub fn synthetic_corpus(n: usize, start: NaiveDate, weeks: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::new();
    for i in 0..n {
        let week = rng.gen_range(0..weeks) as i64;
        let mut day = start + Duration::weeks(week);
        if i % 10 == 9 {
            day -= Duration::days(1);
        }
        let ts = day.and_hms_opt(rng.gen_range(0..24), rng.gen_range(0..60), 0).unwrap();
        let len = rng.gen_range(2..12);
        let text: Vec<&str> = (0..len).map(|_| WORDS[rng.gen_range(0..WORDS.len())]).collect();
        let mut tweet = json!({
            "id": format!("t{i:06}"),
            "created_at": ts.format("%Y-%m-%dT%H:%M:%SZ").to_string(),
            "text": text.join(" "),
            "lang": "en",
            "user": {"location": PROFILES[rng.gen_range(0..PROFILES.len())]},
        });
        if rng.gen_ratio(1, 50) {
            tweet["retweeted_status"] = json!({"id": "x"});
        }
        out.push_str(&tweet.to_string());
        out.push('\n');
    }
    out
}
