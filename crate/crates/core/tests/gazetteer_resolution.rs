//! Gazetteer loading from GeoNames fixtures and resolution against a
//! brute-force ranking oracle.

use std::cmp::Reverse;
use std::path::PathBuf;

use geopulse_core::gazetteer::{load_geonames, GeoEntry, GeoKind, Gazetteer, LocationSource, LocationTag};
use geopulse_core::text::normalize;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn fixture_entries() -> Vec<GeoEntry> {
    let loaded = load_geonames(
        &fixture("geonames/countryInfo.txt"),
        &fixture("geonames/admin1CodesASCII.txt"),
        Some(&fixture("geonames/cities.txt")),
    )
    .unwrap();
    loaded.items
}

/// Enumerate every entry occurrence with word boundaries in each source and
/// pick the minimum of the ranking key by sorting.
fn oracle(entries: &[GeoEntry], profile: Option<&str>, text: &str) -> Option<LocationTag> {
    for (source, haystack) in [(LocationSource::ProfileField, profile), (LocationSource::TweetText, Some(text))] {
        let Some(haystack) = haystack.map(normalize) else { continue };
        let mut candidates = Vec::new();
        for e in entries {
            let p = &e.normalized;
            for (start, _) in haystack.match_indices(p.as_str()).chain(overlapping(&haystack, p)) {
                let end = start + p.len();
                let before = haystack[..start].chars().last();
                let after = haystack[end..].chars().next();
                if before.is_some_and(char::is_alphanumeric) || after.is_some_and(char::is_alphanumeric) {
                    continue;
                }
                // Identical surfaces at the same spot tie on all five levels;
                // the last resort is country, then admin1, then raw surface.
                let tie = (e.country_code, e.admin1_code.clone(), e.surface.clone());
                candidates.push(((e.kind, Reverse(p.len()), Reverse(e.population), start, tie), e));
            }
        }
        candidates.sort_by(|a, b| a.0.cmp(&b.0));
        if let Some((_, e)) = candidates.first() {
            return Some(LocationTag {
                country_code: e.country_code,
                admin1_code: e.admin1_code.clone(),
                source,
                matched_surface: e.normalized.clone(),
            });
        }
    }
    None
}

/// Occurrences `match_indices` skips because they overlap an earlier one.
fn overlapping<'a>(haystack: &'a str, p: &'a str) -> impl Iterator<Item = (usize, &'a str)> + 'a {
    (0..haystack.len())
        .filter(move |&i| haystack.is_char_boundary(i) && haystack[i..].starts_with(p))
        .map(move |i| (i, p))
}

#[test]
fn load_counts_and_issues() {
    let loaded = load_geonames(
        &fixture("geonames/countryInfo.txt"),
        &fixture("geonames/admin1CodesASCII.txt"),
        Some(&fixture("geonames/cities.txt")),
    )
    .unwrap();
    let count = |k| loaded.items.iter().filter(|e| e.kind == k).count();
    assert_eq!(count(GeoKind::Country), 14);
    assert_eq!(count(GeoKind::Admin1), 12);
    // Lagos references NG, which is not in the country table.
    assert_eq!(count(GeoKind::City), 21);
    assert_eq!(count(GeoKind::AlternateName), 9);
    assert_eq!(loaded.issues.len(), 1);
    assert!(loaded.issues[0].reason.contains("NG"));

    let us = &loaded.items[0];
    assert_eq!(
        (us.surface.as_str(), us.kind, us.country_code.as_str(), us.population),
        ("United States", GeoKind::Country, "US", 327_167_434)
    );
    let ca = loaded.items.iter().find(|e| e.surface == "California").unwrap();
    assert_eq!((ca.kind, ca.admin1_code.as_deref()), (GeoKind::Admin1, Some("CA")));
}

#[test]
fn empty_and_missing_files() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.txt");
    std::fs::write(&empty, "").unwrap();
    let loaded = load_geonames(&empty, &empty, None).unwrap();
    assert!(loaded.items.is_empty());
    assert!(loaded.issues.is_empty());

    let err = load_geonames(&dir.path().join("nope.txt"), &empty, None).unwrap_err();
    assert!(err.to_string().contains("missing input file"), "{err}");
}

#[test]
fn malformed_rows_report_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let countries = dir.path().join("c.txt");
    std::fs::write(
        &countries,
        "FR\tFRA\t250\tFR\tFrance\tParis\t547030\t66987244\n\
         fr\tFRA\t250\tFR\tFrance\tParis\t547030\t1\n\
         DE\tDEU\t276\n\
         IT\tITA\t380\tIT\tItaly\tRome\t301230\tmany\n",
    )
    .unwrap();
    let admin1 = dir.path().join("a.txt");
    std::fs::write(&admin1, "FR11\tIle-de-France\n# comment\nFR.11\t\n").unwrap();
    let loaded = load_geonames(&countries, &admin1, None).unwrap();
    assert_eq!(loaded.items.len(), 1);
    let lines: Vec<_> = loaded.issues.iter().map(|i| i.line).collect();
    assert_eq!(lines, [2, 3, 4, 1, 3]);
}

#[test]
fn fixture_locations_agree_with_oracle_and_expectations() {
    let entries = fixture_entries();
    let gaz = Gazetteer::build(entries.clone(), 15_000).unwrap();
    let surviving: Vec<GeoEntry> = gaz.entries().to_vec();
    let rows = std::fs::read_to_string(fixture("locations.tsv")).unwrap();
    let mut checked = 0;
    for line in rows.lines().filter(|l| !l.starts_with('#')) {
        let cols: Vec<&str> = line.split('\t').collect();
        let profile = (cols[0] != "-").then_some(cols[0]);
        let got = gaz.resolve_location(profile, cols[1]);
        assert_eq!(got, oracle(&surviving, profile, cols[1]), "{line}");
        match got {
            None => assert_eq!(cols[2], "-", "{line}"),
            Some(tag) => {
                assert_eq!(tag.country_code.as_str(), cols[2], "{line}");
                assert_eq!(tag.admin1_code.as_deref().unwrap_or("-"), cols[3], "{line}");
                assert_eq!(format!("{:?}", tag.source), cols[4], "{line}");
            }
        }
        checked += 1;
    }
    assert_eq!(checked, 30);
}

#[test]
fn resolution_is_permutation_invariant() {
    let entries = fixture_entries();
    let base = Gazetteer::build(entries.clone(), 15_000).unwrap();
    let probes = ["Georgia", "Paris", "New York City", "canada mexico", "Sao Paulo Brasil", "uk usa"];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let mut shuffled = entries.clone();
        shuffled.shuffle(&mut rng);
        let g = Gazetteer::build(shuffled, 15_000).unwrap();
        for p in probes {
            assert_eq!(g.resolve_location(Some(p), p), base.resolve_location(Some(p), p), "{p}");
        }
    }
}

const NAMES: [&str; 10] = ["ab", "ab cd", "cd", "b", "abc", "cd ab", "d", "ba", "ab-cd", "c"];
const CODES: [&str; 4] = ["AA", "BB", "CC", "DD"];

fn entry_strategy() -> impl Strategy<Value = GeoEntry> {
    (0..NAMES.len(), 0..4usize, 0..CODES.len(), 0u64..4).prop_map(|(n, k, c, pop)| {
        let kind = [GeoKind::Country, GeoKind::Admin1, GeoKind::City, GeoKind::AlternateName][k];
        GeoEntry::new(NAMES[n], kind, CODES[c].parse().unwrap(), Some(format!("{c}")), pop * 1000).unwrap()
    })
}

proptest! {
    #[test]
    fn resolve_matches_brute_force(
        entries in prop::collection::vec(entry_strategy(), 1..50),
        profile in proptest::option::of("[abcd ,-]{0,20}"),
        text in "[abcd .-]{0,40}",
    ) {
        let g = Gazetteer::build(entries.clone(), 0).unwrap();
        prop_assert_eq!(g.resolve_location(profile.as_deref(), &text), oracle(&entries, profile.as_deref(), &text));
    }
}
