//! The automaton against a naive per-pattern whole-word scanner.

use std::collections::BTreeSet;

use geopulse_core::matcher::{Automaton, MatchOptions, PatternSet};
use geopulse_core::text::normalize;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Every `(start, end, id)` where a pattern occurs at a char boundary and is
/// not flanked by alphanumerics. Written without the crate's helpers.
fn naive_spans(patterns: &[String], text: &str) -> BTreeSet<(usize, usize, usize)> {
    let mut out = BTreeSet::new();
    for (id, p) in patterns.iter().enumerate() {
        for start in 0..text.len() {
            if !text.is_char_boundary(start) || !text[start..].starts_with(p.as_str()) {
                continue;
            }
            let end = start + p.len();
            let left_ok = text[..start].chars().last().is_none_or(|c| !c.is_alphanumeric());
            let right_ok = text[end..].chars().next().is_none_or(|c| !c.is_alphanumeric());
            if left_ok && right_ok {
                out.insert((start, end, id));
            }
        }
    }
    out
}

fn automaton_spans(a: &Automaton, text: &str) -> Vec<(usize, usize, usize)> {
    a.find_all_prepared(text)
        .into_iter()
        .map(|m| (m.start, m.end, m.pattern_id))
        .collect()
}

const ALPHABET: &[char] = &['a', 'b', 'c', 'a', 'b', ' ', ' ', '-', '.', '1', 'é', 'ß', 'д'];

fn random_word(rng: &mut ChaCha8Rng, max: usize) -> String {
    let len = rng.gen_range(1..=max);
    (0..len).map(|_| ALPHABET[rng.gen_range(0..ALPHABET.len())]).collect()
}

pub fn random_case(seed: u64, n_patterns: usize, n_texts: usize) -> (Vec<String>, Vec<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let patterns: Vec<String> = (0..n_patterns)
        .map(|_| loop {
            let p = normalize(&random_word(&mut rng, 5));
            if !p.is_empty() {
                break p;
            }
        })
        .collect();
    let texts = (0..n_texts)
        .map(|_| {
            let len = rng.gen_range(0..=280);
            let raw: String = (0..len).map(|_| ALPHABET[rng.gen_range(0..ALPHABET.len())]).collect();
            let mut t = normalize(&raw);
            while t.len() > 280 {
                t.pop();
            }
            t
        })
        .collect();
    (patterns, texts)
}

#[test]
fn two_hundred_patterns_thousand_texts() {
    let (patterns, texts) = random_case(0xC0FFEE, 200, 1000);
    let set: PatternSet = patterns.iter().cloned().collect();
    let a = Automaton::compile(&set, MatchOptions::default()).unwrap();
    let mut total = 0;
    for text in &texts {
        let got = automaton_spans(&a, text);
        let want = naive_spans(&patterns, text);
        assert_eq!(got.iter().copied().collect::<BTreeSet<_>>(), want, "text {text:?}");
        assert_eq!(got.len(), want.len());
        total += got.len();
    }
    assert!(total > 1000, "fixture too sparse: {total} matches");
}

#[test]
fn overlapping_prefix_patterns() {
    let patterns = vec!["oil".to_string(), "oil price".to_string()];
    let set: PatternSet = patterns.iter().cloned().collect();
    let a = Automaton::compile(&set, MatchOptions::default()).unwrap();
    let text = "the oil price and oil";
    let want = naive_spans(&patterns, text);
    assert_eq!(want, BTreeSet::from([(4, 7, 0), (4, 13, 1), (18, 21, 0)]));
    assert_eq!(automaton_spans(&a, text).into_iter().collect::<BTreeSet<_>>(), want);
}

#[test]
fn output_order_is_start_then_id() {
    let (patterns, texts) = random_case(7, 50, 200);
    let set: PatternSet = patterns.iter().cloned().collect();
    let a = Automaton::compile(&set, MatchOptions::default()).unwrap();
    for t in &texts {
        let spans = a.find_all_prepared(t);
        assert!(spans.windows(2).all(|w| (w[0].start, w[0].pattern_id) < (w[1].start, w[1].pattern_id)));
        for m in spans {
            assert_eq!(&t[m.start..m.end], set.get(m.pattern_id).unwrap());
        }
    }
}

fn pattern_strategy() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec("[ab]{1,3}( [ab]{1,2})?", 1..12)
}

proptest! {
    #[test]
    fn matches_naive_scanner(patterns in pattern_strategy(), text in "[ab .1é]{0,80}") {
        let set: PatternSet = patterns.iter().cloned().collect();
        let a = Automaton::compile(&set, MatchOptions::default()).unwrap();
        let text = normalize(&text);
        let got: BTreeSet<_> = automaton_spans(&a, &text).into_iter().collect();
        prop_assert_eq!(got, naive_spans(&patterns, &text));
    }

    #[test]
    fn case_insensitive(patterns in pattern_strategy(), text in "[abAB .é]{0,80}") {
        let set: PatternSet = patterns.iter().cloned().collect();
        let a = Automaton::compile(&set, MatchOptions::default()).unwrap();
        prop_assert_eq!(a.find_all(&text.to_uppercase()), a.find_all(&text.to_lowercase()));
    }

    #[test]
    fn deterministic(patterns in pattern_strategy(), text in "[ab ]{0,60}") {
        let set: PatternSet = patterns.iter().cloned().collect();
        let a = Automaton::compile(&set, MatchOptions::default()).unwrap();
        let b = Automaton::compile(&set, MatchOptions::default()).unwrap();
        prop_assert_eq!(a.find_all(&text), b.find_all(&text));
    }
}
