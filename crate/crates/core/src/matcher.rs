//! Multi-pattern whole-word matching.
//!
//! [`Automaton`] is an Aho-Corasick automaton over UTF-8 bytes. Every
//! occurrence of every pattern is reported, including overlapping ones, in a
//! single left-to-right pass. Whole-word filtering is applied per candidate
//! by inspecting the characters on either side of the span.
//!
//! With `case_insensitive` set, patterns and haystacks are both passed
//! through [`normalize`](crate::text::normalize) and spans are offsets into
//! the normalized haystack. Callers that already hold normalized text should
//! use [`Automaton::find_all_prepared`] to skip the second normalization.

use std::borrow::Cow;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::{is_word_bounded, normalize};

const ROOT: u32 = 0;
const NONE: u32 = u32::MAX;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MatchError {
    #[error("pattern set is empty")]
    EmptyPatternSet,
    #[error("pattern {0} is empty after normalization")]
    EmptyPattern(usize),
    #[error("too many patterns or states for a 32-bit automaton")]
    TooLarge,
}

/// Patterns with dense ids `0..n`, the id being the position in the set.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PatternSet {
    patterns: Vec<String>,
}

impl PatternSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Append a pattern and return its id.
    pub fn push(&mut self, surface: impl Into<String>) -> usize {
        self.patterns.push(surface.into());
        self.patterns.len() - 1
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn get(&self, id: usize) -> Option<&str> {
        self.patterns.get(id).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &str)> {
        self.patterns.iter().map(String::as_str).enumerate()
    }
}

impl<S: Into<String>> FromIterator<S> for PatternSet {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Self {
            patterns: iter.into_iter().map(Into::into).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchOptions {
    pub case_insensitive: bool,
    pub whole_word: bool,
}

impl Default for MatchOptions {
    fn default() -> Self {
        Self {
            case_insensitive: true,
            whole_word: true,
        }
    }
}

/// One occurrence of a pattern: `text[start..end]`, byte offsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MatchSpan {
    pub start: usize,
    pub pattern_id: usize,
    pub end: usize,
}

impl MatchSpan {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

/// Compiled, immutable multi-pattern searcher.
#[derive(Debug, Clone)]
pub struct Automaton {
    options: MatchOptions,
    pattern_lens: Vec<u32>,
    /// Full transition row for the root; absent edges loop back to the root.
    root_row: Box<[u32; 256]>,
    /// Sparse goto edges of state `s` live in `edge_bytes[edge_start[s]..edge_start[s + 1]]`,
    /// sorted by byte.
    edge_start: Vec<u32>,
    edge_bytes: Vec<u8>,
    edge_next: Vec<u32>,
    fail: Vec<u32>,
    out_start: Vec<u32>,
    out_ids: Vec<u32>,
    /// Nearest proper suffix state that has outputs, or `NONE`.
    dict: Vec<u32>,
}

impl Automaton {
    pub fn compile(patterns: &PatternSet, options: MatchOptions) -> Result<Self, MatchError> {
        if patterns.is_empty() {
            return Err(MatchError::EmptyPatternSet);
        }
        if patterns.len() >= NONE as usize {
            return Err(MatchError::TooLarge);
        }

        let mut trie = Trie::default();
        let mut pattern_lens = Vec::with_capacity(patterns.len());
        for (id, surface) in patterns.iter() {
            let surface: Cow<str> = if options.case_insensitive {
                Cow::Owned(normalize(surface))
            } else {
                Cow::Borrowed(surface)
            };
            if surface.is_empty() {
                return Err(MatchError::EmptyPattern(id));
            }
            trie.insert(surface.as_bytes(), id as u32)?;
            pattern_lens.push(surface.len() as u32);
        }
        Ok(trie.finish(options, pattern_lens))
    }

    pub fn options(&self) -> MatchOptions {
        self.options
    }

    pub fn pattern_count(&self) -> usize {
        self.pattern_lens.len()
    }

    pub fn state_count(&self) -> usize {
        self.fail.len()
    }

    /// The haystack the automaton actually searches for `text`.
    pub fn prepare<'a>(&self, text: &'a str) -> Cow<'a, str> {
        if self.options.case_insensitive {
            Cow::Owned(normalize(text))
        } else {
            Cow::Borrowed(text)
        }
    }

    /// All matches in `text`, sorted by `(start, pattern_id)`.
    ///
    /// In case-insensitive mode offsets refer to `self.prepare(text)`.
    pub fn find_all(&self, text: &str) -> Vec<MatchSpan> {
        self.find_all_prepared(&self.prepare(text))
    }

    /// All matches in a haystack that has already been through [`Automaton::prepare`].
    pub fn find_all_prepared(&self, haystack: &str) -> Vec<MatchSpan> {
        let mut out = Vec::new();
        self.for_each_match(haystack, |m| out.push(m));
        out.sort_unstable();
        out
    }

    /// Whether any match exists, stopping at the first one found.
    pub fn is_match_prepared(&self, haystack: &str) -> bool {
        let mut found = false;
        self.scan(haystack, |_| {
            found = true;
            false
        });
        found
    }

    /// Visit matches in order of their end offset (unsorted within an end).
    pub fn for_each_match(&self, haystack: &str, mut f: impl FnMut(MatchSpan)) {
        self.scan(haystack, |m| {
            f(m);
            true
        });
    }

    fn scan(&self, haystack: &str, mut f: impl FnMut(MatchSpan) -> bool) {
        let bytes = haystack.as_bytes();
        let mut state = ROOT;
        for (i, &b) in bytes.iter().enumerate() {
            state = self.next_state(state, b);
            if state == ROOT {
                continue;
            }
            let end = i + 1;
            let mut s = if self.has_outputs(state) { state } else { self.dict[state as usize] };
            while s != NONE {
                let lo = self.out_start[s as usize] as usize;
                let hi = self.out_start[s as usize + 1] as usize;
                for &id in &self.out_ids[lo..hi] {
                    let start = end - self.pattern_lens[id as usize] as usize;
                    if self.options.whole_word && !is_word_bounded(haystack, start, end) {
                        continue;
                    }
                    let span = MatchSpan {
                        start,
                        pattern_id: id as usize,
                        end,
                    };
                    if !f(span) {
                        return;
                    }
                }
                s = self.dict[s as usize];
            }
        }
    }

    #[inline]
    fn has_outputs(&self, state: u32) -> bool {
        self.out_start[state as usize] != self.out_start[state as usize + 1]
    }

    #[inline]
    fn goto(&self, state: u32, byte: u8) -> Option<u32> {
        let lo = self.edge_start[state as usize] as usize;
        let hi = self.edge_start[state as usize + 1] as usize;
        let keys = &self.edge_bytes[lo..hi];
        let idx = if keys.len() <= 8 {
            keys.iter().position(|&k| k == byte)?
        } else {
            keys.binary_search(&byte).ok()?
        };
        Some(self.edge_next[lo + idx])
    }

    #[inline]
    fn next_state(&self, mut state: u32, byte: u8) -> u32 {
        loop {
            if state == ROOT {
                return self.root_row[byte as usize];
            }
            if let Some(next) = self.goto(state, byte) {
                return next;
            }
            state = self.fail[state as usize];
        }
    }
}

#[derive(Default)]
struct Trie {
    children: Vec<Vec<(u8, u32)>>,
    outputs: Vec<Vec<u32>>,
}

impl Trie {
    fn ensure_root(&mut self) {
        if self.children.is_empty() {
            self.children.push(Vec::new());
            self.outputs.push(Vec::new());
        }
    }

    fn insert(&mut self, bytes: &[u8], id: u32) -> Result<(), MatchError> {
        self.ensure_root();
        let mut state = ROOT;
        for &b in bytes {
            let existing = self.children[state as usize]
                .iter()
                .find(|(k, _)| *k == b)
                .map(|&(_, t)| t);
            state = match existing {
                Some(t) => t,
                None => {
                    let t = self.children.len();
                    if t >= NONE as usize {
                        return Err(MatchError::TooLarge);
                    }
                    self.children.push(Vec::new());
                    self.outputs.push(Vec::new());
                    self.children[state as usize].push((b, t as u32));
                    t as u32
                }
            };
        }
        self.outputs[state as usize].push(id);
        Ok(())
    }

    fn finish(mut self, options: MatchOptions, pattern_lens: Vec<u32>) -> Automaton {
        let n = self.children.len();
        for edges in &mut self.children {
            edges.sort_unstable_by_key(|&(b, _)| b);
        }
        for outs in &mut self.outputs {
            outs.sort_unstable();
        }

        let mut edge_start = Vec::with_capacity(n + 1);
        let mut edge_bytes = Vec::new();
        let mut edge_next = Vec::new();
        for edges in &self.children {
            edge_start.push(edge_bytes.len() as u32);
            for &(b, t) in edges {
                edge_bytes.push(b);
                edge_next.push(t);
            }
        }
        edge_start.push(edge_bytes.len() as u32);

        let mut out_start = Vec::with_capacity(n + 1);
        let mut out_ids = Vec::new();
        for outs in &self.outputs {
            out_start.push(out_ids.len() as u32);
            out_ids.extend_from_slice(outs);
        }
        out_start.push(out_ids.len() as u32);

        let mut root_row = Box::new([ROOT; 256]);
        for &(b, t) in &self.children[ROOT as usize] {
            root_row[b as usize] = t;
        }

        let mut automaton = Automaton {
            options,
            pattern_lens,
            root_row,
            edge_start,
            edge_bytes,
            edge_next,
            fail: vec![ROOT; n],
            out_start,
            out_ids,
            dict: vec![NONE; n],
        };

        // Breadth-first so every fail target is final before its dependents.
        let mut queue = std::collections::VecDeque::with_capacity(n);
        for &(_, t) in &self.children[ROOT as usize] {
            queue.push_back(t);
        }
        while let Some(s) = queue.pop_front() {
            for &(b, t) in &self.children[s as usize] {
                let f = automaton.next_state(automaton.fail[s as usize], b);
                automaton.fail[t as usize] = f;
                automaton.dict[t as usize] = if automaton.has_outputs(f) {
                    f
                } else {
                    automaton.dict[f as usize]
                };
                queue.push_back(t);
            }
        }
        automaton
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn compile(patterns: &[&str]) -> Automaton {
        let set: PatternSet = patterns.iter().copied().collect();
        Automaton::compile(&set, MatchOptions::default()).unwrap()
    }

    fn spans(a: &Automaton, text: &str) -> Vec<(usize, usize, usize)> {
        a.find_all(text)
            .into_iter()
            .map(|m| (m.pattern_id, m.start, m.end))
            .collect()
    }

    #[test]
    fn single_word_pattern() {
        let a = compile(&["gdp"]);
        assert_eq!(spans(&a, "GDP fell"), [(0, 0, 3)]);
        assert!(spans(&a, "gdps").is_empty());
    }

    #[test]
    fn repeated_occurrences() {
        let a = compile(&["economy"]);
        assert_eq!(spans(&a, "economy economy"), [(0, 0, 7), (0, 8, 15)]);
    }

    #[test]
    fn word_boundary_blocks_prefix_hits() {
        let a = compile(&["India"]);
        assert!(a.find_all("Indiana").is_empty());
        let a = compile(&["economy"]);
        assert!(a.find_all("covid19economy").is_empty());
        assert!(a.find_all("economical").is_empty());
        assert_eq!(spans(&a, "#economy!"), [(0, 1, 8)]);
    }

    #[test]
    fn overlapping_patterns_both_reported() {
        let a = compile(&["oil", "oil price"]);
        assert_eq!(spans(&a, "the oil price"), [(0, 4, 7), (1, 4, 13)]);
    }

    #[test]
    fn duplicate_surfaces_report_every_id() {
        let a = compile(&["georgia", "Georgia"]);
        assert_eq!(spans(&a, "georgia"), [(0, 0, 7), (1, 0, 7)]);
    }

    #[test]
    fn suffix_patterns_via_dictionary_links() {
        let a = compile(&["new york", "york"]);
        assert_eq!(spans(&a, "new york"), [(0, 0, 8), (1, 4, 8)]);
    }

    #[test]
    fn case_sensitive_substring_mode() {
        let set: PatternSet = ["ab"].into_iter().collect();
        let a = Automaton::compile(
            &set,
            MatchOptions {
                case_insensitive: false,
                whole_word: false,
            },
        )
        .unwrap();
        assert_eq!(spans(&a, "xabAB"), [(0, 1, 3)]);
    }

    #[test]
    fn offsets_refer_to_normalized_text() {
        let a = compile(&["sao paulo"]);
        let text = "Viva  São Paulo";
        let prepared = a.prepare(text);
        let m = a.find_all(text);
        assert_eq!(m.len(), 1);
        assert_eq!(&prepared[m[0].start..m[0].end], "sao paulo");
    }

    #[test]
    fn empty_inputs() {
        assert_eq!(
            Automaton::compile(&PatternSet::new(), MatchOptions::default()).unwrap_err(),
            MatchError::EmptyPatternSet
        );
        let set: PatternSet = ["ok", "  "].into_iter().collect();
        assert_eq!(
            Automaton::compile(&set, MatchOptions::default()).unwrap_err(),
            MatchError::EmptyPattern(1)
        );
        assert!(compile(&["x"]).find_all("").is_empty());
    }

    #[test]
    fn early_exit_probe() {
        let a = compile(&["rate"]);
        assert!(a.is_match_prepared("interest rate hike"));
        assert!(!a.is_match_prepared("interest rates"));
    }
}
