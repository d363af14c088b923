//! Text normalization used by every matching stage.
//!
//! Normalized text is case-folded, compatibility-decomposed with combining
//! marks removed, and has every whitespace run collapsed to a single ASCII
//! space with no leading or trailing whitespace. Match offsets produced by
//! the matcher always refer to normalized text.

use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

/// Normalize `s` for matching. Idempotent: `normalize(&normalize(s)) == normalize(s)`.
pub fn normalize(s: &str) -> String {
    if s.is_ascii() {
        return collapse_whitespace(s.chars().map(|c| c.to_ascii_lowercase()), s.len());
    }
    // Decompose before folding so compatibility forms that expand to
    // uppercase letters ("\u{3392}" -> "MHz") are folded too, then decompose
    // again for the few lowercase mappings that introduce combining marks.
    let stripped: String = s.nfkd().filter(|c| !is_combining_mark(*c)).collect();
    let folded = stripped.to_lowercase();
    collapse_whitespace(
        folded.nfkd().filter(|c| !is_combining_mark(*c)),
        folded.len(),
    )
}

fn collapse_whitespace(chars: impl Iterator<Item = char>, hint: usize) -> String {
    let mut out = String::with_capacity(hint);
    let mut pending_space = false;
    for c in chars {
        if c.is_whitespace() {
            pending_space = !out.is_empty();
        } else {
            if pending_space {
                out.push(' ');
                pending_space = false;
            }
            out.push(c);
        }
    }
    out
}

/// Word characters for boundary checks: Unicode alphanumerics (digits included).
#[inline]
pub fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

/// True if `text[start..end]` is not flanked by word characters.
pub fn is_word_bounded(text: &str, start: usize, end: usize) -> bool {
    let before = text[..start].chars().next_back();
    let after = text[end..].chars().next();
    !before.is_some_and(is_word_char) && !after.is_some_and(is_word_char)
}

/// Split normalized text into alphanumeric tokens.
pub fn tokens(text: &str) -> impl Iterator<Item = &str> {
    text.split(|c: char| !is_word_char(c)).filter(|t| !t.is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn strips_diacritics_and_folds_case() {
        assert_eq!(normalize("São Paulo"), "sao paulo");
        assert_eq!(normalize("ZÜRICH"), "zurich");
        assert_eq!(normalize("Île-de-France"), "ile-de-france");
        assert_eq!(normalize("İstanbul"), "istanbul");
    }

    #[test]
    fn collapses_whitespace() {
        assert_eq!(normalize("  United \t Kingdom\n"), "united kingdom");
        assert_eq!(normalize("a\u{00A0}b"), "a b");
        assert_eq!(normalize("   "), "");
    }

    #[test]
    fn compatibility_forms_fold() {
        assert_eq!(normalize("\u{3392}"), "mhz");
        assert_eq!(normalize("ﬁnance"), "finance");
    }

    #[test]
    fn idempotent_for_every_char() {
        for c in (0u32..=0x10FFFF).filter_map(char::from_u32) {
            let once = normalize(&c.to_string());
            assert_eq!(normalize(&once), once, "U+{:04X}", c as u32);
        }
    }

    #[test]
    fn boundaries() {
        assert!(is_word_bounded("the economy.", 4, 11));
        assert!(!is_word_bounded("economical", 0, 7));
        assert!(!is_word_bounded("covid19economy", 7, 14));
        assert!(is_word_bounded("#economy", 1, 8));
    }

    #[test]
    fn tokenizes_on_non_alphanumerics() {
        let t: Vec<_> = tokens("jobs, lost! (again)").collect();
        assert_eq!(t, ["jobs", "lost", "again"]);
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(s in "\\PC{0,40}") {
            let once = normalize(&s);
            prop_assert_eq!(normalize(&once), once);
        }

        #[test]
        fn normalized_has_no_outer_whitespace(s in "\\PC{0,40}") {
            let n = normalize(&s);
            prop_assert_eq!(n.trim(), n.as_str());
            prop_assert!(!n.contains("  "));
        }
    }
}
