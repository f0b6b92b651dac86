//! Deterministic cleaning of raw comments.
//!
//! The pipeline runs URL removal, special-character stripping, Latin
//! lowercasing and whitespace collapse, always in that order. Letters and
//! combining marks of every script survive, so Tamil and Malayalam text
//! (including dependent vowel signs and virama) passes through untouched.

use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

/// Which cleaning steps [`preprocess`] applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CleanPolicy {
    pub remove_urls: bool,
    pub strip_specials: bool,
    pub collapse_whitespace: bool,
    pub lowercase_latin: bool,
}

impl Default for CleanPolicy {
    fn default() -> Self {
        Self {
            remove_urls: true,
            strip_specials: true,
            collapse_whitespace: true,
            lowercase_latin: true,
        }
    }
}

fn url_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)(?:https?://|www\.)\S*").expect("valid url regex"))
}

fn special_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    // One match per code point, so each special becomes exactly one space.
    RE.get_or_init(|| Regex::new(r"[^\p{L}\p{M}\p{Nd}\s]").expect("valid special regex"))
}

fn latin_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\p{Script=Latin}").expect("valid latin regex"))
}

/// Replaces every `http://`, `https://` or `www.` run (up to the next
/// whitespace) with a single space.
pub fn remove_urls(text: &str) -> String {
    url_pattern().replace_all(text, " ").into_owned()
}

/// Replaces every code point that is not a letter, mark, decimal digit or
/// whitespace with a single space.
pub fn strip_specials(text: &str) -> String {
    special_pattern().replace_all(text, " ").into_owned()
}

/// Lowercases Latin-script letters only.
///
/// A letter is left alone when its lowercase form is more than one code
/// point or longer in UTF-8 (e.g. `İ`), so cleaning never grows the text.
pub fn lowercase_latin(text: &str) -> String {
    let latin = latin_pattern();
    let mut buf = [0u8; 4];
    text.chars()
        .map(|c| {
            if c.is_ascii() {
                return c.to_ascii_lowercase();
            }
            if !latin.is_match(c.encode_utf8(&mut buf)) {
                return c;
            }
            let mut lower = c.to_lowercase();
            match (lower.next(), lower.next()) {
                (Some(l), None) if l.len_utf8() <= c.len_utf8() => l,
                _ => c,
            }
        })
        .collect()
}

/// Collapses every whitespace run to one ASCII space and trims both ends.
pub fn collapse_whitespace(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for word in text.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// Runs the enabled cleaning steps in their fixed order.
pub fn preprocess(text: &str, policy: &CleanPolicy) -> String {
    let mut out = text.to_owned();
    if policy.remove_urls {
        out = remove_urls(&out);
    }
    if policy.strip_specials {
        out = strip_specials(&out);
    }
    if policy.lowercase_latin {
        out = lowercase_latin(&out);
    }
    if policy.collapse_whitespace {
        out = collapse_whitespace(&out);
    }
    out
}

fn letter_or_mark_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^[\p{L}\p{M}]$").expect("valid letter regex"))
}

/// True for letters and vowel signs of the Tamil or Malayalam blocks.
pub fn is_dravidian_letter(c: char) -> bool {
    matches!(c, '\u{0B80}'..='\u{0BFF}' | '\u{0D00}'..='\u{0D7F}')
        && letter_or_mark_pattern().is_match(c.encode_utf8(&mut [0u8; 4]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn url_replaced_by_single_space() {
        assert_eq!(remove_urls("see https://t.co/abc now"), "see   now");
        assert_eq!(remove_urls("www.example.com/x?y=1"), " ");
        assert_eq!(remove_urls("HTTP://X.CO done"), "  done");
        assert_eq!(remove_urls(""), "");
        assert_eq!(remove_urls("no links here"), "no links here");
    }

    #[test]
    fn specials_become_spaces() {
        assert_eq!(strip_specials("wow!!! great???"), "wow    great   ");
        assert_eq!(strip_specials("word!word"), "word word");
        assert_eq!(strip_specials("a1b2"), "a1b2");
        assert_eq!(strip_specials("ok 😀 ok"), "ok   ok");
    }

    #[test]
    fn tamil_and_malayalam_survive() {
        let tamil = "வணக்கம் நண்பர்களே";
        let malayalam = "നമസ്കാരം സുഹൃത്തേ";
        assert_eq!(strip_specials(tamil), tamil);
        assert_eq!(preprocess(tamil, &CleanPolicy::default()), tamil);
        assert_eq!(preprocess(malayalam, &CleanPolicy::default()), malayalam);
    }

    #[test]
    fn full_pipeline() {
        let p = CleanPolicy::default();
        assert_eq!(preprocess("Check https://x.co NOW!!", &p), "check now");
        assert_eq!(preprocess("already clean", &p), "already clean");
        assert_eq!(preprocess("!!?...,;", &p), "");
        assert_eq!(preprocess("  ÉCOLE  Straße  ", &p), "école straße");
    }

    #[test]
    fn lowercase_skips_expanding_letters() {
        assert_eq!(lowercase_latin("İ"), "İ");
        assert_eq!(lowercase_latin("ABC Δ"), "abc Δ");
    }

    #[test]
    fn policy_knobs_disable_steps() {
        let p = CleanPolicy {
            remove_urls: false,
            strip_specials: false,
            collapse_whitespace: false,
            lowercase_latin: false,
        };
        assert_eq!(preprocess(" A!  b ", &p), " A!  b ");
        let keep_case = CleanPolicy {
            lowercase_latin: false,
            ..CleanPolicy::default()
        };
        assert_eq!(preprocess("Hello World!", &keep_case), "Hello World");
    }

    #[test]
    fn dravidian_letter_predicate() {
        assert!(is_dravidian_letter('க'));
        assert!(is_dravidian_letter('\u{0BCD}'));
        assert!(is_dravidian_letter('ന'));
        assert!(!is_dravidian_letter('௧'));
        assert!(!is_dravidian_letter('a'));
    }
}
