//! Question word and lexical answer type (LAT) extraction.
//!
//! The LAT is the word in a question that names the kind of thing being asked
//! for ("enzyme" in *Which enzyme is targeted by Evolocumab?*). It is found
//! with a handful of rules over POS tags and dependency relations:
//!
//! 1. *When*, *Who*, *Why* (and *whose*) are their own LAT.
//! 2. *How* takes the first adjective after it, anywhere in the sentence,
//!    or falls back to *How* itself.
//! 3. If the word right after the question word is a noun, a window of three
//!    tokens anchored at the question word is searched for a noun that is
//!    also a subject; if none is found the following noun is the LAT.
//! 4. Otherwise a window of five tokens is searched the same way, falling
//!    back to the nearest noun that follows the question word.
//!
//! Windows are anchored at the question word: a window of `w` covers the
//! question word and the `w - 1` tokens after it. Punctuation occupies a slot.

use serde::{Deserialize, Serialize};

use crate::conllu::{ParseToken, ParsedQuestion};
use crate::error::{Error, Result};

pub const QUESTION_WORD_TAGS: [&str; 3] = ["WDT", "WRB", "WP"];

/// Question words that are their own answer type.
pub const SELF_LAT_WORDS: [&str; 4] = ["when", "who", "why", "whose"];

/// Window used when a noun directly follows the question word.
pub const NOUN_FOLLOWS_WINDOW: usize = 3;

/// Window used otherwise.
pub const OTHER_WINDOW: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RuleCase {
    HowAdjective,
    HowSelf,
    SelfWord,
    ImmediateNounWindow3,
    NonNounWindow5,
    Fallback,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatResult {
    pub lat: String,
    pub rule_case: RuleCase,
    pub question_word: String,
    pub question_word_index: usize,
    /// Token index the LAT was taken from (equal to the question word index
    /// for self-LAT cases).
    pub lat_index: usize,
}

/// First token tagged WDT, WRB or WP.
pub fn find_question_word(q: &ParsedQuestion) -> Option<(usize, &str)> {
    q.tokens
        .iter()
        .find(|t| QUESTION_WORD_TAGS.contains(&t.pos.as_str()))
        .map(|t| (t.index, t.surface.as_str()))
}

pub fn extract_lat(q: &ParsedQuestion) -> Result<LatResult> {
    let (qw_index, qw) = find_question_word(q).ok_or(Error::NoQuestionWord)?;
    let word = qw.to_lowercase();
    let after = q.tokens.get(qw_index..).unwrap_or(&[]);

    let result = |tok: Option<&ParseToken>, rule_case| {
        let (lat, lat_index) = match tok {
            Some(t) => (t.surface.clone(), t.index),
            None => (qw.to_string(), qw_index),
        };
        LatResult {
            lat,
            rule_case,
            question_word: qw.to_string(),
            question_word_index: qw_index,
            lat_index,
        }
    };

    if SELF_LAT_WORDS.contains(&word.as_str()) {
        return Ok(result(None, RuleCase::SelfWord));
    }

    if word == "how" {
        return Ok(match after.iter().find(|t| t.is_adjective()) {
            Some(adj) => result(Some(adj), RuleCase::HowAdjective),
            None => result(None, RuleCase::HowSelf),
        });
    }

    let noun_subject_within = |window: usize| {
        after
            .iter()
            .take(window - 1)
            .find(|t| t.is_noun() && t.is_subject())
    };

    match after.first() {
        Some(next) if next.is_noun() => {
            let hit = noun_subject_within(NOUN_FOLLOWS_WINDOW).unwrap_or(next);
            Ok(result(Some(hit), RuleCase::ImmediateNounWindow3))
        }
        _ => {
            let hit = noun_subject_within(OTHER_WINDOW)
                .or_else(|| after.iter().find(|t| t.is_noun()));
            Ok(match hit {
                Some(t) => result(Some(t), RuleCase::NonNounWindow5),
                None => result(None, RuleCase::Fallback),
            })
        }
    }
}

/// Fraction of questions whose extracted LAT matches the gold label,
/// compared case-insensitively. Questions without a question word count as
/// misses.
pub fn lat_accuracy<'a, I>(corpus: I) -> Result<f64>
where
    I: IntoIterator<Item = (&'a ParsedQuestion, &'a str)>,
{
    let mut total = 0usize;
    let mut hits = 0usize;
    for (q, gold) in corpus {
        total += 1;
        if let Ok(r) = extract_lat(q) {
            if r.lat.to_lowercase() == gold.trim().to_lowercase() {
                hits += 1;
            }
        }
    }
    if total == 0 {
        return Err(Error::contract("LAT accuracy is undefined on an empty corpus"));
    }
    Ok(hits as f64 / total as f64)
}

/// One line of `analyze` output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatRecord {
    pub question_id: String,
    pub lat: Option<String>,
    pub rule_case: Option<RuleCase>,
    pub question_word: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl LatRecord {
    pub fn from_question(question_id: impl Into<String>, q: &ParsedQuestion) -> Self {
        let question_id = question_id.into();
        match extract_lat(q) {
            Ok(r) => LatRecord {
                question_id,
                lat: Some(r.lat),
                rule_case: Some(r.rule_case),
                question_word: Some(r.question_word),
                error: None,
            },
            Err(e) => LatRecord {
                question_id,
                lat: None,
                rule_case: None,
                question_word: None,
                error: Some(e.to_string()),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `(surface, pos, head, deprel)` rows.
    fn q(rows: &[(&str, &str, usize, &str)]) -> ParsedQuestion {
        let tokens = rows
            .iter()
            .enumerate()
            .map(|(i, (s, p, h, d))| ParseToken {
                index: i + 1,
                surface: s.to_string(),
                pos: p.to_string(),
                head: *h,
                deprel: d.to_string(),
            })
            .collect::<Vec<_>>();
        let text = rows.iter().map(|r| r.0).collect::<Vec<_>>().join(" ");
        ParsedQuestion::new(text, tokens).unwrap()
    }

    #[test]
    fn no_question_word() {
        let name = q(&[("Name", "VB", 0, "root"), ("the", "DT", 3, "det"), ("gene", "NN", 1, "dobj")]);
        assert_eq!(find_question_word(&name), None);
        assert!(matches!(extract_lat(&name), Err(Error::NoQuestionWord)));
    }

    #[test]
    fn self_words_case_insensitive() {
        for w in ["When", "WHO", "why"] {
            let p = q(&[(w, "WRB", 2, "advmod"), ("died", "VBD", 0, "root"), ("?", ".", 2, "punct")]);
            let r = extract_lat(&p).unwrap();
            assert_eq!(r.rule_case, RuleCase::SelfWord);
            assert_eq!(r.lat, w);
        }
    }

    #[test]
    fn how_without_adjective() {
        let p = q(&[
            ("How", "WRB", 4, "advmod"),
            ("does", "VBZ", 4, "aux"),
            ("aspirin", "NN", 4, "nsubj"),
            ("work", "VB", 0, "root"),
        ]);
        let r = extract_lat(&p).unwrap();
        assert_eq!((r.lat.as_str(), r.rule_case), ("How", RuleCase::HowSelf));
    }

    #[test]
    fn how_adjective_need_not_be_adjacent() {
        let p = q(&[
            ("How", "WRB", 4, "advmod"),
            ("is", "VBZ", 4, "cop"),
            ("the", "DT", 4, "det"),
            ("drug", "NN", 0, "root"),
            ("effective", "JJ", 4, "amod"),
        ]);
        let r = extract_lat(&p).unwrap();
        assert_eq!((r.lat.as_str(), r.rule_case), ("effective", RuleCase::HowAdjective));
    }

    #[test]
    fn non_noun_without_following_noun_falls_back() {
        let p = q(&[("What", "WP", 0, "root"), ("is", "VBZ", 1, "cop"), ("it", "PRP", 1, "nsubj"), ("?", ".", 1, "punct")]);
        let r = extract_lat(&p).unwrap();
        assert_eq!((r.lat.as_str(), r.rule_case), ("What", RuleCase::Fallback));
    }

    #[test]
    fn noun_subject_inside_window_beats_adjacent_noun() {
        // Which drug patients ... : the subject noun sits in the second slot.
        let p = q(&[
            ("Which", "WDT", 2, "det"),
            ("drug", "NN", 4, "dobj"),
            ("patients", "NNS", 4, "nsubj"),
            ("take", "VBP", 0, "root"),
        ]);
        let r = extract_lat(&p).unwrap();
        assert_eq!((r.lat.as_str(), r.rule_case), ("patients", RuleCase::ImmediateNounWindow3));
    }

    #[test]
    fn noun_subject_outside_window_ignored() {
        let p = q(&[
            ("Which", "WDT", 2, "det"),
            ("plant", "NN", 5, "nmod"),
            ("does", "VBZ", 5, "aux"),
            ("oleuropein", "NN", 5, "nsubj"),
            ("originate", "VB", 0, "root"),
        ]);
        let r = extract_lat(&p).unwrap();
        assert_eq!(r.lat, "plant");
    }

    #[test]
    fn first_question_word_wins() {
        let p = q(&[
            ("Which", "WDT", 2, "det"),
            ("gene", "NN", 3, "nsubj"),
            ("causes", "VBZ", 0, "root"),
            ("what", "WP", 3, "dobj"),
        ]);
        assert_eq!(find_question_word(&p), Some((1, "Which")));
    }

    #[test]
    fn accuracy_arithmetic() {
        let p = q(&[("Who", "WP", 0, "root")]);
        let corpus = vec![(&p, "who"), (&p, "Who"), (&p, "WHO"), (&p, "nobody")];
        assert_eq!(lat_accuracy(corpus).unwrap(), 0.75);
        assert!(lat_accuracy(Vec::<(&ParsedQuestion, &str)>::new()).is_err());
    }
}
