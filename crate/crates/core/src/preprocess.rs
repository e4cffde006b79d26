//! From BioASQ questions to extractive-QA training examples.

use std::collections::{BTreeMap, HashSet};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bioasq::{BioAsqQuestion, GoldAnswer};
use crate::error::{Error, Result};
use crate::squad::QaExample;

/// Keeps questions that carry a gold answer, in order.
pub fn clean_dataset(raw: Vec<BioAsqQuestion>) -> Vec<BioAsqQuestion> {
    raw.into_iter().filter(|q| q.gold.is_some()).collect()
}

/// Seeded random train/test split. The test set has
/// `round(test_fraction * n)` items; both halves keep input order.
pub fn split_dataset<T: Clone>(data: &[T], test_fraction: f64, seed: u64) -> Result<(Vec<T>, Vec<T>)> {
    if data.is_empty() {
        return Err(Error::contract("cannot split an empty dataset"));
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::contract(format!(
            "test fraction must lie strictly between 0 and 1, got {test_fraction}"
        )));
    }
    let n = data.len();
    let n_test = ((test_fraction * n as f64).round() as usize).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picked: HashSet<usize> = sample(&mut rng, n, n_test).into_iter().collect();

    let mut train = Vec::with_capacity(n - n_test);
    let mut test = Vec::with_capacity(n_test);
    for (i, item) in data.iter().enumerate() {
        if picked.contains(&i) {
            test.push(item.clone());
        } else {
            train.push(item.clone());
        }
    }
    Ok((train, test))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContextSource {
    #[default]
    Snippets,
    Documents,
}

/// Joins snippet texts (or pre-fetched document texts, in URL order) with a
/// single space, dropping exact duplicates.
pub fn build_context(
    q: &BioAsqQuestion,
    source: ContextSource,
    docs: &BTreeMap<String, String>,
) -> Result<String> {
    let texts: Vec<&str> = match source {
        ContextSource::Snippets => q.snippets.iter().map(|s| s.text.as_str()).collect(),
        ContextSource::Documents => q
            .document_urls
            .iter()
            .map(|url| {
                docs.get(url)
                    .map(String::as_str)
                    .ok_or_else(|| Error::MissingDocument { url: url.clone() })
            })
            .collect::<Result<_>>()?,
    };
    let mut seen = HashSet::new();
    let parts: Vec<&str> = texts
        .into_iter()
        .map(str::trim)
        .filter(|t| !t.is_empty() && seen.insert(*t))
        .collect();
    if parts.is_empty() {
        return Err(Error::EmptyContext { id: q.id.clone() });
    }
    Ok(parts.join(" "))
}

pub const DEFAULT_WINDOW_CHARS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpanStrategy {
    /// First case-sensitive occurrence.
    #[default]
    LowestIndex,
    /// The occurrence whose neighbourhood shares the most content words with
    /// the question.
    BestOccurrence { window_chars: usize },
}

impl SpanStrategy {
    pub fn best_occurrence() -> Self {
        SpanStrategy::BestOccurrence {
            window_chars: DEFAULT_WINDOW_CHARS,
        }
    }
}

const STOPWORDS: &[&str] = &[
    "a", "about", "after", "all", "also", "am", "an", "and", "any", "are", "as", "at", "be",
    "been", "before", "being", "between", "both", "but", "by", "can", "could", "did", "do",
    "does", "doing", "during", "each", "few", "for", "from", "further", "had", "has", "have",
    "having", "he", "her", "here", "hers", "him", "his", "how", "i", "if", "in", "into", "is",
    "it", "its", "itself", "may", "me", "might", "more", "most", "must", "my", "no", "nor",
    "not", "of", "off", "on", "once", "only", "or", "other", "our", "out", "over", "own",
    "same", "shall", "she", "should", "so", "some", "such", "than", "that", "the", "their",
    "them", "then", "there", "these", "they", "this", "those", "through", "to", "too", "under",
    "until", "up", "very", "was", "we", "were", "what", "when", "where", "which", "while",
    "who", "whom", "whose", "why", "will", "with", "would", "you", "your",
];

pub fn is_stopword(word: &str) -> bool {
    STOPWORDS.binary_search(&word).is_ok()
}

fn words(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
}

/// Lowercased question words minus stopwords.
pub fn content_words(question: &str) -> HashSet<String> {
    words(question).filter(|w| !is_stopword(w)).collect()
}

/// Character offsets of every (possibly overlapping) case-sensitive
/// occurrence of `needle`.
pub fn occurrences(haystack: &str, needle: &str) -> Vec<usize> {
    if needle.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut chars_before = 0;
    let mut last_byte = 0;
    let mut from = 0;
    while let Some(rel) = haystack[from..].find(needle) {
        let at = from + rel;
        chars_before += haystack[last_byte..at].chars().count();
        last_byte = at;
        out.push(chars_before);
        // step one character past the match start
        from = at + haystack[at..].chars().next().map_or(1, char::len_utf8);
    }
    out
}

/// Number of distinct question content words found within `window` chars
/// on either side of the span `[start, start + len)`.
pub fn window_overlap(context: &[char], start: usize, len: usize, question: &HashSet<String>, window: usize) -> usize {
    let left: String = context[start.saturating_sub(window)..start].iter().collect();
    let end = (start + len).min(context.len());
    let right: String = context[end..(end + window).min(context.len())].iter().collect();
    let found: HashSet<String> = words(&left).chain(words(&right)).collect();
    question.iter().filter(|w| found.contains(*w)).count()
}

/// Character offset of `answer` in `context`, or `None` when it does not
/// occur.
pub fn resolve_answer_span(
    context: &str,
    answer: &str,
    question: &str,
    strategy: SpanStrategy,
) -> Option<usize> {
    let hits = occurrences(context, answer);
    match strategy {
        SpanStrategy::LowestIndex => hits.first().copied(),
        SpanStrategy::BestOccurrence { window_chars } => {
            if hits.len() <= 1 {
                return hits.first().copied();
            }
            let chars: Vec<char> = context.chars().collect();
            let len = answer.chars().count();
            let qwords = content_words(question);
            let mut best: Option<(usize, usize)> = None;
            for &h in &hits {
                let score = window_overlap(&chars, h, len, &qwords, window_chars.max(1));
                if best.is_none_or(|(s, _)| score > s) {
                    best = Some((score, h));
                }
            }
            best.map(|(_, h)| h)
        }
    }
}

/// Removes `floor(removal_fraction * Z)` of the `Z` examples whose answer
/// starts at offset 0, chosen uniformly with a seeded generator.
pub fn balance_zero_start(data: &[QaExample], removal_fraction: f64, seed: u64) -> Result<Vec<QaExample>> {
    if !(0.0..=1.0).contains(&removal_fraction) {
        return Err(Error::contract(format!(
            "removal fraction must lie in [0, 1], got {removal_fraction}"
        )));
    }
    let zero: Vec<usize> = data
        .iter()
        .enumerate()
        .filter(|(_, e)| e.start_index == Some(0))
        .map(|(i, _)| i)
        .collect();
    // 1e-9 absorbs binary representation error, e.g. 0.7 * 120
    let n_remove = ((removal_fraction * zero.len() as f64) + 1e-9).floor() as usize;
    let n_remove = n_remove.min(zero.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let removed: HashSet<usize> = sample(&mut rng, zero.len(), n_remove)
        .into_iter()
        .map(|k| zero[k])
        .collect();
    Ok(data
        .iter()
        .enumerate()
        .filter(|(i, _)| !removed.contains(i))
        .map(|(_, e)| e.clone())
        .collect())
}

/// Turns answered factoid and list questions into QA examples.
///
/// A factoid question gives one example; the first synonym that occurs in
/// the context is used, or the first synonym unresolved if none does. A list
/// question gives one example per gold item, with ids suffixed `_<n>`.
/// Yes/no and summary questions are not extractive and are skipped.
pub fn examples_from_question(q: &BioAsqQuestion, context: &str, strategy: SpanStrategy) -> Vec<QaExample> {
    let ground = |id: String, synonyms: &[String]| {
        let resolved = synonyms.iter().find_map(|s| {
            resolve_answer_span(context, s, &q.body, strategy).map(|i| (s.clone(), Some(i)))
        });
        let (answer_text, start_index) =
            resolved.unwrap_or_else(|| (synonyms.first().cloned().unwrap_or_default(), None));
        QaExample {
            id,
            question: q.body.clone(),
            context: context.to_string(),
            answer_text,
            start_index,
        }
    };
    match &q.gold {
        Some(GoldAnswer::Factoid(syn)) => vec![ground(q.id.clone(), syn)],
        Some(GoldAnswer::List(items)) => items
            .iter()
            .enumerate()
            .map(|(i, syn)| ground(format!("{}_{}", q.id, i + 1), syn))
            .collect(),
        _ => Vec::new(),
    }
}
