//! Turning n-best factoid predictions into list answers.
//!
//! The top `k` predictions are split on commas and on the standalone words
//! "and", "also" and "as well as". Pieces longer than 100 characters are
//! dropped (BioASQ ignores them) and repeats are removed.
//!
//! A piece counts as a repeat when its words, compared case-insensitively,
//! appear as a contiguous run inside an item that was already accepted. That
//! covers exact duplicates and spans the model cut short, such as
//! "distinct subtypes of dendritic" after "distinct subtypes of dendritic
//! cells".

use serde::{Deserialize, Serialize};

use crate::nbest::NBestList;

pub const MAX_ITEM_CHARS: usize = 100;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ListAnswer {
    pub items: Vec<String>,
}

impl ListAnswer {
    /// BioASQ shape: one single-synonym array per item.
    pub fn to_exact_answer(&self) -> Vec<Vec<String>> {
        self.items.iter().map(|i| vec![i.clone()]).collect()
    }
}

pub fn select_top_k(n: &NBestList, k: usize) -> NBestList {
    NBestList {
        question_id: n.question_id.clone(),
        predictions: n.predictions.iter().take(k).cloned().collect(),
    }
}

/// Byte ranges of whitespace-separated words.
fn word_spans(text: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                spans.push((s, i));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        spans.push((s, text.len()));
    }
    spans
}

/// Splits a prediction into candidate list items. Pieces are trimmed slices
/// of the input; empty pieces are dropped.
pub fn split_answer_text(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let spans = word_spans(part);
        let word = |i: usize| spans.get(i).map(|&(s, e)| part[s..e].to_lowercase());
        let mut piece_start = 0;
        let mut i = 0;
        while i < spans.len() {
            let sep_len = if word(i).as_deref() == Some("as")
                && word(i + 1).as_deref() == Some("well")
                && word(i + 2).as_deref() == Some("as")
            {
                3
            } else if matches!(word(i).as_deref(), Some("and" | "also")) {
                1
            } else {
                0
            };
            if sep_len > 0 {
                out.push(part[piece_start..spans[i].0].trim().to_string());
                piece_start = spans[i + sep_len - 1].1;
                i += sep_len;
            } else {
                i += 1;
            }
        }
        out.push(part[piece_start..].trim().to_string());
    }
    out.retain(|p| !p.is_empty());
    out
}

fn lowered_words(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_lowercase).collect()
}

fn contains_run(haystack: &[String], needle: &[String]) -> bool {
    !needle.is_empty() && haystack.windows(needle.len()).any(|w| w == needle)
}

/// Top-k selection, splitting, length filter and de-duplication, keeping the
/// first-ranked surface form of every item.
pub fn postprocess_list(n: &NBestList, k: usize) -> ListAnswer {
    let mut items: Vec<String> = Vec::new();
    let mut accepted: Vec<Vec<String>> = Vec::new();
    for pred in select_top_k(n, k).predictions {
        for piece in split_answer_text(&pred.text) {
            if piece.chars().count() > MAX_ITEM_CHARS {
                continue;
            }
            let words = lowered_words(&piece);
            if accepted.iter().any(|a| contains_run(a, &words)) {
                continue;
            }
            accepted.push(words);
            items.push(piece);
        }
    }
    ListAnswer { items }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nbest::Prediction;
    use proptest::prelude::*;

    fn nbest(texts: &[&str]) -> NBestList {
        let n = texts.len() as f64;
        NBestList {
            question_id: "q".into(),
            predictions: texts
                .iter()
                .enumerate()
                .map(|(i, t)| Prediction::new(*t, (n - i as f64) / (n + 1.0)))
                .collect(),
        }
    }

    #[test]
    fn top_k() {
        assert_eq!(select_top_k(&nbest(&["a", "b", "c"]), 5).predictions.len(), 3);
        let twenty: Vec<String> = (0..20).map(|i| format!("p{i}")).collect();
        let refs: Vec<&str> = twenty.iter().map(String::as_str).collect();
        let top = select_top_k(&nbest(&refs), 5);
        assert_eq!(top.texts().collect::<Vec<_>>(), ["p0", "p1", "p2", "p3", "p4"]);
    }

    #[test]
    fn separators() {
        assert_eq!(split_answer_text("A as well as B"), ["A", "B"]);
        assert_eq!(split_answer_text("dendritic cells"), ["dendritic cells"]);
        assert_eq!(split_answer_text("X AND Y also Z"), ["X", "Y", "Z"]);
        assert_eq!(split_answer_text("sandy, android"), ["sandy", "android"]);
        assert_eq!(split_answer_text(" , and ,"), Vec::<String>::new());
        assert_eq!(split_answer_text("as well"), ["as well"]);
    }

    #[test]
    fn pieces_keep_original_spacing() {
        assert_eq!(
            split_answer_text("macrophages and  distinct subtypes"),
            ["macrophages", "distinct subtypes"]
        );
    }

    #[test]
    fn long_items_removed() {
        let long = "x".repeat(150);
        assert!(postprocess_list(&nbest(&[&long]), 5).items.is_empty());
        let exactly = "y".repeat(100);
        assert_eq!(postprocess_list(&nbest(&[&exactly]), 5).items.len(), 1);
    }

    #[test]
    fn case_insensitive_dedup_keeps_first() {
        assert_eq!(postprocess_list(&nbest(&["X and Y", "x"]), 5).items, ["X", "Y"]);
    }

    fn arb_predictions() -> impl Strategy<Value = Vec<String>> {
        let word = prop_oneof![
            Just("and".to_string()),
            Just("also".to_string()),
            Just("as well as".to_string()),
            Just(",".to_string()),
            "[a-zA-Z]{1,8}",
        ];
        prop::collection::vec(prop::collection::vec(word, 1..8).prop_map(|w| w.join(" ")), 0..8)
    }

    proptest! {
        #[test]
        fn output_invariants(texts in arb_predictions(), k in 1usize..10) {
            let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
            let out = postprocess_list(&nbest(&refs), k);
            for (i, item) in out.items.iter().enumerate() {
                prop_assert!(item.chars().count() <= MAX_ITEM_CHARS);
                prop_assert_eq!(item.trim(), item.as_str());
                prop_assert!(texts.iter().any(|t| t.contains(item.as_str())));
                for other in &out.items[..i] {
                    prop_assert_ne!(other.to_lowercase(), item.to_lowercase());
                }
            }
        }

        #[test]
        fn smaller_k_is_a_prefix(texts in arb_predictions(), k in 1usize..8) {
            let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
            let small = postprocess_list(&nbest(&refs), k).items;
            let large = postprocess_list(&nbest(&refs), k + 1).items;
            prop_assert_eq!(&large[..small.len()], &small[..]);
        }

        #[test]
        fn idempotent_on_clean_output(texts in arb_predictions()) {
            let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
            let once = postprocess_list(&nbest(&refs), 10).items;
            let again_refs: Vec<&str> = once.iter().map(String::as_str).collect();
            let twice = postprocess_list(&nbest(&again_refs), again_refs.len().max(1)).items;
            prop_assert_eq!(once, twice);
        }
    }
}
