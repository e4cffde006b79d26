//! Yes/no answers from contradiction evidence.
//!
//! Each candidate sentence is scored against the question by an external
//! entailment model. If any sentence contradicts the question with
//! probability above the threshold the answer is "no", otherwise "yes".

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bioasq::{Snippet, YesNo};
use crate::error::{Error, Result};

pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntailmentEvidence {
    pub sentence: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entailment: Option<f64>,
    pub contradiction: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub neutral: Option<f64>,
}

impl EntailmentEvidence {
    pub fn new(sentence: impl Into<String>, entailment: f64, contradiction: f64, neutral: f64) -> Self {
        EntailmentEvidence {
            sentence: sentence.into(),
            entailment: Some(entailment),
            contradiction,
            neutral: Some(neutral),
        }
    }

    fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        let named = [
            ("entailment", self.entailment),
            ("contradiction", Some(self.contradiction)),
            ("neutral", self.neutral),
        ];
        for (name, p) in named {
            if let Some(p) = p {
                if !(0.0..=1.0).contains(&p) {
                    out.push(format!("{name} probability out of range ({p})"));
                }
            }
        }
        if let (Some(e), Some(n)) = (self.entailment, self.neutral) {
            let sum = e + self.contradiction + n;
            if (sum - 1.0).abs() > 1e-6 {
                out.push(format!("probabilities sum to {sum}, not 1"));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YesNoDecision {
    pub answer: YesNo,
    pub deciding_sentence: Option<String>,
    pub max_contradiction: f64,
}

pub fn decide(evidence: &[EntailmentEvidence], threshold: f64) -> YesNoDecision {
    let max_contradiction = evidence.iter().map(|e| e.contradiction).fold(0.0, f64::max);
    match evidence.iter().find(|e| e.contradiction > threshold) {
        Some(e) => YesNoDecision {
            answer: YesNo::No,
            deciding_sentence: Some(e.sentence.clone()),
            max_contradiction,
        },
        None => YesNoDecision {
            answer: YesNo::Yes,
            deciding_sentence: None,
            max_contradiction,
        },
    }
}

const ABBREVIATIONS: &[&str] = &[
    "al.", "approx.", "ca.", "cf.", "dr.", "e.g.", "eq.", "et al.", "etc.", "fig.", "figs.",
    "i.e.", "no.", "ref.", "resp.", "vs.",
];

fn ends_with_abbreviation(text: &str) -> bool {
    let lower = text.to_lowercase();
    let last = lower.split_whitespace().next_back().unwrap_or("");
    ABBREVIATIONS.contains(&last)
}

/// Candidate sentences from snippets, in order.
///
/// A sentence ends at `.`, `!` or `?` followed by whitespace and an
/// uppercase letter, or by the end of the text, unless the word ending there
/// is a known abbreviation.
pub fn split_sentences(snippets: &[Snippet]) -> Vec<String> {
    let mut out = Vec::new();
    for snippet in snippets {
        let text = snippet.text.as_str();
        let mut start = 0;
        let chars: Vec<(usize, char)> = text.char_indices().collect();
        for (k, &(i, c)) in chars.iter().enumerate() {
            if !matches!(c, '.' | '!' | '?') {
                continue;
            }
            let end = i + c.len_utf8();
            let rest = &chars[k + 1..];
            let ws = rest.iter().take_while(|(_, c)| c.is_whitespace()).count();
            let boundary = match rest.get(ws) {
                None => true,
                Some((_, next)) => ws > 0 && next.is_uppercase(),
            };
            if boundary && !ends_with_abbreviation(&text[start..end]) {
                out.push(text[start..end].trim().to_string());
                start = end;
            }
        }
        out.push(text[start..].trim().to_string());
    }
    out.retain(|s| !s.is_empty());
    out
}

/// Evidence document: question id to scored sentences.
pub type EvidenceDocument = BTreeMap<String, Vec<EntailmentEvidence>>;

pub fn parse_evidence(text: &str) -> Result<EvidenceDocument> {
    let doc: EvidenceDocument = serde_json::from_str(text)?;
    let mut problems = Vec::new();
    for (qid, ev) in &doc {
        for (i, e) in ev.iter().enumerate() {
            problems.extend(e.problems().into_iter().map(|p| format!("question {qid} record {i}: {p}")));
        }
    }
    if problems.is_empty() {
        Ok(doc)
    } else {
        Err(Error::Format {
            what: "evidence document",
            message: problems.join("; "),
        })
    }
}
