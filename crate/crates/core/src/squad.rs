//! SQuAD-style extractive QA documents.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// One extractive QA unit. `start_index` is a character offset into
/// `context`; `None` means the answer could not be located and is written
/// as `-1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaExample {
    pub id: String,
    pub question: String,
    pub context: String,
    pub answer_text: String,
    #[serde(with = "minus_one")]
    pub start_index: Option<usize>,
}

impl QaExample {
    /// Offset with the `-1` convention for unresolved answers.
    pub fn start_or_minus_one(&self) -> i64 {
        self.start_index.map_or(-1, |i| i as i64)
    }

    /// True when `start_index` is set and the context really contains the
    /// answer there.
    pub fn span_is_sound(&self) -> bool {
        match self.start_index {
            None => false,
            Some(start) => {
                let n = self.answer_text.chars().count();
                let found: String = self.context.chars().skip(start).take(n).collect();
                found == self.answer_text
            }
        }
    }
}

mod minus_one {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<usize>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_i64(v.map_or(-1, |i| i as i64))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<usize>, D::Error> {
        let v = i64::deserialize(d)?;
        Ok(usize::try_from(v).ok())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaDocument {
    pub version: String,
    pub data: Vec<QaArticle>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaArticle {
    pub title: String,
    pub paragraphs: Vec<QaParagraph>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaParagraph {
    pub context: String,
    pub qas: Vec<QaQuestion>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaQuestion {
    pub id: String,
    pub question: String,
    #[serde(default)]
    pub answers: Vec<QaAnswer>,
    /// Lexical answer type, passed along when the pipeline runs with the
    /// LAT feature enabled.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lat: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaAnswer {
    pub text: String,
    pub answer_start: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConversionReport {
    pub written: usize,
    pub dropped: usize,
}

pub const DOCUMENT_TITLE: &str = "BioASQ";

impl QaDocument {
    pub fn new(paragraphs: Vec<QaParagraph>) -> Self {
        QaDocument {
            version: "v2.0".into(),
            data: vec![QaArticle {
                title: DOCUMENT_TITLE.into(),
                paragraphs,
            }],
        }
    }

    pub fn questions(&self) -> impl Iterator<Item = (&QaParagraph, &QaQuestion)> {
        self.data
            .iter()
            .flat_map(|a| a.paragraphs.iter())
            .flat_map(|p| p.qas.iter().map(move |q| (p, q)))
    }
}

/// Writes resolved examples as a SQuAD document, one paragraph per example.
/// Unresolved examples are dropped and counted.
pub fn to_qa_document(examples: &[QaExample]) -> (QaDocument, ConversionReport) {
    let mut report = ConversionReport::default();
    let mut paragraphs = Vec::new();
    for ex in examples {
        let Some(start) = ex.start_index else {
            report.dropped += 1;
            continue;
        };
        report.written += 1;
        paragraphs.push(QaParagraph {
            context: ex.context.clone(),
            qas: vec![QaQuestion {
                id: ex.id.clone(),
                question: ex.question.clone(),
                answers: vec![QaAnswer {
                    text: ex.answer_text.clone(),
                    answer_start: start,
                }],
                lat: None,
            }],
        });
    }
    (QaDocument::new(paragraphs), report)
}

/// Reads examples back from a SQuAD document. Questions without answers
/// come back unresolved with empty answer text.
pub fn from_qa_document(doc: &QaDocument) -> Vec<QaExample> {
    doc.questions()
        .map(|(p, q)| {
            let first = q.answers.first();
            QaExample {
                id: q.id.clone(),
                question: q.question.clone(),
                context: p.context.clone(),
                answer_text: first.map(|a| a.text.clone()).unwrap_or_default(),
                start_index: first.map(|a| a.answer_start),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ex(id: &str, start: Option<usize>) -> QaExample {
        QaExample {
            id: id.into(),
            question: "Which drug?".into(),
            context: "Flumazenil is an antidote.".into(),
            answer_text: "Flumazenil".into(),
            start_index: start,
        }
    }

    #[test]
    fn one_resolved_example() {
        let (doc, report) = to_qa_document(&[ex("a", Some(0))]);
        assert_eq!(report, ConversionReport { written: 1, dropped: 0 });
        assert_eq!(doc.data[0].paragraphs.len(), 1);
        assert_eq!(doc.data[0].paragraphs[0].qas[0].answers[0].answer_start, 0);
    }

    #[test]
    fn unresolved_dropped_and_counted() {
        let (doc, report) = to_qa_document(&[ex("a", Some(0)), ex("b", None)]);
        assert_eq!(report.dropped, 1);
        assert_eq!(doc.questions().count(), 1);
    }

    #[test]
    fn minus_one_on_the_wire() {
        let json = serde_json::to_value(ex("a", None)).unwrap();
        assert_eq!(json["start_index"], -1);
        let back: QaExample = serde_json::from_value(json).unwrap();
        assert_eq!(back.start_index, None);
    }

    proptest! {
        #[test]
        fn resolved_examples_survive_a_round_trip(
            items in prop::collection::vec(("[a-z]{1,6}", "[ -~]{0,20}", "[ -~]{1,30}", 0usize..30), 0..8)
        ) {
            let examples: Vec<QaExample> = items
                .into_iter()
                .enumerate()
                .map(|(i, (answer, q, ctx, start))| QaExample {
                    id: format!("q{i}"),
                    question: q,
                    context: ctx,
                    answer_text: answer,
                    start_index: Some(start),
                })
                .collect();
            let (doc, _) = to_qa_document(&examples);
            let text = serde_json::to_string(&doc).unwrap();
            let parsed: QaDocument = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(from_qa_document(&parsed), examples);
        }
    }
}
