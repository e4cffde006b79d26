//! BioASQ Phase-B question documents.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuestionType {
    Factoid,
    List,
    Yesno,
    Summary,
}

impl QuestionType {
    pub fn as_str(self) -> &'static str {
        match self {
            QuestionType::Factoid => "factoid",
            QuestionType::List => "list",
            QuestionType::Yesno => "yesno",
            QuestionType::Summary => "summary",
        }
    }
}

impl fmt::Display for QuestionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QuestionType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "factoid" => Ok(QuestionType::Factoid),
            "list" => Ok(QuestionType::List),
            "yesno" | "yes/no" => Ok(QuestionType::Yesno),
            "summary" => Ok(QuestionType::Summary),
            other => Err(Error::Format {
                what: "question type",
                message: format!("unknown type {other:?}"),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum YesNo {
    Yes,
    No,
}

impl YesNo {
    pub fn as_str(self) -> &'static str {
        match self {
            YesNo::Yes => "yes",
            YesNo::No => "no",
        }
    }
}

impl FromStr for YesNo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "yes" => Ok(YesNo::Yes),
            "no" => Ok(YesNo::No),
            other => Err(Error::Format {
                what: "yes/no answer",
                message: format!("expected yes or no, got {other:?}"),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snippet {
    pub text: String,
    #[serde(rename = "document", default, skip_serializing_if = "Option::is_none")]
    pub document_url: Option<String>,
}

impl Snippet {
    pub fn new(text: impl Into<String>) -> Self {
        Snippet {
            text: text.into(),
            document_url: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GoldAnswer {
    /// Synonyms of the single answer.
    Factoid(Vec<String>),
    /// One synonym list per expected item.
    List(Vec<Vec<String>>),
    YesNo(YesNo),
}

impl GoldAnswer {
    fn to_value(&self) -> Value {
        match self {
            GoldAnswer::Factoid(syn) => Value::from(vec![syn.clone()]),
            GoldAnswer::List(items) => Value::from(items.clone()),
            GoldAnswer::YesNo(a) => Value::from(a.as_str()),
        }
    }

    /// Interprets a raw `exact_answer` value for the given question type.
    /// Returns `None` when the value carries no usable answer.
    pub fn from_value(qtype: QuestionType, value: &Value) -> Result<Option<Self>> {
        let bad = |message: String| Error::Format {
            what: "exact_answer",
            message,
        };
        Ok(match qtype {
            QuestionType::Summary => None,
            QuestionType::Yesno => match value {
                Value::String(s) if !s.trim().is_empty() => Some(GoldAnswer::YesNo(s.parse()?)),
                Value::Null => None,
                Value::String(_) => None,
                other => return Err(bad(format!("yes/no answer must be a string, got {other}"))),
            },
            QuestionType::Factoid => {
                let mut syn = Vec::new();
                flatten_strings(value, &mut syn).map_err(bad)?;
                (!syn.is_empty()).then_some(GoldAnswer::Factoid(syn))
            }
            QuestionType::List => {
                let items = match value {
                    Value::Null => Vec::new(),
                    Value::Array(items) => {
                        let mut out = Vec::new();
                        for item in items {
                            let mut syn = Vec::new();
                            flatten_strings(item, &mut syn).map_err(bad)?;
                            if !syn.is_empty() {
                                out.push(syn);
                            }
                        }
                        out
                    }
                    Value::String(_) => {
                        let mut syn = Vec::new();
                        flatten_strings(value, &mut syn).map_err(bad)?;
                        if syn.is_empty() {
                            Vec::new()
                        } else {
                            vec![syn]
                        }
                    }
                    other => return Err(bad(format!("list answer must be an array, got {other}"))),
                };
                (!items.is_empty()).then_some(GoldAnswer::List(items))
            }
        })
    }
}

fn flatten_strings(value: &Value, out: &mut Vec<String>) -> std::result::Result<(), String> {
    match value {
        Value::Null => Ok(()),
        Value::String(s) => {
            if !s.trim().is_empty() {
                out.push(s.clone());
            }
            Ok(())
        }
        Value::Array(items) => items.iter().try_for_each(|v| flatten_strings(v, out)),
        other => Err(format!("expected strings, got {other}")),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawQuestion", into = "RawQuestion")]
pub struct BioAsqQuestion {
    pub id: String,
    pub body: String,
    pub qtype: QuestionType,
    pub snippets: Vec<Snippet>,
    pub document_urls: Vec<String>,
    pub gold: Option<GoldAnswer>,
}

#[derive(Serialize, Deserialize)]
struct RawQuestion {
    id: String,
    body: String,
    #[serde(rename = "type")]
    qtype: QuestionType,
    #[serde(default)]
    snippets: Vec<Snippet>,
    #[serde(default)]
    documents: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    exact_answer: Option<Value>,
}

impl TryFrom<RawQuestion> for BioAsqQuestion {
    type Error = Error;

    fn try_from(raw: RawQuestion) -> Result<Self> {
        if raw.id.trim().is_empty() {
            return Err(Error::Format {
                what: "BioASQ question",
                message: "empty id".into(),
            });
        }
        let gold = match &raw.exact_answer {
            Some(v) => GoldAnswer::from_value(raw.qtype, v)?,
            None => None,
        };
        let snippets = raw
            .snippets
            .into_iter()
            .filter(|s| !s.text.trim().is_empty())
            .collect();
        Ok(BioAsqQuestion {
            id: raw.id,
            body: raw.body,
            qtype: raw.qtype,
            snippets,
            document_urls: raw.documents,
            gold,
        })
    }
}

impl From<BioAsqQuestion> for RawQuestion {
    fn from(q: BioAsqQuestion) -> Self {
        RawQuestion {
            exact_answer: q.gold.as_ref().map(GoldAnswer::to_value),
            id: q.id,
            body: q.body,
            qtype: q.qtype,
            snippets: q.snippets,
            documents: q.document_urls,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BioAsqDataset {
    pub questions: Vec<BioAsqQuestion>,
}

impl BioAsqDataset {
    pub fn from_json(text: &str) -> Result<Self> {
        let ds: BioAsqDataset = serde_json::from_str(text)?;
        let mut seen = HashSet::new();
        for q in &ds.questions {
            if !seen.insert(q.id.as_str()) {
                return Err(Error::Format {
                    what: "BioASQ dataset",
                    message: format!("duplicate question id {:?}", q.id),
                });
            }
        }
        Ok(ds)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_each_answer_shape() {
        let ds = BioAsqDataset::from_json(
            r#"{"questions": [
                {"id": "f", "body": "Which?", "type": "factoid", "exact_answer": [["Flumazenil", "flumazenil"]],
                 "snippets": [{"text": "Flumazenil works.", "document": "http://x/1"}, {"text": "  "}],
                 "documents": ["http://x/1"]},
                {"id": "l", "body": "List?", "type": "list", "exact_answer": [["a"], ["b", "B"]]},
                {"id": "y", "body": "Is?", "type": "yesno", "exact_answer": "Yes"},
                {"id": "s", "body": "Describe.", "type": "summary", "ideal_answer": "x"},
                {"id": "e", "body": "Empty?", "type": "factoid", "exact_answer": []}
            ]}"#,
        )
        .unwrap();
        let q = &ds.questions;
        assert_eq!(q[0].gold, Some(GoldAnswer::Factoid(vec!["Flumazenil".into(), "flumazenil".into()])));
        assert_eq!(q[0].snippets.len(), 1);
        assert_eq!(q[0].snippets[0].document_url.as_deref(), Some("http://x/1"));
        assert_eq!(
            q[1].gold,
            Some(GoldAnswer::List(vec![vec!["a".into()], vec!["b".into(), "B".into()]]))
        );
        assert_eq!(q[2].gold, Some(GoldAnswer::YesNo(YesNo::Yes)));
        assert_eq!(q[3].gold, None);
        assert_eq!(q[4].gold, None);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let err = BioAsqDataset::from_json(
            r#"{"questions": [{"id": "a", "body": "x", "type": "yesno"}, {"id": "a", "body": "y", "type": "yesno"}]}"#,
        );
        assert!(err.is_err());
    }

    #[test]
    fn serializes_back() {
        let text = r#"{"questions":[{"id":"l","body":"List?","type":"list","snippets":[],"documents":[],"exact_answer":[["a"],["b"]]}]}"#;
        let ds = BioAsqDataset::from_json(text).unwrap();
        let again = BioAsqDataset::from_json(&serde_json::to_string(&ds).unwrap()).unwrap();
        assert_eq!(ds, again);
    }
}
