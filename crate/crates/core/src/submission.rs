//! BioASQ submission documents.
//!
//! ```json
//! {"questions": [
//!   {"id": "f1", "type": "factoid", "exact_answer": ["flumazenil", "naloxone"]},
//!   {"id": "l1", "type": "list", "exact_answer": [["neutrophils"], ["macrophages"]]},
//!   {"id": "y1", "type": "yesno", "exact_answer": "yes"},
//!   {"id": "s1", "type": "summary"}
//! ]}
//! ```

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bioasq::{QuestionType, YesNo};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExactAnswer {
    YesNo(YesNo),
    /// One synonym array per item.
    List(Vec<Vec<String>>),
    /// Ranked answers.
    Factoid(Vec<String>),
}

impl ExactAnswer {
    /// Answer strings in rank order, taking the first synonym of nested
    /// items.
    pub fn ranked(&self) -> Vec<String> {
        match self {
            ExactAnswer::YesNo(a) => vec![a.as_str().to_string()],
            ExactAnswer::Factoid(v) => v.clone(),
            ExactAnswer::List(items) => items.iter().filter_map(|i| i.first().cloned()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubmissionEntry {
    pub id: String,
    #[serde(rename = "type", default, skip_serializing_if = "Option::is_none")]
    pub qtype: Option<QuestionType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_answer: Option<ExactAnswer>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Submission {
    pub questions: Vec<SubmissionEntry>,
}

impl Submission {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn by_id(&self) -> BTreeMap<&str, &SubmissionEntry> {
        self.questions.iter().map(|e| (e.id.as_str(), e)).collect()
    }

    pub fn ranked_answers(&self) -> BTreeMap<String, Vec<String>> {
        self.questions
            .iter()
            .filter_map(|e| e.exact_answer.as_ref().map(|a| (e.id.clone(), a.ranked())))
            .collect()
    }

    pub fn yesno_answers(&self) -> BTreeMap<String, YesNo> {
        self.questions
            .iter()
            .filter_map(|e| match e.exact_answer {
                Some(ExactAnswer::YesNo(a)) => Some((e.id.clone(), a)),
                _ => None,
            })
            .collect()
    }
}

fn is_string_array(v: &Value) -> bool {
    v.as_array().is_some_and(|a| a.iter().all(Value::is_string))
}

/// Checks the submission shape; returns every problem found.
pub fn validate_submission(doc: &Value) -> Vec<String> {
    let mut out = Vec::new();
    let Some(questions) = doc.get("questions").and_then(Value::as_array) else {
        out.push("submission must be an object with a \"questions\" array".into());
        return out;
    };
    let mut seen = HashSet::new();
    for (i, q) in questions.iter().enumerate() {
        let Some(id) = q.get("id").and_then(Value::as_str).filter(|s| !s.is_empty()) else {
            out.push(format!("entry {i}: missing id"));
            continue;
        };
        if !seen.insert(id) {
            out.push(format!("entry {i}: duplicate id {id}"));
        }
        let qtype = match q.get("type") {
            None => None,
            Some(Value::String(s)) => match s.parse::<QuestionType>() {
                Ok(t) => Some(t),
                Err(e) => {
                    out.push(format!("{id}: {e}"));
                    continue;
                }
            },
            Some(_) => {
                out.push(format!("{id}: type must be a string"));
                continue;
            }
        };
        let answer = q.get("exact_answer").filter(|v| !v.is_null());
        let ok = match (qtype, answer) {
            (Some(QuestionType::Summary), a) => a.is_none(),
            (_, None) => {
                out.push(format!("{id}: missing exact_answer"));
                continue;
            }
            (Some(QuestionType::Yesno), Some(a)) => {
                a.as_str().is_some_and(|s| s.parse::<YesNo>().is_ok())
            }
            (Some(QuestionType::Factoid), Some(a)) => {
                is_string_array(a) || a.as_array().is_some_and(|v| v.iter().all(is_string_array))
            }
            (Some(QuestionType::List), Some(a)) => a.as_array().is_some_and(|v| v.iter().all(is_string_array)),
            (None, Some(a)) => serde_json::from_value::<ExactAnswer>(a.clone()).is_ok(),
        };
        if !ok {
            let t = qtype.map_or("untyped", QuestionType::as_str);
            out.push(format!("{id}: exact_answer has the wrong shape for a {t} question"));
        }
    }
    out
}
