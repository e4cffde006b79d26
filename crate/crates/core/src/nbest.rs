//! Ranked model predictions ("n-best lists").
//!
//! On disk an n-best document maps each question id to its predictions in
//! descending probability order:
//!
//! ```json
//! { "q1": [ {"text": "dendritic cells", "probability": 0.755,
//!            "start_logit": 8.47, "end_logit": 9.54} ] }
//! ```

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub text: String,
    pub probability: f64,
    pub start_logit: f64,
    pub end_logit: f64,
}

impl Prediction {
    pub fn new(text: impl Into<String>, probability: f64) -> Self {
        Prediction {
            text: text.into(),
            probability,
            start_logit: 0.0,
            end_logit: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NBestList {
    pub question_id: String,
    pub predictions: Vec<Prediction>,
}

impl NBestList {
    pub fn texts(&self) -> impl Iterator<Item = &str> {
        self.predictions.iter().map(|p| p.text.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub question_id: Option<String>,
    pub record: Option<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.question_id, self.record) {
            (Some(q), Some(r)) => write!(f, "question {q} record {r}: {}", self.message),
            (Some(q), None) => write!(f, "question {q}: {}", self.message),
            _ => f.write_str(&self.message),
        }
    }
}

/// Checks an n-best document and returns every problem found.
pub fn validate_nbest(doc: &Value) -> Vec<Violation> {
    let mut out = Vec::new();
    let Some(questions) = doc.as_object() else {
        out.push(Violation {
            question_id: None,
            record: None,
            message: "n-best document must be an object keyed by question id".into(),
        });
        return out;
    };
    for (qid, records) in questions {
        let mut push = |record: Option<usize>, message: String| {
            out.push(Violation {
                question_id: Some(qid.clone()),
                record,
                message,
            })
        };
        let Some(records) = records.as_array() else {
            push(None, "predictions must be an array".into());
            continue;
        };
        let mut previous: Option<f64> = None;
        for (i, rec) in records.iter().enumerate() {
            let Some(obj) = rec.as_object() else {
                push(Some(i), "record must be an object".into());
                continue;
            };
            match obj.get("text") {
                Some(Value::String(s)) if !s.trim().is_empty() => {}
                Some(Value::String(_)) => push(Some(i), "empty text".into()),
                _ => push(Some(i), "missing or non-string text".into()),
            }
            for field in ["start_logit", "end_logit"] {
                if !obj.get(field).is_some_and(Value::is_number) {
                    push(Some(i), format!("missing or non-numeric {field}"));
                }
            }
            match obj.get("probability").and_then(Value::as_f64) {
                None => push(Some(i), "missing or non-numeric probability".into()),
                Some(p) => {
                    if !(0.0..=1.0).contains(&p) {
                        push(Some(i), format!("probability out of range ({p})"));
                    }
                    if let Some(prev) = previous {
                        if p > prev {
                            push(Some(i), format!("probabilities not in descending order ({prev} then {p})"));
                        }
                    }
                    previous = Some(p);
                }
            }
        }
    }
    out
}

/// Validates and decodes an n-best document.
pub fn parse_nbest(text: &str) -> Result<BTreeMap<String, NBestList>> {
    let value: Value = serde_json::from_str(text)?;
    from_value(value)
}

pub fn from_value(value: Value) -> Result<BTreeMap<String, NBestList>> {
    let violations = validate_nbest(&value);
    if !violations.is_empty() {
        return Err(Error::InvalidNBest(violations.iter().map(ToString::to_string).collect()));
    }
    let raw: BTreeMap<String, Vec<Prediction>> = serde_json::from_value(value)?;
    Ok(raw
        .into_iter()
        .map(|(question_id, predictions)| {
            let list = NBestList {
                question_id: question_id.clone(),
                predictions,
            };
            (question_id, list)
        })
        .collect())
}

pub fn to_value(lists: &BTreeMap<String, NBestList>) -> Value {
    let raw: BTreeMap<&str, &[Prediction]> = lists
        .iter()
        .map(|(k, v)| (k.as_str(), v.predictions.as_slice()))
        .collect();
    serde_json::to_value(raw).expect("predictions serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn bad_probability_and_order() {
        let doc = json!({"q": [
            {"text": "a", "probability": 0.2, "start_logit": 1.0, "end_logit": 1.0},
            {"text": "b", "probability": 1.5, "start_logit": 1.0, "end_logit": 1.0}
        ]});
        let v = validate_nbest(&doc);
        assert_eq!(v.len(), 2);
        assert!(v[0].message.contains("probability out of range"));
        assert!(v[1].message.contains("descending"));
        assert_eq!(v[0].record, Some(1));
    }

    #[test]
    fn missing_fields_all_reported() {
        let doc = json!({"q": [{"probability": 0.5}], "r": 3});
        let v = validate_nbest(&doc);
        assert_eq!(v.len(), 4, "{v:?}");
        assert!(parse_nbest(&doc.to_string()).is_err());
        assert!(!validate_nbest(&json!([])).is_empty());
    }

    #[test]
    fn decode_roundtrip() {
        let doc = json!({"q": [{"text": "a", "probability": 0.7, "start_logit": 1.5, "end_logit": 2.0}]});
        let lists = from_value(doc.clone()).unwrap();
        assert_eq!(lists["q"].predictions[0].text, "a");
        assert_eq!(to_value(&lists), doc);
    }
}
