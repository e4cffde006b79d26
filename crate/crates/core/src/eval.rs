//! BioASQ exact-answer metrics.
//!
//! * factoid: strict accuracy (top answer correct), lenient accuracy (a
//!   correct answer among the top five) and mean reciprocal rank over the
//!   same five;
//! * list: mean precision, recall and F-measure;
//! * yes/no: accuracy, per-class F1 and their macro average.
//!
//! Answers are compared after [`normalize_answer`]. A gold question without a
//! prediction counts as answered wrongly and is tallied in `n_missing`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::bioasq::{BioAsqDataset, GoldAnswer, QuestionType, YesNo};
use crate::submission::Submission;
use crate::error::{Error, Result};

pub const FACTOID_WINDOW: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizationPolicy {
    pub lowercase: bool,
    pub trim: bool,
    pub collapse_whitespace: bool,
    pub strip_boundary_punct: bool,
}

impl Default for NormalizationPolicy {
    fn default() -> Self {
        NormalizationPolicy {
            lowercase: true,
            trim: true,
            collapse_whitespace: true,
            strip_boundary_punct: true,
        }
    }
}

impl NormalizationPolicy {
    pub fn none() -> Self {
        NormalizationPolicy {
            lowercase: false,
            trim: false,
            collapse_whitespace: false,
            strip_boundary_punct: false,
        }
    }
}

fn is_boundary_punct(c: char) -> bool {
    c.is_ascii_punctuation() || matches!(c, '‘' | '’' | '“' | '”' | '–' | '—' | '…')
}

/// Applies, in order: trim, lowercase, whitespace collapse, boundary
/// punctuation strip.
pub fn normalize_answer(text: &str, policy: &NormalizationPolicy) -> String {
    let mut s = if policy.trim { text.trim().to_string() } else { text.to_string() };
    if policy.lowercase {
        s = s.to_lowercase();
    }
    if policy.collapse_whitespace {
        s = s.split_whitespace().collect::<Vec<_>>().join(" ");
    }
    if policy.strip_boundary_punct {
        s = s.trim_matches(is_boundary_punct).to_string();
        if policy.trim {
            s = s.trim().to_string();
        }
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactoidMetrics {
    pub strict_accuracy: f64,
    pub lenient_accuracy: f64,
    pub mrr: f64,
    pub n_questions: usize,
    pub n_missing: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ListMetrics {
    pub mean_precision: f64,
    pub mean_recall: f64,
    pub mean_f_measure: f64,
    pub n_questions: usize,
    pub n_missing: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YesNoMetrics {
    pub accuracy: f64,
    /// `None` when the class F1 is undefined (no predictions or no gold
    /// instances of that class).
    pub f1_yes: Option<f64>,
    pub f1_no: Option<f64>,
    pub macro_f1: f64,
    pub n_questions: usize,
    pub n_missing: usize,
}

fn empty_gold() -> Error {
    Error::contract("evaluation needs at least one gold question")
}

pub fn eval_factoid(
    predictions: &BTreeMap<String, Vec<String>>,
    gold: &BTreeMap<String, Vec<String>>,
    policy: &NormalizationPolicy,
) -> Result<FactoidMetrics> {
    eval_factoid_window(predictions, gold, policy, FACTOID_WINDOW)
}

/// [`eval_factoid`] with a configurable credit window.
pub fn eval_factoid_window(
    predictions: &BTreeMap<String, Vec<String>>,
    gold: &BTreeMap<String, Vec<String>>,
    policy: &NormalizationPolicy,
    window: usize,
) -> Result<FactoidMetrics> {
    if gold.is_empty() {
        return Err(empty_gold());
    }
    let (mut strict, mut lenient, mut rr, mut missing) = (0.0, 0.0, 0.0, 0);
    for (id, synonyms) in gold {
        let Some(ranked) = predictions.get(id) else {
            missing += 1;
            continue;
        };
        let gold_norm: Vec<String> = synonyms.iter().map(|s| normalize_answer(s, policy)).collect();
        let rank = ranked
            .iter()
            .take(window)
            .position(|p| gold_norm.contains(&normalize_answer(p, policy)))
            .map(|i| i + 1);
        if let Some(r) = rank {
            if r == 1 {
                strict += 1.0;
            }
            lenient += 1.0;
            rr += 1.0 / r as f64;
        }
    }
    let n = gold.len() as f64;
    Ok(FactoidMetrics {
        strict_accuracy: strict / n,
        lenient_accuracy: lenient / n,
        mrr: rr / n,
        n_questions: gold.len(),
        n_missing: missing,
    })
}

/// Precision, recall and F-measure of one list answer. Each gold item is
/// credited at most once, matched greedily in prediction order.
pub fn list_scores(predicted: &[String], gold: &[Vec<String>], policy: &NormalizationPolicy) -> (f64, f64, f64) {
    if predicted.is_empty() || gold.is_empty() {
        return (0.0, 0.0, 0.0);
    }
    let gold_norm: Vec<Vec<String>> = gold
        .iter()
        .map(|syn| syn.iter().map(|s| normalize_answer(s, policy)).collect())
        .collect();
    let mut used = vec![false; gold.len()];
    let mut tp = 0usize;
    for p in predicted {
        let p = normalize_answer(p, policy);
        if let Some(j) = (0..gold_norm.len()).find(|&j| !used[j] && gold_norm[j].contains(&p)) {
            used[j] = true;
            tp += 1;
        }
    }
    let precision = tp as f64 / predicted.len() as f64;
    let recall = tp as f64 / gold.len() as f64;
    let f = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    (precision, recall, f)
}

pub fn eval_list(
    predictions: &BTreeMap<String, Vec<String>>,
    gold: &BTreeMap<String, Vec<Vec<String>>>,
    policy: &NormalizationPolicy,
) -> Result<ListMetrics> {
    if gold.is_empty() {
        return Err(empty_gold());
    }
    let (mut p_sum, mut r_sum, mut f_sum, mut missing) = (0.0, 0.0, 0.0, 0);
    for (id, items) in gold {
        let Some(pred) = predictions.get(id) else {
            missing += 1;
            continue;
        };
        let (p, r, f) = list_scores(pred, items, policy);
        p_sum += p;
        r_sum += r;
        f_sum += f;
    }
    let n = gold.len() as f64;
    Ok(ListMetrics {
        mean_precision: p_sum / n,
        mean_recall: r_sum / n,
        mean_f_measure: f_sum / n,
        n_questions: gold.len(),
        n_missing: missing,
    })
}

fn class_f1(tp: usize, fp: usize, fn_: usize) -> Option<f64> {
    if tp + fp == 0 || tp + fn_ == 0 {
        return None;
    }
    let p = tp as f64 / (tp + fp) as f64;
    let r = tp as f64 / (tp + fn_) as f64;
    Some(if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 })
}

pub fn eval_yesno(predictions: &BTreeMap<String, YesNo>, gold: &BTreeMap<String, YesNo>) -> Result<YesNoMetrics> {
    if gold.is_empty() {
        return Err(empty_gold());
    }
    let mut correct = 0usize;
    let mut missing = 0usize;
    // [class][tp, fp, fn]
    let mut counts = [[0usize; 3]; 2];
    let slot = |a: YesNo| match a {
        YesNo::Yes => 0,
        YesNo::No => 1,
    };
    for (id, &g) in gold {
        match predictions.get(id) {
            None => {
                missing += 1;
                counts[slot(g)][2] += 1;
            }
            Some(&p) if p == g => {
                correct += 1;
                counts[slot(g)][0] += 1;
            }
            Some(&p) => {
                counts[slot(p)][1] += 1;
                counts[slot(g)][2] += 1;
            }
        }
    }
    let f1_yes = class_f1(counts[0][0], counts[0][1], counts[0][2]);
    let f1_no = class_f1(counts[1][0], counts[1][1], counts[1][2]);
    Ok(YesNoMetrics {
        accuracy: correct as f64 / gold.len() as f64,
        f1_yes,
        f1_no,
        macro_f1: (f1_yes.unwrap_or(0.0) + f1_no.unwrap_or(0.0)) / 2.0,
        n_questions: gold.len(),
        n_missing: missing,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factoid: Option<FactoidMetrics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub list: Option<ListMetrics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub yesno: Option<YesNoMetrics>,
}

pub fn build_report(
    factoid: Option<FactoidMetrics>,
    list: Option<ListMetrics>,
    yesno: Option<YesNoMetrics>,
) -> Result<EvalReport> {
    if factoid.is_none() && list.is_none() && yesno.is_none() {
        return Err(Error::contract("report needs at least one metric bundle"));
    }
    Ok(EvalReport { factoid, list, yesno })
}

fn table(out: &mut String, title: &str, header: &[&str], row: &[String]) {
    let widths: Vec<usize> = header.iter().zip(row).map(|(h, v)| h.len().max(v.len())).collect();
    let line = |cells: &[&str]| {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect::<Vec<_>>()
            .join(" | ")
    };
    let _ = writeln!(out, "{title}");
    let _ = writeln!(out, "{}", line(header));
    let _ = writeln!(out, "{}", widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("-+-"));
    let cells: Vec<&str> = row.iter().map(String::as_str).collect();
    let _ = writeln!(out, "{}", line(&cells));
}

fn f4(x: f64) -> String {
    format!("{x:.4}")
}

impl EvalReport {
    pub fn total_missing(&self) -> usize {
        self.factoid.map_or(0, |m| m.n_missing)
            + self.list.map_or(0, |m| m.n_missing)
            + self.yesno.map_or(0, |m| m.n_missing)
    }

    /// Plain-text tables, sections in factoid, list, yes/no order.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        if let Some(m) = &self.factoid {
            table(
                &mut out,
                "Factoid",
                &["Questions", "Missing", "Strict Acc.", "Lenient Acc.", "MRR"],
                &[
                    m.n_questions.to_string(),
                    m.n_missing.to_string(),
                    f4(m.strict_accuracy),
                    f4(m.lenient_accuracy),
                    f4(m.mrr),
                ],
            );
        }
        if let Some(m) = &self.list {
            if !out.is_empty() {
                out.push('\n');
            }
            table(
                &mut out,
                "List",
                &["Questions", "Missing", "Mean Precision", "Recall", "F-Measure"],
                &[
                    m.n_questions.to_string(),
                    m.n_missing.to_string(),
                    f4(m.mean_precision),
                    f4(m.mean_recall),
                    f4(m.mean_f_measure),
                ],
            );
        }
        if let Some(m) = &self.yesno {
            if !out.is_empty() {
                out.push('\n');
            }
            let opt = |x: Option<f64>| x.map_or_else(|| "--".to_string(), f4);
            table(
                &mut out,
                "Yes/No",
                &["Questions", "Missing", "Accuracy", "F1 Yes", "F1 No", "Macro F1"],
                &[
                    m.n_questions.to_string(),
                    m.n_missing.to_string(),
                    f4(m.accuracy),
                    opt(m.f1_yes),
                    opt(m.f1_no),
                    f4(m.macro_f1),
                ],
            );
        }
        out
    }
}

/// Gold answers of a dataset, grouped by question type.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GoldSets {
    pub factoid: BTreeMap<String, Vec<String>>,
    pub list: BTreeMap<String, Vec<Vec<String>>>,
    pub yesno: BTreeMap<String, YesNo>,
}

impl GoldSets {
    pub fn from_dataset(ds: &BioAsqDataset) -> Self {
        let mut out = GoldSets::default();
        for q in &ds.questions {
            match &q.gold {
                Some(GoldAnswer::Factoid(s)) => {
                    out.factoid.insert(q.id.clone(), s.clone());
                }
                Some(GoldAnswer::List(items)) => {
                    out.list.insert(q.id.clone(), items.clone());
                }
                Some(GoldAnswer::YesNo(a)) => {
                    out.yesno.insert(q.id.clone(), *a);
                }
                None => {}
            }
        }
        out
    }
}

/// Scores a submission for the requested question types. Types without gold
/// questions are left out of the report.
pub fn evaluate_submission(
    submission: &Submission,
    gold: &GoldSets,
    types: &[QuestionType],
    policy: &NormalizationPolicy,
) -> Result<EvalReport> {
    let ranked = submission.ranked_answers();
    let wants = |t| types.contains(&t);
    let factoid = (wants(QuestionType::Factoid) && !gold.factoid.is_empty())
        .then(|| eval_factoid(&ranked, &gold.factoid, policy))
        .transpose()?;
    let list = (wants(QuestionType::List) && !gold.list.is_empty())
        .then(|| eval_list(&ranked, &gold.list, policy))
        .transpose()?;
    let yesno = (wants(QuestionType::Yesno) && !gold.yesno.is_empty())
        .then(|| eval_yesno(&submission.yesno_answers(), &gold.yesno))
        .transpose()?;
    build_report(factoid, list, yesno)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map<V: Clone>(pairs: &[(&str, V)]) -> BTreeMap<String, V> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }

    fn strings(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn normalization() {
        let p = NormalizationPolicy::default();
        assert_eq!(normalize_answer("  Flumazenil. ", &p), "flumazenil");
        assert_eq!(normalize_answer("lysosomal  trafficking regulator", &p), "lysosomal trafficking regulator");
        assert_eq!(normalize_answer("(BRCA1) ", &p), "brca1");
        let raw = "  Mixed  Case. ";
        assert_eq!(normalize_answer(raw, &NormalizationPolicy::none()), raw);
    }

    #[test]
    fn factoid_two_questions() {
        let pred = map(&[("q1", strings(&["a", "x"])), ("q2", strings(&["x", "y", "b"]))]);
        let gold = map(&[("q1", strings(&["A"])), ("q2", strings(&["b", "bee"]))]);
        let m = eval_factoid(&pred, &gold, &NormalizationPolicy::default()).unwrap();
        assert_eq!(m.strict_accuracy, 0.5);
        assert_eq!(m.lenient_accuracy, 1.0);
        assert!((m.mrr - (1.0 + 1.0 / 3.0) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn factoid_window_and_misses() {
        let p = NormalizationPolicy::default();
        let pred = map(&[("q", strings(&["1", "2", "3", "4", "5", "gold"]))]);
        let gold = map(&[("q", strings(&["gold"]))]);
        let m = eval_factoid(&pred, &gold, &p).unwrap();
        assert_eq!((m.strict_accuracy, m.lenient_accuracy, m.mrr), (0.0, 0.0, 0.0));
        let wide = eval_factoid_window(&pred, &gold, &p, 6).unwrap();
        assert!((wide.mrr - 1.0 / 6.0).abs() < 1e-12);

        let m = eval_factoid(&BTreeMap::new(), &gold, &p).unwrap();
        assert_eq!((m.mrr, m.n_missing), (0.0, 1));
        assert!(eval_factoid(&pred, &BTreeMap::new(), &p).is_err());
    }

    #[test]
    fn list_formula() {
        let p = NormalizationPolicy::default();
        let (pr, r, f) = list_scores(&strings(&["a", "b", "c"]), &[strings(&["a"]), strings(&["d"])], &p);
        assert!((pr - 1.0 / 3.0).abs() < 1e-12);
        assert!((r - 0.5).abs() < 1e-12);
        assert!((f - 0.4).abs() < 1e-12);
        assert_eq!(list_scores(&[], &[strings(&["a"])], &p), (0.0, 0.0, 0.0));
        assert_eq!(list_scores(&strings(&["a", "d"]), &[strings(&["a"]), strings(&["d"])], &p), (1.0, 1.0, 1.0));
    }

    #[test]
    fn list_gold_item_credited_once() {
        let p = NormalizationPolicy::default();
        let (pr, r, _) = list_scores(&strings(&["a", "A", "alpha"]), &[strings(&["a", "alpha"])], &p);
        assert!((pr - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(r, 1.0);
    }

    #[test]
    fn yesno_all_yes_rows() {
        // (gold yes, gold no, accuracy, F1 yes, macro) for all-yes submissions
        for (yes, no, acc, f1, macro_) in [
            (23, 6, 0.7931, 0.8846, 0.4423),
            (17, 13, 0.5667, 0.7234, 0.3617),
            (18, 5, 0.7826, 0.8780, 0.4390),
            (17, 6, 0.7391, 0.8500, 0.4250),
        ] {
            let mut gold = BTreeMap::new();
            let mut pred = BTreeMap::new();
            for i in 0..yes + no {
                gold.insert(format!("q{i}"), if i < yes { YesNo::Yes } else { YesNo::No });
                pred.insert(format!("q{i}"), YesNo::Yes);
            }
            let m = eval_yesno(&pred, &gold).unwrap();
            assert!((m.accuracy - acc).abs() < 1e-4);
            assert!((m.f1_yes.unwrap() - f1).abs() < 1e-4);
            assert_eq!(m.f1_no, None);
            assert!((m.macro_f1 - macro_).abs() < 1e-4);
        }
    }

    #[test]
    fn yesno_mixed_confusion_matrix() {
        // 11 yes->yes, 6 yes->no, 3 no->yes, 3 no->no
        let mut gold = BTreeMap::new();
        let mut pred = BTreeMap::new();
        let cells = [(11, YesNo::Yes, YesNo::Yes), (6, YesNo::Yes, YesNo::No), (3, YesNo::No, YesNo::Yes), (3, YesNo::No, YesNo::No)];
        let mut i = 0;
        for (count, g, p) in cells {
            for _ in 0..count {
                gold.insert(format!("q{i}"), g);
                pred.insert(format!("q{i}"), p);
                i += 1;
            }
        }
        let m = eval_yesno(&pred, &gold).unwrap();
        assert!((m.accuracy - 0.6087).abs() < 1e-4);
        assert!((m.f1_yes.unwrap() - 0.7097).abs() < 1e-4);
        assert!((m.f1_no.unwrap() - 0.4000).abs() < 1e-4);
        assert!((m.macro_f1 - 0.5548).abs() < 1e-4);
    }

    #[test]
    fn yesno_extremes() {
        let gold = map(&[("a", YesNo::Yes), ("b", YesNo::No)]);
        let m = eval_yesno(&gold, &gold).unwrap();
        assert_eq!((m.accuracy, m.macro_f1), (1.0, 1.0));
        let wrong = map(&[("a", YesNo::No), ("b", YesNo::Yes)]);
        let m = eval_yesno(&wrong, &gold).unwrap();
        assert_eq!((m.accuracy, m.f1_yes, m.f1_no, m.macro_f1), (0.0, Some(0.0), Some(0.0), 0.0));
        assert!(eval_yesno(&gold, &BTreeMap::new()).is_err());
    }

    #[test]
    fn report_sections() {
        let f = FactoidMetrics { strict_accuracy: 0.5115, lenient_accuracy: 0.6, mrr: 0.55, n_questions: 3, n_missing: 0 };
        let r = build_report(Some(f), None, None).unwrap();
        let t = r.to_table();
        assert!(t.contains("0.5115"));
        assert!(!t.contains("List"));
        assert!(build_report(None, None, None).is_err());

        let l = ListMetrics { mean_precision: 0.1119, mean_recall: 0.7033, mean_f_measure: 0.19, n_questions: 1, n_missing: 0 };
        let y = YesNoMetrics { accuracy: 0.7931, f1_yes: Some(0.8846), f1_no: None, macro_f1: 0.4423, n_questions: 29, n_missing: 0 };
        let t = build_report(Some(f), Some(l), Some(y)).unwrap().to_table();
        let (fi, li, yi) = (t.find("Factoid").unwrap(), t.find("List").unwrap(), t.find("Yes/No").unwrap());
        assert!(fi < li && li < yi);
        assert!(t.contains("--"));
        assert!(t.contains("0.4423"));
    }
}
