//! Batch pipeline configurations and orchestration.
//!
//! The orchestrator turns a BioASQ test set into a QA-format adapter input,
//! obtains n-best predictions and entailment evidence from a [`Predictor`],
//! and assembles a submission:
//!
//! | type    | answer                                                        |
//! |---------|---------------------------------------------------------------|
//! | factoid | the top five n-best texts, in rank order                      |
//! | list    | [`postprocess_list`] over the top `list_top_k` predictions    |
//! | yesno   | `yes`, or [`decide`] over the evidence in entailment mode     |
//! | summary | passed through without an exact answer                        |
//!
//! A predictor is either a stub backed by pre-computed files, a subprocess
//! or an HTTP service. All three exchange the same documents.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};
use std::process::Command;

use serde::{Deserialize, Serialize};

use crate::bioasq::{BioAsqDataset, QuestionType, YesNo};
use crate::error::{Error, Result};
use crate::listpost::postprocess_list;
use crate::nbest::{self, NBestList};
use crate::preprocess::{build_context, ContextSource, SpanStrategy};
use crate::squad::{QaDocument, QaParagraph, QaQuestion};
use crate::submission::{ExactAnswer, Submission, SubmissionEntry};
use crate::yesno::{self, decide, split_sentences, EvidenceDocument, DEFAULT_THRESHOLD};

/// Number of ranked answers submitted for a factoid question.
pub const FACTOID_ANSWERS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum YesNoMode {
    #[default]
    AlwaysYes,
    Entailment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    #[serde(rename = "preset", default, skip_serializing_if = "Option::is_none")]
    pub preset_name: Option<String>,
    pub context_source: ContextSource,
    pub span_strategy: SpanStrategy,
    pub list_top_k: usize,
    pub yesno_mode: YesNoMode,
    pub yesno_threshold: f64,
    pub lat_feature: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            preset_name: None,
            context_source: ContextSource::Snippets,
            span_strategy: SpanStrategy::LowestIndex,
            list_top_k: 5,
            yesno_mode: YesNoMode::AlwaysYes,
            yesno_threshold: DEFAULT_THRESHOLD,
            lat_feature: false,
        }
    }
}

/// Keys accepted in a configuration file. `preset` selects the base
/// configuration, every other key overrides it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub preset: Option<String>,
    pub context_source: Option<ContextSource>,
    pub span_strategy: Option<SpanStrategy>,
    pub list_top_k: Option<usize>,
    pub yesno_mode: Option<YesNoMode>,
    pub yesno_threshold: Option<f64>,
    pub lat_feature: Option<bool>,
}

impl ConfigOverrides {
    pub fn apply(&self, mut base: PipelineConfig) -> PipelineConfig {
        if let Some(v) = self.context_source {
            base.context_source = v;
        }
        if let Some(v) = self.span_strategy {
            base.span_strategy = v;
        }
        if let Some(v) = self.list_top_k {
            base.list_top_k = v;
        }
        if let Some(v) = self.yesno_mode {
            base.yesno_mode = v;
        }
        if let Some(v) = self.yesno_threshold {
            base.yesno_threshold = v;
        }
        if let Some(v) = self.lat_feature {
            base.lat_feature = v;
        }
        base
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.list_top_k == 0 {
            return Err(Error::contract("list_top_k must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.yesno_threshold) {
            return Err(Error::contract(format!(
                "yesno_threshold must lie in [0, 1], got {}",
                self.yesno_threshold
            )));
        }
        if let SpanStrategy::BestOccurrence { window_chars: 0 } = self.span_strategy {
            return Err(Error::contract("window_chars must be at least 1"));
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let o: ConfigOverrides = toml::from_str(text).map_err(|e| Error::Format {
            what: "pipeline config",
            message: e.to_string(),
        })?;
        let base = match &o.preset {
            Some(name) => load_preset(name)?,
            None => PipelineConfig::default(),
        };
        let cfg = o.apply(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

pub const PRESET_NAMES: [&str; 10] = [
    "QA1-b1",
    "QA1-b2",
    "UNCC_QA1-b3",
    "UNCC_QA3-b3",
    "UNCC_QA2-b3",
    "FACTOIDS-b4",
    "UNCC_QA1-b4",
    "UNCC_QA1-b5",
    "QA1-b5",
    "UNCC_QA3-b5",
];

/// Configuration of one of the submitted systems, named `<system>-b<batch>`.
pub fn load_preset(name: &str) -> Result<PipelineConfig> {
    use ContextSource::*;
    use YesNoMode::*;
    // (context, top-k for lists, yes/no mode, LAT feature)
    let (context_source, list_top_k, yesno_mode, lat_feature) = match name {
        "QA1-b1" | "QA1-b2" | "UNCC_QA1-b3" | "UNCC_QA3-b3" => (Snippets, 20, AlwaysYes, false),
        "UNCC_QA2-b3" => (Documents, 20, AlwaysYes, false),
        "FACTOIDS-b4" => (Snippets, 5, AlwaysYes, false),
        "UNCC_QA1-b4" => (Snippets, 5, Entailment, true),
        "UNCC_QA1-b5" => (Snippets, 5, AlwaysYes, false),
        "QA1-b5" => (Snippets, 5, AlwaysYes, true),
        "UNCC_QA3-b5" => (Documents, 5, Entailment, false),
        _ => {
            return Err(Error::UnknownPreset {
                name: name.to_string(),
                valid: PRESET_NAMES.join(", "),
            })
        }
    };
    Ok(PipelineConfig {
        preset_name: Some(name.to_string()),
        context_source,
        span_strategy: SpanStrategy::LowestIndex,
        list_top_k,
        yesno_mode,
        yesno_threshold: DEFAULT_THRESHOLD,
        lat_feature,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntailmentRequest {
    pub question_id: String,
    pub question: String,
    pub sentences: Vec<String>,
}

/// Document handed to the model adapter: a SQuAD-style QA document for the
/// factoid and list questions plus the yes/no sentences to score.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdapterInput {
    #[serde(flatten)]
    pub qa: QaDocument,
    #[serde(default)]
    pub entailment_requests: Vec<EntailmentRequest>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AdapterOutput {
    pub nbest: BTreeMap<String, NBestList>,
    pub evidence: EvidenceDocument,
}

pub trait Predictor {
    fn predict(&self, input: &AdapterInput) -> Result<AdapterOutput>;
}

/// Pre-computed n-best and evidence documents.
#[derive(Debug, Clone, Default)]
pub struct StubPredictor {
    pub output: AdapterOutput,
}

impl StubPredictor {
    pub fn from_files(nbest_path: &Path, evidence_path: Option<&Path>) -> Result<Self> {
        let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| Error::io(p, e));
        let nbest = nbest::parse_nbest(&read(nbest_path)?)?;
        let evidence = match evidence_path {
            Some(p) => yesno::parse_evidence(&read(p)?)?,
            None => EvidenceDocument::new(),
        };
        Ok(StubPredictor {
            output: AdapterOutput { nbest, evidence },
        })
    }
}

impl Predictor for StubPredictor {
    fn predict(&self, _input: &AdapterInput) -> Result<AdapterOutput> {
        Ok(self.output.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Invocation {
    /// Argument template; `{in}`, `{out}` and `{evidence}` are replaced by
    /// the exchange paths.
    Command(String),
    /// Base URL serving `POST /predict` and `POST /entail`.
    Http(String),
}

impl Invocation {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::contract("adapter invocation is empty"));
        }
        Ok(if s.starts_with("http://") || s.starts_with("https://") {
            Invocation::Http(s.trim_end_matches('/').to_string())
        } else {
            Invocation::Command(s.to_string())
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdapterExchange {
    pub qa_input_path: PathBuf,
    pub nbest_output_path: PathBuf,
    pub evidence_output_path: PathBuf,
    pub invocation: Invocation,
}

impl AdapterExchange {
    /// Exchange files `qa.json`, `nbest.json` and `evidence.json` in `dir`.
    pub fn in_dir(dir: &Path, invocation: Invocation) -> Self {
        AdapterExchange {
            qa_input_path: dir.join("qa.json"),
            nbest_output_path: dir.join("nbest.json"),
            evidence_output_path: dir.join("evidence.json"),
            invocation,
        }
    }

    fn check(&self) -> Result<()> {
        let paths = [&self.qa_input_path, &self.nbest_output_path, &self.evidence_output_path];
        let distinct: HashSet<_> = paths.iter().collect();
        if distinct.len() != paths.len() {
            return Err(Error::contract("adapter exchange paths must be distinct"));
        }
        Ok(())
    }

    fn write(path: &Path, text: &str) -> Result<()> {
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    fn run_command(&self, template: &str) -> Result<()> {
        let words = shell_words::split(template).map_err(|e| Error::Adapter(format!("bad command template: {e}")))?;
        let args: Vec<String> = words
            .iter()
            .map(|w| {
                w.replace("{in}", &self.qa_input_path.to_string_lossy())
                    .replace("{out}", &self.nbest_output_path.to_string_lossy())
                    .replace("{evidence}", &self.evidence_output_path.to_string_lossy())
            })
            .collect();
        let (program, rest) = args
            .split_first()
            .ok_or_else(|| Error::Adapter("empty command template".into()))?;
        let output = Command::new(program)
            .args(rest)
            .output()
            .map_err(|e| Error::Adapter(format!("could not start {program}: {e}")))?;
        if !output.status.success() {
            return Err(Error::Adapter(format!(
                "{program} exited with {}: {}",
                output.status,
                String::from_utf8_lossy(&output.stderr).trim()
            )));
        }
        Ok(())
    }

    fn post(url: &str, body: String) -> Result<String> {
        ureq::post(url)
            .header("Content-Type", "application/json")
            .send(body)
            .map_err(|e| Error::Adapter(format!("POST {url}: {e}")))?
            .body_mut()
            .read_to_string()
            .map_err(|e| Error::Adapter(format!("POST {url}: {e}")))
    }
}

impl Predictor for AdapterExchange {
    fn predict(&self, input: &AdapterInput) -> Result<AdapterOutput> {
        self.check()?;
        let input_json = serde_json::to_string_pretty(input)?;
        Self::write(&self.qa_input_path, &input_json)?;
        match &self.invocation {
            Invocation::Command(template) => {
                let _ = std::fs::remove_file(&self.evidence_output_path);
                self.run_command(template)?;
            }
            Invocation::Http(base) => {
                let nbest = Self::post(&format!("{base}/predict"), serde_json::to_string(&input.qa)?)?;
                Self::write(&self.nbest_output_path, &nbest)?;
                if !input.entailment_requests.is_empty() {
                    let ev = Self::post(
                        &format!("{base}/entail"),
                        serde_json::to_string(&input.entailment_requests)?,
                    )?;
                    Self::write(&self.evidence_output_path, &ev)?;
                }
            }
        }
        let evidence_path = self.evidence_output_path.exists().then_some(self.evidence_output_path.as_path());
        if evidence_path.is_none() && !input.entailment_requests.is_empty() {
            return Err(Error::Adapter(format!(
                "adapter did not write {}",
                self.evidence_output_path.display()
            )));
        }
        Ok(StubPredictor::from_files(&self.nbest_output_path, evidence_path)?.output)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PipelineOutput {
    pub submission: Submission,
    pub warnings: Vec<String>,
}

/// Builds the adapter input for a test set.
pub fn adapter_input(
    test_set: &BioAsqDataset,
    config: &PipelineConfig,
    docs: &BTreeMap<String, String>,
    lats: &BTreeMap<String, String>,
    warnings: &mut Vec<String>,
) -> AdapterInput {
    let mut paragraphs = Vec::new();
    let mut requests = Vec::new();
    for q in &test_set.questions {
        match q.qtype {
            QuestionType::Factoid | QuestionType::List => {
                let context = match build_context(q, config.context_source, docs) {
                    Ok(c) => c,
                    Err(e) => {
                        warnings.push(e.to_string());
                        continue;
                    }
                };
                let lat = if config.lat_feature {
                    let lat = lats.get(&q.id).cloned();
                    if lat.is_none() {
                        warnings.push(format!("no LAT for question {}", q.id));
                    }
                    lat
                } else {
                    None
                };
                paragraphs.push(QaParagraph {
                    context,
                    qas: vec![QaQuestion {
                        id: q.id.clone(),
                        question: q.body.clone(),
                        answers: Vec::new(),
                        lat,
                    }],
                });
            }
            QuestionType::Yesno if config.yesno_mode == YesNoMode::Entailment => {
                requests.push(EntailmentRequest {
                    question_id: q.id.clone(),
                    question: q.body.clone(),
                    sentences: split_sentences(&q.snippets),
                });
            }
            _ => {}
        }
    }
    AdapterInput {
        qa: QaDocument::new(paragraphs),
        entailment_requests: requests,
    }
}

/// Runs one batch end to end. Every test question appears exactly once in
/// the submission, in input order.
pub fn run_pipeline(
    test_set: &BioAsqDataset,
    config: &PipelineConfig,
    predictor: &dyn Predictor,
    docs: &BTreeMap<String, String>,
    lats: &BTreeMap<String, String>,
) -> Result<PipelineOutput> {
    config.validate()?;
    let mut warnings = Vec::new();
    let input = adapter_input(test_set, config, docs, lats, &mut warnings);
    let output = predictor.predict(&input)?;

    let mut entries = Vec::with_capacity(test_set.questions.len());
    for q in &test_set.questions {
        let nbest = output.nbest.get(&q.id);
        let needs_nbest = matches!(q.qtype, QuestionType::Factoid | QuestionType::List);
        if needs_nbest && nbest.is_none() {
            warnings.push(format!("no n-best predictions for question {}", q.id));
        }
        let exact_answer = match q.qtype {
            QuestionType::Factoid => {
                let mut seen = HashSet::new();
                let ranked = nbest
                    .into_iter()
                    .flat_map(|n| n.texts())
                    .map(str::trim)
                    .filter(|t| seen.insert(t.to_lowercase()))
                    .take(FACTOID_ANSWERS)
                    .map(str::to_string)
                    .collect();
                Some(ExactAnswer::Factoid(ranked))
            }
            QuestionType::List => {
                let items = nbest.map(|n| postprocess_list(n, config.list_top_k)).unwrap_or_default();
                Some(ExactAnswer::List(items.to_exact_answer()))
            }
            QuestionType::Yesno => Some(ExactAnswer::YesNo(match config.yesno_mode {
                YesNoMode::AlwaysYes => YesNo::Yes,
                YesNoMode::Entailment => {
                    let ev = output.evidence.get(&q.id).map(Vec::as_slice).unwrap_or(&[]);
                    decide(ev, config.yesno_threshold).answer
                }
            })),
            QuestionType::Summary => None,
        };
        entries.push(SubmissionEntry {
            id: q.id.clone(),
            qtype: Some(q.qtype),
            exact_answer,
        });
    }
    Ok(PipelineOutput {
        submission: Submission { questions: entries },
        warnings,
    })
}
