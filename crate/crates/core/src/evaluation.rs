//! Reception judgments and the statistics computed from them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{Catalog, FilmRecord};

/// Minimum share of indexed descriptors a viewer must evoke (inclusive).
pub const CONVERGENCE_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Coherent,
    Incoherent,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Coherent => "coherent",
            Verdict::Incoherent => "incoherent",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "coherent" => Some(Verdict::Coherent),
            "incoherent" => Some(Verdict::Incoherent),
            _ => None,
        }
    }
}

/// One panelist's verdict on one (input, output) link.
///
/// `id` is the idempotency key of judgments recorded through the service;
/// it is absent from hand-written judgment files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoherenceJudgment {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(rename = "subscriber")]
    pub subscriber_id: String,
    #[serde(rename = "input")]
    pub input_film: String,
    #[serde(rename = "output")]
    pub output_film: String,
    pub verdict: Verdict,
    pub is_control: bool,
    pub note: Option<String>,
}

/// Wire shape with the verdict kept as a string so that an unknown verdict
/// is reported as a validation error rather than a syntax error.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JudgmentLine {
    #[serde(default)]
    id: Option<String>,
    subscriber: String,
    input: String,
    output: String,
    verdict: String,
    is_control: bool,
    #[serde(default)]
    note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JudgmentError {
    #[error("line {line}: malformed judgment: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
}

impl JudgmentError {
    pub fn line(&self) -> usize {
        match self {
            JudgmentError::Parse { line, .. } | JudgmentError::Invalid { line, .. } => *line,
        }
    }
}

impl CoherenceJudgment {
    /// Parses one judgment object. Errors are reported against `line`.
    pub fn from_json(source: &str, line: usize) -> Result<Self, JudgmentError> {
        let raw: JudgmentLine = serde_json::from_str(source).map_err(|e| JudgmentError::Parse {
            line,
            message: e.to_string(),
        })?;
        let invalid = |message: String| JudgmentError::Invalid { line, message };
        let verdict = Verdict::parse(&raw.verdict)
            .ok_or_else(|| invalid(format!("unknown verdict {:?}", raw.verdict)))?;
        let judgment = CoherenceJudgment {
            id: raw.id,
            subscriber_id: raw.subscriber,
            input_film: raw.input,
            output_film: raw.output,
            verdict,
            is_control: raw.is_control,
            note: raw.note,
        };
        judgment.check().map_err(invalid)?;
        Ok(judgment)
    }

    fn check(&self) -> Result<(), String> {
        if self.subscriber_id.is_empty() {
            return Err("subscriber must not be empty".into());
        }
        if self.input_film == self.output_film {
            return Err(format!(
                "input and output are the same film {:?}",
                self.input_film
            ));
        }
        Ok(())
    }

    /// Both films must exist in `catalog`.
    pub fn check_films(&self, catalog: &Catalog) -> Result<(), String> {
        for id in [&self.input_film, &self.output_film] {
            if catalog.get(id).is_none() {
                return Err(format!("unknown film {id:?}"));
            }
        }
        Ok(())
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("judgment serializes")
    }
}

/// Reads a JSON-lines judgment file; blank lines are skipped.
pub fn load_judgments(source: &[u8]) -> Result<Vec<CoherenceJudgment>, JudgmentError> {
    let text = std::str::from_utf8(source).map_err(|e| JudgmentError::Parse {
        line: 1 + source[..e.valid_up_to()]
            .iter()
            .filter(|&&b| b == b'\n')
            .count(),
        message: "invalid UTF-8".into(),
    })?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| CoherenceJudgment::from_json(l, i + 1))
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SubscriberStats {
    pub n_judged: usize,
    pub n_coherent: usize,
    pub coherence_rate: Option<f64>,
    pub n_control: usize,
    pub n_control_incoherent: usize,
}

/// Headline coherence over non-control judgments, control detection over
/// control judgments.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub n_judged: usize,
    pub n_coherent: usize,
    pub coherence_rate: Option<f64>,
    /// Integer percent truncated toward zero, e.g. "63 %".
    pub coherence_display: Option<String>,
    /// Integer percent rounded half-up.
    pub coherence_display_rounded: Option<String>,
    pub n_control: usize,
    pub n_control_incoherent: usize,
    pub control_detection: Option<f64>,
    pub per_subscriber: BTreeMap<String, SubscriberStats>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvaluationError {
    #[error("no judgments: coherence rate is undefined without non-control judgments")]
    NoJudgments,
    #[error("evoked descriptors not indexed on film {film:?}: {extra:?}")]
    NotIndexed { film: String, extra: Vec<String> },
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Percent truncated toward zero, in integer arithmetic.
pub fn percent_truncated(num: usize, den: usize) -> Option<String> {
    (den > 0).then(|| format!("{} %", num * 100 / den))
}

/// Percent rounded half-up, in integer arithmetic.
pub fn percent_rounded(num: usize, den: usize) -> Option<String> {
    (den > 0).then(|| format!("{} %", (num * 200 + den) / (2 * den)))
}

impl EvaluationReport {
    /// Total over any judgment set, including the empty one.
    pub fn from_judgments(judgments: &[CoherenceJudgment]) -> Self {
        let mut r = EvaluationReport::default();
        for j in judgments {
            let s = r.per_subscriber.entry(j.subscriber_id.clone()).or_default();
            let coherent = j.verdict == Verdict::Coherent;
            if j.is_control {
                r.n_control += 1;
                s.n_control += 1;
                if !coherent {
                    r.n_control_incoherent += 1;
                    s.n_control_incoherent += 1;
                }
            } else {
                r.n_judged += 1;
                s.n_judged += 1;
                if coherent {
                    r.n_coherent += 1;
                    s.n_coherent += 1;
                }
            }
        }
        for s in r.per_subscriber.values_mut() {
            s.coherence_rate = ratio(s.n_coherent, s.n_judged);
        }
        r.coherence_rate = ratio(r.n_coherent, r.n_judged);
        r.coherence_display = percent_truncated(r.n_coherent, r.n_judged);
        r.coherence_display_rounded = percent_rounded(r.n_coherent, r.n_judged);
        r.control_detection = ratio(r.n_control_incoherent, r.n_control);
        r
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

impl fmt::Display for EvaluationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "judged (non-control): {}", self.n_judged)?;
        writeln!(f, "coherent:             {}", self.n_coherent)?;
        match (self.coherence_rate, &self.coherence_display) {
            (Some(rate), Some(display)) => {
                writeln!(f, "coherence rate:       {display} ({rate:.6})")?
            }
            _ => writeln!(f, "coherence rate:       n/a")?,
        }
        match self.control_detection {
            Some(d) => write!(
                f,
                "control detection:    {}/{} ({d:.6})",
                self.n_control_incoherent, self.n_control
            ),
            None => write!(f, "control detection:    n/a"),
        }
    }
}

/// Headline report; fails when there is no non-control judgment.
pub fn coherence_rate(
    judgments: &[CoherenceJudgment],
) -> Result<EvaluationReport, EvaluationError> {
    let report = EvaluationReport::from_judgments(judgments);
    if report.n_judged == 0 {
        return Err(EvaluationError::NoJudgments);
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRecord {
    pub film: String,
    pub indexed: Vec<String>,
    pub evoked: BTreeSet<String>,
    pub convergence: f64,
    pub passes: bool,
}

/// Share of a film's descriptors a viewer evoked, with a pass flag at
/// [`CONVERGENCE_THRESHOLD`].
pub fn indexing_convergence(
    film: &FilmRecord,
    evoked: &BTreeSet<String>,
) -> Result<ConvergenceRecord, EvaluationError> {
    let extra: Vec<String> = evoked
        .iter()
        .filter(|e| !film.descriptors.contains(e))
        .cloned()
        .collect();
    if !extra.is_empty() {
        return Err(EvaluationError::NotIndexed {
            film: film.id.clone(),
            extra,
        });
    }
    let indexed = film.descriptors.len();
    // passes iff evoked/indexed >= 1/2, decided on integers
    let passes = indexed > 0 && 2 * evoked.len() >= indexed;
    Ok(ConvergenceRecord {
        film: film.id.clone(),
        indexed: film.descriptors.clone(),
        evoked: evoked.clone(),
        convergence: ratio(evoked.len(), indexed).unwrap_or(0.0),
        passes,
    })
}
