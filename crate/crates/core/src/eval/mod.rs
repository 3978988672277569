//! Scoring of model generations and probe answers.
//!
//! Model harnesses exchange JSONL files with this module:
//!
//! * generation records (`schema = "generations"`): `iteration`, `task`,
//!   `input` tokens, `output` tokens (the continuation after `<sep>`, usually
//!   ending in `<eos>`), and optionally the reference `target`;
//! * probe requests (`schema = "probe_requests"`): `id`, `family`, `prefix`
//!   tokens and either a next-token `target` or a full `sentence`;
//! * probe responses (`schema = "probe_responses"`): `id`, `iteration`, and
//!   `probability` / `rank` of the target or the `nll` of the sentence.

mod oracle;
mod probes;
mod report;
mod score;

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{CorpusError, Task};
use crate::jsonl::{read_records, write_records, JsonlError};

pub use oracle::{echo_generations, oracle_respond, oracle_sentence_nll, ORACLE_SMOOTHING};
pub use probes::{build_probes, score_probes, ProbeFamily};
pub use report::{read_metric_csv, write_metric_csv, Metric, MetricReport, MetricTable};
pub use score::{
    generation_stats, score_generations, GenerationStats, Summary, DESCRIPTIVE_MAX_LEN,
    RELATIVE_MAX_LEN,
};

pub const GENERATION_SCHEMA: &str = "generations";
pub const PROBE_REQUEST_SCHEMA: &str = "probe_requests";
pub const PROBE_RESPONSE_SCHEMA: &str = "probe_responses";

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("vocabulary mismatch: {0}")]
    Vocabulary(#[from] CorpusError),
    #[error("response {0} matches no request")]
    UnmatchedResponse(u64),
    #[error("duplicate request id {0}")]
    DuplicateRequest(u64),
    #[error("response {id}: {message}")]
    InvalidResponse { id: u64, message: String },
    #[error("csv line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error(transparent)]
    Jsonl(#[from] JsonlError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub iteration: u64,
    pub task: Task,
    pub input: Vec<String>,
    pub output: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRequest {
    pub id: u64,
    pub family: ProbeFamily,
    /// Context given to the model before the target or sentence.
    pub prefix: Vec<String>,
    /// Next-token target.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    /// Sentence to score, ending in `<eos>`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentence: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResponse {
    pub id: u64,
    #[serde(default)]
    pub iteration: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probability: Option<f64>,
    /// 1-based: one plus the number of tokens with strictly higher probability.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<u64>,
    /// Summed natural-log NLL of the sentence tokens.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nll: Option<f64>,
}

pub fn write_generations<W: Write>(w: W, records: &[GenerationRecord]) -> Result<(), EvalError> {
    Ok(write_records(w, GENERATION_SCHEMA, records)?)
}

pub fn read_generations<R: BufRead>(r: R) -> Result<Vec<GenerationRecord>, EvalError> {
    Ok(read_records(r, GENERATION_SCHEMA)?)
}

pub fn write_probe_requests<W: Write>(w: W, requests: &[ProbeRequest]) -> Result<(), EvalError> {
    Ok(write_records(w, PROBE_REQUEST_SCHEMA, requests)?)
}

pub fn read_probe_requests<R: BufRead>(r: R) -> Result<Vec<ProbeRequest>, EvalError> {
    Ok(read_records(r, PROBE_REQUEST_SCHEMA)?)
}

pub fn write_probe_responses<W: Write>(w: W, responses: &[ProbeResponse]) -> Result<(), EvalError> {
    Ok(write_records(w, PROBE_RESPONSE_SCHEMA, responses)?)
}

pub fn read_probe_responses<R: BufRead>(r: R) -> Result<Vec<ProbeResponse>, EvalError> {
    Ok(read_records(r, PROBE_RESPONSE_SCHEMA)?)
}

/// Best descriptive type-check accuracy reachable by memorising seen pairs.
///
/// `batch` sentences per step for `iterations` steps, about a quarter of them
/// descriptive; a pair must be seen `repetitions` times to be learned, and
/// only `fraction` of the class-valid pairs ever appear. Guessing a class at
/// random scores `1 / classes`; memorised pairs add up to `fraction`.
pub fn memorization_ceiling(
    batch: f64,
    iterations: f64,
    classes: f64,
    entities: f64,
    descriptors: f64,
    repetitions: f64,
    fraction: f64,
) -> f64 {
    let covered =
        0.25 * batch * iterations * classes / (entities * descriptors * repetitions * fraction);
    1.0 / classes + fraction * covered.min(1.0)
}
