use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{EvalError, MetricReport, ProbeRequest, ProbeResponse};
use crate::corpus::{perturb, sample_sentence, CorpusError, Perturbation, Special, Vocabulary};
use crate::grammar::{GrammarSpec, Role};
use crate::rng::{item_rng, stream};
use crate::typegraph::{Level, TypeGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeFamily {
    /// Sentence cut before its last descriptor; the descriptor is the target.
    NextDescriptor,
    /// Full sentences drawn from seen edges.
    Seen,
    /// Full sentences drawn from all class-valid pairs.
    Uniform,
    /// Seen sentences with type-violating values.
    RandomizeValues,
    /// Seen sentences with their tokens permuted out of the language.
    RandomizeGrammar,
}

impl ProbeFamily {
    pub const ALL: [ProbeFamily; 5] = [
        ProbeFamily::NextDescriptor,
        ProbeFamily::Seen,
        ProbeFamily::Uniform,
        ProbeFamily::RandomizeValues,
        ProbeFamily::RandomizeGrammar,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProbeFamily::NextDescriptor => "next_descriptor",
            ProbeFamily::Seen => "seen",
            ProbeFamily::Uniform => "uniform",
            ProbeFamily::RandomizeValues => "randomize_values",
            ProbeFamily::RandomizeGrammar => "randomize_grammar",
        }
    }

    fn index(self) -> u64 {
        self as u64
    }
}

impl std::str::FromStr for ProbeFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        ProbeFamily::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown probe family `{s}`"))
    }
}

/// Sentences drawn while looking for one that contains a descriptor.
const DESCRIPTOR_SEARCH_LIMIT: usize = 1000;

/// `n` probes of one family, ids `0..n`. Deterministic in `seed`.
pub fn build_probes(
    graph: &TypeGraph,
    grammar: &GrammarSpec,
    vocab: &Vocabulary,
    n: usize,
    seed: u64,
    family: ProbeFamily,
) -> Result<Vec<ProbeRequest>, CorpusError> {
    vocab.check_compatible(graph.params())?;
    let prefix = vec![Special::Free.id(), Special::Sep.id()];
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = item_rng(seed, stream::PROBES, family.index() << 40 | i);
            let level = if family == ProbeFamily::Uniform {
                Level::Class
            } else {
                Level::Seen
            };
            let request =
                |prefix: Vec<u32>, target: Option<u32>, sentence: Option<Vec<u32>>| ProbeRequest {
                    id: i,
                    family,
                    prefix: vocab.texts(&prefix),
                    target: target.map(|t| vocab.text(t).to_string()),
                    sentence: sentence.map(|s| vocab.texts(&s)),
                };
            if family == ProbeFamily::NextDescriptor {
                for _ in 0..DESCRIPTOR_SEARCH_LIMIT {
                    let s = sample_sentence(grammar, graph, vocab, level, &mut rng)?;
                    if let Some(d) = s.roles.iter().rposition(|&r| r == Role::Desc) {
                        let mut p = prefix.clone();
                        p.extend_from_slice(&s.tokens[..d]);
                        return Ok(request(p, Some(s.tokens[d]), None));
                    }
                }
                return Err(CorpusError::Unsatisfiable {
                    attempts: DESCRIPTOR_SEARCH_LIMIT,
                });
            }
            let mut s = sample_sentence(grammar, graph, vocab, level, &mut rng)?;
            s = match family {
                ProbeFamily::RandomizeValues => perturb(
                    &s,
                    Perturbation::RandomizeValues,
                    graph,
                    grammar,
                    vocab,
                    &mut rng,
                )?,
                ProbeFamily::RandomizeGrammar => perturb(
                    &s,
                    Perturbation::RandomizeGrammar,
                    graph,
                    grammar,
                    vocab,
                    &mut rng,
                )?,
                _ => s,
            };
            let mut tokens = s.tokens;
            tokens.push(Special::Eos.id());
            Ok(request(prefix.clone(), None, Some(tokens)))
        })
        .collect()
}

/// Scores probe responses, one report per response iteration.
///
/// Next-descriptor probes give `probe/avg_probability`,
/// `probe/normalized_rank` (rank over the number of descriptors) and
/// `probe/top_k` (rank within the per-class descriptor count). Sentence
/// probes give `probe/nll_<family>`.
pub fn score_probes(
    requests: &[ProbeRequest],
    responses: &[ProbeResponse],
    vocab: &Vocabulary,
) -> Result<Vec<MetricReport>, EvalError> {
    let mut by_id: HashMap<u64, &ProbeRequest> = HashMap::new();
    for r in requests {
        if by_id.insert(r.id, r).is_some() {
            return Err(EvalError::DuplicateRequest(r.id));
        }
    }
    let n_desc = vocab.n_descriptors() as f64;
    let top_k = (vocab.n_descriptors() / vocab.n_classes()) as u64;
    let v = vocab.len() as u64;

    let mut cols: BTreeMap<(u64, String), Vec<f64>> = BTreeMap::new();
    for resp in responses {
        let req = by_id
            .get(&resp.id)
            .ok_or(EvalError::UnmatchedResponse(resp.id))?;
        let invalid = |message: &str| EvalError::InvalidResponse {
            id: resp.id,
            message: message.to_string(),
        };
        let mut push =
            |name: String, x: f64| cols.entry((resp.iteration, name)).or_default().push(x);
        if req.family == ProbeFamily::NextDescriptor {
            let p = resp
                .probability
                .ok_or_else(|| invalid("missing probability"))?;
            let rank = resp.rank.ok_or_else(|| invalid("missing rank"))?;
            if !(0.0..=1.0).contains(&p) {
                return Err(invalid("probability outside [0, 1]"));
            }
            if rank < 1 || rank > v {
                return Err(invalid("rank outside [1, vocabulary size]"));
            }
            push("probe/avg_probability".into(), p);
            push("probe/normalized_rank".into(), rank as f64 / n_desc);
            push("probe/top_k".into(), if rank <= top_k { 1.0 } else { 0.0 });
        } else {
            let nll = resp.nll.ok_or_else(|| invalid("missing nll"))?;
            if nll.is_nan() || nll < 0.0 {
                return Err(invalid("nll must be non-negative"));
            }
            push(format!("probe/nll_{}", req.family.name()), nll);
        }
    }
    let mut reports: BTreeMap<u64, MetricReport> = BTreeMap::new();
    for ((iteration, name), values) in cols {
        reports
            .entry(iteration)
            .or_insert_with(|| MetricReport::new(iteration))
            .push_mean(name, &values);
    }
    Ok(reports.into_values().collect())
}
