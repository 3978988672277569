//! A stand-in "model" that knows the data-generating process, used to check
//! the scoring pipeline end to end.

use super::{EvalError, GenerationRecord, ProbeRequest, ProbeResponse};
use crate::corpus::{Sentence, Special, TaskExample, Vocabulary};
use crate::eval::ProbeFamily;
use crate::grammar::{derivation_nll, GrammarSpec, Role};
use crate::typegraph::TypeGraph;

/// Weight of the uniform-token component mixed into the oracle's sentence
/// distribution, so that sentences outside the language get a finite NLL.
pub const ORACLE_SMOOTHING: f64 = 1e-6;

/// NLL of a sentence (with or without trailing `<eos>`) under a class-level
/// model of the data-generating process, smoothed with a uniform token model.
///
/// The process part is the grammar probability of the role sequence times a
/// uniform choice of class and, within it, of every token of its role. It is
/// zero for sentences that fail to parse or to type-check.
pub fn oracle_sentence_nll(
    grammar: &GrammarSpec,
    graph: &TypeGraph,
    vocab: &Vocabulary,
    tokens: &[u32],
) -> f64 {
    let body = tokens.strip_suffix(&[Special::Eos.id()]).unwrap_or(tokens);
    let uniform = -((body.len() + 1) as f64) * (vocab.len() as f64).ln();
    let process = process_log_prob(grammar, graph, vocab, body);
    let (a, b) = (
        (1.0 - ORACLE_SMOOTHING).ln() + process,
        ORACLE_SMOOTHING.ln() + uniform,
    );
    let hi = a.max(b);
    -(hi + ((a - hi).exp() + (b - hi).exp()).ln())
}

fn process_log_prob(
    grammar: &GrammarSpec,
    graph: &TypeGraph,
    vocab: &Vocabulary,
    body: &[u32],
) -> f64 {
    let Ok(s) = Sentence::from_tokens(vocab, grammar, body.to_vec()) else {
        return f64::NEG_INFINITY;
    };
    if !s.type_check(graph, vocab).is_some_and(|c| c.all) {
        return f64::NEG_INFINITY;
    }
    let c = graph.n_classes() as f64;
    let mut lp = -derivation_nll(grammar, &s.roles).expect("parsed") - c.ln();
    for &role in &s.roles {
        let choices = match role {
            Role::Subj | Role::Obj => graph.params().entities_per_class(),
            Role::Desc => graph.params().descriptors_per_class(),
            Role::Verb => graph.params().verbs_per_class(),
            r => vocab.role_range(r).len(),
        };
        lp -= (choices as f64).ln();
    }
    lp
}

/// Answers a probe as the data-generating process would.
///
/// For next-descriptor probes every descriptor of the first subject's class
/// is equally likely and nothing else is; rank follows the
/// one-plus-strictly-better convention.
pub fn oracle_respond(
    request: &ProbeRequest,
    graph: &TypeGraph,
    grammar: &GrammarSpec,
    vocab: &Vocabulary,
    iteration: u64,
) -> Result<ProbeResponse, EvalError> {
    let mut resp = ProbeResponse {
        id: request.id,
        iteration,
        probability: None,
        rank: None,
        nll: None,
    };
    if request.family == ProbeFamily::NextDescriptor {
        let target = request
            .target
            .as_deref()
            .ok_or(EvalError::InvalidResponse {
                id: request.id,
                message: "next-descriptor probe without target".into(),
            })?;
        let target = vocab.id(target)?;
        let prefix = vocab.ids(&request.prefix)?;
        let per_class = graph.params().descriptors_per_class();
        let class = prefix
            .iter()
            .find(|&&t| vocab.role(t) == Some(Role::Subj))
            .and_then(|&t| vocab.class_of(t));
        let valid = vocab.role(target) == Some(Role::Desc)
            && class.is_some()
            && vocab.class_of(target) == class;
        if valid {
            resp.probability = Some(1.0 / per_class as f64);
            resp.rank = Some(1);
        } else {
            resp.probability = Some(0.0);
            resp.rank = Some(1 + per_class as u64);
        }
    } else {
        let sentence = request
            .sentence
            .as_ref()
            .ok_or(EvalError::InvalidResponse {
                id: request.id,
                message: "sentence probe without sentence".into(),
            })?;
        resp.nll = Some(oracle_sentence_nll(
            grammar,
            graph,
            vocab,
            &vocab.ids(sentence)?,
        ));
    }
    Ok(resp)
}

/// Generation records of a model that reproduces every target exactly.
pub fn echo_generations(
    examples: &[TaskExample],
    vocab: &Vocabulary,
    iteration: u64,
) -> Vec<GenerationRecord> {
    examples
        .iter()
        .map(|e| GenerationRecord {
            iteration,
            task: e.task,
            input: vocab.texts(&e.input),
            output: vocab.texts(&e.target),
            target: Some(vocab.texts(&e.target)),
        })
        .collect()
}
