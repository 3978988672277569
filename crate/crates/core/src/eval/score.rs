use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{EvalError, GenerationRecord, MetricReport};
use crate::corpus::{Sentence, Special, Task, Vocabulary};
use crate::grammar::{derivation_nll, tree_stats, GrammarSpec, Role};
use crate::typegraph::{TypeCheck, TypeGraph};

/// Targets with at most this many tokens form the descriptive stratum.
pub const DESCRIPTIVE_MAX_LEN: usize = 6;
/// Targets longer than the descriptive stratum and at most this long form the
/// relative stratum.
pub const RELATIVE_MAX_LEN: usize = 9;

/// Metric-name suffix and the target lengths it keeps.
type Stratum = (&'static str, fn(usize) -> bool);

struct RecordScore {
    task: Task,
    sentence: Option<Sentence>,
    check: TypeCheck,
    /// (exact match, per-token accuracy, target sentence length)
    accuracy: Option<(f64, f64, usize)>,
    conditions: Option<f64>,
}

/// Output tokens up to, not including, the first `<eos>`.
fn until_eos(tokens: &[u32]) -> &[u32] {
    let end = tokens
        .iter()
        .position(|&t| t == Special::Eos.id())
        .unwrap_or(tokens.len());
    &tokens[..end]
}

fn score_record(
    rec: &GenerationRecord,
    grammar: &GrammarSpec,
    graph: &TypeGraph,
    vocab: &Vocabulary,
) -> Result<RecordScore, EvalError> {
    let output = vocab.ids(&rec.output)?;
    let input = vocab.ids(&rec.input)?;
    let body = until_eos(&output);
    let sentence = match Sentence::from_tokens(vocab, grammar, body.to_vec()) {
        Ok(s) if s.tree.is_some() => Some(s),
        _ => None,
    };
    let failed = TypeCheck {
        descriptive: false,
        relative: false,
        all: false,
    };
    let check = sentence
        .as_ref()
        .and_then(|s| s.type_check(graph, vocab))
        .unwrap_or(failed);

    let accuracy = match &rec.target {
        Some(target) => {
            let y = vocab.ids(target)?;
            let l = y.len().max(1);
            let hits = y
                .iter()
                .enumerate()
                .filter(|&(i, t)| output.get(i) == Some(t))
                .count();
            let exact = if hits == y.len() { 1.0 } else { 0.0 };
            Some((exact, hits as f64 / l as f64, until_eos(&y).len()))
        }
        None => None,
    };

    let conditions = if rec.task == Task::Conditional {
        let conds: Vec<u32> = input
            .iter()
            .copied()
            .filter(|&t| {
                matches!(
                    vocab.role(t),
                    Some(Role::Subj | Role::Obj | Role::Verb | Role::Desc)
                )
            })
            .collect();
        (!conds.is_empty())
            .then(|| conds.iter().filter(|c| body.contains(c)).count() as f64 / conds.len() as f64)
    } else {
        None
    };
    Ok(RecordScore {
        task: rec.task,
        sentence,
        check,
        accuracy,
        conditions,
    })
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Scores generation records, one report per iteration.
///
/// Per task `t`: `t/grammaticality`, `t/type_check_{descriptive,relative,all}`
/// (ungrammatical outputs count as failures), and for records with a target
/// `t/exact_match` and `t/per_token_accuracy`, also split into
/// `_descriptive` and `_relative` length strata. Conditional records add
/// `conditional/conditions_satisfied`.
pub fn score_generations(
    records: &[GenerationRecord],
    grammar: &GrammarSpec,
    graph: &TypeGraph,
    vocab: &Vocabulary,
) -> Result<Vec<MetricReport>, EvalError> {
    vocab.check_compatible(graph.params())?;
    let scores: Vec<RecordScore> = records
        .par_iter()
        .map(|r| score_record(r, grammar, graph, vocab))
        .collect::<Result<_, _>>()?;

    let mut groups: BTreeMap<(u64, Task), Vec<&RecordScore>> = BTreeMap::new();
    for (rec, s) in records.iter().zip(&scores) {
        groups.entry((rec.iteration, s.task)).or_default().push(s);
    }
    let mut reports: BTreeMap<u64, MetricReport> = BTreeMap::new();
    for ((iteration, task), group) in groups {
        let report = reports
            .entry(iteration)
            .or_insert_with(|| MetricReport::new(iteration));
        let t = task.name();
        let col =
            |f: &dyn Fn(&RecordScore) -> f64| group.iter().map(|s| f(s)).collect::<Vec<f64>>();
        report.push_mean(
            format!("{t}/grammaticality"),
            &col(&|s| indicator(s.sentence.is_some())),
        );
        report.push_mean(
            format!("{t}/type_check_descriptive"),
            &col(&|s| indicator(s.check.descriptive)),
        );
        report.push_mean(
            format!("{t}/type_check_relative"),
            &col(&|s| indicator(s.check.relative)),
        );
        report.push_mean(
            format!("{t}/type_check_all"),
            &col(&|s| indicator(s.check.all)),
        );

        let strata: [Stratum; 3] = [
            ("", |_| true),
            ("_descriptive", |l| l <= DESCRIPTIVE_MAX_LEN),
            ("_relative", |l| {
                l > DESCRIPTIVE_MAX_LEN && l <= RELATIVE_MAX_LEN
            }),
        ];
        for (suffix, keep) in strata {
            let acc: Vec<(f64, f64, usize)> = group
                .iter()
                .filter_map(|s| s.accuracy)
                .filter(|a| keep(a.2))
                .collect();
            let exact: Vec<f64> = acc.iter().map(|a| a.0).collect();
            let per_token: Vec<f64> = acc.iter().map(|a| a.1).collect();
            report.push_mean(format!("{t}/exact_match{suffix}"), &exact);
            report.push_mean(format!("{t}/per_token_accuracy{suffix}"), &per_token);
        }
        let cond: Vec<f64> = group.iter().filter_map(|s| s.conditions).collect();
        report.push_mean(format!("{t}/conditions_satisfied"), &cond);
    }
    Ok(reports.into_values().collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

impl Summary {
    fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Some(Self {
            min,
            mean: values.iter().sum::<f64>() / values.len() as f64,
            max,
        })
    }
}

/// Statistics of the grammatical outputs in a batch of records.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationStats {
    pub total: usize,
    pub grammatical: usize,
    /// Grammar NLL of the role sequence (natural log).
    pub nll: Option<Summary>,
    pub depth: Option<Summary>,
    pub length: Option<Summary>,
}

impl GenerationStats {
    /// Fraction of records dropped as ungrammatical.
    pub fn filtered_fraction(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            1.0 - self.grammatical as f64 / self.total as f64
        }
    }
}

pub fn generation_stats(
    records: &[GenerationRecord],
    grammar: &GrammarSpec,
    vocab: &Vocabulary,
) -> Result<GenerationStats, EvalError> {
    let mut nll = Vec::new();
    let mut depth = Vec::new();
    let mut length = Vec::new();
    for rec in records {
        let output = vocab.ids(&rec.output)?;
        let Ok(s) = Sentence::from_tokens(vocab, grammar, until_eos(&output).to_vec()) else {
            continue;
        };
        let Some(tree) = &s.tree else { continue };
        let st = tree_stats(tree);
        nll.push(derivation_nll(grammar, &s.roles).expect("parsed sentences have finite NLL"));
        depth.push(st.depth as f64);
        length.push(st.length as f64);
    }
    Ok(GenerationStats {
        total: records.len(),
        grammatical: nll.len(),
        nll: Summary::of(&nll),
        depth: Summary::of(&depth),
        length: Summary::of(&length),
    })
}
