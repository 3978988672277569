//! Token-level corpus: vocabulary, sentence population under type
//! constraints, task examples, deterministic sample streams, perturbed
//! sentence families and file formats.

mod example;
mod io;
mod perturb;
mod populate;
mod stream;
mod vocab;

use thiserror::Error;

use crate::grammar::{recognize, GrammarError, GrammarSpec, ParseTree, Role};
use crate::jsonl::JsonlError;
use crate::typegraph::{bindings, type_check_tree, Filler, TypeCheck, TypeGraph, TypeGraphError};

pub use example::{make_example, Task, TaskExample, TaskMix};
pub use io::{read_examples, write_examples, ExampleRecord, CORPUS_SCHEMA};
pub use perturb::{perturb, Perturbation};
pub use populate::{populate, sample_sentence, POPULATE_ATTEMPTS};
pub use stream::{CorpusStream, StreamConfig};
pub use vocab::{
    Special, TokenKind, Vocabulary, CONJUNCTIONS, LINKING_VERBS, N_ADJECTIVES, N_ADVERBS,
    PREPOSITIONS,
};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("type constraints unsatisfiable after {attempts} attempts")]
    Unsatisfiable { attempts: usize },
    #[error("could not perturb sentence: {0}")]
    PerturbFailed(String),
    #[error("invalid task mix: {0}")]
    BadMix(String),
    #[error("unknown token `{0}`")]
    UnknownToken(String),
    #[error("token `{0}` cannot appear inside a sentence")]
    NotASentenceToken(String),
    #[error("vocabulary mismatch: {0}")]
    VocabMismatch(String),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Grammar(#[from] GrammarError),
    #[error(transparent)]
    Graph(#[from] TypeGraphError),
    #[error(transparent)]
    Jsonl(#[from] JsonlError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A populated sentence. `tree` is `None` for sentences that are not in the
/// language (grammar perturbations, unparsable model output).
#[derive(Debug, Clone, PartialEq)]
pub struct Sentence {
    pub tokens: Vec<u32>,
    pub roles: Vec<Role>,
    pub tree: Option<ParseTree>,
}

impl Sentence {
    /// Builds a sentence from token ids, parsing it with `grammar`.
    pub fn from_tokens(
        vocab: &Vocabulary,
        grammar: &GrammarSpec,
        tokens: Vec<u32>,
    ) -> Result<Self, CorpusError> {
        let roles = tokens
            .iter()
            .map(|&t| match vocab.role(t) {
                Some(r) if r != Role::Eos => Ok(r),
                _ => Err(CorpusError::NotASentenceToken(vocab.text(t).to_string())),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let tree = recognize(grammar, &roles);
        Ok(Self {
            tokens,
            roles,
            tree,
        })
    }

    pub fn fillers(&self, vocab: &Vocabulary) -> Vec<Filler> {
        self.tokens.iter().map(|&t| vocab.filler(t)).collect()
    }

    /// Class-level type check; `None` when the sentence does not parse.
    pub fn type_check(&self, graph: &TypeGraph, vocab: &Vocabulary) -> Option<TypeCheck> {
        let tree = self.tree.as_ref()?;
        Some(
            type_check_tree(graph, tree, &self.fillers(vocab))
                .expect("sentence tokens match their roles"),
        )
    }

    /// `(entity, descriptor)` pairs bound by the parse.
    pub fn descriptor_pairs(&self, vocab: &Vocabulary) -> Vec<(u32, u32)> {
        let Some(tree) = &self.tree else {
            return Vec::new();
        };
        let b = bindings(tree);
        let mut out = Vec::new();
        for (d, subjects) in &b.descriptors {
            let Filler::Descriptor(k) = vocab.filler(self.tokens[*d]) else {
                continue;
            };
            for &s in subjects {
                if let Filler::Entity(e) = vocab.filler(self.tokens[s]) {
                    out.push((e, k));
                }
            }
        }
        out
    }

    pub fn render(&self, vocab: &Vocabulary) -> String {
        vocab.render(&self.tokens)
    }
}

#[cfg(test)]
mod tests;
