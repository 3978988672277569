use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use super::{CorpusError, Sentence, Vocabulary};
use crate::grammar::{recognize, GrammarSpec, Role};
use crate::typegraph::{bindings, TypeGraph};

/// Shuffles tried before giving up on breaking a sentence's grammar.
const SHUFFLE_LIMIT: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Perturbation {
    /// Keep roles and structure, draw entities and properties ignoring type
    /// constraints; at least one pairing ends up cross-class.
    RandomizeValues,
    /// Keep the tokens, permute them until the result no longer parses.
    RandomizeGrammar,
}

pub fn perturb<R: Rng + ?Sized>(
    sentence: &Sentence,
    mode: Perturbation,
    graph: &TypeGraph,
    grammar: &GrammarSpec,
    vocab: &Vocabulary,
    rng: &mut R,
) -> Result<Sentence, CorpusError> {
    match mode {
        Perturbation::RandomizeValues => randomize_values(sentence, graph, vocab, rng),
        Perturbation::RandomizeGrammar => randomize_grammar(sentence, grammar, rng),
    }
}

fn randomize_values<R: Rng + ?Sized>(
    sentence: &Sentence,
    graph: &TypeGraph,
    vocab: &Vocabulary,
    rng: &mut R,
) -> Result<Sentence, CorpusError> {
    let tree = sentence
        .tree
        .as_ref()
        .ok_or_else(|| CorpusError::PerturbFailed("sentence does not parse".into()))?;
    if graph.n_classes() < 2 {
        return Err(CorpusError::PerturbFailed(
            "a single class admits no cross-class value".into(),
        ));
    }
    let mut out = sentence.clone();
    for (t, &role) in out.tokens.iter_mut().zip(&sentence.roles) {
        if matches!(role, Role::Subj | Role::Obj | Role::Desc | Role::Verb) {
            *t = rng.random_range(vocab.role_range(role));
        }
    }
    if out.type_check(graph, vocab).is_some_and(|c| c.all) {
        // Still valid by chance: move one bound property to another class.
        let b = bindings(tree);
        let bound: Vec<(usize, usize)> = b
            .descriptors
            .iter()
            .chain(&b.verbs)
            .chain(&b.objects)
            .filter_map(|(i, partners)| partners.first().map(|&p| (*i, p)))
            .collect();
        let &(pos, partner) = bound
            .choose(rng)
            .ok_or_else(|| CorpusError::PerturbFailed("sentence has no pairings".into()))?;
        let role = sentence.roles[pos];
        let avoid = vocab
            .class_of(out.tokens[partner])
            .expect("partners are content tokens");
        let options: Vec<u32> = vocab
            .role_range(role)
            .filter(|&t| vocab.class_of(t) != Some(avoid))
            .collect();
        out.tokens[pos] = *options.choose(rng).expect("at least two classes");
    }
    debug_assert!(!out.type_check(graph, vocab).expect("structure kept").all);
    Ok(out)
}

fn randomize_grammar<R: Rng + ?Sized>(
    sentence: &Sentence,
    grammar: &GrammarSpec,
    rng: &mut R,
) -> Result<Sentence, CorpusError> {
    let mut order: Vec<usize> = (0..sentence.tokens.len()).collect();
    for _ in 0..SHUFFLE_LIMIT {
        order.shuffle(rng);
        let roles: Vec<Role> = order.iter().map(|&i| sentence.roles[i]).collect();
        if recognize(grammar, &roles).is_none() {
            let tokens = order.iter().map(|&i| sentence.tokens[i]).collect();
            return Ok(Sentence {
                tokens,
                roles,
                tree: None,
            });
        }
    }
    Err(CorpusError::PerturbFailed(format!(
        "every one of {SHUFFLE_LIMIT} shuffles still parses"
    )))
}
