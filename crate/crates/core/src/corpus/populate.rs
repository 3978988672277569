//! Filling a symbolic sentence with tokens.
//!
//! Verbs are drawn first, then subjects compatible with every verb, then
//! descriptors compatible with every subject they attach to, then objects,
//! and finally the unconstrained words. A dead end restarts the sentence.

use std::borrow::Cow;

use rand::seq::IndexedRandom;
use rand::Rng;

use super::{CorpusError, Sentence, Vocabulary};
use crate::grammar::{sample_symbolic, GrammarSpec, Role, SymbolicSentence};
use crate::typegraph::{bindings, Level, TypeGraph};

/// Restarts allowed for one symbolic sentence, and symbolic resamples allowed
/// by [`sample_sentence`].
pub const POPULATE_ATTEMPTS: usize = 100;

struct Candidates<'a> {
    graph: &'a TypeGraph,
    level: Level,
}

impl Candidates<'_> {
    fn subjects(&self, v: u32) -> Cow<'_, [u32]> {
        match self.level {
            Level::Seen => Cow::Borrowed(self.graph.seen_subjects(v)),
            Level::Class => Cow::Owned(
                self.graph
                    .class_entities(self.graph.verb_class(v))
                    .collect(),
            ),
        }
    }

    fn objects(&self, v: u32) -> Cow<'_, [u32]> {
        match self.level {
            Level::Seen => Cow::Borrowed(self.graph.seen_objects(v)),
            Level::Class => Cow::Owned(
                self.graph
                    .class_entities(self.graph.verb_class(v))
                    .collect(),
            ),
        }
    }

    fn descriptors(&self, e: u32) -> Cow<'_, [u32]> {
        match self.level {
            Level::Seen => Cow::Borrowed(self.graph.seen_descriptors(e)),
            Level::Class => Cow::Owned(
                self.graph
                    .class_descriptors(self.graph.entity_class(e))
                    .collect(),
            ),
        }
    }
}

fn intersect(a: &[u32], b: &[u32]) -> Vec<u32> {
    let (mut i, mut j, mut out) = (0, 0, Vec::new());
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

fn intersect_count(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Populates `symbolic` with tokens drawn from `level` edges of `graph`.
pub fn populate<R: Rng + ?Sized>(
    symbolic: &SymbolicSentence,
    graph: &TypeGraph,
    vocab: &Vocabulary,
    level: Level,
    rng: &mut R,
) -> Result<Sentence, CorpusError> {
    vocab.check_compatible(graph.params())?;
    let b = bindings(&symbolic.tree);
    let cand = Candidates { graph, level };
    for _ in 0..POPULATE_ATTEMPTS {
        if let Some(ids) = attempt(symbolic, &b, &cand, rng) {
            let tokens = symbolic
                .roles
                .iter()
                .zip(&ids)
                .map(|(&role, &id)| match role {
                    Role::Subj | Role::Obj => vocab.entity_token(role, id),
                    Role::Desc => vocab.descriptor_token(id),
                    Role::Verb => vocab.verb_token(id),
                    _ => vocab.role_range(role).start + id,
                })
                .collect();
            return Ok(Sentence {
                tokens,
                roles: symbolic.roles.clone(),
                tree: Some(symbolic.tree.clone()),
            });
        }
    }
    Err(CorpusError::Unsatisfiable {
        attempts: POPULATE_ATTEMPTS,
    })
}

/// One pass; returns per-position ids (entity, descriptor, verb or offset
/// within the role's token block).
fn attempt<R: Rng + ?Sized>(
    symbolic: &SymbolicSentence,
    b: &crate::typegraph::Bindings,
    cand: &Candidates<'_>,
    rng: &mut R,
) -> Option<Vec<u32>> {
    let graph = cand.graph;
    let roles = &symbolic.roles;
    let mut ids = vec![u32::MAX; roles.len()];
    let n_subj = b.subjects.len();

    // Verbs, keeping enough common subjects and distinct objects available.
    let mut subject_pool: Option<Vec<u32>> = None;
    let mut class = None;
    for &(vpos, _) in &b.verbs {
        let n_obj = b
            .objects
            .iter()
            .filter(|(_, vs)| vs.contains(&vpos))
            .count();
        let range = match class {
            None => 0..graph.n_verbs() as u32,
            Some(c) => graph.class_verbs(c),
        };
        let feasible: Vec<u32> = range
            .filter(|&v| {
                cand.objects(v).len() >= n_obj
                    && match &subject_pool {
                        None => cand.subjects(v).len() >= n_subj,
                        Some(pool) => intersect_count(pool, &cand.subjects(v)) >= n_subj,
                    }
            })
            .collect();
        let &v = feasible.choose(rng)?;
        ids[vpos] = v;
        class = Some(graph.verb_class(v));
        subject_pool = Some(match subject_pool {
            None => cand.subjects(v).into_owned(),
            Some(pool) => intersect(&pool, &cand.subjects(v)),
        });
    }

    // Subjects: distinct, one class, with a common descriptor if any is needed.
    let needs_desc = !b.descriptors.is_empty();
    let mut desc_pool: Option<Vec<u32>> = None;
    let mut pool = subject_pool;
    for &spos in &b.subjects {
        let mut options = match (&pool, class) {
            (Some(p), _) => p.clone(),
            (None, Some(c)) => graph.class_entities(c).collect(),
            (None, None) => (0..graph.n_entities() as u32).collect(),
        };
        let chosen = loop {
            if options.is_empty() {
                return None;
            }
            let e = options.swap_remove(rng.random_range(0..options.len()));
            if !needs_desc {
                break e;
            }
            let common = match &desc_pool {
                None => cand.descriptors(e).into_owned(),
                Some(d) => intersect(d, &cand.descriptors(e)),
            };
            if !common.is_empty() {
                desc_pool = Some(common);
                break e;
            }
        };
        ids[spos] = chosen;
        let c = graph.entity_class(chosen);
        class = Some(c);
        pool = Some(
            pool.unwrap_or_else(|| graph.class_entities(c).collect())
                .into_iter()
                .filter(|&e| e != chosen && graph.entity_class(e) == c)
                .collect(),
        );
    }

    // Descriptors, from the common set of the subjects each one binds.
    for (dpos, subjects) in &b.descriptors {
        let options: Vec<u32> = if subjects.is_empty() {
            match class {
                Some(c) => graph.class_descriptors(c).collect(),
                None => (0..graph.n_descriptors() as u32).collect(),
            }
        } else {
            let mut common = cand.descriptors(ids[subjects[0]]).into_owned();
            for &s in &subjects[1..] {
                common = intersect(&common, &cand.descriptors(ids[s]));
            }
            common
        };
        ids[*dpos] = *options.choose(rng)?;
    }

    // Objects: capable for every verb they attach to, distinct per verb.
    let mut used: Vec<(usize, u32)> = Vec::new();
    for (opos, verbs) in &b.objects {
        let mut options: Vec<u32> = match (verbs.first(), class) {
            (Some(&v0), _) => {
                let mut common = cand.objects(ids[v0]).into_owned();
                for &v in &verbs[1..] {
                    common = intersect(&common, &cand.objects(ids[v]));
                }
                common
            }
            (None, Some(c)) => graph.class_entities(c).collect(),
            (None, None) => (0..graph.n_entities() as u32).collect(),
        };
        options.retain(|o| !used.iter().any(|(vp, u)| u == o && verbs.contains(vp)));
        let &o = options.choose(rng)?;
        ids[*opos] = o;
        used.extend(verbs.iter().map(|&vp| (vp, o)));
    }

    for (i, &role) in roles.iter().enumerate() {
        if ids[i] == u32::MAX {
            let n = match role {
                Role::Subj | Role::Obj | Role::Desc | Role::Verb => {
                    unreachable!("content positions are bound")
                }
                _ => role_block_len(role),
            };
            ids[i] = rng.random_range(0..n as u32);
        }
    }
    Some(ids)
}

fn role_block_len(role: Role) -> usize {
    use super::vocab::*;
    match role {
        Role::LVerb => LINKING_VERBS.len(),
        Role::Prep => PREPOSITIONS.len(),
        Role::Conj => CONJUNCTIONS.len(),
        Role::EAdj | Role::DAdj => N_ADJECTIVES,
        Role::Adv => N_ADVERBS,
        _ => unreachable!("{role} has no word block"),
    }
}

/// Samples a symbolic sentence and populates it, drawing a fresh symbolic
/// sentence when the constraints cannot be met.
pub fn sample_sentence<R: Rng + ?Sized>(
    grammar: &GrammarSpec,
    graph: &TypeGraph,
    vocab: &Vocabulary,
    level: Level,
    rng: &mut R,
) -> Result<Sentence, CorpusError> {
    for _ in 0..POPULATE_ATTEMPTS {
        let symbolic = sample_symbolic(grammar, rng)?;
        match populate(&symbolic, graph, vocab, level, rng) {
            Err(CorpusError::Unsatisfiable { .. }) => continue,
            other => return other,
        }
    }
    Err(CorpusError::Unsatisfiable {
        attempts: POPULATE_ATTEMPTS * POPULATE_ATTEMPTS,
    })
}
