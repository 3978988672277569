use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::grammar::{default_grammar, recognize, GrammarSpec, Role::*};
use crate::typegraph::{build_typegraph, Level, TypeGraph, TypeGraphParams};

fn setup() -> (GrammarSpec, TypeGraph, Vocabulary) {
    let params = TypeGraphParams {
        n_entities: 100,
        n_desc_props: 1000,
        n_classes: 5,
        n_verbs: 50,
        edge_fraction: 0.15,
        seed: 3,
    };
    let graph = build_typegraph(&params).unwrap();
    (default_grammar(), graph, Vocabulary::new(&params))
}

fn symbolic(roles: &[crate::grammar::Role]) -> crate::grammar::SymbolicSentence {
    let g = default_grammar();
    crate::grammar::SymbolicSentence {
        roles: roles.to_vec(),
        tree: recognize(&g, roles).unwrap(),
    }
}

#[test]
fn default_vocabulary_layout() {
    let v = Vocabulary::new(&TypeGraphParams::default());
    assert_eq!(
        v.len(),
        5 + 2 + 3 + 2 + 20 + 20 + 20 + 200 + 900 + 900 + 18000
    );
    assert_eq!(v.id("<eos>").unwrap(), Special::Eos.id());
    assert_eq!(v.id("<sep>").unwrap(), Special::Sep.id());
    for id in 0..v.len() as u32 {
        assert_eq!(v.id(v.text(id)).unwrap(), id);
    }
    assert_eq!(v.role(v.id("eAdj19").unwrap()), Some(EAdj));
    assert_eq!(v.role(v.id("pAdj7").unwrap()), Some(DAdj));
    assert_eq!(
        v.kind(v.id("descriptor1496").unwrap()),
        TokenKind::Descriptor(1496)
    );
    assert_eq!(v.class_of(v.id("descriptor1496").unwrap()), Some(0));
    assert_eq!(v.class_of(v.id("obj899").unwrap()), Some(9));
    assert_eq!(v.role_range(Verb).len(), 200);
    assert!(v.id("verb200").is_err());
}

#[test]
fn vocabulary_file_round_trip() {
    let (_, _, v) = setup();
    let mut buf = Vec::new();
    v.write(&mut buf).unwrap();
    assert_eq!(buf.iter().filter(|&&b| b == b'\n').count(), v.len());
    assert_eq!(Vocabulary::read(&buf[..]).unwrap(), v);
    let text = String::from_utf8(buf)
        .unwrap()
        .replace("descriptor7\t", "descriptorX\t");
    assert!(matches!(
        Vocabulary::read(text.as_bytes()),
        Err(CorpusError::Malformed { .. })
    ));
}

#[test]
fn descriptive_skeleton_populates_with_the_expected_pattern() {
    let (_, graph, v) = setup();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let s = populate(
        &symbolic(&[EAdj, Subj, LVerb, DAdj, Desc]),
        &graph,
        &v,
        Level::Seen,
        &mut rng,
    )
    .unwrap();
    let words: Vec<String> = v.texts(&s.tokens);
    assert!(words[0].starts_with("eAdj") && words[1].starts_with("subj"));
    assert!(LINKING_VERBS.contains(&words[2].as_str()));
    assert!(words[3].starts_with("pAdj") && words[4].starts_with("descriptor"));
    let TokenKind::Entity { id: e, .. } = v.kind(s.tokens[1]) else {
        panic!()
    };
    let TokenKind::Descriptor(k) = v.kind(s.tokens[4]) else {
        panic!()
    };
    assert!(graph.is_seen_descriptor(e, k));
}

#[test]
fn verbs_get_capable_subjects_and_objects() {
    let (_, graph, v) = setup();
    let sym = symbolic(&[
        Subj, Conj, Subj, Verb, Prep, Obj, Conj, Obj, Conj, Verb, Prep, Obj,
    ]);
    let mut populated = 0;
    for seed in 0..200 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let Ok(s) = populate(&sym, &graph, &v, Level::Seen, &mut rng) else {
            continue;
        };
        populated += 1;
        let id = |i: usize| match v.filler(s.tokens[i]) {
            crate::typegraph::Filler::Entity(x) | crate::typegraph::Filler::Verb(x) => x,
            other => panic!("{other:?}"),
        };
        for verb in [3, 9] {
            for subj in [0, 2] {
                assert!(graph.seen_subjects(id(verb)).contains(&id(subj)));
            }
        }
        assert!(
            graph.seen_objects(id(3)).contains(&id(5))
                && graph.seen_objects(id(3)).contains(&id(7))
        );
        assert!(graph.seen_objects(id(9)).contains(&id(11)));
        assert_ne!(id(0), id(2));
        assert_ne!(id(5), id(7));
        assert!(s.type_check(&graph, &v).unwrap().all);
    }
    assert!(populated > 100, "{populated}");
}

#[test]
fn sampled_sentences_are_valid_at_both_levels() {
    let (grammar, graph, v) = setup();
    for level in [Level::Seen, Level::Class] {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let s = sample_sentence(&grammar, &graph, &v, level, &mut rng).unwrap();
            assert!(recognize(&grammar, &s.roles).is_some());
            assert!(s.type_check(&graph, &v).unwrap().all, "{}", s.render(&v));
            if level == Level::Seen {
                for (e, k) in s.descriptor_pairs(&v) {
                    assert!(graph.is_seen_descriptor(e, k));
                }
            }
        }
    }
}

#[test]
fn examples_follow_their_task() {
    let (grammar, graph, v) = setup();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..300 {
        let s = sample_sentence(&grammar, &graph, &v, Level::Seen, &mut rng).unwrap();
        let free = make_example(&s, Task::Free, &mut rng);
        assert_eq!(free.input, vec![Special::Free.id()]);
        assert_eq!(free.sentence_tokens(), &s.tokens[..]);
        assert_eq!(*free.target.last().unwrap(), Special::Eos.id());

        let un = make_example(&s, Task::Unscramble, &mut rng);
        assert_eq!(un.input[0], Special::Unscramble.id());
        let mut a = un.input[1..].to_vec();
        let mut b = s.tokens.clone();
        assert_ne!(a, b, "permutation must move something");
        a.sort();
        b.sort();
        assert_eq!(a, b);

        let cond = make_example(&s, Task::Conditional, &mut rng);
        assert_eq!(cond.input[0], Special::Cond.id());
        assert!(cond.input.len() > 1);
        for t in &cond.input[1..] {
            assert!(s.tokens.contains(t));
            assert!(matches!(v.role(*t), Some(Subj | Obj | Verb | Desc)));
        }
        let seq = cond.model_sequence();
        assert_eq!(seq.len(), cond.input.len() + 1 + cond.target.len());
        assert_eq!(seq[cond.input.len()], Special::Sep.id());
    }
}

#[test]
fn stream_is_deterministic_and_mixes_tasks() {
    let (grammar, graph, v) = setup();
    let cfg = StreamConfig {
        seed: 42,
        ..StreamConfig::default()
    };
    let a = CorpusStream::new(&grammar, &graph, &v, &cfg).unwrap();
    let b = CorpusStream::new(&grammar, &graph, &v, &cfg).unwrap();
    assert_eq!(a.batch(0).unwrap(), b.batch(0).unwrap());
    assert_eq!(a.batch(0).unwrap().len(), 128);
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    assert_eq!(single.install(|| a.batch(3).unwrap()), a.batch(3).unwrap());
    assert_ne!(a.batch(0).unwrap(), a.batch(1).unwrap());

    let mut counts: HashMap<Task, usize> = HashMap::new();
    for batch in a.batches().take(79) {
        for e in batch.unwrap() {
            *counts.entry(e.task).or_default() += 1;
        }
    }
    let n = 79.0 * 128.0;
    for (task, want) in [
        (Task::Free, 0.8),
        (Task::Unscramble, 0.1),
        (Task::Conditional, 0.1),
    ] {
        let got = counts[&task] as f64 / n;
        assert!((got - want).abs() < 0.02, "{task:?}: {got}");
    }
}

#[test]
fn mix_validation() {
    assert!(TaskMix::new(0.5, 0.2, 0.2).is_err());
    assert!(TaskMix::new(1.2, -0.1, -0.1).is_err());
    assert!(TaskMix::new(1.0, 0.0, 0.0).is_ok());
}

#[test]
fn perturbations_break_what_they_should() {
    let (grammar, graph, v) = setup();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..300 {
        let s = sample_sentence(&grammar, &graph, &v, Level::Seen, &mut rng).unwrap();
        let rv = perturb(
            &s,
            Perturbation::RandomizeValues,
            &graph,
            &grammar,
            &v,
            &mut rng,
        )
        .unwrap();
        assert_eq!(rv.roles, s.roles);
        assert!(recognize(&grammar, &rv.roles).is_some());
        assert!(!rv.type_check(&graph, &v).unwrap().all);

        let rg = perturb(
            &s,
            Perturbation::RandomizeGrammar,
            &graph,
            &grammar,
            &v,
            &mut rng,
        )
        .unwrap();
        assert!(recognize(&grammar, &rg.roles).is_none());
        assert!(rg.tree.is_none());
        let (mut a, mut b) = (rg.tokens.clone(), s.tokens.clone());
        a.sort();
        b.sort();
        assert_eq!(a, b);
    }
}

#[test]
fn corpus_file_round_trip() {
    let (grammar, graph, v) = setup();
    let cfg = StreamConfig::default();
    let stream = CorpusStream::new(&grammar, &graph, &v, &cfg).unwrap();
    let examples: Vec<TaskExample> = stream
        .items(0, 1000)
        .unwrap()
        .into_iter()
        .map(|(_, e)| e)
        .collect();
    let mut buf = Vec::new();
    write_examples(&mut buf, &v, &examples).unwrap();
    assert_eq!(read_examples(&buf[..], &v).unwrap(), examples);

    let text = String::from_utf8(buf).unwrap();
    let first_free = text
        .lines()
        .find(|l| l.contains("\"task\":\"free\""))
        .unwrap();
    assert!(first_free.starts_with("{\"task\":\"free\",\"input\":[\"<free>\"]"));

    let broken = text.replacen("\"<free>\"", "\"<nope>\"", 1);
    let line = broken.lines().position(|l| l.contains("<nope>")).unwrap() + 1;
    match read_examples(broken.as_bytes(), &v) {
        Err(CorpusError::Jsonl(crate::jsonl::JsonlError::Malformed { line: l, .. })) => {
            assert_eq!(l, line)
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn from_tokens_parses_or_not() {
    let (grammar, _, v) = setup();
    let ids = v.ids(&["subj1", "has", "descriptor3"]).unwrap();
    assert!(Sentence::from_tokens(&v, &grammar, ids)
        .unwrap()
        .tree
        .is_some());
    let ids = v.ids(&["has", "subj1", "descriptor3"]).unwrap();
    assert!(Sentence::from_tokens(&v, &grammar, ids)
        .unwrap()
        .tree
        .is_none());
    let ids = v.ids(&["subj1", "<sep>"]).unwrap();
    assert!(matches!(
        Sentence::from_tokens(&v, &grammar, ids),
        Err(CorpusError::NotASentenceToken(_))
    ));
}
