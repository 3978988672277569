use super::*;
use crate::grammar::{default_grammar, recognize, Role::*};

fn small() -> TypeGraphParams {
    TypeGraphParams {
        n_entities: 40,
        n_desc_props: 200,
        n_classes: 4,
        n_verbs: 20,
        edge_fraction: 0.15,
        seed: 9,
    }
}

#[test]
fn default_sizes() {
    let g = build_typegraph(&TypeGraphParams::default()).unwrap();
    let p = g.params();
    assert_eq!(
        (
            p.entities_per_class(),
            p.descriptors_per_class(),
            p.verbs_per_class()
        ),
        (90, 1800, 20)
    );
    for e in 0..900 {
        assert_eq!(g.seen_descriptors(e).len(), 270);
    }
    assert_eq!(g.n_seen_descriptor_edges(), 900 * 270);
}

#[test]
fn seen_edges_are_class_consistent_and_verbs_repaired() {
    let g = build_typegraph(&TypeGraphParams::default()).unwrap();
    for e in 0..g.n_entities() as u32 {
        let c = g.entity_class(e);
        assert!(g
            .seen_descriptors(e)
            .iter()
            .all(|&k| g.descriptor_class(k) == c));
        assert!(g.seen_verbs(e).iter().all(|&(v, _)| g.verb_class(v) == c));
    }
    for v in 0..g.n_verbs() as u32 {
        assert!(!g.seen_subjects(v).is_empty());
        assert!(!g.seen_objects(v).is_empty());
    }
}

#[test]
fn repair_covers_sparse_verbs() {
    // One seen verb per entity out of 50 per class: most verbs start uncovered.
    let p = TypeGraphParams {
        n_entities: 20,
        n_desc_props: 200,
        n_classes: 2,
        n_verbs: 100,
        edge_fraction: 0.02,
        seed: 1,
    };
    let g = build_typegraph(&p).unwrap();
    for v in 0..100 {
        assert!(
            !g.seen_subjects(v).is_empty() && !g.seen_objects(v).is_empty(),
            "verb {v}"
        );
        assert!(g
            .seen_subjects(v)
            .iter()
            .all(|&e| g.entity_class(e) == g.verb_class(v)));
    }
}

#[test]
fn deterministic_under_seed() {
    let a = build_typegraph(&small()).unwrap();
    let b = build_typegraph(&small()).unwrap();
    assert_eq!(a, b);
    let c = build_typegraph(&TypeGraphParams {
        seed: 10,
        ..small()
    })
    .unwrap();
    assert_ne!(a, c);
}

#[test]
fn rejects_indivisible_params() {
    let p = TypeGraphParams {
        n_entities: 41,
        ..small()
    };
    assert!(matches!(
        build_typegraph(&p),
        Err(TypeGraphError::InvalidParams(_))
    ));
    let p = TypeGraphParams {
        edge_fraction: 0.0,
        ..small()
    };
    assert!(matches!(
        build_typegraph(&p),
        Err(TypeGraphError::InvalidParams(_))
    ));
}

#[test]
fn queries() {
    let g = build_typegraph(&small()).unwrap();
    for e in 0..40 {
        for kind in [QueryKind::Descriptors, QueryKind::Verbs] {
            let seen = g.query_valid(Node::Entity(e), kind, Level::Seen).unwrap();
            let class = g.query_valid(Node::Entity(e), kind, Level::Class).unwrap();
            assert!(seen.iter().all(|x| class.binary_search(x).is_ok()));
        }
        assert_eq!(
            g.query_valid(Node::Entity(e), QueryKind::Descriptors, Level::Seen)
                .unwrap()
                .len(),
            8
        );
    }
    for v in 0..20 {
        for kind in [QueryKind::Subjects, QueryKind::Objects] {
            let seen = g.query_valid(Node::Verb(v), kind, Level::Seen).unwrap();
            assert!(seen.iter().all(|&e| g.entity_class(e) == g.verb_class(v)));
        }
    }
    for k in 0..200 {
        let seen = g
            .query_valid(Node::Descriptor(k), QueryKind::Entities, Level::Seen)
            .unwrap();
        assert!(seen.iter().all(|&e| g.is_seen_descriptor(e, k)));
    }
    assert!(matches!(
        g.query_valid(Node::Descriptor(3), QueryKind::Subjects, Level::Seen),
        Err(TypeGraphError::KindMismatch { .. })
    ));
    assert!(matches!(
        g.query_valid(Node::Entity(40), QueryKind::Descriptors, Level::Seen),
        Err(TypeGraphError::UnknownId { .. })
    ));
}

#[test]
fn binary_round_trip_and_corruption() {
    let g = build_typegraph(&small()).unwrap();
    let mut buf = Vec::new();
    write_typegraph(&g, &mut buf).unwrap();
    assert_eq!(read_typegraph(&buf[..]).unwrap(), g);
    assert!(matches!(
        read_typegraph(&buf[..buf.len() - 1]),
        Err(TypeGraphError::Format(_))
    ));
    let mut extra = buf.clone();
    extra.push(0);
    assert!(matches!(
        read_typegraph(&extra[..]),
        Err(TypeGraphError::Format(_))
    ));
    assert!(matches!(
        read_typegraph(&b"NOPE"[..]),
        Err(TypeGraphError::Format(_))
    ));
    assert!(g.summary().contains("seen descriptor edges = 320"));
}

#[test]
fn type_check_examples() {
    let g = build_typegraph(&small()).unwrap();
    let gr = default_grammar();
    // Entities 0..10 and descriptors 0..50 form class 0; verbs 0..5.
    let roles = [Subj, LVerb, Desc];
    let ok = type_check(
        &g,
        &gr,
        &roles,
        &[Filler::Entity(3), Filler::Word, Filler::Descriptor(49)],
    )
    .unwrap();
    assert_eq!(
        ok,
        TypeCheck {
            descriptive: true,
            relative: true,
            all: true
        }
    );
    let bad = type_check(
        &g,
        &gr,
        &roles,
        &[Filler::Entity(3), Filler::Word, Filler::Descriptor(50)],
    )
    .unwrap();
    assert_eq!(
        bad,
        TypeCheck {
            descriptive: false,
            relative: true,
            all: false
        }
    );

    let roles = [Subj, Verb, Prep, Obj];
    let f = |s, v, o| {
        [
            Filler::Entity(s),
            Filler::Verb(v),
            Filler::Word,
            Filler::Entity(o),
        ]
    };
    assert!(type_check(&g, &gr, &roles, &f(1, 4, 9)).unwrap().all);
    let r = type_check(&g, &gr, &roles, &f(1, 4, 19)).unwrap();
    assert!(r.descriptive && !r.relative && !r.all);
    assert!(!type_check(&g, &gr, &roles, &f(11, 4, 9)).unwrap().relative);

    assert!(matches!(
        type_check(
            &g,
            &gr,
            &[LVerb, Subj, Desc],
            &[Filler::Word, Filler::Entity(0), Filler::Descriptor(0)]
        ),
        Err(TypeGraphError::Unparsable)
    ));
    assert!(matches!(
        type_check(
            &g,
            &gr,
            &[Subj, LVerb, Desc],
            &[Filler::Word, Filler::Word, Filler::Descriptor(0)]
        ),
        Err(TypeGraphError::RoleMismatch(0))
    ));
}

#[test]
fn conjunctions_bind_every_subject_and_the_local_verb() {
    let gr = default_grammar();
    // Subj Conj Subj Verb Prep Obj Conj Verb Prep Obj
    let roles = [Subj, Conj, Subj, Verb, Prep, Obj, Conj, Verb, Prep, Obj];
    let tree = recognize(&gr, &roles).unwrap();
    let b = bindings(&tree);
    assert_eq!(b.subjects, vec![0, 2]);
    assert_eq!(b.verbs, vec![(3, vec![0, 2]), (7, vec![0, 2])]);
    assert_eq!(b.objects, vec![(5, vec![3]), (9, vec![7])]);

    let roles = [EAdj, Subj, LVerb, DAdj, Desc];
    let b = bindings(&recognize(&gr, &roles).unwrap());
    assert_eq!(b.descriptors, vec![(4, vec![1])]);
    assert_eq!(b.adjectives, vec![(0, Some(1)), (3, Some(4))]);
}

#[test]
fn adjacency_basics() {
    let mut a = Adjacency::new(3, 130);
    assert_eq!(a.count(), 0);
    a.observe(2, 129);
    a.observe(2, 0);
    a.observe(2, 0);
    assert_eq!(a.count(), 2);
    assert_eq!(a.row(2), vec![0, 129]);
    let mut b = a.clone();
    b.observe(0, 64);
    assert!(a.is_subset_of(&b) && !b.is_subset_of(&a));
    let mut csv = Vec::new();
    b.write_csv(&mut csv).unwrap();
    assert_eq!(
        String::from_utf8(csv).unwrap(),
        "entity,descriptor\n0,64\n2,0\n2,129\n"
    );
}
