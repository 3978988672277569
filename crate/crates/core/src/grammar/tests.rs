use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;

/// Leftmost-derivation enumeration of every string of length <= `max_len`,
/// with the summed and the maximal derivation probability of each string.
fn enumerate(grammar: &GrammarSpec, max_len: usize) -> HashMap<Vec<Role>, (f64, f64)> {
    let mut out: HashMap<Vec<Role>, (f64, f64)> = HashMap::new();
    let mut stack = vec![(vec![Symbol::Nonterminal(grammar.start())], 1.0)];
    while let Some((form, p)) = stack.pop() {
        if form.len() > max_len {
            continue;
        }
        match form
            .iter()
            .position(|s| matches!(s, Symbol::Nonterminal(_)))
        {
            None => {
                let roles = form
                    .iter()
                    .map(|s| match s {
                        Symbol::Role(r) => *r,
                        _ => unreachable!(),
                    })
                    .collect();
                let e = out.entry(roles).or_insert((0.0, 0.0));
                e.0 += p;
                e.1 = e.1.max(p);
            }
            Some(pos) => {
                let Symbol::Nonterminal(nt) = form[pos] else {
                    unreachable!()
                };
                for prod in grammar.productions(nt) {
                    let mut next = form[..pos].to_vec();
                    next.extend_from_slice(&prod.rhs);
                    next.extend_from_slice(&form[pos + 1..]);
                    stack.push((next, p * prod.probability));
                }
            }
        }
    }
    out
}

fn all_strings(len: usize) -> Vec<Vec<Role>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|s| {
                Role::BODY.iter().map(move |&r| {
                    let mut t = s.clone();
                    t.push(r);
                    t
                })
            })
            .collect();
    }
    out
}

use Role::*;

#[test]
fn default_rules_match_the_published_table() {
    let g = default_grammar();
    let s = g.start();
    let np = g.nonterminal("sNP").unwrap();
    let vp = g.nonterminal("VP").unwrap();
    assert_eq!(
        g.find_production(s, &[Symbol::Nonterminal(np), Symbol::Nonterminal(vp)]),
        Some((0, 1.0))
    );
    for nt in g.nonterminals() {
        let sum: f64 = g.productions(nt).iter().map(|p| p.probability).sum();
        assert!((sum - 1.0).abs() < 1e-12, "{}", g.nonterminal_name(nt));
    }
    assert_eq!(g.max_length(), 75);
    let vt = g.nonterminal("vT").unwrap();
    assert_eq!(
        g.find_production(vt, &[Symbol::Role(Adv), Symbol::Role(Verb)]),
        Some((0, 0.8))
    );
}

#[test]
fn simplest_descriptive_sentence() {
    let g = default_grammar();
    let oracle = enumerate(&g, 3);
    let (p, _) = oracle[&vec![Subj, LVerb, Desc]];
    assert!((p - 0.0128).abs() < 1e-15);

    let nll = derivation_nll(&g, &[Subj, LVerb, Desc]).unwrap();
    assert!((nll + p.ln()).abs() < 1e-12, "{nll}");
    assert!((nll - 4.3583).abs() < 1e-4);

    let tree = recognize(&g, &[Subj, LVerb, Desc]).unwrap();
    assert_eq!(tree.leaves(), vec![Subj, LVerb, Desc]);
    assert_eq!(
        tree_stats(&tree),
        TreeStats {
            depth: 3,
            length: 3
        }
    );
    assert!((tree.probability(&g).unwrap() - 0.0128).abs() < 1e-15);
}

#[test]
fn rejects_misordered_and_empty_input() {
    let g = default_grammar();
    assert!(recognize(&g, &[LVerb, Subj, Desc]).is_none());
    assert!(recognize(&g, &[]).is_none());
    assert_eq!(derivation_nll(&g, &[]), Err(GrammarError::NotInLanguage));
    assert_eq!(
        derivation_nll(&g, &[LVerb, Subj, Desc]),
        Err(GrammarError::NotInLanguage)
    );
    assert!(recognize(&g, &[Subj, LVerb, Desc, Eos]).is_none());
}

#[test]
fn descriptive_skeleton_with_modifiers_is_reachable() {
    let g = default_grammar();
    let skeleton = [EAdj, Subj, LVerb, DAdj, Desc];
    assert!(derivation_nll(&g, &skeleton).unwrap().is_finite());
    assert!(recognize(&g, &[EAdj, Subj, Adv, Verb, Prep, EAdj, Obj]).is_some());
}

#[test]
fn chart_agrees_with_enumeration_up_to_length_five() {
    let g = default_grammar();
    let oracle = enumerate(&g, 5);
    for len in 1..=5 {
        for s in all_strings(len) {
            let tree = recognize(&g, &s);
            match oracle.get(&s) {
                Some(&(total, best)) => {
                    let tree = tree.unwrap_or_else(|| panic!("{s:?} should parse"));
                    assert_eq!(tree.leaves(), s);
                    let nll = derivation_nll(&g, &s).unwrap();
                    assert!(((-nll).exp() - total).abs() < 1e-12 * total.max(1e-300) + 1e-15);
                    let viterbi = tree.probability(&g).unwrap();
                    assert!((viterbi - best).abs() < 1e-15, "{s:?}");
                }
                None => assert!(tree.is_none(), "{s:?} should not parse"),
            }
        }
    }
}

#[test]
fn sampler_is_deterministic_and_grammatical() {
    let g = default_grammar();
    let mut a = ChaCha8Rng::seed_from_u64(11);
    let mut b = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..2000 {
        let x = sample_symbolic(&g, &mut a).unwrap();
        let y = sample_symbolic(&g, &mut b).unwrap();
        assert_eq!(x, y);
        assert!(x.roles.len() <= 75);
        assert_eq!(x.tree.leaves(), x.roles);
        assert!(x.tree.probability(&g).is_some());
        assert!(recognize(&g, &x.roles).is_some());
    }
}

#[test]
fn over_length_grammar_hits_resample_limit() {
    let text = "max_length = 2\nS -> A A A [1.0]\nA -> Subj [1.0]\n";
    let g = parse_grammar_text(text).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert_eq!(
        sample_symbolic(&g, &mut rng),
        Err(GrammarError::ResampleLimitExceeded(RESAMPLE_LIMIT))
    );
}

#[test]
fn text_format_round_trips() {
    let g = default_grammar();
    let again = parse_grammar_text(&g.to_string()).unwrap();
    assert_eq!(g.to_string(), again.to_string());
}

#[test]
fn validation_errors() {
    assert!(matches!(
        parse_grammar_text("S -> Subj [0.5]\n"),
        Err(GrammarError::Unnormalized { .. })
    ));
    assert!(matches!(
        parse_grammar_text("S -> A [1.0]\nA -> B [1.0]\nB -> A [1.0]\n"),
        Err(GrammarError::UnitCycle(_))
    ));
    assert_eq!(
        parse_grammar_text("S -> A [1.0]\nA -> S [1.0]\n").unwrap_err(),
        GrammarError::BadStart
    );
    assert_eq!(
        parse_grammar_text("S -> Subj EOS [1.0]\n").unwrap_err(),
        GrammarError::EosInRule
    );
    assert!(matches!(
        parse_grammar_text("S -> Zed [1.0]\n"),
        Err(GrammarError::UnknownSymbol(_))
    ));
    assert!(matches!(
        parse_grammar_text("S Subj [1.0]\n"),
        Err(GrammarError::Syntax { line: 1, .. })
    ));
    assert_eq!(
        parse_grammar_text("A -> Subj [1.0]\n").unwrap_err(),
        GrammarError::BadStart
    );
}

#[test]
fn tree_stats_of_leaf() {
    assert_eq!(
        tree_stats(&ParseTree::leaf(Subj)),
        TreeStats {
            depth: 0,
            length: 1
        }
    );
}

#[test]
fn unit_rule_contributes_no_nll() {
    // S -> A [1.0], A -> Subj [1.0]: every application has probability one.
    let g = parse_grammar_text("S -> A [1.0]\nA -> Subj [1.0]\n").unwrap();
    assert_eq!(derivation_nll(&g, &[Subj]).unwrap(), 0.0);
}
