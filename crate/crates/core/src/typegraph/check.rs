//! Pairings implied by a parse tree, and the class-level type checks.

use super::{TypeGraph, TypeGraphError};
use crate::grammar::{recognize, GrammarSpec, ParseTree, Role, Symbol};

/// Content carried by one token, paired with the token's role.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Filler {
    Entity(u32),
    Descriptor(u32),
    Verb(u32),
    /// Function word, adjective or adverb.
    Word,
}

/// Who binds to whom, by leaf position.
///
/// A descriptor or verb binds every subject in the smallest subtree that
/// contains it and at least one subject; an object binds every verb in the
/// smallest subtree containing it and a verb. Adjectives modify a sibling
/// entity or descriptor, when there is one.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Bindings {
    pub subjects: Vec<usize>,
    pub descriptors: Vec<(usize, Vec<usize>)>,
    pub verbs: Vec<(usize, Vec<usize>)>,
    pub objects: Vec<(usize, Vec<usize>)>,
    pub adjectives: Vec<(usize, Option<usize>)>,
}

struct Flat {
    parent: Vec<Option<usize>>,
    span: Vec<(usize, usize)>,
    children: Vec<Vec<usize>>,
    leaf_node: Vec<usize>,
    roles: Vec<Role>,
}

impl Flat {
    fn new(tree: &ParseTree) -> Self {
        let mut f = Flat {
            parent: vec![],
            span: vec![],
            children: vec![],
            leaf_node: vec![],
            roles: vec![],
        };
        f.visit(tree, None);
        f
    }

    fn visit(&mut self, t: &ParseTree, parent: Option<usize>) -> usize {
        let id = self.parent.len();
        self.parent.push(parent);
        self.span.push((0, 0));
        self.children.push(Vec::new());
        let start = self.roles.len();
        if t.children.is_empty() {
            if let Symbol::Role(r) = t.symbol {
                self.roles.push(r);
                self.leaf_node.push(id);
            }
        }
        for c in &t.children {
            let cid = self.visit(c, Some(id));
            self.children[id].push(cid);
        }
        self.span[id] = (start, self.roles.len());
        id
    }

    /// Positions with role `want` in the smallest proper ancestor span of leaf
    /// `pos` that contains any.
    fn nearest(&self, pos: usize, want: Role) -> Vec<usize> {
        let mut node = self.parent[self.leaf_node[pos]];
        while let Some(n) = node {
            let (a, b) = self.span[n];
            let hits: Vec<usize> = (a..b).filter(|&i| self.roles[i] == want).collect();
            if !hits.is_empty() {
                return hits;
            }
            node = self.parent[n];
        }
        Vec::new()
    }

    fn sibling(&self, pos: usize, heads: &[Role]) -> Option<usize> {
        let parent = self.parent[self.leaf_node[pos]]?;
        self.children[parent].iter().find_map(|&c| {
            let (a, b) = self.span[c];
            (b == a + 1 && self.children[c].is_empty() && heads.contains(&self.roles[a]))
                .then_some(a)
        })
    }
}

pub fn bindings(tree: &ParseTree) -> Bindings {
    let f = Flat::new(tree);
    let mut out = Bindings::default();
    for (i, &r) in f.roles.iter().enumerate() {
        match r {
            Role::Subj => out.subjects.push(i),
            Role::Desc => out.descriptors.push((i, f.nearest(i, Role::Subj))),
            Role::Verb => out.verbs.push((i, f.nearest(i, Role::Subj))),
            Role::Obj => out.objects.push((i, f.nearest(i, Role::Verb))),
            Role::EAdj => out
                .adjectives
                .push((i, f.sibling(i, &[Role::Subj, Role::Obj]))),
            Role::DAdj => out.adjectives.push((i, f.sibling(i, &[Role::Desc]))),
            _ => {}
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TypeCheck {
    /// Every entity–descriptor pairing is class-consistent.
    pub descriptive: bool,
    /// Every subject–verb and verb–object pairing is class-consistent.
    pub relative: bool,
    /// Both of the above, and every adjective modifies a head of its kind.
    pub all: bool,
}

/// Class-level type check of a role-annotated sentence, parsing it first.
pub fn type_check(
    graph: &TypeGraph,
    grammar: &GrammarSpec,
    roles: &[Role],
    fillers: &[Filler],
) -> Result<TypeCheck, TypeGraphError> {
    let tree = recognize(grammar, roles).ok_or(TypeGraphError::Unparsable)?;
    type_check_tree(graph, &tree, fillers)
}

/// Class-level type check against a known parse tree.
pub fn type_check_tree(
    graph: &TypeGraph,
    tree: &ParseTree,
    fillers: &[Filler],
) -> Result<TypeCheck, TypeGraphError> {
    let b = bindings(tree);
    let roles = tree.leaves();
    if roles.len() != fillers.len() {
        return Err(TypeGraphError::RoleMismatch(roles.len().min(fillers.len())));
    }
    let mut class = vec![usize::MAX; roles.len()];
    for (i, (&r, &f)) in roles.iter().zip(fillers).enumerate() {
        let ok = match (r, f) {
            (Role::Subj | Role::Obj, Filler::Entity(e)) if (e as usize) < graph.n_entities() => {
                class[i] = graph.entity_class(e);
                true
            }
            (Role::Desc, Filler::Descriptor(k)) if (k as usize) < graph.n_descriptors() => {
                class[i] = graph.descriptor_class(k);
                true
            }
            (Role::Verb, Filler::Verb(v)) if (v as usize) < graph.n_verbs() => {
                class[i] = graph.verb_class(v);
                true
            }
            (Role::Subj | Role::Obj | Role::Desc | Role::Verb, _) => false,
            (_, Filler::Word) => true,
            _ => false,
        };
        if !ok {
            return Err(TypeGraphError::RoleMismatch(i));
        }
    }
    let agree = |pairs: &[(usize, Vec<usize>)]| {
        pairs
            .iter()
            .all(|(i, js)| js.iter().all(|&j| class[*i] == class[j]))
    };
    let descriptive = agree(&b.descriptors);
    let relative = agree(&b.verbs) && agree(&b.objects);
    let placement = b.adjectives.iter().all(|(_, head)| head.is_some());
    Ok(TypeCheck {
        descriptive,
        relative,
        all: descriptive && relative && placement,
    })
}
