//! Type-constraints graph: which entities may take which descriptors and
//! verbs.
//!
//! Entities, descriptors and verbs are each split into `n_classes` contiguous,
//! equally sized blocks; ids `c * per_class .. (c + 1) * per_class` belong to
//! class `c`. At class level every same-class pair is valid. The seen mask is a
//! per-entity subsample of those pairs, and is what the training corpus draws
//! from.

mod adjacency;
mod check;
mod io;

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::rng::{item_rng, stream};

pub use adjacency::Adjacency;
pub use check::{bindings, type_check, type_check_tree, Bindings, Filler, TypeCheck};
pub use io::{read_typegraph, write_typegraph};

#[derive(Debug, Error)]
pub enum TypeGraphError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("unknown {kind} id {id}")]
    UnknownId { kind: &'static str, id: u32 },
    #[error("query kind {kind:?} does not apply to a {anchor}")]
    KindMismatch {
        anchor: &'static str,
        kind: QueryKind,
    },
    #[error("sentence does not parse; pairings are undefined")]
    Unparsable,
    #[error("filler at position {0} does not match its role")]
    RoleMismatch(usize),
    #[error("bad graph file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypeGraphParams {
    pub n_entities: usize,
    /// Descriptive properties only; verbs are counted separately.
    pub n_desc_props: usize,
    pub n_classes: usize,
    pub n_verbs: usize,
    pub edge_fraction: f64,
    pub seed: u64,
}

impl Default for TypeGraphParams {
    fn default() -> Self {
        Self {
            n_entities: 900,
            n_desc_props: 18000,
            n_classes: 10,
            n_verbs: 200,
            edge_fraction: 0.15,
            seed: 0,
        }
    }
}

/// `round(x)` with halves rounded up.
pub fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

impl TypeGraphParams {
    pub fn validate(&self) -> Result<(), TypeGraphError> {
        let bad = |m: String| Err(TypeGraphError::InvalidParams(m));
        if self.n_classes == 0 {
            return bad("n_classes must be positive".into());
        }
        for (name, n) in [
            ("n_entities", self.n_entities),
            ("n_desc_props", self.n_desc_props),
            ("n_verbs", self.n_verbs),
        ] {
            if n == 0 || n % self.n_classes != 0 {
                return bad(format!(
                    "{name} = {n} is not a positive multiple of n_classes = {}",
                    self.n_classes
                ));
            }
            if n > u32::MAX as usize {
                return bad(format!("{name} = {n} is too large"));
            }
        }
        if !(self.edge_fraction > 0.0 && self.edge_fraction <= 1.0) {
            return bad(format!(
                "edge_fraction = {} must lie in (0, 1]",
                self.edge_fraction
            ));
        }
        if self.seen_descriptors_per_entity() == 0 || self.seen_verbs_per_entity() == 0 {
            return bad("edge_fraction leaves entities without seen descriptors or verbs".into());
        }
        Ok(())
    }

    pub fn entities_per_class(&self) -> usize {
        self.n_entities / self.n_classes
    }

    pub fn descriptors_per_class(&self) -> usize {
        self.n_desc_props / self.n_classes
    }

    pub fn verbs_per_class(&self) -> usize {
        self.n_verbs / self.n_classes
    }

    pub fn seen_descriptors_per_entity(&self) -> usize {
        round_half_up(self.edge_fraction * self.descriptors_per_class() as f64)
    }

    pub fn seen_verbs_per_entity(&self) -> usize {
        round_half_up(self.edge_fraction * self.verbs_per_class() as f64)
    }
}

/// Which ways round an entity may use a verb.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Subject,
    Object,
    Both,
}

impl Direction {
    pub fn as_subject(self) -> bool {
        matches!(self, Direction::Subject | Direction::Both)
    }

    pub fn as_object(self) -> bool {
        matches!(self, Direction::Object | Direction::Both)
    }

    fn code(self) -> u8 {
        match self {
            Direction::Subject => 1,
            Direction::Object => 2,
            Direction::Both => 3,
        }
    }

    fn from_code(c: u8) -> Option<Self> {
        match c {
            1 => Some(Direction::Subject),
            2 => Some(Direction::Object),
            3 => Some(Direction::Both),
            _ => None,
        }
    }

    fn add(self, other: Direction) -> Direction {
        if self == other {
            self
        } else {
            Direction::Both
        }
    }
}

/// A node of the graph, used as query anchor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Node {
    Entity(u32),
    Descriptor(u32),
    Verb(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryKind {
    /// Descriptors of an entity.
    Descriptors,
    /// Verbs of an entity, in any direction.
    Verbs,
    /// Entities carrying a descriptor.
    Entities,
    /// Entities that may be the subject of a verb.
    Subjects,
    /// Entities that may be the object of a verb.
    Objects,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    /// The sub-sampled edges the corpus is generated from.
    Seen,
    /// Every same-class pair.
    Class,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypeGraph {
    params: TypeGraphParams,
    /// Sorted seen descriptor ids per entity.
    entity_desc: Vec<Vec<u32>>,
    /// Seen verbs per entity, sorted by verb id.
    entity_verbs: Vec<Vec<(u32, Direction)>>,
    verb_subjects: Vec<Vec<u32>>,
    verb_objects: Vec<Vec<u32>>,
}

/// Builds the graph. Deterministic in `params.seed`.
pub fn build_typegraph(params: &TypeGraphParams) -> Result<TypeGraph, TypeGraphError> {
    params.validate()?;
    let epc = params.entities_per_class();
    let dpc = params.descriptors_per_class();
    let vpc = params.verbs_per_class();
    let n_desc = params.seen_descriptors_per_entity();
    let n_verb = params.seen_verbs_per_entity();

    let entity_desc: Vec<Vec<u32>> = (0..params.n_entities)
        .into_par_iter()
        .map(|e| {
            let mut rng = item_rng(params.seed, stream::GRAPH_DESCRIPTORS, e as u64);
            let base = (e / epc * dpc) as u32;
            let mut ids: Vec<u32> = sample(&mut rng, dpc, n_desc)
                .into_iter()
                .map(|i| base + i as u32)
                .collect();
            ids.sort_unstable();
            ids
        })
        .collect();

    let mut entity_verbs: Vec<Vec<(u32, Direction)>> = (0..params.n_entities)
        .into_par_iter()
        .map(|e| {
            let mut rng = item_rng(params.seed, stream::GRAPH_VERBS, e as u64);
            let base = (e / epc * vpc) as u32;
            let mut edges: Vec<(u32, Direction)> = sample(&mut rng, vpc, n_verb)
                .into_iter()
                .map(|i| (base + i as u32, random_direction(&mut rng)))
                .collect();
            edges.sort_unstable_by_key(|&(v, _)| v);
            edges
        })
        .collect();

    // Repair: every verb needs a subject-capable and an object-capable entity.
    let (mut subj, mut obj) = verb_lists(params.n_verbs, &entity_verbs);
    for v in 0..params.n_verbs {
        for (slot, want) in [Direction::Subject, Direction::Object]
            .into_iter()
            .enumerate()
        {
            let list = if want == Direction::Subject {
                &mut subj[v]
            } else {
                &mut obj[v]
            };
            if !list.is_empty() {
                continue;
            }
            let mut rng = item_rng(params.seed, stream::GRAPH_REPAIR, (2 * v + slot) as u64);
            let e = (v / vpc) * epc + rng.random_range(0..epc);
            let edges = &mut entity_verbs[e];
            match edges.binary_search_by_key(&(v as u32), |&(id, _)| id) {
                Ok(i) => edges[i].1 = edges[i].1.add(want),
                Err(i) => edges.insert(i, (v as u32, want)),
            }
            list.push(e as u32);
        }
    }

    Ok(TypeGraph {
        params: params.clone(),
        entity_desc,
        entity_verbs,
        verb_subjects: subj,
        verb_objects: obj,
    })
}

fn random_direction<R: Rng + ?Sized>(rng: &mut R) -> Direction {
    loop {
        match (rng.random_bool(0.5), rng.random_bool(0.5)) {
            (true, true) => return Direction::Both,
            (true, false) => return Direction::Subject,
            (false, true) => return Direction::Object,
            (false, false) => continue,
        }
    }
}

fn verb_lists(
    n_verbs: usize,
    entity_verbs: &[Vec<(u32, Direction)>],
) -> (Vec<Vec<u32>>, Vec<Vec<u32>>) {
    let mut subj = vec![Vec::new(); n_verbs];
    let mut obj = vec![Vec::new(); n_verbs];
    for (e, edges) in entity_verbs.iter().enumerate() {
        for &(v, d) in edges {
            if d.as_subject() {
                subj[v as usize].push(e as u32);
            }
            if d.as_object() {
                obj[v as usize].push(e as u32);
            }
        }
    }
    (subj, obj)
}

impl TypeGraph {
    pub fn params(&self) -> &TypeGraphParams {
        &self.params
    }

    pub fn n_entities(&self) -> usize {
        self.params.n_entities
    }

    pub fn n_descriptors(&self) -> usize {
        self.params.n_desc_props
    }

    pub fn n_verbs(&self) -> usize {
        self.params.n_verbs
    }

    pub fn n_classes(&self) -> usize {
        self.params.n_classes
    }

    pub fn entity_class(&self, e: u32) -> usize {
        e as usize / self.params.entities_per_class()
    }

    pub fn descriptor_class(&self, k: u32) -> usize {
        k as usize / self.params.descriptors_per_class()
    }

    pub fn verb_class(&self, v: u32) -> usize {
        v as usize / self.params.verbs_per_class()
    }

    pub fn class_of(&self, node: Node) -> usize {
        match node {
            Node::Entity(e) => self.entity_class(e),
            Node::Descriptor(k) => self.descriptor_class(k),
            Node::Verb(v) => self.verb_class(v),
        }
    }

    /// Ids of class `c` for the given node family, as a range.
    pub fn class_entities(&self, c: usize) -> std::ops::Range<u32> {
        let n = self.params.entities_per_class();
        (c * n) as u32..((c + 1) * n) as u32
    }

    pub fn class_descriptors(&self, c: usize) -> std::ops::Range<u32> {
        let n = self.params.descriptors_per_class();
        (c * n) as u32..((c + 1) * n) as u32
    }

    pub fn class_verbs(&self, c: usize) -> std::ops::Range<u32> {
        let n = self.params.verbs_per_class();
        (c * n) as u32..((c + 1) * n) as u32
    }

    /// Sorted seen descriptors of entity `e`.
    pub fn seen_descriptors(&self, e: u32) -> &[u32] {
        &self.entity_desc[e as usize]
    }

    /// Seen verbs of entity `e` with their directions, sorted by verb.
    pub fn seen_verbs(&self, e: u32) -> &[(u32, Direction)] {
        &self.entity_verbs[e as usize]
    }

    /// Sorted seen subject-capable entities of verb `v`.
    pub fn seen_subjects(&self, v: u32) -> &[u32] {
        &self.verb_subjects[v as usize]
    }

    /// Sorted seen object-capable entities of verb `v`.
    pub fn seen_objects(&self, v: u32) -> &[u32] {
        &self.verb_objects[v as usize]
    }

    /// Whether `(e, k)` is a seen descriptive edge.
    pub fn is_seen_descriptor(&self, e: u32, k: u32) -> bool {
        self.entity_desc[e as usize].binary_search(&k).is_ok()
    }

    pub fn n_seen_descriptor_edges(&self) -> usize {
        self.entity_desc.iter().map(Vec::len).sum()
    }

    pub fn n_seen_verb_edges(&self) -> usize {
        self.entity_verbs.iter().map(Vec::len).sum()
    }

    fn check_id(&self, node: Node) -> Result<(), TypeGraphError> {
        let (kind, id, n) = match node {
            Node::Entity(e) => ("entity", e, self.params.n_entities),
            Node::Descriptor(k) => ("descriptor", k, self.params.n_desc_props),
            Node::Verb(v) => ("verb", v, self.params.n_verbs),
        };
        if (id as usize) < n {
            Ok(())
        } else {
            Err(TypeGraphError::UnknownId { kind, id })
        }
    }

    /// Valid partners of `anchor`, sorted ascending.
    pub fn query_valid(
        &self,
        anchor: Node,
        kind: QueryKind,
        level: Level,
    ) -> Result<Vec<u32>, TypeGraphError> {
        self.check_id(anchor)?;
        let c = self.class_of(anchor);
        let out = match (anchor, kind, level) {
            (Node::Entity(_), QueryKind::Descriptors, Level::Class) => {
                self.class_descriptors(c).collect()
            }
            (Node::Entity(e), QueryKind::Descriptors, Level::Seen) => {
                self.seen_descriptors(e).to_vec()
            }
            (Node::Entity(_), QueryKind::Verbs, Level::Class) => self.class_verbs(c).collect(),
            (Node::Entity(e), QueryKind::Verbs, Level::Seen) => {
                self.seen_verbs(e).iter().map(|&(v, _)| v).collect()
            }
            (Node::Descriptor(_), QueryKind::Entities, Level::Class) => {
                self.class_entities(c).collect()
            }
            (Node::Descriptor(k), QueryKind::Entities, Level::Seen) => self
                .class_entities(c)
                .filter(|&e| self.is_seen_descriptor(e, k))
                .collect(),
            (Node::Verb(_), QueryKind::Subjects | QueryKind::Objects, Level::Class) => {
                self.class_entities(c).collect()
            }
            (Node::Verb(v), QueryKind::Subjects, Level::Seen) => self.seen_subjects(v).to_vec(),
            (Node::Verb(v), QueryKind::Objects, Level::Seen) => self.seen_objects(v).to_vec(),
            (anchor, kind, _) => {
                let anchor = match anchor {
                    Node::Entity(_) => "entity",
                    Node::Descriptor(_) => "descriptor",
                    Node::Verb(_) => "verb",
                };
                return Err(TypeGraphError::KindMismatch { anchor, kind });
            }
        };
        Ok(out)
    }

    /// Human-readable summary: parameters, class sizes, edge counts.
    pub fn summary(&self) -> String {
        let p = &self.params;
        let mut s = String::new();
        s.push_str(&format!("seed = {}\n", p.seed));
        s.push_str(&format!("n_classes = {}\n", p.n_classes));
        s.push_str(&format!(
            "n_entities = {} ({} per class)\n",
            p.n_entities,
            p.entities_per_class()
        ));
        s.push_str(&format!(
            "n_desc_props = {} ({} per class)\n",
            p.n_desc_props,
            p.descriptors_per_class()
        ));
        s.push_str(&format!(
            "n_verbs = {} ({} per class)\n",
            p.n_verbs,
            p.verbs_per_class()
        ));
        s.push_str(&format!("edge_fraction = {}\n", p.edge_fraction));
        s.push_str(&format!(
            "seen descriptor edges = {} ({} per entity)\n",
            self.n_seen_descriptor_edges(),
            p.seen_descriptors_per_entity()
        ));
        s.push_str(&format!("seen verb edges = {}\n", self.n_seen_verb_edges()));
        s
    }
}

#[cfg(test)]
mod tests;
