use std::collections::HashMap;
use std::fmt;
use std::io::{self, BufRead, Write};
use std::ops::Range;

use super::CorpusError;
use crate::grammar::Role;
use crate::typegraph::{Filler, TypeGraphParams};

pub const LINKING_VERBS: [&str; 2] = ["has", "is"];
pub const PREPOSITIONS: [&str; 3] = ["in", "on", "with"];
pub const CONJUNCTIONS: [&str; 2] = ["and", "or"];
/// Per adjective kind (entity and descriptor adjectives each get this many).
pub const N_ADJECTIVES: usize = 20;
pub const N_ADVERBS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Special {
    Eos,
    Free,
    Unscramble,
    Cond,
    Sep,
}

impl Special {
    pub const ALL: [Special; 5] = [
        Special::Eos,
        Special::Free,
        Special::Unscramble,
        Special::Cond,
        Special::Sep,
    ];

    pub fn text(self) -> &'static str {
        match self {
            Special::Eos => "<eos>",
            Special::Free => "<free>",
            Special::Unscramble => "<unscramble>",
            Special::Cond => "<cond>",
            Special::Sep => "<sep>",
        }
    }

    pub fn id(self) -> u32 {
        self as u32
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Special(Special),
    /// Function word, adjective or adverb of the given role.
    Word(Role),
    /// Entity in subject or object position.
    Entity {
        role: Role,
        id: u32,
    },
    Descriptor(u32),
    Verb(u32),
}

impl TokenKind {
    /// Sentence role, `None` for task markers and the separator.
    pub fn role(self) -> Option<Role> {
        match self {
            TokenKind::Special(Special::Eos) => Some(Role::Eos),
            TokenKind::Special(_) => None,
            TokenKind::Word(r) | TokenKind::Entity { role: r, .. } => Some(r),
            TokenKind::Descriptor(_) => Some(Role::Desc),
            TokenKind::Verb(_) => Some(Role::Verb),
        }
    }
}

/// Dense token ids. Specials come first (so their ids are fixed), then one
/// contiguous block per role.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    texts: Vec<String>,
    kinds: Vec<TokenKind>,
    index: HashMap<String, u32>,
    ranges: HashMap<Role, Range<u32>>,
    n_classes: usize,
    sizes: [usize; 3],
}

impl Vocabulary {
    pub fn new(params: &TypeGraphParams) -> Self {
        let mut texts = Vec::new();
        let mut kinds = Vec::new();
        let mut ranges = HashMap::new();
        for s in Special::ALL {
            texts.push(s.text().to_string());
            kinds.push(TokenKind::Special(s));
        }
        ranges.insert(Role::Eos, 0..1);
        let mut block = |role: Role, items: Vec<(String, TokenKind)>| {
            let start = texts.len() as u32;
            for (t, k) in items {
                texts.push(t);
                kinds.push(k);
            }
            ranges.insert(role, start..texts.len() as u32);
        };
        let words = |role, names: Vec<String>| {
            names
                .into_iter()
                .map(|n| (n, TokenKind::Word(role)))
                .collect()
        };
        let numbered =
            |prefix: &str, n: usize| (0..n).map(|i| format!("{prefix}{i}")).collect::<Vec<_>>();
        block(
            Role::LVerb,
            words(
                Role::LVerb,
                LINKING_VERBS.iter().map(|s| s.to_string()).collect(),
            ),
        );
        block(
            Role::Prep,
            words(
                Role::Prep,
                PREPOSITIONS.iter().map(|s| s.to_string()).collect(),
            ),
        );
        block(
            Role::Conj,
            words(
                Role::Conj,
                CONJUNCTIONS.iter().map(|s| s.to_string()).collect(),
            ),
        );
        block(
            Role::EAdj,
            words(Role::EAdj, numbered("eAdj", N_ADJECTIVES)),
        );
        block(
            Role::DAdj,
            words(Role::DAdj, numbered("pAdj", N_ADJECTIVES)),
        );
        block(Role::Adv, words(Role::Adv, numbered("adv", N_ADVERBS)));
        block(
            Role::Verb,
            (0..params.n_verbs as u32)
                .map(|v| (format!("verb{v}"), TokenKind::Verb(v)))
                .collect(),
        );
        for (role, prefix) in [(Role::Subj, "subj"), (Role::Obj, "obj")] {
            block(
                role,
                (0..params.n_entities as u32)
                    .map(|e| (format!("{prefix}{e}"), TokenKind::Entity { role, id: e }))
                    .collect(),
            );
        }
        block(
            Role::Desc,
            (0..params.n_desc_props as u32)
                .map(|k| (format!("descriptor{k}"), TokenKind::Descriptor(k)))
                .collect(),
        );
        let index = texts
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Self {
            texts,
            kinds,
            index,
            ranges,
            n_classes: params.n_classes,
            sizes: [params.n_entities, params.n_desc_props, params.n_verbs],
        }
    }

    pub fn len(&self) -> usize {
        self.texts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.texts.is_empty()
    }

    pub fn n_entities(&self) -> usize {
        self.sizes[0]
    }

    pub fn n_descriptors(&self) -> usize {
        self.sizes[1]
    }

    pub fn n_verbs(&self) -> usize {
        self.sizes[2]
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn text(&self, id: u32) -> &str {
        &self.texts[id as usize]
    }

    pub fn kind(&self, id: u32) -> TokenKind {
        self.kinds[id as usize]
    }

    pub fn role(&self, id: u32) -> Option<Role> {
        self.kinds[id as usize].role()
    }

    pub fn id(&self, text: &str) -> Result<u32, CorpusError> {
        self.index
            .get(text)
            .copied()
            .ok_or_else(|| CorpusError::UnknownToken(text.to_string()))
    }

    pub fn ids<S: AsRef<str>>(&self, texts: &[S]) -> Result<Vec<u32>, CorpusError> {
        texts.iter().map(|t| self.id(t.as_ref())).collect()
    }

    pub fn texts(&self, ids: &[u32]) -> Vec<String> {
        ids.iter().map(|&i| self.text(i).to_string()).collect()
    }

    /// Space-joined token texts.
    pub fn render(&self, ids: &[u32]) -> String {
        self.texts(ids).join(" ")
    }

    /// Ids of all tokens with sentence role `role`.
    pub fn role_range(&self, role: Role) -> Range<u32> {
        self.ranges[&role].clone()
    }

    pub fn entity_token(&self, role: Role, e: u32) -> u32 {
        assert!(matches!(role, Role::Subj | Role::Obj) && (e as usize) < self.n_entities());
        self.ranges[&role].start + e
    }

    pub fn descriptor_token(&self, k: u32) -> u32 {
        assert!((k as usize) < self.n_descriptors());
        self.ranges[&Role::Desc].start + k
    }

    pub fn verb_token(&self, v: u32) -> u32 {
        assert!((v as usize) < self.n_verbs());
        self.ranges[&Role::Verb].start + v
    }

    /// Content of a token for type checking.
    pub fn filler(&self, id: u32) -> Filler {
        match self.kind(id) {
            TokenKind::Entity { id, .. } => Filler::Entity(id),
            TokenKind::Descriptor(k) => Filler::Descriptor(k),
            TokenKind::Verb(v) => Filler::Verb(v),
            _ => Filler::Word,
        }
    }

    /// Class of an entity, descriptor or verb token.
    pub fn class_of(&self, id: u32) -> Option<usize> {
        let c = self.n_classes;
        match self.kind(id) {
            TokenKind::Entity { id, .. } => Some(id as usize / (self.n_entities() / c)),
            TokenKind::Descriptor(k) => Some(k as usize / (self.n_descriptors() / c)),
            TokenKind::Verb(v) => Some(v as usize / (self.n_verbs() / c)),
            _ => None,
        }
    }

    /// One line per token in id order: `text<TAB>role<TAB>class`, with
    /// `special` as the role of markers and `-` for classless tokens.
    pub fn write<W: Write>(&self, mut w: W) -> io::Result<()> {
        for id in 0..self.len() as u32 {
            let role = match self.kind(id) {
                TokenKind::Special(_) => "special".to_string(),
                k => k
                    .role()
                    .expect("non-special tokens have roles")
                    .name()
                    .to_string(),
            };
            let class = self.class_of(id).map_or("-".to_string(), |c| c.to_string());
            writeln!(w, "{}\t{role}\t{class}", self.text(id))?;
        }
        w.flush()
    }

    /// Reads a vocabulary file and checks it matches the canonical layout for
    /// the sizes it implies.
    pub fn read<R: BufRead>(r: R) -> Result<Self, CorpusError> {
        let mut counts: HashMap<String, usize> = HashMap::new();
        let mut max_class = None::<usize>;
        let mut rows = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let bad = |m: &str| CorpusError::Malformed {
                line: i + 1,
                message: m.to_string(),
            };
            let parts: Vec<&str> = line.split('\t').collect();
            let [text, role, class] = parts[..] else {
                return Err(bad("expected three tab-separated fields"));
            };
            *counts.entry(role.to_string()).or_default() += 1;
            if class != "-" {
                let c: usize = class.parse().map_err(|_| bad("bad class"))?;
                max_class = Some(max_class.map_or(c, |m| m.max(c)));
            }
            rows.push((text.to_string(), role.to_string(), class.to_string()));
        }
        let n = |r: &str| counts.get(r).copied().unwrap_or(0);
        let params = TypeGraphParams {
            n_entities: n("Subj"),
            n_desc_props: n("Desc"),
            n_verbs: n("Verb"),
            n_classes: max_class.map_or(1, |c| c + 1),
            ..TypeGraphParams::default()
        };
        params
            .validate()
            .map_err(|e| CorpusError::VocabMismatch(e.to_string()))?;
        let vocab = Vocabulary::new(&params);
        let mut expected = Vec::new();
        vocab.write(&mut expected)?;
        let expected = String::from_utf8(expected).expect("vocabulary is utf-8");
        for (i, (line, (text, role, class))) in expected.lines().zip(&rows).enumerate() {
            if line != format!("{text}\t{role}\t{class}") {
                return Err(CorpusError::Malformed {
                    line: i + 1,
                    message: format!("expected `{line}`"),
                });
            }
        }
        if expected.lines().count() != rows.len() {
            return Err(CorpusError::VocabMismatch(format!(
                "expected {} tokens, found {}",
                vocab.len(),
                rows.len()
            )));
        }
        Ok(vocab)
    }

    /// Sizes of the graph this vocabulary was built for, with default edge
    /// fraction and seed.
    pub fn graph_shape(&self) -> TypeGraphParams {
        TypeGraphParams {
            n_entities: self.n_entities(),
            n_desc_props: self.n_descriptors(),
            n_classes: self.n_classes,
            n_verbs: self.n_verbs(),
            ..TypeGraphParams::default()
        }
    }

    /// Errors unless this vocabulary fits a graph with `params`' sizes.
    pub fn check_compatible(&self, params: &TypeGraphParams) -> Result<(), CorpusError> {
        let mine = self.graph_shape();
        if (
            mine.n_entities,
            mine.n_desc_props,
            mine.n_classes,
            mine.n_verbs,
        ) != (
            params.n_entities,
            params.n_desc_props,
            params.n_classes,
            params.n_verbs,
        ) {
            return Err(CorpusError::VocabMismatch(format!(
                "vocabulary is for {} entities / {} descriptors / {} verbs / {} classes, graph has {} / {} / {} / {}",
                mine.n_entities,
                mine.n_desc_props,
                mine.n_verbs,
                mine.n_classes,
                params.n_entities,
                params.n_desc_props,
                params.n_verbs,
                params.n_classes
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Special {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.text())
    }
}
