//! PCFG over part-of-speech roles.
//!
//! A [`GrammarSpec`] yields *symbolic* sentences: strings over [`Role`]s that
//! the corpus module later fills with vocabulary tokens. The same grammar
//! drives the sampler, the chart recognizer used for grammaticality checks and
//! the inside-probability NLL oracle.

mod chart;
mod text;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use chart::{derivation_nll, recognize};
pub use text::parse_grammar_text;

/// Maximum number of consecutive over-length rejections before sampling gives up.
pub const RESAMPLE_LIMIT: usize = 1000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GrammarError {
    #[error("rule probabilities for {lhs} sum to {sum}, expected 1")]
    Unnormalized { lhs: String, sum: f64 },
    #[error("rule {lhs} -> ... has probability {probability} outside (0, 1]")]
    BadProbability { lhs: String, probability: f64 },
    #[error("nonterminal {0} has no rules")]
    NoRules(String),
    #[error("unknown symbol {0}")]
    UnknownSymbol(String),
    #[error("rule for {0} has an empty right-hand side")]
    EmptyRule(String),
    #[error("start symbol must be S and may only appear as a left-hand side")]
    BadStart,
    #[error("EOS cannot appear in a rule body")]
    EosInRule,
    #[error("unit productions form a cycle through {0}")]
    UnitCycle(String),
    #[error("max_length must be positive")]
    BadMaxLength,
    #[error("sampler rejected {0} consecutive over-length derivations")]
    ResampleLimitExceeded(usize),
    #[error("role sequence is not in the language")]
    NotInLanguage,
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

/// Terminal symbols of the grammar (parts of speech) plus the end marker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Role {
    Subj,
    Obj,
    Verb,
    Conj,
    LVerb,
    Desc,
    EAdj,
    DAdj,
    Adv,
    Prep,
    Eos,
}

impl Role {
    pub const ALL: [Role; 11] = [
        Role::Subj,
        Role::Obj,
        Role::Verb,
        Role::Conj,
        Role::LVerb,
        Role::Desc,
        Role::EAdj,
        Role::DAdj,
        Role::Adv,
        Role::Prep,
        Role::Eos,
    ];

    /// Roles that may appear inside a sentence body.
    pub const BODY: [Role; 10] = [
        Role::Subj,
        Role::Obj,
        Role::Verb,
        Role::Conj,
        Role::LVerb,
        Role::Desc,
        Role::EAdj,
        Role::DAdj,
        Role::Adv,
        Role::Prep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Role::Subj => "Subj",
            Role::Obj => "Obj",
            Role::Verb => "Verb",
            Role::Conj => "Conj",
            Role::LVerb => "lVerb",
            Role::Desc => "Desc",
            Role::EAdj => "eAdj",
            Role::DAdj => "dAdj",
            Role::Adv => "Adv",
            Role::Prep => "Prep",
            Role::Eos => "EOS",
        }
    }

    pub(crate) fn index(self) -> usize {
        self as usize
    }

    /// Entity or property roles, i.e. the ones constrained by the type graph.
    pub fn is_content(self) -> bool {
        matches!(self, Role::Subj | Role::Obj | Role::Verb | Role::Desc)
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Role {
    type Err = GrammarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Role::ALL
            .iter()
            .copied()
            .find(|r| r.name() == s)
            .ok_or_else(|| GrammarError::UnknownSymbol(s.to_string()))
    }
}

/// Index of a nonterminal inside its grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NonterminalId(pub u16);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symbol {
    Role(Role),
    Nonterminal(NonterminalId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Production {
    pub rhs: Vec<Symbol>,
    pub probability: f64,
}

/// A validated probabilistic grammar. Construct with [`GrammarSpec::new`] or
/// [`default_grammar`].
#[derive(Debug, Clone)]
pub struct GrammarSpec {
    names: Vec<String>,
    rules: Vec<Vec<Production>>,
    max_length: usize,
    compiled: chart::Compiled,
}

impl GrammarSpec {
    /// Builds a grammar from named nonterminals and their productions.
    ///
    /// `rules[i]` lists the productions of nonterminal `names[i]`. The start
    /// symbol is the nonterminal named `S`.
    pub fn new(
        names: Vec<String>,
        rules: Vec<Vec<Production>>,
        max_length: usize,
    ) -> Result<Self, GrammarError> {
        if max_length == 0 {
            return Err(GrammarError::BadMaxLength);
        }
        if names.len() != rules.len() {
            return Err(GrammarError::NoRules(
                names.get(rules.len()).cloned().unwrap_or_default(),
            ));
        }
        let start = names
            .iter()
            .position(|n| n == "S")
            .ok_or(GrammarError::BadStart)?;
        for (lhs, prods) in rules.iter().enumerate() {
            if prods.is_empty() {
                return Err(GrammarError::NoRules(names[lhs].clone()));
            }
            let mut sum = 0.0;
            for prod in prods {
                if !(prod.probability > 0.0 && prod.probability <= 1.0) {
                    return Err(GrammarError::BadProbability {
                        lhs: names[lhs].clone(),
                        probability: prod.probability,
                    });
                }
                if prod.rhs.is_empty() {
                    return Err(GrammarError::EmptyRule(names[lhs].clone()));
                }
                for sym in &prod.rhs {
                    match *sym {
                        Symbol::Role(Role::Eos) => return Err(GrammarError::EosInRule),
                        Symbol::Nonterminal(NonterminalId(id)) => {
                            if id as usize >= names.len() {
                                return Err(GrammarError::UnknownSymbol(format!("#{id}")));
                            }
                            if id as usize == start {
                                return Err(GrammarError::BadStart);
                            }
                        }
                        Symbol::Role(_) => {}
                    }
                }
                sum += prod.probability;
            }
            if (sum - 1.0).abs() > 1e-9 {
                return Err(GrammarError::Unnormalized {
                    lhs: names[lhs].clone(),
                    sum,
                });
            }
        }
        let compiled = chart::Compiled::build(&names, &rules, start)?;
        Ok(Self {
            names,
            rules,
            max_length,
            compiled,
        })
    }

    pub fn start(&self) -> NonterminalId {
        NonterminalId(self.compiled.start as u16)
    }

    pub fn max_length(&self) -> usize {
        self.max_length
    }

    pub fn nonterminal_name(&self, id: NonterminalId) -> &str {
        &self.names[id.0 as usize]
    }

    pub fn nonterminal(&self, name: &str) -> Option<NonterminalId> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| NonterminalId(i as u16))
    }

    pub fn nonterminals(&self) -> impl Iterator<Item = NonterminalId> + '_ {
        (0..self.names.len()).map(|i| NonterminalId(i as u16))
    }

    pub fn productions(&self, lhs: NonterminalId) -> &[Production] {
        &self.rules[lhs.0 as usize]
    }

    pub fn symbol_name(&self, sym: Symbol) -> &str {
        match sym {
            Symbol::Role(r) => r.name(),
            Symbol::Nonterminal(nt) => self.nonterminal_name(nt),
        }
    }

    /// Looks up the production `lhs -> rhs`, returning its index and probability.
    pub fn find_production(&self, lhs: NonterminalId, rhs: &[Symbol]) -> Option<(usize, f64)> {
        self.productions(lhs)
            .iter()
            .enumerate()
            .find(|(_, p)| p.rhs == rhs)
            .map(|(i, p)| (i, p.probability))
    }

    pub(crate) fn compiled(&self) -> &chart::Compiled {
        &self.compiled
    }
}

impl fmt::Display for GrammarSpec {
    /// Renders the grammar in the text format read by [`parse_grammar_text`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "max_length = {}", self.max_length)?;
        for nt in self.nonterminals() {
            for prod in self.productions(nt) {
                write!(f, "{} ->", self.nonterminal_name(nt))?;
                for sym in &prod.rhs {
                    write!(f, " {}", self.symbol_name(*sym))?;
                }
                writeln!(f, " [{}]", prod.probability)?;
            }
        }
        Ok(())
    }
}

/// The canonical grammar of the language.
///
/// `vT` routes the verb branch of `VP` through an optional adverb, mirroring
/// the `0.8 / 0.2` modifier pattern of the other preterminal wrappers.
pub fn default_grammar() -> GrammarSpec {
    const TEXT: &str = "\
max_length = 75
S -> sNP VP [1.0]
sNP -> sT [0.8]
sNP -> sNP Conj sNP [0.2]
VP -> lVerb descT [0.4]
VP -> vT Prep oNP [0.4]
VP -> VP Conj VP [0.2]
oNP -> oT [0.7]
oNP -> oT Conj oNP [0.3]
sT -> eAdj Subj [0.8]
sT -> Subj [0.2]
oT -> eAdj Obj [0.8]
oT -> Obj [0.2]
descT -> dAdj Desc [0.8]
descT -> Desc [0.2]
vT -> Adv Verb [0.8]
vT -> Verb [0.2]
";
    parse_grammar_text(TEXT).expect("built-in grammar is valid")
}

/// Derivation tree. Leaves are roles; internal nodes are nonterminals.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseTree {
    pub symbol: Symbol,
    pub children: Vec<ParseTree>,
}

impl ParseTree {
    pub fn leaf(role: Role) -> Self {
        Self {
            symbol: Symbol::Role(role),
            children: Vec::new(),
        }
    }

    /// Left-to-right leaf roles.
    pub fn leaves(&self) -> Vec<Role> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<Role>) {
        match self.symbol {
            Symbol::Role(r) if self.children.is_empty() => out.push(r),
            _ => self.children.iter().for_each(|c| c.collect_leaves(out)),
        }
    }

    /// Product of the probabilities of the productions used by this tree, or
    /// `None` if some node does not match a production of `grammar`.
    pub fn probability(&self, grammar: &GrammarSpec) -> Option<f64> {
        match self.symbol {
            Symbol::Role(_) => self.children.is_empty().then_some(1.0),
            Symbol::Nonterminal(nt) => {
                let rhs: Vec<Symbol> = self.children.iter().map(|c| c.symbol).collect();
                let (_, p) = grammar.find_production(nt, &rhs)?;
                self.children
                    .iter()
                    .try_fold(p, |acc, c| Some(acc * c.probability(grammar)?))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeStats {
    /// Edges on the longest root-to-leaf path.
    pub depth: usize,
    /// Number of leaves.
    pub length: usize,
}

pub fn tree_stats(tree: &ParseTree) -> TreeStats {
    if tree.children.is_empty() {
        return TreeStats {
            depth: 0,
            length: 1,
        };
    }
    tree.children.iter().map(tree_stats).fold(
        TreeStats {
            depth: 0,
            length: 0,
        },
        |acc, s| TreeStats {
            depth: acc.depth.max(s.depth + 1),
            length: acc.length + s.length,
        },
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicSentence {
    pub roles: Vec<Role>,
    pub tree: ParseTree,
}

/// Samples a symbolic sentence, rejecting derivations longer than the
/// grammar's `max_length`.
///
/// A derivation is abandoned as soon as its pending symbols guarantee an
/// over-length result; since every symbol yields at least one leaf this is the
/// same acceptance rule as sampling the full tree and rejecting it.
pub fn sample_symbolic<R: Rng + ?Sized>(
    grammar: &GrammarSpec,
    rng: &mut R,
) -> Result<SymbolicSentence, GrammarError> {
    for _ in 0..RESAMPLE_LIMIT {
        let mut committed = 1usize;
        if let Some(tree) = expand(
            grammar,
            Symbol::Nonterminal(grammar.start()),
            rng,
            &mut committed,
        ) {
            let roles = tree.leaves();
            debug_assert!(roles.len() <= grammar.max_length());
            return Ok(SymbolicSentence { roles, tree });
        }
    }
    Err(GrammarError::ResampleLimitExceeded(RESAMPLE_LIMIT))
}

fn expand<R: Rng + ?Sized>(
    grammar: &GrammarSpec,
    symbol: Symbol,
    rng: &mut R,
    committed: &mut usize,
) -> Option<ParseTree> {
    let nt = match symbol {
        Symbol::Role(r) => return Some(ParseTree::leaf(r)),
        Symbol::Nonterminal(nt) => nt,
    };
    let prods = grammar.productions(nt);
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut chosen = prods.len() - 1;
    for (i, p) in prods.iter().enumerate() {
        acc += p.probability;
        if u < acc {
            chosen = i;
            break;
        }
    }
    let rhs = &prods[chosen].rhs;
    *committed += rhs.len() - 1;
    if *committed > grammar.max_length() {
        return None;
    }
    let mut children = Vec::with_capacity(rhs.len());
    for &sym in rhs {
        children.push(expand(grammar, sym, rng, committed)?);
    }
    Some(ParseTree { symbol, children })
}

#[cfg(test)]
mod tests;
