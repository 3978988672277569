//! Chart recognizer and inside algorithm.
//!
//! Productions are binarized internally (`A -> X Y Z` becomes `A -> X @1`,
//! `@1 -> Y Z`), unit productions are closed per cell in topological order,
//! and the chart stores both the inside probability (sum over derivations)
//! and the Viterbi probability with a back pointer for every symbol and span.

use super::{GrammarError, GrammarSpec, NonterminalId, ParseTree, Production, Role, Symbol};

const N_TERMINALS: usize = Role::ALL.len();

#[derive(Debug, Clone, Copy)]
struct BinaryRule {
    left: usize,
    right: usize,
    probability: f64,
}

#[derive(Debug, Clone, Copy)]
enum RuleRef {
    Binary(BinaryRule),
    Unit { child: usize, probability: f64 },
}

#[derive(Debug, Clone)]
pub(crate) struct Compiled {
    pub(crate) start: usize,
    n_symbols: usize,
    n_nonterminals: usize,
    /// Rules per internal symbol, in declaration order.
    rules: Vec<Vec<RuleRef>>,
    /// Symbols ordered so that unit children precede their parents.
    order: Vec<usize>,
}

impl Compiled {
    pub(crate) fn build(
        names: &[String],
        rules: &[Vec<Production>],
        start: usize,
    ) -> Result<Self, GrammarError> {
        let n_nt = names.len();
        let sym_index = |s: Symbol| match s {
            Symbol::Role(r) => r.index(),
            Symbol::Nonterminal(NonterminalId(i)) => N_TERMINALS + i as usize,
        };
        let mut table: Vec<Vec<RuleRef>> = vec![Vec::new(); N_TERMINALS + n_nt];
        for (lhs, prods) in rules.iter().enumerate() {
            let lhs_sym = N_TERMINALS + lhs;
            for prod in prods {
                let rhs: Vec<usize> = prod.rhs.iter().map(|&s| sym_index(s)).collect();
                match rhs.len() {
                    1 => table[lhs_sym].push(RuleRef::Unit {
                        child: rhs[0],
                        probability: prod.probability,
                    }),
                    _ => {
                        // Chain of fresh symbols for everything after the first child.
                        let mut parent = lhs_sym;
                        let mut probability = prod.probability;
                        for &left in &rhs[..rhs.len() - 2] {
                            let fresh = table.len();
                            table.push(Vec::new());
                            table[parent].push(RuleRef::Binary(BinaryRule {
                                left,
                                right: fresh,
                                probability,
                            }));
                            parent = fresh;
                            probability = 1.0;
                        }
                        let n = rhs.len();
                        table[parent].push(RuleRef::Binary(BinaryRule {
                            left: rhs[n - 2],
                            right: rhs[n - 1],
                            probability,
                        }));
                    }
                }
            }
        }
        let n_symbols = table.len();
        let order = unit_order(&table, names)?;
        Ok(Self {
            start,
            n_symbols,
            n_nonterminals: n_nt,
            rules: table,
            order,
        })
    }

    fn is_intermediate(&self, sym: usize) -> bool {
        sym >= N_TERMINALS + self.n_nonterminals
    }
}

fn unit_order(table: &[Vec<RuleRef>], names: &[String]) -> Result<Vec<usize>, GrammarError> {
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; table.len()];
    let mut order = Vec::with_capacity(table.len());
    fn visit(
        s: usize,
        table: &[Vec<RuleRef>],
        state: &mut [u8],
        order: &mut Vec<usize>,
        names: &[String],
    ) -> Result<(), GrammarError> {
        match state[s] {
            2 => return Ok(()),
            1 => {
                let name = names
                    .get(s.wrapping_sub(N_TERMINALS))
                    .cloned()
                    .unwrap_or_default();
                return Err(GrammarError::UnitCycle(name));
            }
            _ => {}
        }
        state[s] = 1;
        for rule in &table[s] {
            if let RuleRef::Unit { child, .. } = *rule {
                visit(child, table, state, order, names)?;
            }
        }
        state[s] = 2;
        order.push(s);
        Ok(())
    }
    for s in 0..table.len() {
        visit(s, table, &mut state, &mut order, names)?;
    }
    Ok(order)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Back {
    None,
    Leaf,
    Unit { rule: u16 },
    Binary { rule: u16, split: u16 },
}

struct Chart {
    n: usize,
    n_symbols: usize,
    inside: Vec<f64>,
    best: Vec<f64>,
    back: Vec<Back>,
}

impl Chart {
    fn slot(&self, i: usize, j: usize, sym: usize) -> usize {
        (i * (self.n + 1) + j) * self.n_symbols + sym
    }
}

fn fill(compiled: &Compiled, roles: &[Role]) -> Chart {
    let n = roles.len();
    let ns = compiled.n_symbols;
    let cells = (n + 1) * (n + 1) * ns;
    let mut chart = Chart {
        n,
        n_symbols: ns,
        inside: vec![0.0; cells],
        best: vec![0.0; cells],
        back: vec![Back::None; cells],
    };
    for (i, role) in roles.iter().enumerate() {
        let s = chart.slot(i, i + 1, role.index());
        chart.inside[s] = 1.0;
        chart.best[s] = 1.0;
        chart.back[s] = Back::Leaf;
    }
    for len in 1..=n {
        for i in 0..=n - len {
            let j = i + len;
            for &sym in &compiled.order {
                let rules = &compiled.rules[sym];
                if rules.is_empty() {
                    continue;
                }
                let mut inside = 0.0;
                let mut best = 0.0;
                let mut back = Back::None;
                for (r, rule) in rules.iter().enumerate() {
                    match *rule {
                        RuleRef::Unit { child, probability } => {
                            let c = chart.slot(i, j, child);
                            if chart.inside[c] > 0.0 {
                                inside += probability * chart.inside[c];
                                let cand = probability * chart.best[c];
                                if cand > best {
                                    best = cand;
                                    back = Back::Unit { rule: r as u16 };
                                }
                            }
                        }
                        RuleRef::Binary(b) => {
                            for k in i + 1..j {
                                let l = chart.slot(i, k, b.left);
                                let rr = chart.slot(k, j, b.right);
                                if chart.inside[l] > 0.0 && chart.inside[rr] > 0.0 {
                                    inside += b.probability * chart.inside[l] * chart.inside[rr];
                                    let cand = b.probability * chart.best[l] * chart.best[rr];
                                    if cand > best {
                                        best = cand;
                                        back = Back::Binary {
                                            rule: r as u16,
                                            split: k as u16,
                                        };
                                    }
                                }
                            }
                        }
                    }
                }
                let s = chart.slot(i, j, sym);
                chart.inside[s] = inside;
                chart.best[s] = best;
                chart.back[s] = back;
            }
        }
    }
    chart
}

fn symbol_of(compiled: &Compiled, sym: usize) -> Symbol {
    if sym < N_TERMINALS {
        Symbol::Role(Role::ALL[sym])
    } else {
        debug_assert!(!compiled.is_intermediate(sym));
        Symbol::Nonterminal(NonterminalId((sym - N_TERMINALS) as u16))
    }
}

fn build(
    compiled: &Compiled,
    chart: &Chart,
    sym: usize,
    i: usize,
    j: usize,
    out: &mut Vec<ParseTree>,
) {
    let s = chart.slot(i, j, sym);
    let children = match chart.back[s] {
        Back::Leaf => {
            out.push(ParseTree {
                symbol: symbol_of(compiled, sym),
                children: Vec::new(),
            });
            return;
        }
        Back::None => unreachable!("back pointer requested for an empty chart entry"),
        Back::Unit { rule } => {
            let RuleRef::Unit { child, .. } = compiled.rules[sym][rule as usize] else {
                unreachable!()
            };
            let mut children = Vec::new();
            build(compiled, chart, child, i, j, &mut children);
            children
        }
        Back::Binary { rule, split } => {
            let RuleRef::Binary(b) = compiled.rules[sym][rule as usize] else {
                unreachable!()
            };
            let mut children = Vec::new();
            build(compiled, chart, b.left, i, split as usize, &mut children);
            build(compiled, chart, b.right, split as usize, j, &mut children);
            children
        }
    };
    if compiled.is_intermediate(sym) {
        out.extend(children);
    } else {
        out.push(ParseTree {
            symbol: symbol_of(compiled, sym),
            children,
        });
    }
}

fn admissible(grammar: &GrammarSpec, roles: &[Role]) -> bool {
    !roles.is_empty() && roles.len() <= grammar.max_length()
}

/// Returns a maximum-probability parse of `roles`, or `None` if the sequence
/// is not in the language. Ties go to the earliest-declared production.
pub fn recognize(grammar: &GrammarSpec, roles: &[Role]) -> Option<ParseTree> {
    if !admissible(grammar, roles) {
        return None;
    }
    let compiled = grammar.compiled();
    let chart = fill(compiled, roles);
    let root = chart.slot(0, roles.len(), N_TERMINALS + compiled.start);
    if chart.inside[root] <= 0.0 {
        return None;
    }
    let mut out = Vec::with_capacity(1);
    build(
        compiled,
        &chart,
        N_TERMINALS + compiled.start,
        0,
        roles.len(),
        &mut out,
    );
    out.pop()
}

/// Negative natural log of the total probability of `roles`, summed over
/// every derivation.
pub fn derivation_nll(grammar: &GrammarSpec, roles: &[Role]) -> Result<f64, GrammarError> {
    if !admissible(grammar, roles) {
        return Err(GrammarError::NotInLanguage);
    }
    let compiled = grammar.compiled();
    let chart = fill(compiled, roles);
    let p = chart.inside[chart.slot(0, roles.len(), N_TERMINALS + compiled.start)];
    if p > 0.0 {
        Ok(-p.ln())
    } else {
        Err(GrammarError::NotInLanguage)
    }
}
