//! Plain-text grammar files.
//!
//! ```text
//! # comment
//! max_length = 75
//! S -> sNP VP [1.0]
//! sNP -> sT [0.8]
//! ```
//!
//! Symbols that name a [`Role`] are terminals; every other symbol is a
//! nonterminal and must have at least one rule. The start symbol is `S`.

use super::{GrammarError, GrammarSpec, NonterminalId, Production, Role, Symbol};

const DEFAULT_MAX_LENGTH: usize = 75;

pub fn parse_grammar_text(text: &str) -> Result<GrammarSpec, GrammarError> {
    let mut names: Vec<String> = Vec::new();
    let mut raw: Vec<(usize, String, Vec<String>, f64)> = Vec::new();
    let mut max_length = DEFAULT_MAX_LENGTH;
    let syntax = |line: usize, message: &str| GrammarError::Syntax {
        line,
        message: message.into(),
    };

    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("max_length") {
            let value = rest
                .trim()
                .strip_prefix('=')
                .ok_or_else(|| syntax(lineno, "expected '='"))?;
            max_length = value
                .trim()
                .parse()
                .map_err(|_| syntax(lineno, "max_length is not an integer"))?;
            continue;
        }
        let (lhs, rest) = line
            .split_once("->")
            .ok_or_else(|| syntax(lineno, "expected '->'"))?;
        let lhs = lhs.trim();
        if lhs.is_empty() || lhs.contains(char::is_whitespace) {
            return Err(syntax(lineno, "left-hand side must be a single symbol"));
        }
        if lhs.parse::<Role>().is_ok() {
            return Err(syntax(lineno, "a terminal cannot be a left-hand side"));
        }
        let rest = rest.trim();
        let open = rest
            .rfind('[')
            .ok_or_else(|| syntax(lineno, "missing [probability]"))?;
        let prob_text = rest[open + 1..]
            .strip_suffix(']')
            .ok_or_else(|| syntax(lineno, "unterminated probability"))?;
        let probability: f64 = prob_text
            .trim()
            .parse()
            .map_err(|_| syntax(lineno, "probability is not a number"))?;
        let rhs: Vec<String> = rest[..open]
            .split_whitespace()
            .map(str::to_string)
            .collect();
        if !names.iter().any(|n| n == lhs) {
            names.push(lhs.to_string());
        }
        raw.push((lineno, lhs.to_string(), rhs, probability));
    }

    let mut rules: Vec<Vec<Production>> = vec![Vec::new(); names.len()];
    for (_, lhs, rhs, probability) in raw {
        let rhs = rhs
            .iter()
            .map(|s| {
                if let Ok(role) = s.parse::<Role>() {
                    Ok(Symbol::Role(role))
                } else {
                    names
                        .iter()
                        .position(|n| n == s)
                        .map(|i| Symbol::Nonterminal(NonterminalId(i as u16)))
                        .ok_or_else(|| GrammarError::UnknownSymbol(s.clone()))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        let lhs_id = names
            .iter()
            .position(|n| *n == lhs)
            .expect("lhs registered above");
        rules[lhs_id].push(Production { rhs, probability });
    }
    GrammarSpec::new(names, rules, max_length)
}
