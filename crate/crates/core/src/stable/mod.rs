//! Regular stable models of ground programs.

mod compile;
mod search;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::ground::{AtomId, GroundHead, GroundLiteral, GroundProgram, GroundRule};

pub use compile::{Agg, CHead, CRule, Compiled, Lit};
pub use search::{Assignment, Completion, NoTheory, Search, TheoryHook, Verdict};

/// A set of ground atoms (regular and lc-atoms alike).
pub type Interpretation = BTreeSet<AtomId>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("time limit reached")]
    Timeout,
    #[error("resource cap exceeded: {0}")]
    Cap(String),
    #[error("{0}")]
    Theory(String),
}

/// Largest atom table accepted by [`enumerate_exhaustive`].
pub const EXHAUSTIVE_ATOM_CAP: usize = 20;

/// Gelfond–Lifschitz reduct of `g` relative to `x`, extended to choice
/// rules and cardinality aggregates.
///
/// Rules with a negative literal falsified by `x` are deleted, remaining
/// negative literals dropped. A choice rule keeps one rule per head atom in
/// `x`. In a positive aggregate the negative elements are removed and the
/// lower bound lowered by the number of them satisfied by `x`; its upper
/// bound is evaluated in `x` (deleting the rule if exceeded). Negated
/// aggregates behave like negative literals. Integrity constraints are
/// dropped: they do not contribute to the least model and are checked
/// separately.
pub fn reduct(g: &GroundProgram, x: &Interpretation) -> GroundProgram {
    let mut out = GroundProgram::new();
    out.atoms = g.atoms.clone();
    let holds_count = |elements: &[(AtomId, bool)], lower: Option<u64>, upper: Option<u64>| {
        let n = elements
            .iter()
            .filter(|(a, neg)| x.contains(a) != *neg)
            .count() as u64;
        n >= lower.unwrap_or(0) && upper.is_none_or(|u| n <= u)
    };
    'rules: for rule in &g.rules {
        let heads: Vec<AtomId> = match &rule.head {
            GroundHead::Atom(h) => vec![*h],
            GroundHead::Choice { elements, .. } => {
                elements.iter().copied().filter(|h| x.contains(h)).collect()
            }
            GroundHead::None => continue,
        };
        let mut body = Vec::new();
        for lit in &rule.body {
            match lit {
                GroundLiteral::Atom {
                    atom,
                    negated: true,
                } => {
                    if x.contains(atom) {
                        continue 'rules;
                    }
                }
                GroundLiteral::Atom { .. } => body.push(lit.clone()),
                GroundLiteral::Count {
                    negated: true,
                    lower,
                    upper,
                    elements,
                } => {
                    if holds_count(elements, *lower, *upper) {
                        continue 'rules;
                    }
                }
                GroundLiteral::Count {
                    negated: false,
                    lower,
                    upper,
                    elements,
                } => {
                    let n = elements
                        .iter()
                        .filter(|(a, neg)| x.contains(a) != *neg)
                        .count() as u64;
                    if upper.is_some_and(|u| n > u) {
                        continue 'rules;
                    }
                    let satisfied_neg = elements
                        .iter()
                        .filter(|(a, neg)| *neg && !x.contains(a))
                        .count() as u64;
                    body.push(GroundLiteral::Count {
                        negated: false,
                        lower: Some(lower.unwrap_or(0).saturating_sub(satisfied_neg)),
                        upper: None,
                        elements: elements.iter().copied().filter(|e| !e.1).collect(),
                    });
                }
            }
        }
        for h in heads {
            out.add_rule(GroundRule {
                head: GroundHead::Atom(h),
                body: body.clone(),
            });
        }
    }
    out
}

fn to_bits(n: usize, x: &Interpretation) -> Vec<bool> {
    let mut bits = vec![false; n];
    for &a in x {
        if a < n {
            bits[a] = true;
        }
    }
    bits
}

fn from_bits(bits: &[bool]) -> Interpretation {
    bits.iter()
        .enumerate()
        .filter_map(|(i, &b)| b.then_some(i))
        .collect()
}

/// True iff `x` is a classical model of `g` equal to the least model of
/// `reduct(g, x)`.
pub fn is_stable_model(g: &GroundProgram, x: &Interpretation) -> bool {
    if x.iter().any(|&a| a >= g.atoms.len()) {
        return false;
    }
    let compiled = Compiled::new(g);
    compiled.is_stable(&to_bits(g.atoms.len(), x))
}

/// Sorts interpretations lexicographically by their sorted atom names.
pub fn sort_models(g: &GroundProgram, models: &mut [Interpretation]) {
    models.sort_by_cached_key(|m| {
        let mut names: Vec<String> = m.iter().map(|&a| g.atoms.name(a).to_owned()).collect();
        names.sort();
        names
    });
}

/// All stable models of `g` (up to `limit` if given), in deterministic order.
pub fn enumerate_stable_models(
    g: &GroundProgram,
    limit: Option<usize>,
) -> Result<Vec<Interpretation>, SolveError> {
    let compiled = Compiled::new(g);
    let mut models = Vec::new();
    Search::new(&compiled, NoTheory).run(|x, ()| {
        models.push(from_bits(x));
        limit.is_none_or(|l| models.len() < l)
    })?;
    sort_models(g, &mut models);
    Ok(models)
}

/// Stable models by checking every subset of the atom table; refuses
/// tables larger than [`EXHAUSTIVE_ATOM_CAP`].
pub fn enumerate_exhaustive(g: &GroundProgram) -> Result<Vec<Interpretation>, SolveError> {
    let n = g.atoms.len();
    if n > EXHAUSTIVE_ATOM_CAP {
        return Err(SolveError::Cap(format!(
            "{n} atoms exceed the exhaustive enumeration cap of {EXHAUSTIVE_ATOM_CAP}"
        )));
    }
    let compiled = Compiled::new(g);
    let mut models = Vec::new();
    for mask in 0u64..(1u64 << n) {
        let bits: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
        if compiled.is_stable(&bits) {
            models.push(from_bits(&bits));
        }
    }
    sort_models(g, &mut models);
    Ok(models)
}

#[cfg(test)]
mod tests;
