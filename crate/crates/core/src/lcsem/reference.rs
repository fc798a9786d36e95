//! The definition, executed literally: iterate over candidate sets S ⊆ L,
//! keep the lc-solutions and collect the stable models of the extended
//! programs P^S.

use std::collections::{BTreeMap, BTreeSet};

use crate::ground::{AtomId, GroundLiteral, GroundProgram, GroundRule};
use crate::stable::{enumerate_stable_models, Interpretation};

use super::check::{objective, requirements, Checker, Outcome};
use super::setting::SemanticSetting;
use super::theory::TheoryTable;
use super::{LcError, LcModel, Witness};

/// Largest `|L|` the reference enumerator accepts by default.
pub const REFERENCE_CAP: usize = 12;

/// Whether `s` is an lc-solution: one assignment satisfies the
/// constraints of every atom in `s` and falsifies those of every strict
/// atom outside it. Returns the witness.
pub fn is_lc_solution(
    s: &BTreeSet<AtomId>,
    setting: &SemanticSetting,
    table: &TheoryTable,
    checker: &Checker,
) -> Result<Option<Witness>, LcError> {
    is_lc_solution_with(s, setting, table, checker, &BTreeSet::new())
}

/// As [`is_lc_solution`], additionally enforcing the `&dom` atoms in
/// `declared`.
fn is_lc_solution_with(
    s: &BTreeSet<AtomId>,
    setting: &SemanticSetting,
    table: &TheoryTable,
    checker: &Checker,
    declared: &BTreeSet<AtomId>,
) -> Result<Option<Witness>, LcError> {
    let value = |a: AtomId| {
        if setting.contains(a) {
            Some(s.contains(&a))
        } else {
            Some(declared.contains(&a))
        }
    };
    let reqs = requirements(table, setting, &value);
    Ok(match checker.check(&reqs, None, false)? {
        Outcome::Sat { witness, .. } => Some(witness),
        Outcome::Unsat(_) => None,
    })
}

/// P^S: P plus `a.` for strict external a ∈ S, `:- not a.` for strict
/// defined a ∈ S, `{a}.` for non-strict external a ∈ S and `:- a.` for
/// defined a ∉ S.
pub fn extend_program(
    g: &GroundProgram,
    s: &BTreeSet<AtomId>,
    setting: &SemanticSetting,
) -> GroundProgram {
    let mut out = g.clone();
    for a in setting.lc_atoms() {
        let rule = match (s.contains(&a), setting.is_defined(a), setting.is_strict(a)) {
            (true, false, true) => GroundRule::fact(a),
            (true, true, true) => GroundRule::constraint(vec![GroundLiteral::neg(a)]),
            (true, false, false) => GroundRule::choice(a),
            (false, true, _) => GroundRule::constraint(vec![GroundLiteral::pos(a)]),
            (true, true, false) | (false, false, _) => continue,
        };
        out.add_rule(rule);
    }
    out
}

/// Subsets of `items` in order of increasing size, lexicographic within
/// one size.
fn subsets_by_size(items: &[AtomId]) -> impl Iterator<Item = BTreeSet<AtomId>> + '_ {
    let n = items.len();
    (0..=n).flat_map(move |k| {
        let mut masks: Vec<u64> = (0u64..(1u64 << n))
            .filter(|m| m.count_ones() as usize == k)
            .collect();
        masks.sort_by_key(|m| m.reverse_bits());
        masks.into_iter().map(move |m| {
            (0..n)
                .filter(|i| m >> i & 1 == 1)
                .map(|i| items[i])
                .collect()
        })
    })
}

/// All lc-stable models, deduplicated on the atom set (the first witness
/// found is kept).
pub fn enumerate_reference(
    g: &GroundProgram,
    setting: &SemanticSetting,
    table: &TheoryTable,
    checker: &Checker,
    cap: usize,
) -> Result<Vec<LcModel>, LcError> {
    let lc: Vec<AtomId> = setting.lc_atoms().collect();
    if lc.len() > cap {
        return Err(LcError::Cap(format!(
            "reference mode handles at most {cap} lc-atoms, the program has {}",
            lc.len()
        )));
    }
    if let Some((&atom, _)) = table.constraints.iter().find(|(_, c)| c.is_conditional()) {
        return Err(LcError::Conditional(g.atoms.name(atom).to_owned()));
    }
    let doms: Vec<AtomId> = table
        .declarations
        .iter()
        .filter(|(_, d)| matches!(d, super::theory::Declaration::Dom { .. }))
        .map(|(&a, _)| a)
        .collect();
    let mut found: BTreeMap<Interpretation, LcModel> = BTreeMap::new();
    for s in subsets_by_size(&lc) {
        let plain = if doms.is_empty() {
            match is_lc_solution(&s, setting, table, checker)? {
                Some(w) => Some(w),
                None => continue,
            }
        } else {
            None
        };
        let extended = extend_program(g, &s, setting);
        for x in enumerate_stable_models(&extended, None)? {
            if found.contains_key(&x) {
                continue;
            }
            let witness = match &plain {
                Some(w) => w.clone(),
                None => {
                    let declared: BTreeSet<AtomId> =
                        doms.iter().copied().filter(|a| x.contains(a)).collect();
                    match is_lc_solution_with(&s, setting, table, checker, &declared)? {
                        Some(w) => w,
                        None => continue,
                    }
                }
            };
            let mut model = LcModel {
                atoms: x.clone(),
                witness,
                generator: Some(s.clone()),
                objective: None,
            };
            let value = |a: AtomId| {
                if setting.contains(a) {
                    Some(s.contains(&a))
                } else {
                    Some(x.contains(&a))
                }
            };
            if let Some(cost) = objective(table, &value) {
                let reqs = requirements(table, setting, &value);
                if let Outcome::Sat { witness, objective } =
                    checker.check(&reqs, Some(&cost), false)?
                {
                    model.witness = witness;
                    model.objective = objective.map(|o| super::report_objective(table, &value, o));
                }
            }
            found.insert(x, model);
        }
    }
    Ok(found.into_values().collect())
}
