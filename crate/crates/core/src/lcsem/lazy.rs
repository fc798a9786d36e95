//! Lazy lc-stable model enumeration: Boolean search over the program with
//! external lc-atoms made free, and a theory hook that keeps the
//! constraints demanded by the current assignment consistent.
//!
//! A set X is an lc-stable model iff X is a stable model of
//! P ∪ {`{a}.` | a external lc-atom} and the constraints of the lc-atoms
//! in X, together with the complements of the strict lc-atoms not in X,
//! are jointly satisfiable.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use crate::dl::{Check, DiffConstraint, DlStore};
use crate::ground::{AtomId, GroundProgram, GroundRule};
use crate::stable::{Assignment, Compiled, Search, SolveError, TheoryHook, Verdict};

use super::check::{objective, requirements, Checker, Outcome};
use super::setting::SemanticSetting;
use super::theory::{as_difference, Declaration, TheoryTable};
use super::{report_objective, LcError, LcModel, ObjectiveValue, Witness};

/// P plus a choice rule for every external lc-atom.
pub fn with_free_externals(g: &GroundProgram, setting: &SemanticSetting) -> GroundProgram {
    let mut out = g.clone();
    for a in setting.external() {
        out.add_rule(GroundRule::choice(a));
    }
    out
}

fn to_solve_error(e: LcError) -> SolveError {
    match e {
        LcError::Solve(s) => s,
        LcError::Lp(e @ (crate::lp::LpError::NodeCap | crate::lp::LpError::SplitCap)) => {
            SolveError::Cap(e.to_string())
        }
        LcError::Cap(m) => SolveError::Cap(m),
        other => SolveError::Theory(other.to_string()),
    }
}

type HookWitness = (Witness, Option<ObjectiveValue>);

/// Incremental difference-logic hook. Each lc-atom maps to one difference
/// constraint when true and (if strict) one when false; `&dom` atoms to
/// two bounds against the zero node.
struct DlHook<'a> {
    store: DlStore,
    checker: &'a Checker,
    on_true: BTreeMap<AtomId, Vec<DiffConstraint>>,
    on_false: BTreeMap<AtomId, Vec<DiffConstraint>>,
    processed: usize,
}

impl<'a> DlHook<'a> {
    fn new(
        table: &TheoryTable,
        setting: &SemanticSetting,
        checker: &'a Checker,
    ) -> Result<Self, LcError> {
        let diff = |c: &crate::lp::LinearConstraint| {
            as_difference(c)
                .ok_or_else(|| LcError::Theory(format!("not a difference constraint: {c}")))
        };
        let mut on_true = BTreeMap::new();
        let mut on_false = BTreeMap::new();
        for (&atom, c) in &table.constraints {
            let linear = c.unconditional();
            on_true.insert(atom, vec![diff(&linear)?]);
            if setting.is_strict(atom) {
                on_false.insert(atom, vec![diff(&linear.complement())?]);
            }
        }
        for (&atom, d) in &table.declarations {
            if let Declaration::Dom {
                variable,
                lower,
                upper,
            } = d
            {
                let bounds = Declaration::dom_constraints(variable, lower, upper)
                    .iter()
                    .map(diff)
                    .collect::<Result<_, _>>()?;
                on_true.insert(atom, bounds);
            }
        }
        Ok(DlHook {
            store: checker.dl_store().expect("dl backend"),
            checker,
            on_true,
            on_false,
            processed: 0,
        })
    }
}

impl TheoryHook for DlHook<'_> {
    type Witness = HookWitness;

    fn propagate(&mut self, a: &Assignment<'_>) -> Result<Option<Vec<usize>>, SolveError> {
        while self.processed < a.trail.len() {
            let atom = a.trail[self.processed];
            let map = if a.values[atom] == Some(true) {
                &self.on_true
            } else {
                &self.on_false
            };
            if let Some(constraints) = map.get(&atom) {
                for c in constraints {
                    let check = self
                        .store
                        .assert(c.clone(), a.levels[atom], atom)
                        .map_err(|e| SolveError::Theory(e.to_string()))?;
                    if let Check::Unsat(cycle) = check {
                        let atoms: BTreeSet<usize> = cycle.iter().map(|c| c.tag).collect();
                        return Ok(Some(atoms.into_iter().collect()));
                    }
                }
            }
            self.processed += 1;
        }
        Ok(None)
    }

    fn check(&mut self, a: &Assignment<'_>) -> Result<Verdict<HookWitness>, SolveError> {
        if let Some(conflict) = self.propagate(a)? {
            return Ok(Verdict::Conflict(conflict));
        }
        let witness = self
            .store
            .witness()
            .map_err(|e| SolveError::Theory(e.to_string()))?;
        Ok(Verdict::Consistent((self.checker.complete(witness), None)))
    }

    fn undo(&mut self, level: usize, trail_len: usize) {
        self.store.backtrack(level);
        self.processed = self.processed.min(trail_len);
    }
}

/// Linear-arithmetic hook: rebuilds the problem from the current
/// assignment whenever a theory-relevant atom was assigned, and explains
/// conflicts by an irreducible infeasible subset.
struct LpHook<'a> {
    table: &'a TheoryTable,
    setting: &'a SemanticSetting,
    checker: &'a Checker,
    relevant: Vec<bool>,
    checked: usize,
}

impl<'a> LpHook<'a> {
    fn new(
        g: &GroundProgram,
        table: &'a TheoryTable,
        setting: &'a SemanticSetting,
        checker: &'a Checker,
    ) -> Self {
        let mut relevant = vec![false; g.atoms.len()];
        for (&atom, c) in &table.constraints {
            relevant[atom] = true;
            for a in c.condition_atoms() {
                relevant[a] = true;
            }
        }
        for (&atom, d) in &table.declarations {
            if let Declaration::Dom { .. } = d {
                relevant[atom] = true;
            }
        }
        LpHook {
            table,
            setting,
            checker,
            relevant,
            checked: 0,
        }
    }
}

impl TheoryHook for LpHook<'_> {
    type Witness = HookWitness;

    fn propagate(&mut self, a: &Assignment<'_>) -> Result<Option<Vec<usize>>, SolveError> {
        let fresh = a.trail[self.checked.min(a.trail.len())..]
            .iter()
            .any(|&atom| self.relevant[atom]);
        if !fresh {
            self.checked = a.trail.len();
            return Ok(None);
        }
        let value = |atom: AtomId| a.values[atom];
        let reqs = requirements(self.table, self.setting, &value);
        match self
            .checker
            .check(&reqs, None, true)
            .map_err(to_solve_error)?
        {
            Outcome::Sat { .. } => {
                self.checked = a.trail.len();
                Ok(None)
            }
            Outcome::Unsat(atoms) => Ok(Some(atoms)),
        }
    }

    fn check(&mut self, a: &Assignment<'_>) -> Result<Verdict<HookWitness>, SolveError> {
        let value = |atom: AtomId| a.values[atom];
        let reqs = requirements(self.table, self.setting, &value);
        let cost = objective(self.table, &value);
        match self
            .checker
            .check(&reqs, cost.as_ref(), true)
            .map_err(to_solve_error)?
        {
            Outcome::Sat { witness, objective } => Ok(Verdict::Consistent((
                witness,
                objective.map(|o| report_objective(self.table, &value, o)),
            ))),
            Outcome::Unsat(atoms) => Ok(Verdict::Conflict(atoms)),
        }
    }

    fn undo(&mut self, _level: usize, trail_len: usize) {
        self.checked = self.checked.min(trail_len);
    }
}

/// Enumerates lc-stable models lazily, stopping after `limit` models.
pub fn enumerate_lazy(
    g: &GroundProgram,
    setting: &SemanticSetting,
    table: &TheoryTable,
    checker: &Checker,
    limit: Option<usize>,
    deadline: Option<Instant>,
) -> Result<Vec<LcModel>, LcError> {
    let free = with_free_externals(g, setting);
    let compiled = Compiled::new(&free);
    let mut models = Vec::new();
    let mut on_model = |x: &[bool], (witness, objective): HookWitness| {
        models.push(LcModel {
            atoms: (0..x.len()).filter(|&i| x[i]).collect(),
            witness,
            generator: None,
            objective,
        });
        limit.is_none_or(|l| models.len() < l)
    };
    if limit == Some(0) {
        return Ok(models);
    }
    match &checker.backend {
        super::theory::Backend::Dl { .. } => {
            let hook = DlHook::new(table, setting, checker)?;
            Search::new(&compiled, hook)
                .with_deadline(deadline)
                .run(&mut on_model)?;
        }
        super::theory::Backend::Lp => {
            let hook = LpHook::new(g, table, setting, checker);
            Search::new(&compiled, hook)
                .with_deadline(deadline)
                .run(&mut on_model)?;
        }
    }
    Ok(models)
}
