//! Satisfiability of the constraints an assignment of lc-atoms demands.

use std::collections::BTreeSet;

use num_traits::Zero;

use crate::dl::{Check, DlStore};
use crate::ground::AtomId;
use crate::lp::{
    check_with_splits, iis_groups, Direction, LinearConstraint, LpProblem, Objective, OptResult,
    SatResult,
};
use crate::rational::Rational;
use crate::syntax::Relation;

use super::setting::SemanticSetting;
use super::theory::{as_difference, Backend, Declaration, Linear, TheoryTable};
use super::{LcError, ObjectiveValue, Witness};

/// Constraints contributed by one atom (plus the condition atoms they
/// depend on, which share the blame in conflicts).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Requirement {
    pub atoms: Vec<AtomId>,
    pub constraints: Vec<LinearConstraint>,
}

/// The constraints demanded by a (partial) truth assignment:
/// true lc-atoms contribute their constraint, false strict lc-atoms the
/// complement, true `&dom` atoms their bounds. Atoms that are undecided,
/// or whose conditions are, contribute nothing yet.
pub fn requirements(
    table: &TheoryTable,
    setting: &SemanticSetting,
    value: &impl Fn(AtomId) -> Option<bool>,
) -> Vec<Requirement> {
    let mut out = Vec::new();
    for (&atom, c) in &table.constraints {
        let Some(truth) = value(atom) else { continue };
        if !truth && !setting.is_strict(atom) {
            continue;
        }
        let Some(linear) = c.instantiate(value) else {
            continue;
        };
        let mut atoms = vec![atom];
        atoms.extend(c.condition_atoms());
        out.push(Requirement {
            atoms,
            constraints: vec![if truth { linear } else { linear.complement() }],
        });
    }
    for (&atom, d) in &table.declarations {
        if let Declaration::Dom {
            variable,
            lower,
            upper,
        } = d
        {
            if value(atom) == Some(true) {
                out.push(Requirement {
                    atoms: vec![atom],
                    constraints: Declaration::dom_constraints(variable, lower, upper).to_vec(),
                });
            }
        }
    }
    out
}

/// The combined minimisation objective of the true objective atoms, or
/// `None` if there is none.
pub fn objective(table: &TheoryTable, value: &impl Fn(AtomId) -> Option<bool>) -> Option<Linear> {
    let mut total: Option<Linear> = None;
    for (&atom, d) in &table.declarations {
        if let Declaration::Objective {
            direction,
            elements,
        } = d
        {
            if value(atom) == Some(true) {
                let part = Declaration::minimisation_terms(elements, *direction, value)
                    .unwrap_or_default();
                let mut acc = total.take().unwrap_or_default();
                for (v, c) in part.terms {
                    *acc.terms.entry(v).or_insert_with(Rational::zero) += c;
                }
                acc.constant += part.constant;
                total = Some(acc);
            }
        }
    }
    total
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Sat {
        witness: Witness,
        objective: Option<ObjectiveValue>,
    },
    /// Atoms jointly responsible (empty if not computed).
    Unsat(Vec<AtomId>),
}

/// Checks requirement sets with the configured backend.
#[derive(Clone, Debug)]
pub struct Checker {
    pub backend: Backend,
    pub epsilon: Rational,
    pub allow_epsilon: bool,
    pub integers: BTreeSet<String>,
    pub variables: BTreeSet<String>,
}

impl Checker {
    pub fn new(
        table: &TheoryTable,
        backend: Backend,
        epsilon: Rational,
        allow_epsilon: bool,
    ) -> Self {
        Checker {
            backend,
            epsilon,
            allow_epsilon,
            integers: table.integers(),
            variables: table.variables.clone(),
        }
    }

    /// Fills in unconstrained variables with 0.
    pub fn complete(&self, mut witness: Witness) -> Witness {
        for v in &self.variables {
            witness.entry(v.clone()).or_insert_with(Rational::zero);
        }
        witness
    }

    pub fn dl_store(&self) -> Option<DlStore> {
        match &self.backend {
            Backend::Dl { domain } => Some(DlStore::new(
                *domain,
                self.epsilon.clone(),
                self.allow_epsilon,
            )),
            Backend::Lp => None,
        }
    }

    pub fn lp_problem(&self) -> LpProblem {
        LpProblem {
            integers: self.integers.clone(),
            epsilon: self.epsilon.clone(),
            ..LpProblem::default()
        }
    }

    /// Satisfiability of all requirements together; with `explain`, an
    /// unsatisfiable outcome names a minimal set of responsible atoms.
    pub fn check(
        &self,
        reqs: &[Requirement],
        objective: Option<&Linear>,
        explain: bool,
    ) -> Result<Outcome, LcError> {
        match &self.backend {
            Backend::Dl { .. } => self.check_dl(reqs),
            Backend::Lp => self.check_lp(reqs, objective, explain),
        }
    }

    fn check_dl(&self, reqs: &[Requirement]) -> Result<Outcome, LcError> {
        let mut store = self.dl_store().expect("dl backend");
        for (tag, r) in reqs.iter().enumerate() {
            for c in &r.constraints {
                let d = as_difference(c)
                    .ok_or_else(|| LcError::Theory(format!("not a difference constraint: {c}")))?;
                match store
                    .assert(d, 0, tag)
                    .map_err(|e| LcError::Theory(e.to_string()))?
                {
                    Check::Sat => {}
                    Check::Unsat(cycle) => {
                        let atoms: BTreeSet<AtomId> = cycle
                            .iter()
                            .flat_map(|c| reqs[c.tag].atoms.iter().copied())
                            .collect();
                        return Ok(Outcome::Unsat(atoms.into_iter().collect()));
                    }
                }
            }
        }
        let witness = store
            .witness()
            .map_err(|e| LcError::Theory(e.to_string()))?;
        Ok(Outcome::Sat {
            witness: self.complete(witness),
            objective: None,
        })
    }

    fn check_lp(
        &self,
        reqs: &[Requirement],
        objective: Option<&Linear>,
        explain: bool,
    ) -> Result<Outcome, LcError> {
        let mut base = self.lp_problem();
        let mut splits = Vec::new();
        for c in reqs.iter().flat_map(|r| &r.constraints) {
            if c.relation == Relation::Ne {
                splits.push(c.clone());
            } else {
                base.constraints.push(c.clone());
            }
        }
        match objective {
            None => match check_with_splits(&base, &splits)? {
                SatResult::Sat(w) => Ok(Outcome::Sat {
                    witness: self.complete(w),
                    objective: None,
                }),
                SatResult::Unsat => Ok(Outcome::Unsat(if explain {
                    self.explain_lp(reqs)?
                } else {
                    Vec::new()
                })),
            },
            Some(cost) => self.optimize_lp(reqs, base, &splits, cost, explain),
        }
    }

    fn explain_lp(&self, reqs: &[Requirement]) -> Result<Vec<AtomId>, LcError> {
        let groups: Vec<Vec<LinearConstraint>> =
            reqs.iter().map(|r| r.constraints.clone()).collect();
        let core = iis_groups(&self.lp_problem(), &groups)?;
        let atoms: BTreeSet<AtomId> = core
            .into_iter()
            .flat_map(|g| reqs[g].atoms.iter().copied())
            .collect();
        Ok(atoms.into_iter().collect())
    }

    /// Optimises over every combination of `!=` splits, keeping the best.
    fn optimize_lp(
        &self,
        reqs: &[Requirement],
        base: LpProblem,
        splits: &[LinearConstraint],
        cost: &Linear,
        explain: bool,
    ) -> Result<Outcome, LcError> {
        if splits.len() > crate::lp::SPLIT_CAP {
            return Err(crate::lp::LpError::SplitCap.into());
        }
        let mut best: Option<(Option<Rational>, Witness)> = None;
        for mask in 0u32..(1u32 << splits.len()) {
            let mut problem = base.clone();
            for (i, c) in splits.iter().enumerate() {
                let alternatives = crate::lp::split_disequality(c);
                problem
                    .constraints
                    .push(alternatives[(mask >> i & 1) as usize].clone());
            }
            problem.objective = Some(Objective {
                direction: Direction::Minimize,
                terms: cost
                    .terms
                    .iter()
                    .map(|(v, c)| (c.clone(), v.clone()))
                    .collect(),
            });
            match problem.optimize()? {
                OptResult::Infeasible => {}
                OptResult::Unbounded => {
                    problem.objective = None;
                    let SatResult::Sat(w) = problem.check_sat()? else {
                        unreachable!("an unbounded problem is feasible")
                    };
                    best = Some((None, w));
                    break;
                }
                OptResult::Optimal { value, witness } => {
                    let better = match &best {
                        None => true,
                        Some((Some(b), _)) => value < *b,
                        Some((None, _)) => false,
                    };
                    if better {
                        best = Some((Some(value), witness));
                    }
                }
            }
        }
        Ok(match best {
            None => Outcome::Unsat(if explain {
                self.explain_lp(reqs)?
            } else {
                Vec::new()
            }),
            Some((value, witness)) => Outcome::Sat {
                witness: self.complete(witness),
                objective: Some(match value {
                    Some(v) => ObjectiveValue::Optimal(v + &cost.constant),
                    None => ObjectiveValue::Unbounded,
                }),
            },
        })
    }
}
