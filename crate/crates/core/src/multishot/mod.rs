//! Multi-shot solving: named program parts grounded on demand, external
//! atoms assigned between solve calls, and an incremental driver.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::ground::{AtomId, GroundError, GroundHead, GroundProgram, GroundRule, Grounder};
use crate::lcsem::{self, LcError, Solution, SolveOptions};
use crate::syntax::Program;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExternalValue {
    True,
    False,
    /// No longer external: an ordinary atom, false unless derived.
    Released,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SessionError {
    #[error(transparent)]
    Ground(#[from] GroundError),
    #[error(transparent)]
    Solve(#[from] LcError),
    #[error("{0} is not a declared external atom")]
    NotExternal(String),
    #[error("external atom {0} was released")]
    Released(String),
}

/// A single-owner solving session over one program.
#[derive(Clone, Debug)]
pub struct Session {
    program: Program,
    grounder: Grounder,
    ground: GroundProgram,
    externals: BTreeMap<AtomId, ExternalValue>,
    pub options: SolveOptions,
}

impl Session {
    pub fn new(program: Program, options: SolveOptions) -> Self {
        Session {
            program,
            grounder: Grounder::new(),
            ground: GroundProgram::new(),
            externals: BTreeMap::new(),
            options,
        }
    }

    /// The accumulated ground program.
    pub fn ground_program(&self) -> &GroundProgram {
        &self.ground
    }

    pub fn has_part(&self, name: &str, arity: usize) -> bool {
        self.program.part(name, arity).is_some()
    }

    /// Grounds part `name` with `params` and appends the result. Newly
    /// declared externals start out false.
    pub fn ground_part(&mut self, name: &str, params: &[i64]) -> Result<(), SessionError> {
        self.grounder
            .ground_part(&self.program, name, params, &mut self.ground)?;
        for &atom in &self.ground.externals {
            self.externals.entry(atom).or_insert(ExternalValue::False);
        }
        Ok(())
    }

    fn external(&self, atom: &str) -> Result<AtomId, SessionError> {
        let id = self
            .ground
            .atoms
            .lookup(atom)
            .filter(|id| self.externals.contains_key(id))
            .ok_or_else(|| SessionError::NotExternal(atom.to_owned()))?;
        if self.externals[&id] == ExternalValue::Released {
            return Err(SessionError::Released(atom.to_owned()));
        }
        Ok(id)
    }

    pub fn external_value(&self, atom: &str) -> Option<ExternalValue> {
        let id = self.ground.atoms.lookup(atom)?;
        self.externals.get(&id).copied()
    }

    /// Fixes the truth value of an external atom for subsequent solves.
    pub fn assign_external(&mut self, atom: &str, value: bool) -> Result<(), SessionError> {
        let id = self.external(atom)?;
        self.externals.insert(
            id,
            if value {
                ExternalValue::True
            } else {
                ExternalValue::False
            },
        );
        Ok(())
    }

    /// Makes an external atom permanently ordinary.
    pub fn release_external(&mut self, atom: &str) -> Result<(), SessionError> {
        let id = self.external(atom)?;
        self.externals.insert(id, ExternalValue::Released);
        Ok(())
    }

    /// The program actually solved: rules deriving unreleased externals are
    /// dropped and true externals become facts.
    pub fn effective_program(&self) -> GroundProgram {
        let frozen = |a: &AtomId| {
            matches!(
                self.externals.get(a),
                Some(ExternalValue::True | ExternalValue::False)
            )
        };
        let mut out = self.ground.clone();
        out.clear_rules();
        for rule in &self.ground.rules {
            let head = match &rule.head {
                GroundHead::Atom(a) if frozen(a) => continue,
                GroundHead::Choice {
                    lower,
                    upper,
                    elements,
                } if elements.iter().any(frozen) => GroundHead::Choice {
                    lower: *lower,
                    upper: *upper,
                    elements: elements.iter().copied().filter(|a| !frozen(a)).collect(),
                },
                other => other.clone(),
            };
            out.add_rule(GroundRule {
                head,
                body: rule.body.clone(),
            });
        }
        for (&atom, &value) in &self.externals {
            if value == ExternalValue::True {
                out.add_rule(GroundRule::fact(atom));
            }
        }
        out
    }

    /// lc-stable models of the accumulated program under the current
    /// external values. Together with the solution, returns the program
    /// its atom ids refer to.
    pub fn solve(&self) -> Result<(GroundProgram, Solution), SessionError> {
        let program = self.effective_program();
        let solution = lcsem::solve(&program, &self.options)?;
        Ok((program, solution))
    }
}

/// Summary of one incremental run.
#[derive(Clone, Debug)]
pub struct IncrementalRun {
    /// Model counts per horizon, starting with 0.
    pub counts: Vec<(i64, usize)>,
    /// The first horizon with a model, if any within the cap.
    pub horizon: Option<i64>,
    pub program: GroundProgram,
    pub solution: Option<Solution>,
}

/// Default largest horizon tried by [`incremental`].
pub const HORIZON_CAP: i64 = 32;

/// The base/step/check loop: grounds `base` and `check(0)`, then for
/// n = 1, 2, ... grounds `step(n)` and `check(n)`, sets `query(n)` true and
/// `query(n-1)` false, and solves, stopping at the first horizon with a
/// model (or after `max_horizon`).
pub fn incremental(
    program: Program,
    options: SolveOptions,
    max_horizon: i64,
) -> Result<IncrementalRun, SessionError> {
    let mut session = Session::new(program, options);
    session.ground_part("base", &[])?;
    let mut counts = Vec::new();
    for n in 0..=max_horizon {
        if n > 0 && session.has_part("step", 1) {
            session.ground_part("step", &[n])?;
        }
        if session.has_part("check", 1) {
            session.ground_part("check", &[n])?;
        }
        if n > 0 {
            let previous = format!("query({})", n - 1);
            if session.external_value(&previous).is_some() {
                session.assign_external(&previous, false)?;
            }
        }
        let query = format!("query({n})");
        if session.external_value(&query).is_some() {
            session.assign_external(&query, true)?;
        }
        let (program, solution) = session.solve()?;
        counts.push((n, solution.models.len()));
        if !solution.models.is_empty() {
            return Ok(IncrementalRun {
                counts,
                horizon: Some(n),
                program,
                solution: Some(solution),
            });
        }
    }
    Ok(IncrementalRun {
        counts,
        horizon: None,
        program: session.effective_program(),
        solution: None,
    })
}
