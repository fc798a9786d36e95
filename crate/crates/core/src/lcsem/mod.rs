//! lc-stable model semantics: settings, lc-solutions, the extended programs
//! P^S, and the reference and lazy enumerators.

mod check;
mod lazy;
pub mod props;
mod reference;
pub mod setting;
pub mod theory;

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use thiserror::Error;

use crate::dl::Domain;
use crate::ground::{AtomId, GroundProgram};
use crate::lp::{default_epsilon, Direction, LpError};
use crate::rational::Rational;
use crate::stable::{Interpretation, SolveError};
use crate::syntax::Relation;

pub use check::{requirements, Checker, Outcome, Requirement};
pub use lazy::{enumerate_lazy, with_free_externals};
pub use reference::{enumerate_reference, extend_program, is_lc_solution, REFERENCE_CAP};
pub use setting::{signature, AtomInfo, Preset, SemanticSetting, StrictPolicy};
pub use theory::{Backend, Declaration, LcConstraint, TheoryChoice, TheoryTable};

/// A numeric assignment to theory variables.
pub type Witness = BTreeMap<String, Rational>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LcError {
    #[error("{0}")]
    Setting(String),
    #[error("{0}")]
    Theory(String),
    #[error("lc-atom {0} has conditional elements, which reference mode does not support")]
    Conditional(String),
    #[error("resource cap exceeded: {0}")]
    Cap(String),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

impl LcError {
    /// Resource limits (as opposed to invalid input or configuration).
    pub fn is_resource_limit(&self) -> bool {
        matches!(
            self,
            LcError::Cap(_)
                | LcError::Lp(LpError::NodeCap | LpError::SplitCap)
                | LcError::Solve(SolveError::Cap(_) | SolveError::Timeout)
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ObjectiveValue {
    Optimal(Rational),
    Unbounded,
}

/// Reported objective: the combined value of the active objective atoms,
/// in the direction of those atoms if they all agree (maximisation values
/// are reported as maxima), otherwise as a minimisation value where
/// maximised terms count negatively.
pub(crate) fn report_objective(
    table: &TheoryTable,
    value: &impl Fn(AtomId) -> Option<bool>,
    o: ObjectiveValue,
) -> ObjectiveValue {
    let all_max = table.declarations.iter().all(|(&a, d)| match d {
        Declaration::Objective { direction, .. } => {
            value(a) != Some(true) || *direction == Direction::Maximize
        }
        Declaration::Dom { .. } => true,
    });
    match o {
        ObjectiveValue::Optimal(v) if all_max => ObjectiveValue::Optimal(-v),
        other => other,
    }
}

/// An lc-stable model: the atom set, a witness assignment and, in
/// reference mode, the lc-solution S it was generated from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LcModel {
    pub atoms: Interpretation,
    pub witness: Witness,
    pub generator: Option<BTreeSet<AtomId>>,
    pub objective: Option<ObjectiveValue>,
}

impl LcModel {
    /// Printed atom names, sorted.
    pub fn names(&self, g: &GroundProgram) -> Vec<String> {
        let mut names: Vec<String> = self
            .atoms
            .iter()
            .map(|&a| g.atoms.name(a).to_owned())
            .collect();
        names.sort();
        names
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Mode {
    Reference,
    #[default]
    Lazy,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "reference" => Ok(Mode::Reference),
            "lazy" => Ok(Mode::Lazy),
            other => Err(format!(
                "unknown mode `{other}` (expected reference or lazy)"
            )),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub mode: Mode,
    pub theory: TheoryChoice,
    pub policy: StrictPolicy,
    /// If set, the program's lc-atoms must fit this homogeneous setting.
    pub preset: Option<Preset>,
    pub epsilon: Rational,
    /// Lets difference logic over the reals handle strict constraints by
    /// subtracting epsilon.
    pub allow_epsilon: bool,
    pub limit: Option<usize>,
    pub reference_cap: usize,
    pub deadline: Option<Instant>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            mode: Mode::Lazy,
            theory: TheoryChoice::Auto,
            policy: StrictPolicy::Recommended,
            preset: None,
            epsilon: default_epsilon(),
            allow_epsilon: false,
            limit: None,
            reference_cap: REFERENCE_CAP,
            deadline: None,
        }
    }
}

impl SolveOptions {
    pub fn with_preset(preset: Preset) -> Self {
        SolveOptions {
            policy: preset.policy(),
            preset: Some(preset),
            ..Self::default()
        }
    }

    pub fn mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn theory(mut self, theory: TheoryChoice) -> Self {
        self.theory = theory;
        self
    }
}

/// Everything needed to enumerate: the setting, the compiled theory and
/// the checker for the chosen backend.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub setting: SemanticSetting,
    pub table: TheoryTable,
    pub checker: Checker,
}

impl Prepared {
    pub fn new(g: &GroundProgram, options: &SolveOptions) -> Result<Self, LcError> {
        let setting = signature(g, &options.policy)?;
        if let Some(p) = options.preset {
            p.validate(&setting)?;
        }
        Self::with_setting(g, setting, options)
    }

    pub fn with_setting(
        g: &GroundProgram,
        setting: SemanticSetting,
        options: &SolveOptions,
    ) -> Result<Self, LcError> {
        use num_traits::Signed;
        if !options.epsilon.is_positive() {
            return Err(LcError::Setting("epsilon must be positive".into()));
        }
        let table = TheoryTable::new(g)?;
        let backend = table.backend(options.theory)?;
        if backend
            == (Backend::Dl {
                domain: Domain::Real,
            })
            && !options.allow_epsilon
        {
            for (&atom, c) in &table.constraints {
                let strict_relation = matches!(c.relation, Relation::Lt | Relation::Gt);
                if strict_relation || setting.is_strict(atom) {
                    return Err(LcError::Theory(format!(
                        "{} over real variables needs epsilon mode: {}",
                        if strict_relation {
                            "strict relation"
                        } else {
                            "strict lc-atom"
                        },
                        g.atoms.name(atom)
                    )));
                }
            }
        }
        let checker = Checker::new(
            &table,
            backend,
            options.epsilon.clone(),
            options.allow_epsilon,
        );
        Ok(Prepared {
            setting,
            table,
            checker,
        })
    }

    pub fn backend(&self) -> &Backend {
        &self.checker.backend
    }

    pub fn enumerate(
        &self,
        g: &GroundProgram,
        mode: Mode,
        options: &SolveOptions,
    ) -> Result<Vec<LcModel>, LcError> {
        let mut models = match mode {
            Mode::Reference => {
                let mut all = enumerate_reference(
                    g,
                    &self.setting,
                    &self.table,
                    &self.checker,
                    options.reference_cap,
                )?;
                sort_models(g, &mut all);
                if let Some(l) = options.limit {
                    all.truncate(l);
                }
                all
            }
            Mode::Lazy => enumerate_lazy(
                g,
                &self.setting,
                &self.table,
                &self.checker,
                options.limit,
                options.deadline,
            )?,
        };
        sort_models(g, &mut models);
        Ok(models)
    }
}

/// Sorts models by their sorted atom names, lexicographically.
pub fn sort_models(g: &GroundProgram, models: &mut [LcModel]) {
    models.sort_by_cached_key(|m| m.names(g));
}

/// The outcome of a solve call.
#[derive(Clone, Debug)]
pub struct Solution {
    pub models: Vec<LcModel>,
    pub setting: SemanticSetting,
    pub backend: Backend,
    /// Best objective value across the enumerated models (an extension:
    /// optimisation itself is per model).
    pub best: Option<ObjectiveValue>,
}

/// Computes the lc-stable models of `g`.
pub fn solve(g: &GroundProgram, options: &SolveOptions) -> Result<Solution, LcError> {
    let prepared = Prepared::new(g, options)?;
    let models = prepared.enumerate(g, options.mode, options)?;
    let best = best_objective(&prepared.table, &models);
    Ok(Solution {
        models,
        setting: prepared.setting,
        backend: prepared.checker.backend,
        best,
    })
}

fn best_objective(table: &TheoryTable, models: &[LcModel]) -> Option<ObjectiveValue> {
    let maximize = table.declarations.values().all(|d| match d {
        Declaration::Objective { direction, .. } => *direction == Direction::Maximize,
        Declaration::Dom { .. } => true,
    });
    let mut best: Option<ObjectiveValue> = None;
    for o in models.iter().filter_map(|m| m.objective.clone()) {
        best = Some(match (best, o) {
            (Some(ObjectiveValue::Unbounded), _) | (_, ObjectiveValue::Unbounded) => {
                ObjectiveValue::Unbounded
            }
            (None, v) => v,
            (Some(ObjectiveValue::Optimal(a)), ObjectiveValue::Optimal(b)) => {
                ObjectiveValue::Optimal(if (b > a) == maximize { b } else { a })
            }
        });
    }
    best
}

#[cfg(test)]
mod tests;
