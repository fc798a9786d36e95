//! Translation of ground theory atoms into linear and difference
//! constraints.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use crate::dl::{DiffConstraint, Domain, ZERO};
use crate::ground::{AtomId, GroundAtom, GroundProgram};
use crate::lp::{Direction, LinearConstraint};
use crate::rational::Rational;
use crate::syntax::{BinOp, Literal, Relation, Term, TheoryAtom, TheoryKind};

use super::LcError;

/// `sum coeff * var + constant`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Linear {
    pub terms: BTreeMap<String, Rational>,
    pub constant: Rational,
}

impl Linear {
    fn constant(value: Rational) -> Self {
        Linear {
            terms: BTreeMap::new(),
            constant: value,
        }
    }

    fn variable(name: String) -> Self {
        Linear {
            terms: [(name, Rational::one())].into_iter().collect(),
            constant: Rational::zero(),
        }
    }

    fn as_constant(&self) -> Option<&Rational> {
        self.terms.is_empty().then_some(&self.constant)
    }

    fn scale(mut self, factor: &Rational) -> Self {
        self.terms.values_mut().for_each(|c| *c *= factor);
        self.terms.retain(|_, c| !c.is_zero());
        self.constant *= factor;
        self
    }

    fn add(mut self, other: Linear) -> Self {
        for (v, c) in other.terms {
            *self.terms.entry(v).or_insert_with(Rational::zero) += c;
        }
        self.terms.retain(|_, c| !c.is_zero());
        self.constant += other.constant;
        self
    }
}

/// Evaluates a ground theory term to a linear expression. Symbols and
/// function terms are theory variables; numbers are constants.
pub fn linear_term(term: &Term) -> Result<Linear, String> {
    Ok(match term {
        Term::Int(v) => Linear::constant(Rational::from_integer(v.clone())),
        Term::Rat(r) => Linear::constant(r.clone()),
        Term::Sym(_) | Term::Func(..) => Linear::variable(term.to_string()),
        Term::Neg(t) => linear_term(t)?.scale(&-Rational::one()),
        Term::Binary(op, l, r) => {
            let (l, r) = (linear_term(l)?, linear_term(r)?);
            match op {
                BinOp::Add => l.add(r),
                BinOp::Sub => l.add(r.scale(&-Rational::one())),
                BinOp::Mul => match (l.as_constant().cloned(), r.as_constant().cloned()) {
                    (Some(c), _) => r.scale(&c),
                    (_, Some(c)) => l.scale(&c),
                    _ => return Err(format!("non-linear term {term}")),
                },
                BinOp::Div => match r.as_constant() {
                    Some(c) if !c.is_zero() => {
                        let inverse = c.recip();
                        l.scale(&inverse)
                    }
                    Some(_) => return Err(format!("division by zero in {term}")),
                    None => return Err(format!("non-linear term {term}")),
                },
            }
        }
        Term::Str(_) | Term::Var(_) | Term::Interval(..) => {
            return Err(format!("`{term}` is not a number or theory variable"))
        }
    })
}

fn constant_term(term: &Term) -> Result<Rational, String> {
    linear_term(term)?
        .as_constant()
        .cloned()
        .ok_or_else(|| format!("`{term}` is not a constant"))
}

/// One element of a theory atom: a linear term that counts only while
/// its condition holds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Element {
    pub condition: Vec<(AtomId, bool)>,
    pub linear: Linear,
}

/// Outcome of evaluating a condition under a partial assignment.
fn condition_value(
    condition: &[(AtomId, bool)],
    value: &impl Fn(AtomId) -> Option<bool>,
) -> Option<bool> {
    let mut unknown = false;
    for &(atom, negated) in condition {
        match value(atom) {
            Some(v) if v == negated => return Some(false),
            Some(_) => {}
            None => unknown = true,
        }
    }
    (!unknown).then_some(true)
}

fn sum_elements(elements: &[Element], value: &impl Fn(AtomId) -> Option<bool>) -> Option<Linear> {
    let mut total = Linear::default();
    for e in elements {
        if condition_value(&e.condition, value)? {
            total = total.add(e.linear.clone());
        }
    }
    Some(total)
}

/// The constraint of an lc-atom: `sum of elements  relation  rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LcConstraint {
    pub elements: Vec<Element>,
    pub relation: Relation,
    pub rhs: Rational,
    pub diff: bool,
}

impl LcConstraint {
    pub fn is_conditional(&self) -> bool {
        self.elements.iter().any(|e| !e.condition.is_empty())
    }

    /// The atoms mentioned by element conditions.
    pub fn condition_atoms(&self) -> BTreeSet<AtomId> {
        self.elements
            .iter()
            .flat_map(|e| e.condition.iter().map(|c| c.0))
            .collect()
    }

    /// The linear constraint once every condition is decided by `value`;
    /// `None` while some condition is still open.
    pub fn instantiate(&self, value: &impl Fn(AtomId) -> Option<bool>) -> Option<LinearConstraint> {
        let sum = sum_elements(&self.elements, value)?;
        Some(LinearConstraint::new(
            sum.terms.into_iter().map(|(v, c)| (c, v)).collect(),
            self.relation,
            &self.rhs - sum.constant,
        ))
    }

    /// The constraint of a condition-free atom.
    pub fn unconditional(&self) -> LinearConstraint {
        self.instantiate(&|_| Some(true))
            .expect("condition-free atoms instantiate unconditionally")
    }
}

/// Difference-constraint form of a linear constraint, if it has one:
/// `x - y`, `x` or `-y` (against [`ZERO`]) compared by `<=`, `<`, `>=`, `>`.
pub fn as_difference(c: &LinearConstraint) -> Option<DiffConstraint> {
    let one = Rational::one();
    let minus = -Rational::one();
    let (x, y) = match c.terms.as_slice() {
        [] => (ZERO.to_owned(), ZERO.to_owned()),
        [(a, v)] if *a == one => (v.clone(), ZERO.to_owned()),
        [(a, v)] if *a == minus => (ZERO.to_owned(), v.clone()),
        [(a, v), (b, w)] if *a == one && *b == minus => (v.clone(), w.clone()),
        [(a, v), (b, w)] if *a == minus && *b == one => (w.clone(), v.clone()),
        _ => return None,
    };
    let k = c.rhs.clone();
    Some(match c.relation {
        Relation::Le => DiffConstraint::le(&x, &y, k),
        Relation::Lt => DiffConstraint::lt(&x, &y, k),
        Relation::Ge => DiffConstraint::le(&y, &x, -k),
        Relation::Gt => DiffConstraint::lt(&y, &x, -k),
        Relation::Eq | Relation::Ne => return None,
    })
}

/// A declaration that takes effect while its (head) atom is true.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Declaration {
    /// `&dom{lb..ub}=x`.
    Dom {
        variable: String,
        lower: Rational,
        upper: Rational,
    },
    /// `&minimize{..}` / `&maximize{..}`.
    Objective {
        direction: Direction,
        elements: Vec<Element>,
    },
}

impl Declaration {
    /// Bounds as constraints.
    pub fn dom_constraints(
        variable: &str,
        lower: &Rational,
        upper: &Rational,
    ) -> [LinearConstraint; 2] {
        let term = vec![(Rational::one(), variable.to_owned())];
        [
            LinearConstraint::new(term.clone(), Relation::Ge, lower.clone()),
            LinearConstraint::new(term, Relation::Le, upper.clone()),
        ]
    }

    /// Objective terms, as a minimisation, once conditions are decided.
    pub fn minimisation_terms(
        elements: &[Element],
        direction: Direction,
        value: &impl Fn(AtomId) -> Option<bool>,
    ) -> Option<Linear> {
        let sum = sum_elements(elements, value)?;
        Some(match direction {
            Direction::Minimize => sum,
            Direction::Maximize => sum.scale(&-Rational::one()),
        })
    }
}

/// Which arithmetic backend checks lc-solutions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Backend {
    Dl { domain: Domain },
    Lp,
}

impl Backend {
    pub fn name(&self) -> &'static str {
        match self {
            Backend::Dl { .. } => "dl",
            Backend::Lp => "lp",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TheoryChoice {
    /// Difference logic if every lc-atom is a difference constraint and
    /// there are no objectives, linear arithmetic otherwise.
    #[default]
    Auto,
    Dl,
    Lp,
}

impl std::str::FromStr for TheoryChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "auto" => Ok(TheoryChoice::Auto),
            "dl" => Ok(TheoryChoice::Dl),
            "lp" => Ok(TheoryChoice::Lp),
            other => Err(format!(
                "unknown theory `{other}` (expected auto, dl or lp)"
            )),
        }
    }
}

/// All theory information of a ground program.
#[derive(Clone, Debug, Default)]
pub struct TheoryTable {
    pub constraints: BTreeMap<AtomId, LcConstraint>,
    pub declarations: BTreeMap<AtomId, Declaration>,
    /// Theory variables declared real-valued.
    pub reals: BTreeSet<String>,
    /// Every theory variable mentioned.
    pub variables: BTreeSet<String>,
}

impl TheoryTable {
    pub fn new(g: &GroundProgram) -> Result<Self, LcError> {
        let mut table = TheoryTable {
            reals: g.reals.clone(),
            ..Self::default()
        };
        let lc: BTreeSet<AtomId> = g.lc_atoms().into_iter().collect();
        let used = used_atoms(g);
        for (id, atom) in g.atoms.iter() {
            let GroundAtom::Theory(t) = atom else {
                continue;
            };
            if !used.contains(&id) {
                continue;
            }
            if t.kind.is_constraint() {
                debug_assert!(lc.contains(&id));
                let c =
                    compile_constraint(g, t).map_err(|e| LcError::Theory(format!("{t}: {e}")))?;
                for e in &c.elements {
                    table.variables.extend(e.linear.terms.keys().cloned());
                }
                table.constraints.insert(id, c);
            } else {
                let d =
                    compile_declaration(g, t).map_err(|e| LcError::Theory(format!("{t}: {e}")))?;
                match &d {
                    Declaration::Dom { variable, .. } => {
                        table.variables.insert(variable.clone());
                    }
                    Declaration::Objective { elements, .. } => {
                        for e in elements {
                            table.variables.extend(e.linear.terms.keys().cloned());
                        }
                    }
                }
                table.declarations.insert(id, d);
            }
        }
        Ok(table)
    }

    pub fn has_objective(&self) -> bool {
        self.declarations
            .values()
            .any(|d| matches!(d, Declaration::Objective { .. }))
    }

    pub fn has_conditions(&self) -> bool {
        self.constraints.values().any(LcConstraint::is_conditional)
    }

    /// Integer-valued theory variables (those not declared real).
    pub fn integers(&self) -> BTreeSet<String> {
        self.variables.difference(&self.reals).cloned().collect()
    }

    /// Picks the backend for `choice`, validating that it can handle the
    /// program.
    pub fn backend(&self, choice: TheoryChoice) -> Result<Backend, LcError> {
        let dl_capable = self
            .constraints
            .values()
            .all(|c| c.diff && !c.is_conditional())
            && !self.has_objective();
        let use_dl = match choice {
            TheoryChoice::Auto => dl_capable,
            TheoryChoice::Lp => false,
            TheoryChoice::Dl => {
                if let Some((_, c)) = self
                    .constraints
                    .iter()
                    .find(|(_, c)| !c.diff || c.is_conditional())
                {
                    let reason = if c.is_conditional() {
                        "has conditional elements"
                    } else {
                        "is not a difference constraint"
                    };
                    return Err(LcError::Theory(format!(
                        "difference logic requested, but an lc-atom {reason}: {}",
                        c.unconditional_text()
                    )));
                }
                if self.has_objective() {
                    return Err(LcError::Theory(
                        "difference logic does not support &minimize/&maximize".into(),
                    ));
                }
                true
            }
        };
        if !use_dl {
            return Ok(Backend::Lp);
        }
        let real = self
            .variables
            .iter()
            .filter(|v| self.reals.contains(*v))
            .count();
        let domain = if real == 0 {
            Domain::Integer
        } else if real == self.variables.len() {
            Domain::Real
        } else {
            return Err(LcError::Theory(
                "difference logic needs all variables integer or all declared #real".into(),
            ));
        };
        Ok(Backend::Dl { domain })
    }
}

impl LcConstraint {
    fn unconditional_text(&self) -> String {
        self.instantiate(&|_| Some(true))
            .map(|c| c.to_string())
            .unwrap_or_default()
    }
}

/// Atoms occurring in some rule.
fn used_atoms(g: &GroundProgram) -> BTreeSet<AtomId> {
    use crate::ground::GroundLiteral;
    let mut used = BTreeSet::new();
    for rule in &g.rules {
        used.extend(rule.head_atoms().iter().copied());
        for lit in &rule.body {
            match lit {
                GroundLiteral::Atom { atom, .. } => {
                    used.insert(*atom);
                }
                GroundLiteral::Count { elements, .. } => used.extend(elements.iter().map(|e| e.0)),
            }
        }
    }
    used
}

fn compile_elements(g: &GroundProgram, t: &TheoryAtom) -> Result<Vec<Element>, String> {
    t.elements
        .iter()
        .map(|e| {
            let condition = e
                .condition
                .iter()
                .map(|lit| match lit {
                    Literal::Atom { negated, atom } => g
                        .atoms
                        .lookup(&atom.to_string())
                        .map(|id| (id, *negated))
                        .ok_or_else(|| format!("unknown condition atom {atom}")),
                    other => Err(format!("unsupported condition {other:?}")),
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Element {
                condition,
                linear: linear_term(&e.term)?,
            })
        })
        .collect()
}

fn compile_constraint(g: &GroundProgram, t: &TheoryAtom) -> Result<LcConstraint, String> {
    let (relation, rhs) = t.guard.as_ref().ok_or("missing guard")?;
    let mut c = LcConstraint {
        elements: compile_elements(g, t)?,
        relation: *relation,
        rhs: constant_term(rhs)?,
        diff: false,
    };
    c.diff = !c.is_conditional() && as_difference(&c.unconditional()).is_some();
    if t.kind == TheoryKind::Diff && !c.diff {
        return Err("not a difference constraint".into());
    }
    Ok(c)
}

fn compile_declaration(g: &GroundProgram, t: &TheoryAtom) -> Result<Declaration, String> {
    match t.kind {
        TheoryKind::Dom => {
            let Some((Relation::Eq, var)) = &t.guard else {
                return Err("expected `=x`".into());
            };
            let [element] = t.elements.as_slice() else {
                return Err("expected one interval".into());
            };
            let Term::Interval(lb, ub) = &element.term else {
                return Err("expected an interval".into());
            };
            let variable = match linear_term(var)? {
                l if l.constant.is_zero()
                    && l.terms.len() == 1
                    && l.terms.values().all(|c| c.is_one()) =>
                {
                    l.terms.into_keys().next().expect("one term")
                }
                _ => return Err(format!("`{var}` is not a theory variable")),
            };
            let (lower, upper) = (constant_term(lb)?, constant_term(ub)?);
            if lower > upper {
                return Err("empty domain".into());
            }
            Ok(Declaration::Dom {
                variable,
                lower,
                upper,
            })
        }
        TheoryKind::Minimize | TheoryKind::Maximize => Ok(Declaration::Objective {
            direction: if t.kind == TheoryKind::Minimize {
                Direction::Minimize
            } else {
                Direction::Maximize
            },
            elements: compile_elements(g, t)?,
        }),
        TheoryKind::Sum | TheoryKind::Diff => unreachable!("constraints are compiled separately"),
    }
}
