//! Exact linear arithmetic: normalization, satisfiability with witnesses,
//! optimization, branch-and-bound for integer variables and irreducible
//! inconsistent subsets.

mod simplex;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::{ceil, floor, to_fraction, Rational};
use crate::syntax::Relation;

pub use crate::dl::default_epsilon;
use simplex::{Row, RowKind, SimplexResult};

/// Branch-and-bound node limit.
pub const NODE_CAP: usize = 10_000;
/// Maximum number of simultaneous `!=` case splits.
pub const SPLIT_CAP: usize = 16;

pub type Assignment = BTreeMap<String, Rational>;

/// `sum coeff * var  relation  rhs`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinearConstraint {
    pub terms: Vec<(Rational, String)>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl LinearConstraint {
    /// Builds a constraint, merging repeated variables and dropping zero
    /// coefficients. Terms are kept in first-occurrence order.
    pub fn new(terms: Vec<(Rational, String)>, relation: Relation, rhs: Rational) -> Self {
        let mut merged: Vec<(Rational, String)> = Vec::new();
        for (c, v) in terms {
            match merged.iter_mut().find(|(_, w)| *w == v) {
                Some((acc, _)) => *acc += c,
                None => merged.push((c, v)),
            }
        }
        merged.retain(|(c, _)| !c.is_zero());
        LinearConstraint {
            terms: merged,
            relation,
            rhs,
        }
    }

    pub fn lhs(&self, assignment: &Assignment) -> Rational {
        self.terms
            .iter()
            .map(|(c, v)| c * assignment.get(v).cloned().unwrap_or_else(Rational::zero))
            .sum()
    }

    /// Exact evaluation; unmentioned variables count as zero.
    pub fn holds(&self, assignment: &Assignment) -> bool {
        self.relation.holds(self.lhs(assignment).cmp(&self.rhs))
    }

    /// The constraint with the complementary relation.
    pub fn complement(&self) -> Self {
        LinearConstraint {
            terms: self.terms.clone(),
            relation: self.relation.complement(),
            rhs: self.rhs.clone(),
        }
    }

    pub fn variables(&self) -> impl Iterator<Item = &String> {
        self.terms.iter().map(|(_, v)| v)
    }
}

impl fmt::Display for LinearConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            f.write_str("0")?;
        }
        for (i, (c, v)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(if c.is_negative() { " - " } else { " + " })?;
            } else if c.is_negative() {
                f.write_str("-")?;
            }
            let a = c.abs();
            if a.is_one() {
                write!(f, "{v}")?;
            } else {
                write!(f, "{}*{v}", to_fraction(&a))?;
            }
        }
        write!(f, " {} {}", self.relation.symbol(), to_fraction(&self.rhs))
    }
}

/// Disjunction-free form of a constraint: a list of alternatives, each a
/// conjunction of `<=` / `>=` constraints. Only `!=` yields two
/// alternatives (`< rhs` or `> rhs`, each tightened by `epsilon`).
pub fn normalize(c: &LinearConstraint, epsilon: &Rational) -> Vec<Vec<LinearConstraint>> {
    let with = |relation: Relation, rhs: Rational| LinearConstraint {
        terms: c.terms.clone(),
        relation,
        rhs,
    };
    match c.relation {
        Relation::Le | Relation::Ge => vec![vec![c.clone()]],
        Relation::Lt => vec![vec![with(Relation::Le, &c.rhs - epsilon)]],
        Relation::Gt => vec![vec![with(Relation::Ge, &c.rhs + epsilon)]],
        Relation::Eq => vec![vec![
            with(Relation::Le, c.rhs.clone()),
            with(Relation::Ge, c.rhs.clone()),
        ]],
        Relation::Ne => vec![
            vec![with(Relation::Le, &c.rhs - epsilon)],
            vec![with(Relation::Ge, &c.rhs + epsilon)],
        ],
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Minimize,
    Maximize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Objective {
    pub direction: Direction,
    pub terms: Vec<(Rational, String)>,
}

#[derive(Clone, Debug)]
pub struct LpProblem {
    pub constraints: Vec<LinearConstraint>,
    pub integers: BTreeSet<String>,
    /// Inclusive box bounds per variable.
    pub bounds: BTreeMap<String, (Option<Rational>, Option<Rational>)>,
    pub objective: Option<Objective>,
    pub epsilon: Rational,
}

impl Default for LpProblem {
    fn default() -> Self {
        LpProblem {
            constraints: Vec::new(),
            integers: BTreeSet::new(),
            bounds: BTreeMap::new(),
            objective: None,
            epsilon: default_epsilon(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("branch-and-bound exceeded {NODE_CAP} nodes")]
    NodeCap,
    #[error("more than {SPLIT_CAP} simultaneous `!=` case splits")]
    SplitCap,
    #[error("`!=` constraint must be split before solving: {0}")]
    Unsplit(String),
    #[error("optimization requested without an objective")]
    NoObjective,
    #[error("irreducible subset requested for a satisfiable system")]
    Satisfiable,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatResult {
    Sat(Assignment),
    Unsat,
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Sat(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OptResult {
    Optimal {
        value: Rational,
        witness: Assignment,
    },
    Unbounded,
    Infeasible,
}

impl LpProblem {
    pub fn new(constraints: Vec<LinearConstraint>) -> Self {
        LpProblem {
            constraints,
            ..Self::default()
        }
    }

    fn variables(&self) -> Vec<String> {
        let mut vars: BTreeSet<String> = BTreeSet::new();
        for c in &self.constraints {
            vars.extend(c.variables().cloned());
        }
        vars.extend(self.bounds.keys().cloned());
        vars.extend(self.integers.iter().cloned());
        if let Some(o) = &self.objective {
            vars.extend(o.terms.iter().map(|(_, v)| v.clone()));
        }
        vars.into_iter().collect()
    }

    /// Rows of the relaxation plus extra branching bounds.
    fn rows(
        &self,
        vars: &[String],
        extra: &[(usize, RowKind, Rational)],
    ) -> Result<Vec<Row>, LpError> {
        let n = vars.len();
        let position = |v: &String| vars.binary_search(v).expect("collected variable");
        let mut rows = Vec::new();
        for c in &self.constraints {
            if c.relation == Relation::Ne {
                return Err(LpError::Unsplit(c.to_string()));
            }
            let tightened = if c.variables().all(|v| self.integers.contains(v)) {
                tighten_integer(c)
            } else {
                normalize(c, &self.epsilon).remove(0)
            };
            for nc in tightened {
                let mut coeffs = vec![Rational::zero(); n];
                for (a, v) in &nc.terms {
                    coeffs[position(v)] += a;
                }
                rows.push(Row {
                    coeffs,
                    kind: if nc.relation == Relation::Le {
                        RowKind::Le
                    } else {
                        RowKind::Ge
                    },
                    rhs: nc.rhs,
                });
            }
        }
        let unit = |j: usize| {
            let mut coeffs = vec![Rational::zero(); n];
            coeffs[j] = Rational::one();
            coeffs
        };
        for (v, (lb, ub)) in &self.bounds {
            let j = position(v);
            if let Some(lb) = lb {
                rows.push(Row {
                    coeffs: unit(j),
                    kind: RowKind::Ge,
                    rhs: lb.clone(),
                });
            }
            if let Some(ub) = ub {
                rows.push(Row {
                    coeffs: unit(j),
                    kind: RowKind::Le,
                    rhs: ub.clone(),
                });
            }
        }
        for (j, kind, rhs) in extra {
            rows.push(Row {
                coeffs: unit(*j),
                kind: *kind,
                rhs: rhs.clone(),
            });
        }
        Ok(rows)
    }

    /// Branch-and-bound driver shared by satisfiability and optimization.
    /// `cost` is minimised; `first_only` stops at the first integral point.
    fn branch_and_bound(
        &self,
        vars: &[String],
        cost: &[Rational],
        first_only: bool,
    ) -> Result<Option<(Rational, Vec<Rational>, bool)>, LpError> {
        let integer: Vec<usize> = vars
            .iter()
            .enumerate()
            .filter(|(_, v)| self.integers.contains(*v))
            .map(|(i, _)| i)
            .collect();
        let mut stack: Vec<Vec<(usize, RowKind, Rational)>> = vec![Vec::new()];
        let mut best: Option<(Rational, Vec<Rational>, bool)> = None;
        let mut nodes = 0;
        while let Some(extra) = stack.pop() {
            nodes += 1;
            if nodes > NODE_CAP {
                return Err(LpError::NodeCap);
            }
            let rows = self.rows(vars, &extra)?;
            let (value, point, bounded) = match simplex::solve(vars.len(), &rows, cost) {
                SimplexResult::Infeasible => continue,
                SimplexResult::Optimal { value, point } => (value, point, true),
                SimplexResult::Unbounded { point } => (Rational::zero(), point, false),
            };
            if bounded {
                if let Some((b, _, _)) = &best {
                    if !first_only && value >= *b {
                        continue;
                    }
                }
            }
            match integer.iter().find(|&&j| !point[j].is_integer()) {
                None => {
                    if !bounded || first_only {
                        return Ok(Some((value, point, bounded)));
                    }
                    best = Some((value, point, true));
                }
                Some(&j) => {
                    if !bounded && !first_only {
                        // An unbounded relaxation: report unboundedness.
                        return Ok(Some((value, point, false)));
                    }
                    let mut down = extra.clone();
                    down.push((j, RowKind::Le, floor(&point[j])));
                    let mut up = extra;
                    up.push((j, RowKind::Ge, ceil(&point[j])));
                    stack.push(up);
                    stack.push(down);
                }
            }
        }
        Ok(best)
    }

    /// Satisfiability with an exact witness. Integer variables are handled
    /// by branch-and-bound on the relaxation.
    pub fn check_sat(&self) -> Result<SatResult, LpError> {
        let vars = self.variables();
        let cost = vec![Rational::zero(); vars.len()];
        Ok(match self.branch_and_bound(&vars, &cost, true)? {
            Some((_, point, _)) => SatResult::Sat(vars.into_iter().zip(point).collect()),
            None => SatResult::Unsat,
        })
    }

    pub fn optimize(&self) -> Result<OptResult, LpError> {
        let objective = self.objective.as_ref().ok_or(LpError::NoObjective)?;
        let vars = self.variables();
        let sign = match objective.direction {
            Direction::Minimize => Rational::one(),
            Direction::Maximize => -Rational::one(),
        };
        let mut cost = vec![Rational::zero(); vars.len()];
        for (c, v) in &objective.terms {
            let j = vars.binary_search(v).expect("objective variable");
            cost[j] += c * &sign;
        }
        Ok(match self.branch_and_bound(&vars, &cost, false)? {
            None => OptResult::Infeasible,
            Some((_, _, false)) => OptResult::Unbounded,
            Some((value, point, true)) => OptResult::Optimal {
                value: value * sign,
                witness: vars.into_iter().zip(point).collect(),
            },
        })
    }
}

/// Exact `<=`/`>=` form of a constraint over integer variables only:
/// coefficients are scaled to coprime integers and the bound rounded, so
/// strict relations need no epsilon.
fn tighten_integer(c: &LinearConstraint) -> Vec<LinearConstraint> {
    use num_integer::Integer;
    let lcm = c
        .terms
        .iter()
        .fold(num_bigint::BigInt::one(), |acc, (a, _)| acc.lcm(a.denom()));
    let scaled: Vec<(num_bigint::BigInt, String)> = c
        .terms
        .iter()
        .map(|(a, v)| {
            (
                (a * Rational::from_integer(lcm.clone())).to_integer(),
                v.clone(),
            )
        })
        .collect();
    let gcd = scaled
        .iter()
        .fold(num_bigint::BigInt::zero(), |acc, (a, _)| acc.gcd(a));
    let with = |relation: Relation, rhs: Rational| LinearConstraint {
        terms: scaled
            .iter()
            .map(|(a, v)| (Rational::from_integer(a / &gcd), v.clone()))
            .collect(),
        relation,
        rhs,
    };
    if gcd.is_zero() {
        // No variables: a constant comparison.
        let holds = c.relation.holds(Rational::zero().cmp(&c.rhs));
        let rhs = if holds {
            Rational::zero()
        } else {
            -Rational::one()
        };
        return vec![LinearConstraint {
            terms: Vec::new(),
            relation: Relation::Le,
            rhs,
        }];
    }
    let r = &c.rhs * Rational::from_integer(lcm) / Rational::from_integer(gcd.clone());
    let one = Rational::one();
    match c.relation {
        Relation::Le => vec![with(Relation::Le, floor(&r))],
        Relation::Lt => vec![with(Relation::Le, ceil(&r) - one)],
        Relation::Ge => vec![with(Relation::Ge, ceil(&r))],
        Relation::Gt => vec![with(Relation::Ge, floor(&r) + one)],
        Relation::Eq => vec![with(Relation::Le, floor(&r)), with(Relation::Ge, ceil(&r))],
        Relation::Ne => unreachable!("split before tightening"),
    }
}

/// The two cases of a `!=` constraint: `<` or `>`.
pub fn split_disequality(c: &LinearConstraint) -> [LinearConstraint; 2] {
    let with = |relation| LinearConstraint {
        terms: c.terms.clone(),
        relation,
        rhs: c.rhs.clone(),
    };
    [with(Relation::Lt), with(Relation::Gt)]
}

/// Tries every combination of `!=` case splits on top of `base`.
pub fn check_with_splits(
    base: &LpProblem,
    splits: &[LinearConstraint],
) -> Result<SatResult, LpError> {
    if splits.len() > SPLIT_CAP {
        return Err(LpError::SplitCap);
    }
    let alternatives: Vec<[LinearConstraint; 2]> = splits.iter().map(split_disequality).collect();
    for mask in 0u32..(1u32 << splits.len()) {
        let mut problem = base.clone();
        for (i, alts) in alternatives.iter().enumerate() {
            problem
                .constraints
                .push(alts[(mask >> i & 1) as usize].clone());
        }
        if let SatResult::Sat(w) = problem.check_sat()? {
            return Ok(SatResult::Sat(w));
        }
    }
    Ok(SatResult::Unsat)
}

/// Deletion filter over groups of constraints: returns the indices of a
/// minimal subset of groups that, together with `base`, is unsatisfiable.
pub fn iis_groups(
    base: &LpProblem,
    groups: &[Vec<LinearConstraint>],
) -> Result<Vec<usize>, LpError> {
    let check = |members: &[usize]| -> Result<bool, LpError> {
        let mut problem = base.clone();
        let mut splits = Vec::new();
        for &g in members {
            for c in &groups[g] {
                if c.relation == Relation::Ne {
                    splits.push(c.clone());
                } else {
                    problem.constraints.push(c.clone());
                }
            }
        }
        Ok(check_with_splits(&problem, &splits)?.is_sat())
    };
    let mut members: Vec<usize> = (0..groups.len()).collect();
    if check(&members)? {
        return Err(LpError::Satisfiable);
    }
    let mut i = 0;
    while i < members.len() {
        let mut without = members.clone();
        without.remove(i);
        if check(&without)? {
            i += 1;
        } else {
            members = without;
        }
    }
    Ok(members)
}

/// A minimal unsatisfiable subset of `constraints` (deletion filter), under
/// the domains and epsilon of `context`.
pub fn iis(
    constraints: &[LinearConstraint],
    context: &LpProblem,
) -> Result<Vec<LinearConstraint>, LpError> {
    let mut base = context.clone();
    base.constraints.clear();
    let groups: Vec<Vec<LinearConstraint>> = constraints.iter().map(|c| vec![c.clone()]).collect();
    Ok(iis_groups(&base, &groups)?
        .into_iter()
        .map(|i| constraints[i].clone())
        .collect())
}

#[cfg(test)]
mod tests;
