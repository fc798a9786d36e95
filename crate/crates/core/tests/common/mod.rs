//! Independent oracles shared by the integration tests: Bellman–Ford for
//! difference constraints, Fourier–Motzkin for linear systems and
//! brute-force enumeration of stable and lc-stable models.
#![allow(dead_code)]

pub mod fuzz;

use std::collections::{BTreeMap, BTreeSet};

use lcasp::dl::{DiffConstraint, Domain, ZERO};
use lcasp::ground::{AtomId, GroundHead, GroundLiteral, GroundProgram, GroundRule};
use lcasp::lcsem::{SemanticSetting, TheoryTable};
use lcasp::lp::{normalize, LinearConstraint};
use lcasp::rational::{ceil, floor, int, Rational};
use lcasp::syntax::Relation;

/// Feasibility of `x - y <= k` / `x - y < k` constraints: no negative
/// cycle in the constraint graph. Over the integers bounds round down
/// (strict ones to the next smaller integer); over the reals strict
/// bounds are tightened by `epsilon`.
pub fn bellman_ford(constraints: &[DiffConstraint], domain: Domain, epsilon: &Rational) -> bool {
    let mut nodes: Vec<&str> = vec![ZERO];
    for c in constraints {
        for v in [c.x.as_str(), c.y.as_str()] {
            if !nodes.contains(&v) {
                nodes.push(v);
            }
        }
    }
    let index = |v: &str| nodes.iter().position(|n| *n == v).expect("known node");
    let edges: Vec<(usize, usize, Rational)> = constraints
        .iter()
        .map(|c| {
            let w = match (domain, c.strict) {
                (Domain::Integer, false) => floor(&c.k),
                (Domain::Integer, true) => ceil(&c.k) - int(1),
                (Domain::Real, false) => c.k.clone(),
                (Domain::Real, true) => &c.k - epsilon,
            };
            (index(&c.y), index(&c.x), w)
        })
        .collect();
    // Virtual source: every distance starts at 0.
    let mut dist = vec![int(0); nodes.len()];
    for _ in 0..nodes.len() {
        let mut changed = false;
        for (u, v, w) in &edges {
            let candidate = &dist[*u] + w;
            if candidate < dist[*v] {
                dist[*v] = candidate;
                changed = true;
            }
        }
        if !changed {
            return true;
        }
    }
    false
}

/// `sum <= rhs`, or `sum < rhs` when strict.
#[derive(Clone, Debug)]
struct Row {
    coeffs: BTreeMap<String, Rational>,
    rhs: Rational,
    strict: bool,
}

fn rows_of(c: &LinearConstraint) -> Vec<Row> {
    let coeffs: BTreeMap<String, Rational> = c
        .terms
        .iter()
        .map(|(k, v)| (v.clone(), k.clone()))
        .collect();
    let negated = || -> BTreeMap<String, Rational> {
        coeffs
            .iter()
            .map(|(v, k)| (v.clone(), -k.clone()))
            .collect()
    };
    let row = |coeffs, rhs, strict| Row {
        coeffs,
        rhs,
        strict,
    };
    match c.relation {
        Relation::Le => vec![row(coeffs.clone(), c.rhs.clone(), false)],
        Relation::Lt => vec![row(coeffs.clone(), c.rhs.clone(), true)],
        Relation::Ge => vec![row(negated(), -c.rhs.clone(), false)],
        Relation::Gt => vec![row(negated(), -c.rhs.clone(), true)],
        Relation::Eq => vec![
            row(coeffs.clone(), c.rhs.clone(), false),
            row(negated(), -c.rhs.clone(), false),
        ],
        Relation::Ne => panic!("split disequalities before elimination"),
    }
}

/// Exact real feasibility of a conjunction without `!=`, strict
/// inequalities included, by Fourier–Motzkin elimination.
pub fn fourier_motzkin(constraints: &[LinearConstraint]) -> bool {
    let mut rows: Vec<Row> = constraints.iter().flat_map(rows_of).collect();
    while let Some(var) = rows.iter().flat_map(|r| r.coeffs.keys()).next().cloned() {
        let (mut upper, mut lower, mut rest) = (Vec::new(), Vec::new(), Vec::new());
        for mut r in rows {
            match r.coeffs.remove(&var) {
                None => rest.push(r),
                Some(k) if k > int(0) => upper.push((k, r)),
                Some(k) => lower.push((-k, r)),
            }
        }
        for (ku, u) in &upper {
            for (kl, l) in &lower {
                // u/ku + l/kl eliminates var.
                let mut coeffs: BTreeMap<String, Rational> = BTreeMap::new();
                for (v, c) in &u.coeffs {
                    *coeffs.entry(v.clone()).or_insert_with(|| int(0)) += c / ku;
                }
                for (v, c) in &l.coeffs {
                    *coeffs.entry(v.clone()).or_insert_with(|| int(0)) += c / kl;
                }
                coeffs.retain(|_, c| *c != int(0));
                rest.push(Row {
                    coeffs,
                    rhs: &u.rhs / ku + &l.rhs / kl,
                    strict: u.strict || l.strict,
                });
            }
        }
        rows = rest;
        if rows.iter().any(|r| r.coeffs.is_empty() && violated(r)) {
            return false;
        }
        rows.retain(|r| !r.coeffs.is_empty());
    }
    !rows.iter().any(violated)
}

fn violated(r: &Row) -> bool {
    if r.strict {
        r.rhs <= int(0)
    } else {
        r.rhs < int(0)
    }
}

/// Real feasibility with `!=` treated as a disjunction of `<` and `>`.
pub fn fourier_motzkin_with_splits(constraints: &[LinearConstraint]) -> bool {
    let (ne, rest): (Vec<&LinearConstraint>, Vec<&LinearConstraint>) =
        constraints.iter().partition(|c| c.relation == Relation::Ne);
    let rest: Vec<LinearConstraint> = rest.into_iter().cloned().collect();
    (0u32..1 << ne.len()).any(|mask| {
        let mut system = rest.clone();
        for (i, c) in ne.iter().enumerate() {
            let relation = if mask >> i & 1 == 0 {
                Relation::Lt
            } else {
                Relation::Gt
            };
            system.push(LinearConstraint::new(
                c.terms.clone(),
                relation,
                c.rhs.clone(),
            ));
        }
        fourier_motzkin(&system)
    })
}

/// Feasibility under epsilon semantics: strict bounds (including both
/// sides of `!=`) are first tightened by `epsilon`, then eliminated exactly.
pub fn fourier_motzkin_epsilon(constraints: &[LinearConstraint], epsilon: &Rational) -> bool {
    let alternatives: Vec<Vec<Vec<LinearConstraint>>> =
        constraints.iter().map(|c| normalize(c, epsilon)).collect();
    let mut choice = vec![0usize; alternatives.len()];
    loop {
        let system: Vec<LinearConstraint> = alternatives
            .iter()
            .zip(&choice)
            .flat_map(|(alts, &i)| alts[i].iter().cloned())
            .collect();
        if fourier_motzkin(&system) {
            return true;
        }
        let mut i = 0;
        loop {
            if i == choice.len() {
                return false;
            }
            choice[i] += 1;
            if choice[i] < alternatives[i].len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

fn body_holds(body: &[GroundLiteral], x: &BTreeSet<AtomId>) -> bool {
    body.iter().all(|l| match l {
        GroundLiteral::Atom { atom, negated } => x.contains(atom) != *negated,
        GroundLiteral::Count { .. } => panic!("oracle does not support aggregates"),
    })
}

/// X is a stable model: X is the least model of the reduct of the rules
/// whose negative bodies X satisfies (choice rules only for their members
/// in X), and X satisfies every rule.
pub fn is_stable(rules: &[GroundRule], x: &BTreeSet<AtomId>) -> bool {
    for r in rules {
        if body_holds(&r.body, x) {
            match &r.head {
                GroundHead::Atom(a) if !x.contains(a) => return false,
                GroundHead::None => return false,
                GroundHead::Choice {
                    lower,
                    upper,
                    elements,
                } => {
                    let n = elements.iter().filter(|a| x.contains(a)).count() as u64;
                    if lower.is_some_and(|l| n < l) || upper.is_some_and(|u| n > u) {
                        return false;
                    }
                }
                _ => {}
            }
        }
    }
    let mut least: BTreeSet<AtomId> = BTreeSet::new();
    loop {
        let mut changed = false;
        for r in rules {
            let negative_ok = r.body.iter().all(|l| match l {
                GroundLiteral::Atom {
                    atom,
                    negated: true,
                } => !x.contains(atom),
                _ => true,
            });
            let positive_ok = r.body.iter().all(|l| match l {
                GroundLiteral::Atom {
                    atom,
                    negated: false,
                } => least.contains(atom),
                _ => true,
            });
            if !(negative_ok && positive_ok) {
                continue;
            }
            let heads: Vec<AtomId> = match &r.head {
                GroundHead::Atom(a) => vec![*a],
                GroundHead::Choice { elements, .. } => {
                    elements.iter().copied().filter(|a| x.contains(a)).collect()
                }
                GroundHead::None => vec![],
            };
            for a in heads {
                changed |= least.insert(a);
            }
        }
        if !changed {
            break;
        }
    }
    least == *x
}

/// All stable models of `rules` over the atoms `universe`, by trying every
/// subset.
pub fn brute_force_stable(rules: &[GroundRule], universe: &[AtomId]) -> BTreeSet<BTreeSet<AtomId>> {
    assert!(universe.len() <= 20, "too many atoms for brute force");
    let mut out = BTreeSet::new();
    for mask in 0u32..(1u32 << universe.len()) {
        let x: BTreeSet<AtomId> = universe
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &a)| a)
            .collect();
        if is_stable(rules, &x) {
            out.insert(x);
        }
    }
    out
}

/// The atoms occurring in `g`'s rules.
pub fn universe(g: &GroundProgram) -> Vec<AtomId> {
    let mut atoms: BTreeSet<AtomId> = BTreeSet::new();
    for r in &g.rules {
        atoms.extend(r.head_atoms().iter().copied());
        for l in &r.body {
            if let GroundLiteral::Atom { atom, .. } = l {
                atoms.insert(*atom);
            }
        }
    }
    atoms.into_iter().collect()
}

fn complement(c: &LinearConstraint) -> LinearConstraint {
    let relation = match c.relation {
        Relation::Le => Relation::Gt,
        Relation::Lt => Relation::Ge,
        Relation::Ge => Relation::Lt,
        Relation::Gt => Relation::Le,
        Relation::Eq => Relation::Ne,
        Relation::Ne => Relation::Eq,
    };
    LinearConstraint::new(c.terms.clone(), relation, c.rhs.clone())
}

/// lc-stable models from the definition: the union of SM(P^S) over every
/// S ⊆ L whose constraints (with complements of the strict atoms outside S)
/// are jointly satisfiable. P^S fixes strict external atoms of S as facts,
/// demands strict defined atoms of S, lets non-strict external atoms of S
/// be chosen freely, and forbids defined atoms outside S. Satisfiability
/// follows epsilon semantics over the reals.
pub fn brute_force_lc(
    g: &GroundProgram,
    setting: &SemanticSetting,
    epsilon: &Rational,
) -> BTreeSet<BTreeSet<AtomId>> {
    let table = TheoryTable::new(g).expect("theory atoms");
    let lc: Vec<AtomId> = setting.lc_atoms().collect();
    let atoms = universe(g);
    let mut out = BTreeSet::new();
    for mask in 0u32..(1u32 << lc.len()) {
        let in_s = |i: usize| mask >> i & 1 == 1;
        let mut system = Vec::new();
        for (i, &a) in lc.iter().enumerate() {
            let c = table.constraints[&a].unconditional();
            if in_s(i) {
                system.push(c);
            } else if setting.is_strict(a) {
                system.push(complement(&c));
            }
        }
        if !fourier_motzkin_epsilon(&system, epsilon) {
            continue;
        }
        let mut rules = g.rules.clone();
        for (i, &a) in lc.iter().enumerate() {
            let (strict, defined) = (setting.is_strict(a), setting.is_defined(a));
            match (in_s(i), strict, defined) {
                (true, true, false) => rules.push(GroundRule::fact(a)),
                (true, true, true) => {
                    rules.push(GroundRule::constraint(vec![GroundLiteral::neg(a)]))
                }
                (true, false, false) => rules.push(GroundRule::choice(a)),
                (false, _, true) => rules.push(GroundRule::constraint(vec![GroundLiteral::pos(a)])),
                _ => {}
            }
        }
        out.extend(brute_force_stable(&rules, &atoms));
    }
    out
}

/// A shop instance: per job, its operations as (machine, duration) in
/// order, plus the decision bound.
pub struct Shop {
    pub jobs: Vec<Vec<(i64, i64)>>,
    pub bound: i64,
}

/// Reads `task(J,K,M,P).` and `bound(B).` facts.
pub fn parse_shop(text: &str) -> Shop {
    use lcasp::syntax::{Head, Term};
    let program = lcasp::syntax::parse_program(text).expect("instance parses");
    let mut tasks: BTreeMap<(i64, i64), (i64, i64)> = BTreeMap::new();
    let mut bound = None;
    for rule in program.rules() {
        let Head::Atom(atom) = &rule.head else {
            continue;
        };
        let args: Vec<i64> = atom
            .args
            .iter()
            .map(|t| match t {
                Term::Int(i) => i.to_string().parse::<i64>().expect("small integer"),
                other => panic!("unexpected argument {other}"),
            })
            .collect();
        match (atom.predicate.as_str(), args.as_slice()) {
            ("task", [j, k, m, p]) => {
                tasks.insert((*j, *k), (*m, *p));
            }
            ("bound", [b]) => bound = Some(*b),
            _ => {}
        }
    }
    let mut jobs: BTreeMap<i64, Vec<(i64, i64)>> = BTreeMap::new();
    for ((j, _), op) in tasks {
        jobs.entry(j).or_default().push(op);
    }
    Shop {
        jobs: jobs.into_values().collect(),
        bound: bound.expect("bound fact"),
    }
}

fn permutations(items: &[(usize, usize)]) -> Vec<Vec<(usize, usize)>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let first = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, first);
            out.push(tail);
        }
    }
    out
}

/// Optimal makespan over every processing order on every machine
/// (semi-active schedules), or `None` if no order is acyclic.
pub fn shop_optimum(jobs: &[Vec<(i64, i64)>]) -> Option<i64> {
    let machines: BTreeSet<i64> = jobs.iter().flatten().map(|&(m, _)| m).collect();
    let orders: Vec<Vec<Vec<(usize, usize)>>> = machines
        .iter()
        .map(|&m| {
            let ops: Vec<(usize, usize)> = jobs
                .iter()
                .enumerate()
                .flat_map(|(j, ops)| {
                    ops.iter()
                        .enumerate()
                        .filter(move |(_, op)| op.0 == m)
                        .map(move |(k, _)| (j, k))
                })
                .collect();
            permutations(&ops)
        })
        .collect();
    let mut best: Option<i64> = None;
    let mut choice = vec![0usize; orders.len()];
    loop {
        let mut succ: BTreeMap<(usize, usize), Vec<(usize, usize)>> = BTreeMap::new();
        for (j, ops) in jobs.iter().enumerate() {
            for k in 1..ops.len() {
                succ.entry((j, k - 1)).or_default().push((j, k));
            }
        }
        for (m, &c) in choice.iter().enumerate() {
            for pair in orders[m][c].windows(2) {
                succ.entry(pair[0]).or_default().push(pair[1]);
            }
        }
        if let Some(span) = longest_path(jobs, &succ) {
            best = Some(best.map_or(span, |b: i64| b.min(span)));
        }
        let mut i = 0;
        loop {
            if i == choice.len() {
                return best;
            }
            choice[i] += 1;
            if choice[i] < orders[i].len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

fn longest_path(
    jobs: &[Vec<(i64, i64)>],
    succ: &BTreeMap<(usize, usize), Vec<(usize, usize)>>,
) -> Option<i64> {
    let nodes: Vec<(usize, usize)> = jobs
        .iter()
        .enumerate()
        .flat_map(|(j, ops)| (0..ops.len()).map(move |k| (j, k)))
        .collect();
    let mut indegree: BTreeMap<(usize, usize), usize> = nodes.iter().map(|&n| (n, 0)).collect();
    for targets in succ.values() {
        for t in targets {
            *indegree.get_mut(t).expect("known node") += 1;
        }
    }
    let mut start: BTreeMap<(usize, usize), i64> = nodes.iter().map(|&n| (n, 0)).collect();
    let mut ready: Vec<(usize, usize)> =
        nodes.iter().copied().filter(|n| indegree[n] == 0).collect();
    let mut seen = 0;
    let mut span = 0;
    while let Some(n) = ready.pop() {
        seen += 1;
        let end = start[&n] + jobs[n.0][n.1].1;
        span = span.max(end);
        for t in succ.get(&n).into_iter().flatten() {
            let s = start.get_mut(t).expect("known node");
            *s = (*s).max(end);
            let d = indegree.get_mut(t).expect("known node");
            *d -= 1;
            if *d == 0 {
                ready.push(*t);
            }
        }
    }
    (seen == nodes.len()).then_some(span)
}
