//! Naive bottom-up instantiation of the safe non-ground fragment.
//!
//! A [`Grounder`] keeps the Herbrand base accumulated over successive
//! parts, so grounding `base` and then `step(1)`, `step(2)`, ... only ever
//! appends rules.

mod program;
mod term;

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::syntax::{
    Aggregate, Atom, Head, HeadAtom, Literal, Part, PredicateSig, Program, Rule, Statement, Term,
    TheoryAtom, TheoryElement, BASE_PART,
};

pub use program::{
    AtomId, AtomTable, GroundAtom, GroundHead, GroundLiteral, GroundProgram, GroundRule,
};
use term::{compare, eval, Subst};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroundError {
    #[error("unsafe variable {variable} in rule `{rule}`")]
    Unsafe { rule: String, variable: String },
    #[error("cannot evaluate `{term}` in rule `{rule}`: {reason}")]
    Arithmetic {
        rule: String,
        term: String,
        reason: String,
    },
    #[error("unknown part {name}/{arity}")]
    UnknownPart { name: String, arity: usize },
    #[error("part {name}({params}) has already been grounded")]
    Regrounded { name: String, params: String },
}

type Pred = (String, usize);

fn pred_of(atom: &Atom) -> Pred {
    (atom.predicate.clone(), atom.arity())
}

/// Grounds a single part of `program` with the given parameters, on top
/// of an empty Herbrand base.
pub fn ground(program: &Program, part: &str, params: &[i64]) -> Result<GroundProgram, GroundError> {
    let mut out = GroundProgram::new();
    Grounder::new().ground_part(program, part, params, &mut out)?;
    Ok(out)
}

/// Grounds the `base` part (everything outside `#program` sections).
pub fn ground_base(program: &Program) -> Result<GroundProgram, GroundError> {
    ground(program, BASE_PART, &[])
}

/// Herbrand base and fact bookkeeping carried across grounding calls.
#[derive(Clone, Debug, Default)]
pub struct Grounder {
    /// Atoms that may become true, per predicate, in discovery order.
    possible: HashMap<Pred, Vec<Atom>>,
    possible_set: HashSet<Atom>,
    /// Instances of unconditional facts.
    facts: HashSet<Atom>,
    /// Predicates with at least one non-fact definition (rule, choice, external).
    derived: HashSet<Pred>,
    grounded: HashSet<(String, Vec<i64>)>,
    aux_counter: usize,
}

/// One element instance produced while expanding a conditional element.
struct Expanded<T> {
    item: T,
    /// Remaining (dynamic) condition literals.
    condition: Vec<Literal>,
}

impl Grounder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Grounds part `name` of `program` with `params`, appending to `out`.
    pub fn ground_part(
        &mut self,
        program: &Program,
        name: &str,
        params: &[i64],
        out: &mut GroundProgram,
    ) -> Result<(), GroundError> {
        let part = program
            .part(name, params.len())
            .ok_or_else(|| GroundError::UnknownPart {
                name: name.to_owned(),
                arity: params.len(),
            })?;
        self.ground_statements(&part, params, out)
    }

    pub fn ground_statements(
        &mut self,
        part: &Part,
        params: &[i64],
        out: &mut GroundProgram,
    ) -> Result<(), GroundError> {
        let key = (part.name.clone(), params.to_vec());
        if !self.grounded.insert(key) {
            return Err(GroundError::Regrounded {
                name: part.name.clone(),
                params: params
                    .iter()
                    .map(i64::to_string)
                    .collect::<Vec<_>>()
                    .join(","),
            });
        }
        let bindings: HashMap<String, Term> = part
            .params
            .iter()
            .cloned()
            .zip(params.iter().map(|&v| Term::int(v)))
            .collect();
        let statements: Vec<Statement> = part
            .statements
            .iter()
            .map(|s| term::substitute_params(s, &bindings))
            .collect();

        for statement in &statements {
            match statement {
                Statement::Rule(rule) => {
                    check_safety(rule)?;
                    self.note_definitions(rule);
                }
                Statement::External { atom, body } => {
                    check_safety(&Rule {
                        head: Head::Atom(atom.clone()),
                        body: body.clone(),
                    })?;
                    self.derived.insert(pred_of(atom));
                }
                _ => {}
            }
        }

        // Fixpoint over possible atoms, then one generating pass.
        loop {
            let before = self.possible_set.len();
            for statement in &statements {
                self.instantiate(statement, None)?;
            }
            if self.possible_set.len() == before {
                break;
            }
        }
        for statement in &statements {
            self.instantiate(statement, Some(out))?;
        }
        Ok(())
    }

    fn note_definitions(&mut self, rule: &Rule) {
        match &rule.head {
            Head::Atom(a) if rule.body.is_empty() => {
                // Facts keep their predicate fact-determined.
                let _ = a;
            }
            Head::Atom(a) => {
                self.derived.insert(pred_of(a));
            }
            Head::Choice { elements, .. } => {
                for e in elements {
                    if let HeadAtom::Regular(a) = &e.atom {
                        self.derived.insert(pred_of(a));
                    }
                }
            }
            Head::Theory(_) | Head::None => {}
        }
    }

    fn add_possible(&mut self, atom: Atom, fact: bool) {
        if fact {
            self.facts.insert(atom.clone());
        }
        if self.possible_set.insert(atom.clone()) {
            self.possible.entry(pred_of(&atom)).or_default().push(atom);
        }
    }

    /// Runs one pass over `statement`. Without `out` only the possible-atom
    /// set grows; with `out` ground rules are emitted.
    fn instantiate(
        &mut self,
        statement: &Statement,
        mut out: Option<&mut GroundProgram>,
    ) -> Result<(), GroundError> {
        match statement {
            Statement::Rule(rule) => {
                let text = rule.to_string();
                let substs = self.match_body(&rule.body, Subst::new(), &text)?;
                for subst in substs {
                    self.emit_rule(rule, &subst, &text, out.as_deref_mut())?;
                }
            }
            Statement::External { atom, body } => {
                let text = statement.to_string();
                let substs = self.match_body(body, Subst::new(), &text)?;
                for subst in substs {
                    let ground = self.ground_atom(atom, &subst, &text)?;
                    let Some(body) = self.ground_body(body, &subst, &text, None)? else {
                        continue;
                    };
                    // A static body decides the declaration; dynamic bodies
                    // are not supported for externals and are ignored.
                    let _ = body;
                    self.add_possible(ground.clone(), false);
                    if let Some(out) = out.as_deref_mut() {
                        let id = out.intern_regular(ground);
                        out.add_external(id);
                    }
                }
            }
            Statement::Show(sig) => {
                if let Some(out) = out {
                    if !out.shows.contains(sig) {
                        out.shows.push(sig.clone());
                    }
                }
            }
            Statement::Real(terms) => {
                if let Some(out) = out {
                    for t in terms {
                        let value =
                            eval(t, &Subst::new()).map_err(|reason| GroundError::Arithmetic {
                                rule: statement.to_string(),
                                term: t.to_string(),
                                reason,
                            })?;
                        out.reals.insert(value.to_string());
                    }
                }
            }
            Statement::Part { .. } => {}
        }
        Ok(())
    }

    fn is_static(&self, atom: &Atom) -> bool {
        !self.derived.contains(&pred_of(atom))
    }

    /// All substitutions satisfying the positive regular atoms and the
    /// comparisons of `body`, extending `subst`.
    fn match_body(
        &self,
        body: &[Literal],
        subst: Subst,
        rule: &str,
    ) -> Result<Vec<Subst>, GroundError> {
        let mut pending: Vec<&Literal> = body
            .iter()
            .filter(|l| {
                matches!(
                    l,
                    Literal::Atom { negated: false, .. } | Literal::Compare { .. }
                )
            })
            .collect();
        let mut results = Vec::new();
        self.match_rec(&mut pending, subst, rule, &mut results)?;
        Ok(results)
    }

    fn match_rec(
        &self,
        pending: &mut Vec<&Literal>,
        subst: Subst,
        rule: &str,
        results: &mut Vec<Subst>,
    ) -> Result<(), GroundError> {
        if pending.is_empty() {
            results.push(subst);
            return Ok(());
        }
        // Pick the first literal that can be processed under `subst`.
        let pick = pending.iter().position(|l| match l {
            Literal::Atom { atom, .. } => term::matchable(atom, &subst),
            Literal::Compare { op, left, right } => {
                let ground = |t: &Term| term::unbound(t, &subst).is_empty();
                (ground(left) && ground(right))
                    || (*op == crate::syntax::CmpOp::Eq
                        && ((matches!(left, Term::Var(v) if !subst.contains_key(v))
                            && ground(right))
                            || (matches!(right, Term::Var(v) if !subst.contains_key(v))
                                && ground(left))))
            }
            _ => false,
        });
        let Some(index) = pick else {
            let mut vars = Vec::new();
            for l in pending.iter() {
                if let Literal::Compare { left, right, .. } = l {
                    vars.extend(term::unbound(left, &subst));
                    vars.extend(term::unbound(right, &subst));
                } else if let Literal::Atom { atom, .. } = l {
                    for a in &atom.args {
                        vars.extend(term::unbound(a, &subst));
                    }
                }
            }
            return Err(GroundError::Arithmetic {
                rule: rule.to_owned(),
                term: vars.first().cloned().unwrap_or_default(),
                reason: "variable occurs only inside arithmetic".to_owned(),
            });
        };
        let literal = pending.remove(index);
        match literal {
            Literal::Atom { atom, .. } => {
                if let Some(candidates) = self.possible.get(&pred_of(atom)) {
                    for candidate in candidates {
                        let mut next = subst.clone();
                        if term::unify_atom(atom, candidate, &mut next) {
                            self.match_rec(pending, next, rule, results)?;
                        }
                    }
                }
            }
            Literal::Compare { op, left, right } => {
                let err = |t: &Term, reason: String| GroundError::Arithmetic {
                    rule: rule.to_owned(),
                    term: t.to_string(),
                    reason,
                };
                let left_unbound = matches!(left, Term::Var(v) if !subst.contains_key(v));
                let right_unbound = matches!(right, Term::Var(v) if !subst.contains_key(v));
                if left_unbound || right_unbound {
                    let (var, expr) = if left_unbound {
                        (left, right)
                    } else {
                        (right, left)
                    };
                    let value = eval(expr, &subst).map_err(|r| err(expr, r))?;
                    let Term::Var(name) = var else { unreachable!() };
                    let mut next = subst.clone();
                    next.insert(name.clone(), value);
                    self.match_rec(pending, next, rule, results)?;
                } else {
                    let l = eval(left, &subst).map_err(|r| err(left, r))?;
                    let r = eval(right, &subst).map_err(|r| err(right, r))?;
                    if compare(*op, &l, &r) {
                        self.match_rec(pending, subst, rule, results)?;
                    }
                }
            }
            _ => unreachable!(),
        }
        pending.insert(index, literal);
        Ok(())
    }

    fn ground_atom(&self, atom: &Atom, subst: &Subst, rule: &str) -> Result<Atom, GroundError> {
        let args = atom
            .args
            .iter()
            .map(|a| {
                eval(a, subst).map_err(|reason| GroundError::Arithmetic {
                    rule: rule.to_owned(),
                    term: a.to_string(),
                    reason,
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(Atom {
            predicate: atom.predicate.clone(),
            args,
        })
    }

    fn ground_term(&self, t: &Term, subst: &Subst, rule: &str) -> Result<Term, GroundError> {
        eval(t, subst).map_err(|reason| GroundError::Arithmetic {
            rule: rule.to_owned(),
            term: t.to_string(),
            reason,
        })
    }

    /// Expands a conditional element: enumerates local substitutions via the
    /// positive literals of `condition`, drops instances whose static part is
    /// false and returns the remaining dynamic condition literals.
    fn expand<T>(
        &self,
        condition: &[Literal],
        subst: &Subst,
        rule: &str,
        mut make: impl FnMut(&Subst) -> Result<T, GroundError>,
    ) -> Result<Vec<Expanded<T>>, GroundError> {
        let mut out = Vec::new();
        for local in self.match_body(condition, subst.clone(), rule)? {
            let mut dynamic = Vec::new();
            let mut holds = true;
            for lit in condition {
                match lit {
                    Literal::Atom { negated, atom } => {
                        let g = self.ground_atom(atom, &local, rule)?;
                        if self.is_static(&g) {
                            if self.facts.contains(&g) == *negated {
                                holds = false;
                                break;
                            }
                        } else if !negated && !self.possible_set.contains(&g) {
                            holds = false;
                            break;
                        } else if *negated && !self.possible_set.contains(&g) {
                            // `not a` with a underivable is true
                        } else {
                            dynamic.push(Literal::Atom {
                                negated: *negated,
                                atom: g,
                            });
                        }
                    }
                    Literal::Compare { .. } => {}
                    _ => unreachable!("conditions contain only atoms and comparisons"),
                }
            }
            if holds {
                out.push(Expanded {
                    item: make(&local)?,
                    condition: dynamic,
                });
            }
        }
        Ok(out)
    }

    fn ground_theory(
        &self,
        atom: &TheoryAtom,
        subst: &Subst,
        rule: &str,
    ) -> Result<TheoryAtom, GroundError> {
        let mut elements = Vec::new();
        for element in &atom.elements {
            for e in self.expand(&element.condition, subst, rule, |local| {
                self.ground_term(&element.term, local, rule)
            })? {
                elements.push(TheoryElement {
                    term: e.item,
                    condition: e.condition,
                });
            }
        }
        let guard = match &atom.guard {
            Some((rel, t)) => Some((*rel, self.ground_term(t, subst, rule)?)),
            None => None,
        };
        Ok(TheoryAtom {
            kind: atom.kind,
            elements,
            guard,
        })
    }

    fn bound(
        &self,
        t: &Option<Term>,
        subst: &Subst,
        rule: &str,
    ) -> Result<Option<u64>, GroundError> {
        let Some(t) = t else { return Ok(None) };
        let value = self.ground_term(t, subst, rule)?;
        match &value {
            Term::Int(v) => {
                use num_traits::ToPrimitive;
                // negative bounds clamp to 0
                Ok(Some(v.to_u64().unwrap_or(0)))
            }
            other => Err(GroundError::Arithmetic {
                rule: rule.to_owned(),
                term: other.to_string(),
                reason: "aggregate bound is not an integer".to_owned(),
            }),
        }
    }

    fn fresh_aux(&mut self, out: &mut GroundProgram) -> AtomId {
        loop {
            self.aux_counter += 1;
            let atom = Atom::new("__aux", vec![Term::int(self.aux_counter as i64)]);
            let name = atom.to_string();
            if out.atoms.lookup(&name).is_none() {
                return out.intern_regular(atom);
            }
        }
    }

    /// Interns a (possibly negated) dynamic condition as one atom id that is
    /// true iff the literal and its condition hold: the literal itself when
    /// the condition is empty, otherwise a fresh auxiliary atom.
    fn conditional_atom(
        &mut self,
        literal: GroundLiteral,
        condition: &[Literal],
        out: &mut GroundProgram,
    ) -> (AtomId, bool) {
        if condition.is_empty() {
            if let GroundLiteral::Atom { atom, negated } = literal {
                return (atom, negated);
            }
        }
        let aux = self.fresh_aux(out);
        let mut body = vec![literal];
        body.extend(condition.iter().map(|l| intern_literal(out, l)));
        out.add_rule(GroundRule {
            head: GroundHead::Atom(aux),
            body,
        });
        (aux, false)
    }

    /// Grounds body literals other than positive-atom matching. Returns
    /// `None` if a comparison fails.
    fn ground_body(
        &mut self,
        body: &[Literal],
        subst: &Subst,
        rule: &str,
        mut out: Option<&mut GroundProgram>,
    ) -> Result<Option<Vec<GroundLiteral>>, GroundError> {
        let mut lits = Vec::new();
        for literal in body {
            match literal {
                Literal::Atom { negated, atom } => {
                    let g = self.ground_atom(atom, subst, rule)?;
                    if let Some(out) = out.as_deref_mut() {
                        lits.push(GroundLiteral::Atom {
                            atom: out.intern_regular(g),
                            negated: *negated,
                        });
                    }
                }
                Literal::Theory { negated, atom } => {
                    let g = self.ground_theory(atom, subst, rule)?;
                    if let Some(out) = out.as_deref_mut() {
                        let id = intern_theory(out, g);
                        lits.push(GroundLiteral::Atom {
                            atom: id,
                            negated: *negated,
                        });
                    }
                }
                Literal::Aggregate { negated, aggregate } => {
                    let lower = self.bound(&aggregate.lower, subst, rule)?;
                    let upper = self.bound(&aggregate.upper, subst, rule)?;
                    let expanded = self.expand_aggregate(aggregate, subst, rule)?;
                    if let Some(out) = out.as_deref_mut() {
                        let elements = expanded
                            .into_iter()
                            .map(|e| {
                                let lit = intern_literal(out, &e.item);
                                self.conditional_atom(lit, &e.condition, out)
                            })
                            .collect();
                        lits.push(GroundLiteral::Count {
                            negated: *negated,
                            lower,
                            upper,
                            elements,
                        });
                    }
                }
                Literal::Compare { op, left, right } => {
                    let l = self.ground_term(left, subst, rule)?;
                    let r = self.ground_term(right, subst, rule)?;
                    if !compare(*op, &l, &r) {
                        return Ok(None);
                    }
                }
            }
        }
        Ok(Some(lits))
    }

    fn expand_aggregate(
        &self,
        aggregate: &Aggregate,
        subst: &Subst,
        rule: &str,
    ) -> Result<Vec<Expanded<Literal>>, GroundError> {
        let mut out = Vec::new();
        for element in &aggregate.elements {
            // The element literal's positive atom also binds local variables.
            let mut condition = element.condition.clone();
            if let Literal::Atom { negated: false, .. } = &element.literal {
                condition.insert(0, element.literal.clone());
            }
            let expanded = self.expand(&condition, subst, rule, |local| {
                Ok(match &element.literal {
                    Literal::Atom { negated, atom } => Literal::Atom {
                        negated: *negated,
                        atom: self.ground_atom(atom, local, rule)?,
                    },
                    other => other.clone(),
                })
            })?;
            for mut e in expanded {
                // Drop the element literal itself from the remaining condition.
                e.condition.retain(|c| c != &e.item);
                out.push(e);
            }
        }
        Ok(out)
    }

    fn emit_rule(
        &mut self,
        rule: &Rule,
        subst: &Subst,
        text: &str,
        out: Option<&mut GroundProgram>,
    ) -> Result<(), GroundError> {
        match out {
            None => {
                // Only grow the possible-atom set.
                if self.ground_body(&rule.body, subst, text, None)?.is_none() {
                    return Ok(());
                }
                match &rule.head {
                    Head::Atom(a) => {
                        let g = self.ground_atom(a, subst, text)?;
                        self.add_possible(g, rule.body.is_empty());
                    }
                    Head::Choice { elements, .. } => {
                        for element in elements {
                            if let HeadAtom::Regular(a) = &element.atom {
                                let found = self.expand(&element.condition, subst, text, |l| {
                                    self.ground_atom(a, l, text)
                                })?;
                                for e in found {
                                    self.add_possible(e.item, false);
                                }
                            }
                        }
                    }
                    Head::Theory(_) | Head::None => {}
                }
                Ok(())
            }
            Some(out) => {
                let Some(body) = self.ground_body(&rule.body, subst, text, Some(out))? else {
                    return Ok(());
                };
                match &rule.head {
                    Head::Atom(a) => {
                        let g = self.ground_atom(a, subst, text)?;
                        let id = out.intern_regular(g);
                        out.add_rule(GroundRule {
                            head: GroundHead::Atom(id),
                            body,
                        });
                    }
                    Head::Theory(t) => {
                        let g = self.ground_theory(t, subst, text)?;
                        let id = intern_theory(out, g);
                        out.add_rule(GroundRule {
                            head: GroundHead::Atom(id),
                            body,
                        });
                    }
                    Head::None => {
                        out.add_rule(GroundRule::constraint(body));
                    }
                    Head::Choice {
                        lower,
                        upper,
                        elements,
                    } => {
                        let lower = self.bound(lower, subst, text)?;
                        let upper = self.bound(upper, subst, text)?;
                        self.emit_choice(elements, lower, upper, body, subst, text, out)?;
                    }
                }
                Ok(())
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn emit_choice(
        &mut self,
        elements: &[crate::syntax::ChoiceElement],
        lower: Option<u64>,
        upper: Option<u64>,
        body: Vec<GroundLiteral>,
        subst: &Subst,
        text: &str,
        out: &mut GroundProgram,
    ) -> Result<(), GroundError> {
        let mut expanded: Vec<Expanded<AtomId>> = Vec::new();
        for element in elements {
            let found = self.expand(&element.condition, subst, text, |local| {
                Ok(match &element.atom {
                    HeadAtom::Regular(a) => GroundAtom::Regular(self.ground_atom(a, local, text)?),
                    HeadAtom::Theory(t) => GroundAtom::Theory(self.ground_theory(t, local, text)?),
                })
            })?;
            for e in found {
                let id = match e.item {
                    GroundAtom::Regular(a) => out.intern_regular(a),
                    GroundAtom::Theory(t) => intern_theory(out, t),
                };
                expanded.push(Expanded {
                    item: id,
                    condition: e.condition,
                });
            }
        }
        if expanded.iter().all(|e| e.condition.is_empty()) {
            out.add_rule(GroundRule {
                head: GroundHead::Choice {
                    lower,
                    upper,
                    elements: expanded.into_iter().map(|e| e.item).collect(),
                },
                body,
            });
            return Ok(());
        }
        // Dynamic conditions: one unbounded choice per element, guarded by
        // its condition, with the bounds enforced over auxiliary atoms.
        let mut counted = Vec::new();
        for e in &expanded {
            let mut guarded = body.clone();
            guarded.extend(e.condition.iter().map(|l| intern_literal(out, l)));
            out.add_rule(GroundRule {
                head: GroundHead::Choice {
                    lower: None,
                    upper: None,
                    elements: vec![e.item],
                },
                body: guarded,
            });
            counted.push(self.conditional_atom(GroundLiteral::pos(e.item), &e.condition, out));
        }
        for (bound, negated) in [(lower, true), (upper.map(|u| u + 1), false)] {
            if let Some(b) = bound {
                let mut constraint = body.clone();
                constraint.push(GroundLiteral::Count {
                    negated,
                    lower: Some(b),
                    upper: None,
                    elements: counted.clone(),
                });
                out.add_rule(GroundRule::constraint(constraint));
            }
        }
        Ok(())
    }
}

fn intern_theory(out: &mut GroundProgram, atom: TheoryAtom) -> AtomId {
    for element in &atom.elements {
        for lit in &element.condition {
            if let Literal::Atom { atom, .. } = lit {
                out.intern_regular(atom.clone());
            }
        }
    }
    out.intern(GroundAtom::Theory(atom))
}

fn intern_literal(out: &mut GroundProgram, literal: &Literal) -> GroundLiteral {
    match literal {
        Literal::Atom { negated, atom } => GroundLiteral::Atom {
            atom: out.intern_regular(atom.clone()),
            negated: *negated,
        },
        Literal::Theory { negated, atom } => GroundLiteral::Atom {
            atom: intern_theory(out, atom.clone()),
            negated: *negated,
        },
        _ => unreachable!("element literals are atoms"),
    }
}

/// Rejects rules with a variable not bound by a positive body atom (or an
/// assignment `X = t`). Element-local variables must be bound by the
/// element's own condition.
fn check_safety(rule: &Rule) -> Result<(), GroundError> {
    let mut bound: Vec<String> = Vec::new();
    let mut changed = true;
    while changed {
        changed = false;
        for lit in &rule.body {
            let mut vars = Vec::new();
            match lit {
                Literal::Atom {
                    negated: false,
                    atom,
                } => {
                    for a in &atom.args {
                        term::binding_vars(a, &mut vars);
                    }
                }
                Literal::Compare {
                    op: crate::syntax::CmpOp::Eq,
                    left,
                    right,
                } => {
                    let ground = |t: &Term| {
                        let mut v = Vec::new();
                        t.collect_vars(&mut v);
                        v.iter().all(|v| bound.contains(v))
                    };
                    if let (Term::Var(v), true) = (left, ground(right)) {
                        vars.push(v.clone());
                    }
                    if let (Term::Var(v), true) = (right, ground(left)) {
                        vars.push(v.clone());
                    }
                }
                _ => {}
            }
            for v in vars {
                if !bound.contains(&v) {
                    bound.push(v);
                    changed = true;
                }
            }
        }
    }

    let text = rule.to_string();
    let unsafe_var = |v: &str| GroundError::Unsafe {
        rule: text.clone(),
        variable: v.to_owned(),
    };
    // Variables occurring outside of elements are global.
    let mut global = Vec::new();
    match &rule.head {
        Head::Atom(a) => a.args.iter().for_each(|t| t.collect_vars(&mut global)),
        Head::Theory(t) => {
            if let Some((_, g)) = &t.guard {
                g.collect_vars(&mut global)
            }
        }
        Head::Choice { lower, upper, .. } => {
            for t in lower.iter().chain(upper.iter()) {
                t.collect_vars(&mut global);
            }
        }
        Head::None => {}
    }
    for lit in &rule.body {
        match lit {
            Literal::Atom { atom, .. } => {
                atom.args.iter().for_each(|t| t.collect_vars(&mut global))
            }
            Literal::Compare { left, right, .. } => {
                left.collect_vars(&mut global);
                right.collect_vars(&mut global);
            }
            Literal::Theory { atom, .. } => {
                if let Some((_, g)) = &atom.guard {
                    g.collect_vars(&mut global)
                }
            }
            Literal::Aggregate { aggregate, .. } => {
                for t in aggregate.lower.iter().chain(aggregate.upper.iter()) {
                    t.collect_vars(&mut global);
                }
            }
        }
    }
    if let Some(v) = global.iter().find(|v| !bound.contains(v)) {
        return Err(unsafe_var(v));
    }

    // Element-local variables.
    let check_element = |vars: Vec<String>, condition: &[Literal]| -> Result<(), GroundError> {
        let mut local_bound = bound.clone();
        for lit in condition {
            if let Literal::Atom {
                negated: false,
                atom,
            } = lit
            {
                for a in &atom.args {
                    term::binding_vars(a, &mut local_bound);
                }
            }
        }
        for lit in condition {
            if let Literal::Compare {
                op: crate::syntax::CmpOp::Eq,
                left: Term::Var(v),
                ..
            } = lit
            {
                local_bound.push(v.clone());
            }
        }
        let mut all = vars;
        for lit in condition {
            literal_vars(lit, &mut all);
        }
        match all.iter().find(|v| !local_bound.contains(v)) {
            Some(v) => Err(unsafe_var(v)),
            None => Ok(()),
        }
    };
    let theory_elements = |t: &TheoryAtom| -> Result<(), GroundError> {
        for e in &t.elements {
            let mut vars = Vec::new();
            e.term.collect_vars(&mut vars);
            check_element(vars, &e.condition)?;
        }
        Ok(())
    };
    match &rule.head {
        Head::Theory(t) => theory_elements(t)?,
        Head::Choice { elements, .. } => {
            for e in elements {
                let mut vars = Vec::new();
                match &e.atom {
                    HeadAtom::Regular(a) => a.args.iter().for_each(|t| t.collect_vars(&mut vars)),
                    HeadAtom::Theory(t) => {
                        theory_elements(t)?;
                        if let Some((_, g)) = &t.guard {
                            g.collect_vars(&mut vars);
                        }
                    }
                }
                check_element(vars, &e.condition)?;
            }
        }
        _ => {}
    }
    for lit in &rule.body {
        match lit {
            Literal::Theory { atom, .. } => theory_elements(atom)?,
            Literal::Aggregate { aggregate, .. } => {
                for e in &aggregate.elements {
                    let mut vars = Vec::new();
                    literal_vars(&e.literal, &mut vars);
                    let mut condition = e.condition.clone();
                    if let Literal::Atom { negated: false, .. } = &e.literal {
                        condition.push(e.literal.clone());
                    }
                    check_element(vars, &condition)?;
                }
            }
            _ => {}
        }
    }
    Ok(())
}

fn literal_vars(lit: &Literal, out: &mut Vec<String>) {
    match lit {
        Literal::Atom { atom, .. } => atom.args.iter().for_each(|t| t.collect_vars(out)),
        Literal::Compare { left, right, .. } => {
            left.collect_vars(out);
            right.collect_vars(out);
        }
        Literal::Theory { atom, .. } => {
            for e in &atom.elements {
                e.term.collect_vars(out);
            }
            if let Some((_, g)) = &atom.guard {
                g.collect_vars(out);
            }
        }
        Literal::Aggregate { .. } => {}
    }
}

/// Whether `atom` is displayed in models. Without `#show` statements every
/// non-auxiliary atom is; with them only the listed regular predicates.
pub fn shown(program: &GroundProgram, atom: AtomId) -> bool {
    let GroundAtom::Regular(a) = program.atoms.get(atom) else {
        return program.shows.is_empty();
    };
    if a.predicate.starts_with("__") {
        return false;
    }
    if program.shows.is_empty() {
        return true;
    }
    program.shows.iter().any(|s| match s {
        Some(PredicateSig { name, arity }) => name == &a.predicate && *arity == a.arity(),
        None => false,
    })
}
