//! Substitution, matching and integer arithmetic on terms.

use std::cmp::Ordering;
use std::collections::HashMap;

use num_integer::Integer;
use num_traits::Zero;

use crate::rational::Rational;
use crate::syntax::{
    Aggregate, AggregateElement, Atom, BinOp, ChoiceElement, CmpOp, Head, HeadAtom, Literal, Rule,
    Statement, Term, TheoryAtom, TheoryElement,
};

pub type Subst = HashMap<String, Term>;

/// Evaluates `term` under `subst`, folding integer arithmetic. Operations
/// involving non-integers are kept symbolic (they only occur inside
/// lc-atoms, whose identity is syntactic).
pub fn eval(term: &Term, subst: &Subst) -> Result<Term, String> {
    Ok(match term {
        Term::Var(v) => subst
            .get(v)
            .cloned()
            .ok_or_else(|| format!("unbound variable {v}"))?,
        Term::Int(_) | Term::Rat(_) | Term::Str(_) | Term::Sym(_) => term.clone(),
        Term::Func(name, args) => Term::Func(
            name.clone(),
            args.iter()
                .map(|a| eval(a, subst))
                .collect::<Result<_, _>>()?,
        ),
        Term::Neg(inner) => match eval(inner, subst)? {
            Term::Int(v) => Term::Int(-v),
            other => Term::Neg(Box::new(other)),
        },
        Term::Binary(op, l, r) => {
            let l = eval(l, subst)?;
            let r = eval(r, subst)?;
            match (&l, &r) {
                (Term::Int(a), Term::Int(b)) => Term::Int(match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b.is_zero() {
                            return Err("division by zero".to_owned());
                        }
                        // Truncating division.
                        let (q, _) = a.div_rem(b);
                        q
                    }
                }),
                _ => Term::Binary(*op, Box::new(l), Box::new(r)),
            }
        }
        Term::Interval(l, r) => {
            Term::Interval(Box::new(eval(l, subst)?), Box::new(eval(r, subst)?))
        }
    })
}

fn numeric(t: &Term) -> Option<Rational> {
    match t {
        Term::Int(v) => Some(Rational::from_integer(v.clone())),
        Term::Rat(r) => Some(r.clone()),
        _ => None,
    }
}

pub fn compare_terms(l: &Term, r: &Term) -> Ordering {
    match (numeric(l), numeric(r)) {
        (Some(a), Some(b)) => a.cmp(&b),
        _ => l.cmp(r),
    }
}

pub fn compare(op: CmpOp, l: &Term, r: &Term) -> bool {
    let ord = compare_terms(l, r);
    match op {
        CmpOp::Eq => ord == Ordering::Equal,
        CmpOp::Ne => ord != Ordering::Equal,
        CmpOp::Lt => ord == Ordering::Less,
        CmpOp::Le => ord != Ordering::Greater,
        CmpOp::Gt => ord == Ordering::Greater,
        CmpOp::Ge => ord != Ordering::Less,
    }
}

/// Variables of `term` not bound by `subst`.
pub fn unbound(term: &Term, subst: &Subst) -> Vec<String> {
    let mut vars = Vec::new();
    term.collect_vars(&mut vars);
    vars.retain(|v| !subst.contains_key(v));
    vars
}

/// Variables that matching `term` against a ground term can bind: those not
/// nested inside arithmetic.
pub fn binding_vars(term: &Term, out: &mut Vec<String>) {
    match term {
        Term::Var(v) => {
            if !out.contains(v) {
                out.push(v.clone());
            }
        }
        Term::Func(_, args) => args.iter().for_each(|a| binding_vars(a, out)),
        _ => {}
    }
}

fn arithmetic_ready(term: &Term, subst: &Subst) -> bool {
    match term {
        Term::Func(_, args) => args.iter().all(|a| arithmetic_ready(a, subst)),
        Term::Neg(_) | Term::Binary(..) | Term::Interval(..) => unbound(term, subst).is_empty(),
        _ => true,
    }
}

/// True if every arithmetic subterm of `atom` is ground under `subst`, so
/// the atom can be matched against candidates.
pub fn matchable(atom: &Atom, subst: &Subst) -> bool {
    atom.args.iter().all(|a| arithmetic_ready(a, subst))
}

fn unify(pattern: &Term, value: &Term, subst: &mut Subst) -> bool {
    match pattern {
        Term::Var(v) => match subst.get(v) {
            Some(bound) => bound == value,
            None => {
                subst.insert(v.clone(), value.clone());
                true
            }
        },
        Term::Func(name, args) => match value {
            Term::Func(vname, vargs) if vname == name && vargs.len() == args.len() => {
                args.iter().zip(vargs).all(|(p, v)| unify(p, v, subst))
            }
            _ => false,
        },
        Term::Neg(_) | Term::Binary(..) | Term::Interval(..) => {
            eval(pattern, subst).is_ok_and(|t| &t == value)
        }
        _ => pattern == value,
    }
}

pub fn unify_atom(pattern: &Atom, value: &Atom, subst: &mut Subst) -> bool {
    pattern.predicate == value.predicate
        && pattern.args.len() == value.args.len()
        && pattern
            .args
            .iter()
            .zip(&value.args)
            .all(|(p, v)| unify(p, v, subst))
}

/// Replaces part parameters (symbolic constants) by their values.
pub fn substitute_params(statement: &Statement, params: &HashMap<String, Term>) -> Statement {
    if params.is_empty() {
        return statement.clone();
    }
    let s = ParamSubst(params);
    match statement {
        Statement::Rule(r) => Statement::Rule(s.rule(r)),
        Statement::External { atom, body } => Statement::External {
            atom: s.atom(atom),
            body: body.iter().map(|l| s.literal(l)).collect(),
        },
        Statement::Real(terms) => Statement::Real(terms.iter().map(|t| s.term(t)).collect()),
        other => other.clone(),
    }
}

struct ParamSubst<'a>(&'a HashMap<String, Term>);

impl ParamSubst<'_> {
    fn term(&self, t: &Term) -> Term {
        match t {
            Term::Sym(name) => self.0.get(name).cloned().unwrap_or_else(|| t.clone()),
            Term::Func(name, args) => {
                Term::Func(name.clone(), args.iter().map(|a| self.term(a)).collect())
            }
            Term::Neg(inner) => Term::Neg(Box::new(self.term(inner))),
            Term::Binary(op, l, r) => {
                Term::Binary(*op, Box::new(self.term(l)), Box::new(self.term(r)))
            }
            Term::Interval(l, r) => Term::Interval(Box::new(self.term(l)), Box::new(self.term(r))),
            _ => t.clone(),
        }
    }

    fn atom(&self, a: &Atom) -> Atom {
        Atom {
            predicate: a.predicate.clone(),
            args: a.args.iter().map(|t| self.term(t)).collect(),
        }
    }

    fn theory(&self, t: &TheoryAtom) -> TheoryAtom {
        TheoryAtom {
            kind: t.kind,
            elements: t
                .elements
                .iter()
                .map(|e| TheoryElement {
                    term: self.term(&e.term),
                    condition: e.condition.iter().map(|l| self.literal(l)).collect(),
                })
                .collect(),
            guard: t.guard.as_ref().map(|(r, g)| (*r, self.term(g))),
        }
    }

    fn aggregate(&self, a: &Aggregate) -> Aggregate {
        Aggregate {
            lower: a.lower.as_ref().map(|t| self.term(t)),
            upper: a.upper.as_ref().map(|t| self.term(t)),
            elements: a
                .elements
                .iter()
                .map(|e| AggregateElement {
                    literal: self.literal(&e.literal),
                    condition: e.condition.iter().map(|l| self.literal(l)).collect(),
                })
                .collect(),
        }
    }

    fn literal(&self, l: &Literal) -> Literal {
        match l {
            Literal::Atom { negated, atom } => Literal::Atom {
                negated: *negated,
                atom: self.atom(atom),
            },
            Literal::Theory { negated, atom } => Literal::Theory {
                negated: *negated,
                atom: self.theory(atom),
            },
            Literal::Aggregate { negated, aggregate } => Literal::Aggregate {
                negated: *negated,
                aggregate: self.aggregate(aggregate),
            },
            Literal::Compare { op, left, right } => Literal::Compare {
                op: *op,
                left: self.term(left),
                right: self.term(right),
            },
        }
    }

    fn rule(&self, r: &Rule) -> Rule {
        let head = match &r.head {
            Head::Atom(a) => Head::Atom(self.atom(a)),
            Head::Theory(t) => Head::Theory(self.theory(t)),
            Head::Choice {
                lower,
                upper,
                elements,
            } => Head::Choice {
                lower: lower.as_ref().map(|t| self.term(t)),
                upper: upper.as_ref().map(|t| self.term(t)),
                elements: elements
                    .iter()
                    .map(|e| ChoiceElement {
                        atom: match &e.atom {
                            HeadAtom::Regular(a) => HeadAtom::Regular(self.atom(a)),
                            HeadAtom::Theory(t) => HeadAtom::Theory(self.theory(t)),
                        },
                        condition: e.condition.iter().map(|l| self.literal(l)).collect(),
                    })
                    .collect(),
            },
            Head::None => Head::None,
        };
        Rule {
            head,
            body: r.body.iter().map(|l| self.literal(l)).collect(),
        }
    }
}
