use num_bigint::BigInt;

use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Int(BigInt),
    /// Decimal constant, written quoted (`"1.5"`) in regular atoms.
    Rat(Rational),
    Str(String),
    Sym(String),
    Func(String, Vec<Term>),
    Var(String),
    Neg(Box<Term>),
    Binary(BinOp, Box<Term>, Box<Term>),
    /// `lb..ub`, only inside `&dom` elements.
    Interval(Box<Term>, Box<Term>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl Term {
    pub fn sym(name: &str) -> Self {
        Term::Sym(name.to_owned())
    }

    pub fn int(v: i64) -> Self {
        Term::Int(BigInt::from(v))
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Int(_) | Term::Rat(_) | Term::Str(_) | Term::Sym(_) => true,
            Term::Func(_, args) => args.iter().all(Term::is_ground),
            Term::Neg(t) => t.is_ground(),
            Term::Binary(_, l, r) | Term::Interval(l, r) => l.is_ground() && r.is_ground(),
        }
    }

    pub fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::Int(_) | Term::Rat(_) | Term::Str(_) | Term::Sym(_) => {}
            Term::Func(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            Term::Neg(t) => t.collect_vars(out),
            Term::Binary(_, l, r) | Term::Interval(l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: &str, args: Vec<Term>) -> Self {
        Atom {
            predicate: predicate.to_owned(),
            args,
        }
    }

    pub fn prop(predicate: &str) -> Self {
        Atom::new(predicate, Vec::new())
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
    Ne,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Lt => "<",
            Relation::Ge => ">=",
            Relation::Gt => ">",
            Relation::Eq => "=",
            Relation::Ne => "!=",
        }
    }

    /// The relation that holds exactly when `self` does not.
    pub fn complement(self) -> Relation {
        match self {
            Relation::Le => Relation::Gt,
            Relation::Lt => Relation::Ge,
            Relation::Ge => Relation::Lt,
            Relation::Gt => Relation::Le,
            Relation::Eq => Relation::Ne,
            Relation::Ne => Relation::Eq,
        }
    }

    pub fn holds(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            Relation::Le => ord != Greater,
            Relation::Lt => ord == Less,
            Relation::Ge => ord != Less,
            Relation::Gt => ord == Greater,
            Relation::Eq => ord == Equal,
            Relation::Ne => ord != Equal,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TheoryKind {
    Sum,
    Diff,
    Dom,
    Minimize,
    Maximize,
}

impl TheoryKind {
    pub fn name(self) -> &'static str {
        match self {
            TheoryKind::Sum => "sum",
            TheoryKind::Diff => "diff",
            TheoryKind::Dom => "dom",
            TheoryKind::Minimize => "minimize",
            TheoryKind::Maximize => "maximize",
        }
    }

    /// Sum and diff atoms stand for constraints; the others are
    /// declarations (bounds, objectives).
    pub fn is_constraint(self) -> bool {
        matches!(self, TheoryKind::Sum | TheoryKind::Diff)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TheoryElement {
    pub term: Term,
    pub condition: Vec<Literal>,
}

/// A linear constraint atom such as `&sum{"1.5"*x}<=7`.
///
/// Identity is syntactic: two atoms are the same atom iff their canonical
/// printed forms coincide.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TheoryAtom {
    pub kind: TheoryKind,
    pub elements: Vec<TheoryElement>,
    pub guard: Option<(Relation, Term)>,
}

impl TheoryAtom {
    pub fn is_ground(&self) -> bool {
        self.elements
            .iter()
            .all(|e| e.term.is_ground() && e.condition.iter().all(Literal::is_ground))
            && self.guard.as_ref().is_none_or(|(_, t)| t.is_ground())
    }

    pub fn key(&self) -> String {
        self.to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HeadAtom {
    Regular(Atom),
    Theory(TheoryAtom),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChoiceElement {
    pub atom: HeadAtom,
    pub condition: Vec<Literal>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AggregateElement {
    pub literal: Literal,
    pub condition: Vec<Literal>,
}

/// Cardinality aggregate `s{l1 : c1; ...}t` with optional bounds.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Aggregate {
    pub lower: Option<Term>,
    pub upper: Option<Term>,
    pub elements: Vec<AggregateElement>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Literal {
    Atom { negated: bool, atom: Atom },
    Theory { negated: bool, atom: TheoryAtom },
    Aggregate { negated: bool, aggregate: Aggregate },
    Compare { op: CmpOp, left: Term, right: Term },
}

impl Literal {
    pub fn pos(atom: Atom) -> Self {
        Literal::Atom {
            negated: false,
            atom,
        }
    }

    pub fn neg(atom: Atom) -> Self {
        Literal::Atom {
            negated: true,
            atom,
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Literal::Atom { atom, .. } => atom.is_ground(),
            Literal::Theory { atom, .. } => atom.is_ground(),
            Literal::Aggregate { aggregate, .. } => {
                aggregate.lower.as_ref().is_none_or(Term::is_ground)
                    && aggregate.upper.as_ref().is_none_or(Term::is_ground)
                    && aggregate.elements.iter().all(|e| {
                        e.literal.is_ground() && e.condition.iter().all(Literal::is_ground)
                    })
            }
            Literal::Compare { left, right, .. } => left.is_ground() && right.is_ground(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Head {
    Atom(Atom),
    Theory(TheoryAtom),
    Choice {
        lower: Option<Term>,
        upper: Option<Term>,
        elements: Vec<ChoiceElement>,
    },
    /// Integrity constraint.
    None,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    pub head: Head,
    pub body: Vec<Literal>,
}

impl Rule {
    pub fn fact(atom: Atom) -> Self {
        Rule {
            head: Head::Atom(atom),
            body: Vec::new(),
        }
    }

    pub fn constraint(body: Vec<Literal>) -> Self {
        Rule {
            head: Head::None,
            body,
        }
    }

    pub fn is_ground(&self) -> bool {
        let head = match &self.head {
            Head::Atom(a) => a.is_ground(),
            Head::Theory(t) => t.is_ground(),
            Head::Choice {
                lower,
                upper,
                elements,
            } => {
                lower.as_ref().is_none_or(Term::is_ground)
                    && upper.as_ref().is_none_or(Term::is_ground)
                    && elements.iter().all(|e| {
                        let atom = match &e.atom {
                            HeadAtom::Regular(a) => a.is_ground(),
                            HeadAtom::Theory(t) => t.is_ground(),
                        };
                        atom && e.condition.iter().all(Literal::is_ground)
                    })
            }
            Head::None => true,
        };
        head && self.body.iter().all(Literal::is_ground)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PredicateSig {
    pub name: String,
    pub arity: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Statement {
    Rule(Rule),
    /// `#program name(p1, ..., pk).`
    Part {
        name: String,
        params: Vec<String>,
    },
    /// `#external atom : body.`
    External {
        atom: Atom,
        body: Vec<Literal>,
    },
    /// `#show p/n.`, or `#show.` (hide everything not explicitly shown).
    Show(Option<PredicateSig>),
    /// `#real t1, ..., tk.` declares real-valued theory variables.
    Real(Vec<Term>),
}

pub const BASE_PART: &str = "base";

/// A named group of statements opened by `#program`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Part {
    pub name: String,
    pub params: Vec<String>,
    pub statements: Vec<Statement>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub statements: Vec<Statement>,
}

impl Program {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rules(&self) -> impl Iterator<Item = &Rule> {
        self.statements.iter().filter_map(|s| match s {
            Statement::Rule(r) => Some(r),
            _ => None,
        })
    }

    /// Groups statements by `#program` part. Statements before the first
    /// directive belong to `base`; repeated parts with the same name and
    /// arity are merged in order.
    pub fn parts(&self) -> Vec<Part> {
        let mut parts: Vec<Part> = vec![Part {
            name: BASE_PART.to_owned(),
            params: Vec::new(),
            statements: Vec::new(),
        }];
        let mut current = 0;
        for statement in &self.statements {
            if let Statement::Part { name, params } = statement {
                current = match parts
                    .iter()
                    .position(|p| &p.name == name && p.params.len() == params.len())
                {
                    Some(i) => i,
                    None => {
                        parts.push(Part {
                            name: name.clone(),
                            params: params.clone(),
                            statements: Vec::new(),
                        });
                        parts.len() - 1
                    }
                };
            } else {
                parts[current].statements.push(statement.clone());
            }
        }
        parts
    }

    pub fn part(&self, name: &str, arity: usize) -> Option<Part> {
        self.parts()
            .into_iter()
            .find(|p| p.name == name && p.params.len() == arity)
    }

    pub fn extend(&mut self, other: Program) {
        self.statements.extend(other.statements);
    }
}
