//! Canonical text form. Printing then parsing yields a structurally equal
//! program, and the printed form of a theory atom is its identity key.

use std::fmt::{self, Display, Formatter, Write};

use num_traits::Signed;

use super::ast::*;
use crate::rational::{to_decimal, to_fraction, Rational};

fn precedence(term: &Term) -> u8 {
    match term {
        Term::Interval(..) => 0,
        Term::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
        Term::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
        Term::Neg(_) => 3,
        Term::Int(v) if v.is_negative() => 3,
        Term::Rat(_) => 4,
        _ => 4,
    }
}

fn op_precedence(op: BinOp) -> u8 {
    match op {
        BinOp::Add | BinOp::Sub => 1,
        BinOp::Mul | BinOp::Div => 2,
    }
}

fn write_operand(f: &mut Formatter<'_>, term: &Term, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({term})")
    } else {
        write!(f, "{term}")
    }
}

pub fn quote_rational(value: &Rational) -> String {
    match to_decimal(value) {
        Some(d) => format!("\"{d}\""),
        None => format!("\"{}\"", to_fraction(value)),
    }
}

fn write_string(f: &mut Formatter<'_>, s: &str) -> fmt::Result {
    f.write_char('"')?;
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            c => f.write_char(c)?,
        }
    }
    f.write_char('"')
}

impl Display for Term {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Term::Int(v) => write!(f, "{v}"),
            Term::Rat(r) => f.write_str(&quote_rational(r)),
            Term::Str(s) => write_string(f, s),
            Term::Sym(s) | Term::Var(s) => f.write_str(s),
            Term::Func(name, args) => {
                write!(f, "{name}(")?;
                write_list(f, args, ",")?;
                f.write_char(')')
            }
            Term::Neg(inner) => {
                f.write_char('-')?;
                write_operand(f, inner, precedence(inner) < 3)
            }
            Term::Binary(op, l, r) => {
                let p = op_precedence(*op);
                write_operand(f, l, precedence(l) < p)?;
                f.write_str(match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                })?;
                write_operand(f, r, precedence(r) <= p)
            }
            Term::Interval(l, r) => {
                write_operand(f, l, precedence(l) == 0)?;
                f.write_str("..")?;
                write_operand(f, r, precedence(r) == 0)
            }
        }
    }
}

fn write_list<T: Display>(f: &mut Formatter<'_>, items: &[T], sep: &str) -> fmt::Result {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        write!(f, "{item}")?;
    }
    Ok(())
}

fn write_condition(f: &mut Formatter<'_>, condition: &[Literal]) -> fmt::Result {
    if !condition.is_empty() {
        f.write_char(':')?;
        write_list(f, condition, ",")?;
    }
    Ok(())
}

impl Display for Atom {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            f.write_char('(')?;
            write_list(f, &self.args, ",")?;
            f.write_char(')')?;
        }
        Ok(())
    }
}

impl Display for Relation {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl Display for TheoryAtom {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "&{}{{", self.kind.name())?;
        for (i, element) in self.elements.iter().enumerate() {
            if i > 0 {
                f.write_char(';')?;
            }
            write!(f, "{}", element.term)?;
            write_condition(f, &element.condition)?;
        }
        f.write_char('}')?;
        if let Some((rel, rhs)) = &self.guard {
            write!(f, "{rel}{rhs}")?;
        }
        Ok(())
    }
}

impl Display for HeadAtom {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            HeadAtom::Regular(a) => write!(f, "{a}"),
            HeadAtom::Theory(t) => write!(f, "{t}"),
        }
    }
}

fn write_bounded<T>(
    f: &mut Formatter<'_>,
    lower: &Option<Term>,
    upper: &Option<Term>,
    elements: &[T],
    mut element: impl FnMut(&mut Formatter<'_>, &T) -> fmt::Result,
) -> fmt::Result {
    if let Some(l) = lower {
        write!(f, "{l}")?;
    }
    f.write_char('{')?;
    for (i, e) in elements.iter().enumerate() {
        if i > 0 {
            f.write_char(';')?;
        }
        element(f, e)?;
    }
    f.write_char('}')?;
    if let Some(u) = upper {
        write!(f, "{u}")?;
    }
    Ok(())
}

impl Display for Aggregate {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_bounded(f, &self.lower, &self.upper, &self.elements, |f, e| {
            write!(f, "{}", e.literal)?;
            write_condition(f, &e.condition)
        })
    }
}

impl Display for Literal {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        let not = |negated: &bool| if *negated { "not " } else { "" };
        match self {
            Literal::Atom { negated, atom } => write!(f, "{}{atom}", not(negated)),
            Literal::Theory { negated, atom } => write!(f, "{}{atom}", not(negated)),
            Literal::Aggregate { negated, aggregate } => {
                write!(f, "{}{aggregate}", not(negated))
            }
            Literal::Compare { op, left, right } => write!(f, "{left}{}{right}", op.symbol()),
        }
    }
}

impl Display for Head {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Head::Atom(a) => write!(f, "{a}"),
            Head::Theory(t) => write!(f, "{t}"),
            Head::Choice {
                lower,
                upper,
                elements,
            } => write_bounded(f, lower, upper, elements, |f, e| {
                write!(f, "{}", e.atom)?;
                write_condition(f, &e.condition)
            }),
            Head::None => Ok(()),
        }
    }
}

impl Display for Rule {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if !self.body.is_empty() {
            if !matches!(self.head, Head::None) {
                f.write_char(' ')?;
            }
            f.write_str(":- ")?;
            write_list(f, &self.body, ", ")?;
        }
        f.write_char('.')
    }
}

impl Display for Statement {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Statement::Rule(r) => write!(f, "{r}"),
            Statement::Part { name, params } => {
                write!(f, "#program {name}")?;
                if !params.is_empty() {
                    write!(f, "({})", params.join(","))?;
                }
                f.write_char('.')
            }
            Statement::External { atom, body } => {
                write!(f, "#external {atom}")?;
                if !body.is_empty() {
                    f.write_str(" : ")?;
                    write_list(f, body, ", ")?;
                }
                f.write_char('.')
            }
            Statement::Show(None) => f.write_str("#show."),
            Statement::Show(Some(sig)) => write!(f, "#show {}/{}.", sig.name, sig.arity),
            Statement::Real(terms) => {
                f.write_str("#real ")?;
                write_list(f, terms, ", ")?;
                f.write_char('.')
            }
        }
    }
}

impl Display for Program {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        for statement in &self.statements {
            writeln!(f, "{statement}")?;
        }
        Ok(())
    }
}

pub fn print_program(program: &Program) -> String {
    program.to_string()
}
