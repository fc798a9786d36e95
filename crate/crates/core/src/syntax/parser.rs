use num_bigint::BigInt;
use num_traits::Signed;

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::ParseError;
use crate::rational::parse_rational;

pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser { tokens, pos: 0 };
    let mut program = Program::new();
    while parser.peek() != &Tok::Eof {
        program.statements.push(parser.statement()?);
    }
    Ok(program)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn bump(&mut self) -> Tok {
        let tok = self.tokens[self.pos].tok.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn unexpected<T>(&self, expected: &[&str]) -> PResult<T> {
        let token = &self.tokens[self.pos];
        Err(ParseError::Syntax {
            line: token.line,
            column: token.column,
            found: token.tok.describe(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        })
    }

    fn semantic<T>(&self, at: usize, message: impl Into<String>) -> PResult<T> {
        let token = &self.tokens[at];
        Err(ParseError::Semantic {
            line: token.line,
            column: token.column,
            message: message.into(),
        })
    }

    fn expect(&mut self, tok: Tok) -> PResult<()> {
        if self.eat(&tok) {
            Ok(())
        } else {
            let text = format!("`{}`", tok.text());
            self.unexpected(&[&text])
        }
    }

    fn ident(&mut self) -> PResult<String> {
        let at = self.pos;
        match self.bump() {
            Tok::Ident(s) => Ok(s),
            _ => {
                self.pos = at;
                self.unexpected(&["identifier"])
            }
        }
    }

    fn statement(&mut self) -> PResult<Statement> {
        if let Tok::Directive(name) = self.peek().clone() {
            let at = self.pos;
            self.bump();
            return match name.as_str() {
                "program" => self.part_directive(),
                "external" => self.external_directive(),
                "show" => self.show_directive(),
                "real" => self.real_directive(),
                other => self.semantic(at, format!("unsupported directive `#{other}`")),
            };
        }
        Ok(Statement::Rule(self.rule()?))
    }

    fn part_directive(&mut self) -> PResult<Statement> {
        let name = self.ident()?;
        let mut params = Vec::new();
        if self.eat(&Tok::LParen) {
            loop {
                params.push(self.ident()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RParen)?;
        }
        self.expect(Tok::Dot)?;
        Ok(Statement::Part { name, params })
    }

    fn external_directive(&mut self) -> PResult<Statement> {
        let at = self.pos;
        let term = self.term()?;
        let atom = self.term_to_atom(term, at)?;
        let mut body = Vec::new();
        if self.eat(&Tok::Colon) {
            body = self.body()?;
        }
        self.expect(Tok::Dot)?;
        Ok(Statement::External { atom, body })
    }

    fn show_directive(&mut self) -> PResult<Statement> {
        if self.eat(&Tok::Dot) {
            return Ok(Statement::Show(None));
        }
        let name = self.ident()?;
        self.expect(Tok::Slash)?;
        let at = self.pos;
        let arity = match self.bump() {
            Tok::Int(v) => v.to_string().parse::<usize>().unwrap_or(usize::MAX),
            _ => {
                self.pos = at;
                return self.unexpected(&["arity"]);
            }
        };
        self.expect(Tok::Dot)?;
        Ok(Statement::Show(Some(PredicateSig { name, arity })))
    }

    fn real_directive(&mut self) -> PResult<Statement> {
        let mut terms = vec![self.term()?];
        while self.eat(&Tok::Comma) {
            terms.push(self.term()?);
        }
        self.expect(Tok::Dot)?;
        Ok(Statement::Real(terms))
    }

    fn rule(&mut self) -> PResult<Rule> {
        let head = if matches!(self.peek(), Tok::If) {
            Head::None
        } else {
            self.head()?
        };
        if matches!(self.peek(), Tok::Semi | Tok::Bar) {
            let at = self.pos;
            return self.semantic(at, "disjunctive rule heads are not supported");
        }
        let mut body = Vec::new();
        if self.eat(&Tok::If) {
            if self.peek() != &Tok::Dot {
                body = self.body()?;
            }
        } else if head == Head::None {
            return self.unexpected(&["`:-`"]);
        }
        self.expect(Tok::Dot)?;
        Ok(Rule { head, body })
    }

    fn head(&mut self) -> PResult<Head> {
        let at = self.pos;
        match self.peek() {
            Tok::Amp => return Ok(Head::Theory(self.theory_atom()?)),
            Tok::LBrace => return self.choice(None),
            _ => {}
        }
        let term = self.term()?;
        if self.peek() == &Tok::LBrace {
            return self.choice(Some(term));
        }
        Ok(Head::Atom(self.term_to_atom(term, at)?))
    }

    fn choice(&mut self, lower: Option<Term>) -> PResult<Head> {
        let at = self.pos;
        self.expect(Tok::LBrace)?;
        let mut elements = Vec::new();
        if self.peek() != &Tok::RBrace {
            loop {
                let element_at = self.pos;
                let atom = if self.peek() == &Tok::Amp {
                    HeadAtom::Theory(self.theory_atom()?)
                } else {
                    let term = self.term()?;
                    HeadAtom::Regular(self.term_to_atom(term, element_at)?)
                };
                let condition = self.condition()?;
                elements.push(ChoiceElement { atom, condition });
                if !self.eat(&Tok::Semi) {
                    break;
                }
            }
        }
        self.expect(Tok::RBrace)?;
        let upper = self.upper_bound()?;
        self.check_bounds(at, &lower, &upper)?;
        Ok(Head::Choice {
            lower,
            upper,
            elements,
        })
    }

    fn check_bounds(&self, at: usize, lower: &Option<Term>, upper: &Option<Term>) -> PResult<()> {
        let as_int = |t: &Option<Term>| match t {
            Some(Term::Int(v)) => Some(v.clone()),
            _ => None,
        };
        if let Some(l) = as_int(lower) {
            if l.is_negative() {
                return self.semantic(at, "cardinality lower bound must be non-negative");
            }
            if let Some(u) = as_int(upper) {
                if l > u {
                    return self.semantic(at, "cardinality lower bound exceeds upper bound");
                }
            }
        }
        if let Some(u) = as_int(upper) {
            if u.is_negative() {
                return self.semantic(at, "cardinality upper bound must be non-negative");
            }
        }
        Ok(())
    }

    fn upper_bound(&mut self) -> PResult<Option<Term>> {
        match self.peek() {
            Tok::Int(_) | Tok::Var(_) | Tok::Ident(_) | Tok::LParen | Tok::Minus => {
                Ok(Some(self.term()?))
            }
            _ => Ok(None),
        }
    }

    fn condition(&mut self) -> PResult<Vec<Literal>> {
        let mut condition = Vec::new();
        if self.eat(&Tok::Colon) {
            loop {
                condition.push(self.simple_literal()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        Ok(condition)
    }

    fn body(&mut self) -> PResult<Vec<Literal>> {
        let mut body = vec![self.literal()?];
        while matches!(self.peek(), Tok::Comma | Tok::Semi) {
            self.bump();
            body.push(self.literal()?);
        }
        Ok(body)
    }

    /// Regular literal or comparison; used inside conditions.
    fn simple_literal(&mut self) -> PResult<Literal> {
        let at = self.pos;
        let negated = self.eat(&Tok::Not);
        let term = self.term()?;
        if let Some(op) = self.comparison_op() {
            if negated {
                return self.semantic(at, "comparisons cannot be negated");
            }
            let right = self.term()?;
            return Ok(Literal::Compare {
                op,
                left: term,
                right,
            });
        }
        let atom = self.term_to_atom(term, at)?;
        Ok(Literal::Atom { negated, atom })
    }

    fn literal(&mut self) -> PResult<Literal> {
        let at = self.pos;
        let negated = self.eat(&Tok::Not);
        match self.peek() {
            Tok::Amp => {
                let atom = self.theory_atom()?;
                if !atom.kind.is_constraint() {
                    return self.semantic(
                        at,
                        format!("`&{}` may only occur in rule heads", atom.kind.name()),
                    );
                }
                return Ok(Literal::Theory { negated, atom });
            }
            Tok::LBrace => {
                let aggregate = self.aggregate(None)?;
                return Ok(Literal::Aggregate { negated, aggregate });
            }
            _ => {}
        }
        let term = self.term()?;
        if self.peek() == &Tok::LBrace {
            let aggregate = self.aggregate(Some(term))?;
            return Ok(Literal::Aggregate { negated, aggregate });
        }
        if let Some(op) = self.comparison_op() {
            if negated {
                return self.semantic(at, "comparisons cannot be negated");
            }
            let right = self.term()?;
            return Ok(Literal::Compare {
                op,
                left: term,
                right,
            });
        }
        let atom = self.term_to_atom(term, at)?;
        Ok(Literal::Atom { negated, atom })
    }

    fn aggregate(&mut self, lower: Option<Term>) -> PResult<Aggregate> {
        let at = self.pos;
        self.expect(Tok::LBrace)?;
        let mut elements = Vec::new();
        if self.peek() != &Tok::RBrace {
            loop {
                let literal = self.simple_literal()?;
                if matches!(literal, Literal::Compare { .. }) {
                    return self.semantic(at, "aggregate elements must be atoms");
                }
                let condition = self.condition()?;
                elements.push(AggregateElement { literal, condition });
                if !self.eat(&Tok::Semi) {
                    break;
                }
            }
        }
        self.expect(Tok::RBrace)?;
        let upper = self.upper_bound()?;
        self.check_bounds(at, &lower, &upper)?;
        Ok(Aggregate {
            lower,
            upper,
            elements,
        })
    }

    fn comparison_op(&mut self) -> Option<CmpOp> {
        let op = match self.peek() {
            Tok::Eq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            _ => return None,
        };
        self.bump();
        Some(op)
    }

    fn relation(&mut self) -> PResult<Relation> {
        let rel = match self.peek() {
            Tok::Le => Relation::Le,
            Tok::Lt => Relation::Lt,
            Tok::Ge => Relation::Ge,
            Tok::Gt => Relation::Gt,
            Tok::Eq => Relation::Eq,
            Tok::Ne => Relation::Ne,
            _ => return self.unexpected(&["`<=`", "`<`", "`>=`", "`>`", "`=`", "`!=`"]),
        };
        self.bump();
        Ok(rel)
    }

    fn theory_atom(&mut self) -> PResult<TheoryAtom> {
        let at = self.pos;
        self.expect(Tok::Amp)?;
        let kind_at = self.pos;
        let kind = match self.ident()?.as_str() {
            "sum" => TheoryKind::Sum,
            "diff" => TheoryKind::Diff,
            "dom" => TheoryKind::Dom,
            "minimize" => TheoryKind::Minimize,
            "maximize" => TheoryKind::Maximize,
            other => return self.semantic(kind_at, format!("unknown theory atom `&{other}`")),
        };
        self.expect(Tok::LBrace)?;
        let mut elements = Vec::new();
        if self.peek() != &Tok::RBrace {
            loop {
                let mut term = self.term()?;
                if self.eat(&Tok::DotDot) {
                    let upper = self.term()?;
                    term = Term::Interval(Box::new(term), Box::new(upper));
                }
                let condition = self.condition()?;
                elements.push(TheoryElement { term, condition });
                if !self.eat(&Tok::Semi) {
                    break;
                }
            }
        }
        self.expect(Tok::RBrace)?;
        let guard = match kind {
            TheoryKind::Minimize | TheoryKind::Maximize => None,
            _ => {
                let rel = self.relation()?;
                Some((rel, self.term()?))
            }
        };
        let atom = TheoryAtom {
            kind,
            elements,
            guard,
        };
        self.validate_theory(&atom, at)?;
        Ok(atom)
    }

    fn validate_theory(&self, atom: &TheoryAtom, at: usize) -> PResult<()> {
        let has_interval = atom
            .elements
            .iter()
            .any(|e| matches!(e.term, Term::Interval(..)));
        match atom.kind {
            TheoryKind::Diff => {
                let rel = atom.guard.as_ref().map(|g| g.0);
                if !matches!(
                    rel,
                    Some(Relation::Le | Relation::Lt | Relation::Ge | Relation::Gt)
                ) {
                    return self.semantic(at, "`&diff` accepts only <=, <, >=, >");
                }
                match atom.elements.as_slice() {
                    [e] if matches!(e.term, Term::Binary(BinOp::Sub, ..))
                        && e.condition.is_empty() => {}
                    _ => {
                        return self.semantic(
                            at,
                            "`&diff` takes exactly one unconditioned element of the form `x-y`",
                        )
                    }
                }
            }
            TheoryKind::Dom => {
                let ok = matches!(atom.guard, Some((Relation::Eq, _)))
                    && matches!(atom.elements.as_slice(), [e] if matches!(e.term, Term::Interval(..)) && e.condition.is_empty());
                if !ok {
                    return self.semantic(at, "`&dom` has the form `&dom{lb..ub}=x`");
                }
                if let Term::Interval(lb, ub) = &atom.elements[0].term {
                    if let (Some(l), Some(u)) = (numeric(lb), numeric(ub)) {
                        if l > u {
                            return self.semantic(at, "`&dom` lower bound exceeds upper bound");
                        }
                    }
                }
            }
            _ => {
                if has_interval {
                    return self.semantic(at, "intervals are only allowed in `&dom`");
                }
            }
        }
        Ok(())
    }

    fn term_to_atom(&self, term: Term, at: usize) -> PResult<Atom> {
        match term {
            Term::Sym(name) => Ok(Atom::new(&name, Vec::new())),
            Term::Func(name, args) => Ok(Atom::new(&name, args)),
            _ => self.semantic(at, "expected an atom"),
        }
    }

    fn term(&mut self) -> PResult<Term> {
        let mut left = self.product()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            self.bump();
            let right = self.product()?;
            left = Term::Binary(op, Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn product(&mut self) -> PResult<Term> {
        let mut left = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => break,
            };
            self.bump();
            let right = self.unary()?;
            left = Term::Binary(op, Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn unary(&mut self) -> PResult<Term> {
        if self.eat(&Tok::Minus) {
            let inner = self.unary()?;
            return Ok(match inner {
                Term::Int(v) if !v.is_negative() => Term::Int(-v),
                Term::Rat(r) if !r.is_negative() => Term::Rat(-r),
                other => Term::Neg(Box::new(other)),
            });
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Term> {
        let at = self.pos;
        match self.bump() {
            Tok::Int(v) => Ok(Term::Int(v)),
            Tok::Decimal(s) => match parse_rational(&s) {
                Some(r) => Ok(Term::Rat(r)),
                None => self.semantic(at, format!("malformed number `{s}`")),
            },
            Tok::Str(s) => Ok(match parse_rational(&s) {
                Some(r) => Term::Rat(r),
                None => Term::Str(s),
            }),
            Tok::Var(v) => Ok(Term::Var(v)),
            Tok::Ident(name) => {
                if self.peek() == &Tok::LParen && self.peek_at(1) != &Tok::RParen {
                    self.bump();
                    let mut args = vec![self.term()?];
                    while self.eat(&Tok::Comma) {
                        args.push(self.term()?);
                    }
                    self.expect(Tok::RParen)?;
                    Ok(Term::Func(name, args))
                } else if self.peek() == &Tok::LParen {
                    self.semantic(at, "function terms need at least one argument")
                } else {
                    Ok(Term::Sym(name))
                }
            }
            Tok::LParen => {
                let inner = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            _ => {
                self.pos = at;
                self.unexpected(&["term"])
            }
        }
    }
}

fn numeric(term: &Term) -> Option<crate::rational::Rational> {
    match term {
        Term::Int(v) => Some(crate::rational::Rational::from_integer(BigInt::clone(v))),
        Term::Rat(r) => Some(r.clone()),
        _ => None,
    }
}
