use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use crate::syntax::{
    Aggregate, AggregateElement, Atom, ChoiceElement, Head, HeadAtom, Literal, PredicateSig,
    Program, Rule, Statement, Term, TheoryAtom,
};

pub type AtomId = usize;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GroundAtom {
    Regular(Atom),
    Theory(TheoryAtom),
}

impl GroundAtom {
    pub fn is_lc(&self) -> bool {
        matches!(self, GroundAtom::Theory(t) if t.kind.is_constraint())
    }

    pub fn as_theory(&self) -> Option<&TheoryAtom> {
        match self {
            GroundAtom::Theory(t) => Some(t),
            GroundAtom::Regular(_) => None,
        }
    }
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroundAtom::Regular(a) => write!(f, "{a}"),
            GroundAtom::Theory(t) => write!(f, "{t}"),
        }
    }
}

/// Interned ground atoms, keyed by canonical printed form.
#[derive(Clone, Debug, Default)]
pub struct AtomTable {
    atoms: Vec<GroundAtom>,
    names: Vec<String>,
    index: HashMap<String, AtomId>,
}

impl AtomTable {
    pub fn intern(&mut self, atom: GroundAtom) -> AtomId {
        let name = atom.to_string();
        if let Some(&id) = self.index.get(&name) {
            return id;
        }
        let id = self.atoms.len();
        self.index.insert(name.clone(), id);
        self.names.push(name);
        self.atoms.push(atom);
        id
    }

    pub fn lookup(&self, name: &str) -> Option<AtomId> {
        self.index.get(name).copied()
    }

    pub fn get(&self, id: AtomId) -> &GroundAtom {
        &self.atoms[id]
    }

    pub fn name(&self, id: AtomId) -> &str {
        &self.names[id]
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (AtomId, &GroundAtom)> {
        self.atoms.iter().enumerate()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GroundHead {
    Atom(AtomId),
    Choice {
        lower: Option<u64>,
        upper: Option<u64>,
        elements: Vec<AtomId>,
    },
    None,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GroundLiteral {
    Atom {
        atom: AtomId,
        negated: bool,
    },
    /// Cardinality aggregate over (atom, negated) elements.
    Count {
        negated: bool,
        lower: Option<u64>,
        upper: Option<u64>,
        elements: Vec<(AtomId, bool)>,
    },
}

impl GroundLiteral {
    pub fn pos(atom: AtomId) -> Self {
        GroundLiteral::Atom {
            atom,
            negated: false,
        }
    }

    pub fn neg(atom: AtomId) -> Self {
        GroundLiteral::Atom {
            atom,
            negated: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroundRule {
    pub head: GroundHead,
    pub body: Vec<GroundLiteral>,
}

impl GroundRule {
    pub fn fact(atom: AtomId) -> Self {
        GroundRule {
            head: GroundHead::Atom(atom),
            body: Vec::new(),
        }
    }

    pub fn constraint(body: Vec<GroundLiteral>) -> Self {
        GroundRule {
            head: GroundHead::None,
            body,
        }
    }

    pub fn choice(atom: AtomId) -> Self {
        GroundRule {
            head: GroundHead::Choice {
                lower: None,
                upper: None,
                elements: vec![atom],
            },
            body: Vec::new(),
        }
    }

    pub fn head_atoms(&self) -> &[AtomId] {
        match &self.head {
            GroundHead::Atom(a) => std::slice::from_ref(a),
            GroundHead::Choice { elements, .. } => elements,
            GroundHead::None => &[],
        }
    }
}

/// A variable-free program over interned atoms.
#[derive(Clone, Debug, Default)]
pub struct GroundProgram {
    pub atoms: AtomTable,
    pub rules: Vec<GroundRule>,
    pub externals: Vec<AtomId>,
    pub shows: Vec<Option<PredicateSig>>,
    /// Printed names of theory variables declared real-valued.
    pub reals: BTreeSet<String>,
    seen: HashSet<GroundRule>,
}

impl GroundProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, atom: GroundAtom) -> AtomId {
        self.atoms.intern(atom)
    }

    pub fn intern_regular(&mut self, atom: Atom) -> AtomId {
        self.atoms.intern(GroundAtom::Regular(atom))
    }

    /// Appends a rule unless an identical one is already present.
    pub fn add_rule(&mut self, rule: GroundRule) -> bool {
        if self.seen.contains(&rule) {
            return false;
        }
        self.seen.insert(rule.clone());
        self.rules.push(rule);
        true
    }

    /// Removes every rule, keeping atoms and declarations.
    pub fn clear_rules(&mut self) {
        self.rules.clear();
        self.seen.clear();
    }

    pub fn add_external(&mut self, atom: AtomId) {
        if !self.externals.contains(&atom) {
            self.externals.push(atom);
        }
    }

    /// Atoms occurring in some rule head, i.e. head(P).
    pub fn head_atoms(&self) -> HashSet<AtomId> {
        self.rules
            .iter()
            .flat_map(|r| r.head_atoms().iter().copied())
            .collect()
    }

    /// All linear constraint atoms (`&sum`, `&diff`) occurring in rules.
    pub fn lc_atoms(&self) -> Vec<AtomId> {
        let mut used: BTreeSet<AtomId> = BTreeSet::new();
        for rule in &self.rules {
            used.extend(rule.head_atoms().iter().copied());
            for lit in &rule.body {
                match lit {
                    GroundLiteral::Atom { atom, .. } => {
                        used.insert(*atom);
                    }
                    GroundLiteral::Count { elements, .. } => {
                        used.extend(elements.iter().map(|e| e.0));
                    }
                }
            }
        }
        used.into_iter()
            .filter(|&id| self.atoms.get(id).is_lc())
            .collect()
    }

    /// Printed names of every theory variable mentioned by a theory atom.
    pub fn theory_variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for (_, atom) in self.atoms.iter() {
            if let GroundAtom::Theory(t) = atom {
                for element in &t.elements {
                    collect_theory_vars(&element.term, &mut out);
                }
                if let Some((_, Term::Sym(_) | Term::Func(..))) = &t.guard {
                    // `&dom{..}=x` names its variable in the guard
                    if let Some((_, term)) = &t.guard {
                        out.insert(term.to_string());
                    }
                }
            }
        }
        out
    }

    pub fn regular_atom(&self, id: AtomId) -> Option<&Atom> {
        match self.atoms.get(id) {
            GroundAtom::Regular(a) => Some(a),
            GroundAtom::Theory(_) => None,
        }
    }

    /// Converts back to syntax, e.g. for printing.
    pub fn to_program(&self) -> Program {
        let mut program = Program::new();
        for rule in &self.rules {
            program
                .statements
                .push(Statement::Rule(self.rule_to_syntax(rule)));
        }
        for &e in &self.externals {
            if let Some(atom) = self.regular_atom(e) {
                program.statements.push(Statement::External {
                    atom: atom.clone(),
                    body: Vec::new(),
                });
            }
        }
        for show in &self.shows {
            program.statements.push(Statement::Show(show.clone()));
        }
        if !self.reals.is_empty() {
            let terms = self
                .reals
                .iter()
                .map(|name| {
                    crate::syntax::parse_program(&format!("#real {name}."))
                        .ok()
                        .and_then(|p| match p.statements.into_iter().next() {
                            Some(Statement::Real(mut t)) => t.pop(),
                            _ => None,
                        })
                        .unwrap_or_else(|| Term::Sym(name.clone()))
                })
                .collect();
            program.statements.push(Statement::Real(terms));
        }
        program
    }

    fn head_atom_syntax(&self, id: AtomId) -> HeadAtom {
        match self.atoms.get(id) {
            GroundAtom::Regular(a) => HeadAtom::Regular(a.clone()),
            GroundAtom::Theory(t) => HeadAtom::Theory(t.clone()),
        }
    }

    fn literal_syntax(&self, id: AtomId, negated: bool) -> Literal {
        match self.atoms.get(id) {
            GroundAtom::Regular(a) => Literal::Atom {
                negated,
                atom: a.clone(),
            },
            GroundAtom::Theory(t) => Literal::Theory {
                negated,
                atom: t.clone(),
            },
        }
    }

    pub fn rule_to_syntax(&self, rule: &GroundRule) -> Rule {
        let head = match &rule.head {
            GroundHead::Atom(a) => match self.head_atom_syntax(*a) {
                HeadAtom::Regular(a) => Head::Atom(a),
                HeadAtom::Theory(t) => Head::Theory(t),
            },
            GroundHead::Choice {
                lower,
                upper,
                elements,
            } => Head::Choice {
                lower: lower.map(|v| Term::int(v as i64)),
                upper: upper.map(|v| Term::int(v as i64)),
                elements: elements
                    .iter()
                    .map(|&e| ChoiceElement {
                        atom: self.head_atom_syntax(e),
                        condition: Vec::new(),
                    })
                    .collect(),
            },
            GroundHead::None => Head::None,
        };
        let body = rule
            .body
            .iter()
            .map(|lit| match lit {
                GroundLiteral::Atom { atom, negated } => self.literal_syntax(*atom, *negated),
                GroundLiteral::Count {
                    negated,
                    lower,
                    upper,
                    elements,
                } => Literal::Aggregate {
                    negated: *negated,
                    aggregate: Aggregate {
                        lower: lower.map(|v| Term::int(v as i64)),
                        upper: upper.map(|v| Term::int(v as i64)),
                        elements: elements
                            .iter()
                            .map(|&(a, n)| AggregateElement {
                                literal: self.literal_syntax(a, n),
                                condition: Vec::new(),
                            })
                            .collect(),
                    },
                },
            })
            .collect();
        Rule { head, body }
    }

    pub fn rule_text(&self, rule: &GroundRule) -> String {
        self.rule_to_syntax(rule).to_string()
    }
}

impl fmt::Display for GroundProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_program())
    }
}

fn collect_theory_vars(term: &Term, out: &mut BTreeSet<String>) {
    match term {
        Term::Sym(_) | Term::Func(..) => {
            out.insert(term.to_string());
        }
        Term::Binary(_, l, r) => {
            collect_theory_vars(l, out);
            collect_theory_vars(r, out);
        }
        Term::Neg(t) => collect_theory_vars(t, out),
        _ => {}
    }
}
