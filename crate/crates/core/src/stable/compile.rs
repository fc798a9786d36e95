//! Flat rule representation used by the search and the stability check.

use crate::ground::{GroundHead, GroundLiteral, GroundProgram};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lit {
    Atom {
        atom: usize,
        negated: bool,
    },
    /// Index into [`Compiled::aggs`].
    Count {
        agg: usize,
        negated: bool,
    },
}

/// Cardinality constraint `lower { elements } upper`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Agg {
    pub lower: u64,
    pub upper: Option<u64>,
    pub elements: Vec<(usize, bool)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CHead {
    Atom(usize),
    Choice(Vec<usize>),
    None,
}

#[derive(Clone, Debug)]
pub struct CRule {
    pub head: CHead,
    pub body: Vec<Lit>,
}

#[derive(Clone, Debug)]
pub struct Compiled {
    pub num_atoms: usize,
    pub rules: Vec<CRule>,
    pub aggs: Vec<Agg>,
    /// Rules whose body mentions the atom (directly or in an aggregate).
    pub occurs: Vec<Vec<usize>>,
    /// Rules with the atom in their head.
    pub heads: Vec<Vec<usize>>,
}

impl Compiled {
    pub fn new(program: &GroundProgram) -> Self {
        let mut compiled = Compiled {
            num_atoms: program.atoms.len(),
            rules: Vec::new(),
            aggs: Vec::new(),
            occurs: Vec::new(),
            heads: Vec::new(),
        };
        for rule in &program.rules {
            let body: Vec<Lit> = rule.body.iter().map(|lit| compiled.literal(lit)).collect();
            match &rule.head {
                GroundHead::Atom(a) => compiled.rules.push(CRule {
                    head: CHead::Atom(*a),
                    body,
                }),
                GroundHead::None => compiled.rules.push(CRule {
                    head: CHead::None,
                    body,
                }),
                GroundHead::Choice {
                    lower,
                    upper,
                    elements,
                } => {
                    let counted: Vec<(usize, bool)> =
                        elements.iter().map(|&e| (e, false)).collect();
                    compiled.rules.push(CRule {
                        head: CHead::Choice(elements.clone()),
                        body: body.clone(),
                    });
                    // Bounds become integrity constraints over the elements.
                    if let Some(l) = lower.filter(|&l| l > 0) {
                        let agg = compiled.add_agg(l, None, counted.clone());
                        let mut b = body.clone();
                        b.push(Lit::Count { agg, negated: true });
                        compiled.rules.push(CRule {
                            head: CHead::None,
                            body: b,
                        });
                    }
                    if let Some(u) = upper {
                        let agg = compiled.add_agg(u + 1, None, counted);
                        let mut b = body;
                        b.push(Lit::Count {
                            agg,
                            negated: false,
                        });
                        compiled.rules.push(CRule {
                            head: CHead::None,
                            body: b,
                        });
                    }
                }
            }
        }
        compiled.index();
        compiled
    }

    fn add_agg(&mut self, lower: u64, upper: Option<u64>, elements: Vec<(usize, bool)>) -> usize {
        self.aggs.push(Agg {
            lower,
            upper,
            elements,
        });
        self.aggs.len() - 1
    }

    fn literal(&mut self, lit: &GroundLiteral) -> Lit {
        match lit {
            GroundLiteral::Atom { atom, negated } => Lit::Atom {
                atom: *atom,
                negated: *negated,
            },
            GroundLiteral::Count {
                negated,
                lower,
                upper,
                elements,
            } => {
                let agg = self.add_agg(lower.unwrap_or(0), *upper, elements.clone());
                Lit::Count {
                    agg,
                    negated: *negated,
                }
            }
        }
    }

    fn index(&mut self) {
        self.occurs = vec![Vec::new(); self.num_atoms];
        self.heads = vec![Vec::new(); self.num_atoms];
        for (i, rule) in self.rules.iter().enumerate() {
            match &rule.head {
                CHead::Atom(a) => self.heads[*a].push(i),
                CHead::Choice(hs) => {
                    for &h in hs {
                        if !self.heads[h].contains(&i) {
                            self.heads[h].push(i);
                        }
                    }
                }
                CHead::None => {}
            }
            for lit in &rule.body {
                let mut touch = |a: usize| {
                    if self.occurs[a].last() != Some(&i) {
                        self.occurs[a].push(i);
                    }
                };
                match *lit {
                    Lit::Atom { atom, .. } => touch(atom),
                    Lit::Count { agg, .. } => {
                        for &(a, _) in &self.aggs[agg].elements {
                            touch(a);
                        }
                    }
                }
            }
        }
    }

    /// Truth of a count literal under a total interpretation.
    pub fn count_holds(&self, agg: usize, x: &[bool]) -> bool {
        let agg = &self.aggs[agg];
        let n = agg.elements.iter().filter(|&&(a, neg)| x[a] != neg).count() as u64;
        n >= agg.lower && agg.upper.is_none_or(|u| n <= u)
    }

    pub fn lit_holds(&self, lit: Lit, x: &[bool]) -> bool {
        match lit {
            Lit::Atom { atom, negated } => x[atom] != negated,
            Lit::Count { agg, negated } => self.count_holds(agg, x) != negated,
        }
    }

    /// Whether `x` satisfies every rule classically.
    pub fn is_model(&self, x: &[bool]) -> bool {
        self.rules.iter().all(|r| {
            let body = r.body.iter().all(|&l| self.lit_holds(l, x));
            match &r.head {
                CHead::Atom(h) => !body || x[*h],
                CHead::Choice(_) => true,
                CHead::None => !body,
            }
        })
    }

    /// Least model of the reduct of the program relative to `x`.
    ///
    /// Negative literals and negated aggregates are evaluated in `x`; a
    /// positive aggregate keeps its positive elements with the lower bound
    /// reduced by the number of negative elements satisfied by `x`, while its
    /// upper bound is checked against `x`. Choice rules yield their heads
    /// that are in `x`.
    pub fn least_model_of_reduct(&self, x: &[bool]) -> Vec<bool> {
        // Rules surviving the reduct, with positive parts to be derived.
        struct Reduced {
            heads: Vec<usize>,
            atoms: Vec<usize>,
            /// (agg, remaining lower bound)
            counts: Vec<(usize, u64)>,
        }
        let mut reduced = Vec::new();
        'rules: for rule in &self.rules {
            let heads: Vec<usize> = match &rule.head {
                CHead::Atom(h) => vec![*h],
                CHead::Choice(hs) => hs.iter().copied().filter(|&h| x[h]).collect(),
                CHead::None => continue,
            };
            if heads.is_empty() {
                continue;
            }
            let mut atoms = Vec::new();
            let mut counts = Vec::new();
            for &lit in &rule.body {
                match lit {
                    Lit::Atom {
                        atom,
                        negated: true,
                    } => {
                        if x[atom] {
                            continue 'rules;
                        }
                    }
                    Lit::Atom {
                        atom,
                        negated: false,
                    } => atoms.push(atom),
                    Lit::Count { agg, negated: true } => {
                        if self.count_holds(agg, x) {
                            continue 'rules;
                        }
                    }
                    Lit::Count {
                        agg,
                        negated: false,
                    } => {
                        let a = &self.aggs[agg];
                        let total = a.elements.iter().filter(|&&(e, n)| x[e] != n).count() as u64;
                        if a.upper.is_some_and(|u| total > u) {
                            continue 'rules;
                        }
                        let satisfied_neg =
                            a.elements.iter().filter(|&&(e, n)| n && !x[e]).count() as u64;
                        counts.push((agg, a.lower.saturating_sub(satisfied_neg)));
                    }
                }
            }
            reduced.push(Reduced {
                heads,
                atoms,
                counts,
            });
        }

        let mut model = vec![false; self.num_atoms];
        let mut changed = true;
        while changed {
            changed = false;
            for r in &reduced {
                if r.heads.iter().all(|&h| model[h]) {
                    continue;
                }
                let fires = r.atoms.iter().all(|&a| model[a])
                    && r.counts.iter().all(|&(agg, need)| {
                        let have = self.aggs[agg]
                            .elements
                            .iter()
                            .filter(|&&(e, n)| !n && model[e])
                            .count() as u64;
                        have >= need
                    });
                if fires {
                    for &h in &r.heads {
                        if !model[h] {
                            model[h] = true;
                            changed = true;
                        }
                    }
                }
            }
        }
        model
    }

    /// `x` is stable iff it is a model and equals the least model of its reduct.
    pub fn is_stable(&self, x: &[bool]) -> bool {
        self.is_model(x) && self.least_model_of_reduct(x) == x
    }
}
