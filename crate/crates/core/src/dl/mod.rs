//! Incremental difference logic.
//!
//! A constraint `x - y <= k` is an edge `y -> x` of weight `k`. The store
//! keeps labels `d` with `d(x) - d(y) <= k` for every edge; inserting an
//! edge repairs the labels by label correction starting at its target. If
//! the repair reaches the edge's source, the parent chain closes a negative
//! cycle, which is returned as the conflict and the store is left as it was.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::rational::{ceil, floor, ratio, Rational};

/// Name of the variable fixed at zero; numeric constants in difference
/// terms are expressed against it.
pub const ZERO: &str = "0";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    Integer,
    Real,
}

pub fn default_epsilon() -> Rational {
    ratio(1, 1000)
}

/// `x - y <= k`, or `x - y < k` when `strict`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DiffConstraint {
    pub x: String,
    pub y: String,
    pub k: Rational,
    pub strict: bool,
}

impl DiffConstraint {
    pub fn le(x: &str, y: &str, k: Rational) -> Self {
        DiffConstraint {
            x: x.to_owned(),
            y: y.to_owned(),
            k,
            strict: false,
        }
    }

    pub fn lt(x: &str, y: &str, k: Rational) -> Self {
        DiffConstraint {
            strict: true,
            ..Self::le(x, y, k)
        }
    }

    /// Evaluates the constraint; unmentioned variables count as zero.
    pub fn holds(&self, assignment: &BTreeMap<String, Rational>) -> bool {
        let value = |v: &str| {
            if v == ZERO {
                Rational::zero()
            } else {
                assignment.get(v).cloned().unwrap_or_else(Rational::zero)
            }
        };
        let lhs = value(&self.x) - value(&self.y);
        if self.strict {
            lhs < self.k
        } else {
            lhs <= self.k
        }
    }

    /// Edge weight used by the store for this constraint.
    fn weight(&self, domain: Domain, epsilon: &Rational) -> Rational {
        match (domain, self.strict) {
            (Domain::Integer, false) => floor(&self.k),
            (Domain::Integer, true) => ceil(&self.k) - Rational::from_integer(1.into()),
            (Domain::Real, false) => self.k.clone(),
            (Domain::Real, true) => &self.k - epsilon,
        }
    }
}

impl fmt::Display for DiffConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rel = if self.strict { "<" } else { "<=" };
        write!(
            f,
            "{}-{}{}{}",
            self.x,
            self.y,
            rel,
            crate::rational::to_fraction(&self.k)
        )
    }
}

/// The constraint satisfied exactly when `c` is violated (up to `epsilon`
/// over the reals): `not (x - y <= k)` becomes `y - x <= -k - 1` over the
/// integers and `y - x <= -k - epsilon` over the reals; `not (x - y < k)`
/// becomes `y - x <= -k`.
pub fn negate(c: &DiffConstraint, domain: Domain, epsilon: &Rational) -> DiffConstraint {
    let k = if c.strict {
        -c.k.clone()
    } else {
        match domain {
            Domain::Integer => -floor(&c.k) - Rational::from_integer(1.into()),
            Domain::Real => -c.k.clone() - epsilon,
        }
    };
    DiffConstraint {
        x: c.y.clone(),
        y: c.x.clone(),
        k,
        strict: false,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DlError {
    #[error("strict difference constraint {0} over the reals requires epsilon mode")]
    StrictReal(String),
    #[error("assertion at level {level} below current level {current}")]
    LevelOrder { level: usize, current: usize },
    #[error("witness requested from an inconsistent store")]
    Inconsistent,
}

/// A constraint taking part in a conflict, with the caller's tag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Conflicting {
    pub tag: usize,
    pub constraint: DiffConstraint,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Check {
    Sat,
    /// A negative cycle; its constraints are jointly unsatisfiable and
    /// every proper subset is satisfiable.
    Unsat(Vec<Conflicting>),
}

#[derive(Clone, Debug)]
struct Edge {
    from: usize,
    to: usize,
    weight: Rational,
    tag: usize,
    constraint: DiffConstraint,
}

#[derive(Clone, Debug)]
pub struct DlStore {
    domain: Domain,
    epsilon: Rational,
    allow_epsilon: bool,
    names: Vec<String>,
    index: HashMap<String, usize>,
    labels: Vec<Rational>,
    out: Vec<Vec<usize>>,
    edges: Vec<Edge>,
    /// Per successful assertion: level, and the label values it overwrote.
    trail: Vec<(usize, Vec<(usize, Rational)>)>,
    level: usize,
}

impl DlStore {
    /// A store over `domain`. Strict constraints over the reals are only
    /// accepted when `allow_epsilon` is set; they are then tightened by
    /// `epsilon`.
    pub fn new(domain: Domain, epsilon: Rational, allow_epsilon: bool) -> Self {
        DlStore {
            domain,
            epsilon,
            allow_epsilon,
            names: Vec::new(),
            index: HashMap::new(),
            labels: Vec::new(),
            out: Vec::new(),
            edges: Vec::new(),
            trail: Vec::new(),
            level: 0,
        }
    }

    pub fn integer() -> Self {
        Self::new(Domain::Integer, default_epsilon(), false)
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn epsilon(&self) -> &Rational {
        &self.epsilon
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// Constraints currently asserted, with their tags, oldest first.
    pub fn asserted(&self) -> impl Iterator<Item = (usize, &DiffConstraint)> {
        self.edges.iter().map(|e| (e.tag, &e.constraint))
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    fn node(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.names.len();
        self.names.push(name.to_owned());
        self.index.insert(name.to_owned(), i);
        self.labels.push(Rational::zero());
        self.out.push(Vec::new());
        i
    }

    /// Negation of `c` under this store's domain and epsilon.
    pub fn negate(&self, c: &DiffConstraint) -> DiffConstraint {
        negate(c, self.domain, &self.epsilon)
    }

    /// Adds `c` at decision level `level`. On UNSAT nothing changes.
    pub fn assert(
        &mut self,
        c: DiffConstraint,
        level: usize,
        tag: usize,
    ) -> Result<Check, DlError> {
        if level < self.level {
            return Err(DlError::LevelOrder {
                level,
                current: self.level,
            });
        }
        if c.strict && self.domain == Domain::Real && !self.allow_epsilon {
            return Err(DlError::StrictReal(c.to_string()));
        }
        let weight = c.weight(self.domain, &self.epsilon);
        let u = self.node(&c.y);
        let v = self.node(&c.x);
        self.level = level;

        let new_edge = Edge {
            from: u,
            to: v,
            weight,
            tag,
            constraint: c,
        };
        let mut changed: Vec<(usize, Rational)> = Vec::new();
        let candidate = &self.labels[u] + &new_edge.weight;
        if candidate < self.labels[v] {
            if u == v {
                return Ok(Check::Unsat(vec![Conflicting {
                    tag: new_edge.tag,
                    constraint: new_edge.constraint,
                }]));
            }
            // Parent edge per updated node; `None` marks the new edge.
            let mut parent: HashMap<usize, Option<usize>> = HashMap::new();
            changed.push((v, self.labels[v].clone()));
            self.labels[v] = candidate;
            parent.insert(v, None);
            let mut queue = VecDeque::from([v]);
            while let Some(a) = queue.pop_front() {
                for &ei in &self.out[a] {
                    let e = &self.edges[ei];
                    let candidate = &self.labels[a] + &e.weight;
                    if candidate < self.labels[e.to] {
                        let b = e.to;
                        if b == u {
                            let cycle = self.cycle(&parent, ei, &new_edge);
                            for (node, old) in changed.into_iter().rev() {
                                self.labels[node] = old;
                            }
                            return Ok(Check::Unsat(cycle));
                        }
                        if !parent.contains_key(&b) {
                            changed.push((b, self.labels[b].clone()));
                        }
                        self.labels[b] = candidate;
                        parent.insert(b, Some(ei));
                        queue.push_back(b);
                    }
                }
            }
        }
        let index = self.edges.len();
        self.out[u].push(index);
        self.edges.push(new_edge);
        self.trail.push((level, changed));
        Ok(Check::Sat)
    }

    /// Walks parent edges back from the source of the new edge.
    fn cycle(
        &self,
        parent: &HashMap<usize, Option<usize>>,
        closing: usize,
        new_edge: &Edge,
    ) -> Vec<Conflicting> {
        let mut out = vec![Conflicting {
            tag: new_edge.tag,
            constraint: new_edge.constraint.clone(),
        }];
        let mut edge = Some(closing);
        while let Some(ei) = edge {
            let e = &self.edges[ei];
            out.push(Conflicting {
                tag: e.tag,
                constraint: e.constraint.clone(),
            });
            edge = parent[&e.from];
        }
        out
    }

    /// Retracts every assertion made above `level`.
    pub fn backtrack(&mut self, level: usize) {
        while let Some((l, _)) = self.trail.last() {
            if *l <= level {
                break;
            }
            let (_, changed) = self.trail.pop().expect("non-empty trail");
            let edge = self.edges.pop().expect("edge per trail entry");
            self.out[edge.from].pop();
            for (node, old) in changed.into_iter().rev() {
                self.labels[node] = old;
            }
        }
        self.level = self.level.min(level);
    }

    /// Canonical solution: shortest distances from a virtual source, then
    /// per weakly connected component shifted by the median to minimise the
    /// sum of absolute values (the smaller shift on ties). A component
    /// containing [`ZERO`] is instead shifted to make it zero.
    pub fn witness(&self) -> Result<BTreeMap<String, Rational>, DlError> {
        let n = self.names.len();
        let mut dist = vec![Rational::zero(); n];
        // Bellman–Ford from the virtual source (0-weight edges to all nodes).
        let mut stable = false;
        for _ in 0..=n {
            stable = true;
            for e in &self.edges {
                let candidate = &dist[e.from] + &e.weight;
                if candidate < dist[e.to] {
                    dist[e.to] = candidate;
                    stable = false;
                }
            }
            if stable {
                break;
            }
        }
        if !stable {
            return Err(DlError::Inconsistent);
        }

        // Weakly connected components via union-find.
        let mut root: Vec<usize> = (0..n).collect();
        fn find(root: &mut [usize], mut a: usize) -> usize {
            while root[a] != a {
                root[a] = root[root[a]];
                a = root[a];
            }
            a
        }
        for e in &self.edges {
            let (a, b) = (find(&mut root, e.from), find(&mut root, e.to));
            if a != b {
                root[a] = b;
            }
        }
        let mut components: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..n {
            let r = find(&mut root, i);
            components.entry(r).or_default().push(i);
        }
        let zero = self.index.get(ZERO).copied();
        let mut out = BTreeMap::new();
        for members in components.values() {
            let shift = match zero.filter(|z| members.contains(z)) {
                Some(z) => -dist[z].clone(),
                None => {
                    let mut values: Vec<&Rational> = members.iter().map(|&m| &dist[m]).collect();
                    values.sort();
                    // Upper median: for even sizes the smaller optimal shift.
                    -values[values.len() / 2].clone()
                }
            };
            for &m in members {
                if self.names[m] != ZERO {
                    out.insert(self.names[m].clone(), &dist[m] + &shift);
                }
            }
        }
        Ok(out)
    }

    /// Whether the labels currently satisfy every edge (a debugging aid and
    /// test hook).
    pub fn labels_feasible(&self) -> bool {
        self.edges
            .iter()
            .all(|e| &self.labels[e.to] - &self.labels[e.from] <= e.weight)
    }
}

/// Sum of absolute values of an assignment.
pub fn abs_sum(assignment: &BTreeMap<String, Rational>) -> Rational {
    assignment.values().map(|v| v.abs()).sum()
}
