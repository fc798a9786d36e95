//! Dense two-phase primal simplex over exact rationals with Bland's rule.
//!
//! Input is in the form `rows: sum_j a_ij x_j (<=|>=|=) b_i` over free
//! variables; each free variable is split into a difference of two
//! non-negative ones internally.

use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowKind {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Row {
    pub coeffs: Vec<Rational>,
    pub kind: RowKind,
    pub rhs: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SimplexResult {
    Optimal {
        value: Rational,
        point: Vec<Rational>,
    },
    Unbounded {
        point: Vec<Rational>,
    },
    Infeasible,
}

struct Tableau {
    /// rows x (cols + 1); last column is the right-hand side.
    t: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.t[row][col].clone();
        for v in self.t[row].iter_mut() {
            *v /= &p;
        }
        let pivot_row = self.t[row].clone();
        for (r, line) in self.t.iter_mut().enumerate() {
            if r == row || line[col].is_zero() {
                continue;
            }
            let factor = line[col].clone();
            for (v, pv) in line.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &factor * pv;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Minimises `cost` over the current feasible basis, only letting
    /// columns `< allowed` enter. Returns false if unbounded.
    fn minimise(&mut self, cost: &[Rational], allowed: usize) -> bool {
        loop {
            // Reduced costs: c_j - c_B B^-1 A_j.
            let mut entering = None;
            for j in 0..allowed {
                if self.basis.contains(&j) {
                    continue;
                }
                let mut reduced = cost[j].clone();
                for (r, &b) in self.basis.iter().enumerate() {
                    if !self.t[r][j].is_zero() {
                        reduced -= &cost[b] * &self.t[r][j];
                    }
                }
                if reduced.is_negative() {
                    entering = Some(j);
                    break;
                }
            }
            let Some(col) = entering else { return true };
            let mut leaving: Option<(usize, Rational)> = None;
            for r in 0..self.t.len() {
                let a = &self.t[r][col];
                if a.is_positive() {
                    let ratio = &self.t[r][self.cols] / a;
                    let better = match &leaving {
                        None => true,
                        Some((lr, best)) => {
                            ratio < *best || (ratio == *best && self.basis[r] < self.basis[*lr])
                        }
                    };
                    if better {
                        leaving = Some((r, ratio));
                    }
                }
            }
            match leaving {
                Some((row, _)) => self.pivot(row, col),
                None => return false,
            }
        }
    }

    fn value_of(&self, col: usize) -> Rational {
        self.basis
            .iter()
            .position(|&b| b == col)
            .map(|r| self.t[r][self.cols].clone())
            .unwrap_or_else(Rational::zero)
    }
}

/// Minimises `objective · x` (or just finds a feasible point when the
/// objective is all zeros) subject to `rows`, with `n` free variables.
pub fn solve(n: usize, rows: &[Row], objective: &[Rational]) -> SimplexResult {
    // Columns: x+ (n), x- (n), slacks (one per inequality), artificials (m).
    let m = rows.len();
    let slack_count = rows.iter().filter(|r| r.kind != RowKind::Eq).count();
    let structural = 2 * n + slack_count;
    let cols = structural + m;
    let mut t = Vec::with_capacity(m);
    let mut slack = 2 * n;
    for (i, row) in rows.iter().enumerate() {
        let mut line = vec![Rational::zero(); cols + 1];
        for (j, a) in row.coeffs.iter().enumerate() {
            line[j] = a.clone();
            line[n + j] = -a.clone();
        }
        match row.kind {
            RowKind::Le => {
                line[slack] = Rational::one();
                slack += 1;
            }
            RowKind::Ge => {
                line[slack] = -Rational::one();
                slack += 1;
            }
            RowKind::Eq => {}
        }
        line[cols] = row.rhs.clone();
        if line[cols].is_negative() {
            for v in line.iter_mut() {
                *v = -v.clone();
            }
        }
        line[structural + i] = Rational::one();
        t.push(line);
    }
    let mut tableau = Tableau {
        t,
        basis: (structural..structural + m).collect(),
        cols,
    };

    // Phase 1: minimise the sum of artificials.
    let mut phase1 = vec![Rational::zero(); cols];
    for c in phase1.iter_mut().skip(structural) {
        *c = Rational::one();
    }
    tableau.minimise(&phase1, cols);
    let infeasibility: Rational = (structural..cols).map(|j| tableau.value_of(j)).sum();
    if !infeasibility.is_zero() {
        return SimplexResult::Infeasible;
    }
    // Drive artificials out of the basis; drop redundant rows.
    let mut r = 0;
    while r < tableau.t.len() {
        if tableau.basis[r] >= structural {
            match (0..structural).find(|&j| !tableau.t[r][j].is_zero()) {
                Some(j) => {
                    tableau.pivot(r, j);
                    r += 1;
                }
                None => {
                    tableau.t.remove(r);
                    tableau.basis.remove(r);
                }
            }
        } else {
            r += 1;
        }
    }

    // Phase 2 over structural columns only.
    let mut cost = vec![Rational::zero(); cols];
    for (j, c) in objective.iter().enumerate() {
        cost[j] = c.clone();
        cost[n + j] = -c.clone();
    }
    let bounded = tableau.minimise(&cost, structural);
    let point: Vec<Rational> = (0..n)
        .map(|j| tableau.value_of(j) - tableau.value_of(n + j))
        .collect();
    if !bounded {
        return SimplexResult::Unbounded { point };
    }
    let value = objective.iter().zip(&point).map(|(c, x)| c * x).sum();
    SimplexResult::Optimal { value, point }
}
