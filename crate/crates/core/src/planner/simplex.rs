//! Dense two-phase primal simplex with Bland's anti-cycling rule.
//!
//! Sized for the charging-time programs built by the planner (tens of
//! variables and constraints); there is no sparsity or refactorization.

use thiserror::Error;

const EPS: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("is infeasible")]
    Infeasible,
    #[error("is unbounded")]
    Unbounded,
    #[error("exceeded {0} pivots")]
    IterationLimit(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `minimize c.x  subject to  constraints,  x >= 0`.
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        Self {
            objective,
            constraints: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> &mut Self {
        assert_eq!(coeffs.len(), self.objective.len(), "constraint width");
        self.constraints.push(Constraint { coeffs, relation, rhs });
        self
    }

    pub fn solve(&self) -> Result<LpSolution, LpError> {
        Tableau::build(self).solve(&self.objective)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ColKind {
    Original,
    Slack,
    Artificial,
}

struct Tableau {
    /// `rows x (cols + 1)`; the last column is the right-hand side.
    a: Vec<Vec<f64>>,
    kinds: Vec<ColKind>,
    basis: Vec<usize>,
    n_orig: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let n = lp.num_vars();
        let mut n_slack = 0;
        let mut n_art = 0;
        let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::with_capacity(lp.constraints.len());
        for c in &lp.constraints {
            let scale = c.coeffs.iter().fold(c.rhs.abs(), |m, v| m.max(v.abs()));
            let scale = if scale > 0.0 { scale } else { 1.0 };
            let mut coeffs: Vec<f64> = c.coeffs.iter().map(|v| v / scale).collect();
            let mut rhs = c.rhs / scale;
            let mut rel = c.relation;
            if rhs < 0.0 {
                coeffs.iter_mut().for_each(|v| *v = -*v);
                rhs = -rhs;
                rel = match rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
            match rel {
                Relation::Le => n_slack += 1,
                Relation::Ge => {
                    n_slack += 1;
                    n_art += 1
                }
                Relation::Eq => n_art += 1,
            }
            rows.push((coeffs, rel, rhs));
        }
        let cols = n + n_slack + n_art;
        let mut kinds = vec![ColKind::Original; n];
        kinds.extend(std::iter::repeat_n(ColKind::Slack, n_slack));
        kinds.extend(std::iter::repeat_n(ColKind::Artificial, n_art));

        let mut a = Vec::with_capacity(rows.len());
        let mut basis = Vec::with_capacity(rows.len());
        let (mut next_slack, mut next_art) = (n, n + n_slack);
        for (coeffs, rel, rhs) in rows {
            let mut row = vec![0.0; cols + 1];
            row[..n].copy_from_slice(&coeffs);
            row[cols] = rhs;
            match rel {
                Relation::Le => {
                    row[next_slack] = 1.0;
                    basis.push(next_slack);
                    next_slack += 1;
                }
                Relation::Ge => {
                    row[next_slack] = -1.0;
                    next_slack += 1;
                    row[next_art] = 1.0;
                    basis.push(next_art);
                    next_art += 1;
                }
                Relation::Eq => {
                    row[next_art] = 1.0;
                    basis.push(next_art);
                    next_art += 1;
                }
            }
            a.push(row);
        }
        Self { a, kinds, basis, n_orig: n }
    }

    fn cols(&self) -> usize {
        self.kinds.len()
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let cols = self.cols();
        let p = self.a[r][c];
        for v in self.a[r].iter_mut() {
            *v /= p;
        }
        self.a[r][c] = 1.0;
        let pivot_row = self.a[r].clone();
        for (i, row) in self.a.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for j in 0..=cols {
                    row[j] -= f * pivot_row[j];
                }
                row[c] = 0.0;
            }
        }
        self.basis[r] = c;
    }

    /// Reduced costs `c_j - c_B B^-1 A_j` for the current basis.
    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let cols = self.cols();
        let mut d = cost.to_vec();
        for (i, row) in self.a.iter().enumerate() {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for j in 0..cols {
                    d[j] -= cb * row[j];
                }
            }
        }
        d
    }

    /// Runs simplex iterations for `cost` over eligible columns.
    fn optimize(&mut self, cost: &[f64], allow_artificial: bool) -> Result<(), LpError> {
        let cols = self.cols();
        let limit = 50 * (cols + self.a.len() + 10);
        for _ in 0..limit {
            let d = self.reduced_costs(cost);
            // Bland: lowest-index improving column
            let entering = (0..cols).find(|&j| {
                (allow_artificial || self.kinds[j] != ColKind::Artificial)
                    && !self.basis.contains(&j)
                    && d[j] < -EPS
            });
            let Some(c) = entering else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.a.iter().enumerate() {
                if row[c] > EPS {
                    let ratio = row[cols] / row[c];
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - EPS
                                || (ratio <= lr + EPS && self.basis[i] < self.basis[li])
                            {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return Err(LpError::Unbounded);
            };
            self.pivot(r, c);
        }
        Err(LpError::IterationLimit(limit))
    }

    fn solve(mut self, objective: &[f64]) -> Result<LpSolution, LpError> {
        let cols = self.cols();
        if self.kinds.contains(&ColKind::Artificial) {
            let phase1: Vec<f64> = self
                .kinds
                .iter()
                .map(|k| if *k == ColKind::Artificial { 1.0 } else { 0.0 })
                .collect();
            self.optimize(&phase1, true)?;
            let infeas: f64 = self
                .a
                .iter()
                .zip(&self.basis)
                .filter(|(_, &b)| self.kinds[b] == ColKind::Artificial)
                .map(|(row, _)| row[cols])
                .sum();
            if infeas > 1e-8 {
                return Err(LpError::Infeasible);
            }
            // drive zero-level artificials out of the basis; drop redundant rows
            let mut r = 0;
            while r < self.a.len() {
                if self.kinds[self.basis[r]] == ColKind::Artificial {
                    let c = (0..cols).find(|&j| {
                        self.kinds[j] != ColKind::Artificial && self.a[r][j].abs() > 1e-9
                    });
                    match c {
                        Some(c) => self.pivot(r, c),
                        None => {
                            self.a.remove(r);
                            self.basis.remove(r);
                            continue;
                        }
                    }
                }
                r += 1;
            }
        }
        let mut cost = vec![0.0; cols];
        cost[..self.n_orig].copy_from_slice(objective);
        self.optimize(&cost, false)?;

        let mut x = vec![0.0; self.n_orig];
        for (row, &b) in self.a.iter().zip(&self.basis) {
            if b < self.n_orig {
                x[b] = row[cols].max(0.0);
            }
        }
        let value = objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        Ok(LpSolution { x, objective: value })
    }
}
