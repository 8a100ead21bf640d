//! Dense two-phase simplex, generic over the scalar field.
//!
//! The float instantiation is used for the large projection LPs; the exact
//! instantiation for every quantity that has to match another computation
//! bit for bit (quotient norms, Lipschitz duals).

use std::cmp::Ordering;

use crate::numeric::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint<T> {
    pub coeffs: Vec<(usize, T)>,
    pub rel: Relation,
    pub rhs: T,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpError {
    Infeasible,
    Unbounded,
    IterationLimit,
}

impl std::fmt::Display for LpError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LpError::Infeasible => write!(f, "linear program is infeasible"),
            LpError::Unbounded => write!(f, "linear program is unbounded"),
            LpError::IterationLimit => write!(f, "simplex iteration limit reached"),
        }
    }
}

impl From<LpError> for crate::error::Error {
    fn from(e: LpError) -> Self {
        crate::error::Error::SolverFailure(e.to_string())
    }
}

#[derive(Debug, Clone)]
pub struct LpSolution<T> {
    pub value: T,
    pub x: Vec<T>,
}

/// `min/max c·x` subject to linear constraints; variables are nonnegative
/// unless marked free.
#[derive(Debug, Clone)]
pub struct LinearProgram<T> {
    n_vars: usize,
    free: Vec<bool>,
    objective: Vec<T>,
    maximize: bool,
    constraints: Vec<Constraint<T>>,
}

impl<T: Scalar> LinearProgram<T> {
    pub fn new(n_vars: usize) -> Self {
        LinearProgram {
            n_vars,
            free: vec![false; n_vars],
            objective: vec![T::zero_val(); n_vars],
            maximize: false,
            constraints: Vec::new(),
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn set_free(&mut self, var: usize) {
        self.free[var] = true;
    }

    pub fn minimize(&mut self, objective: Vec<(usize, T)>) {
        self.set_objective(objective, false);
    }

    pub fn maximize(&mut self, objective: Vec<(usize, T)>) {
        self.set_objective(objective, true);
    }

    fn set_objective(&mut self, objective: Vec<(usize, T)>, maximize: bool) {
        self.objective = vec![T::zero_val(); self.n_vars];
        for (i, c) in objective {
            self.objective[i] = self.objective[i].add(&c);
        }
        self.maximize = maximize;
    }

    pub fn add(&mut self, coeffs: Vec<(usize, T)>, rel: Relation, rhs: T) {
        debug_assert!(coeffs.iter().all(|(i, _)| *i < self.n_vars));
        self.constraints.push(Constraint { coeffs, rel, rhs });
    }

    pub fn solve(&self) -> Result<LpSolution<T>, LpError> {
        Tableau::build(self).run(self)
    }
}

struct Tableau<T> {
    m: usize,
    ncols: usize,
    /// `m` constraint rows followed by the objective row; last column is rhs.
    rows: Vec<Vec<T>>,
    basis: Vec<usize>,
    artificial_start: usize,
    /// column index of x⁺ / x⁻ for each original variable
    pos_col: Vec<usize>,
    neg_col: Vec<Option<usize>>,
    dead: Vec<bool>,
}

impl<T: Scalar> Tableau<T> {
    fn build(lp: &LinearProgram<T>) -> Self {
        let mut pos_col = Vec::with_capacity(lp.n_vars);
        let mut neg_col = Vec::with_capacity(lp.n_vars);
        let mut next = 0;
        for i in 0..lp.n_vars {
            pos_col.push(next);
            next += 1;
            if lp.free[i] {
                neg_col.push(Some(next));
                next += 1;
            } else {
                neg_col.push(None);
            }
        }
        let structural = next;
        // Normalize to nonnegative right-hand sides.
        let mut normalized: Vec<(Vec<(usize, T)>, Relation, T)> = Vec::new();
        for c in &lp.constraints {
            if c.rhs.is_neg() {
                let rel = match c.rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                normalized.push((c.coeffs.iter().map(|(i, a)| (*i, a.neg())).collect(), rel, c.rhs.neg()));
            } else {
                normalized.push((c.coeffs.clone(), c.rel, c.rhs.clone()));
            }
        }
        let m = normalized.len();
        let n_slack = normalized.iter().filter(|c| c.1 != Relation::Eq).count();
        let n_art = normalized.iter().filter(|c| c.1 != Relation::Le).count();
        let artificial_start = structural + n_slack;
        let ncols = artificial_start + n_art;
        let mut rows = vec![vec![T::zero_val(); ncols + 1]; m + 1];
        let mut basis = vec![0; m];
        let mut slack = structural;
        let mut art = artificial_start;
        for (r, (coeffs, rel, rhs)) in normalized.into_iter().enumerate() {
            for (i, a) in coeffs {
                let pc = pos_col[i];
                rows[r][pc] = rows[r][pc].add(&a);
                if let Some(nc) = neg_col[i] {
                    rows[r][nc] = rows[r][nc].sub(&a);
                }
            }
            rows[r][ncols] = rhs;
            match rel {
                Relation::Le => {
                    rows[r][slack] = T::one_val();
                    basis[r] = slack;
                    slack += 1;
                }
                Relation::Ge => {
                    rows[r][slack] = T::one_val().neg();
                    slack += 1;
                    rows[r][art] = T::one_val();
                    basis[r] = art;
                    art += 1;
                }
                Relation::Eq => {
                    rows[r][art] = T::one_val();
                    basis[r] = art;
                    art += 1;
                }
            }
        }
        Tableau { m, ncols, rows, basis, artificial_start, pos_col, neg_col, dead: vec![false; m] }
    }

    fn set_objective_row(&mut self, costs: &[T]) {
        let obj = self.m;
        for j in 0..=self.ncols {
            self.rows[obj][j] = if j < self.ncols { costs[j].clone() } else { T::zero_val() };
        }
        for r in 0..self.m {
            if self.dead[r] {
                continue;
            }
            let cb = costs[self.basis[r]].clone();
            if cb == T::zero_val() {
                continue;
            }
            let (head, tail) = self.rows.split_at_mut(obj);
            let src = &head[r];
            for j in 0..=self.ncols {
                tail[0][j].sub_mul_assign(&cb, &src[j]);
            }
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let piv = self.rows[r][c].clone();
        for j in 0..=self.ncols {
            if j == c {
                self.rows[r][j] = T::one_val();
            } else if self.rows[r][j] != T::zero_val() {
                self.rows[r][j] = self.rows[r][j].div(&piv);
            }
        }
        let pivot_row = std::mem::take(&mut self.rows[r]);
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c].clone();
            if f == T::zero_val() {
                continue;
            }
            for j in 0..=self.ncols {
                if pivot_row[j] != T::zero_val() {
                    row[j].sub_mul_assign(&f, &pivot_row[j]);
                }
            }
            row[c] = T::zero_val();
        }
        self.rows[r] = pivot_row;
        self.basis[r] = c;
    }

    /// Runs simplex iterations on the current objective row. Columns at or
    /// beyond `col_limit` may not enter.
    fn iterate(&mut self, col_limit: usize) -> Result<(), LpError> {
        let obj = self.m;
        let max_iter = 50_000 + 50 * (self.m + self.ncols);
        let mut degenerate_streak = 0usize;
        let mut bland = false;
        for _ in 0..max_iter {
            let entering = if bland {
                (0..col_limit).find(|&j| self.rows[obj][j].is_neg())
            } else {
                let mut best: Option<usize> = None;
                for j in 0..col_limit {
                    let d = &self.rows[obj][j];
                    if d.is_neg() && best.is_none_or(|b| d.cmp_val(&self.rows[obj][b]) == Ordering::Less) {
                        best = Some(j);
                    }
                }
                best
            };
            let Some(c) = entering else {
                return Ok(());
            };
            let mut leave: Option<(usize, T)> = None;
            for r in 0..self.m {
                if self.dead[r] {
                    continue;
                }
                let a = &self.rows[r][c];
                if !a.is_pos() {
                    continue;
                }
                let ratio = self.rows[r][self.ncols].div(a);
                let better = match &leave {
                    None => true,
                    Some((lr, best)) => {
                        let diff = ratio.sub(best);
                        if diff.is_zero_tol() {
                            self.basis[r] < self.basis[*lr]
                        } else {
                            diff.is_neg()
                        }
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
            let Some((r, ratio)) = leave else {
                return Err(LpError::Unbounded);
            };
            if ratio.is_zero_tol() {
                degenerate_streak += 1;
                if degenerate_streak > 50 {
                    bland = true;
                }
            } else {
                degenerate_streak = 0;
            }
            self.pivot(r, c);
        }
        Err(LpError::IterationLimit)
    }

    fn run(mut self, lp: &LinearProgram<T>) -> Result<LpSolution<T>, LpError> {
        if self.artificial_start < self.ncols {
            let mut costs = vec![T::zero_val(); self.ncols];
            for c in costs.iter_mut().skip(self.artificial_start) {
                *c = T::one_val();
            }
            self.set_objective_row(&costs);
            self.iterate(self.ncols)?;
            // objective row rhs holds −(phase-one value)
            let infeas = self.rows[self.m][self.ncols].neg();
            if infeas.is_pos() {
                return Err(LpError::Infeasible);
            }
            for r in 0..self.m {
                if self.basis[r] < self.artificial_start {
                    continue;
                }
                match (0..self.artificial_start).find(|&j| !self.rows[r][j].is_zero_tol()) {
                    Some(c) => self.pivot(r, c),
                    None => self.dead[r] = true,
                }
            }
        }
        let mut costs = vec![T::zero_val(); self.ncols];
        for i in 0..lp.n_vars {
            let c = if lp.maximize { lp.objective[i].neg() } else { lp.objective[i].clone() };
            costs[self.pos_col[i]] = c.clone();
            if let Some(nc) = self.neg_col[i] {
                costs[nc] = c.neg();
            }
        }
        self.set_objective_row(&costs);
        self.iterate(self.artificial_start)?;

        let mut col_val = vec![T::zero_val(); self.ncols];
        for r in 0..self.m {
            if !self.dead[r] {
                col_val[self.basis[r]] = self.rows[r][self.ncols].clone();
            }
        }
        let x: Vec<T> = (0..lp.n_vars)
            .map(|i| {
                let p = col_val[self.pos_col[i]].clone();
                match self.neg_col[i] {
                    Some(nc) => p.sub(&col_val[nc]),
                    None => p,
                }
            })
            .collect();
        let value = lp
            .objective
            .iter()
            .zip(&x)
            .fold(T::zero_val(), |s, (c, v)| s.add(&c.mul(v)));
        Ok(LpSolution { value, x })
    }
}
