//! Dense two-phase primal simplex for small linear programs.
//!
//! Problems are stated as `maximize c·x` subject to rows `a·x (<=|>=|=) b`
//! and `x >= 0`. The solver is deterministic: Dantzig pricing with
//! lowest-index tie-breaking, switching permanently to Bland's rule after a
//! run of degenerate pivots. Every solution carries the dual vector read off
//! the final tableau, and [`certify`] checks the primal/dual pair.

use thiserror::Error;

/// Pivot and reduced-cost threshold.
const PIVOT_TOL: f64 = 1e-10;
/// Degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_STREAK: usize = 32;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("problem is infeasible")]
    Infeasible,
    #[error("problem is unbounded")]
    Unbounded,
    #[error("iteration limit of {0} pivots reached")]
    IterationLimit(usize),
    #[error("malformed problem: {0}")]
    Malformed(String),
    #[error("certificate check failed: {0}")]
    Certificate(String),
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

#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// One dual value per constraint, in the sign convention of the
    /// maximisation dual: `<=` rows have `y >= 0`, `>=` rows `y <= 0`.
    pub duals: Vec<f64>,
    pub pivots: usize,
}

impl LinearProgram {
    pub fn new(n_vars: usize) -> Self {
        LinearProgram { objective: vec![0.0; n_vars], constraints: Vec::new() }
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn push(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint { coeffs, relation, rhs });
    }

    pub fn solve(&self) -> Result<LpSolution, LpError> {
        Tableau::build(self)?.solve(self)
    }
}

struct Tableau {
    rows: usize,
    cols: usize,
    /// Row-major `rows x cols` coefficients.
    a: Vec<f64>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    /// Column holding the initial identity entry of each row.
    identity: Vec<usize>,
    artificial: Vec<bool>,
    flipped: Vec<bool>,
    pivots: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Result<Self, LpError> {
        let n = lp.n_vars();
        let m = lp.constraints.len();
        for (i, c) in lp.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(LpError::Malformed(format!(
                    "row {i} has {} coefficients, expected {n}",
                    c.coeffs.len()
                )));
            }
            if !c.rhs.is_finite() || c.coeffs.iter().any(|v| !v.is_finite()) {
                return Err(LpError::Malformed(format!("row {i} has a non-finite entry")));
            }
        }

        let mut flipped = vec![false; m];
        let mut relations = Vec::with_capacity(m);
        for (i, c) in lp.constraints.iter().enumerate() {
            let rel = if c.rhs < 0.0 {
                flipped[i] = true;
                match c.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                }
            } else {
                c.relation
            };
            relations.push(rel);
        }

        let extra: usize = relations
            .iter()
            .map(|r| match r {
                Relation::Le | Relation::Eq => 1,
                Relation::Ge => 2,
            })
            .sum();
        let cols = n + extra;
        let mut a = vec![0.0; m * cols];
        let mut rhs = vec![0.0; m];
        let mut basis = vec![0; m];
        let mut identity = vec![0; m];
        let mut artificial = vec![false; cols];
        let mut next = n;
        for (i, c) in lp.constraints.iter().enumerate() {
            let sign = if flipped[i] { -1.0 } else { 1.0 };
            let row = &mut a[i * cols..(i + 1) * cols];
            for (dst, &v) in row.iter_mut().zip(&c.coeffs) {
                *dst = sign * v;
            }
            rhs[i] = sign * c.rhs;
            match relations[i] {
                Relation::Le => {
                    row[next] = 1.0;
                    identity[i] = next;
                    next += 1;
                }
                Relation::Ge => {
                    row[next] = -1.0;
                    row[next + 1] = 1.0;
                    artificial[next + 1] = true;
                    identity[i] = next + 1;
                    next += 2;
                }
                Relation::Eq => {
                    row[next] = 1.0;
                    artificial[next] = true;
                    identity[i] = next;
                    next += 1;
                }
            }
            basis[i] = identity[i];
        }

        Ok(Tableau { rows: m, cols, a, rhs, basis, identity, artificial, flipped, pivots: 0 })
    }

    fn max_pivots(&self) -> usize {
        50 * (self.rows + self.cols) + 1000
    }

    /// Reduced costs `z_j - c_j` for the given column costs.
    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d: Vec<f64> = cost.iter().map(|c| -c).collect();
        for i in 0..self.rows {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.a[i * self.cols..(i + 1) * self.cols];
                for (dj, &aij) in d.iter_mut().zip(row) {
                    *dj += cb * aij;
                }
            }
        }
        d
    }

    fn pivot(&mut self, d: &mut [f64], row: usize, col: usize) {
        let cols = self.cols;
        let p = self.a[row * cols + col];
        for v in &mut self.a[row * cols..(row + 1) * cols] {
            *v /= p;
        }
        self.rhs[row] /= p;
        let (pivot_row, pivot_rhs) = (self.a[row * cols..(row + 1) * cols].to_vec(), self.rhs[row]);
        for i in 0..self.rows {
            if i == row {
                continue;
            }
            let f = self.a[i * cols + col];
            if f != 0.0 {
                let r = &mut self.a[i * cols..(i + 1) * cols];
                for (v, &pv) in r.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                r[col] = 0.0;
                self.rhs[i] -= f * pivot_rhs;
                if self.rhs[i].abs() < 1e-13 {
                    self.rhs[i] = 0.0;
                }
            }
        }
        let f = d[col];
        if f != 0.0 {
            for (dj, &pv) in d.iter_mut().zip(&pivot_row) {
                *dj -= f * pv;
            }
            d[col] = 0.0;
        }
        self.basis[row] = col;
        self.pivots += 1;
    }

    /// Runs primal simplex iterations on the reduced-cost row `d`.
    fn iterate(&mut self, d: &mut [f64], allow: impl Fn(usize) -> bool) -> Result<(), LpError> {
        let mut bland = false;
        let mut streak = 0;
        loop {
            if self.pivots > self.max_pivots() {
                return Err(LpError::IterationLimit(self.pivots));
            }
            let entering = if bland {
                (0..self.cols).find(|&j| allow(j) && d[j] < -PIVOT_TOL)
            } else {
                let mut best: Option<usize> = None;
                for j in (0..self.cols).filter(|&j| allow(j) && d[j] < -PIVOT_TOL) {
                    if best.is_none_or(|b| d[j] < d[b]) {
                        best = Some(j);
                    }
                }
                best
            };
            let Some(col) = entering else { return Ok(()) };

            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let aij = self.a[i * self.cols + col];
                if aij > PIVOT_TOL {
                    let ratio = self.rhs[i] / aij;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((r, best)) => {
                            if ratio < best - 1e-12
                                || (ratio <= best + 1e-12 && self.basis[i] < self.basis[r])
                            {
                                Some((i, ratio))
                            } else {
                                Some((r, best))
                            }
                        }
                    };
                }
            }
            let Some((row, ratio)) = leave else { return Err(LpError::Unbounded) };
            if ratio <= 1e-12 {
                streak += 1;
                if streak >= DEGENERATE_STREAK {
                    bland = true;
                }
            } else {
                streak = 0;
            }
            self.pivot(d, row, col);
        }
    }

    fn solve(mut self, lp: &LinearProgram) -> Result<LpSolution, LpError> {
        let n = lp.n_vars();
        if self.artificial.iter().any(|&a| a) {
            let cost: Vec<f64> =
                self.artificial.iter().map(|&a| if a { -1.0 } else { 0.0 }).collect();
            let mut d = self.reduced_costs(&cost);
            self.iterate(&mut d, |_| true)?;
            let infeasibility: f64 = (0..self.rows)
                .filter(|&i| self.artificial[self.basis[i]])
                .map(|i| self.rhs[i])
                .sum();
            if infeasibility > 1e-9 {
                return Err(LpError::Infeasible);
            }
            // Drive zero-valued artificials out of the basis where possible.
            for i in 0..self.rows {
                if !self.artificial[self.basis[i]] {
                    continue;
                }
                let row = &self.a[i * self.cols..(i + 1) * self.cols];
                if let Some(col) =
                    (0..self.cols).find(|&j| !self.artificial[j] && row[j].abs() > 1e-9)
                {
                    let mut scratch = vec![0.0; self.cols];
                    self.pivot(&mut scratch, i, col);
                }
            }
        }

        let mut cost = vec![0.0; self.cols];
        cost[..n].copy_from_slice(&lp.objective);
        let mut d = self.reduced_costs(&cost);
        let artificial = self.artificial.clone();
        self.iterate(&mut d, |j| !artificial[j])?;

        let mut x = vec![0.0; n];
        for i in 0..self.rows {
            if self.basis[i] < n {
                x[self.basis[i]] = self.rhs[i].max(0.0);
            }
        }
        let objective = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        let duals = (0..self.rows)
            .map(|i| {
                let y = d[self.identity[i]];
                if self.flipped[i] {
                    -y
                } else {
                    y
                }
            })
            .collect();
        Ok(LpSolution { x, objective, duals, pivots: self.pivots })
    }
}

/// Checks primal feasibility, dual feasibility and the duality gap of a
/// solution, all at absolute tolerance `tol` (scaled by the objective size
/// for the gap).
pub fn certify(lp: &LinearProgram, sol: &LpSolution, tol: f64) -> Result<(), LpError> {
    let n = lp.n_vars();
    if sol.x.len() != n || sol.duals.len() != lp.constraints.len() {
        return Err(LpError::Certificate("dimension mismatch".into()));
    }
    if let Some(j) = sol.x.iter().position(|&v| v < -tol) {
        return Err(LpError::Certificate(format!("x[{j}] = {} is negative", sol.x[j])));
    }
    for (i, c) in lp.constraints.iter().enumerate() {
        let lhs: f64 = c.coeffs.iter().zip(&sol.x).map(|(a, v)| a * v).sum();
        let scale = 1.0 + c.rhs.abs();
        let ok = match c.relation {
            Relation::Le => lhs <= c.rhs + tol * scale,
            Relation::Ge => lhs >= c.rhs - tol * scale,
            Relation::Eq => (lhs - c.rhs).abs() <= tol * scale,
        };
        if !ok {
            return Err(LpError::Certificate(format!("row {i} violated: {lhs} vs {}", c.rhs)));
        }
        let y = sol.duals[i];
        let sign_ok = match c.relation {
            Relation::Le => y >= -tol,
            Relation::Ge => y <= tol,
            Relation::Eq => true,
        };
        if !sign_ok {
            return Err(LpError::Certificate(format!("dual {i} = {y} has the wrong sign")));
        }
    }
    for j in 0..n {
        let col: f64 = lp.constraints.iter().zip(&sol.duals).map(|(c, y)| c.coeffs[j] * y).sum();
        if col < lp.objective[j] - tol * (1.0 + lp.objective[j].abs()) {
            return Err(LpError::Certificate(format!(
                "dual constraint {j} violated: {col} < {}",
                lp.objective[j]
            )));
        }
    }
    let primal: f64 = lp.objective.iter().zip(&sol.x).map(|(c, v)| c * v).sum();
    let dual: f64 = lp.constraints.iter().zip(&sol.duals).map(|(c, y)| c.rhs * y).sum();
    if (primal - dual).abs() > tol * (1.0 + primal.abs()) {
        return Err(LpError::Certificate(format!("duality gap {primal} vs {dual}")));
    }
    Ok(())
}
