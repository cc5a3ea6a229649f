//! Dense linear programs and a two-phase primal simplex solver.
//!
//! Programs are minimizations over `a . x <= b` rows with per-variable bounds.
//! Pricing is Dantzig's rule until a run of degenerate pivots, after which the
//! solver switches to Bland's rule for the rest of the solve. Both rules are
//! deterministic, so equal inputs give bit-identical outputs.

use std::fmt;

use crate::error::{Error, Result};

/// Pivot and ratio-test tolerance.
const PIVOT_TOL: f64 = 1e-9;
/// Residual allowed on every constraint of a reported optimum.
pub const CHECK_TOL: f64 = 1e-7;
/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_STREAK: usize = 64;

/// Minimize `objective . x` subject to `rows[i] . x <= rhs[i]` and
/// `lower[j] <= x[j] <= upper[j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<Option<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { point: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(&self) -> Option<(&[f64], f64)> {
        match self {
            LpOutcome::Optimal { point, value } => Some((point, *value)),
            _ => None,
        }
    }
}

impl LinearProgram {
    /// A program over `n` variables with zero objective, no rows and bounds `x >= 0`.
    pub fn new(n: usize) -> Self {
        LinearProgram {
            objective: vec![0.0; n],
            rows: Vec::new(),
            rhs: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![None; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn rows(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.rows.iter().map(Vec::as_slice).zip(self.rhs.iter().copied())
    }

    pub fn set_objective(&mut self, c: Vec<f64>) {
        assert_eq!(c.len(), self.num_vars(), "objective length");
        self.objective = c;
    }

    pub fn objective_mut(&mut self) -> &mut [f64] {
        &mut self.objective
    }

    /// Adds `row . x <= b`.
    pub fn add_le(&mut self, row: Vec<f64>, b: f64) {
        assert_eq!(row.len(), self.num_vars(), "row length");
        self.rows.push(row);
        self.rhs.push(b);
    }

    /// Adds `row . x >= b`.
    pub fn add_ge(&mut self, row: Vec<f64>, b: f64) {
        self.add_le(row.into_iter().map(|a| -a).collect(), -b);
    }

    /// Adds `row . x <= b` from sparse `(index, coefficient)` terms.
    pub fn add_le_sparse(&mut self, terms: &[(usize, f64)], b: f64) {
        let mut row = vec![0.0; self.num_vars()];
        for &(j, a) in terms {
            row[j] += a;
        }
        self.add_le(row, b);
    }

    /// Adds `row . x >= b` from sparse terms.
    pub fn add_ge_sparse(&mut self, terms: &[(usize, f64)], b: f64) {
        let neg: Vec<(usize, f64)> = terms.iter().map(|&(j, a)| (j, -a)).collect();
        self.add_le_sparse(&neg, -b);
    }

    pub fn set_lower(&mut self, j: usize, v: f64) {
        self.lower[j] = v;
    }

    pub fn set_upper(&mut self, j: usize, v: f64) {
        self.upper[j] = Some(v);
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[Option<f64>] {
        &self.upper
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        let finite = |v: &f64| v.is_finite();
        if !self.objective.iter().all(finite) {
            return Err(Error::Invalid("non-finite objective coefficient".into()));
        }
        for (row, b) in self.rows() {
            if row.len() != n || !row.iter().all(finite) || !b.is_finite() {
                return Err(Error::Invalid("malformed constraint row".into()));
            }
        }
        if !self.lower.iter().all(finite) {
            return Err(Error::Invalid("lower bounds must be finite".into()));
        }
        if self.upper.iter().flatten().any(|u| !u.is_finite()) {
            return Err(Error::Invalid("upper bounds must be finite when present".into()));
        }
        Ok(())
    }

    /// Largest violation of a row or bound at `x`, relative to `max(1, |rhs|)`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (row, b) in self.rows() {
            let lhs: f64 = row.iter().zip(x).map(|(a, v)| a * v).sum();
            worst = worst.max((lhs - b) / b.abs().max(1.0));
        }
        for (j, &v) in x.iter().enumerate() {
            worst = worst.max((self.lower[j] - v) / self.lower[j].abs().max(1.0));
            if let Some(u) = self.upper[j] {
                worst = worst.max((v - u) / u.abs().max(1.0));
            }
        }
        worst
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

/// Plain-text dump: the objective row, then one line per constraint, then bounds.
impl fmt::Display for LinearProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[f64]| v.iter().map(|a| format!("{a}")).collect::<Vec<_>>().join(" ");
        writeln!(f, "min {}", join(&self.objective))?;
        for (row, b) in self.rows() {
            writeln!(f, "st {} <= {}", join(row), b)?;
        }
        for (j, (l, u)) in self.lower.iter().zip(&self.upper).enumerate() {
            match u {
                Some(u) => writeln!(f, "bound x{j} {l} {u}")?,
                None => writeln!(f, "bound x{j} {l} inf")?,
            }
        }
        Ok(())
    }
}

/// Solves `lp`. Fails only on malformed input or when the iteration cap is hit.
pub fn lp_solve(lp: &LinearProgram) -> Result<LpOutcome> {
    lp.validate()?;
    let n = lp.num_vars();
    // Shift x = y + lower; upper bounds become ordinary rows on y.
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::with_capacity(lp.num_rows() + n);
    for (row, b) in lp.rows() {
        let shift: f64 = row.iter().zip(&lp.lower).map(|(a, l)| a * l).sum();
        rows.push((row.to_vec(), b - shift));
    }
    for j in 0..n {
        if let Some(u) = lp.upper[j] {
            let mut row = vec![0.0; n];
            row[j] = 1.0;
            rows.push((row, u - lp.lower[j]));
        }
    }
    // Row equilibration keeps pivot magnitudes comparable.
    for (row, b) in rows.iter_mut() {
        let scale = row.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        if scale > 0.0 {
            row.iter_mut().for_each(|a| *a /= scale);
            *b /= scale;
        } else if *b < -PIVOT_TOL {
            return Ok(LpOutcome::Infeasible);
        }
    }

    let mut tab = Tableau::build(n, &rows);
    let status = tab.run_phase_one()?;
    if !status {
        return Ok(LpOutcome::Infeasible);
    }
    if !tab.run_phase_two(&lp.objective)? {
        return Ok(LpOutcome::Unbounded);
    }
    let mut point = tab.primal(n);
    for (x, l) in point.iter_mut().zip(&lp.lower) {
        *x += l;
    }
    // Rounding noise past an upper bound is clamped onto it.
    for (x, u) in point.iter_mut().zip(&lp.upper) {
        if let Some(u) = u {
            *x = x.min(*u);
        }
    }
    let violation = lp.max_violation(&point);
    if violation > CHECK_TOL {
        return Err(Error::Numerical(format!(
            "simplex optimum violates constraints by {violation:e}"
        )));
    }
    let value = lp.evaluate(&point);
    Ok(LpOutcome::Optimal { point, value })
}

/// Row-major simplex tableau `[B^-1 A | B^-1 b]` over structural, slack and
/// artificial columns.
struct Tableau {
    m: usize,
    /// Total columns excluding the right-hand side.
    cols: usize,
    /// First artificial column; columns past it never re-enter in phase two.
    art_start: usize,
    data: Vec<f64>,
    basis: Vec<usize>,
    /// Reduced-cost row of the current phase, with the negated objective in
    /// the last slot.
    cost: Vec<f64>,
    bland: bool,
    degenerate_run: usize,
    iterations: usize,
    max_iterations: usize,
}

impl Tableau {
    fn build(n: usize, rows: &[(Vec<f64>, f64)]) -> Self {
        let m = rows.len();
        let negatives = rows.iter().filter(|(_, b)| *b < 0.0).count();
        let art_start = n + m;
        let cols = art_start + negatives;
        let width = cols + 1;
        let mut data = vec![0.0; m * width];
        let mut basis = vec![0; m];
        let mut next_art = art_start;
        for (i, (row, b)) in rows.iter().enumerate() {
            let line = &mut data[i * width..(i + 1) * width];
            let sign = if *b < 0.0 { -1.0 } else { 1.0 };
            for (j, a) in row.iter().enumerate() {
                line[j] = sign * a;
            }
            line[n + i] = sign;
            line[cols] = sign * b;
            if *b < 0.0 {
                line[next_art] = 1.0;
                basis[i] = next_art;
                next_art += 1;
            } else {
                basis[i] = n + i;
            }
        }
        Tableau {
            m,
            cols,
            art_start,
            data,
            basis,
            cost: vec![0.0; width],
            bland: false,
            degenerate_run: 0,
            iterations: 0,
            max_iterations: 200 * (m + cols) + 10_000,
        }
    }

    #[inline]
    fn width(&self) -> usize {
        self.cols + 1
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width() + j]
    }

    #[inline]
    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.cols)
    }

    /// Sets the cost row to `c - c_B B^-1 A` for the column costs `c`.
    fn price(&mut self, c: &[f64]) {
        let w = self.width();
        self.cost.iter_mut().for_each(|v| *v = 0.0);
        self.cost[..c.len()].copy_from_slice(c);
        for i in 0..self.m {
            let cb = c.get(self.basis[i]).copied().unwrap_or(0.0);
            if cb != 0.0 {
                let row = &self.data[i * w..(i + 1) * w];
                for (v, a) in self.cost.iter_mut().zip(row) {
                    *v -= cb * a;
                }
            }
        }
    }

    fn entering(&self, limit: usize) -> Option<usize> {
        if self.bland {
            (0..limit).find(|&j| self.cost[j] < -PIVOT_TOL)
        } else {
            let mut best = None;
            let mut best_val = -PIVOT_TOL;
            for j in 0..limit {
                if self.cost[j] < best_val {
                    best_val = self.cost[j];
                    best = Some(j);
                }
            }
            best
        }
    }

    fn leaving(&self, col: usize) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.m {
            let a = self.at(i, col);
            if a > PIVOT_TOL {
                let ratio = self.rhs(i).max(0.0) / a;
                best = match best {
                    None => Some((i, ratio)),
                    Some((k, r)) => {
                        let tie = (ratio - r).abs() <= PIVOT_TOL * r.abs().max(1.0);
                        let better = if tie {
                            if self.bland {
                                self.basis[i] < self.basis[k]
                            } else {
                                a > self.at(k, col)
                            }
                        } else {
                            ratio < r
                        };
                        if better {
                            Some((i, ratio))
                        } else {
                            Some((k, r))
                        }
                    }
                };
            }
        }
        best.map(|(i, _)| i)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let w = self.width();
        let p = self.at(row, col);
        {
            let line = &mut self.data[row * w..(row + 1) * w];
            line.iter_mut().for_each(|v| *v /= p);
            line[col] = 1.0;
        }
        let (before, rest) = self.data.split_at_mut(row * w);
        let (pivot_row, after) = rest.split_at_mut(w);
        let eliminate = |line: &mut [f64]| {
            let f = line[col];
            if f != 0.0 {
                for (v, a) in line.iter_mut().zip(pivot_row.iter()) {
                    *v -= f * a;
                }
                line[col] = 0.0;
            }
        };
        before.chunks_exact_mut(w).for_each(eliminate);
        after.chunks_exact_mut(w).for_each(eliminate);
        let f = self.cost[col];
        if f != 0.0 {
            for (v, a) in self.cost.iter_mut().zip(pivot_row.iter()) {
                *v -= f * a;
            }
            self.cost[col] = 0.0;
        }
        self.basis[row] = col;
    }

    /// Iterates to optimality over columns `< limit`. Returns false when unbounded.
    fn iterate(&mut self, limit: usize) -> Result<bool> {
        loop {
            let Some(col) = self.entering(limit) else {
                return Ok(true);
            };
            let Some(row) = self.leaving(col) else {
                return Ok(false);
            };
            let step = self.rhs(row).max(0.0) / self.at(row, col);
            if step <= PIVOT_TOL {
                self.degenerate_run += 1;
                if self.degenerate_run >= DEGENERATE_STREAK {
                    self.bland = true;
                }
            } else {
                self.degenerate_run = 0;
            }
            self.pivot(row, col);
            self.iterations += 1;
            if self.iterations > self.max_iterations {
                return Err(Error::Numerical(format!(
                    "simplex did not converge within {} pivots",
                    self.max_iterations
                )));
            }
        }
    }

    /// Minimizes the artificial sum. Returns false if the program is infeasible.
    fn run_phase_one(&mut self) -> Result<bool> {
        if self.art_start == self.cols {
            return Ok(true);
        }
        let mut c = vec![0.0; self.cols];
        c[self.art_start..].iter_mut().for_each(|v| *v = 1.0);
        self.price(&c);
        if !self.iterate(self.cols)? {
            return Err(Error::Numerical("phase one reported unbounded".into()));
        }
        let scale = (0..self.m).fold(1.0f64, |s, i| s.max(self.rhs(i).abs()));
        let infeasibility: f64 =
            (0..self.m).filter(|&i| self.basis[i] >= self.art_start).map(|i| self.rhs(i)).sum();
        if infeasibility > PIVOT_TOL * scale {
            return Ok(false);
        }
        // Drive zero-level artificials out of the basis where possible.
        for i in 0..self.m {
            if self.basis[i] >= self.art_start {
                let col = (0..self.art_start)
                    .filter(|&j| self.at(i, j).abs() > PIVOT_TOL)
                    .max_by(|&a, &b| self.at(i, a).abs().total_cmp(&self.at(i, b).abs()));
                if let Some(col) = col {
                    self.pivot(i, col);
                }
            }
        }
        Ok(true)
    }

    /// Minimizes the structural objective. Returns false when unbounded.
    fn run_phase_two(&mut self, objective: &[f64]) -> Result<bool> {
        self.bland = false;
        self.degenerate_run = 0;
        self.price(objective);
        self.iterate(self.art_start)
    }

    fn primal(&self, n: usize) -> Vec<f64> {
        let mut x = vec![0.0; n];
        for i in 0..self.m {
            let b = self.basis[i];
            if b < n {
                x[b] = self.rhs(i).max(0.0);
            }
        }
        x
    }
}
