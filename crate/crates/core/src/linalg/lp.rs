//! Dense two-phase simplex over free variables.
//!
//! Programs have the form `maximize c·x subject to A x ≤ b` with `x` free.
//! Internally each variable is split as `x = x⁺ − x⁻`, each row receives a
//! slack, and rows with negative right-hand side receive an artificial
//! variable for phase one. Pivoting follows Bland's rule, so the sequence of
//! bases is a deterministic function of the input and cannot cycle.

use super::LinalgError;

/// Feasibility tolerance on constraint rows.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Smallest admissible pivot magnitude.
pub const RANK_TOL: f64 = 1e-10;

const REDUCED_COST_TOL: f64 = 1e-11;
/// Normalized rows closer than this (entrywise) are merged.
const DUPLICATE_TOL: f64 = 1e-9;
/// Ratio-test entries at or below this magnitude are treated as zero.
const PIVOT_TOL: f64 = 1e-9;
const MAX_PIVOTS: usize = 50_000;

/// `maximize objective·x` subject to `row·x ≤ bound` for every constraint.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    constraints: Vec<(Vec<f64>, f64)>,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        Self {
            objective,
            constraints: Vec::new(),
        }
    }

    pub fn with_constraints(
        objective: Vec<f64>,
        constraints: Vec<(Vec<f64>, f64)>,
    ) -> Result<Self, LinalgError> {
        let mut lp = Self::new(objective);
        for (row, bound) in constraints {
            lp.push(row, bound)?;
        }
        Ok(lp)
    }

    pub fn push(&mut self, row: Vec<f64>, bound: f64) -> Result<(), LinalgError> {
        if row.len() != self.objective.len() {
            return Err(LinalgError::Shape(format!(
                "constraint has {} coefficients, objective has {}",
                row.len(),
                self.objective.len()
            )));
        }
        if !bound.is_finite() || row.iter().any(|x| !x.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        self.constraints.push((row, bound));
        Ok(())
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn constraints(&self) -> &[(Vec<f64>, f64)] {
        &self.constraints
    }

    pub fn value_at(&self, x: &[f64]) -> f64 {
        dot(&self.objective, x)
    }

    /// Largest amount by which `x` violates a constraint (0 when feasible).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        self.constraints
            .iter()
            .map(|(row, b)| dot(row, x) - b)
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { point: Vec<f64>, value: f64 },
    /// `ray` satisfies `A·ray ≤ 0` and `c·ray > 0`.
    Unbounded { ray: Vec<f64> },
    Infeasible,
}

impl LpOutcome {
    pub fn is_optimal(&self) -> bool {
        matches!(self, LpOutcome::Optimal { .. })
    }
}

struct Tableau {
    rows: usize,
    cols: usize,
    /// `rows × (cols + 1)`; the last column is the right-hand side.
    a: Vec<f64>,
    basis: Vec<usize>,
    /// Columns `j` and `j + split` (`j < split`) are `x⁺_j` and `x⁻_j`.
    split: usize,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.a[r * (self.cols + 1) + c]
    }

    #[inline]
    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.cols)
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.cols + 1;
        let p = self.a[pr * w + pc];
        for c in 0..w {
            self.a[pr * w + c] /= p;
        }
        self.a[pr * w + pc] = 1.0;
        for r in 0..self.rows {
            if r == pr {
                continue;
            }
            let f = self.a[r * w + pc];
            if f == 0.0 {
                continue;
            }
            for c in 0..w {
                self.a[r * w + c] -= f * self.a[pr * w + c];
            }
            self.a[r * w + pc] = 0.0;
        }
        self.basis[pr] = pc;
    }

    /// Reduced costs `c_j − c_B B⁻¹ A_j` for the given cost vector.
    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        for r in 0..self.rows {
            let cb = cost[self.basis[r]];
            if cb == 0.0 {
                continue;
            }
            for (c, dc) in d.iter_mut().enumerate() {
                *dc -= cb * self.at(r, c);
            }
        }
        d
    }

    /// The other half of a split variable column.
    fn partner(&self, j: usize) -> Option<usize> {
        match j {
            _ if j < self.split => Some(j + self.split),
            _ if j < 2 * self.split => Some(j - self.split),
            _ => None,
        }
    }

    /// Runs Bland-rule simplex iterations maximizing `cost` over columns
    /// `j < allowed`. Returns the unbounded entering column, if any.
    fn optimize(&mut self, cost: &[f64], allowed: usize) -> Result<Option<usize>, LinalgError> {
        for _ in 0..MAX_PIVOTS {
            let d = self.reduced_costs(cost);
            // A column whose partner is basic has true reduced cost zero.
            let entering = (0..allowed).find(|&j| {
                d[j] > REDUCED_COST_TOL && !self.partner(j).is_some_and(|p| self.basis.contains(&p))
            });
            let Some(pc) = entering else {
                return Ok(None);
            };
            let mut best: Option<(f64, usize, usize)> = None;
            for r in 0..self.rows {
                let coef = self.at(r, pc);
                if coef <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs(r).max(0.0) / coef;
                let better = match best {
                    None => true,
                    Some((bratio, bvar, _)) => {
                        ratio < bratio - 1e-12 * (1.0 + bratio)
                            || (ratio <= bratio + 1e-12 * (1.0 + bratio) && self.basis[r] < bvar)
                    }
                };
                if better {
                    best = Some((ratio, self.basis[r], r));
                }
            }
            match best {
                None => return Ok(Some(pc)),
                Some((_, _, pr)) => {
                    if self.at(pr, pc).abs() < RANK_TOL {
                        return Err(LinalgError::SingularBasis);
                    }
                    self.pivot(pr, pc);
                }
            }
        }
        Err(LinalgError::NoConvergence { sweeps: MAX_PIVOTS })
    }
}

/// Solves a linear program with the dense simplex method.
pub fn solve_lp(p: &LinearProgram) -> Result<LpOutcome, LinalgError> {
    let n = p.num_vars();
    let obj_scale = p.objective.iter().fold(0.0_f64, |m, x| m.max(x.abs()));

    // Row normalization: each row divided by its largest coefficient.
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::with_capacity(p.constraints.len());
    for (row, b) in &p.constraints {
        let s = row.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        if s <= RANK_TOL * b.abs().max(1.0) * 1e-3 {
            if *b < -FEASIBILITY_TOL {
                return Ok(LpOutcome::Infeasible);
            }
            continue;
        }
        let row: Vec<f64> = row.iter().map(|x| x / s).collect();
        let b = b / s;
        // Near-parallel copies make the tableau degenerate; keep the tighter.
        match rows
            .iter_mut()
            .find(|(r, _)| r.iter().zip(&row).all(|(x, y)| (x - y).abs() <= DUPLICATE_TOL))
        {
            Some(kept) => kept.1 = kept.1.min(b),
            None => rows.push((row, b)),
        }
    }
    let m = rows.len();
    let negative: Vec<usize> = (0..m).filter(|&i| rows[i].1 < 0.0).collect();
    let n_art = negative.len();
    let slack0 = 2 * n;
    let art0 = slack0 + m;
    let cols = art0 + n_art;

    let w = cols + 1;
    let mut a = vec![0.0; m * w];
    let mut basis = vec![0; m];
    let mut art_index = 0;
    for (i, (row, b)) in rows.iter().enumerate() {
        let sign = if *b < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            a[i * w + j] = sign * row[j];
            a[i * w + n + j] = -sign * row[j];
        }
        a[i * w + slack0 + i] = sign;
        a[i * w + cols] = sign * b;
        if *b < 0.0 {
            a[i * w + art0 + art_index] = 1.0;
            basis[i] = art0 + art_index;
            art_index += 1;
        } else {
            basis[i] = slack0 + i;
        }
    }
    let mut t = Tableau {
        rows: m,
        cols,
        a,
        basis,
        split: n,
    };

    if n_art > 0 {
        let mut phase1 = vec![0.0; cols];
        for c in phase1.iter_mut().skip(art0) {
            *c = -1.0;
        }
        t.optimize(&phase1, cols)?;
        let infeasibility: f64 = (0..m)
            .filter(|&r| t.basis[r] >= art0)
            .map(|r| t.rhs(r))
            .sum();
        if infeasibility > FEASIBILITY_TOL {
            return Ok(LpOutcome::Infeasible);
        }
        // Drive zero-level artificials out of the basis where possible.
        for r in 0..m {
            if t.basis[r] >= art0 {
                if let Some(pc) = (0..art0).find(|&c| t.at(r, c).abs() > RANK_TOL) {
                    t.pivot(r, pc);
                }
            }
        }
    }

    let mut cost = vec![0.0; cols];
    if obj_scale > 0.0 {
        for j in 0..n {
            cost[j] = p.objective[j] / obj_scale;
            cost[n + j] = -p.objective[j] / obj_scale;
        }
    }
    if let Some(pc) = t.optimize(&cost, art0)? {
        let mut dir = vec![0.0; cols];
        dir[pc] = 1.0;
        for r in 0..m {
            dir[t.basis[r]] -= t.at(r, pc);
        }
        let ray: Vec<f64> = (0..n).map(|j| dir[j] - dir[n + j]).collect();
        return Ok(LpOutcome::Unbounded { ray });
    }

    let mut full = vec![0.0; cols];
    for r in 0..m {
        full[t.basis[r]] = t.rhs(r);
    }
    let point: Vec<f64> = (0..n).map(|j| full[j] - full[n + j]).collect();
    let value = p.value_at(&point);
    Ok(LpOutcome::Optimal { point, value })
}

/// Normalizes a row by its largest coefficient; `None` for a zero row.
fn normalize(row: &[f64], b: f64) -> Option<(Vec<f64>, f64)> {
    let s = row.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    (s > 0.0).then(|| (row.iter().map(|x| x / s).collect(), b / s))
}

/// A program whose constraints arrive one at a time, re-solved from the
/// previous optimal basis by the dual simplex method.
///
/// Every right-hand side must be nonnegative, so the origin is feasible and
/// no phase one is needed. The tableau is rebuilt from the stored rows every
/// [`IncrementalLp::REBUILD_EVERY`] additions to shed accumulated rounding.
pub struct IncrementalLp {
    objective: Vec<f64>,
    rows: Vec<(Vec<f64>, f64)>,
    t: Tableau,
    cost: Vec<f64>,
    added: usize,
}

impl IncrementalLp {
    pub const REBUILD_EVERY: usize = 64;

    pub fn new(objective: Vec<f64>, constraints: Vec<(Vec<f64>, f64)>) -> Result<Self, LinalgError> {
        let n = objective.len();
        if objective.iter().any(|x| !x.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        let mut lp = Self {
            objective,
            rows: Vec::new(),
            t: Tableau {
                rows: 0,
                cols: 2 * n,
                a: Vec::new(),
                basis: Vec::new(),
                split: n,
            },
            cost: Vec::new(),
            added: 0,
        };
        for (row, b) in constraints {
            if let Some(r) = lp.check(row, b)? {
                lp.rows.push(r);
            }
        }
        lp.rebuild();
        Ok(lp)
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    fn check(&self, row: Vec<f64>, b: f64) -> Result<Option<(Vec<f64>, f64)>, LinalgError> {
        if row.len() != self.objective.len() {
            return Err(LinalgError::Shape(format!(
                "constraint has {} coefficients, objective has {}",
                row.len(),
                self.objective.len()
            )));
        }
        if !b.is_finite() || row.iter().any(|x| !x.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        if b < 0.0 {
            return Err(LinalgError::Shape("incremental programs need a feasible origin".into()));
        }
        let Some((row, b)) = normalize(&row, b) else { return Ok(None) };
        let duplicate = self.rows.iter().any(|(r, c)| {
            c <= &(b + DUPLICATE_TOL) && r.iter().zip(&row).all(|(x, y)| (x - y).abs() <= DUPLICATE_TOL)
        });
        Ok((!duplicate).then_some((row, b)))
    }

    /// Slack basis over all stored rows.
    fn rebuild(&mut self) {
        let n = self.objective.len();
        let m = self.rows.len();
        let cols = 2 * n + m;
        let w = cols + 1;
        let mut a = vec![0.0; m * w];
        for (i, (row, b)) in self.rows.iter().enumerate() {
            for j in 0..n {
                a[i * w + j] = row[j];
                a[i * w + n + j] = -row[j];
            }
            a[i * w + 2 * n + i] = 1.0;
            a[i * w + cols] = *b;
        }
        self.t = Tableau {
            rows: m,
            cols,
            a,
            basis: (2 * n..cols).collect(),
            split: n,
        };
        let scale = self.objective.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        self.cost = vec![0.0; cols];
        if scale > 0.0 {
            for j in 0..n {
                self.cost[j] = self.objective[j] / scale;
                self.cost[n + j] = -self.objective[j] / scale;
            }
        }
        self.added = 0;
    }

    /// Adds `row·x ≤ b`; near-duplicates of stored rows are ignored.
    pub fn push(&mut self, row: Vec<f64>, b: f64) -> Result<(), LinalgError> {
        let Some((row, b)) = self.check(row, b)? else { return Ok(()) };
        self.rows.push((row, b));
        self.added += 1;
        if self.added >= Self::REBUILD_EVERY {
            self.rebuild();
            return Ok(());
        }
        let n = self.objective.len();
        let (old_cols, m) = (self.t.cols, self.t.rows);
        let (ow, nw) = (old_cols + 1, old_cols + 2);
        let mut a = vec![0.0; (m + 1) * nw];
        for r in 0..m {
            a[r * nw..r * nw + old_cols].copy_from_slice(&self.t.a[r * ow..r * ow + old_cols]);
            a[r * nw + old_cols + 1] = self.t.a[r * ow + old_cols];
        }
        let (row, b) = &self.rows[self.rows.len() - 1];
        let mut ext = vec![0.0; nw];
        for j in 0..n {
            ext[j] = row[j];
            ext[n + j] = -row[j];
        }
        ext[old_cols] = 1.0;
        ext[old_cols + 1] = *b;
        for r in 0..m {
            let f = ext[self.t.basis[r]];
            if f != 0.0 {
                for c in 0..nw {
                    ext[c] -= f * a[r * nw + c];
                }
            }
        }
        a[m * nw..].copy_from_slice(&ext);
        self.t.a = a;
        self.t.rows = m + 1;
        self.t.cols = old_cols + 1;
        self.t.basis.push(old_cols);
        self.cost.push(0.0);
        Ok(())
    }

    /// Restores primal feasibility by dual simplex (Bland's rule on both
    /// the leaving row and the entering column), then finishes with primal
    /// simplex.
    fn dual_simplex(&mut self) -> Result<bool, LinalgError> {
        for _ in 0..MAX_PIVOTS {
            let leaving = (0..self.t.rows)
                .filter(|&r| self.t.rhs(r) < -FEASIBILITY_TOL)
                .min_by_key(|&r| self.t.basis[r]);
            let Some(pr) = leaving else { return Ok(true) };
            let d = self.t.reduced_costs(&self.cost);
            let mut best: Option<(f64, usize)> = None;
            for j in 0..self.t.cols {
                let coef = self.t.at(pr, j);
                if coef >= -PIVOT_TOL || self.t.basis.contains(&j) {
                    continue;
                }
                let ratio = d[j].min(0.0) / coef;
                if best.is_none_or(|(b, _)| ratio < b - 1e-12 * (1.0 + b)) {
                    best = Some((ratio, j));
                }
            }
            let Some((_, pc)) = best else { return Ok(false) };
            self.t.pivot(pr, pc);
        }
        Err(LinalgError::NoConvergence { sweeps: MAX_PIVOTS })
    }

    pub fn solve(&mut self) -> Result<LpOutcome, LinalgError> {
        if !self.dual_simplex()? {
            return Ok(LpOutcome::Infeasible);
        }
        let n = self.objective.len();
        let cols = self.t.cols;
        if let Some(pc) = self.t.optimize(&self.cost, cols)? {
            let mut dir = vec![0.0; cols];
            dir[pc] = 1.0;
            for r in 0..self.t.rows {
                dir[self.t.basis[r]] -= self.t.at(r, pc);
            }
            let ray: Vec<f64> = (0..n).map(|j| dir[j] - dir[n + j]).collect();
            return Ok(LpOutcome::Unbounded { ray });
        }
        let mut full = vec![0.0; cols];
        for r in 0..self.t.rows {
            full[self.t.basis[r]] = self.t.rhs(r);
        }
        let point: Vec<f64> = (0..n).map(|j| full[j] - full[n + j]).collect();
        let value = dot(&self.objective, &point);
        Ok(LpOutcome::Optimal { point, value })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
