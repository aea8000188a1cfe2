//! Two-phase primal simplex on a dense tableau.
//!
//! Bounds are folded into the standard form before the tableau is built:
//! finite lower bounds are shifted out, fixed variables substituted, free
//! variables split and finite upper bounds turned into extra `<=` rows.
//! Row operations only touch the nonzero columns of the pivot row, which keeps
//! flow-style models with mostly empty rows cheap.

use num_rational::BigRational;
use num_traits::Zero;

use crate::num::Scalar;

use super::model::{LinearProgram, LpSolution, LpStatus, Relation, Sense};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Default)]
pub enum PivotRule {
    /// Smallest-index entering and leaving choice. Never cycles.
    #[default]
    Bland,
    /// Most negative reduced cost, switching to Bland's rule after a run of
    /// degenerate pivots and back once the objective moves again.
    DantzigWithBlandFallback,
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub pivot_rule: PivotRule,
    /// Total pivot budget over both phases. `None` derives a budget from the
    /// tableau size.
    pub max_iterations: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            pivot_rule: PivotRule::Bland,
            max_iterations: None,
        }
    }
}

/// Solves `lp` with default options.
pub fn solve_lp<T: Scalar>(lp: &LinearProgram<T>) -> LpSolution<T> {
    solve_lp_with(lp, &SolveOptions::default())
}

pub fn solve_lp_with<T: Scalar>(lp: &LinearProgram<T>, opts: &SolveOptions) -> LpSolution<T> {
    let sol = solve_tableau(lp, opts);
    if sol.status != LpStatus::IterationLimit || T::is_exact() || opts.max_iterations.is_some() {
        return sol;
    }
    // Round-off can make Bland's rule cycle. Exact arithmetic cannot.
    let exact = lp.map_scalar(|v| BigRational::from_float(v.to_f64_value()).unwrap_or_else(BigRational::zero));
    let e = solve_tableau(&exact, opts);
    let values: Vec<T> = e.values.iter().map(|v| T::from_f64_value(v.to_f64_value())).collect();
    let objective = if e.status == LpStatus::Optimal {
        lp.evaluate(&values)
    } else {
        T::zero()
    };
    LpSolution::new(lp, e.status, objective, values, sol.iterations + e.iterations)
}

fn solve_tableau<T: Scalar>(lp: &LinearProgram<T>, opts: &SolveOptions) -> LpSolution<T> {
    let std = match StandardForm::build(lp) {
        Ok(s) => s,
        Err(()) => return infeasible(lp, 0),
    };
    let mut tab = Tableau::new(&std);
    let budget = opts
        .max_iterations
        .unwrap_or_else(|| 50 * (tab.rows + tab.cols) + 1000);

    // Phase I.
    if tab.has_artificials() {
        match tab.run(opts.pivot_rule, budget) {
            Outcome::Optimal => {}
            Outcome::Limit => return limited(lp, tab.iterations),
            // The phase-one objective is bounded by zero.
            Outcome::Unbounded => return limited(lp, tab.iterations),
        }
        let mut phase1 = tab.objective_value();
        phase1.flush();
        if phase1 < -T::feasibility_tolerance() * scale_of(&std.rhs) {
            return infeasible(lp, tab.iterations);
        }
        tab.drop_artificials();
    }

    tab.install_objective(&std.cost);
    let remaining = budget.saturating_sub(tab.iterations);
    match tab.run(opts.pivot_rule, remaining) {
        Outcome::Optimal => {}
        Outcome::Unbounded => {
            return LpSolution::new(lp, LpStatus::Unbounded, T::zero(), vec![T::zero(); lp.num_variables()], tab.iterations)
        }
        Outcome::Limit => return limited(lp, tab.iterations),
    }

    let columns = tab.primal_values();
    let values = std.recover(&columns);
    let objective = lp.evaluate(&values);
    LpSolution::new(lp, LpStatus::Optimal, objective, values, tab.iterations)
}

fn scale_of<T: Scalar>(rhs: &[T]) -> T {
    let mut s = T::one();
    for v in rhs {
        let a = v.abs();
        if a > s {
            s = a;
        }
    }
    s
}

fn infeasible<T: Scalar>(lp: &LinearProgram<T>, iterations: usize) -> LpSolution<T> {
    LpSolution::new(lp, LpStatus::Infeasible, T::zero(), vec![T::zero(); lp.num_variables()], iterations)
}

fn limited<T: Scalar>(lp: &LinearProgram<T>, iterations: usize) -> LpSolution<T> {
    LpSolution::new(lp, LpStatus::IterationLimit, T::zero(), vec![T::zero(); lp.num_variables()], iterations)
}

/// How a model variable is expressed through standard-form columns.
#[derive(Clone, Debug)]
enum VarMap<T> {
    Fixed(T),
    /// `x = offset + col`
    Shifted { col: usize, offset: T },
    /// `x = offset - col`
    Mirrored { col: usize, offset: T },
    /// `x = pos - neg`
    Split { pos: usize, neg: usize },
}

/// `max cost·x` subject to `rows`, `x >= 0`.
struct StandardForm<T> {
    map: Vec<VarMap<T>>,
    ncols: usize,
    rows: Vec<Vec<(usize, T)>>,
    relations: Vec<Relation>,
    rhs: Vec<T>,
    cost: Vec<T>,
}

impl<T: Scalar> StandardForm<T> {
    fn build(lp: &LinearProgram<T>) -> Result<Self, ()> {
        let mut map = Vec::with_capacity(lp.num_variables());
        let mut ncols = 0;
        let mut rows = Vec::new();
        let mut relations = Vec::new();
        let mut rhs = Vec::new();
        let mut bound_rows = Vec::new();

        for (_, _, v) in lp.variables() {
            let m = match (&v.lower, &v.upper) {
                (Some(l), Some(u)) if l == u => VarMap::Fixed(l.clone()),
                (Some(l), Some(u)) => {
                    if u < l {
                        return Err(());
                    }
                    let col = ncols;
                    ncols += 1;
                    bound_rows.push((col, u.clone() - l.clone()));
                    VarMap::Shifted { col, offset: l.clone() }
                }
                (Some(l), None) => {
                    ncols += 1;
                    VarMap::Shifted {
                        col: ncols - 1,
                        offset: l.clone(),
                    }
                }
                (None, Some(u)) => {
                    ncols += 1;
                    VarMap::Mirrored {
                        col: ncols - 1,
                        offset: u.clone(),
                    }
                }
                (None, None) => {
                    ncols += 2;
                    VarMap::Split {
                        pos: ncols - 2,
                        neg: ncols - 1,
                    }
                }
            };
            map.push(m);
        }

        for c in lp.constraints() {
            let mut row = Vec::with_capacity(c.terms.len());
            let mut b = c.rhs.clone();
            for (var, k) in &c.terms {
                match &map[var.index()] {
                    VarMap::Fixed(v) => b = b - k.clone() * v.clone(),
                    VarMap::Shifted { col, offset } => {
                        b = b - k.clone() * offset.clone();
                        row.push((*col, k.clone()));
                    }
                    VarMap::Mirrored { col, offset } => {
                        b = b - k.clone() * offset.clone();
                        row.push((*col, -k.clone()));
                    }
                    VarMap::Split { pos, neg } => {
                        row.push((*pos, k.clone()));
                        row.push((*neg, -k.clone()));
                    }
                }
            }
            if row.is_empty() {
                let tol = T::feasibility_tolerance();
                let ok = match c.relation {
                    Relation::Le => b >= -tol.clone(),
                    Relation::Ge => b <= tol,
                    Relation::Eq => b.abs() <= tol,
                };
                if !ok {
                    return Err(());
                }
                continue;
            }
            rows.push(row);
            relations.push(c.relation);
            rhs.push(b);
        }
        for (col, ub) in bound_rows {
            rows.push(vec![(col, T::one())]);
            relations.push(Relation::Le);
            rhs.push(ub);
        }

        let flip = lp.sense() == Sense::Minimize;
        let mut cost = vec![T::zero(); ncols];
        for (var, k) in lp.objective() {
            let k = if flip { -k.clone() } else { k.clone() };
            match &map[var.index()] {
                VarMap::Fixed(_) => {}
                VarMap::Shifted { col, .. } => cost[*col] = cost[*col].clone() + k,
                VarMap::Mirrored { col, .. } => cost[*col] = cost[*col].clone() - k,
                VarMap::Split { pos, neg } => {
                    cost[*pos] = cost[*pos].clone() + k.clone();
                    cost[*neg] = cost[*neg].clone() - k;
                }
            }
        }

        Ok(Self {
            map,
            ncols,
            rows,
            relations,
            rhs,
            cost,
        })
    }

    fn recover(&self, cols: &[T]) -> Vec<T> {
        self.map
            .iter()
            .map(|m| {
                let mut v = match m {
                    VarMap::Fixed(v) => v.clone(),
                    VarMap::Shifted { col, offset } => offset.clone() + cols[*col].clone(),
                    VarMap::Mirrored { col, offset } => offset.clone() - cols[*col].clone(),
                    VarMap::Split { pos, neg } => cols[*pos].clone() - cols[*neg].clone(),
                };
                v.flush();
                v
            })
            .collect()
    }
}

enum Outcome {
    Optimal,
    Unbounded,
    Limit,
}

/// Row-major tableau. Row `rows` is the objective row holding `-c` reduced
/// costs and the current objective value in the right-hand-side column.
/// Pivot elements below this trigger a reinversion first.
const SUSPECT_PIVOT: f64 = 1e-5;
/// An optimal tableau this many pivots past its last rebuild is rebuilt and
/// checked again before it is trusted.
const REINVERT_AGE: usize = 100;

struct Tableau<T> {
    rows: usize,
    cols: usize,
    /// Width including the right-hand side.
    width: usize,
    data: Vec<T>,
    basis: Vec<usize>,
    /// Columns at or beyond this index are artificial.
    first_artificial: usize,
    iterations: usize,
    /// Initial constraint rows, kept for reinversion. Never loses rows, so
    /// redundant ones are rediscovered on each reinversion.
    orig: Vec<T>,
    orig_rows: usize,
    /// Cost vector of the current phase, maximized.
    cost: Vec<T>,
}

impl<T: Scalar> Tableau<T> {
    fn new(std: &StandardForm<T>) -> Self {
        let m = std.rows.len();
        let n = std.ncols;
        // Slack per inequality, then artificial per row without a unit slack.
        let mut slack_count = 0;
        let mut art_count = 0;
        let mut signs = Vec::with_capacity(m);
        for (i, rel) in std.relations.iter().enumerate() {
            let neg = std.rhs[i] < T::zero();
            let rel = match (rel, neg) {
                (Relation::Le, true) => Relation::Ge,
                (Relation::Ge, true) => Relation::Le,
                (r, _) => *r,
            };
            signs.push((neg, rel));
            match rel {
                Relation::Le => slack_count += 1,
                Relation::Ge => {
                    slack_count += 1;
                    art_count += 1;
                }
                Relation::Eq => art_count += 1,
            }
        }
        let first_artificial = n + slack_count;
        let cols = first_artificial + art_count;
        let width = cols + 1;
        let mut data = vec![T::zero(); (m + 1) * width];
        let mut basis = vec![0; m];
        let mut next_slack = n;
        let mut next_art = first_artificial;
        for (i, row) in std.rows.iter().enumerate() {
            let (neg, rel) = signs[i];
            let base = i * width;
            for (c, k) in row {
                let k = if neg { -k.clone() } else { k.clone() };
                data[base + c] = data[base + c].clone() + k;
            }
            let b = if neg { -std.rhs[i].clone() } else { std.rhs[i].clone() };
            data[base + cols] = b;
            match rel {
                Relation::Le => {
                    data[base + next_slack] = T::one();
                    basis[i] = next_slack;
                    next_slack += 1;
                }
                Relation::Ge => {
                    data[base + next_slack] = -T::one();
                    next_slack += 1;
                    data[base + next_art] = T::one();
                    basis[i] = next_art;
                    next_art += 1;
                }
                Relation::Eq => {
                    data[base + next_art] = T::one();
                    basis[i] = next_art;
                    next_art += 1;
                }
            }
        }
        let mut cost = vec![T::zero(); cols];
        for c in cost.iter_mut().skip(first_artificial) {
            *c = -T::one();
        }
        let orig = if T::is_exact() { Vec::new() } else { data[..m * width].to_vec() };
        let mut tab = Self {
            rows: m,
            cols,
            width,
            data,
            basis,
            first_artificial,
            iterations: 0,
            orig,
            orig_rows: m,
            cost,
        };
        // Phase-one objective: maximize minus the sum of artificials.
        let obj = m * width;
        for i in 0..m {
            if tab.basis[i] >= first_artificial {
                for j in 0..width {
                    if j >= first_artificial && j < cols {
                        continue;
                    }
                    let v = tab.data[i * width + j].clone();
                    if !v.is_zero() {
                        tab.data[obj + j] = tab.data[obj + j].clone() - v;
                    }
                }
            }
        }
        tab
    }

    fn has_artificials(&self) -> bool {
        self.first_artificial < self.cols
    }

    fn objective_value(&self) -> T {
        self.data[self.rows * self.width + self.cols].clone()
    }

    fn run(&mut self, rule: PivotRule, budget: usize) -> Outcome {
        let tol = T::pivot_tolerance();
        let neg_tol = -tol.clone();
        let obj = self.rows * self.width;
        let mut degenerate_run = 0usize;
        let mut used = 0usize;
        // Whether the tableau was just rebuilt, and pivots since the tableau was last rebuilt from the original rows.
        let mut fresh = false;
        let mut age = 0usize;
        loop {
            let use_bland = match rule {
                PivotRule::Bland => true,
                PivotRule::DantzigWithBlandFallback => degenerate_run >= 50,
            };
            let mut enter = None;
            if use_bland {
                for j in 0..self.cols {
                    if self.data[obj + j] < neg_tol {
                        enter = Some(j);
                        break;
                    }
                }
            } else {
                let mut best = neg_tol.clone();
                for j in 0..self.cols {
                    if self.data[obj + j] < best {
                        best = self.data[obj + j].clone();
                        enter = Some(j);
                    }
                }
            }
            let Some(col) = enter else {
                if age >= REINVERT_AGE && self.reinvert() {
                    age = 0;
                    fresh = true;
                    continue;
                }
                return Outcome::Optimal;
            };
            if used >= budget {
                return Outcome::Limit;
            }

            // Ratio test; ties, up to round-off, go to the smallest basic
            // index. Exact ties only would let Bland's rule cycle in floats.
            let mut leave: Option<(usize, T)> = None;
            for i in 0..self.rows {
                let a = &self.data[i * self.width + col];
                if *a > tol {
                    // Round-off can leave basic values slightly negative.
                    let b = self.data[i * self.width + self.cols].clone();
                    let b = if b < T::zero() { T::zero() } else { b };
                    let ratio = b / a.clone();
                    let better = match &leave {
                        None => true,
                        Some((r, best)) => {
                            let slack = tol.clone() * (T::one() + best.abs());
                            ratio < best.clone() - slack.clone()
                                || (ratio <= best.clone() + slack && self.basis[i] < self.basis[*r])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((row, ratio)) = leave else {
                return Outcome::Unbounded;
            };
            if ratio.is_zero() {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            // A small pivot may be round-off; recompute before trusting it.
            if !fresh && self.data[row * self.width + col].abs() < T::from_f64_value(SUSPECT_PIVOT) && self.reinvert() {
                fresh = true;
                age = 0;
                continue;
            }
            self.pivot(row, col);
            fresh = false;
            age += 1;
            used += 1;
            self.iterations += 1;
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let w = self.width;
        let base = row * w;
        let p = self.data[base + col].clone();
        let mut nz: Vec<(usize, T)> = Vec::new();
        for j in 0..w {
            let v = &mut self.data[base + j];
            if v.is_zero() {
                continue;
            }
            let mut q = v.clone() / p.clone();
            q.flush();
            *v = q.clone();
            if !q.is_zero() {
                nz.push((j, q));
            }
        }
        self.data[base + col] = T::one();
        for i in 0..=self.rows {
            if i == row {
                continue;
            }
            let rb = i * w;
            let f = self.data[rb + col].clone();
            if f.is_zero() {
                continue;
            }
            for (j, q) in &nz {
                let cell = &mut self.data[rb + j];
                let mut v = cell.clone() - f.clone() * q.clone();
                v.flush();
                *cell = v;
            }
            self.data[rb + col] = T::zero();
        }
        self.basis[row] = col;
    }

    /// Pivots zero-level artificials out of the basis, drops redundant rows
    /// and removes the artificial columns.
    fn drop_artificials(&mut self) {
        let tol = T::pivot_tolerance();
        let mut redundant = Vec::new();
        for i in 0..self.rows {
            if self.basis[i] < self.first_artificial {
                continue;
            }
            let rb = i * self.width;
            let mut pick: Option<(usize, T)> = None;
            for j in 0..self.first_artificial {
                let a = self.data[rb + j].abs();
                if a > tol && pick.as_ref().map_or(true, |(_, b)| a > *b) {
                    pick = Some((j, a));
                }
            }
            match pick {
                Some((j, _)) => self.pivot(i, j),
                None => redundant.push(i),
            }
        }
        let keep_cols = self.first_artificial;
        let new_width = keep_cols + 1;
        let mut data = Vec::with_capacity((self.rows - redundant.len() + 1) * new_width);
        let mut basis = Vec::new();
        for i in 0..=self.rows {
            if redundant.contains(&i) {
                continue;
            }
            let rb = i * self.width;
            data.extend(self.data[rb..rb + keep_cols].iter().cloned());
            data.push(self.data[rb + self.cols].clone());
            if i < self.rows {
                basis.push(self.basis[i]);
            }
        }
        if !self.orig.is_empty() {
            let mut orig = Vec::with_capacity(self.orig_rows * new_width);
            for i in 0..self.orig_rows {
                let rb = i * self.width;
                orig.extend(self.orig[rb..rb + keep_cols].iter().cloned());
                orig.push(self.orig[rb + self.cols].clone());
            }
            self.orig = orig;
        }
        self.rows -= redundant.len();
        self.cols = keep_cols;
        self.width = new_width;
        self.data = data;
        self.basis = basis;
        self.cost.truncate(keep_cols);
    }

    /// Rebuilds the tableau for the current basis from the original rows
    /// by Gauss-Jordan elimination with partial pivoting. Returns false,
    /// leaving the tableau untouched, when the basis looks singular.
    fn reinvert(&mut self) -> bool {
        if self.orig.is_empty() {
            return false;
        }
        let w = self.width;
        let mut m = self.orig.clone();
        let mut used = vec![false; self.orig_rows];
        let mut order = Vec::with_capacity(self.rows);
        for &c in &self.basis {
            let mut pick: Option<(usize, T)> = None;
            for (r, u) in used.iter().enumerate() {
                let a = m[r * w + c].abs();
                if !*u && pick.as_ref().map_or(true, |(_, b)| a > *b) {
                    pick = Some((r, a));
                }
            }
            let Some((r, a)) = pick else { return false };
            if a < T::from_f64_value(1e-9) {
                return false;
            }
            used[r] = true;
            order.push(r);
            let p = m[r * w + c].clone();
            let mut nz = Vec::new();
            for j in 0..w {
                let v = &mut m[r * w + j];
                if v.is_zero() {
                    continue;
                }
                let mut q = v.clone() / p.clone();
                q.flush();
                *v = q.clone();
                if !q.is_zero() {
                    nz.push((j, q));
                }
            }
            m[r * w + c] = T::one();
            for i in 0..self.orig_rows {
                if i == r {
                    continue;
                }
                let f = m[i * w + c].clone();
                if f.is_zero() {
                    continue;
                }
                for (j, q) in &nz {
                    let mut v = m[i * w + j].clone() - f.clone() * q.clone();
                    v.flush();
                    m[i * w + j] = v;
                }
                m[i * w + c] = T::zero();
            }
        }
        let mut data = Vec::with_capacity((self.rows + 1) * w);
        for &r in &order {
            data.extend(m[r * w..(r + 1) * w].iter().cloned());
        }
        let mut obj = vec![T::zero(); w];
        for (j, c) in self.cost.iter().enumerate() {
            obj[j] = -c.clone();
        }
        for (k, &b) in self.basis.iter().enumerate() {
            let cb = self.cost[b].clone();
            if cb.is_zero() {
                continue;
            }
            for j in 0..w {
                let a = &data[k * w + j];
                if !a.is_zero() {
                    obj[j] = obj[j].clone() + cb.clone() * a.clone();
                }
            }
        }
        for (j, v) in obj.iter_mut().enumerate() {
            if self.basis.contains(&j) {
                *v = T::zero();
            }
            v.flush();
        }
        data.extend(obj);
        self.data = data;
        true
    }

    /// Replaces the objective row with `-cost` reduced against the basis.
    fn install_objective(&mut self, cost: &[T]) {
        self.cost = cost.to_vec();
        self.cost.resize(self.cols, T::zero());
        let obj = self.rows * self.width;
        for j in 0..self.width {
            self.data[obj + j] = T::zero();
        }
        for (j, c) in cost.iter().enumerate() {
            self.data[obj + j] = -c.clone();
        }
        for i in 0..self.rows {
            let b = self.basis[i];
            let f = self.data[obj + b].clone();
            if f.is_zero() {
                continue;
            }
            let rb = i * self.width;
            for j in 0..self.width {
                let a = &self.data[rb + j];
                if a.is_zero() {
                    continue;
                }
                let mut v = self.data[obj + j].clone() - f.clone() * a.clone();
                v.flush();
                self.data[obj + j] = v;
            }
            self.data[obj + b] = T::zero();
        }
    }

    fn primal_values(&self) -> Vec<T> {
        let mut x = vec![T::zero(); self.cols];
        for i in 0..self.rows {
            let mut v = self.data[i * self.width + self.cols].clone();
            v.flush();
            if v < T::zero() {
                v = T::zero();
            }
            x[self.basis[i]] = v;
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::ratio;
    use num_rational::BigRational;

    fn lp1() -> LinearProgram<f64> {
        let mut lp = LinearProgram::new("t");
        let x = lp.add_nonneg("x").unwrap();
        lp.add_constraint("", vec![(x, 1.0)], Relation::Le, 3.0).unwrap();
        lp.set_objective(Sense::Maximize, vec![(x, 1.0)]).unwrap();
        lp
    }

    #[test]
    fn single_bound_row() {
        let s = solve_lp(&lp1());
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 3.0).abs() < 1e-12);
    }

    #[test]
    fn two_variables_sum() {
        let mut lp = LinearProgram::new("t");
        let x = lp.add_nonneg("x").unwrap();
        let y = lp.add_nonneg("y").unwrap();
        lp.add_constraint("", vec![(x, 1.0), (y, 1.0)], Relation::Le, 1.0).unwrap();
        lp.add_constraint("", vec![(x, 1.0)], Relation::Le, 0.5).unwrap();
        lp.set_objective(Sense::Maximize, vec![(x, 1.0), (y, 1.0)]).unwrap();
        let s = solve_lp(&lp);
        assert!((s.objective - 1.0_f64).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::<f64>::new("t");
        let x = lp.add_nonneg("x").unwrap();
        lp.add_constraint("", vec![(x, 1.0)], Relation::Ge, 2.0).unwrap();
        lp.add_constraint("", vec![(x, 1.0)], Relation::Le, 1.0).unwrap();
        assert_eq!(solve_lp(&lp).status, LpStatus::Infeasible);

        let mut lp = LinearProgram::<f64>::new("t");
        let x = lp.add_nonneg("x").unwrap();
        let y = lp.add_nonneg("y").unwrap();
        lp.add_constraint("", vec![(x, 1.0), (y, -1.0)], Relation::Le, 1.0).unwrap();
        lp.set_objective(Sense::Maximize, vec![(x, 1.0)]).unwrap();
        assert_eq!(solve_lp(&lp).status, LpStatus::Unbounded);
    }

    #[test]
    fn bounds_free_and_minimize() {
        // min x - y with x in [-2, 5], y free, y <= 3 + x/2 ... y <= 4.
        let mut lp = LinearProgram::<f64>::new("t");
        let x = lp.add_variable("x", Some(-2.0), Some(5.0)).unwrap();
        let y = lp.add_variable("y", None, None).unwrap();
        lp.add_constraint("", vec![(y, 1.0)], Relation::Le, 4.0).unwrap();
        lp.set_objective(Sense::Minimize, vec![(x, 1.0), (y, -1.0)]).unwrap();
        let s = solve_lp(&lp);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective + 6.0).abs() < 1e-9);
        assert!((s.value("x").unwrap() + 2.0).abs() < 1e-9);
    }

    #[test]
    fn upper_only_and_fixed() {
        let mut lp = LinearProgram::<f64>::new("t");
        let x = lp.add_variable("x", None, Some(1.5)).unwrap();
        let y = lp.add_variable("y", Some(2.0), Some(2.0)).unwrap();
        lp.add_constraint("", vec![(x, 1.0), (y, 1.0)], Relation::Ge, 0.0).unwrap();
        lp.set_objective(Sense::Maximize, vec![(x, 1.0), (y, 1.0)]).unwrap();
        let s = solve_lp(&lp);
        assert!((s.objective - 3.5).abs() < 1e-9);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::<f64>::new("t");
        let x = lp.add_nonneg("x").unwrap();
        let y = lp.add_nonneg("y").unwrap();
        lp.add_constraint("", vec![(x, 1.0), (y, 1.0)], Relation::Eq, 2.0).unwrap();
        lp.add_constraint("", vec![(x, 2.0), (y, 2.0)], Relation::Eq, 4.0).unwrap();
        lp.set_objective(Sense::Maximize, vec![(x, 3.0), (y, 1.0)]).unwrap();
        let s = solve_lp(&lp);
        assert!((s.objective - 6.0).abs() < 1e-9);
    }

    #[test]
    fn exact_rational_matches_float() {
        let mut lp = LinearProgram::<BigRational>::new("t");
        let x = lp.add_nonneg("x").unwrap();
        let y = lp.add_nonneg("y").unwrap();
        lp.add_constraint("", vec![(x, ratio(3, 1)), (y, ratio(1, 1))], Relation::Le, ratio(1, 1))
            .unwrap();
        lp.add_constraint("", vec![(x, ratio(1, 1)), (y, ratio(3, 1))], Relation::Le, ratio(1, 1))
            .unwrap();
        lp.set_objective(Sense::Maximize, vec![(x, ratio(1, 1)), (y, ratio(1, 1))])
            .unwrap();
        let s = solve_lp(&lp);
        assert_eq!(s.objective, ratio(1, 2));
        let f = solve_lp(&lp.map_scalar(|v| v.to_f64_value()));
        assert!((f.objective - 0.5).abs() < 1e-12);
    }

    #[test]
    fn pivot_rules_agree() {
        let lp = lp1();
        let o = SolveOptions {
            pivot_rule: PivotRule::DantzigWithBlandFallback,
            max_iterations: None,
        };
        assert_eq!(solve_lp_with(&lp, &o).objective, solve_lp(&lp).objective);
    }
}
