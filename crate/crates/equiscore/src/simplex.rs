//! Dense two-phase simplex over [`LpModel`](crate::lp::LpModel).
//!
//! Every model here is small and dense (a few thousand cells at most), so the
//! solver keeps the full tableau in memory and pivots in place. It maximizes
//! the objective subject to `rows` as `<=` constraints and `x >= 0`.
//!
//! Pivoting starts with Dantzig's rule (most negative reduced cost). If the
//! objective stalls on degenerate vertices for too long, the solver switches
//! to Bland's rule for the rest of the solve, which rules out cycling. Runs
//! are deterministic: the same model and options always take the same pivots.

use std::collections::HashMap;
use std::io::Write;

use thiserror::Error;

use crate::lp::LpModel;
use crate::tolerances;

/// How a solve ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Solver output. `x` and `objective` are meaningful only for
/// [`LpStatus::Optimal`]; otherwise `x` is empty and `objective` is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    /// Recomputed as `dot(objective, x)` on the returned point, not read off
    /// the tableau, so it is consistent with `x` bit for bit.
    pub objective: f64,
    /// Total pivot count across both phases.
    pub iterations: usize,
}

/// Structural problems detected before any arithmetic.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("model has no variables")]
    NoVariables,
    #[error("row {row} has {got} coefficients, expected {expected}")]
    RowLength {
        row: usize,
        expected: usize,
        got: usize,
    },
    #[error("non-finite value in {place}")]
    NonFinite { place: String },
}

/// Knobs for [`solve_with`].
pub struct SimplexOptions<'w> {
    /// Merge constraint pairs that are exact negations of each other
    /// (`a.x <= d` and `-a.x <= -d`) into one equality before solving.
    /// Correction models produce many such pairs; merging halves their row
    /// count. Disabling it must not change the outcome, only the route.
    pub merge_equality_pairs: bool,
    /// When set, receives a line per pivot plus phase summaries.
    pub trace: Option<&'w mut dyn Write>,
}

impl Default for SimplexOptions<'_> {
    fn default() -> Self {
        SimplexOptions {
            merge_equality_pairs: true,
            trace: None,
        }
    }
}

/// Solves with default options.
pub fn solve(model: &LpModel) -> Result<LpSolution, ModelError> {
    solve_with(model, SimplexOptions::default())
}

/// Solves with explicit options.
pub fn solve_with(model: &LpModel, options: SimplexOptions<'_>) -> Result<LpSolution, ModelError> {
    validate(model)?;
    let mut solver = Solver::build(model, options.merge_equality_pairs);
    let solution = solver.run(model, options.trace);
    if cfg!(debug_assertions) {
        if let LpStatus::Optimal = solution.status {
            self_check(model, &solution.x);
        }
    }
    Ok(solution)
}

fn validate(model: &LpModel) -> Result<(), ModelError> {
    let n = model.objective.len();
    if n == 0 {
        return Err(ModelError::NoVariables);
    }
    if model.objective.iter().any(|c| !c.is_finite()) {
        return Err(ModelError::NonFinite {
            place: "objective".to_owned(),
        });
    }
    for (i, row) in model.rows.iter().enumerate() {
        if row.coeffs.len() != n {
            return Err(ModelError::RowLength {
                row: i,
                expected: n,
                got: row.coeffs.len(),
            });
        }
        if !row.rhs.is_finite() || row.coeffs.iter().any(|c| !c.is_finite()) {
            return Err(ModelError::NonFinite {
                place: format!("row {i}"),
            });
        }
    }
    Ok(())
}

/// Debug-only guard: the reported point must satisfy the original rows.
fn self_check(model: &LpModel, x: &[f64]) {
    for v in x {
        debug_assert!(
            *v >= -tolerances::FEASIBILITY,
            "solver returned negative coordinate {v}"
        );
    }
    for (i, row) in model.rows.iter().enumerate() {
        let lhs: f64 = row.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
        debug_assert!(
            lhs <= row.rhs + tolerances::FEASIBILITY,
            "solver output violates row {i}: {lhs} > {}",
            row.rhs
        );
    }
}

/// A constraint after input normalization, before tableau assembly.
struct Constraint {
    coeffs: Vec<f64>,
    rhs: f64,
    equality: bool,
}

/// Hash key of a row's exact bit pattern, with -0.0 folded into 0.0 so a row
/// and its negation hash consistently on zero entries.
fn row_key(coeffs: &[f64], rhs: f64, negate: bool) -> Vec<u64> {
    let norm = |v: f64| {
        let v = if negate { -v } else { v };
        if v == 0.0 {
            0.0f64.to_bits()
        } else {
            v.to_bits()
        }
    };
    let mut key: Vec<u64> = coeffs.iter().map(|&c| norm(c)).collect();
    key.push(norm(rhs));
    key
}

fn exactly_negated(a: &Constraint, b: &Constraint) -> bool {
    a.rhs == -b.rhs && a.coeffs.iter().zip(&b.coeffs).all(|(&p, &q)| p == -q)
}

/// Drops trivial rows and optionally merges exact negation pairs into
/// equalities. Trivial means all-zero coefficients with nonnegative rhs;
/// an all-zero row with negative rhs stays and makes phase 1 fail, which is
/// the honest answer for a contradictory input.
fn normalize_rows(model: &LpModel, merge: bool) -> Vec<Constraint> {
    let mut kept: Vec<Constraint> = Vec::with_capacity(model.rows.len());
    for row in &model.rows {
        let zero = row.coeffs.iter().all(|&c| c == 0.0);
        if zero && row.rhs >= 0.0 {
            continue;
        }
        kept.push(Constraint {
            coeffs: row.coeffs.clone(),
            rhs: row.rhs,
            equality: false,
        });
    }
    if !merge {
        return kept;
    }

    let mut by_key: HashMap<Vec<u64>, Vec<usize>> = HashMap::new();
    for (i, c) in kept.iter().enumerate() {
        by_key
            .entry(row_key(&c.coeffs, c.rhs, false))
            .or_default()
            .push(i);
    }
    let mut consumed = vec![false; kept.len()];
    for i in 0..kept.len() {
        if consumed[i] || kept[i].equality {
            continue;
        }
        let negated = row_key(&kept[i].coeffs, kept[i].rhs, true);
        let Some(candidates) = by_key.get(&negated) else {
            continue;
        };
        // Candidate lists are in row order, so the first match is the
        // earliest partner and the scan is deterministic.
        for &j in candidates {
            if j != i && !consumed[j] && !kept[j].equality && exactly_negated(&kept[i], &kept[j]) {
                kept[i].equality = true;
                consumed[j] = true;
                break;
            }
        }
    }
    let mut merged = Vec::with_capacity(kept.len());
    for (i, c) in kept.into_iter().enumerate() {
        if !consumed[i] {
            merged.push(c);
        }
    }
    merged
}

/// Column layout: structurals, then one slack per inequality, then one
/// artificial per row that needs it, then the rhs as the last column.
struct Solver {
    tableau: Vec<Vec<f64>>,
    /// Active objective row: `z[j]` is the reduced cost of column `j`
    /// (`c_B B^-1 A_j - c_j`), `z[rhs]` the current objective value.
    z: Vec<f64>,
    basis: Vec<usize>,
    cols: ColumnLayout,
    bland: bool,
    stall: usize,
    best_objective: f64,
    iterations: usize,
}

/// Column counts; kept together so the index arithmetic reads clearly.
struct ColumnLayout {
    structural: usize,
    slack: usize,
    artificial: usize,
}

impl ColumnLayout {
    fn total(&self) -> usize {
        self.structural + self.slack + self.artificial
    }
    fn rhs(&self) -> usize {
        self.total()
    }
    fn is_artificial(&self, j: usize) -> bool {
        j >= self.structural + self.slack && j < self.total()
    }
}

impl Solver {
    fn build(model: &LpModel, merge: bool) -> Solver {
        let constraints = normalize_rows(model, merge);
        let n = model.objective.len();
        let n_rows = constraints.len();
        let n_slack = constraints.iter().filter(|c| !c.equality).count();
        let n_art = constraints
            .iter()
            .filter(|c| c.equality || c.rhs < 0.0)
            .count();
        let cols = ColumnLayout {
            structural: n,
            slack: n_slack,
            artificial: n_art,
        };
        let width = cols.total() + 1;

        let mut tableau = vec![vec![0.0; width]; n_rows];
        let mut basis = vec![0usize; n_rows];
        let mut next_slack = n;
        let mut next_art = n + n_slack;
        for (r, c) in constraints.iter().enumerate() {
            let flip = c.rhs < 0.0;
            let sign = if flip { -1.0 } else { 1.0 };
            for (j, &a) in c.coeffs.iter().enumerate() {
                tableau[r][j] = sign * a;
            }
            tableau[r][cols.rhs()] = sign * c.rhs;
            if !c.equality {
                // Flipped inequalities keep their slack as a surplus column
                // and take an artificial for the starting basis.
                tableau[r][next_slack] = sign;
                if flip {
                    tableau[r][next_art] = 1.0;
                    basis[r] = next_art;
                    next_art += 1;
                } else {
                    basis[r] = next_slack;
                }
                next_slack += 1;
            } else {
                tableau[r][next_art] = 1.0;
                basis[r] = next_art;
                next_art += 1;
            }
        }

        Solver {
            tableau,
            z: vec![0.0; width],
            basis,
            cols,
            bland: false,
            stall: 0,
            best_objective: f64::NEG_INFINITY,
            iterations: 0,
        }
    }

    fn run(&mut self, model: &LpModel, mut trace: Option<&mut dyn Write>) -> LpSolution {
        let stall_limit = 3 * (self.tableau.len() + self.cols.total() + 1);

        if self.cols.artificial > 0 {
            self.load_phase_one_objective();
            self.log(&mut trace, "phase 1");
            // Phase 1 maximizes minus the artificial sum, which is bounded
            // above by zero; the ratio test always finds a row, so the
            // Unbounded arm is unreachable here.
            self.optimize(stall_limit, &mut trace);
            if self.z[self.cols.rhs()] < -tolerances::FEASIBILITY {
                return LpSolution {
                    status: LpStatus::Infeasible,
                    x: Vec::new(),
                    objective: 0.0,
                    iterations: self.iterations,
                };
            }
            self.evict_artificials(&mut trace);
        }

        self.load_phase_two_objective(model);
        self.log(&mut trace, "phase 2");
        if !self.optimize(stall_limit, &mut trace) {
            return LpSolution {
                status: LpStatus::Unbounded,
                x: Vec::new(),
                objective: 0.0,
                iterations: self.iterations,
            };
        }

        let mut x = vec![0.0; self.cols.structural];
        for (r, &b) in self.basis.iter().enumerate() {
            if b < self.cols.structural {
                x[b] = self.tableau[r][self.cols.rhs()];
            }
        }
        let objective = model.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        LpSolution {
            status: LpStatus::Optimal,
            x,
            objective,
            iterations: self.iterations,
        }
    }

    /// Phase 1 maximizes `-sum(artificials)`. With every artificial basic,
    /// the reduced-cost row is minus the sum of the artificial rows, plus one
    /// in each artificial column to zero out its own basic entry.
    fn load_phase_one_objective(&mut self) {
        let width = self.cols.rhs() + 1;
        self.z = vec![0.0; width];
        for (r, &b) in self.basis.iter().enumerate() {
            if self.cols.is_artificial(b) {
                for j in 0..width {
                    self.z[j] -= self.tableau[r][j];
                }
            }
        }
        for j in 0..self.cols.total() {
            if self.cols.is_artificial(j) {
                self.z[j] += 1.0;
            }
        }
        self.reset_progress();
    }

    /// Phase 2 prices the real objective against whatever basis phase 1
    /// left behind. Slacks and artificials cost nothing.
    fn load_phase_two_objective(&mut self, model: &LpModel) {
        let width = self.cols.rhs() + 1;
        self.z = vec![0.0; width];
        for (j, &c) in model.objective.iter().enumerate() {
            self.z[j] = -c;
        }
        for (r, &b) in self.basis.iter().enumerate() {
            if b < self.cols.structural {
                let weight = model.objective[b];
                if weight != 0.0 {
                    for j in 0..width {
                        self.z[j] += weight * self.tableau[r][j];
                    }
                }
            }
        }
        // Basic columns must price to exactly zero; enforce it to keep
        // rounding dust out of the entering scan.
        for &b in &self.basis {
            self.z[b] = 0.0;
        }
        self.reset_progress();
    }

    fn reset_progress(&mut self) {
        self.stall = 0;
        self.best_objective = f64::NEG_INFINITY;
    }

    /// Pivots to optimality. Returns false when the objective is unbounded.
    fn optimize(&mut self, stall_limit: usize, trace: &mut Option<&mut dyn Write>) -> bool {
        loop {
            let Some(enter) = self.entering() else {
                return true;
            };
            let Some(leave) = self.leaving(enter) else {
                return false;
            };
            self.pivot(leave, enter);
            if let Some(w) = trace.as_deref_mut() {
                let _ = writeln!(
                    w,
                    "pivot {}: col {} enters, row {} leaves, objective {:.12}",
                    self.iterations,
                    enter,
                    leave,
                    self.z[self.cols.rhs()]
                );
            }
            self.track_progress();
            if !self.bland && self.stall > stall_limit {
                self.bland = true;
                if let Some(w) = trace.as_deref_mut() {
                    let _ = writeln!(w, "stalled for {} pivots, switching to Bland", self.stall);
                }
            }
            assert!(
                self.iterations < 2_000_000,
                "simplex exceeded the pivot cap; anti-cycling should make this unreachable"
            );
        }
    }

    fn track_progress(&mut self) {
        let value = self.z[self.cols.rhs()];
        if value > self.best_objective + 1e-12 {
            self.best_objective = value;
            self.stall = 0;
        } else {
            self.stall += 1;
        }
    }

    /// Entering column, or None at optimality. Artificials never re-enter.
    fn entering(&self) -> Option<usize> {
        let limit = self.cols.structural + self.cols.slack;
        if self.bland {
            (0..limit).find(|&j| self.z[j] < -tolerances::PIVOT)
        } else {
            let mut best: Option<(usize, f64)> = None;
            for j in 0..limit {
                let zj = self.z[j];
                if zj < -tolerances::PIVOT && best.is_none_or(|(_, v)| zj < v) {
                    best = Some((j, zj));
                }
            }
            best.map(|(j, _)| j)
        }
    }

    /// Minimum-ratio row for the entering column, or None when no entry is
    /// positive (unbounded direction). Exact ratio ties break toward the
    /// lowest row index, or the smallest basic variable under Bland's rule.
    fn leaving(&self, enter: usize) -> Option<usize> {
        let rhs = self.cols.rhs();
        let mut best: Option<(usize, f64)> = None;
        for (r, row) in self.tableau.iter().enumerate() {
            let a = row[enter];
            if a <= tolerances::PIVOT {
                continue;
            }
            let ratio = row[rhs] / a;
            let better = match best {
                None => true,
                Some((cur, cur_ratio)) => {
                    ratio < cur_ratio
                        || (ratio == cur_ratio && self.bland && self.basis[r] < self.basis[cur])
                }
            };
            if better {
                best = Some((r, ratio));
            }
        }
        best.map(|(r, _)| r)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let rhs = self.cols.rhs();
        let head = self.tableau[row][col];
        for v in self.tableau[row].iter_mut() {
            *v /= head;
        }
        self.tableau[row][col] = 1.0;
        let pivot_row = self.tableau[row].clone();
        for (r, other) in self.tableau.iter_mut().enumerate() {
            if r == row {
                continue;
            }
            let factor = other[col];
            if factor != 0.0 {
                for j in 0..=rhs {
                    other[j] -= factor * pivot_row[j];
                }
                other[col] = 0.0;
            }
        }
        let factor = self.z[col];
        if factor != 0.0 {
            for (zj, pj) in self.z.iter_mut().zip(pivot_row) {
                *zj -= factor * pj;
            }
            self.z[col] = 0.0;
        }
        self.basis[row] = col;
        self.iterations += 1;
    }

    /// After phase 1, artificials can linger in the basis at value zero.
    /// Pivot each out on any usable real column; a row with no such column
    /// is redundant and gets zeroed in place, inert from then on.
    fn evict_artificials(&mut self, trace: &mut Option<&mut dyn Write>) {
        let real = self.cols.structural + self.cols.slack;
        for r in 0..self.tableau.len() {
            if !self.cols.is_artificial(self.basis[r]) {
                continue;
            }
            let col = (0..real).find(|&j| self.tableau[r][j].abs() > tolerances::PIVOT);
            match col {
                Some(j) => {
                    self.pivot(r, j);
                    if let Some(w) = trace.as_deref_mut() {
                        let _ = writeln!(w, "evicted artificial from row {r} via column {j}");
                    }
                }
                None => {
                    for v in self.tableau[r].iter_mut() {
                        *v = 0.0;
                    }
                    if let Some(w) = trace.as_deref_mut() {
                        let _ = writeln!(w, "row {r} is redundant, zeroed");
                    }
                }
            }
        }
    }

    fn log(&self, trace: &mut Option<&mut dyn Write>, label: &str) {
        if let Some(w) = trace.as_deref_mut() {
            let _ = writeln!(
                w,
                "{label}: {} rows, {} structural + {} slack + {} artificial columns",
                self.tableau.len(),
                self.cols.structural,
                self.cols.slack,
                self.cols.artificial
            );
        }
    }
}
