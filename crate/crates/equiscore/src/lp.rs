//! Linear models for flat corrections on a partition.
//!
//! A correction that is flat on each group of a partition is determined
//! by one bonus and one malus value per group. Given the per-group mass
//! each population places on each group, hitting residual targets (or
//! staying within an error budget) becomes a small linear program over
//! `2m + 1` variables: `m` bonuses, `m` maluses and one level variable
//! that the objective pushes down.
//!
//! Two model shapes are built here:
//!
//! * forward: minimize the level subject to `bonus, malus <= level`
//!   (per group) and exact per-population equality with the residuals,
//!   encoded as paired `<=` rows;
//! * budgeted: bonuses and maluses are capped by a given budget and the
//!   level bounds the worst remaining residual gap instead.
//!
//! At a forward optimum the level equals the sup-norm of the decoded
//! correction, and any optimum can be canonicalized so that no group
//! carries both a bonus and a malus.

use thiserror::Error;

use crate::reduction::ResidualTargets;
use crate::space::{Partition, PopulationModel, ProfileSpace, ScoreTable};

/// Per-population, per-group density mass: entry `(i, j)` is the weighted
/// mass population `i` places on group `j`. Rows sum to 1 for normalized
/// densities.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupMassMatrix {
    masses: Vec<Vec<f64>>,
}

impl GroupMassMatrix {
    pub fn populations(&self) -> usize {
        self.masses.len()
    }

    pub fn groups(&self) -> usize {
        self.masses.first().map_or(0, Vec::len)
    }

    pub fn row(&self, population: usize) -> &[f64] {
        &self.masses[population]
    }

    pub fn get(&self, population: usize, group: usize) -> f64 {
        self.masses[population][group]
    }
}

/// Accumulates each population's weighted density mass per group.
pub fn group_mass(
    space: &ProfileSpace,
    populations: &[PopulationModel],
    partition: &Partition,
) -> GroupMassMatrix {
    debug_assert_eq!(partition.cells(), space.len());
    let masses = populations
        .iter()
        .map(|pop| {
            debug_assert_eq!(pop.density().len(), space.len());
            let mut row = vec![0.0; partition.group_count()];
            for (cell, &group) in partition.group_of().iter().enumerate() {
                row[group] += pop.density()[cell] * space.weights()[cell];
            }
            row
        })
        .collect();
    GroupMassMatrix { masses }
}

/// One `<=` constraint: `coeffs . x <= rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    pub coeffs: Vec<f64>,
    pub rhs: f64,
}

/// A maximization over nonnegative variables with `<=` rows only.
#[derive(Debug, Clone, PartialEq)]
pub struct LpModel {
    /// Coefficients of the maximized objective, one per variable.
    pub objective: Vec<f64>,
    pub rows: Vec<LpRow>,
    /// Display names, one per variable.
    pub names: Vec<String>,
}

impl LpModel {
    /// Builds a model with default variable names `x1..xN`.
    pub fn new(objective: Vec<f64>, rows: Vec<LpRow>) -> Self {
        let names = (1..=objective.len()).map(|i| format!("x{i}")).collect();
        Self {
            objective,
            rows,
            names,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    /// Plain-text listing of the model, one row per line. Debug aid.
    pub fn debug_listing(&self) -> String {
        let mut out = String::new();
        out.push_str("max ");
        out.push_str(&Self::combination(&self.objective, &self.names));
        out.push('\n');
        for (k, row) in self.rows.iter().enumerate() {
            out.push_str(&format!(
                "r{}: {} <= {}\n",
                k + 1,
                Self::combination(&row.coeffs, &self.names),
                row.rhs
            ));
        }
        out
    }

    fn combination(coeffs: &[f64], names: &[String]) -> String {
        let mut terms = String::new();
        for (c, name) in coeffs.iter().zip(names) {
            if *c == 0.0 {
                continue;
            }
            if terms.is_empty() {
                if *c < 0.0 {
                    terms.push('-');
                }
            } else {
                terms.push_str(if *c < 0.0 { " - " } else { " + " });
            }
            let mag = c.abs();
            if mag == 1.0 {
                terms.push_str(name);
            } else {
                terms.push_str(&format!("{mag} {name}"));
            }
        }
        if terms.is_empty() {
            terms.push('0');
        }
        terms
    }
}

/// Which model shape a solution came from; decoding needs to know.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpKind {
    Forward,
    Inverse,
}

fn variable_names(groups: usize) -> Vec<String> {
    let mut names: Vec<String> = (1..=groups).map(|j| format!("α{j}")).collect();
    names.extend((1..=groups).map(|j| format!("β{j}")));
    names.push("g".to_string());
    names
}

/// Builds the forward model: minimize the level subject to exact
/// per-population equality with the residuals.
///
/// Row layout: for each group `j`, `α_j - g <= 0` then `β_j - g <= 0`;
/// after those, for each population `i` the row
/// `sum_j (α_j - β_j) v(i,j) <= b_i`, then for each population the
/// negated partner `<= -b_i`. The paired rows pin the equality; the
/// solver may re-merge them internally.
pub fn build_forward_lp(masses: &GroupMassMatrix, residuals: &ResidualTargets) -> LpModel {
    debug_assert_eq!(masses.populations(), residuals.len());
    let m = masses.groups();
    let vars = 2 * m + 1;
    let level = 2 * m;

    let mut objective = vec![0.0; vars];
    objective[level] = -1.0;

    let mut rows = Vec::with_capacity(2 * m + 2 * residuals.len());
    for j in 0..m {
        let mut bonus_box = vec![0.0; vars];
        bonus_box[j] = 1.0;
        bonus_box[level] = -1.0;
        rows.push(LpRow {
            coeffs: bonus_box,
            rhs: 0.0,
        });
        let mut malus_box = vec![0.0; vars];
        malus_box[m + j] = 1.0;
        malus_box[level] = -1.0;
        rows.push(LpRow {
            coeffs: malus_box,
            rhs: 0.0,
        });
    }
    for i in 0..masses.populations() {
        let mut coeffs = vec![0.0; vars];
        for j in 0..m {
            coeffs[j] = masses.get(i, j);
            coeffs[m + j] = -masses.get(i, j);
        }
        rows.push(LpRow {
            coeffs,
            rhs: residuals.values()[i],
        });
    }
    for i in 0..masses.populations() {
        let mut coeffs = vec![0.0; vars];
        for j in 0..m {
            coeffs[j] = -masses.get(i, j);
            coeffs[m + j] = masses.get(i, j);
        }
        rows.push(LpRow {
            coeffs,
            rhs: -residuals.values()[i],
        });
    }

    LpModel {
        objective,
        rows,
        names: variable_names(m),
    }
}

/// Budget errors for the budgeted model.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BuildError {
    #[error("correction budget must be nonnegative, got {0}")]
    NegativeBudget(f64),
}

/// Builds the budgeted model: bonuses and maluses capped by `budget`,
/// minimize the worst remaining residual gap.
///
/// Row layout mirrors the forward model: per-group cap rows
/// `α_j <= budget`, `β_j <= budget`, then for each population
/// `sum_j (α_j - β_j) v(i,j) - g <= b_i` and the mirrored row
/// `<= -b_i`. Always feasible: all-zero corrections with the level at
/// `max |b_i|` satisfy every row.
pub fn build_inverse_lp(
    masses: &GroupMassMatrix,
    residuals: &ResidualTargets,
    budget: f64,
) -> Result<LpModel, BuildError> {
    // Rejects NaN along with negative budgets.
    if budget < 0.0 || budget.is_nan() {
        return Err(BuildError::NegativeBudget(budget));
    }
    debug_assert_eq!(masses.populations(), residuals.len());
    let m = masses.groups();
    let vars = 2 * m + 1;
    let level = 2 * m;

    let mut objective = vec![0.0; vars];
    objective[level] = -1.0;

    let mut rows = Vec::with_capacity(2 * m + 2 * residuals.len());
    for j in 0..m {
        let mut bonus_cap = vec![0.0; vars];
        bonus_cap[j] = 1.0;
        rows.push(LpRow {
            coeffs: bonus_cap,
            rhs: budget,
        });
        let mut malus_cap = vec![0.0; vars];
        malus_cap[m + j] = 1.0;
        rows.push(LpRow {
            coeffs: malus_cap,
            rhs: budget,
        });
    }
    for i in 0..masses.populations() {
        let mut coeffs = vec![0.0; vars];
        for j in 0..m {
            coeffs[j] = masses.get(i, j);
            coeffs[m + j] = -masses.get(i, j);
        }
        coeffs[level] = -1.0;
        rows.push(LpRow {
            coeffs,
            rhs: residuals.values()[i],
        });
    }
    for i in 0..masses.populations() {
        let mut coeffs = vec![0.0; vars];
        for j in 0..m {
            coeffs[j] = -masses.get(i, j);
            coeffs[m + j] = masses.get(i, j);
        }
        coeffs[level] = -1.0;
        rows.push(LpRow {
            coeffs,
            rhs: -residuals.values()[i],
        });
    }

    Ok(LpModel {
        objective,
        rows,
        names: variable_names(m),
    })
}

/// Decoded flat correction: per-group bonus/malus, the optimized level
/// and the per-cell correction table.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatCorrection {
    pub bonus: Vec<f64>,
    pub malus: Vec<f64>,
    /// Forward models: sup-norm of the correction. Inverse (budgeted)
    /// models: worst remaining residual gap.
    pub gamma: f64,
    /// Per-cell correction, `bonus - malus` of the cell's group.
    pub table: ScoreTable,
}

/// Solution of a correction model, or the reason there is none.
#[derive(Debug, Clone, PartialEq)]
pub enum BonusMalus {
    Optimal(FlatCorrection),
    /// Forward models only: no flat correction on this partition hits
    /// the residuals.
    Infeasible,
    Unbounded,
}

impl BonusMalus {
    pub fn as_optimal(&self) -> Option<&FlatCorrection> {
        match self {
            BonusMalus::Optimal(c) => Some(c),
            _ => None,
        }
    }
}

/// Splits a solver solution back into per-group corrections and expands
/// them over the cells. Non-optimal statuses carry no correction.
pub fn decode_solution(
    kind: LpKind,
    solution: &crate::simplex::LpSolution,
    partition: &Partition,
) -> BonusMalus {
    use crate::simplex::LpStatus;
    match solution.status {
        LpStatus::Infeasible => return BonusMalus::Infeasible,
        LpStatus::Unbounded => return BonusMalus::Unbounded,
        LpStatus::Optimal => {}
    }
    let m = partition.group_count();
    debug_assert_eq!(solution.x.len(), 2 * m + 1);
    let bonus = solution.x[..m].to_vec();
    let malus = solution.x[m..2 * m].to_vec();
    let gamma = solution.x[2 * m];
    let per_group: Vec<f64> = bonus.iter().zip(&malus).map(|(a, b)| a - b).collect();
    let table = partition.expand(&per_group);
    // The kind does not change the decoding, only what gamma means to
    // the caller; both expand the same way.
    let _ = kind;
    BonusMalus::Optimal(FlatCorrection {
        bonus,
        malus,
        gamma,
        table,
    })
}

/// Rewrites a bonus/malus pair so no group carries both, keeping every
/// per-group difference: the correction table is unchanged and the
/// returned level is the largest surviving entry. Never worse than the
/// level that came in.
pub fn canonicalize_bonus_malus(
    bonus: &[f64],
    malus: &[f64],
    gamma: f64,
) -> (Vec<f64>, Vec<f64>, f64) {
    debug_assert_eq!(bonus.len(), malus.len());
    let mut new_bonus = vec![0.0; bonus.len()];
    let mut new_malus = vec![0.0; malus.len()];
    let mut level: f64 = 0.0;
    for j in 0..bonus.len() {
        if bonus[j] >= malus[j] {
            new_bonus[j] = bonus[j] - malus[j];
        } else {
            new_malus[j] = malus[j] - bonus[j];
        }
        level = level.max(new_bonus[j]).max(new_malus[j]);
    }
    debug_assert!(level <= gamma + 1e-9 * (1.0 + gamma.abs()));
    (new_bonus, new_malus, level)
}
