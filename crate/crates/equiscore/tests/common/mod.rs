//! Shared generators for the integration suites.
//!
//! Two families matter:
//!
//! * `dyadic_two_pop` builds two-population instances whose densities are
//!   multiples of 2^-12, whose scores are multiples of 2^-10, and whose
//!   total density gap is a power of two. Every quantity in the closed-form
//!   correction then evaluates exactly in f64, so tests can assert bitwise
//!   equality instead of tolerances.
//! * `planted_forward` builds multi-population instances around a known
//!   flat correction that sits on an oracle grid, with mass matrices of the
//!   form (1-theta)*selector + theta*uniform. That shape keeps the system
//!   well conditioned: a point satisfying the averages within eps is within
//!   eps/(1-theta)^2 in sup-norm of an exactly feasible point, which turns
//!   grid-tolerance agreement between solver and oracle into a theorem
//!   rather than a hope.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use equiscore::lp::{LpModel, LpRow};
use equiscore::oracle::GridSpec;
use equiscore::reduction::{residual_targets, ResidualTargets};
use equiscore::space::{Partition, PopulationModel, ProfileSpace, ScoreTable, TargetVector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn cell_names(n: usize) -> ProfileSpace {
    ProfileSpace::with_unit_weights((0..n).map(|i| format!("c{i}")))
}

/// Drops `units` balls into `slots` bins uniformly.
fn spread(rng: &mut ChaCha8Rng, units: u32, slots: &mut [u32]) {
    for _ in 0..units {
        let i = rng.gen_range(0..slots.len());
        slots[i] += 1;
    }
}

pub struct DyadicTwoPop {
    pub space: ProfileSpace,
    pub pop1: PopulationModel,
    pub pop2: PopulationModel,
    pub scores: ScoreTable,
}

/// Density unit: 2^-12 of total mass.
const DENSITY_UNITS: u32 = 1 << 12;

pub fn dyadic_two_pop(seed: u64, cells: usize) -> DyadicTwoPop {
    assert!(cells >= 2, "needs one cell per sign");
    let mut r = rng(seed);

    // Total |d1 - d2| mass is 2^-t, half on cells where pop1 leads and half
    // where pop2 leads, so the normalizer in the closed-form shift is a
    // power of two and the division is exact.
    let t = r.gen_range(1..=4u32);
    let side_units = DENSITY_UNITS >> (t + 1);

    let mut order: Vec<usize> = (0..cells).collect();
    for i in (1..cells).rev() {
        order.swap(i, r.gen_range(0..=i));
    }
    let split = r.gen_range(1..cells);
    let (lead1, lead2) = order.split_at(split);

    let mut gap1 = vec![0u32; lead1.len()];
    let mut gap2 = vec![0u32; lead2.len()];
    spread(&mut r, side_units, &mut gap1);
    spread(&mut r, side_units, &mut gap2);
    let mut common = vec![0u32; cells];
    spread(&mut r, DENSITY_UNITS - side_units, &mut common);

    let mut d1_units = common.clone();
    let mut d2_units = common;
    for (&cell, &g) in lead1.iter().zip(&gap1) {
        d1_units[cell] += g;
    }
    for (&cell, &g) in lead2.iter().zip(&gap2) {
        d2_units[cell] += g;
    }

    let to_density = |units: &[u32]| {
        units
            .iter()
            .map(|&u| f64::from(u) / f64::from(DENSITY_UNITS))
            .collect::<Vec<_>>()
    };
    // Scores: multiples of 2^-10 in [0, 8).
    let scores: Vec<f64> = (0..cells)
        .map(|_| f64::from(r.gen_range(0..8192u32)) / 1024.0)
        .collect();

    DyadicTwoPop {
        space: cell_names(cells),
        pop1: PopulationModel::new("lead", to_density(&d1_units)),
        pop2: PopulationModel::new("trail", to_density(&d2_units)),
        scores: ScoreTable::new(scores),
    }
}

pub struct Planted {
    pub space: ProfileSpace,
    pub pops: Vec<PopulationModel>,
    pub partition: Partition,
    /// Grid-resident flat correction the residuals were generated from.
    pub witness: Vec<f64>,
    pub residuals: ResidualTargets,
    pub grid: GridSpec,
}

/// Mixing weight toward the uniform density. 0.2 keeps the sensitivity
/// factor 1/(1-theta)^2 at 1.5625, so an oracle point admissible within
/// step/2 is within 0.79*step of exact feasibility.
pub const PLANT_THETA: f64 = 0.2;

pub fn planted_forward(seed: u64, pops: usize, groups: usize, steps: usize) -> Planted {
    assert!(
        pops <= groups,
        "the selector construction needs pops <= groups"
    );
    let mut r = rng(seed);
    let space = cell_names(groups);
    let partition = Partition::singletons(groups);

    let uniform = PLANT_THETA / groups as f64;
    let models: Vec<PopulationModel> = (0..pops)
        .map(|i| {
            let density: Vec<f64> = (0..groups)
                .map(|j| {
                    if i == j {
                        1.0 - PLANT_THETA + uniform
                    } else {
                        uniform
                    }
                })
                .collect();
            PopulationModel::new(format!("p{i}"), density)
        })
        .collect();

    let grid = GridSpec::symmetric(2.0, steps);
    let values = grid.values();
    // Witness coordinates stay in [-1, 1]: the solver optimum then has
    // level at most 1 and rounds to a point inside the grid.
    let span: Vec<f64> = values.iter().copied().filter(|v| v.abs() <= 1.0).collect();
    let witness: Vec<f64> = (0..groups)
        .map(|_| span[r.gen_range(0..span.len())])
        .collect();

    // Scores are zero and targets equal the witness's averages, so the
    // residual targets are exactly those averages and the witness is
    // feasible by construction.
    let scores = ScoreTable::constant(groups, 0.0);
    let targets = TargetVector::new(
        models
            .iter()
            .map(|m| {
                m.density()
                    .iter()
                    .zip(&witness)
                    .map(|(v, w)| v * w)
                    .sum::<f64>()
            })
            .collect(),
    );
    let residuals = residual_targets(&space, &models, &scores, &targets)
        .expect("planted instances are shape-consistent");

    Planted {
        space,
        pops: models,
        partition,
        witness,
        residuals,
        grid,
    }
}

/// A random dense instance without structural guarantees; densities are
/// normalized by division so they sum to 1 within a few ulps.
pub struct LooseInstance {
    pub space: ProfileSpace,
    pub pops: Vec<PopulationModel>,
    pub scores: ScoreTable,
    pub targets: TargetVector,
}

pub fn loose_instance(seed: u64, cells: usize, pops: usize) -> LooseInstance {
    let mut r = rng(seed);
    let space = cell_names(cells);
    let models: Vec<PopulationModel> = (0..pops)
        .map(|i| {
            let raw: Vec<f64> = (0..cells).map(|_| r.gen_range(0.05..1.0)).collect();
            let total: f64 = raw.iter().sum();
            PopulationModel::new(
                format!("p{i}"),
                raw.into_iter().map(|v| v / total).collect::<Vec<_>>(),
            )
        })
        .collect();
    let scores = ScoreTable::new((0..cells).map(|_| r.gen_range(-4.0..4.0)).collect());
    let targets = TargetVector::new((0..pops).map(|_| r.gen_range(-2.0..2.0)).collect());
    LooseInstance {
        space,
        pops: models,
        scores,
        targets,
    }
}

/// Random bounded-feasible model: rhs is built from a nonnegative interior
/// point plus slack, and box rows keep every variable finite.
pub fn random_bounded_lp(seed: u64) -> LpModel {
    let mut r = rng(seed);
    let vars = r.gen_range(2..=5usize);
    let base_rows = r.gen_range(1..=4usize);
    let interior: Vec<f64> = (0..vars).map(|_| r.gen_range(0.0..2.0)).collect();
    let mut rows = Vec::new();
    for _ in 0..base_rows {
        let coeffs: Vec<f64> = (0..vars).map(|_| r.gen_range(-2.0..2.0)).collect();
        let lhs: f64 = coeffs.iter().zip(&interior).map(|(a, x)| a * x).sum();
        rows.push(LpRow {
            rhs: lhs + r.gen_range(0.1..1.0),
            coeffs,
        });
    }
    for j in 0..vars {
        let mut coeffs = vec![0.0; vars];
        coeffs[j] = 1.0;
        rows.push(LpRow {
            coeffs,
            rhs: interior[j] + r.gen_range(0.5..2.5),
        });
    }
    let objective: Vec<f64> = (0..vars).map(|_| r.gen_range(-1.0..1.0)).collect();
    LpModel::new(objective, rows)
}

/// Bounded-feasible model plus one row no nonnegative point can satisfy.
pub fn random_infeasible_lp(seed: u64) -> LpModel {
    let mut r = rng(seed);
    let mut model = random_bounded_lp(seed ^ 0x5ee5);
    let vars = model.objective.len();
    let coeffs: Vec<f64> = (0..vars).map(|_| r.gen_range(0.1..1.0)).collect();
    model.rows.push(LpRow {
        coeffs,
        rhs: -1.0 - r.gen_range(0.0..1.0),
    });
    model
}

/// Feasible model with one profitable column that no row limits.
pub fn random_unbounded_lp(seed: u64) -> LpModel {
    let mut r = rng(seed);
    let vars = r.gen_range(1..=4usize);
    let rows_n = r.gen_range(1..=4usize);
    let interior: Vec<f64> = (0..vars).map(|_| r.gen_range(0.0..2.0)).collect();
    let mut rows = Vec::new();
    for _ in 0..rows_n {
        let mut coeffs: Vec<f64> = (0..vars).map(|_| r.gen_range(-2.0..2.0)).collect();
        let lhs: f64 = coeffs.iter().zip(&interior).map(|(a, x)| a * x).sum();
        // Escape column: never positive, so growing it never costs slack.
        coeffs.push(-r.gen_range(0.0..1.0));
        rows.push(LpRow {
            rhs: lhs + r.gen_range(0.1..1.0),
            coeffs,
        });
    }
    let mut objective: Vec<f64> = (0..vars).map(|_| r.gen_range(-1.0..1.0)).collect();
    objective.push(r.gen_range(0.5..1.5));
    LpModel::new(objective, rows)
}

/// Independent optimum for small `max c.x s.t. Ax <= b, x >= 0` models by
/// enumerating candidate vertices: every choice of n active constraints
/// among rows and axes. Returns None when no feasible vertex exists, which
/// for bounded models means infeasibility.
pub fn best_vertex_objective(model: &LpModel) -> Option<f64> {
    let n = model.objective.len();
    let m = model.rows.len();
    let total = m + n;
    assert!(total <= 16, "vertex enumeration is for desk-size models");
    let mut best: Option<f64> = None;

    let mut pick = vec![0usize; n];
    enumerate_subsets(total, n, &mut pick, 0, 0, &mut |active| {
        let mut a = vec![vec![0.0; n]; n];
        let mut b = vec![0.0; n];
        for (k, &idx) in active.iter().enumerate() {
            if idx < m {
                a[k].copy_from_slice(&model.rows[idx].coeffs);
                b[k] = model.rows[idx].rhs;
            } else {
                a[k][idx - m] = 1.0;
                b[k] = 0.0;
            }
        }
        let Some(x) = solve_square(&mut a, &mut b) else {
            return;
        };
        if x.iter().any(|&v| v < -1e-9) {
            return;
        }
        for row in &model.rows {
            let lhs: f64 = row.coeffs.iter().zip(&x).map(|(c, v)| c * v).sum();
            if lhs > row.rhs + 1e-9 {
                return;
            }
        }
        let value: f64 = model.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        best = Some(best.map_or(value, |b: f64| b.max(value)));
    });
    best
}

fn enumerate_subsets(
    total: usize,
    want: usize,
    pick: &mut Vec<usize>,
    depth: usize,
    start: usize,
    visit: &mut impl FnMut(&[usize]),
) {
    if depth == want {
        visit(pick);
        return;
    }
    for idx in start..total {
        pick[depth] = idx;
        enumerate_subsets(total, want, pick, depth + 1, idx + 1, visit);
    }
}

/// Gaussian elimination with partial pivoting; None on (near-)singular.
// Rows `row` and `col` of the same matrix are read and written together,
// so indexed loops are the straightforward form.
#[allow(clippy::needless_range_loop)]
fn solve_square(a: &mut [Vec<f64>], b: &mut [f64]) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[pivot_row][col].abs() < 1e-9 {
            return None;
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

pub fn feasible_within(model: &LpModel, x: &[f64], tol: f64) -> bool {
    x.iter().all(|&v| v >= -tol)
        && model.rows.iter().all(|row| {
            let lhs: f64 = row.coeffs.iter().zip(x).map(|(c, v)| c * v).sum();
            lhs <= row.rhs + tol
        })
}
