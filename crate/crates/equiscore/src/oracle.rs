//! Exhaustive grid-search reference answers.
//!
//! Everything here re-derives results the fast paths already produce, on
//! purpose and by a different route: group masses are re-accumulated locally
//! instead of reusing [`crate::lp::group_mass`], and corrections are found by
//! enumerating a finite grid instead of pivoting. Tests compare the two
//! routes; a bug must break the agreement instead of hiding in shared code.
//!
//! Grid answers are only as fine as the grid. Callers compare against them
//! with a tolerance of about one grid step, and treat "no counterexample
//! found" as supporting evidence rather than proof.

use rayon::prelude::*;
use thiserror::Error;

use crate::reduction::ResidualTargets;
use crate::space::{Partition, PopulationModel, ProfileSpace, ScoreTable};

/// Hard ceiling on enumerated points so a careless grid cannot hang a test
/// run. Ten million points keeps full searches under a second or two.
pub const DEFAULT_POINT_CAP: usize = 10_000_000;

/// A uniform one-dimensional grid, reused across every search axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
    /// Maximum total points a search may enumerate with this grid.
    pub cap: usize,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, steps: usize) -> GridSpec {
        assert!(lo <= hi, "grid bounds out of order: {lo} > {hi}");
        GridSpec {
            lo,
            hi,
            steps,
            cap: DEFAULT_POINT_CAP,
        }
    }

    /// Grid centered on zero. With an odd step count the midpoint value is
    /// exactly 0.0, which keeps "leave this axis alone" representable.
    pub fn symmetric(half_width: f64, steps: usize) -> GridSpec {
        GridSpec::new(-half_width, half_width, steps)
    }

    /// Default search box for a forward correction: wide enough to hold any
    /// plausible optimum (twice the worst residual divided by the thinnest
    /// population's best group reach), with step count capped so the whole
    /// box stays under the point budget.
    pub fn forward_default(
        space: &ProfileSpace,
        populations: &[PopulationModel],
        residuals: &ResidualTargets,
        partition: &Partition,
    ) -> GridSpec {
        let masses = group_masses(space, populations, partition);
        let worst = residuals.max_abs();
        let thinnest = masses
            .iter()
            .map(|row| row.iter().cloned().fold(0.0, f64::max))
            .fold(f64::INFINITY, f64::min);
        let half_width = if worst == 0.0 || thinnest <= 0.0 || !thinnest.is_finite() {
            1.0
        } else {
            2.0 * worst / thinnest
        };
        let mut steps = max_steps_for(partition.group_count(), DEFAULT_POINT_CAP).min(201);
        if steps.is_multiple_of(2) {
            steps -= 1;
        }
        // High group counts leave very few steps; callers should treat a
        // near-degenerate grid as "too large to cross-check" rather than
        // trust it.
        GridSpec::symmetric(half_width, steps.max(1))
    }

    /// Spacing between adjacent grid values; zero for a single-point grid.
    pub fn step(&self) -> f64 {
        if self.steps > 1 {
            (self.hi - self.lo) / (self.steps - 1) as f64
        } else {
            0.0
        }
    }

    /// All grid values, endpoints included. A single-step grid collapses to
    /// the midpoint.
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![0.5 * (self.lo + self.hi)];
        }
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                let t = i as f64 / last;
                self.lo * (1.0 - t) + self.hi * t
            })
            .collect()
    }
}

/// Largest step count `s` with `s^dims` within `cap`, never below 1.
pub fn max_steps_for(dims: usize, cap: usize) -> usize {
    assert!(dims > 0, "a grid search needs at least one dimension");
    let fits = |s: usize| -> bool {
        let mut total: u128 = 1;
        for _ in 0..dims {
            total = total.saturating_mul(s as u128);
            if total > cap as u128 {
                return false;
            }
        }
        true
    };
    let mut s = (cap as f64).powf(1.0 / dims as f64).floor() as usize;
    s = s.max(1);
    while fits(s + 1) {
        s += 1;
    }
    while s > 1 && !fits(s) {
        s -= 1;
    }
    s
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("search space of {points} points exceeds the cap of {cap}")]
    GridTooLarge { points: u128, cap: usize },
    #[error("grid has no points")]
    EmptyGrid,
}

/// Best grid point found by a search, with its objective value. For forward
/// searches the level is the sup norm of the point; for budgeted searches it
/// is the worst remaining residual gap.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSearchResult {
    pub point: Vec<f64>,
    pub level: f64,
}

/// Outcome of checking a claimed two-population correction against the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalityCheck {
    pub optimal: bool,
    /// A strictly cheaper fair point when one exists on the grid. Also set
    /// when the claimed correction is not fair at all, in which case it is
    /// simply the cheapest fair point found.
    pub counterexample: Option<GridSearchResult>,
}

/// Per-population, per-group mass: density times cell weight, accumulated
/// over the group's cells. Deliberately rewritten here rather than shared
/// with the model builder.
fn group_masses(
    space: &ProfileSpace,
    populations: &[PopulationModel],
    partition: &Partition,
) -> Vec<Vec<f64>> {
    let mut masses = vec![vec![0.0; partition.group_count()]; populations.len()];
    for (row, pop) in masses.iter_mut().zip(populations) {
        for (cell, (&d, &w)) in pop.density().iter().zip(space.weights()).enumerate() {
            row[partition.group_of()[cell]] += d * w;
        }
    }
    masses
}

fn ensure_capacity(lens: &[usize], cap: usize) -> Result<(), OracleError> {
    let mut points: u128 = 1;
    for &len in lens {
        if len == 0 {
            return Err(OracleError::EmptyGrid);
        }
        points = points.saturating_mul(len as u128);
    }
    if points > cap as u128 {
        return Err(OracleError::GridTooLarge { points, cap });
    }
    Ok(())
}

struct Candidate {
    score: f64,
    indices: Vec<usize>,
    point: Vec<f64>,
}

impl Candidate {
    /// Total order on (score, indices): ties in the objective resolve to the
    /// lexicographically smallest index tuple, which makes every search
    /// deterministic no matter how rayon slices the work.
    fn beats(&self, other: &Candidate) -> bool {
        match self.score.partial_cmp(&other.score).expect("finite score") {
            std::cmp::Ordering::Less => true,
            std::cmp::Ordering::Greater => false,
            std::cmp::Ordering::Equal => self.indices < other.indices,
        }
    }
}

/// Enumerates the product of `axes` and keeps the best point under `score`
/// (`None` marks an inadmissible point). The first axis is searched in
/// parallel; inner axes run as an odometer.
fn search_min<F>(axes: &[Vec<f64>], score: F) -> Option<GridSearchResult>
where
    F: Fn(&[f64]) -> Option<f64> + Sync,
{
    let dims = axes.len();
    let best = (0..axes[0].len())
        .into_par_iter()
        .filter_map(|first| {
            let mut indices = vec![0usize; dims];
            indices[0] = first;
            let mut point: Vec<f64> = indices.iter().zip(axes).map(|(&i, ax)| ax[i]).collect();
            let mut best: Option<Candidate> = None;
            'grid: loop {
                if let Some(s) = score(&point) {
                    let challenger_wins = match &best {
                        None => true,
                        Some(b) => {
                            s < b.score || (s == b.score && indices.as_slice() < &b.indices[..])
                        }
                    };
                    if challenger_wins {
                        best = Some(Candidate {
                            score: s,
                            indices: indices.clone(),
                            point: point.clone(),
                        });
                    }
                }
                let mut d = dims - 1;
                loop {
                    if d == 0 {
                        break 'grid;
                    }
                    indices[d] += 1;
                    if indices[d] < axes[d].len() {
                        point[d] = axes[d][indices[d]];
                        break;
                    }
                    indices[d] = 0;
                    point[d] = axes[d][0];
                    d -= 1;
                }
            }
            best
        })
        .reduce_with(|a, b| if b.beats(&a) { b } else { a });
    best.map(|c| GridSearchResult {
        point: c.point,
        level: c.score,
    })
}

fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Cheapest per-group correction that lands every population on its residual
/// target, to within `eq_tol`, among grid points. `None` when the grid holds
/// no admissible point at all.
pub fn brute_force_forward(
    space: &ProfileSpace,
    populations: &[PopulationModel],
    residuals: &ResidualTargets,
    partition: &Partition,
    grid: &GridSpec,
    eq_tol: f64,
) -> Result<Option<GridSearchResult>, OracleError> {
    let masses = group_masses(space, populations, partition);
    let dims = partition.group_count();
    let axes = vec![grid.values(); dims];
    ensure_capacity(&axes.iter().map(Vec::len).collect::<Vec<_>>(), grid.cap)?;
    let hits_all_targets = |point: &[f64]| -> Option<f64> {
        for (row, b) in masses.iter().zip(residuals.values()) {
            let moved: f64 = row.iter().zip(point).map(|(v, u)| v * u).sum();
            if (moved - b).abs() > eq_tol {
                return None;
            }
        }
        Some(max_abs(point))
    };
    Ok(search_min(&axes, hits_all_targets))
}

/// Per-group correction capped at `budget` per group that brings the worst
/// remaining residual gap as low as the grid allows. Axis values outside the
/// budget are clipped away; if none survive (or the budget is zero) the axis
/// collapses to exactly 0.0, which is always admissible.
pub fn brute_force_inverse(
    space: &ProfileSpace,
    populations: &[PopulationModel],
    residuals: &ResidualTargets,
    partition: &Partition,
    budget: f64,
    grid: &GridSpec,
) -> Result<Option<GridSearchResult>, OracleError> {
    assert!(budget >= 0.0, "budget must be nonnegative, got {budget}");
    let masses = group_masses(space, populations, partition);
    let dims = partition.group_count();
    ensure_capacity(&vec![grid.steps.max(1); dims], grid.cap)?;
    let mut axis: Vec<f64> = grid
        .values()
        .into_iter()
        .filter(|v| v.abs() <= budget)
        .collect();
    if axis.is_empty() {
        axis.push(0.0);
    }
    let axes = vec![axis; dims];
    let worst_gap = |point: &[f64]| -> Option<f64> {
        let gap = masses
            .iter()
            .zip(residuals.values())
            .map(|(row, b)| {
                let moved: f64 = row.iter().zip(point).map(|(v, u)| v * u).sum();
                (moved - b).abs()
            })
            .fold(0.0, f64::max);
        Some(gap)
    };
    Ok(search_min(&axes, worst_gap))
}

/// Checks a claimed uniform-shift correction for the two-population case
/// against an exhaustive per-cell search.
///
/// The claimed correction moves every cell by `shift` along the sign of the
/// density difference. It is rejected when it fails to equalize the two
/// averages within `eq_tol`, or when some grid point equalizes them with a
/// strictly smaller sup norm (more than half a grid step smaller, so grid
/// rounding cannot manufacture a counterexample).
pub fn verify_two_pop_optimality(
    space: &ProfileSpace,
    p1: &PopulationModel,
    p2: &PopulationModel,
    scores: &ScoreTable,
    shift: f64,
    grid: &GridSpec,
    eq_tol: f64,
) -> Result<OptimalityCheck, OracleError> {
    let dims = space.len();
    let axes = vec![grid.values(); dims];
    ensure_capacity(&axes.iter().map(Vec::len).collect::<Vec<_>>(), grid.cap)?;

    // Weighted density differences; the average gap of corrected scores
    // f + u is base_gap + dot(diffs, u).
    let diffs: Vec<f64> = p1
        .density()
        .iter()
        .zip(p2.density())
        .zip(space.weights())
        .map(|((a, b), w)| (a - b) * w)
        .collect();
    let base_gap: f64 = diffs.iter().zip(scores.values()).map(|(d, f)| d * f).sum();

    let claimed_gap: f64 = diffs
        .iter()
        .zip(p1.density().iter().zip(p2.density()))
        .map(|(d, (a, b))| {
            let sign = if a > b { 1.0 } else { -1.0 };
            d * sign * shift
        })
        .sum::<f64>()
        + base_gap;

    let fair_cost = |point: &[f64]| -> Option<f64> {
        let gap: f64 = diffs.iter().zip(point).map(|(d, u)| d * u).sum();
        if (base_gap + gap).abs() <= eq_tol {
            Some(max_abs(point))
        } else {
            None
        }
    };

    if claimed_gap.abs() > eq_tol {
        // The claim is not even fair; report the cheapest fair point as the
        // thing it should have been.
        return Ok(OptimalityCheck {
            optimal: false,
            counterexample: search_min(&axes, fair_cost),
        });
    }
    let resolution = 0.5 * grid.step();
    if shift.abs() <= resolution {
        // Nothing on this grid can beat a cost that small.
        return Ok(OptimalityCheck {
            optimal: true,
            counterexample: None,
        });
    }
    match search_min(&axes, fair_cost) {
        Some(found) if found.level < shift.abs() - resolution => Ok(OptimalityCheck {
            optimal: false,
            counterexample: Some(found),
        }),
        _ => Ok(OptimalityCheck {
            optimal: true,
            counterexample: None,
        }),
    }
}
