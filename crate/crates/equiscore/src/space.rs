//! Discrete profile spaces, population densities and score tables.
//!
//! Everything downstream works over a finite set of profile cells. A
//! [`ProfileSpace`] fixes the cells and their measure weights, each
//! [`PopulationModel`] attaches a probability density to the cells, and a
//! [`ScoreTable`] holds one score value per cell. The population average
//! of a score table is the weighted dot product of density and scores;
//! the audit compares those averages against per-population targets.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tolerances;

/// The finite set of profiles: cell identifiers plus a positive measure
/// weight per cell. Weights default to 1, so sums behave like plain
/// averages unless the caller models unequal cell sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSpace {
    cell_ids: Vec<String>,
    weights: Vec<f64>,
}

impl ProfileSpace {
    /// Builds a space from explicit ids and weights.
    ///
    /// Panics if the lengths differ; that is a programming error, not a
    /// data error. Data-level problems (nonpositive weights, duplicate
    /// ids) are reported by [`validate_instance`].
    pub fn new(cell_ids: Vec<String>, weights: Vec<f64>) -> Self {
        assert_eq!(
            cell_ids.len(),
            weights.len(),
            "cell ids and weights must have equal length"
        );
        Self { cell_ids, weights }
    }

    /// Builds a space where every cell has weight 1.
    pub fn with_unit_weights<I, S>(cell_ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let cell_ids: Vec<String> = cell_ids.into_iter().map(Into::into).collect();
        let weights = vec![1.0; cell_ids.len()];
        Self { cell_ids, weights }
    }

    pub fn len(&self) -> usize {
        self.cell_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cell_ids.is_empty()
    }

    pub fn cell_ids(&self) -> &[String] {
        &self.cell_ids
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// A named population: one probability value per cell of the space.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationModel {
    name: String,
    density: Vec<f64>,
}

impl PopulationModel {
    pub fn new(name: impl Into<String>, density: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            density,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }
}

/// One score value per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    values: Vec<f64>,
}

impl ScoreTable {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    /// A table holding the same value in every cell.
    pub fn constant(len: usize, value: f64) -> Self {
        Self {
            values: vec![value; len],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Desired average score per population, in population order.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetVector {
    values: Vec<f64>,
}

impl TargetVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Grouping of cells into nonempty groups; corrections built on a
/// partition are flat (constant) on each group.
///
/// Group indices are 0-based internally. The file format uses 1-based
/// indices; conversion happens at the JSON boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    group_of: Vec<usize>,
    group_count: usize,
}

/// Structural problems that make a grouping unusable.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PartitionError {
    #[error("partition has no cells")]
    Empty,
    #[error("cell {cell} has group index {group} but only {group_count} groups exist")]
    GroupOutOfRange {
        cell: usize,
        group: usize,
        group_count: usize,
    },
    #[error("group {group} is empty")]
    EmptyGroup { group: usize },
}

impl Partition {
    /// Builds a partition from per-cell group indices in `0..group_count`.
    /// Every group must be used by at least one cell.
    pub fn new(group_of: Vec<usize>, group_count: usize) -> Result<Self, PartitionError> {
        if group_of.is_empty() || group_count == 0 {
            return Err(PartitionError::Empty);
        }
        let mut used = vec![false; group_count];
        for (cell, &group) in group_of.iter().enumerate() {
            if group >= group_count {
                return Err(PartitionError::GroupOutOfRange {
                    cell,
                    group,
                    group_count,
                });
            }
            used[group] = true;
        }
        if let Some(group) = used.iter().position(|&u| !u) {
            return Err(PartitionError::EmptyGroup { group });
        }
        Ok(Self {
            group_of,
            group_count,
        })
    }

    /// One group per cell: the finest partition, and the default when no
    /// grouping is given.
    pub fn singletons(cells: usize) -> Self {
        Self {
            group_of: (0..cells).collect(),
            group_count: cells,
        }
    }

    pub fn group_of(&self) -> &[usize] {
        &self.group_of
    }

    pub fn group_count(&self) -> usize {
        self.group_count
    }

    pub fn cells(&self) -> usize {
        self.group_of.len()
    }

    /// Cells belonging to `group`, in cell order.
    pub fn cells_in(&self, group: usize) -> impl Iterator<Item = usize> + '_ {
        self.group_of
            .iter()
            .enumerate()
            .filter(move |(_, &g)| g == group)
            .map(|(cell, _)| cell)
    }

    /// Expands per-group values into a per-cell table.
    pub fn expand(&self, group_values: &[f64]) -> ScoreTable {
        assert_eq!(group_values.len(), self.group_count);
        ScoreTable::new(self.group_of.iter().map(|&g| group_values[g]).collect())
    }
}

/// One data-level problem found while validating an instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    NoCells,
    NoPopulations,
    DuplicateCellId {
        id: String,
    },
    NonpositiveWeight {
        cell: usize,
        value: f64,
    },
    NonFiniteWeight {
        cell: usize,
    },
    ScoreLengthMismatch {
        expected: usize,
        got: usize,
    },
    NonFiniteScore {
        cell: usize,
    },
    DensityLengthMismatch {
        population: String,
        expected: usize,
        got: usize,
    },
    NegativeDensity {
        population: String,
        cell: usize,
        value: f64,
    },
    NonFiniteDensity {
        population: String,
        cell: usize,
    },
    DensityNotNormalized {
        population: String,
        total: f64,
    },
    TargetCountMismatch {
        expected: usize,
        got: usize,
    },
    NonFiniteTarget {
        population: String,
    },
    PartitionLengthMismatch {
        expected: usize,
        got: usize,
    },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::NoCells => write!(f, "no cells"),
            Violation::NoPopulations => write!(f, "no populations"),
            Violation::DuplicateCellId { id } => write!(f, "duplicate cell id {id:?}"),
            Violation::NonpositiveWeight { cell, value } => {
                write!(f, "nonpositive weight {value} at cell {cell}")
            }
            Violation::NonFiniteWeight { cell } => write!(f, "non-finite weight at cell {cell}"),
            Violation::ScoreLengthMismatch { expected, got } => {
                write!(f, "score table has {got} entries, expected {expected}")
            }
            Violation::NonFiniteScore { cell } => write!(f, "non-finite score at cell {cell}"),
            Violation::DensityLengthMismatch {
                population,
                expected,
                got,
            } => write!(
                f,
                "population {population:?} has {got} density entries, expected {expected}"
            ),
            Violation::NegativeDensity {
                population,
                cell,
                value,
            } => write!(
                f,
                "negative density {value} at cell {cell} of population {population:?}"
            ),
            Violation::NonFiniteDensity { population, cell } => write!(
                f,
                "non-finite density at cell {cell} of population {population:?}"
            ),
            Violation::DensityNotNormalized { population, total } => write!(
                f,
                "density not normalized for population {population:?}: total mass {total}"
            ),
            Violation::TargetCountMismatch { expected, got } => {
                write!(f, "{got} targets given, expected {expected}")
            }
            Violation::NonFiniteTarget { population } => {
                write!(f, "non-finite target for population {population:?}")
            }
            Violation::PartitionLengthMismatch { expected, got } => {
                write!(f, "partition covers {got} cells, expected {expected}")
            }
        }
    }
}

/// Shape errors raised by operations that combine tables of mismatched
/// lengths.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpaceError {
    #[error("length mismatch in {context}: expected {expected}, got {got}")]
    LengthMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },
}

/// Checks the raw data of an instance and reports every problem found.
///
/// An empty result means the instance is usable by every downstream
/// operation. Densities must be nonnegative and sum (weighted) to 1
/// within [`tolerances::DENSITY_NORMALIZATION`]; out-of-tolerance
/// densities are reported, never silently rescaled.
pub fn validate_instance(
    space: &ProfileSpace,
    populations: &[PopulationModel],
    scores: &ScoreTable,
) -> Vec<Violation> {
    let mut violations = Vec::new();
    let cells = space.len();

    if cells == 0 {
        violations.push(Violation::NoCells);
    }
    if populations.is_empty() {
        violations.push(Violation::NoPopulations);
    }

    let mut seen = std::collections::HashSet::new();
    for id in space.cell_ids() {
        if !seen.insert(id.as_str()) {
            violations.push(Violation::DuplicateCellId { id: id.clone() });
        }
    }

    for (cell, &w) in space.weights().iter().enumerate() {
        if !w.is_finite() {
            violations.push(Violation::NonFiniteWeight { cell });
        } else if w <= 0.0 {
            violations.push(Violation::NonpositiveWeight { cell, value: w });
        }
    }

    if scores.len() != cells {
        violations.push(Violation::ScoreLengthMismatch {
            expected: cells,
            got: scores.len(),
        });
    }
    for (cell, &s) in scores.values().iter().enumerate() {
        if !s.is_finite() {
            violations.push(Violation::NonFiniteScore { cell });
        }
    }

    for pop in populations {
        if pop.density().len() != cells {
            violations.push(Violation::DensityLengthMismatch {
                population: pop.name().to_string(),
                expected: cells,
                got: pop.density().len(),
            });
            continue;
        }
        let mut bad = false;
        for (cell, &d) in pop.density().iter().enumerate() {
            if !d.is_finite() {
                violations.push(Violation::NonFiniteDensity {
                    population: pop.name().to_string(),
                    cell,
                });
                bad = true;
            } else if d < 0.0 {
                violations.push(Violation::NegativeDensity {
                    population: pop.name().to_string(),
                    cell,
                    value: d,
                });
                bad = true;
            }
        }
        if bad {
            continue;
        }
        let total: f64 = pop
            .density()
            .iter()
            .zip(space.weights())
            .map(|(d, w)| d * w)
            .sum();
        if (total - 1.0).abs() > tolerances::DENSITY_NORMALIZATION {
            violations.push(Violation::DensityNotNormalized {
                population: pop.name().to_string(),
                total,
            });
        }
    }

    violations
}

/// Weighted average score of one population: the density-weighted dot
/// product of scores over all cells.
pub fn population_average(space: &ProfileSpace, pop: &PopulationModel, scores: &ScoreTable) -> f64 {
    debug_assert_eq!(pop.density().len(), space.len());
    debug_assert_eq!(scores.len(), space.len());
    pop.density()
        .iter()
        .zip(scores.values())
        .zip(space.weights())
        .map(|((d, s), w)| d * s * w)
        .sum()
}

/// Signed gap of one population in a [`GapReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationGap {
    pub population: String,
    pub average: f64,
    pub target: f64,
    /// average minus target; positive means the population scores above
    /// its target.
    pub gap: f64,
}

/// Per-population averages against targets, plus the worst absolute gap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub gaps: Vec<PopulationGap>,
    pub max_abs_gap: f64,
}

/// Compares every population average against its target.
pub fn audit(
    space: &ProfileSpace,
    populations: &[PopulationModel],
    scores: &ScoreTable,
    targets: &TargetVector,
) -> Result<GapReport, SpaceError> {
    if targets.len() != populations.len() {
        return Err(SpaceError::LengthMismatch {
            context: "audit targets",
            expected: populations.len(),
            got: targets.len(),
        });
    }
    let mut gaps = Vec::with_capacity(populations.len());
    let mut max_abs_gap: f64 = 0.0;
    for (pop, &target) in populations.iter().zip(targets.values()) {
        let average = population_average(space, pop, scores);
        let gap = average - target;
        max_abs_gap = max_abs_gap.max(gap.abs());
        gaps.push(PopulationGap {
            population: pop.name().to_string(),
            average,
            target,
            gap,
        });
    }
    Ok(GapReport { gaps, max_abs_gap })
}

/// Largest absolute per-cell difference between two score tables. This
/// is the cost measure for corrections: the worst change any single
/// profile experiences.
pub fn sup_norm_distance(a: &ScoreTable, b: &ScoreTable) -> Result<f64, SpaceError> {
    if a.len() != b.len() {
        return Err(SpaceError::LengthMismatch {
            context: "sup_norm_distance",
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}
