//! Reduction between "hit target averages" and "find a correction".
//!
//! Correcting scores so population averages hit targets is the same
//! problem as finding a correction table whose population averages hit
//! the residuals `target - current average`. These helpers move between
//! the two views; the LP layer works entirely on the residual side.

use crate::space::{
    population_average, PopulationModel, ProfileSpace, ScoreTable, SpaceError, TargetVector,
};

/// Per-population residual: target minus current average score.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualTargets {
    values: Vec<f64>,
}

impl ResidualTargets {
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

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Computes what each population average still needs to move by.
pub fn residual_targets(
    space: &ProfileSpace,
    populations: &[PopulationModel],
    scores: &ScoreTable,
    targets: &TargetVector,
) -> Result<ResidualTargets, SpaceError> {
    if targets.len() != populations.len() {
        return Err(SpaceError::LengthMismatch {
            context: "residual targets",
            expected: populations.len(),
            got: targets.len(),
        });
    }
    Ok(ResidualTargets::new(
        populations
            .iter()
            .zip(targets.values())
            .map(|(pop, &y)| y - population_average(space, pop, scores))
            .collect(),
    ))
}

/// Applies a correction to the base scores, pointwise.
pub fn assemble_forward(
    scores: &ScoreTable,
    correction: &ScoreTable,
) -> Result<ScoreTable, SpaceError> {
    if correction.len() != scores.len() {
        return Err(SpaceError::LengthMismatch {
            context: "assemble_forward",
            expected: scores.len(),
            got: correction.len(),
        });
    }
    Ok(ScoreTable::new(
        scores
            .values()
            .iter()
            .zip(correction.values())
            .map(|(f, u)| f + u)
            .collect(),
    ))
}

/// Adds the base scores back onto a residual-side table. The inverse
/// direction of [`assemble_forward`]; kept separate so each pipeline
/// reads in its own terms.
pub fn assemble_inverse(
    correction: &ScoreTable,
    scores: &ScoreTable,
) -> Result<ScoreTable, SpaceError> {
    if correction.len() != scores.len() {
        return Err(SpaceError::LengthMismatch {
            context: "assemble_inverse",
            expected: correction.len(),
            got: scores.len(),
        });
    }
    Ok(ScoreTable::new(
        correction
            .values()
            .iter()
            .zip(scores.values())
            .map(|(u, f)| u + f)
            .collect(),
    ))
}
