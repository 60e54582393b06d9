//! Instance files: one JSON document holding everything a command needs.
//!
//! Schema, arrays all in cell order:
//!
//! ```json
//! {
//!   "cells": ["low", "mid", "high"],
//!   "weights": [1.0, 1.0, 1.0],
//!   "scores": [1.0, 2.0, 3.0],
//!   "populations": [{"name": "one", "density": [0.5, 0.3, 0.2]}],
//!   "targets": [1.7],
//!   "partition": [1, 2, 2]
//! }
//! ```
//!
//! `weights`, `targets` and `partition` are optional. Weights default to 1.
//! `partition` carries 1-based group indices, or the string `"auto"` for
//! one group per cell. Floats are written with 17 significant digits, so
//! write-then-read reproduces every value bit for bit.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jsonfmt;
use crate::space::{
    validate_instance, Partition, PartitionError, PopulationModel, ProfileSpace, ScoreTable,
    TargetVector, Violation,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    pub cells: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    pub scores: Vec<f64>,
    pub populations: Vec<PopulationEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<PartitionSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationEntry {
    pub name: String,
    pub density: Vec<f64>,
}

/// The `partition` field: explicit 1-based group indices, or `"auto"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PartitionSpec {
    Keyword(PartitionKeyword),
    Groups(Vec<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartitionKeyword {
    Auto,
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid JSON: {source}")]
    Parse { source: serde_json::Error },
    #[error("group indices are 1-based; cell {cell} uses 0")]
    ZeroGroupIndex { cell: usize },
    #[error("invalid partition: {0}")]
    BadPartition(#[from] PartitionError),
}

/// Converts a 1-based group index array (as stored in files) into a
/// [`Partition`]. Group count is the largest index mentioned; every group
/// up to it must be nonempty.
pub fn partition_from_one_based(groups: &[usize]) -> Result<Partition, InstanceError> {
    if let Some(cell) = groups.iter().position(|&g| g == 0) {
        return Err(InstanceError::ZeroGroupIndex { cell });
    }
    let count = groups.iter().copied().max().unwrap_or(0);
    let zero_based: Vec<usize> = groups.iter().map(|&g| g - 1).collect();
    Ok(Partition::new(zero_based, count)?)
}

/// The inverse direction, for writing partitions back out.
pub fn partition_to_one_based(partition: &Partition) -> Vec<usize> {
    partition.group_of().iter().map(|&g| g + 1).collect()
}

impl Instance {
    /// Cell ids plus weights (defaulted to 1) as a profile space.
    pub fn space(&self) -> ProfileSpace {
        match &self.weights {
            Some(w) => ProfileSpace::new(self.cells.clone(), w.clone()),
            None => ProfileSpace::with_unit_weights(self.cells.iter().cloned()),
        }
    }

    pub fn population_models(&self) -> Vec<PopulationModel> {
        self.populations
            .iter()
            .map(|p| PopulationModel::new(p.name.clone(), p.density.clone()))
            .collect()
    }

    pub fn score_table(&self) -> ScoreTable {
        ScoreTable::new(self.scores.clone())
    }

    pub fn target_vector(&self) -> Option<TargetVector> {
        self.targets.as_ref().map(|t| TargetVector::new(t.clone()))
    }

    /// All data-level problems, in a stable order. Empty means usable.
    pub fn validate(&self) -> Vec<Violation> {
        let space = self.space();
        let mut violations =
            validate_instance(&space, &self.population_models(), &self.score_table());
        if let Some(targets) = &self.targets {
            if targets.len() != self.populations.len() {
                violations.push(Violation::TargetCountMismatch {
                    expected: self.populations.len(),
                    got: targets.len(),
                });
            }
            for (pop, t) in self.populations.iter().zip(targets) {
                if !t.is_finite() {
                    violations.push(Violation::NonFiniteTarget {
                        population: pop.name.clone(),
                    });
                }
            }
        }
        if let Some(PartitionSpec::Groups(groups)) = &self.partition {
            if groups.len() != self.cells.len() {
                violations.push(Violation::PartitionLengthMismatch {
                    expected: self.cells.len(),
                    got: groups.len(),
                });
            }
        }
        violations
    }

    /// The partition stored in the file, if any. `"auto"` resolves to one
    /// group per cell.
    pub fn declared_partition(&self) -> Result<Option<Partition>, InstanceError> {
        match &self.partition {
            None => Ok(None),
            Some(PartitionSpec::Keyword(PartitionKeyword::Auto)) => {
                Ok(Some(Partition::singletons(self.cells.len())))
            }
            Some(PartitionSpec::Groups(groups)) => partition_from_one_based(groups).map(Some),
        }
    }

    /// Copy with every density rescaled to unit weighted mass. Populations
    /// with no mass at all are left alone for validation to flag.
    pub fn renormalized(&self) -> Instance {
        let weights = self.space().weights().to_vec();
        let mut out = self.clone();
        for pop in &mut out.populations {
            let total: f64 = pop.density.iter().zip(&weights).map(|(d, w)| d * w).sum();
            if total > 0.0 && total.is_finite() {
                for d in &mut pop.density {
                    *d /= total;
                }
            }
        }
        out
    }

    /// Copy with the score table replaced, everything else untouched.
    pub fn with_scores(&self, scores: &ScoreTable) -> Instance {
        let mut out = self.clone();
        out.scores = scores.values().to_vec();
        out
    }

    pub fn from_json(text: &str) -> Result<Instance, InstanceError> {
        serde_json::from_str(text).map_err(|source| InstanceError::Parse { source })
    }

    pub fn to_json(&self) -> String {
        jsonfmt::to_json_string(self)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Instance, InstanceError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| InstanceError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Instance::from_json(&text)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), InstanceError> {
        let path = path.as_ref();
        fs::write(path, self.to_json()).map_err(|source| InstanceError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}
