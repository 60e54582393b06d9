//! Synthetic instances for demos and stress tests.
//!
//! Cells sit on a unit lattice. Each population is a discretized Gaussian
//! bump; `separation` slides the bump centers apart so population averages
//! disagree and there is something to correct. Scores follow a fixed ramp
//! plus seeded uniform noise. Generation is pure: one seed, one byte
//! stream, on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::instance::{Instance, PopulationEntry};
use crate::space::population_average;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub cells: usize,
    pub populations: usize,
    pub seed: u64,
    /// Distance between adjacent bump centers on the unit lattice. Zero
    /// makes every population identical.
    pub separation: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            cells: 50,
            populations: 2,
            seed: 0,
            separation: 0.3,
        }
    }
}

const BUMP_WIDTH: f64 = 0.15;
const SCORE_NOISE: f64 = 0.25;

/// Lattice coordinate of a cell in [0, 1]; a single cell sits at 0.5.
fn lattice(cell: usize, cells: usize) -> f64 {
    if cells == 1 {
        0.5
    } else {
        cell as f64 / (cells - 1) as f64
    }
}

/// Builds an instance. Panics if `cells` or `populations` is zero; the
/// command layer validates sizes before calling.
pub fn generate(config: &SynthConfig) -> Instance {
    assert!(config.cells >= 1, "need at least one cell");
    assert!(config.populations >= 1, "need at least one population");
    let c = config.cells;
    let n = config.populations;

    let width = c.to_string().len();
    let cells: Vec<String> = (0..c).map(|i| format!("c{:0width$}", i + 1)).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let scores: Vec<f64> = (0..c)
        .map(|i| 1.0 + 4.0 * lattice(i, c) + rng.gen_range(-SCORE_NOISE..SCORE_NOISE))
        .collect();

    let populations: Vec<PopulationEntry> = (0..n)
        .map(|p| {
            let center = 0.5 + config.separation * (p as f64 - (n - 1) as f64 / 2.0);
            let raw: Vec<f64> = (0..c)
                .map(|i| {
                    let t = lattice(i, c) - center;
                    (-t * t / (2.0 * BUMP_WIDTH * BUMP_WIDTH)).exp()
                })
                .collect();
            let total: f64 = raw.iter().sum();
            PopulationEntry {
                name: format!("pop{}", p + 1),
                density: raw.into_iter().map(|d| d / total).collect(),
            }
        })
        .collect();

    let mut instance = Instance {
        cells,
        weights: None,
        scores,
        populations,
        targets: None,
        partition: None,
    };

    // Targets: the grand mean of the population averages, same for all, so
    // every population generically starts off-target.
    let space = instance.space();
    let table = instance.score_table();
    let models = instance.population_models();
    let grand = models
        .iter()
        .map(|m| population_average(&space, m, &table))
        .sum::<f64>()
        / n as f64;
    instance.targets = Some(vec![grand; n]);
    instance
}
