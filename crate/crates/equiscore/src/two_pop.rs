//! Closed-form correction for exactly two populations.
//!
//! With two populations the cheapest equalizing correction has an
//! explicit form: add a single shift `k` on the cells where the first
//! density dominates and subtract it everywhere else. The shift size
//! falls out of two weighted sums, no optimization needed:
//!
//! * `density_gap` is the total weighted mass where the densities
//!   disagree (ties contribute nothing),
//! * `average_gap` is the difference of the two population averages,
//! * `shift = -average_gap / density_gap` (zero when the densities are
//!   identical, since the averages then already agree).
//!
//! The corrected table moves each population average to the common value
//! and changes no cell by more than `|shift|`; no smaller worst-case
//! change can equalize the averages.

use crate::space::{Partition, PopulationModel, ProfileSpace, ScoreTable};

/// Everything produced by the two-population solve.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPopCorrection {
    /// Per-cell sign pattern: +1.0 where the first density strictly
    /// dominates the second, -1.0 elsewhere (ties get -1.0).
    pub signs: ScoreTable,
    /// Weighted mass of disagreement between the densities; equals the
    /// weighted L1 distance between them. Nonnegative.
    pub density_gap: f64,
    /// First population average minus second, on the input scores.
    pub average_gap: f64,
    /// Signed size of the flat correction applied along `signs`.
    pub shift: f64,
    /// Input scores plus `shift * signs`, pointwise.
    pub corrected: ScoreTable,
}

/// Computes the closed-form equalizing correction for two populations.
///
/// Sign comparison is strict `>` on the stored density values; tied
/// cells land on the minus side. When the densities agree everywhere the
/// shift is zero and the scores come back unchanged.
pub fn solve_two_pop(
    space: &ProfileSpace,
    p1: &PopulationModel,
    p2: &PopulationModel,
    scores: &ScoreTable,
) -> TwoPopCorrection {
    debug_assert_eq!(p1.density().len(), space.len());
    debug_assert_eq!(p2.density().len(), space.len());
    debug_assert_eq!(scores.len(), space.len());

    let signs: Vec<f64> = p1
        .density()
        .iter()
        .zip(p2.density())
        .map(|(a, b)| if a > b { 1.0 } else { -1.0 })
        .collect();

    let mut density_gap = 0.0;
    let mut average_gap = 0.0;
    // Walks four parallel slices; an index reads better than a zip chain.
    #[allow(clippy::needless_range_loop)]
    for cell in 0..space.len() {
        let diff = p1.density()[cell] - p2.density()[cell];
        let w = space.weights()[cell];
        density_gap += diff * signs[cell] * w;
        average_gap += diff * scores.values()[cell] * w;
    }

    let shift = if density_gap > 0.0 {
        -average_gap / density_gap
    } else {
        0.0
    };

    let corrected = ScoreTable::new(
        scores
            .values()
            .iter()
            .zip(&signs)
            .map(|(f, u)| f + shift * u)
            .collect(),
    );

    TwoPopCorrection {
        signs: ScoreTable::new(signs),
        density_gap,
        average_gap,
        shift,
        corrected,
    }
}

/// Groups cells by which density dominates: group 0 where the first
/// strictly exceeds the second, group 1 elsewhere. Collapses to a single
/// group when one side would be empty (identical densities).
pub fn sign_partition(p1: &PopulationModel, p2: &PopulationModel) -> Partition {
    debug_assert_eq!(p1.density().len(), p2.density().len());
    let raw: Vec<usize> = p1
        .density()
        .iter()
        .zip(p2.density())
        .map(|(a, b)| usize::from(a <= b))
        .collect();
    let plus = raw.iter().filter(|&&g| g == 0).count();
    if plus == 0 || plus == raw.len() {
        return Partition::new(vec![0; raw.len()], 1).expect("single-group partition");
    }
    Partition::new(raw, 2).expect("both sign groups are nonempty")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::population_average;
    use crate::space::sup_norm_distance;

    fn worked_instance() -> (ProfileSpace, PopulationModel, PopulationModel, ScoreTable) {
        (
            ProfileSpace::with_unit_weights(["A", "B", "C"]),
            PopulationModel::new("one", vec![0.5, 0.3, 0.2]),
            PopulationModel::new("two", vec![0.2, 0.3, 0.5]),
            ScoreTable::new(vec![1.0, 2.0, 3.0]),
        )
    }

    #[test]
    fn worked_example_signs_and_shift() {
        let (space, p1, p2, f) = worked_instance();
        let sol = solve_two_pop(&space, &p1, &p2, &f);
        assert_eq!(sol.signs.values(), &[1.0, -1.0, -1.0]);
        assert!((sol.density_gap - 0.6).abs() < 1e-12);
        assert!((sol.average_gap - (-0.6)).abs() < 1e-12);
        assert!((sol.shift - 1.0).abs() < 1e-12);
        for (got, want) in sol.corrected.values().iter().zip([2.0, 1.0, 2.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn worked_example_equalizes_averages() {
        let (space, p1, p2, f) = worked_instance();
        let sol = solve_two_pop(&space, &p1, &p2, &f);
        let a1 = population_average(&space, &p1, &sol.corrected);
        let a2 = population_average(&space, &p2, &sol.corrected);
        assert!((a1 - 1.7).abs() < 1e-12);
        assert!((a2 - 1.7).abs() < 1e-12);
    }

    #[test]
    fn worked_example_cost_is_the_shift() {
        let (space, p1, p2, f) = worked_instance();
        let sol = solve_two_pop(&space, &p1, &p2, &f);
        let cost = sup_norm_distance(&sol.corrected, &f).unwrap();
        assert!((cost - sol.shift.abs()).abs() < 1e-12);
    }

    #[test]
    fn identical_densities_give_zero_shift() {
        let space = ProfileSpace::with_unit_weights(["A", "B", "C"]);
        let p = PopulationModel::new("one", vec![0.2, 0.3, 0.5]);
        let q = PopulationModel::new("two", vec![0.2, 0.3, 0.5]);
        let f = ScoreTable::new(vec![4.0, -1.0, 0.5]);
        let sol = solve_two_pop(&space, &p, &q, &f);
        assert_eq!(sol.density_gap, 0.0);
        assert_eq!(sol.shift, 0.0);
        assert_eq!(sol.corrected.values(), f.values());
        assert!(sol.signs.values().iter().all(|&s| s == -1.0));
    }

    #[test]
    fn constant_scores_give_zero_shift() {
        let (space, p1, p2, _) = worked_instance();
        let f = ScoreTable::constant(3, 2.5);
        let sol = solve_two_pop(&space, &p1, &p2, &f);
        assert_eq!(sol.average_gap, 0.0);
        assert_eq!(sol.shift, 0.0);
    }

    #[test]
    fn sign_partition_of_worked_instance() {
        let (_, p1, p2, _) = worked_instance();
        let part = sign_partition(&p1, &p2);
        assert_eq!(part.group_count(), 2);
        // Cell A is the only one where the first density dominates;
        // the tie at B lands with C.
        assert_eq!(part.group_of(), &[0, 1, 1]);
    }

    #[test]
    fn sign_partition_collapses_for_identical_densities() {
        let p = PopulationModel::new("one", vec![0.5, 0.5]);
        let q = PopulationModel::new("two", vec![0.5, 0.5]);
        let part = sign_partition(&p, &q);
        assert_eq!(part.group_count(), 1);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn two_pop_instance(
        ) -> impl Strategy<Value = (ProfileSpace, PopulationModel, PopulationModel, ScoreTable)>
        {
            (2..=24usize).prop_flat_map(|cells| {
                (
                    proptest::collection::vec(0.01..1.0f64, cells),
                    proptest::collection::vec(0.01..1.0f64, cells),
                    proptest::collection::vec(-8.0..8.0f64, cells),
                )
                    .prop_map(move |(raw1, raw2, f)| {
                        let t1: f64 = raw1.iter().sum();
                        let t2: f64 = raw2.iter().sum();
                        let ids: Vec<String> = (0..cells).map(|i| format!("c{i}")).collect();
                        (
                            ProfileSpace::with_unit_weights(ids),
                            PopulationModel::new("one", raw1.iter().map(|d| d / t1).collect()),
                            PopulationModel::new("two", raw2.iter().map(|d| d / t2).collect()),
                            ScoreTable::new(f),
                        )
                    })
            })
        }

        proptest! {
            #[test]
            fn corrected_averages_agree((space, p1, p2, f) in two_pop_instance()) {
                let sol = solve_two_pop(&space, &p1, &p2, &f);
                let a1 = population_average(&space, &p1, &sol.corrected);
                let a2 = population_average(&space, &p2, &sol.corrected);
                prop_assert!((a1 - a2).abs() <= 1e-9, "gap {}", a1 - a2);
            }

            #[test]
            fn density_gap_is_weighted_l1_distance((space, p1, p2, _f) in two_pop_instance()) {
                let sol = solve_two_pop(&space, &p1, &p2, &ScoreTable::constant(space.len(), 0.0));
                let l1: f64 = p1.density().iter().zip(p2.density()).zip(space.weights())
                    .map(|((a, b), w)| (a - b).abs() * w)
                    .sum();
                prop_assert!((sol.density_gap - l1).abs() <= 1e-12 * (1.0 + l1));
                prop_assert!(sol.density_gap >= 0.0);
            }

            #[test]
            fn shifting_scores_leaves_correction_alone((space, p1, p2, f) in two_pop_instance(),
                                                       c in -5.0..5.0f64) {
                let base = solve_two_pop(&space, &p1, &p2, &f);
                let shifted = ScoreTable::new(f.values().iter().map(|v| v + c).collect());
                let moved = solve_two_pop(&space, &p1, &p2, &shifted);
                prop_assert_eq!(base.signs.values(), moved.signs.values());
                prop_assert!((base.shift - moved.shift).abs() <= 1e-9 * (1.0 + base.shift.abs()));
                for (a, b) in base.corrected.values().iter().zip(moved.corrected.values()) {
                    prop_assert!(((a + c) - b).abs() <= 1e-9 * (1.0 + a.abs()));
                }
            }

            #[test]
            fn scaling_scores_scales_the_shift((space, p1, p2, f) in two_pop_instance(),
                                               s in 0.1..4.0f64) {
                let base = solve_two_pop(&space, &p1, &p2, &f);
                let scaled = ScoreTable::new(f.values().iter().map(|v| v * s).collect());
                let moved = solve_two_pop(&space, &p1, &p2, &scaled);
                prop_assert_eq!(base.signs.values(), moved.signs.values());
                prop_assert!((moved.shift - s * base.shift).abs()
                    <= 1e-9 * (1.0 + (s * base.shift).abs()));
            }

            #[test]
            fn swapping_populations_negates_the_gap((space, p1, p2, f) in two_pop_instance()) {
                let ab = solve_two_pop(&space, &p1, &p2, &f);
                let ba = solve_two_pop(&space, &p2, &p1, &f);
                prop_assert!((ab.average_gap + ba.average_gap).abs()
                    <= 1e-12 * (1.0 + ab.average_gap.abs()));
                prop_assert!((ab.density_gap - ba.density_gap).abs()
                    <= 1e-12 * (1.0 + ab.density_gap.abs()));
                prop_assert!((ab.shift.abs() - ba.shift.abs()).abs()
                    <= 1e-9 * (1.0 + ab.shift.abs()));
            }
        }
    }
}
