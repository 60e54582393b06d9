//! Trust, but verify: enumerate a grid of candidate corrections and check
//! that the solver's answer cannot be beaten. Exponential in the group
//! count, so strictly a desk-scale tool; that is exactly what makes it an
//! independent referee.
//!
//! Run with `cargo run --example oracle_crosscheck --release`.

use equiscore::lp::{build_forward_lp, decode_solution, group_mass, BonusMalus, LpKind};
use equiscore::oracle::{brute_force_forward, verify_two_pop_optimality, GridSpec};
use equiscore::reduction::residual_targets;
use equiscore::simplex::solve;
use equiscore::space::{Partition, PopulationModel, ProfileSpace, ScoreTable, TargetVector};
use equiscore::two_pop::solve_two_pop;

fn main() {
    let space = ProfileSpace::with_unit_weights(["A", "B", "C"]);
    let pop1 = PopulationModel::new("pop1", vec![0.5, 0.3, 0.2]);
    let pop2 = PopulationModel::new("pop2", vec![0.2, 0.3, 0.5]);
    let scores = ScoreTable::new(vec![1.0, 2.0, 3.0]);

    // First: the closed-form shift against an exhaustive search over all
    // corrections on a 201^3 grid.
    let solution = solve_two_pop(&space, &pop1, &pop2, &scores);
    let grid = GridSpec::symmetric((2.0 * solution.shift.abs()).max(1.0), 201);
    let check =
        verify_two_pop_optimality(&space, &pop1, &pop2, &scores, solution.shift, &grid, 1e-9)
            .expect("grid fits the point cap");
    println!(
        "closed-form shift {:+.4}: exhaustive search {} it",
        solution.shift,
        if check.optimal { "confirms" } else { "REFUTES" }
    );

    // Second: the solved minimax level against a grid search over flat
    // corrections, rounding tolerance half a grid step.
    let pops = vec![pop1, pop2];
    let targets = TargetVector::new(vec![1.7, 1.7]);
    let partition = Partition::new(vec![0, 1, 1], 2).unwrap();
    let residuals = residual_targets(&space, &pops, &scores, &targets).unwrap();
    let masses = group_mass(&space, &pops, &partition);
    let solved = solve(&build_forward_lp(&masses, &residuals)).unwrap();
    let flat = match decode_solution(LpKind::Forward, &solved, &partition) {
        BonusMalus::Optimal(flat) => flat,
        other => panic!("unexpected outcome: {other:?}"),
    };

    let oracle_grid = GridSpec::symmetric(2.0 * flat.gamma.max(0.5), 401);
    let found = brute_force_forward(
        &space,
        &pops,
        &residuals,
        &partition,
        &oracle_grid,
        oracle_grid.step() / 2.0,
    )
    .expect("grid fits the point cap")
    .expect("the grid brackets the solved correction");
    println!(
        "solver level {:.4}; best grid point {:.4} at {:?} (step {:.4})",
        flat.gamma,
        found.level,
        found.point,
        oracle_grid.step()
    );
    assert!(found.level >= flat.gamma - oracle_grid.step());
    println!("no grid point does meaningfully better: the solver answer stands");
}
