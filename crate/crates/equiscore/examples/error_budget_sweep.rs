//! When hitting every target exactly would change some scores too much,
//! flip the question: cap the per-cell change and minimize the worst
//! remaining gap. Sweeping the cap traces the whole trade-off curve.
//!
//! Run with `cargo run --example error_budget_sweep`.

use equiscore::lp::{
    build_forward_lp, build_inverse_lp, decode_solution, group_mass, BonusMalus, LpKind,
};
use equiscore::reduction::residual_targets;
use equiscore::simplex::solve;
use equiscore::space::{Partition, PopulationModel, ProfileSpace, ScoreTable, TargetVector};

fn main() {
    let space = ProfileSpace::with_unit_weights(["A", "B", "C"]);
    let pops = vec![
        PopulationModel::new("pop1", vec![0.5, 0.3, 0.2]),
        PopulationModel::new("pop2", vec![0.2, 0.3, 0.5]),
    ];
    let scores = ScoreTable::new(vec![1.0, 2.0, 3.0]);
    let targets = TargetVector::new(vec![1.7, 1.7]);
    let partition = Partition::singletons(space.len());

    let residuals = residual_targets(&space, &pops, &scores, &targets).unwrap();
    let masses = group_mass(&space, &pops, &partition);

    // What would exact equality cost?
    let exact = solve(&build_forward_lp(&masses, &residuals)).unwrap();
    let full_cost = match decode_solution(LpKind::Forward, &exact, &partition) {
        BonusMalus::Optimal(flat) => flat.gamma,
        other => panic!("unexpected outcome: {other:?}"),
    };
    println!("meeting the targets exactly costs {full_cost:.3} per cell at worst\n");

    println!("   budget   worst gap");
    for t in 0..=10 {
        let budget = full_cost * f64::from(t) / 8.0;
        let model = build_inverse_lp(&masses, &residuals, budget).unwrap();
        let solved = solve(&model).unwrap();
        let gap = match decode_solution(LpKind::Inverse, &solved, &partition) {
            BonusMalus::Optimal(flat) => flat.gamma,
            other => panic!("unexpected outcome: {other:?}"),
        };
        let bar = "#".repeat((gap * 40.0).round() as usize);
        println!("{budget:>9.3} {gap:>10.4}  {bar}");
    }
    println!("\nthe gap reaches zero once the budget covers the exact-equality cost");
}
