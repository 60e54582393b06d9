//! The general pipeline: any number of populations, arbitrary targets.
//!
//! 1. Turn targets into residuals (how much each average must move).
//! 2. Pick a partition of the cells; the correction will be constant on
//!    each group.
//! 3. Build the minimax model and solve it.
//! 4. Apply the per-group raise/cut to the scores.
//!
//! Run with `cargo run --example remove_discrimination`.

use equiscore::lp::{build_forward_lp, decode_solution, group_mass, BonusMalus, LpKind};
use equiscore::reduction::{assemble_forward, residual_targets};
use equiscore::simplex::solve;
use equiscore::space::{audit, Partition, PopulationModel, ProfileSpace, ScoreTable, TargetVector};

fn main() {
    let space = ProfileSpace::with_unit_weights(["A", "B", "C", "D"]);
    let pops = vec![
        PopulationModel::new("north", vec![0.4, 0.3, 0.2, 0.1]),
        PopulationModel::new("south", vec![0.1, 0.2, 0.3, 0.4]),
        PopulationModel::new("east", vec![0.25, 0.25, 0.25, 0.25]),
    ];
    let scores = ScoreTable::new(vec![0.0, 1.0, 2.0, 4.0]);
    let targets = TargetVector::new(vec![1.6, 1.6, 1.6]);

    let pre = audit(&space, &pops, &scores, &targets).unwrap();
    println!("before: worst |gap| {:.4}", pre.max_abs_gap);

    let residuals = residual_targets(&space, &pops, &scores, &targets).unwrap();
    println!("residual moves needed: {:?}", residuals.values());

    // Finest partition first: one group per cell.
    let partition = Partition::singletons(space.len());
    let masses = group_mass(&space, &pops, &partition);
    let model = build_forward_lp(&masses, &residuals);
    let solved = solve(&model).expect("model is well formed");
    let flat = match decode_solution(LpKind::Forward, &solved, &partition) {
        BonusMalus::Optimal(flat) => flat,
        BonusMalus::Infeasible => {
            println!("no correction reaches these targets with this partition");
            return;
        }
        BonusMalus::Unbounded => unreachable!("bounded by construction"),
    };
    println!(
        "optimal correction level {:.4} found in {} pivots",
        flat.gamma, solved.iterations
    );
    for (i, id) in space.cell_ids().iter().enumerate() {
        println!(
            "  {id}: bonus {:+.4}, malus {:+.4}, net {:+.4}",
            flat.bonus[i],
            flat.malus[i],
            flat.table.values()[i]
        );
    }

    let corrected = assemble_forward(&scores, &flat.table).unwrap();
    let post = audit(&space, &pops, &corrected, &targets).unwrap();
    println!("after: worst |gap| {:.2e}", post.max_abs_gap);
    println!("corrected scores: {:?}", corrected.values());
}
