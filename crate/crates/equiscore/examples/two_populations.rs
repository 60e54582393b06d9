//! The two-population case has a closed form: raise scores where the first
//! population outweighs the second, lower them everywhere else, by one
//! common amount. That amount is provably the smallest worst-case change
//! that makes the averages meet.
//!
//! Run with `cargo run --example two_populations`.

use equiscore::space::{population_average, PopulationModel, ProfileSpace, ScoreTable};
use equiscore::two_pop::solve_two_pop;

fn main() {
    let space = ProfileSpace::with_unit_weights(["A", "B", "C"]);
    let pop1 = PopulationModel::new("pop1", vec![0.5, 0.3, 0.2]);
    let pop2 = PopulationModel::new("pop2", vec![0.2, 0.3, 0.5]);
    let scores = ScoreTable::new(vec![1.0, 2.0, 3.0]);

    let before1 = population_average(&space, &pop1, &scores);
    let before2 = population_average(&space, &pop2, &scores);
    println!("before: pop1 averages {before1:.3}, pop2 averages {before2:.3}");

    let solution = solve_two_pop(&space, &pop1, &pop2, &scores);
    println!(
        "density gap {:.3}, average gap {:.3}, shift {:+.3}",
        solution.density_gap, solution.average_gap, solution.shift
    );

    println!("cell  density1 density2  direction  old -> new");
    for (i, id) in space.cell_ids().iter().enumerate() {
        let dir = if solution.signs.values()[i] > 0.0 {
            "raise"
        } else {
            "cut"
        };
        println!(
            "{id:<5} {:>8.2} {:>8.2}  {dir:<9} {:.2} -> {:.2}",
            pop1.density()[i],
            pop2.density()[i],
            scores.values()[i],
            solution.corrected.values()[i]
        );
    }

    let after1 = population_average(&space, &pop1, &solution.corrected);
    let after2 = population_average(&space, &pop2, &solution.corrected);
    println!("after: pop1 averages {after1:.3}, pop2 averages {after2:.3}");
    println!(
        "no individual score moved by more than {:.3}",
        solution.shift.abs()
    );
}
