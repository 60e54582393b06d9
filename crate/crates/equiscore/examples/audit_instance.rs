//! Measure how far each population's average score sits from its target.
//!
//! Run with `cargo run --example audit_instance`.

use equiscore::space::{audit, PopulationModel, ProfileSpace, ScoreTable, TargetVector};

fn main() {
    // Three profile cells, two populations concentrated at opposite ends.
    let space = ProfileSpace::with_unit_weights(["junior", "mid", "senior"]);
    let applicants = PopulationModel::new("applicants", vec![0.5, 0.3, 0.2]);
    let references = PopulationModel::new("references", vec![0.2, 0.3, 0.5]);
    let scores = ScoreTable::new(vec![1.0, 2.0, 3.0]);

    // Ask both populations to average 1.7.
    let targets = TargetVector::new(vec![1.7, 1.7]);
    let report = audit(&space, &[applicants, references], &scores, &targets)
        .expect("instance dimensions agree");

    println!("population      average   target      gap");
    for gap in &report.gaps {
        println!(
            "{:<12} {:>10.4} {:>8.4} {:>+9.4}",
            gap.population, gap.average, gap.target, gap.gap
        );
    }
    println!("worst |gap|: {:.4}", report.max_abs_gap);
}
