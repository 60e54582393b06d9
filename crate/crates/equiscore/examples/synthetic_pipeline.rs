//! Full in-memory pipeline on generated data: synthesize an instance with
//! deliberately separated populations, equalize it, and audit the result.
//! The same flow is available from the command line as
//! `equiscore synth | remove | audit`.
//!
//! Run with `cargo run --example synthetic_pipeline`.

use equiscore::lp::{build_forward_lp, decode_solution, group_mass, BonusMalus, LpKind};
use equiscore::reduction::{assemble_forward, residual_targets};
use equiscore::simplex::solve;
use equiscore::space::{audit, Partition};
use equiscore::synth::{generate, SynthConfig};

fn main() {
    let instance = generate(&SynthConfig {
        cells: 120,
        populations: 3,
        seed: 7,
        separation: 0.4,
    });
    let space = instance.space();
    let pops = instance.population_models();
    let scores = instance.score_table();
    let targets = instance.target_vector().expect("synth always sets targets");

    let pre = audit(&space, &pops, &scores, &targets).unwrap();
    println!(
        "generated {} cells, {} populations",
        space.len(),
        pops.len()
    );
    for gap in &pre.gaps {
        println!("  {} starts {:+.4} from target", gap.population, gap.gap);
    }

    let partition = Partition::singletons(space.len());
    let residuals = residual_targets(&space, &pops, &scores, &targets).unwrap();
    let masses = group_mass(&space, &pops, &partition);
    let solved = solve(&build_forward_lp(&masses, &residuals)).unwrap();
    let flat = match decode_solution(LpKind::Forward, &solved, &partition) {
        BonusMalus::Optimal(flat) => flat,
        other => panic!("unexpected outcome: {other:?}"),
    };
    let corrected = assemble_forward(&scores, &flat.table).unwrap();

    let post = audit(&space, &pops, &corrected, &targets).unwrap();
    println!(
        "corrected with level {:.4} in {} pivots; worst gap {:.1e} -> {:.1e}",
        flat.gamma, solved.iterations, pre.max_abs_gap, post.max_abs_gap
    );

    let moved = corrected
        .values()
        .iter()
        .zip(scores.values())
        .filter(|(h, f)| h != f)
        .count();
    println!("{moved} of {} scores moved", space.len());
}
