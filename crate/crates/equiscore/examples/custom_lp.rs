//! The bundled solver is general purpose: any `max c.x : Ax <= b, x >= 0`
//! in dense form. Here it prices a two-product plan, with a trace of every
//! pivot written to standard output.
//!
//! Run with `cargo run --example custom_lp`.

use equiscore::lp::{LpModel, LpRow};
use equiscore::simplex::{solve_with, LpStatus, SimplexOptions};

fn main() {
    // Maximize 3x + 5y subject to x <= 4, 2y <= 12, 3x + 2y <= 18.
    let model = LpModel::new(
        vec![3.0, 5.0],
        vec![
            LpRow {
                coeffs: vec![1.0, 0.0],
                rhs: 4.0,
            },
            LpRow {
                coeffs: vec![0.0, 2.0],
                rhs: 12.0,
            },
            LpRow {
                coeffs: vec![3.0, 2.0],
                rhs: 18.0,
            },
        ],
    );
    println!("{}", model.debug_listing());

    let mut trace = Vec::new();
    let solution = solve_with(
        &model,
        SimplexOptions {
            trace: Some(&mut trace),
            ..SimplexOptions::default()
        },
    )
    .expect("model is well formed");
    print!("{}", String::from_utf8_lossy(&trace));

    assert_eq!(solution.status, LpStatus::Optimal);
    println!(
        "optimum {} at x = {:?} after {} pivots",
        solution.objective, solution.x, solution.iterations
    );
    // The classic answer: x = 2, y = 6, objective 36.
}
