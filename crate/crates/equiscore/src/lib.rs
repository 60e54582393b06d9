//! Score post-processing that equalizes population averages with minimal
//! worst-case change to any individual score.
//!
//! The pieces compose in one direction: [`space`] defines profile spaces,
//! population densities and score tables; [`two_pop`] solves the
//! two-population case in closed form; [`reduction`] turns the general
//! problem into residual targets; [`lp`] builds the bonus/malus models that
//! [`simplex`] solves; [`oracle`] cross-checks everything by brute force;
//! [`instance`] and [`report`] handle the JSON surface; [`synth`] generates
//! test data; [`cli`] wires it all into the `equiscore` binary.
//!
//! The `examples/` directory has one runnable walkthrough per capability:
//! start with `audit_instance`, then `two_populations` and
//! `remove_discrimination` for the core flows.

pub mod cli;
pub mod instance;
mod jsonfmt;
pub mod lp;
pub mod oracle;
pub mod reduction;
pub mod report;
pub mod simplex;
pub mod space;
pub mod synth;
pub mod tolerances;
pub mod two_pop;
