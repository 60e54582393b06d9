//! Command-line surface: five subcommands over JSON instance files.
//!
//! Exit codes are a stable contract:
//!
//! | code | meaning |
//! |------|---------|
//! | 0    | success |
//! | 2    | unreadable, unparsable or invalid input (including bad flags) |
//! | 3    | `two-pop` invoked with a population count other than two |
//! | 4    | no correction satisfies the targets under the given partition |
//! | 5    | the model is unbounded (malformed input; never expected) |
//! | 6    | `--verify` found a solver answer the exhaustive check refutes |
//!
//! Commands that write a corrected instance also write a machine-readable
//! report next to it (`<out>.report.json`). Post-correction gaps in every
//! report are recomputed by re-reading the emitted file, never echoed from
//! solver state.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::instance::{
    partition_from_one_based, partition_to_one_based, Instance, InstanceError, PartitionSpec,
};
use crate::jsonfmt;
use crate::lp::{
    build_forward_lp, build_inverse_lp, decode_solution, group_mass, BonusMalus, LpKind,
};
use crate::oracle::{
    brute_force_forward, brute_force_inverse, max_steps_for, verify_two_pop_optimality, GridSpec,
    DEFAULT_POINT_CAP,
};
use crate::reduction::{assemble_forward, residual_targets, ResidualTargets};
use crate::report::{CorrectionSummary, RunReport, SolverSummary, VerifySummary};
use crate::simplex;
use crate::space::{
    audit, population_average, sup_norm_distance, GapReport, Partition, PopulationModel,
    ProfileSpace, ScoreTable, TargetVector, Violation,
};
use crate::synth::{generate, SynthConfig};
use crate::two_pop::{sign_partition, solve_two_pop};

#[derive(Debug, Parser)]
#[command(
    name = "equiscore",
    version,
    about = "Equalize population average scores with minimal individual change"
)]
pub struct Cli {
    /// Suppress the human-readable report on standard output.
    #[arg(long, global = true)]
    pub quiet: bool,
    /// Cross-check the solved correction against an exhaustive grid search
    /// (small instances only; exits 6 on refutation).
    #[arg(long, global = true, hide = true)]
    pub verify: bool,
    /// Rescale densities to unit mass before validating.
    #[arg(long, global = true)]
    pub renormalize: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Report each population's average score and its gap to the target.
    Audit {
        instance: PathBuf,
        /// Also write the machine-readable report to this path.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Equalize two populations with a uniform raise/cut per density zone.
    #[command(name = "two-pop")]
    TwoPop {
        instance: PathBuf,
        /// Corrected instance file to write.
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Move every population onto its target, minimizing the worst
    /// per-cell change of a partition-constant correction.
    Remove {
        instance: PathBuf,
        /// Corrected instance file to write.
        #[arg(short, long)]
        out: PathBuf,
        /// "auto" for one group per cell, or a JSON file holding 1-based
        /// group indices. Overrides the partition in the instance.
        #[arg(long)]
        partition: Option<String>,
        /// Write the built model as a plain-text listing.
        #[arg(long, hide = true, value_name = "FILE")]
        dump_lp: Option<PathBuf>,
    },
    /// Close as much of each gap as a per-cell change budget allows.
    Inverse {
        instance: PathBuf,
        /// Corrected instance file to write.
        #[arg(short, long)]
        out: PathBuf,
        /// Largest change any cell may receive; must be nonnegative.
        #[arg(long)]
        epsilon: f64,
    },
    /// Generate a deterministic synthetic instance.
    Synth {
        #[arg(long, default_value_t = 50)]
        cells: usize,
        #[arg(long, default_value_t = 2)]
        pops: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Distance between population density centers; zero makes all
        /// populations identical.
        #[arg(long, default_value_t = 0.3)]
        separation: f64,
        /// Instance file to write.
        #[arg(short, long)]
        out: PathBuf,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("invalid instance {path}: {detail}")]
    Invalid { path: String, detail: String },
    #[error("two-pop needs exactly 2 populations, this instance has {0}")]
    PopulationCount(usize),
    #[error(
        "no correction satisfies every target under this partition; \
         refine the partition or use `inverse` with a change budget"
    )]
    Infeasible,
    #[error("the correction model is unbounded, which indicates malformed input")]
    Unbounded,
    #[error("cross-check failed: {0}")]
    VerifyMismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Instance(_) | CliError::Invalid { .. } => 2,
            CliError::PopulationCount(_) => 3,
            CliError::Infeasible => 4,
            CliError::Unbounded => 5,
            CliError::VerifyMismatch(_) => 6,
        }
    }
}

/// Parses arguments from the environment and runs. Returns the exit code;
/// argument errors print usage and exit 2 via clap before this returns.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Audit { instance, report } => cmd_audit(cli, instance, report.as_deref()),
        Command::TwoPop { instance, out } => cmd_two_pop(cli, instance, out),
        Command::Remove {
            instance,
            out,
            partition,
            dump_lp,
        } => cmd_remove(cli, instance, out, partition.as_deref(), dump_lp.as_deref()),
        Command::Inverse {
            instance,
            out,
            epsilon,
        } => cmd_inverse(cli, instance, out, *epsilon),
        Command::Synth {
            cells,
            pops,
            seed,
            separation,
            out,
        } => cmd_synth(cli, *cells, *pops, *seed, *separation, out),
    }
}

/// Reads and validates an instance; every violation is reported at once.
fn load(path: &Path, renormalize: bool) -> Result<Instance, CliError> {
    let mut instance = Instance::read(path)?;
    if renormalize {
        instance = instance.renormalized();
    }
    let violations = instance.validate();
    if !violations.is_empty() {
        let detail = violations
            .iter()
            .map(Violation::to_string)
            .collect::<Vec<_>>()
            .join("; ");
        return Err(CliError::Invalid {
            path: path.display().to_string(),
            detail,
        });
    }
    Ok(instance)
}

fn required_targets(instance: &Instance, command: &str) -> Result<TargetVector, CliError> {
    instance.target_vector().ok_or_else(|| {
        CliError::Usage(format!(
            "`{command}` needs targets; add a \"targets\" array to the instance"
        ))
    })
}

/// Partition precedence: command-line flag, then the instance's own field,
/// then one group per cell.
fn resolve_partition(instance: &Instance, flag: Option<&str>) -> Result<Partition, CliError> {
    match flag {
        Some("auto") => Ok(Partition::singletons(instance.cells.len())),
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| {
                CliError::Instance(InstanceError::Io {
                    path: path.to_string(),
                    source,
                })
            })?;
            let groups: Vec<usize> = serde_json::from_str(&text)
                .map_err(|source| CliError::Instance(InstanceError::Parse { source }))?;
            if groups.len() != instance.cells.len() {
                return Err(CliError::Usage(format!(
                    "partition file {path} covers {} cells, instance has {}",
                    groups.len(),
                    instance.cells.len()
                )));
            }
            Ok(partition_from_one_based(&groups)?)
        }
        None => Ok(instance
            .declared_partition()?
            .unwrap_or_else(|| Partition::singletons(instance.cells.len()))),
    }
}

fn write_report(report: &RunReport, quiet: bool, json_path: Option<&Path>) -> Result<(), CliError> {
    if !quiet {
        print!("{}", report.render_text());
    }
    if let Some(path) = json_path {
        fs::write(path, jsonfmt::to_json_string(report)).map_err(|source| {
            CliError::Instance(InstanceError::Io {
                path: path.display().to_string(),
                source,
            })
        })?;
    }
    Ok(())
}

fn report_path_for(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".report.json");
    PathBuf::from(name)
}

/// Re-reads the emitted file and audits it, so reported post-correction
/// numbers reflect what actually landed on disk.
fn recomputed_post(
    out: &Path,
    original_scores: &ScoreTable,
) -> Result<(GapReport, f64, usize, usize), CliError> {
    let emitted = Instance::read(out)?;
    let targets = emitted
        .target_vector()
        .expect("emitted instances always carry targets");
    let post = audit(
        &emitted.space(),
        &emitted.population_models(),
        &emitted.score_table(),
        &targets,
    )
    .expect("emitted instance is shape-consistent");
    let emitted_scores = emitted.score_table();
    let sup = sup_norm_distance(&emitted_scores, original_scores)
        .expect("emitted instance preserves the cell count");
    let mut raised = 0;
    let mut cut = 0;
    for (h, f) in emitted_scores.values().iter().zip(original_scores.values()) {
        if h > f {
            raised += 1;
        } else if h < f {
            cut += 1;
        }
    }
    Ok((post, sup, raised, cut))
}

fn cmd_audit(cli: &Cli, path: &Path, report_path: Option<&Path>) -> Result<(), CliError> {
    let started = Instant::now();
    let instance = load(path, cli.renormalize)?;
    let targets = required_targets(&instance, "audit")?;
    let pre = audit(
        &instance.space(),
        &instance.population_models(),
        &instance.score_table(),
        &targets,
    )
    .expect("validated instance");
    let report = RunReport {
        command: "audit".into(),
        cells: instance.cells.len(),
        populations: instance.populations.len(),
        groups: None,
        pre,
        post: None,
        correction: None,
        solver: None,
        verify: None,
        wall_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    write_report(&report, cli.quiet, report_path)
}

fn cmd_two_pop(cli: &Cli, path: &Path, out: &Path) -> Result<(), CliError> {
    let started = Instant::now();
    let instance = load(path, cli.renormalize)?;
    if instance.populations.len() != 2 {
        return Err(CliError::PopulationCount(instance.populations.len()));
    }
    let space = instance.space();
    let pops = instance.population_models();
    let scores = instance.score_table();
    let solution = solve_two_pop(&space, &pops[0], &pops[1], &scores);

    // Report against the instance's own targets when it has them; the
    // equalized common average otherwise.
    let report_targets = instance.targets.clone().unwrap_or_else(|| {
        let achieved = population_average(&space, &pops[0], &solution.corrected);
        vec![achieved; 2]
    });
    let mut corrected = instance.with_scores(&solution.corrected);
    corrected.targets = Some(report_targets.clone());
    corrected.partition = Some(PartitionSpec::Groups(partition_to_one_based(
        &sign_partition(&pops[0], &pops[1]),
    )));
    corrected.write(out)?;

    let targets = TargetVector::new(report_targets);
    let pre = audit(&space, &pops, &scores, &targets).expect("validated instance");
    let (post, sup, raised, cut) = recomputed_post(out, &scores)?;

    let verify = if cli.verify {
        Some(verify_two_pop(&space, &pops, &scores, solution.shift)?)
    } else {
        None
    };

    let report = RunReport {
        command: "two-pop".into(),
        cells: instance.cells.len(),
        populations: 2,
        groups: None,
        pre,
        post: Some(post),
        correction: Some(CorrectionSummary {
            kind: "uniform-shift".into(),
            level: solution.shift.abs(),
            sup_norm: sup,
            raised_cells: raised,
            cut_cells: cut,
        }),
        solver: None,
        verify,
        wall_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    write_report(&report, cli.quiet, Some(&report_path_for(out)))
}

fn cmd_remove(
    cli: &Cli,
    path: &Path,
    out: &Path,
    partition_flag: Option<&str>,
    dump_lp: Option<&Path>,
) -> Result<(), CliError> {
    let started = Instant::now();
    let instance = load(path, cli.renormalize)?;
    let targets = required_targets(&instance, "remove")?;
    let space = instance.space();
    let pops = instance.population_models();
    let scores = instance.score_table();
    let partition = resolve_partition(&instance, partition_flag)?;
    let residuals = residual_targets(&space, &pops, &scores, &targets).expect("validated instance");
    let masses = group_mass(&space, &pops, &partition);
    let model = build_forward_lp(&masses, &residuals);
    if let Some(dump) = dump_lp {
        fs::write(dump, model.debug_listing()).map_err(|source| {
            CliError::Instance(InstanceError::Io {
                path: dump.display().to_string(),
                source,
            })
        })?;
    }
    let solved = simplex::solve(&model).expect("built models are well formed");
    let flat = match decode_solution(LpKind::Forward, &solved, &partition) {
        BonusMalus::Optimal(flat) => flat,
        BonusMalus::Infeasible => return Err(CliError::Infeasible),
        BonusMalus::Unbounded => return Err(CliError::Unbounded),
    };
    let corrected_scores =
        assemble_forward(&scores, &flat.table).expect("correction matches the cell count");

    let mut corrected = instance.with_scores(&corrected_scores);
    corrected.partition = Some(PartitionSpec::Groups(partition_to_one_based(&partition)));
    corrected.write(out)?;

    let pre = audit(&space, &pops, &scores, &targets).expect("validated instance");
    let (post, sup, raised, cut) = recomputed_post(out, &scores)?;

    let verify = if cli.verify {
        Some(verify_forward(
            &space, &pops, &residuals, &partition, flat.gamma,
        )?)
    } else {
        None
    };

    let report = RunReport {
        command: "remove".into(),
        cells: instance.cells.len(),
        populations: pops.len(),
        groups: Some(partition.group_count()),
        pre,
        post: Some(post),
        correction: Some(CorrectionSummary {
            kind: "bonus-malus".into(),
            level: flat.gamma,
            sup_norm: sup,
            raised_cells: raised,
            cut_cells: cut,
        }),
        solver: Some(SolverSummary {
            status: "optimal".into(),
            iterations: solved.iterations,
        }),
        verify,
        wall_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    write_report(&report, cli.quiet, Some(&report_path_for(out)))
}

fn cmd_inverse(cli: &Cli, path: &Path, out: &Path, epsilon: f64) -> Result<(), CliError> {
    let started = Instant::now();
    if epsilon < 0.0 || !epsilon.is_finite() {
        return Err(CliError::Usage(format!(
            "--epsilon must be a nonnegative number, got {epsilon}"
        )));
    }
    let instance = load(path, cli.renormalize)?;
    let targets = required_targets(&instance, "inverse")?;
    let space = instance.space();
    let pops = instance.population_models();
    let scores = instance.score_table();
    let partition = resolve_partition(&instance, None)?;
    let residuals = residual_targets(&space, &pops, &scores, &targets).expect("validated instance");
    let masses = group_mass(&space, &pops, &partition);
    let model = build_inverse_lp(&masses, &residuals, epsilon).expect("budget already checked");
    let solved = simplex::solve(&model).expect("built models are well formed");
    let flat = match decode_solution(LpKind::Inverse, &solved, &partition) {
        BonusMalus::Optimal(flat) => flat,
        // A budgeted model always admits the zero correction; reaching
        // these arms means the input was malformed in a way validation
        // cannot see, so they stay loud.
        BonusMalus::Infeasible => return Err(CliError::Infeasible),
        BonusMalus::Unbounded => return Err(CliError::Unbounded),
    };
    let corrected_scores =
        assemble_forward(&scores, &flat.table).expect("correction matches the cell count");

    let mut corrected = instance.with_scores(&corrected_scores);
    corrected.partition = Some(PartitionSpec::Groups(partition_to_one_based(&partition)));
    corrected.write(out)?;

    let pre = audit(&space, &pops, &scores, &targets).expect("validated instance");
    let (post, sup, raised, cut) = recomputed_post(out, &scores)?;

    let verify = if cli.verify {
        Some(verify_inverse(
            &space, &pops, &residuals, &partition, epsilon, flat.gamma,
        )?)
    } else {
        None
    };

    let report = RunReport {
        command: "inverse".into(),
        cells: instance.cells.len(),
        populations: pops.len(),
        groups: Some(partition.group_count()),
        pre,
        post: Some(post),
        correction: Some(CorrectionSummary {
            kind: "budgeted".into(),
            level: flat.gamma,
            sup_norm: sup,
            raised_cells: raised,
            cut_cells: cut,
        }),
        solver: Some(SolverSummary {
            status: "optimal".into(),
            iterations: solved.iterations,
        }),
        verify,
        wall_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    write_report(&report, cli.quiet, Some(&report_path_for(out)))
}

fn cmd_synth(
    cli: &Cli,
    cells: usize,
    pops: usize,
    seed: u64,
    separation: f64,
    out: &Path,
) -> Result<(), CliError> {
    if cells == 0 || pops == 0 {
        return Err(CliError::Usage(
            "synth needs at least one cell and one population".into(),
        ));
    }
    if !separation.is_finite() {
        return Err(CliError::Usage(format!(
            "--separation must be finite, got {separation}"
        )));
    }
    let instance = generate(&SynthConfig {
        cells,
        populations: pops,
        seed,
        separation,
    });
    debug_assert!(instance.validate().is_empty());
    instance.write(out)?;
    if !cli.quiet {
        println!(
            "wrote {}: {cells} cells, {pops} populations, seed {seed}",
            out.display()
        );
    }
    Ok(())
}

/// Grid steps for a cross-check, or None when even a coarse grid would
/// blow the point budget.
fn verify_steps(dims: usize) -> Option<usize> {
    let mut steps = max_steps_for(dims, DEFAULT_POINT_CAP).min(201);
    if steps.is_multiple_of(2) {
        steps -= 1;
    }
    (steps >= 11).then_some(steps)
}

fn skipped_verify() -> VerifySummary {
    VerifySummary {
        ran: false,
        agreed: None,
        note: "instance too large for an exhaustive cross-check".into(),
    }
}

fn verify_two_pop(
    space: &ProfileSpace,
    pops: &[PopulationModel],
    scores: &ScoreTable,
    shift: f64,
) -> Result<VerifySummary, CliError> {
    let Some(steps) = verify_steps(space.len()) else {
        return Ok(skipped_verify());
    };
    let half_width = (2.0 * shift.abs()).max(1.0);
    let grid = GridSpec::symmetric(half_width, steps);
    let check = verify_two_pop_optimality(space, &pops[0], &pops[1], scores, shift, &grid, 1e-9)
        .expect("grid sized within the cap");
    if check.optimal {
        Ok(VerifySummary {
            ran: true,
            agreed: Some(true),
            note: format!(
                "exhaustive search over {steps}^{} points found no cheaper fair correction",
                space.len()
            ),
        })
    } else {
        let detail = match &check.counterexample {
            Some(w) => format!(
                "shift {:.6e} refuted: a fair correction with level {:.6e} exists",
                shift.abs(),
                w.level
            ),
            None => format!("shift {:.6e} does not equalize the averages", shift.abs()),
        };
        Err(CliError::VerifyMismatch(detail))
    }
}

fn verify_forward(
    space: &ProfileSpace,
    pops: &[PopulationModel],
    residuals: &ResidualTargets,
    partition: &Partition,
    gamma: f64,
) -> Result<VerifySummary, CliError> {
    if verify_steps(partition.group_count()).is_none() {
        return Ok(skipped_verify());
    }
    let grid = GridSpec::forward_default(space, pops, residuals, partition);
    // Tight tolerance: only genuinely admissible grid points count, so a
    // clearly cheaper find refutes the solver instead of reflecting grid
    // slack. Most grids hold no exactly-admissible point; that outcome is
    // inconclusive, not a failure.
    let found = brute_force_forward(space, pops, residuals, partition, &grid, 1e-6)
        .expect("grid sized within the cap");
    match found {
        None => Ok(VerifySummary {
            ran: true,
            agreed: None,
            note: "no grid point meets every target exactly; cross-check inconclusive".into(),
        }),
        Some(res) if gamma > res.level + 1e-4 => Err(CliError::VerifyMismatch(format!(
            "solver level {gamma:.6e} but the grid reaches the targets at {:.6e}",
            res.level
        ))),
        Some(res) => Ok(VerifySummary {
            ran: true,
            agreed: Some(true),
            note: format!(
                "grid best {:.6e} consistent with solved level {gamma:.6e}",
                res.level
            ),
        }),
    }
}

fn verify_inverse(
    space: &ProfileSpace,
    pops: &[PopulationModel],
    residuals: &ResidualTargets,
    partition: &Partition,
    epsilon: f64,
    gamma: f64,
) -> Result<VerifySummary, CliError> {
    if verify_steps(partition.group_count()).is_none() {
        return Ok(skipped_verify());
    }
    let grid = GridSpec::forward_default(space, pops, residuals, partition);
    let found = brute_force_inverse(space, pops, residuals, partition, epsilon, &grid)
        .expect("grid sized within the cap")
        .expect("budgeted search always has a candidate");
    // Every grid point respects the budget exactly, so a grid point with a
    // smaller worst gap than the claimed optimum refutes the solver.
    if found.level < gamma - 1e-6 {
        Err(CliError::VerifyMismatch(format!(
            "solver gap {gamma:.6e} but the grid achieves {:.6e} within the same budget",
            found.level
        )))
    } else {
        Ok(VerifySummary {
            ran: true,
            agreed: Some(true),
            note: format!(
                "grid best gap {:.6e} consistent with solved gap {gamma:.6e}",
                found.level
            ),
        })
    }
}
