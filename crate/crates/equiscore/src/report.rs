//! Run reports: one human-readable rendering, one machine JSON document.
//!
//! Post-correction numbers are always recomputed from the emitted output
//! file by the command layer; nothing in a report echoes solver-internal
//! state that was not independently confirmed.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::space::GapReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub cells: usize,
    pub populations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groups: Option<usize>,
    /// Averages and gaps of the input scores.
    pub pre: GapReport,
    /// Averages and gaps recomputed from the emitted corrected scores.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub post: Option<GapReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correction: Option<CorrectionSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifySummary>,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionSummary {
    /// `uniform-shift` (two-population closed form), `bonus-malus`
    /// (partition model) or `budgeted` (error-budget model).
    pub kind: String,
    /// The solved level: worst per-cell change, except for budgeted runs
    /// where it is the worst remaining average gap.
    pub level: f64,
    /// Sup-norm distance between emitted and input scores, recomputed.
    pub sup_norm: f64,
    pub raised_cells: usize,
    pub cut_cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSummary {
    pub status: String,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifySummary {
    /// False when the instance was too large to enumerate.
    pub ran: bool,
    /// None when the check was skipped or came back inconclusive.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agreed: Option<bool>,
    pub note: String,
}

fn render_gaps(out: &mut String, label: &str, section: &GapReport) {
    let _ = writeln!(out, "  {label}:");
    for line in &section.gaps {
        let _ = writeln!(
            out,
            "    {:<12} average {:>12.6}  target {:>12.6}  gap {:>+13.6e}",
            line.population, line.average, line.target, line.gap
        );
    }
    let _ = writeln!(out, "    worst |gap|: {:.6e}", section.max_abs_gap);
}

impl RunReport {
    /// Plain-text rendering for standard output.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = write!(
            out,
            "{}: {} cells, {} populations",
            self.command, self.cells, self.populations
        );
        if let Some(groups) = self.groups {
            let _ = write!(out, ", {groups} groups");
        }
        let _ = writeln!(out);
        render_gaps(&mut out, "input", &self.pre);
        if let Some(c) = &self.correction {
            let _ = writeln!(
                out,
                "  correction: {} level {:.6e}, sup-norm {:.6e}, raised {}, cut {}",
                c.kind, c.level, c.sup_norm, c.raised_cells, c.cut_cells
            );
        }
        if let Some(s) = &self.solver {
            let _ = writeln!(out, "  solver: {} after {} pivots", s.status, s.iterations);
        }
        if let Some(post) = &self.post {
            render_gaps(&mut out, "output", post);
        }
        if let Some(v) = &self.verify {
            let _ = writeln!(out, "  cross-check: {}", v.note);
        }
        let _ = writeln!(out, "  wall time: {:.1} ms", self.wall_ms);
        out
    }
}
