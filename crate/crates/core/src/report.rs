//! Machine-readable outputs: the cell CSV used for plotting and the
//! structured TOML report.
//!
//! CSV schema (one row per cell, deterministic order, shortest round-trip
//! float formatting):
//!
//! ```text
//! step,theta_lo,theta_hi,x_lo,x_hi,y_lo,y_hi,status
//! ```
//!
//! The report is a TOML document with stable field names: `verdict`,
//! `mode`, `exit_ok`, `entry_ok`, `expansion_ok`, `degree`, `deg2`,
//! `cells_checked_*`, `failed_total`, `wall_time_ms`, `reasons`, a
//! `[[failed_cells]]` table per stored witness, and in sequence mode one
//! `[[members]]` table per member.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::covering::CoveringReport;
use crate::enclosure::{DiscardReason, EnclosureRun};
use crate::geometry::Cell;

/// A cell row for CSV export.
#[derive(Debug, Clone)]
pub struct CellRow {
    pub step: usize,
    pub cell: Cell,
    pub status: String,
}

pub fn csv_header() -> &'static str {
    "step,theta_lo,theta_hi,x_lo,x_hi,y_lo,y_hi,status\n"
}

fn push_row(out: &mut String, row: &CellRow) {
    let c = &row.cell;
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{}",
        row.step,
        c.theta.lo(),
        c.theta.hi(),
        c.x.lo(),
        c.x.hi(),
        c.y.lo(),
        c.y.hi(),
        row.status
    );
}

pub fn cells_to_csv(rows: &[CellRow]) -> String {
    let mut out = String::with_capacity(64 + rows.len() * 64);
    out.push_str(csv_header());
    for row in rows {
        push_row(&mut out, row);
    }
    out
}

/// Writes cell rows to a CSV file; rewriting the same rows is byte-identical.
pub fn export_cells(rows: &[CellRow], path: &Path) -> std::io::Result<()> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(cells_to_csv(rows).as_bytes())?;
    Ok(())
}

/// Rows for every step of an enclosure run: survivors plus discards with
/// their certificate kind.
pub fn enclosure_rows(run: &EnclosureRun) -> Vec<CellRow> {
    let mut rows = Vec::new();
    for (step, cells) in run.steps.iter().enumerate() {
        for c in &cells.survivors {
            rows.push(CellRow {
                step,
                cell: *c,
                status: "survivor".into(),
            });
        }
        for d in &cells.discarded {
            let status = match d.reason {
                DiscardReason::OutsideDomain => "outside".to_string(),
                DiscardReason::Escaped { iterate } => format!("escaped:{iterate}"),
            };
            rows.push(CellRow {
                step,
                cell: d.cell,
                status,
            });
        }
    }
    rows
}

pub fn slice_rows(cells: &[Cell], step: usize) -> Vec<CellRow> {
    cells
        .iter()
        .map(|c| CellRow {
            step,
            cell: *c,
            status: "survivor".into(),
        })
        .collect()
}

pub fn witness_rows(report: &CoveringReport) -> Vec<CellRow> {
    report
        .failed_cells
        .iter()
        .map(|f| CellRow {
            step: 0,
            cell: f.cell,
            status: f.condition.to_string(),
        })
        .collect()
}

fn toml_str(s: &str) -> String {
    format!("{:?}", s)
}

fn cell_fields(out: &mut String, cell: &Cell) {
    let _ = writeln!(out, "theta = [{}, {}]", cell.theta.lo(), cell.theta.hi());
    let _ = writeln!(out, "x = [{}, {}]", cell.x.lo(), cell.x.hi());
    let _ = writeln!(out, "y = [{}, {}]", cell.y.lo(), cell.y.hi());
    if let Some(a) = cell.alpha {
        let _ = writeln!(out, "alpha = [{}, {}]", a.lo(), a.hi());
    }
    if let Some(b) = cell.beta {
        let _ = writeln!(out, "beta = [{}, {}]", b.lo(), b.hi());
    }
}

fn report_body(out: &mut String, report: &CoveringReport, member_prefix: &str) {
    let _ = writeln!(out, "verdict = {}", toml_str(&report.verdict.to_string()));
    let _ = writeln!(out, "mode = {}", toml_str(&report.mode.to_string()));
    let _ = writeln!(out, "exit_ok = {}", report.exit_ok);
    let _ = writeln!(out, "entry_ok = {}", report.entry_ok);
    let _ = writeln!(out, "expansion_ok = {}", report.expansion_ok);
    if let Some(d) = report.degree {
        let _ = writeln!(out, "degree = {d}");
        let _ = writeln!(out, "deg2 = {}", report.deg2().unwrap());
    }
    let _ = writeln!(out, "cells_checked_exit = {}", report.cells_checked.exit);
    let _ = writeln!(out, "cells_checked_entry = {}", report.cells_checked.entry);
    let _ = writeln!(
        out,
        "cells_checked_expansion = {}",
        report.cells_checked.expansion
    );
    let _ = writeln!(out, "failed_total = {}", report.failed_total);
    let _ = writeln!(out, "mobius_stable = {}", report.mobius_stable);
    let _ = writeln!(out, "wall_time_ms = {}", report.wall_time.as_millis());
    if let Some(i) = report.first_failing_index {
        let _ = writeln!(out, "first_failing_index = {i}");
    }
    let reasons: Vec<String> = report.reasons.iter().map(|r| toml_str(r)).collect();
    let _ = writeln!(out, "reasons = [{}]", reasons.join(", "));
    for f in &report.failed_cells {
        let _ = writeln!(out, "\n[[{member_prefix}failed_cells]]");
        let _ = writeln!(out, "condition = {}", toml_str(&f.condition.to_string()));
        cell_fields(out, &f.cell);
    }
}

/// Renders the structured report as a TOML document.
pub fn report_to_toml(report: &CoveringReport) -> String {
    let mut out = String::new();
    report_body(&mut out, report, "");
    for sub in &report.sub_reports {
        out.push_str("\n[[members]]\n");
        let mut body = String::new();
        report_body(&mut body, sub, "members.");
        // Witness tables of members must nest under the member table.
        out.push_str(&body);
    }
    out
}

pub fn export_report(report: &CoveringReport, path: &Path) -> std::io::Result<()> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(report_to_toml(report).as_bytes())?;
    Ok(())
}

/// Human summary printed on standard output; the last line is exactly
/// `VERIFIED` or `NOT VERIFIED`.
pub fn human_summary(report: &CoveringReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "mode: {}", report.mode);
    let flag = |ok: bool| if ok { "ok" } else { "FAILED" };
    let _ = writeln!(
        out,
        "exit condition: {} ({} cells)",
        flag(report.exit_ok),
        report.cells_checked.exit
    );
    let _ = writeln!(
        out,
        "entry condition: {} ({} cells)",
        flag(report.entry_ok),
        report.cells_checked.entry
    );
    let _ = writeln!(
        out,
        "expansion condition: {} ({} parts)",
        flag(report.expansion_ok),
        report.cells_checked.expansion
    );
    if let Some(d) = report.degree {
        let _ = writeln!(out, "degree: {d} (deg2 = {})", report.deg2().unwrap());
    }
    for r in &report.reasons {
        let _ = writeln!(out, "note: {r}");
    }
    if report.failed_total > 0 {
        let _ = writeln!(
            out,
            "failed cells: {} ({} witnesses stored)",
            report.failed_total,
            report.failed_cells.len()
        );
    }
    let _ = writeln!(out, "wall time: {:.3} s", report.wall_time.as_secs_f64());
    match report.verdict {
        crate::covering::Verdict::Verified => out.push_str("VERIFIED"),
        crate::covering::Verdict::NotVerified => out.push_str("NOT VERIFIED"),
        crate::covering::Verdict::Error => out.push_str("ERROR"),
    }
    out
}
