//! Evaluation report: a two-line CSV and a text table.

use std::fmt::Write as _;

use shadowtrack_core::metrics::MotReport;

pub const HEADER: &str = "MOTA,FP,FN,IDSW,FM,GT";

fn mota_text(r: &MotReport) -> String {
    r.mota.map_or_else(|| "undefined".to_string(), |m| format!("{m:.6}"))
}

pub fn csv(r: &MotReport) -> String {
    format!(
        "{HEADER}\n{},{},{},{},{},{}\n",
        mota_text(r),
        r.false_positives,
        r.false_negatives,
        r.id_switches,
        r.fragmentations,
        r.gt_boxes
    )
}

pub fn table(r: &MotReport) -> String {
    let rows = [
        ("MOTA", mota_text(r)),
        ("FP", r.false_positives.to_string()),
        ("FN", r.false_negatives.to_string()),
        ("IDSW", r.id_switches.to_string()),
        ("FM", r.fragmentations.to_string()),
        ("GT boxes", r.gt_boxes.to_string()),
    ];
    let width = rows.iter().map(|r| r.1.len()).max().unwrap_or(0).max(5);
    let mut out = String::new();
    let rule = format!("+----------+-{}-+\n", "-".repeat(width));
    out.push_str(&rule);
    writeln!(out, "| {:<8} | {:>width$} |", "metric", "value").unwrap();
    out.push_str(&rule);
    for (k, v) in rows {
        writeln!(out, "| {k:<8} | {v:>width$} |").unwrap();
    }
    out.push_str(&rule);
    out
}
