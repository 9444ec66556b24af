use std::fmt::Write as _;

use super::run::{CheckOutcome, RunReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Format, String> {
        match s {
            "text" => Ok(Format::Text),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (text or json)")),
        }
    }
}

/// Renders a report. JSON output is pretty-printed with fields in a fixed
/// order, so equal reports give byte-identical output.
pub fn emit(report: &RunReport, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Text => text(report),
    }
}

fn fmt_residual(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:.3e}"))
}

fn verdict_cell(c: &CheckOutcome) -> &'static str {
    c.verdict.map_or("error", |v| v.as_str())
}

fn text(r: &RunReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario {} (seed {}, engine {})", r.scenario, r.seed, r.engine_version);
    if r.checks.is_empty() {
        let _ = writeln!(out, "no checks");
    } else {
        let rows: Vec<[String; 6]> = r
            .checks
            .iter()
            .map(|c| {
                [
                    c.id.clone(),
                    c.kind.clone(),
                    verdict_cell(c).to_string(),
                    c.expected.map_or("-", |v| v.as_str()).to_string(),
                    match c.matches {
                        Some(true) => "ok".into(),
                        Some(false) => "MISMATCH".into(),
                        None => "-".into(),
                    },
                    fmt_residual(c.worst_residual),
                ]
            })
            .collect();
        let header = ["check", "kind", "verdict", "expected", "match", "worst"];
        let mut width = header.map(str::len);
        for row in &rows {
            for (w, cell) in width.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let line = |cells: &[&str]| {
            let mut s = String::new();
            for (i, (cell, w)) in cells.iter().zip(width).enumerate() {
                if i + 1 == cells.len() {
                    s.push_str(cell);
                } else {
                    let _ = write!(s, "{cell:<w$}  ");
                }
            }
            s
        };
        let _ = writeln!(out, "{}", line(&header));
        for (row, c) in rows.iter().zip(&r.checks) {
            let cells: Vec<&str> = row.iter().map(String::as_str).collect();
            let _ = writeln!(out, "{}", line(&cells));
            if !c.families.is_empty() {
                family_table(&mut out, c);
            }
            if let Some(e) = &c.error {
                let _ = writeln!(out, "    error: {e}");
            }
            for f in &c.flags {
                let _ = writeln!(out, "    flag: {f}");
            }
        }
    }
    let s = &r.summary;
    let _ = writeln!(
        out,
        "{} checks: {} matched, {} mismatched, {} without expectation, {} errors",
        s.total, s.matched, s.mismatched, s.unchecked, s.errors
    );
    out
}

fn family_table(out: &mut String, c: &CheckOutcome) {
    let _ = writeln!(
        out,
        "    {:<4}  {:<5}  {:<5}  {:<8}  {:<8}  {:<22}  {:<9}  worst",
        "case", "h", "k", "sigma", "f", "field", "certified"
    );
    for f in &c.families {
        let _ = writeln!(
            out,
            "    {:<4}  {:<5}  {:<5}  {:<8}  {:<8}  {:<22}  {:<9}  {}",
            f.case,
            f.h,
            f.k,
            f.sigma,
            f.f,
            f.field,
            format!("{}/{}", f.passed, f.instances),
            fmt_residual(f.worst_residual)
        );
    }
}
