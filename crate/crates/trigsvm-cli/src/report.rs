//! Run reports: every command prints a human-readable table followed by a
//! machine-readable JSON block that embeds the full resolved configuration,
//! the seed, and the timing, so any artifact can be reproduced from its own
//! report.

use serde::Serialize;

#[derive(Serialize)]
pub struct RunReport {
    /// Subcommand that produced the report.
    pub command: String,
    /// Every resolved flag value, including defaults.
    pub config: serde_json::Value,
    pub seed: u64,
    pub timing_ms: f64,
    /// Table rows in table order; shape varies per command.
    pub metrics: Vec<serde_json::Value>,
}

/// Left-aligned fixed-width table with a rule under the header.
pub fn render_table(headers: &[String], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(String::len).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let format_line = |cells: &[String]| -> String {
        cells
            .iter()
            .zip(&widths)
            .map(|(cell, w)| format!("{cell:<w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let mut out = format_line(headers);
    out.push('\n');
    out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
    for row in rows {
        out.push('\n');
        out.push_str(&format_line(row));
    }
    out
}

/// Print the table, then the JSON report under a fixed marker line.
pub fn emit(table: &str, report: &RunReport) {
    println!("{table}");
    println!();
    println!("--- report json ---");
    println!(
        "{}",
        serde_json::to_string_pretty(report).expect("report serializes")
    );
}

pub fn elapsed_ms(start: std::time::Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}
