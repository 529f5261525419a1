//! Report rendering: aligned text tables and comma-separated output.

use attrisk::round_half_away;

use crate::error::{CliError, Result};

/// Printed for values that do not exist (standard estimator at `d = 0`,
/// plug-in odds ratio with an empty off-diagonal cell).
pub const UNDEFINED: &str = "NA";

pub const ESTIMATE_CSV_HEADER: &str = "stratum,ar_standard,ar_corrected,or_plugin,or_jewell,warnings";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum OutputFormat {
    #[default]
    Table,
    Csv,
}

/// Fixed-point with round-half-away-from-zero; never prints `-0.000`.
pub fn fmt_num(x: f64, precision: usize) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    format!("{:.*}", precision, round_half_away(x, precision as u32))
}

pub fn fmt_opt(x: Option<f64>, precision: usize) -> String {
    x.map_or_else(|| UNDEFINED.to_string(), |v| fmt_num(v, precision))
}

/// Renders rows with the first column left-aligned and the rest
/// right-aligned, two spaces between columns.
pub fn render_aligned(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &mut dyn Iterator<Item = &str>| {
        let mut out = String::new();
        for (i, (cell, w)) in cells.zip(&widths).enumerate() {
            if i == 0 {
                out.push_str(&format!("{cell:<w$}"));
            } else {
                out.push_str(&format!("  {cell:>w$}"));
            }
        }
        out.trim_end().to_string()
    };
    let mut out = line(&mut header.iter().copied());
    out.push('\n');
    for row in rows {
        out.push_str(&line(&mut row.iter().map(String::as_str)));
        out.push('\n');
    }
    out
}

pub fn render_csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// One stratum's point estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub label: String,
    /// `None` when the standard estimator hit the `d = 0` fallback.
    pub ar_standard: Option<f64>,
    pub ar_corrected: f64,
    pub or_plugin: Option<f64>,
    pub or_jewell: f64,
    pub warnings: Vec<String>,
}

impl ReportRow {
    fn cells(&self, precision: usize) -> Vec<String> {
        vec![
            self.label.clone(),
            fmt_opt(self.ar_standard, precision),
            fmt_num(self.ar_corrected, precision),
            fmt_opt(self.or_plugin, precision),
            fmt_num(self.or_jewell, precision),
        ]
    }
}

pub fn render_estimates(rows: &[ReportRow], format: OutputFormat, precision: usize) -> String {
    match format {
        OutputFormat::Table => {
            let body: Vec<Vec<String>> = rows.iter().map(|r| r.cells(precision)).collect();
            let mut out = render_aligned(
                &["stratum", "AR(standard)", "AR(corrected)", "OR(plug-in)", "OR(corrected)"],
                &body,
            );
            out.push_str(
                "\nPer-stratum point estimates only; pooled or adjusted estimates \
                 (e.g. Whittemore 1982) are not computed.\n",
            );
            out
        }
        OutputFormat::Csv => {
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    let mut cells = r.cells(precision);
                    cells.push(r.warnings.join("; "));
                    cells
                })
                .collect();
            let header: Vec<&str> = ESTIMATE_CSV_HEADER.split(',').collect();
            render_csv(&header, &body)
        }
    }
}

fn parse_value(field: &str, line: usize) -> Result<Option<f64>> {
    if field == UNDEFINED {
        return Ok(None);
    }
    field.parse().map(Some).map_err(|_| CliError::Parse {
        line,
        message: format!("not a number: '{field}'"),
    })
}

fn required(value: Option<f64>, column: &str, line: usize) -> Result<f64> {
    value.ok_or_else(|| CliError::Parse {
        line,
        message: format!("{column} cannot be {UNDEFINED}"),
    })
}

/// Reads back the output of [`render_estimates`] in CSV mode.
pub fn parse_estimates_csv(text: &str) -> Result<Vec<ReportRow>> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, h)) if h == ESTIMATE_CSV_HEADER => {}
        _ => {
            return Err(CliError::Parse {
                line: 1,
                message: format!("expected header '{ESTIMATE_CSV_HEADER}'"),
            })
        }
    }
    lines
        .filter(|(_, l)| !l.is_empty())
        .map(|(line, l)| {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 6 {
                return Err(CliError::Parse {
                    line,
                    message: format!("expected 6 fields, found {}", f.len()),
                });
            }
            Ok(ReportRow {
                label: f[0].to_string(),
                ar_standard: parse_value(f[1], line)?,
                ar_corrected: required(parse_value(f[2], line)?, "ar_corrected", line)?,
                or_plugin: parse_value(f[3], line)?,
                or_jewell: required(parse_value(f[4], line)?, "or_jewell", line)?,
                warnings: if f[5].is_empty() {
                    Vec::new()
                } else {
                    f[5].split("; ").map(str::to_string).collect()
                },
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_half_away_and_drop_negative_zero() {
        assert_eq!(fmt_num(-0.00001, 4), "0.0000");
        assert_eq!(fmt_num(-0.2571428, 4), "-0.2571");
        assert_eq!(fmt_num(0.125, 2), "0.13");
        assert_eq!(fmt_num(-0.125, 2), "-0.13");
        assert_eq!(fmt_opt(None, 4), "NA");
    }

    #[test]
    fn aligned_columns() {
        let out = render_aligned(&["a", "bb"], &[vec!["xyz".into(), "1".into()]]);
        assert_eq!(out, "a    bb\nxyz   1\n");
    }

    #[test]
    fn csv_parse_rejects_garbage() {
        assert!(parse_estimates_csv("nope\n").is_err());
        let bad = format!("{ESTIMATE_CSV_HEADER}\ns,1,NA,1,1,\n");
        assert!(parse_estimates_csv(&bad).is_err());
    }
}
