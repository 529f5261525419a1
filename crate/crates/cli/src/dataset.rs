//! Stratified count files.
//!
//! ```text
//! stratum,cases_exposed,controls_exposed,cases_unexposed,controls_unexposed
//! all,2,4,8,6
//! ```
//!
//! UTF-8, comma separated, LF or CRLF line endings, no quoting. Blank lines
//! are skipped.

use std::collections::HashSet;
use std::io::Read;

use attrisk::TwoByTwoTable;

use crate::error::{CliError, Result};

pub const HEADER: &str = "stratum,cases_exposed,controls_exposed,cases_unexposed,controls_unexposed";

#[derive(Debug, Clone, PartialEq)]
pub struct Stratum {
    pub label: String,
    pub table: TwoByTwoTable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StratifiedDataset {
    strata: Vec<Stratum>,
}

impl StratifiedDataset {
    pub fn new(strata: Vec<Stratum>) -> Result<Self> {
        if strata.is_empty() {
            return Err(CliError::Validation("dataset has no strata".into()));
        }
        let mut seen = HashSet::new();
        for s in &strata {
            if s.label.is_empty() {
                return Err(CliError::Validation("empty stratum label".into()));
            }
            if !seen.insert(s.label.as_str()) {
                return Err(CliError::Validation(format!(
                    "duplicate stratum label '{}'",
                    s.label
                )));
            }
        }
        Ok(Self { strata })
    }

    pub fn strata(&self) -> &[Stratum] {
        &self.strata
    }
}

fn parse_count(field: &str, column: &str, line: usize) -> Result<u64> {
    let field = field.trim();
    if field.starts_with('-') {
        return Err(CliError::Parse {
            line,
            message: format!("{column} must be non-negative, got {field}"),
        });
    }
    field.parse().map_err(|_| CliError::Parse {
        line,
        message: format!("{column} is not a non-negative integer: '{field}'"),
    })
}

pub fn parse_dataset<R: Read>(mut input: R) -> Result<StratifiedDataset> {
    let mut text = String::new();
    input.read_to_string(&mut text).map_err(|e| {
        if e.kind() == std::io::ErrorKind::InvalidData {
            CliError::Parse {
                line: 0,
                message: "input is not valid UTF-8".into(),
            }
        } else {
            CliError::Io(e)
        }
    })?;

    let mut lines = text
        .split('\n')
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty());

    match lines.next() {
        Some((_, header)) if header.trim() == HEADER => {}
        Some((line, header)) => {
            return Err(CliError::Parse {
                line,
                message: format!("expected header '{HEADER}', got '{header}'"),
            })
        }
        None => {
            return Err(CliError::Parse {
                line: 1,
                message: "empty input".into(),
            })
        }
    }

    let columns = [
        "cases_exposed",
        "controls_exposed",
        "cases_unexposed",
        "controls_unexposed",
    ];
    let mut strata: Vec<Stratum> = Vec::new();
    for (line, row) in lines {
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != 5 {
            return Err(CliError::Parse {
                line,
                message: format!("expected 5 fields, found {}", fields.len()),
            });
        }
        let label = fields[0].trim().to_string();
        if label.is_empty() {
            return Err(CliError::Parse {
                line,
                message: "empty stratum label".into(),
            });
        }
        if strata.iter().any(|s| s.label == label) {
            return Err(CliError::Parse {
                line,
                message: format!("duplicate stratum label '{label}'"),
            });
        }
        let mut counts = [0u64; 4];
        for (slot, (field, column)) in counts.iter_mut().zip(fields[1..].iter().zip(columns)) {
            *slot = parse_count(field, column, line)?;
        }
        let [a, b, c, d] = counts;
        let table = TwoByTwoTable::new(a, b, c, d).map_err(|e| CliError::Parse {
            line,
            message: e.to_string(),
        })?;
        strata.push(Stratum { label, table });
    }
    StratifiedDataset::new(strata)
}
