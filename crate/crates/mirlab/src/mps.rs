//! MPS reader for fixed and free format files.
//!
//! Both layouts tokenize identically on whitespace, so one parser covers
//! the scope needed here: NAME, ROWS (N/L/G/E), COLUMNS with
//! INTORG/INTEND markers, RHS, BOUNDS (UP, LO 0, FX, BV, PL), ENDATA.
//! RANGES sections and variables that are unbounded below (MI, FR) are
//! rejected, as are nonzero lower bounds. FX bounds become an upper bound
//! plus an explicit `>=` row so the zero-lower-bound standard form stays
//! intact. The objective sense is minimization.

use std::collections::HashMap;
use std::path::Path;

use thiserror::Error;

use crate::model::{GeneralMip, Sense};

#[derive(Debug, Error)]
pub enum MpsError {
    #[error("line {line}: {msg}")]
    ParseError { line: usize, msg: String },
    #[error("line {line}: unsupported feature: {msg}")]
    UnsupportedFeature { line: usize, msg: String },
    #[error("io error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn parse_err(line: usize, msg: impl Into<String>) -> MpsError {
    MpsError::ParseError { line, msg: msg.into() }
}

fn unsupported(line: usize, msg: impl Into<String>) -> MpsError {
    MpsError::UnsupportedFeature { line, msg: msg.into() }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Preamble,
    Rows,
    Columns,
    Rhs,
    Bounds,
}

struct VarBuild {
    name: String,
    cost: f64,
    integer: bool,
    upper: Option<f64>,
    fixed_at: Option<f64>,
}

struct RowBuild {
    name: String,
    sense: Sense,
    coeffs: Vec<(usize, f64)>,
    rhs: f64,
}

/// Parses MPS text into a general-form MIP.
pub fn parse_mps_str(text: &str, default_name: &str) -> Result<GeneralMip, MpsError> {
    let mut name = default_name.to_string();
    let mut section = Section::Preamble;
    let mut objective_row: Option<String> = None;
    let mut rows: Vec<RowBuild> = Vec::new();
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut vars: Vec<VarBuild> = Vec::new();
    let mut var_index: HashMap<String, usize> = HashMap::new();
    let mut integer_mode = false;

    for (line_no, raw) in text.lines().enumerate() {
        let line_no = line_no + 1;
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        let indented = raw.starts_with(' ') || raw.starts_with('\t');
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }

        if !indented {
            match fields[0].to_ascii_uppercase().as_str() {
                "NAME" => {
                    if let Some(n) = fields.get(1) {
                        name = n.to_string();
                    }
                    continue;
                }
                "ROWS" => {
                    section = Section::Rows;
                    continue;
                }
                "COLUMNS" => {
                    section = Section::Columns;
                    continue;
                }
                "RHS" => {
                    section = Section::Rhs;
                    continue;
                }
                "RANGES" => {
                    return Err(unsupported(line_no, "RANGES section"));
                }
                "BOUNDS" => {
                    section = Section::Bounds;
                    continue;
                }
                "ENDATA" => break,
                other => {
                    return Err(unsupported(line_no, format!("section {other}")));
                }
            }
        }

        match section {
            Section::Preamble => {
                return Err(parse_err(line_no, "data before any section header"));
            }
            Section::Rows => {
                if fields.len() != 2 {
                    return Err(parse_err(line_no, "expected '<type> <row>'"));
                }
                let row_name = fields[1].to_string();
                match fields[0].to_ascii_uppercase().as_str() {
                    "N" => {
                        if objective_row.is_some() {
                            return Err(unsupported(line_no, "multiple objective rows"));
                        }
                        objective_row = Some(row_name);
                    }
                    kind @ ("L" | "G" | "E") => {
                        let sense = match kind {
                            "L" => Sense::Le,
                            "G" => Sense::Ge,
                            _ => Sense::Eq,
                        };
                        if row_index.contains_key(&row_name) {
                            return Err(parse_err(line_no, format!("duplicate row {row_name}")));
                        }
                        row_index.insert(row_name.clone(), rows.len());
                        rows.push(RowBuild {
                            name: row_name,
                            sense,
                            coeffs: Vec::new(),
                            rhs: 0.0,
                        });
                    }
                    other => {
                        return Err(parse_err(line_no, format!("unknown row type {other}")));
                    }
                }
            }
            Section::Columns => {
                // marker lines toggle integrality
                if fields.len() >= 3 && fields[1].trim_matches('\'') == "MARKER" {
                    let marker = fields.last().unwrap().trim_matches('\'');
                    match marker {
                        "INTORG" => integer_mode = true,
                        "INTEND" => integer_mode = false,
                        other => {
                            return Err(parse_err(line_no, format!("unknown marker {other}")));
                        }
                    }
                    continue;
                }
                if fields.len() < 3 || fields.len() % 2 == 0 {
                    return Err(parse_err(line_no, "expected '<col> (<row> <value>)+'"));
                }
                let col_name = fields[0];
                let col = *var_index.entry(col_name.to_string()).or_insert_with(|| {
                    vars.push(VarBuild {
                        name: col_name.to_string(),
                        cost: 0.0,
                        integer: integer_mode,
                        upper: None,
                        fixed_at: None,
                    });
                    vars.len() - 1
                });
                for pair in fields[1..].chunks(2) {
                    let value: f64 = pair[1]
                        .parse()
                        .map_err(|_| parse_err(line_no, format!("bad number {}", pair[1])))?;
                    if Some(pair[0]) == objective_row.as_deref() {
                        vars[col].cost += value;
                    } else if let Some(&row) = row_index.get(pair[0]) {
                        rows[row].coeffs.push((col, value));
                    } else {
                        return Err(parse_err(line_no, format!("unknown row {}", pair[0])));
                    }
                }
            }
            Section::Rhs => {
                if fields.len() < 3 || fields.len() % 2 == 0 {
                    return Err(parse_err(line_no, "expected '<set> (<row> <value>)+'"));
                }
                for pair in fields[1..].chunks(2) {
                    let value: f64 = pair[1]
                        .parse()
                        .map_err(|_| parse_err(line_no, format!("bad number {}", pair[1])))?;
                    if Some(pair[0]) == objective_row.as_deref() {
                        return Err(unsupported(line_no, "objective rhs constant"));
                    }
                    let &row = row_index
                        .get(pair[0])
                        .ok_or_else(|| parse_err(line_no, format!("unknown row {}", pair[0])))?;
                    rows[row].rhs = value;
                }
            }
            Section::Bounds => {
                if fields.len() < 3 {
                    return Err(parse_err(line_no, "expected '<type> <set> <col> [<value>]'"));
                }
                let kind = fields[0].to_ascii_uppercase();
                let col_name = fields[2];
                let &col = var_index
                    .get(col_name)
                    .ok_or_else(|| parse_err(line_no, format!("unknown column {col_name}")))?;
                let value = || -> Result<f64, MpsError> {
                    fields
                        .get(3)
                        .ok_or_else(|| parse_err(line_no, "missing bound value"))?
                        .parse()
                        .map_err(|_| parse_err(line_no, format!("bad number {}", fields[3])))
                };
                match kind.as_str() {
                    "UP" => {
                        let ub = value()?;
                        if ub < 0.0 {
                            return Err(unsupported(
                                line_no,
                                format!("negative upper bound on {col_name}"),
                            ));
                        }
                        vars[col].upper = Some(ub);
                    }
                    "LO" => {
                        let lb = value()?;
                        if lb != 0.0 {
                            return Err(unsupported(
                                line_no,
                                format!("nonzero lower bound {lb} on {col_name}"),
                            ));
                        }
                    }
                    "FX" => {
                        let v = value()?;
                        if v < 0.0 {
                            return Err(unsupported(
                                line_no,
                                format!("negative fixing on {col_name}"),
                            ));
                        }
                        vars[col].upper = Some(v);
                        vars[col].fixed_at = Some(v);
                    }
                    "BV" => {
                        vars[col].integer = true;
                        vars[col].upper = Some(1.0);
                    }
                    "PL" => {}
                    "MI" | "FR" => {
                        return Err(unsupported(
                            line_no,
                            format!("variable {col_name} unbounded below"),
                        ));
                    }
                    other => {
                        return Err(unsupported(line_no, format!("bound type {other}")));
                    }
                }
            }
        }
    }

    if objective_row.is_none() {
        return Err(parse_err(0, "no objective (N) row"));
    }

    let mut gen = GeneralMip::new(name);
    for var in &vars {
        gen.add_var(var.name.clone(), var.cost, var.integer, var.upper);
    }
    for row in rows {
        gen.add_row(row.name, row.coeffs, row.sense, row.rhs);
    }
    // fixings keep the zero lower bound by pairing the upper bound with a
    // >= row at the same value
    for (idx, var) in vars.iter().enumerate() {
        if let Some(v) = var.fixed_at {
            gen.add_row(format!("FX_{}", var.name), vec![(idx, 1.0)], Sense::Ge, v);
        }
    }
    Ok(gen)
}

/// Reads and parses an MPS file.
pub fn parse_mps(path: impl AsRef<Path>) -> Result<GeneralMip, MpsError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| MpsError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let default_name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("unnamed");
    parse_mps_str(&text, default_name)
}
