//! Minimal RFC-4180-style CSV writing.
//!
//! Floats are serialized in scientific notation with 13 significant digits
//! ('.'-decimal), and no-data cells are written as empty fields so consumers
//! can tell "no statistics" from "probability zero".

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// One cell of an output table.
#[derive(Clone, Debug, PartialEq)]
pub enum CsvCell {
    Float(f64),
    Int(u64),
    Text(String),
    /// Serialized as an empty field.
    Empty,
}

impl From<f64> for CsvCell {
    fn from(v: f64) -> Self {
        CsvCell::Float(v)
    }
}

impl From<u64> for CsvCell {
    fn from(v: u64) -> Self {
        CsvCell::Int(v)
    }
}

impl From<Option<f64>> for CsvCell {
    fn from(v: Option<f64>) -> Self {
        match v {
            Some(x) => CsvCell::Float(x),
            None => CsvCell::Empty,
        }
    }
}

impl From<&str> for CsvCell {
    fn from(v: &str) -> Self {
        CsvCell::Text(v.to_string())
    }
}

/// A rectangular table with a header row. Header names carry unit
/// annotations, e.g. `separation_w0`, `energy_U0`, `probability`.
#[derive(Clone, Debug, Default)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<CsvCell>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        CsvTable {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<CsvCell>) {
        self.rows.push(row);
    }
}

/// 13 significant digits, scientific notation.
pub fn format_float(v: f64) -> String {
    format!("{v:.12e}")
}

fn quote_if_needed(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn render(table: &CsvTable, preamble: Option<&str>) -> Result<String> {
    let width = table.header.len();
    if width == 0 {
        return Err(Error::InvalidTable("header is empty".into()));
    }
    let mut out = String::new();
    if let Some(comment) = preamble {
        writeln!(out, "# {comment}").expect("string write");
    }
    writeln!(out, "{}", table.header.iter().map(|h| quote_if_needed(h)).collect::<Vec<_>>().join(",")).expect("string write");
    for (i, row) in table.rows.iter().enumerate() {
        if row.len() != width {
            return Err(Error::InvalidTable(format!(
                "row {i} has {} fields, expected {width}",
                row.len()
            )));
        }
        let mut fields = Vec::with_capacity(width);
        for cell in row {
            let field = match cell {
                CsvCell::Float(v) => {
                    if !v.is_finite() {
                        return Err(Error::InvalidTable(format!(
                            "row {i} contains a non-finite number"
                        )));
                    }
                    format_float(*v)
                }
                CsvCell::Int(v) => v.to_string(),
                CsvCell::Text(s) => quote_if_needed(s),
                CsvCell::Empty => String::new(),
            };
            fields.push(field);
        }
        writeln!(out, "{}", fields.join(",")).expect("string write");
    }
    Ok(out)
}

/// Write header plus rows to `path`.
pub fn write_csv(table: &CsvTable, path: &Path) -> Result<()> {
    let text = render(table, None)?;
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Like [`write_csv`] but with a leading `# ...` comment line; used by the
/// CLI to stamp every output file with the tool version and master seed.
pub fn write_csv_with_comment(comment: &str, table: &CsvTable, path: &Path) -> Result<()> {
    let text = render(table, Some(comment))?;
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_table_is_three_lines() {
        let mut table = CsvTable::new(&["a", "b"]);
        table.push_row(vec![1.0.into(), 2.0.into()]);
        table.push_row(vec![3.0.into(), 4.0.into()]);
        let text = render(&table, None).unwrap();
        assert_eq!(text.trim_end().lines().count(), 3);
    }

    #[test]
    fn no_data_serializes_as_empty_field() {
        let mut table = CsvTable::new(&["separation_w0", "probability"]);
        table.push_row(vec![0.5.into(), CsvCell::from(None)]);
        let text = render(&table, None).unwrap();
        let data_line = text.lines().nth(1).unwrap();
        assert!(data_line.ends_with(','), "line was {data_line:?}");
    }

    #[test]
    fn floats_round_trip_through_text() {
        let values = [
            1.0,
            -0.3333333333333333,
            2.718281828459045e-26,
            -9.939105225e-26,
            1.0e300,
            5.0e-324,
            0.0,
        ];
        for &v in &values {
            let text = format_float(v);
            let parsed: f64 = text.parse().unwrap();
            if v == 0.0 {
                assert_eq!(parsed, 0.0);
            } else {
                assert!(
                    ((parsed - v) / v).abs() < 1e-12,
                    "{v} -> {text} -> {parsed}"
                );
            }
        }
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let mut table = CsvTable::new(&["a", "b"]);
        table.push_row(vec![1.0.into()]);
        assert!(render(&table, None).is_err());
    }

    #[test]
    fn non_finite_numbers_are_rejected() {
        let mut table = CsvTable::new(&["a"]);
        table.push_row(vec![f64::NAN.into()]);
        assert!(render(&table, None).is_err());
    }

    #[test]
    fn comment_line_precedes_header() {
        let mut table = CsvTable::new(&["a"]);
        table.push_row(vec![1.0.into()]);
        let text = render(&table, Some("beamcross 0.1.0 seed=7")).unwrap();
        assert!(text.starts_with("# beamcross 0.1.0 seed=7\n"));
    }

    #[test]
    fn unwritable_path_names_the_path() {
        let table = CsvTable::new(&["a"]);
        let err = write_csv(&table, Path::new("/nonexistent-dir/x.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/x.csv"));
    }
}
