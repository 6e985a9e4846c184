//! CSV reading and writing for datasets, matrices and result tables.
//!
//! Output files start with `#`-prefixed provenance lines; readers skip them.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::types::Dataset;

/// Reads a dataset whose first column is the response and the remaining
/// columns are covariates. Blank lines and lines starting with `#` are
/// skipped. Errors name the 1-based line of the file.
pub fn read_dataset_csv(path: &Path, has_header: bool) -> Result<Dataset> {
    let text = read_text(path)?;
    parse_dataset(&text, has_header)
}

/// `fs::read_to_string` with the path in the error message.
pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

pub fn parse_dataset(text: &str, has_header: bool) -> Result<Dataset> {
    let mut width: Option<usize> = None;
    let mut header_seen = !has_header;
    let mut y = Vec::new();
    let mut x = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if !header_seen {
            header_seen = true;
            width = Some(fields.len());
            continue;
        }
        match width {
            None => width = Some(fields.len()),
            Some(w) if w != fields.len() => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected {w} fields, found {}", fields.len()),
                })
            }
            _ => {}
        }
        if fields.len() < 2 {
            return Err(Error::Parse {
                line: line_no,
                message: "need a response column and at least one covariate".into(),
            });
        }
        for (col, f) in fields.iter().enumerate() {
            let v: f64 = f.parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("column {}: '{f}' is not a number", col + 1),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("column {}: value is not finite", col + 1),
                });
            }
            if col == 0 {
                y.push(v);
            } else {
                x.push(v);
            }
        }
    }
    let n = y.len();
    if n == 0 {
        return Err(Error::Parse {
            line: text.lines().count().max(1),
            message: "no data rows".into(),
        });
    }
    let p = x.len() / n;
    Dataset::from_rows(n, p, &x, y)
}

/// Writes `y` followed by the covariates, one row per observation.
pub fn write_dataset_csv(path: &Path, data: &Dataset, provenance: &[String]) -> Result<()> {
    let mut header = vec!["y".to_string()];
    header.extend((1..=data.p()).map(|j| format!("x{j}")));
    let mut t = Table::new(header);
    for i in 0..data.n() {
        let mut row = vec![fmt_f64(data.y()[i])];
        row.extend(data.x().row(i).iter().map(|v| fmt_f64(*v)));
        t.push(row);
    }
    t.write(path, provenance)
}

/// Header-less square matrix, the format read by
/// [`crate::datagen::load_covariance_csv`].
pub fn write_matrix_csv(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for row in m.row_iter() {
        let line: Vec<String> = row.iter().map(|v| fmt_f64(*v)).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    out.flush()?;
    Ok(())
}

/// Shortest representation that parses back to the same value.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), fmt_f64)
}

/// An in-memory table written as CSV with provenance comment lines.
#[derive(Debug, Clone)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: Vec<S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path, provenance: &[String]) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        for line in provenance {
            if line.is_empty() {
                writeln!(out, "#")?;
            } else {
                writeln!(out, "# {line}")?;
            }
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        other => Error::InvalidArgument(format!("csv: {other:?}")),
    }
}

/// Reads a table written by [`Table::write`] as a header plus string rows.
pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(csv_err)?;
    let header = rdr
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(String::from)
        .collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        rows.push(rec.map_err(csv_err)?.iter().map(String::from).collect());
    }
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_and_without_header() {
        let d = parse_dataset("y,a,b\n1,2,3\n4,5,6\n", true).unwrap();
        assert_eq!((d.n(), d.p()), (2, 2));
        assert_eq!(d.x()[(1, 0)], 5.0);
        assert_eq!(d.y()[1], 4.0);
        let d = parse_dataset("# comment\n1,2\n\n3,4\n", false).unwrap();
        assert_eq!((d.n(), d.p()), (2, 1));
    }

    #[test]
    fn errors_name_the_line() {
        match parse_dataset("y,a\n1,2\n3,oops\n", true) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("oops"));
            }
            other => panic!("{other:?}"),
        }
        match parse_dataset("1,2\n3,4,5\n", false) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_dataset("1\n", false),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_dataset("1,inf\n", false),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn dataset_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let d = Dataset::from_rows(2, 2, &[0.1, -2.5, 1e-17, 3.0], vec![1.0 / 3.0, -7.0]).unwrap();
        write_dataset_csv(&path, &d, &["generated".into()]).unwrap();
        let back = read_dataset_csv(&path, true).unwrap();
        assert_eq!(back.x(), d.x());
        assert_eq!(back.y(), d.y());
    }
}
