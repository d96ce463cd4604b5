//! Plain-text matrix files and `key=value` sidecars.
//!
//! A matrix file is headerless CSV: one row per line, decimal floats, LF line
//! endings. Values are written with Rust's shortest round-trip formatting, so
//! reading a written file reproduces the matrix bit for bit.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use super::Matrix;
use crate::error::{Error, Result};

pub fn read_matrix(path: &Path) -> Result<Matrix> {
    let file = fs::File::open(path).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    parse_matrix(file).map_err(|message| Error::Parse {
        path: path.to_path_buf(),
        message,
    })
}

/// Parses headerless CSV; the error is a human-readable message.
pub fn parse_matrix<R: Read>(source: R) -> std::result::Result<Matrix, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| e.to_string())?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let row = record
            .iter()
            .enumerate()
            .map(|(col, field)| {
                field
                    .parse::<f64>()
                    .map_err(|_| format!("line {}, field {}: '{field}' is not a number", line + 1, col + 1))
            })
            .collect::<std::result::Result<Vec<f64>, String>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(format!(
                    "line {} has {} fields, expected {}",
                    line + 1,
                    row.len(),
                    first.len()
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err("no rows".to_string());
    }
    Matrix::from_rows(&rows).map_err(|e| e.to_string())
}

pub fn write_matrix<W: Write>(matrix: &Matrix, sink: W) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink);
    for i in 0..matrix.nrows() {
        writer
            .write_record((0..matrix.ncols()).map(|j| format!("{:?}", matrix[(i, j)])))
            .map_err(csv_to_io)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn save_matrix(matrix: &Matrix, path: &Path) -> Result<()> {
    let file = fs::File::create(path)?;
    write_matrix(matrix, std::io::BufWriter::new(file))
}

fn csv_to_io(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

/// Ordered `key=value` metadata, one pair per line.
pub type Metadata = BTreeMap<String, String>;

pub fn format_metadata(meta: &Metadata) -> String {
    meta.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}

/// Parses `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_metadata(text: &str) -> std::result::Result<Metadata, String> {
    let mut meta = Metadata::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key=value", n + 1))?;
        meta.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(meta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{sample_gaussian, RngSeed};
    use proptest::prelude::*;

    #[test]
    fn parses_plain_rows() {
        let m = parse_matrix("1, 2.5\n-3,4e-2\n".as_bytes()).unwrap();
        assert_eq!(m.shape(), (2, 2));
        assert_eq!(m[(1, 1)], 0.04);
    }

    #[test]
    fn rejects_ragged_and_garbage() {
        assert!(parse_matrix("1,2\n3\n".as_bytes()).unwrap_err().contains("line 2"));
        assert!(parse_matrix("1,x\n".as_bytes()).unwrap_err().contains("'x'"));
        assert!(parse_matrix("".as_bytes()).is_err());
        assert!(parse_matrix("nan\n".as_bytes()).is_err());
    }

    #[test]
    fn written_format_is_plain_csv() {
        let m = Matrix::from_row_slice(2, 2, &[0.9, 0.0, -1.1, 1e-20]).unwrap();
        let mut out = Vec::new();
        write_matrix(&m, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "0.9,0.0\n-1.1,1e-20\n");
    }

    #[test]
    fn metadata_round_trip() {
        let mut meta = Metadata::new();
        meta.insert("r".into(), "2".into());
        meta.insert("q".into(), "inf".into());
        assert_eq!(parse_metadata(&format_metadata(&meta)).unwrap(), meta);
        assert!(parse_metadata("novalue\n").is_err());
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_exact(rows in 1usize..6, cols in 1usize..6, seed in any::<u64>()) {
            let m = sample_gaussian(rows, cols, 3.0, RngSeed(seed)).unwrap();
            let mut out = Vec::new();
            write_matrix(&m, &mut out).unwrap();
            let back = parse_matrix(out.as_slice()).unwrap();
            prop_assert_eq!(back, m);
        }
    }
}
