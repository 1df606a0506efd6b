use std::io::{self, Write};
use std::path::Path;

use super::{Dataset, DatasetError};
use crate::atomic::write_atomically;

pub const FEATURE_COLUMNS: usize = 256;
const TOTAL_COLUMNS: usize = FEATURE_COLUMNS + 2;

fn header_line() -> String {
    let mut s = String::from("id,label");
    for op in 0..FEATURE_COLUMNS {
        s.push_str(&format!(",op_{op:02x}"));
    }
    s
}

fn column_name(i: usize) -> String {
    match i {
        0 => "id".into(),
        1 => "label".into(),
        _ => format!("op_{:02x}", i - 2),
    }
}

fn write_rows<'a>(
    w: &mut dyn Write,
    rows: impl Iterator<Item = (&'a str, Option<u8>, &'a [f64])>,
) -> io::Result<()> {
    writeln!(w, "{}", header_line())?;
    for (id, label, x) in rows {
        if id.contains([',', '"', '\n', '\r']) {
            return Err(io::Error::new(
                io::ErrorKind::InvalidInput,
                format!("id {id:?} contains a CSV delimiter or quote"),
            ));
        }
        write!(w, "{id},")?;
        if let Some(y) = label {
            write!(w, "{y}")?;
        }
        for v in x {
            write!(w, ",{v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `id,label,op_00..op_ff`; every value uses its shortest exact
/// decimal form, so reading back reproduces the dataset bit for bit.
pub fn write_dataset(ds: &Dataset, path: &Path) -> Result<(), DatasetError> {
    if !ds.is_empty() && ds.n_features() != FEATURE_COLUMNS {
        return Err(DatasetError::WrongWidth(ds.n_features()));
    }
    let rows = ds
        .ids()
        .iter()
        .zip(ds.labels())
        .zip(ds.features())
        .map(|((id, &y), x)| (id.as_str(), Some(y), x.as_slice()));
    write_atomically(path, |w| write_rows(w, rows)).map_err(io_err(path))
}

/// Writes unlabeled feature rows; the label column is left empty.
pub fn write_features(ids: &[String], rows: &[Vec<f64>], path: &Path) -> Result<(), DatasetError> {
    if let Some(bad) = rows.iter().find(|r| r.len() != FEATURE_COLUMNS) {
        return Err(DatasetError::WrongWidth(bad.len()));
    }
    let it = ids
        .iter()
        .zip(rows)
        .map(|(id, x)| (id.as_str(), None, x.as_slice()));
    write_atomically(path, |w| write_rows(w, it)).map_err(io_err(path))
}

struct RawRow {
    line: u64,
    id: String,
    label: String,
    features: Vec<f64>,
}

fn read_rows(path: &Path) -> Result<Vec<RawRow>, DatasetError> {
    let csv_err = |source| DatasetError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let file = std::fs::File::open(path).map_err(io_err(path))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(io::BufReader::new(file));

    let mut records = reader.records();
    let header = match records.next() {
        Some(r) => r.map_err(csv_err)?,
        None => {
            return Err(DatasetError::BadHeader {
                path: path.to_path_buf(),
            })
        }
    };
    let expected = header_line();
    if header.len() != TOTAL_COLUMNS || header.iter().ne(expected.split(',')) {
        return Err(DatasetError::BadHeader {
            path: path.to_path_buf(),
        });
    }

    let mut rows = Vec::new();
    for record in records {
        let record = record.map_err(csv_err)?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != TOTAL_COLUMNS {
            return Err(DatasetError::MalformedRow {
                path: path.to_path_buf(),
                line,
                fields: record.len(),
            });
        }
        let mut features = Vec::with_capacity(FEATURE_COLUMNS);
        for (i, cell) in record.iter().enumerate().skip(2) {
            let v: f64 = cell.trim().parse().map_err(|_| DatasetError::BadCell {
                path: path.to_path_buf(),
                line,
                column: column_name(i),
                message: format!("non-numeric value {cell:?}"),
            })?;
            if !v.is_finite() || v < 0.0 {
                return Err(DatasetError::BadCell {
                    path: path.to_path_buf(),
                    line,
                    column: column_name(i),
                    message: format!("value {v} is not a finite non-negative number"),
                });
            }
            features.push(v);
        }
        rows.push(RawRow {
            line,
            id: record[0].to_string(),
            label: record[1].trim().to_string(),
            features,
        });
    }
    Ok(rows)
}

pub fn read_dataset(path: &Path) -> Result<Dataset, DatasetError> {
    let rows = read_rows(path)?;
    let mut ds = Dataset::default();
    for row in rows {
        let label = match row.label.as_str() {
            "0" => 0,
            "1" => 1,
            "" => {
                return Err(DatasetError::BadCell {
                    path: path.to_path_buf(),
                    line: row.line,
                    column: "label".into(),
                    message: "row is unlabeled".into(),
                })
            }
            other => {
                return Err(DatasetError::BadCell {
                    path: path.to_path_buf(),
                    line: row.line,
                    column: "label".into(),
                    message: format!("label {other:?} not in {{0, 1}}"),
                })
            }
        };
        ds.push_unchecked(row.id, row.features, label);
    }
    Ok(ds)
}

/// Reads ids and feature rows, ignoring whatever the label column holds.
pub fn read_features(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), DatasetError> {
    Ok(read_rows(path)?
        .into_iter()
        .map(|r| (r.id, r.features))
        .unzip())
}
