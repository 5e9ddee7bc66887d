//! Headerless CSV signals (row `i` = node `i`).

use crate::{linalg::ensure_finite, Error, Matrix, Result};

pub fn read_signal_csv(text: &str) -> Result<Matrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = record
            .iter()
            .map(|field| {
                field.parse::<f64>().map_err(|e| Error::Parse {
                    line: i + 1,
                    msg: format!("bad number `{field}`: {e}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("expected {} columns, found {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 1,
            msg: "empty signal file".to_string(),
        });
    }
    let m = crate::serde_matrix::from_rows(&rows).map_err(|msg| Error::Parse { line: 1, msg })?;
    ensure_finite(&m)?;
    Ok(m)
}

/// Writes with Rust's shortest round-trip float formatting.
pub fn write_signal_csv(m: &Matrix) -> String {
    let mut out = String::new();
    for r in m.row_iter() {
        let line: Vec<String> = r.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_round_trips() {
        let m = read_signal_csv("1.5, 2\n-3,4e-3\n").unwrap();
        assert_eq!(m, Matrix::from_row_slice(2, 2, &[1.5, 2.0, -3.0, 4e-3]));
        assert_eq!(read_signal_csv(&write_signal_csv(&m)).unwrap(), m);
    }

    #[test]
    fn rejects_non_finite_entries() {
        assert!(matches!(
            read_signal_csv("1,NaN\n"),
            Err(Error::NonFinite { row: 0, col: 1 })
        ));
        assert!(matches!(read_signal_csv("inf\n"), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn rejects_ragged_and_garbage() {
        assert!(read_signal_csv("1,2\n3\n").is_err());
        assert!(matches!(read_signal_csv("1,x\n"), Err(Error::Parse { line: 1, .. })));
        assert!(read_signal_csv("").is_err());
    }
}
