//! Plain-text matrix formats: sparse `row,col,value` triplets and dense CSV.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub const TRIPLET_HEADER: &str = "row,col,value";

/// Nonzero entries as `row,col,value` lines, row-major order.
pub fn write_triplets(m: &DMatrix<f64>) -> String {
    let mut out = format!("{TRIPLET_HEADER}\n");
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let v = m[(i, j)];
            if v != 0.0 {
                let _ = writeln!(out, "{i},{j},{v}");
            }
        }
    }
    out
}

pub fn read_triplets(text: &str, nrows: usize, ncols: usize) -> Result<DMatrix<f64>> {
    let mut m = DMatrix::zeros(nrows, ncols);
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() || (idx == 0 && line.trim() == TRIPLET_HEADER) {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(Error::parse(lineno, "expected `row,col,value`"));
        }
        let i: usize = fields[0]
            .parse()
            .map_err(|_| Error::parse(lineno, format!("bad row `{}`", fields[0])))?;
        let j: usize = fields[1]
            .parse()
            .map_err(|_| Error::parse(lineno, format!("bad column `{}`", fields[1])))?;
        let v: f64 = fields[2]
            .parse()
            .map_err(|_| Error::parse(lineno, format!("bad value `{}`", fields[2])))?;
        if i >= nrows || j >= ncols {
            return Err(Error::parse(
                lineno,
                format!("entry ({i},{j}) outside {nrows}x{ncols}"),
            ));
        }
        m[(i, j)] = v;
    }
    Ok(m)
}

/// Dense CSV, one matrix row per line, no header.
pub fn write_dense(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", m[(i, j)]);
        }
        out.push('\n');
    }
    out
}

pub fn read_dense(text: &str) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::parse(idx + 1, format!("bad value `{f}`")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::parse(idx + 1, "ragged row"));
            }
        }
        rows.push(row);
    }
    let ncols = rows.first().map_or(0, Vec::len);
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_skip_zeros_and_round_trip() {
        let m = DMatrix::from_row_slice(2, 3, &[0.0, 1.5, 0.0, -2.25, 0.0, 1e-17]);
        let text = write_triplets(&m);
        assert_eq!(text.lines().count(), 4);
        assert_eq!(read_triplets(&text, 2, 3).unwrap(), m);
    }

    #[test]
    fn triplet_out_of_range() {
        assert!(read_triplets("row,col,value\n5,0,1\n", 2, 2).is_err());
    }

    #[test]
    fn dense_round_trip() {
        let m = DMatrix::from_fn(3, 4, |i, j| (i as f64 - j as f64) / 7.0);
        assert_eq!(read_dense(&write_dense(&m)).unwrap(), m);
    }
}
