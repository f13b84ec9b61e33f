//! Plain CSV for matrices: one row per sample, `.` decimal separator, no
//! header unless requested (`c0,c1,...`). Values are written in Rust's
//! shortest round-trip form, so write → read is bit-exact.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::math::Matrix;

pub fn to_csv_string(m: &Matrix, header: bool) -> String {
    let mut out = String::with_capacity(m.rows() * m.cols() * 20);
    if header {
        let names: Vec<String> = (0..m.cols()).map(|j| format!("c{j}")).collect();
        out.push_str(&names.join(","));
        out.push('\n');
    }
    for i in 0..m.rows() {
        for (j, v) in m.row(i).iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            write!(out, "{v}").expect("writing to a String cannot fail");
        }
        out.push('\n');
    }
    out
}

/// Parses CSV text. A first line starting with a letter is taken as a header.
pub fn from_csv_str(text: &str, context: &str) -> Result<Matrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if lineno == 0 && line.starts_with(|c: char| c.is_ascii_alphabetic()) {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| {
                f.trim().parse::<f64>().map_err(|e| Error::Parse {
                    context: format!("{context}, line {}", lineno + 1),
                    reason: format!("{e} in field {f:?}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            context: context.to_string(),
            reason: "no data rows".into(),
        });
    }
    Matrix::from_rows(&rows)
}

pub fn write_csv(path: &Path, m: &Matrix, header: bool) -> Result<()> {
    std::fs::write(path, to_csv_string(m, header)).map_err(|e| Error::io(path, e))
}

pub fn read_csv(path: &Path) -> Result<Matrix> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_csv_str(&text, &path.display().to_string())
}
