//! Text formats for matrices, datasets and lattices.
//!
//! Matrices are either a JSON array of arrays of scalar strings (JSON
//! integers are accepted too) or plain text with one row per line and
//! whitespace-separated scalars; blank lines and `#` comments are skipped.
//! A lattice file is a matrix whose columns generate the lattice, or the
//! object `{"p": 2, "hnf": [[…]]}` written by [`lattice_to_json`].

use serde_json::Value;

use crate::error::{Error, Result};
use crate::field::{FieldConfig, Scalar};
use crate::lattice::{hnf, Lattice};
use crate::matrix::MatrixK;

/// 1-based line and column of a byte offset.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before
        .rfind('\n')
        .map_or(before.len(), |nl| before.len() - nl - 1)
        + 1;
    (line, column)
}

fn is_json(text: &str) -> bool {
    matches!(text.trim_start().chars().next(), Some('[') | Some('{'))
}

fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.column(), e.to_string()))
}

/// Locates a scalar token in the source for error reporting.
fn locate(text: &str, token: &str) -> (usize, usize) {
    let quoted = format!("\"{token}\"");
    match text.find(&quoted) {
        Some(i) => line_col(text, i + 1),
        None => text.find(token).map_or((1, 1), |i| line_col(text, i)),
    }
}

fn scalar_from_json(text: &str, value: &Value) -> Result<Scalar> {
    let token = match value {
        Value::String(s) => s.trim().to_string(),
        Value::Number(n) if n.is_i64() || n.is_u64() => n.to_string(),
        other => {
            let shown = other.to_string();
            let (line, column) = locate(text, &shown);
            return Err(Error::parse(
                line,
                column,
                format!("expected an integer or \"a/b\" string, found {shown}"),
            ));
        }
    };
    token.parse().map_err(|e: crate::field::ScalarParseError| {
        let (line, column) = locate(text, &token);
        Error::parse(
            line,
            column + e.position,
            format!("bad scalar {token:?}: {}", e.message),
        )
    })
}

fn rows_from_json(text: &str, value: &Value) -> Result<Vec<Vec<Scalar>>> {
    let Value::Array(rows) = value else {
        return Err(Error::parse(1, 1, "expected an array of rows"));
    };
    rows.iter()
        .map(|row| match row {
            Value::Array(cells) => cells.iter().map(|c| scalar_from_json(text, c)).collect(),
            other => {
                let (line, column) = locate(text, &other.to_string());
                Err(Error::parse(line, column, "expected a row array"))
            }
        })
        .collect()
}

fn rows_from_plain(text: &str) -> Result<Vec<Vec<Scalar>>> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let mut row = Vec::new();
        let mut offset = 0;
        for token in content.split(|c: char| c.is_whitespace() || c == ',') {
            let start = offset;
            offset += token.len() + 1;
            if token.is_empty() {
                continue;
            }
            let x: Scalar = token.parse().map_err(|e: crate::field::ScalarParseError| {
                Error::parse(
                    lineno + 1,
                    start + e.position + 1,
                    format!("bad scalar {token:?}: {}", e.message),
                )
            })?;
            row.push(x);
        }
        rows.push(row);
    }
    Ok(rows)
}

fn check_rectangular(rows: &[Vec<Scalar>]) -> Result<()> {
    if let Some(first) = rows.first() {
        for (i, r) in rows.iter().enumerate() {
            if r.len() != first.len() {
                return Err(Error::parse(
                    i + 1,
                    1,
                    format!(
                        "row {} has {} entries, expected {}",
                        i + 1,
                        r.len(),
                        first.len()
                    ),
                ));
            }
        }
    }
    if rows.is_empty() || rows[0].is_empty() {
        return Err(Error::parse(1, 1, "empty matrix"));
    }
    Ok(())
}

/// Parses a matrix in either format.
pub fn parse_matrix(text: &str) -> Result<MatrixK> {
    let rows = if is_json(text) {
        rows_from_json(text, &parse_json(text)?)?
    } else {
        rows_from_plain(text)?
    };
    check_rectangular(&rows)?;
    MatrixK::from_rows(rows)
}

/// Parses a dataset: a list of vectors (JSON, or one vector per line).
pub fn parse_dataset(text: &str) -> Result<Vec<Vec<Scalar>>> {
    let rows = if is_json(text) {
        rows_from_json(text, &parse_json(text)?)?
    } else {
        rows_from_plain(text)?
    };
    check_rectangular(&rows)?;
    Ok(rows)
}

/// Parses a lattice file. `default_p` is used when the file does not carry
/// its own prime; a prime stored in the file must agree with it if both
/// are given.
pub fn parse_lattice(text: &str, default_p: Option<u64>) -> Result<Lattice> {
    let (p, matrix) = if is_json(text) {
        let value = parse_json(text)?;
        match &value {
            Value::Object(map) => {
                let p = map.get("p").and_then(Value::as_u64);
                let gens = ["hnf", "generators", "matrix"]
                    .iter()
                    .find_map(|k| map.get(*k))
                    .ok_or_else(|| {
                        Error::parse(
                            1,
                            1,
                            "lattice object needs an \"hnf\" or \"generators\" matrix",
                        )
                    })?;
                let rows = rows_from_json(text, gens)?;
                check_rectangular(&rows)?;
                (p, MatrixK::from_rows(rows)?)
            }
            _ => {
                let rows = rows_from_json(text, &value)?;
                check_rectangular(&rows)?;
                (None, MatrixK::from_rows(rows)?)
            }
        }
    } else {
        (None, parse_matrix(text)?)
    };
    let p = match (p, default_p) {
        (Some(a), Some(b)) if a != b => return Err(Error::PrimeMismatch(a, b)),
        (Some(a), _) => a,
        (None, Some(b)) => b,
        (None, None) => return Err(Error::parse(1, 1, "no prime given for the lattice")),
    };
    let field = FieldConfig::new(p)?;
    Ok(hnf(&field, &matrix))
}

/// `{"p": …, "hnf": [[…]]}`.
pub fn lattice_to_json(lattice: &Lattice) -> Value {
    serde_json::to_value(lattice).expect("lattices serialize")
}

/// Plain text: one row per line.
pub fn matrix_to_text(m: &MatrixK) -> String {
    let mut s = m.to_string();
    s.push('\n');
    s
}
