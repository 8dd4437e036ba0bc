//! Dense matrices over the rationals.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::field::{FieldConfig, Scalar, ValInt};

/// Row-major `rows × cols` matrix of exact scalars.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MatrixK {
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl MatrixK {
    pub fn new(rows: usize, cols: usize, data: Vec<Scalar>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(MatrixK { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        MatrixK {
            rows,
            cols,
            data: vec![Scalar::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = MatrixK::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Scalar::one();
        }
        m
    }

    pub fn diagonal(entries: &[Scalar]) -> Self {
        let mut m = MatrixK::zeros(entries.len(), entries.len());
        for (i, x) in entries.iter().enumerate() {
            m[(i, i)] = x.clone();
        }
        m
    }

    /// `diag(p^{e_1}, …, p^{e_d})`.
    pub fn power_diagonal(field: &FieldConfig, exponents: &[i64]) -> Self {
        let entries: Vec<Scalar> = exponents.iter().map(|&e| field.pow(e)).collect();
        MatrixK::diagonal(&entries)
    }

    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: row.len(),
                });
            }
            data.extend(row);
        }
        Ok(MatrixK {
            rows: n,
            cols,
            data,
        })
    }

    /// Matrix whose columns are the given vectors of length `dim`.
    pub fn from_columns(dim: usize, columns: &[Vec<Scalar>]) -> Result<Self> {
        let mut m = MatrixK::zeros(dim, columns.len());
        for (j, col) in columns.iter().enumerate() {
            if col.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: col.len(),
                });
            }
            for (i, x) in col.iter().enumerate() {
                m[(i, j)] = x.clone();
            }
        }
        Ok(m)
    }

    /// Shorthand for small integer matrices in tests and examples.
    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let rows: Vec<Vec<Scalar>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Scalar::from(x)).collect())
            .collect();
        MatrixK::from_rows(rows).expect("rectangular input")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[Scalar] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Scalar> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn row_vecs(&self) -> Vec<Vec<Scalar>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn column_vecs(&self) -> Vec<Vec<Scalar>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn entries(&self) -> &[Scalar] {
        &self.data
    }

    pub fn transpose(&self) -> MatrixK {
        let mut t = MatrixK::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, rhs: &MatrixK) -> Result<MatrixK> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: rhs.rows,
            });
        }
        let mut out = MatrixK::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += &(a * b);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, x: &[Scalar]) -> Result<Vec<Scalar>> {
        if self.cols != x.len() {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: x.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| {
                let mut acc = Scalar::zero();
                for (a, b) in self.row(i).iter().zip(x) {
                    if !a.is_zero() && !b.is_zero() {
                        acc += &(a * b);
                    }
                }
                acc
            })
            .collect())
    }

    pub fn scale(&self, c: &Scalar) -> MatrixK {
        MatrixK {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * c).collect(),
        }
    }

    /// Columns of `self` followed by the columns of `rhs`.
    pub fn hcat(&self, rhs: &MatrixK) -> Result<MatrixK> {
        if self.rows != rhs.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: rhs.rows,
            });
        }
        let cols = self.cols + rhs.cols;
        let mut out = MatrixK::zeros(self.rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self[(i, j)].clone();
            }
            for j in 0..rhs.cols {
                out[(i, self.cols + j)] = rhs[(i, j)].clone();
            }
        }
        Ok(out)
    }

    /// Rows reordered so that row `i` of the result is row `order[i]` of `self`.
    pub fn permute_rows(&self, order: &[usize]) -> MatrixK {
        let mut out = MatrixK::zeros(order.len(), self.cols);
        for (i, &src) in order.iter().enumerate() {
            for j in 0..self.cols {
                out[(i, j)] = self[(src, j)].clone();
            }
        }
        out
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> MatrixK {
        let mut out = MatrixK::zeros(rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                out[(a, b)] = self[(i, j)].clone();
            }
        }
        out
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// `col[dst] += c · col[src]`.
    pub fn add_col_multiple(&mut self, dst: usize, src: usize, c: &Scalar) {
        if c.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let s = &self[(i, src)];
            if !s.is_zero() {
                let delta = s * c;
                self[(i, dst)] += &delta;
            }
        }
    }

    /// `row[dst] += c · row[src]`.
    pub fn add_row_multiple(&mut self, dst: usize, src: usize, c: &Scalar) {
        if c.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let s = &self[(src, j)];
            if !s.is_zero() {
                let delta = s * c;
                self[(dst, j)] += &delta;
            }
        }
    }

    pub fn scale_col(&mut self, j: usize, c: &Scalar) {
        for i in 0..self.rows {
            let v = &self[(i, j)] * c;
            self[(i, j)] = v;
        }
    }

    pub fn scale_row(&mut self, i: usize, c: &Scalar) {
        for j in 0..self.cols {
            let v = &self[(i, j)] * c;
            self[(i, j)] = v;
        }
    }

    /// Drops every column from `keep` onwards.
    pub fn truncate_cols(&self, keep: usize) -> MatrixK {
        let cols: Vec<usize> = (0..keep).collect();
        let rows: Vec<usize> = (0..self.rows).collect();
        self.submatrix(&rows, &cols)
    }

    /// Rank over the rationals.
    pub fn rank(&self) -> usize {
        let mut w = self.clone();
        let mut rank = 0;
        for col in 0..w.cols {
            let Some(pivot) = (rank..w.rows).find(|&r| !w[(r, col)].is_zero()) else {
                continue;
            };
            w.swap_rows(rank, pivot);
            for r in rank + 1..w.rows {
                if w[(r, col)].is_zero() {
                    continue;
                }
                let factor = -(w[(r, col)].checked_div(&w[(rank, col)]).expect("pivot"));
                w.add_row_multiple(r, rank, &factor);
            }
            rank += 1;
        }
        rank
    }

    pub fn det(&self) -> Result<Scalar> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: self.cols,
            });
        }
        let n = self.rows;
        let mut w = self.clone();
        let mut det = Scalar::one();
        for col in 0..n {
            let Some(pivot) = (col..n).find(|&r| !w[(r, col)].is_zero()) else {
                return Ok(Scalar::zero());
            };
            if pivot != col {
                w.swap_rows(col, pivot);
                det = -det;
            }
            det = &det * &w[(col, col)];
            for r in col + 1..n {
                if w[(r, col)].is_zero() {
                    continue;
                }
                let factor = -(w[(r, col)].checked_div(&w[(col, col)])?);
                w.add_row_multiple(r, col, &factor);
            }
        }
        Ok(det)
    }

    /// Exact inverse by Gauss-Jordan elimination.
    pub fn inverse(&self) -> Result<MatrixK> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: self.cols,
            });
        }
        let n = self.rows;
        let mut w = self.clone();
        let mut inv = MatrixK::identity(n);
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| !w[(r, col)].is_zero())
                .ok_or(Error::DependentInput)?;
            w.swap_rows(col, pivot);
            inv.swap_rows(col, pivot);
            let scale = w[(col, col)].inv()?;
            w.scale_row(col, &scale);
            inv.scale_row(col, &scale);
            for r in 0..n {
                if r == col || w[(r, col)].is_zero() {
                    continue;
                }
                let factor = -w[(r, col)].clone();
                w.add_row_multiple(r, col, &factor);
                inv.add_row_multiple(r, col, &factor);
            }
        }
        Ok(inv)
    }

    /// Minimum valuation over all entries.
    pub fn min_val(&self, field: &FieldConfig) -> ValInt {
        field.min_val(&self.data)
    }

    /// True when every entry lies in `O_K`.
    pub fn is_integral(&self, field: &FieldConfig) -> bool {
        self.min_val(field) >= ValInt::Finite(0)
    }

    pub fn is_lower_triangular(&self) -> bool {
        (0..self.rows).all(|i| (i + 1..self.cols).all(|j| self[(i, j)].is_zero()))
    }

    /// Row strings, used as stable identities and in text output.
    pub fn to_string_rows(&self) -> Vec<Vec<String>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.to_string()).collect())
            .collect()
    }

    /// Compact single-line form `[[a,b],[c,d]]`.
    pub fn to_compact_string(&self) -> String {
        let rows: Vec<String> = self
            .to_string_rows()
            .into_iter()
            .map(|r| format!("[{}]", r.join(",")))
            .collect();
        format!("[{}]", rows.join(","))
    }
}

impl Index<(usize, usize)> for MatrixK {
    type Output = Scalar;

    fn index(&self, (i, j): (usize, usize)) -> &Scalar {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for MatrixK {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Scalar {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Display for MatrixK {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows = self.to_string_rows();
        let width = rows.iter().flatten().map(|s| s.len()).max().unwrap_or(1);
        for (i, row) in rows.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            let cells: Vec<String> = row.iter().map(|s| format!("{s:>width$}")).collect();
            write!(f, "{}", cells.join(" "))?;
        }
        Ok(())
    }
}

impl Serialize for MatrixK {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_string_rows().serialize(s)
    }
}
