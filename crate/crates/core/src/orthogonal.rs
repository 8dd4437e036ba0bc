//! Non-archimedean orthogonality and the Smith form (SVD) over `O_K`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{format_vector, AbsValue, FieldConfig, Scalar, ValInt};
use crate::fp;
use crate::matrix::MatrixK;

fn residues(field: &FieldConfig, x: &[Scalar]) -> Vec<u64> {
    x.iter()
        .map(|v| field.residue(v).expect("norm-1 vectors are integral"))
        .collect()
}

/// Rescales a nonzero vector to norm 1.
pub fn normalize(field: &FieldConfig, x: &[Scalar]) -> Result<Vec<Scalar>> {
    match field.min_val(x) {
        ValInt::Infinity => Err(Error::ZeroVector),
        ValInt::Finite(v) => {
            let c = field.pow(-v);
            Ok(x.iter().map(|e| e * &c).collect())
        }
    }
}

/// Norm-1 vectors are orthonormal iff their residues are independent over `F_p`.
pub fn is_orthonormal(field: &FieldConfig, vectors: &[Vec<Scalar>]) -> Result<bool> {
    for v in vectors {
        if field.vec_norm(v) != AbsValue::Power(0) {
            return Err(Error::NormNotOne(format_vector(v)));
        }
    }
    let rows: Vec<Vec<u64>> = vectors.iter().map(|v| residues(field, v)).collect();
    Ok(fp::rank(&rows, field.p()) == vectors.len())
}

/// Orthogonality of nonzero vectors; scaling each to norm 1 does not change it.
pub fn is_orthogonal(field: &FieldConfig, vectors: &[Vec<Scalar>]) -> Result<bool> {
    let scaled = vectors
        .iter()
        .map(|v| normalize(field, v))
        .collect::<Result<Vec<_>>>()?;
    is_orthonormal(field, &scaled)
}

/// Valuation of a nonzero maximal minor of the rows; an upper bound on how
/// many residue-cancellation steps [`orthonormalize`] can take for its last row.
fn minor_valuation(field: &FieldConfig, rows: &[Vec<Scalar>]) -> Result<i64> {
    let m = MatrixK::from_rows(rows.to_vec())?;
    let k = m.rows();
    let mut w = m.clone();
    let mut cols = Vec::new();
    let mut r = 0;
    for col in 0..w.cols() {
        if r == k {
            break;
        }
        let Some(pivot) = (r..k).find(|&i| !w[(i, col)].is_zero()) else {
            continue;
        };
        w.swap_rows(r, pivot);
        for i in r + 1..k {
            if w[(i, col)].is_zero() {
                continue;
            }
            let c = -(w[(i, col)].checked_div(&w[(r, col)])?);
            w.add_row_multiple(i, r, &c);
        }
        cols.push(col);
        r += 1;
    }
    if r < k {
        return Err(Error::DependentInput);
    }
    let all: Vec<usize> = (0..k).collect();
    let det = m.submatrix(&all, &cols).det()?;
    Ok(field.val(&det).finite().expect("nonzero minor"))
}

/// Orthonormal `v_1, …, v_n` with `span(e_1..e_k) = span(v_1..v_k)` for all `k`.
///
/// Each new vector is scaled to norm 1; while its residue is a combination
/// of the residues already accepted, that combination is subtracted and the
/// remainder rescaled. Every pass lowers the valuation of the maximal minors
/// by at least one, so the pass count is bounded by the valuation of any
/// nonzero minor of the normalized family.
pub fn orthonormalize(field: &FieldConfig, vectors: &[Vec<Scalar>]) -> Result<Vec<Vec<Scalar>>> {
    let Some(d) = vectors.first().map(|v| v.len()) else {
        return Ok(Vec::new());
    };
    let p = field.p();
    let mut out: Vec<Vec<Scalar>> = Vec::with_capacity(vectors.len());
    let mut out_res: Vec<Vec<u64>> = Vec::with_capacity(vectors.len());
    for e in vectors {
        if e.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: e.len(),
            });
        }
        let mut w = normalize(field, e).map_err(|_| Error::DependentInput)?;
        let mut family = out.clone();
        family.push(w.clone());
        let bound = minor_valuation(field, &family)?;
        let mut steps = 0;
        loop {
            let res = residues(field, &w);
            let Some(coeffs) = fp::solve_combination(&out_res, &res, p) else {
                out_res.push(res);
                break;
            };
            for (c, v) in coeffs.iter().zip(&out) {
                if *c == 0 {
                    continue;
                }
                let c = Scalar::from(*c);
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= &(&c * vi);
                }
            }
            w = normalize(field, &w).map_err(|_| Error::DependentInput)?;
            steps += 1;
            assert!(
                steps <= bound,
                "orthonormalization exceeded its minor-valuation bound {bound}"
            );
        }
        out.push(w);
    }
    Ok(out)
}

/// `A = U·D·V` with `U, V ∈ GL(O_K)` and `D` diagonal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SvdDecomposition {
    pub u: MatrixK,
    pub d: MatrixK,
    pub v: MatrixK,
}

impl SvdDecomposition {
    /// Valuations of the diagonal of `D`; zeros are `+∞`.
    pub fn exponents(&self, field: &FieldConfig) -> Vec<ValInt> {
        let n = self.d.rows().min(self.d.cols());
        (0..n).map(|i| field.val(&self.d[(i, i)])).collect()
    }
}

/// Smith normal form over `O_K`: diagonal entries `p^{n_1}, …, p^{n_r}, 0, …`
/// with `n_1 ≤ … ≤ n_r`.
///
/// Global minimal-valuation pivoting keeps every row and column multiplier
/// in `O_K`, so the accumulated transforms stay in `GL(O_K)`.
pub fn svd(field: &FieldConfig, a: &MatrixK) -> SvdDecomposition {
    let (rows, cols) = (a.rows(), a.cols());
    let mut w = a.clone();
    let mut u = MatrixK::identity(rows);
    let mut v = MatrixK::identity(cols);
    // invariant: a = u · w · v
    for k in 0..rows.min(cols) {
        let mut best: Option<(i64, usize, usize)> = None;
        for i in k..rows {
            for j in k..cols {
                if let ValInt::Finite(val) = field.val(&w[(i, j)]) {
                    if best.is_none_or(|(b, _, _)| val < b) {
                        best = Some((val, i, j));
                    }
                }
            }
        }
        let Some((n, i, j)) = best else {
            break;
        };
        w.swap_rows(k, i);
        u.swap_cols(k, i);
        w.swap_cols(k, j);
        v.swap_rows(k, j);
        let pivot = w[(k, k)].clone();
        for r in k + 1..rows {
            if w[(r, k)].is_zero() {
                continue;
            }
            let c = -(w[(r, k)].checked_div(&pivot).expect("nonzero pivot"));
            w.add_row_multiple(r, k, &c);
            u.add_col_multiple(k, r, &-c.clone());
        }
        for c_idx in k + 1..cols {
            if w[(k, c_idx)].is_zero() {
                continue;
            }
            let c = -(w[(k, c_idx)].checked_div(&pivot).expect("nonzero pivot"));
            w.add_col_multiple(c_idx, k, &c);
            v.add_row_multiple(k, c_idx, &-c.clone());
        }
        let unit = pivot.checked_div(&field.pow(n)).expect("p^n is nonzero");
        w.scale_row(k, &unit.inv().expect("unit"));
        u.scale_col(k, &unit);
    }
    SvdDecomposition { u, d: w, v }
}
