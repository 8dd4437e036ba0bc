//! Lattices `A·O_K^m ⊂ K^d` in Hermite normal form.
//!
//! A lattice is stored by its canonical generator matrix: column `t` has its
//! first nonzero entry `p^{n_t}` in pivot row `r_t`, the pivot rows increase
//! with `t`, and every entry to the left of a pivot is a finite digit sum of
//! degree below `n_t`. For full-rank lattices the pivot rows are `0..d` and
//! the matrix is the usual lower-triangular Hermite form. For rank `r < d`
//! the same conditions hold on the `r` pivot rows; the remaining rows are
//! determined by the span.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{FieldConfig, Scalar, ValInt};
use crate::matrix::MatrixK;

/// Canonical generator matrix together with its pivot data.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HermiteForm {
    matrix: MatrixK,
    diag_exponents: Vec<i64>,
    pivot_rows: Vec<usize>,
}

impl HermiteForm {
    pub fn matrix(&self) -> &MatrixK {
        &self.matrix
    }

    /// Exponents `n_t` of the pivot entries `p^{n_t}`.
    pub fn diag_exponents(&self) -> &[i64] {
        &self.diag_exponents
    }

    pub fn pivot_rows(&self) -> &[usize] {
        &self.pivot_rows
    }
}

/// An `O_K`-lattice in `K^d`, canonically represented.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Lattice {
    field: FieldConfig,
    hnf: HermiteForm,
}

/// Hermite normal form of the lattice spanned by the columns of `a`.
///
/// Row by row: pick the nonzero entry of minimal valuation among the
/// remaining columns (lowest index on ties), clear the rest of the row with
/// `O_K`-multiples of the pivot column, scale the pivot to `p^n` by a unit,
/// then reduce the entries left of each pivot to digit sums below `p^n`.
pub fn hnf(field: &FieldConfig, a: &MatrixK) -> Lattice {
    let d = a.rows();
    let m = a.cols();
    let mut w = a.clone();
    let mut pivot_rows = Vec::new();
    let mut exps = Vec::new();
    let mut k = 0;
    for i in 0..d {
        if k == m {
            break;
        }
        let best = (k..m)
            .filter_map(|j| field.val(&w[(i, j)]).finite().map(|v| (v, j)))
            .min();
        let Some((n, j)) = best else {
            continue;
        };
        w.swap_cols(k, j);
        for j in k + 1..m {
            if w[(i, j)].is_zero() {
                continue;
            }
            let c = -(w[(i, j)].checked_div(&w[(i, k)]).expect("nonzero pivot"));
            w.add_col_multiple(j, k, &c);
        }
        let unit = field.pow(n).checked_div(&w[(i, k)]).expect("nonzero pivot");
        w.scale_col(k, &unit);
        pivot_rows.push(i);
        exps.push(n);
        k += 1;
    }
    let mut w = w.truncate_cols(k);
    for j in 0..k {
        for t in j + 1..k {
            let row = pivot_rows[t];
            let x = &w[(row, j)];
            if x.is_zero() {
                continue;
            }
            let kept = field.truncate_below(x, exps[t]);
            if &kept == x {
                continue;
            }
            let alpha = (x - &kept)
                .checked_div(&field.pow(exps[t]))
                .expect("p^n is nonzero");
            w.add_col_multiple(j, t, &-alpha);
        }
    }
    Lattice {
        field: *field,
        hnf: HermiteForm {
            matrix: w,
            diag_exponents: exps,
            pivot_rows,
        },
    }
}

impl Lattice {
    /// Lattice spanned by the columns of `generators`.
    pub fn from_generators(field: &FieldConfig, generators: &MatrixK) -> Lattice {
        hnf(field, generators)
    }

    /// `O_K^d`.
    pub fn standard(field: &FieldConfig, d: usize) -> Lattice {
        hnf(field, &MatrixK::identity(d))
    }

    /// `diag(p^{e_1}, …, p^{e_d})·O_K^d`.
    pub fn diagonal(field: &FieldConfig, exponents: &[i64]) -> Lattice {
        hnf(field, &MatrixK::power_diagonal(field, exponents))
    }

    pub fn field(&self) -> &FieldConfig {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.hnf.matrix.rows()
    }

    pub fn rank(&self) -> usize {
        self.hnf.matrix.cols()
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank() == self.dim()
    }

    pub fn hermite(&self) -> &HermiteForm {
        &self.hnf
    }

    pub fn matrix(&self) -> &MatrixK {
        &self.hnf.matrix
    }

    pub fn diag_exponents(&self) -> &[i64] {
        &self.hnf.diag_exponents
    }

    pub fn require_full_rank(&self) -> Result<()> {
        if self.is_full_rank() {
            Ok(())
        } else {
            Err(Error::NotFullRank {
                rank: self.rank(),
                dim: self.dim(),
            })
        }
    }

    fn require_compatible(&self, other: &Lattice) -> Result<()> {
        if self.field != other.field {
            return Err(Error::PrimeMismatch(self.field.p(), other.field.p()));
        }
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    /// `val(det A)`; the Haar measure is `q^{-measure_log}`.
    pub fn measure_log(&self) -> Result<i64> {
        self.require_full_rank()?;
        Ok(self.span_measure_log())
    }

    /// Sum of the pivot exponents. For full-rank lattices this is
    /// [`measure_log`](Self::measure_log); for lower rank it is the log-measure
    /// in the chart given by the pivot coordinates of the span, which is the
    /// same for every lattice with that span.
    pub fn span_measure_log(&self) -> i64 {
        self.hnf.diag_exponents.iter().sum()
    }

    /// Coordinates `y` with `A·y = x`, if `x` is in the `K`-span.
    fn solve_in_span(&self, x: &[Scalar]) -> Option<Vec<Scalar>> {
        let a = &self.hnf.matrix;
        let r = self.rank();
        let mut y: Vec<Scalar> = Vec::with_capacity(r);
        for t in 0..r {
            let row = self.hnf.pivot_rows[t];
            let mut acc = x[row].clone();
            for (s, ys) in y.iter().enumerate() {
                if !a[(row, s)].is_zero() {
                    acc -= &(&a[(row, s)] * ys);
                }
            }
            y.push(acc.checked_div(&a[(row, t)]).expect("pivot is nonzero"));
        }
        if r < self.dim() && a.mul_vec(&y).expect("shapes agree") != x {
            return None;
        }
        Some(y)
    }

    /// Membership `x ∈ L`.
    pub fn contains(&self, x: &[Scalar]) -> Result<bool> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(match self.solve_in_span(x) {
            Some(y) => self.field.min_val(&y) >= ValInt::Finite(0),
            None => false,
        })
    }

    /// True when every generator of `self` lies in `other`.
    pub fn is_sublattice_of(&self, other: &Lattice) -> Result<bool> {
        self.require_compatible(other)?;
        for col in self.hnf.matrix.column_vecs() {
            if !other.contains(&col)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `{y : y·x ∈ O_K for all x ∈ L}`.
    pub fn dual(&self) -> Result<Lattice> {
        self.require_full_rank()?;
        let inv = self.hnf.matrix.inverse()?;
        Ok(hnf(&self.field, &inv.transpose()))
    }

    pub fn sum(&self, other: &Lattice) -> Result<Lattice> {
        self.require_compatible(other)?;
        let gens = self.hnf.matrix.hcat(&other.hnf.matrix)?;
        Ok(hnf(&self.field, &gens))
    }

    /// `L1 ∩ L2`, computed as `dual(dual(L1) + dual(L2))`.
    pub fn intersect(&self, other: &Lattice) -> Result<Lattice> {
        self.require_compatible(other)?;
        other.require_full_rank()?;
        self.dual()?.sum(&other.dual()?)?.dual()
    }

    /// `c·L`.
    pub fn scale(&self, c: &Scalar) -> Lattice {
        hnf(&self.field, &self.hnf.matrix.scale(c))
    }

    /// `A·L` for an invertible `A`.
    pub fn transform(&self, a: &MatrixK) -> Result<Lattice> {
        Ok(hnf(&self.field, &a.mul(&self.hnf.matrix)?))
    }

    /// Exponents `m_i` of the maximal diagonal sublattice
    /// `diag(p^{m_1}, …, p^{m_d})·O_K^d ⊆ L`.
    pub fn independence_exponents(&self) -> Result<Vec<i64>> {
        self.require_full_rank()?;
        let inv = self.hnf.matrix.inverse()?;
        Ok((0..self.dim())
            .map(|i| {
                let v = self
                    .field
                    .min_val(&inv.column(i))
                    .finite()
                    .expect("columns of an inverse are nonzero");
                -v
            })
            .collect())
    }

    pub fn independence_lattice(&self) -> Result<Lattice> {
        let m = self.independence_exponents()?;
        Ok(Lattice::diagonal(&self.field, &m))
    }

    /// Checks the Hermite conditions on the stored matrix.
    pub fn is_canonical(&self) -> bool {
        let a = &self.hnf.matrix;
        let field = &self.field;
        for (t, (&row, &n)) in self
            .hnf
            .pivot_rows
            .iter()
            .zip(&self.hnf.diag_exponents)
            .enumerate()
        {
            if (0..row).any(|i| !a[(i, t)].is_zero()) {
                return false;
            }
            if a[(row, t)] != field.pow(n) {
                return false;
            }
            for s in 0..t {
                let x = &a[(row, s)];
                if !x.is_zero() && field.truncate_below(x, n) != *x {
                    return false;
                }
            }
        }
        self.hnf.pivot_rows.windows(2).all(|w| w[0] < w[1])
    }
}

impl fmt::Display for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.hnf.matrix)
    }
}

/// Serialized form: `{ "p": …, "hnf": [[…]] }`.
#[derive(Serialize)]
struct LatticeRepr<'a> {
    p: u64,
    hnf: &'a MatrixK,
}

impl Serialize for Lattice {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        LatticeRepr {
            p: self.field.p(),
            hnf: &self.hnf.matrix,
        }
        .serialize(s)
    }
}
