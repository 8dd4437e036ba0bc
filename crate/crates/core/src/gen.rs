//! Seeded random instances: lattices, `GL_d(O_K)` matrices and datasets.

use crate::field::{FieldConfig, Scalar};
use crate::lattice::{hnf, Lattice};
use crate::matrix::MatrixK;
use crate::rng::DigitSource;

/// Seeded generator of random instances.
#[derive(Debug, Clone)]
pub struct InstanceGen {
    field: FieldConfig,
    source: DigitSource,
}

impl InstanceGen {
    pub fn new(field: &FieldConfig, seed: u64) -> Self {
        InstanceGen {
            field: *field,
            source: DigitSource::new(seed, u64::MAX),
        }
    }

    pub fn field(&self) -> &FieldConfig {
        &self.field
    }

    /// Uniform integer in `lo..=hi`.
    pub fn int(&mut self, lo: i64, hi: i64) -> i64 {
        lo + self.source.below((hi - lo + 1) as u64) as i64
    }

    /// A p-adic unit in `1..p^2`.
    pub fn unit(&mut self) -> Scalar {
        let p = self.field.p();
        let bound = p.saturating_mul(p);
        loop {
            let x = 1 + self.source.below(bound - 1);
            if !x.is_multiple_of(p) {
                return Scalar::from(x);
            }
        }
    }

    /// `u·p^k` for a unit `u` and `k ∈ lo..=hi`, or zero with probability 1/4.
    pub fn scalar(&mut self, lo: i64, hi: i64) -> Scalar {
        if self.source.below(4) == 0 {
            return Scalar::zero();
        }
        let k = self.int(lo, hi);
        let u = self.unit();
        let s = if self.source.below(2) == 0 { u } else { -u };
        &s * &self.field.pow(k)
    }

    /// Random element of `GL_d(O_K)`: a permuted product of unitriangular
    /// factors with integral entries and unit diagonal.
    pub fn gl_ok(&mut self, d: usize) -> MatrixK {
        let mut lower = MatrixK::identity(d);
        let mut upper = MatrixK::identity(d);
        for i in 0..d {
            for j in 0..d {
                if i > j {
                    lower = set(&lower, i, j, self.scalar(0, 3));
                } else if i < j {
                    upper = set(&upper, i, j, self.scalar(0, 3));
                } else {
                    upper = set(&upper, i, j, self.unit());
                }
            }
        }
        let mut perm: Vec<usize> = (0..d).collect();
        for i in (1..d).rev() {
            let j = self.source.below(i as u64 + 1) as usize;
            perm.swap(i, j);
        }
        lower.mul(&upper).expect("square").permute_rows(&perm)
    }

    /// Full-rank lattice whose Hermite diagonal exponents lie in `-spread..=spread`.
    pub fn lattice(&mut self, d: usize, spread: i64) -> Lattice {
        let mut t = MatrixK::zeros(d, d);
        for i in 0..d {
            let k = self.int(-spread, spread);
            t = set(&t, i, i, self.field.pow(k));
            for j in 0..i {
                t = set(&t, i, j, self.scalar(-spread, spread));
            }
        }
        let g = t.mul(&self.gl_ok(d)).expect("square");
        hnf(&self.field, &g)
    }

    /// Random generator matrix of the given shape.
    pub fn matrix(&mut self, rows: usize, cols: usize, spread: i64) -> MatrixK {
        let data = (0..rows * cols)
            .map(|_| self.scalar(-spread, spread))
            .collect();
        MatrixK::new(rows, cols, data).expect("shape")
    }

    /// `n` random vectors of dimension `d`.
    pub fn dataset(&mut self, n: usize, d: usize, spread: i64) -> Vec<Vec<Scalar>> {
        (0..n)
            .map(|_| (0..d).map(|_| self.scalar(-spread, spread)).collect())
            .collect()
    }
}

fn set(m: &MatrixK, i: usize, j: usize, x: Scalar) -> MatrixK {
    let mut data = m.entries().to_vec();
    data[i * m.cols() + j] = x;
    MatrixK::new(m.rows(), m.cols(), data).expect("shape")
}
