//! Conditional independence of Gaussian coordinates as an `F_p`-linear matroid.
//!
//! Coordinates are 0-based throughout the library.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fp;
use crate::gaussian::GaussianDist;
use crate::lattice::hnf;
use crate::orthogonal::normalize;

/// Largest ground set accepted by basis enumeration.
pub const MAX_ENUMERATION_GROUND: usize = 20;

/// Row matroid of a matrix over `F_p`; row `k` belongs to coordinate `ground[k]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatroidRep {
    pub p: u64,
    /// The conditioning set, ascending.
    pub conditioning: Vec<usize>,
    /// Remaining coordinates, ascending.
    pub ground: Vec<usize>,
    pub matrix: Vec<Vec<u64>>,
}

impl MatroidRep {
    fn positions(&self, subset: &[usize]) -> Result<Vec<usize>> {
        subset
            .iter()
            .map(|j| {
                self.ground
                    .iter()
                    .position(|g| g == j)
                    .ok_or_else(|| Error::BadSubset(format!("{j} is not in the ground set")))
            })
            .collect()
    }

    fn rows_at(&self, positions: &[usize]) -> Vec<Vec<u64>> {
        positions.iter().map(|&k| self.matrix[k].clone()).collect()
    }

    /// Rank of a subset of the ground set.
    pub fn rank_of(&self, subset: &[usize]) -> Result<usize> {
        let pos = self.positions(subset)?;
        Ok(fp::rank(&self.rows_at(&pos), self.p))
    }

    pub fn rank(&self) -> usize {
        fp::rank(&self.matrix, self.p)
    }

    pub fn is_independent(&self, subset: &[usize]) -> Result<bool> {
        let mut sorted = subset.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != subset.len() {
            return Err(Error::BadSubset("repeated index".into()));
        }
        Ok(self.rank_of(subset)? == subset.len())
    }

    /// All bases, each ascending, in lexicographic order.
    pub fn bases(&self) -> Result<Vec<Vec<usize>>> {
        let n = self.ground.len();
        if n > MAX_ENUMERATION_GROUND {
            return Err(Error::TooLarge(format!(
                "ground set of size {n} exceeds {MAX_ENUMERATION_GROUND}"
            )));
        }
        let r = self.rank();
        let mut out = Vec::new();
        for combo in combinations(n, r) {
            if fp::rank(&self.rows_at(&combo), self.p) == r {
                out.push(combo.iter().map(|&k| self.ground[k]).collect());
            }
        }
        Ok(out)
    }
}

/// All `k`-subsets of `0..n`, ascending, in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn validate_subset(subset: &[usize], d: usize) -> Result<Vec<usize>> {
    let mut sorted = subset.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != subset.len() {
        return Err(Error::BadSubset(format!("{subset:?} has repeated indices")));
    }
    if let Some(&bad) = sorted.iter().find(|&&i| i >= d) {
        return Err(Error::BadSubset(format!(
            "index {bad} out of range for d = {d}"
        )));
    }
    Ok(sorted)
}

/// Matroid of conditional independence given the coordinates in `conditioning`.
///
/// Coordinates are reordered as (conditioning ascending, rest ascending),
/// the Hermite form is recomputed, and the lower-right block is read with
/// each row scaled to norm 1 and reduced mod `p`.
pub fn ci_matroid(dist: &GaussianDist, conditioning: &[usize]) -> Result<MatroidRep> {
    let lattice = dist.lattice();
    lattice.require_full_rank()?;
    let d = lattice.dim();
    let cond = validate_subset(conditioning, d)?;
    if cond.len() == d {
        return Err(Error::BadSubset(
            "conditioning set is the whole index set".into(),
        ));
    }
    let rest: Vec<usize> = (0..d).filter(|i| !cond.contains(i)).collect();
    let order: Vec<usize> = cond.iter().chain(&rest).copied().collect();
    let field = lattice.field();
    let permuted = hnf(field, &lattice.matrix().permute_rows(&order));
    let l = cond.len();
    let block: Vec<usize> = (l..d).collect();
    let b = permuted.matrix().submatrix(&block, &block);
    let matrix = b
        .row_vecs()
        .iter()
        .map(|row| {
            let unit_row = normalize(field, row).expect("triangular rows are nonzero");
            unit_row
                .iter()
                .map(|x| field.residue(x).expect("norm-1 entries are integral"))
                .collect()
        })
        .collect();
    Ok(MatroidRep {
        p: field.p(),
        conditioning: cond,
        ground: rest,
        matrix,
    })
}

/// Whether the coordinates in `targets` are mutually independent given `conditioning`.
pub fn is_ci(dist: &GaussianDist, conditioning: &[usize], targets: &[usize]) -> Result<bool> {
    if targets.is_empty() {
        return Err(Error::BadSubset("empty target set".into()));
    }
    let d = dist.dim();
    let targets = validate_subset(targets, d)?;
    if targets.iter().any(|j| conditioning.contains(j)) {
        return Err(Error::BadSubset(
            "target and conditioning sets overlap".into(),
        ));
    }
    ci_matroid(dist, conditioning)?.is_independent(&targets)
}
