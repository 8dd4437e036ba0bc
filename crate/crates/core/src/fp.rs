//! Dense linear algebra over the residue field `F_p`.

use crate::field::{mod_inverse, mul_mod};

/// Rank of the row family `rows` over `F_p`.
pub fn rank(rows: &[Vec<u64>], p: u64) -> usize {
    let mut work: Vec<Vec<u64>> = rows.to_vec();
    row_reduce(&mut work, p)
}

/// Reduces `rows` to row echelon form in place and returns the rank.
pub fn row_reduce(rows: &mut [Vec<u64>], p: u64) -> usize {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows.len()).find(|&r| !rows[r][col].is_multiple_of(p)) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = mod_inverse(rows[rank][col], p).expect("nonzero in a field");
        for x in rows[rank].iter_mut() {
            *x = mul_mod(*x, inv, p);
        }
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == rank || row[col] == 0 {
                continue;
            }
            let factor = row[col];
            for (x, &y) in row.iter_mut().zip(&pivot_row) {
                *x = (*x + p - mul_mod(factor, y, p)) % p;
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Coefficients `c` with `target = Σ c_i basis_i`, when `basis` is
/// independent and `target` lies in its span.
pub fn solve_combination(basis: &[Vec<u64>], target: &[u64], p: u64) -> Option<Vec<u64>> {
    let n = basis.len();
    let dim = target.len();
    // augmented system: columns are basis vectors, last column is target
    let mut rows: Vec<Vec<u64>> = (0..dim)
        .map(|i| {
            let mut r: Vec<u64> = basis.iter().map(|b| b[i] % p).collect();
            r.push(target[i] % p);
            r
        })
        .collect();
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..n {
        let Some(pivot) = (rank..dim).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = mod_inverse(rows[rank][col], p)?;
        for x in rows[rank].iter_mut() {
            *x = mul_mod(*x, inv, p);
        }
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == rank || row[col] == 0 {
                continue;
            }
            let factor = row[col];
            for (x, &y) in row.iter_mut().zip(&pivot_row) {
                *x = (*x + p - mul_mod(factor, y, p)) % p;
            }
        }
        pivots.push(col);
        rank += 1;
    }
    if rows[rank..].iter().any(|r| r[n] != 0) {
        return None;
    }
    let mut coeffs = vec![0; n];
    for (r, &col) in pivots.iter().enumerate() {
        coeffs[col] = rows[r][n];
    }
    Some(coeffs)
}
