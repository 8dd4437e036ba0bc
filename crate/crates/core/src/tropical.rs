//! Tropicalization of Gaussian measures.
//!
//! For the uniform measure on a full-rank lattice `L` and `V = val(X)`, the
//! tail `P(V ≥ v)` equals `q^{-φ_L(v)}` with
//! `φ_L(v) = measure_log(L ∩ diag(p^v)·O_K^d) − measure_log(L)`.
//! In dimension 2 this is a max-plus polynomial with supermodular
//! coefficients read off the Hermite form; in higher dimension the
//! coefficients are fitted at far-away corners and checked on a grid.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::{map_range, Execution};
use crate::gaussian::{GaussianDist, SHARD_SIZE};
use crate::lattice::{hnf, Lattice};
use crate::matrix::MatrixK;
use crate::rng::DigitSource;

/// Largest dimension for which the supermodularity check visits all pairs.
pub const MAX_SUPERMODULAR_DIM: usize = 10;
/// Grid points checked when the box is too large to enumerate.
pub const GRID_SUBSAMPLE: usize = 10_000;
/// Seed of the grid offset pattern used for subsampled verification.
pub const GRID_SEED: u64 = 0x7472_6f70_6772_6964;
/// Corner-fitting doublings before giving up.
pub const MAX_DOUBLINGS: u32 = 10;
/// Margin added to the minimal precision in Monte-Carlo tail estimates.
pub const PRECISION_MARGIN: i64 = 8;

/// `P(v) = max_I (Σ_{i∈I} v_i − c_I)`, with coefficients indexed by bitmask.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TropPoly {
    dim: usize,
    coeffs: Vec<i64>,
}

impl TropPoly {
    /// `coeffs[mask]` is `c_I` for `I = {i : bit i of mask set}`; `c_∅` must be 0.
    pub fn new(dim: usize, coeffs: Vec<i64>) -> Result<Self> {
        if dim >= 32 || coeffs.len() != 1 << dim {
            return Err(Error::DimensionMismatch {
                expected: 1usize.checked_shl(dim as u32).unwrap_or(0),
                found: coeffs.len(),
            });
        }
        if coeffs[0] != 0 {
            return Err(Error::BadSubset("c_∅ must be 0".into()));
        }
        Ok(TropPoly { dim, coeffs })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coefficient(&self, mask: usize) -> i64 {
        self.coeffs[mask]
    }

    pub fn coefficients(&self) -> &[i64] {
        &self.coeffs
    }

    /// Coefficients in graded order: by subset size, then lexicographically.
    pub fn graded_coefficients(&self) -> Vec<(Vec<usize>, i64)> {
        graded_masks(self.dim)
            .into_iter()
            .map(|m| (mask_members(m), self.coeffs[m]))
            .collect()
    }

    pub fn eval(&self, v: &[i64]) -> Result<i64> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: v.len(),
            });
        }
        Ok((0..self.coeffs.len())
            .map(|mask| {
                let s: i64 = (0..self.dim)
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| v[i])
                    .sum();
                s - self.coeffs[mask]
            })
            .max()
            .expect("at least the empty monomial"))
    }

    /// `c_∅ = 0` and `c_{I∪J} + c_{I∩J} ≥ c_I + c_J` for every pair.
    ///
    /// Up to [`MAX_SUPERMODULAR_DIM`] all pairs are checked; beyond that the
    /// equivalent local condition on pairs differing in two elements is used.
    pub fn is_supermodular(&self) -> bool {
        if self.coeffs[0] != 0 {
            return false;
        }
        let n = self.coeffs.len();
        let c = &self.coeffs;
        if self.dim <= MAX_SUPERMODULAR_DIM {
            (0..n).all(|a| (0..n).all(|b| c[a | b] + c[a & b] >= c[a] + c[b]))
        } else {
            (0..n).all(|s| {
                (0..self.dim).all(|i| {
                    (i + 1..self.dim).all(|j| {
                        let (bi, bj) = (1 << i, 1 << j);
                        if s & (bi | bj) != 0 {
                            return true;
                        }
                        c[s | bi | bj] + c[s] >= c[s | bi] + c[s | bj]
                    })
                })
            })
        }
    }

    /// Coefficient data for regular-subdivision plotting: each cube vertex
    /// (as a 0/1 vector) with its height `c_I`.
    pub fn subdivision_data(&self) -> Vec<(Vec<u8>, i64)> {
        graded_masks(self.dim)
            .into_iter()
            .map(|m| {
                let vertex = (0..self.dim).map(|i| (m >> i & 1) as u8).collect();
                (vertex, self.coeffs[m])
            })
            .collect()
    }
}

impl fmt::Display for TropPoly {
    /// Max-plus form such as `max(0, v1, v2, v1 + v2 - 1)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = graded_masks(self.dim)
            .into_iter()
            .map(|m| {
                let vars: Vec<String> = mask_members(m)
                    .iter()
                    .map(|i| format!("v{}", i + 1))
                    .collect();
                let c = self.coeffs[m];
                match (vars.is_empty(), c) {
                    (true, c) => format!("{}", -c),
                    (false, 0) => vars.join(" + "),
                    (false, c) if c > 0 => format!("{} - {c}", vars.join(" + ")),
                    (false, c) => format!("{} + {}", vars.join(" + "), -c),
                }
            })
            .collect();
        write!(f, "max({})", terms.join(", "))
    }
}

impl Serialize for TropPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Term {
            subset: Vec<usize>,
            coefficient: i64,
        }
        #[derive(Serialize)]
        struct Repr {
            dim: usize,
            coefficients: Vec<i64>,
            terms: Vec<Term>,
            text: String,
        }
        let graded = self.graded_coefficients();
        Repr {
            dim: self.dim,
            coefficients: graded.iter().map(|(_, c)| *c).collect(),
            terms: graded
                .into_iter()
                .map(|(subset, coefficient)| Term {
                    subset: subset.iter().map(|i| i + 1).collect(),
                    coefficient,
                })
                .collect(),
            text: self.to_string(),
        }
        .serialize(s)
    }
}

/// Bitmasks of subsets of `0..d`, by size then lexicographically.
pub fn graded_masks(d: usize) -> Vec<usize> {
    let mut masks: Vec<usize> = (0..1usize << d).collect();
    masks.sort_by_key(|&m| (m.count_ones(), mask_members(m)));
    masks
}

fn mask_members(mask: usize) -> Vec<usize> {
    (0..usize::BITS as usize)
        .filter(|i| mask >> i & 1 == 1)
        .collect()
}

/// Precomputed tail exponent `φ_L` of a full-rank lattice.
///
/// `L ∩ π^v = dual(dual(L) + π^{-v})`, and duality negates `measure_log`,
/// so `φ_L(v) = −measure_log(dual(L) + π^{-v}) − measure_log(L)`; only the
/// dual of `L` is kept between evaluations.
#[derive(Debug, Clone)]
pub struct TailExponent {
    lattice: Lattice,
    dual_generators: MatrixK,
    measure_log: i64,
}

impl TailExponent {
    pub fn new(lattice: &Lattice) -> Result<Self> {
        let measure_log = lattice.measure_log()?;
        Ok(TailExponent {
            lattice: lattice.clone(),
            dual_generators: lattice.dual()?.matrix().clone(),
            measure_log,
        })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn eval(&self, v: &[i64]) -> Result<i64> {
        let d = self.lattice.dim();
        if v.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: v.len(),
            });
        }
        let field = self.lattice.field();
        let neg: Vec<i64> = v.iter().map(|x| -x).collect();
        let gens = self
            .dual_generators
            .hcat(&MatrixK::power_diagonal(field, &neg))?;
        let sum = hnf(field, &gens);
        Ok(-sum.span_measure_log() - self.measure_log)
    }
}

/// `φ_L(v) = −log_q P(V ≥ v)` for the uniform measure on `L`.
pub fn phi_exact(lattice: &Lattice, v: &[i64]) -> Result<i64> {
    TailExponent::new(lattice)?.eval(v)
}

/// Closed form in dimension 2: for Hermite form `[[p^a, 0], [p^c·x, p^b]]`
/// with `val(x) = 0`, `φ = max(0, v1 − a, v2 − c, v1 + v2 − a − b)`.
/// A zero off-diagonal entry is read as `c = b`.
pub fn trop2d(lattice: &Lattice) -> Result<TropPoly> {
    if lattice.dim() != 2 {
        return Err(Error::WrongDimension {
            expected: 2,
            found: lattice.dim(),
        });
    }
    lattice.require_full_rank()?;
    let n = lattice.diag_exponents();
    let (a, b) = (n[0], n[1]);
    let c = lattice
        .field()
        .val(&lattice.matrix()[(1, 0)])
        .finite()
        .unwrap_or(b);
    TropPoly::new(2, vec![0, a, c, a + b])
}

/// Fits `c_I = |I|·M − φ(v(M))` at the corners `v_i = ±M` (plus on `I`),
/// doubling `M` until two consecutive values agree.
pub fn fit_tropical(lattice: &Lattice) -> Result<TropPoly> {
    fit_tropical_with(lattice, Execution::default())
}

pub fn fit_tropical_with(lattice: &Lattice, exec: Execution) -> Result<TropPoly> {
    let tail = TailExponent::new(lattice)?;
    let d = lattice.dim();
    let max_diag = lattice
        .diag_exponents()
        .iter()
        .map(|e| e.abs())
        .max()
        .unwrap_or(0);
    let m0 = 1 + max_diag + tail.measure_log.abs();
    let corner = |mask: usize, m: i64| -> Result<i64> {
        let v: Vec<i64> = (0..d)
            .map(|i| if mask >> i & 1 == 1 { m } else { -m })
            .collect();
        Ok(mask.count_ones() as i64 * m - tail.eval(&v)?)
    };
    let coeffs = map_range(exec, 1 << d, |mask| -> Result<i64> {
        let mut m = m0;
        let mut prev = corner(mask, m)?;
        for _ in 0..MAX_DOUBLINGS {
            m *= 2;
            let next = corner(mask, m)?;
            if next == prev {
                return Ok(next);
            }
            prev = next;
        }
        Err(Error::NonStabilizing {
            subset: format!("{:?}", mask_members(mask)),
            bound: m,
        })
    });
    TropPoly::new(d, coeffs.into_iter().collect::<Result<Vec<_>>>()?)
}

/// A grid point where the fitted polynomial and `φ_L` disagree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub v: Vec<i64>,
    pub phi: i64,
    pub poly: i64,
}

/// Outcome of checking the supermodular max-plus description on a box.
#[derive(Debug, Clone, Serialize)]
pub struct ConjectureReport {
    pub lattice: Lattice,
    pub fitted: TropPoly,
    pub box_radius: i64,
    pub points_checked: usize,
    pub exhaustive: bool,
    pub mismatches: Vec<Mismatch>,
    pub supermodular: bool,
}

impl ConjectureReport {
    pub fn holds(&self) -> bool {
        self.mismatches.is_empty() && self.supermodular
    }
}

/// Grid indices into the box `[−r, r]^d`, in increasing order.
///
/// The whole box when it has at most [`GRID_SUBSAMPLE`] points, otherwise
/// `GRID_SUBSAMPLE` points: index `k·s + o_k` with stride
/// `s = ⌊total / GRID_SUBSAMPLE⌋` and offsets `o_k < s` drawn from
/// [`GRID_SEED`].
pub fn grid_indices(d: usize, radius: i64) -> (Vec<u128>, bool) {
    let side = (2 * radius + 1) as u128;
    let total = side.pow(d as u32);
    if total <= GRID_SUBSAMPLE as u128 {
        return ((0..total).collect(), true);
    }
    let stride = total / GRID_SUBSAMPLE as u128;
    let mut source = DigitSource::new(GRID_SEED, 0);
    let idx = (0..GRID_SUBSAMPLE as u128)
        .map(|k| {
            let offset = if stride > 1 {
                (source.next_u64() as u128) % stride
            } else {
                0
            };
            k * stride + offset
        })
        .collect();
    (idx, false)
}

fn grid_point(mut index: u128, d: usize, radius: i64) -> Vec<i64> {
    let side = (2 * radius + 1) as u128;
    (0..d)
        .map(|_| {
            let digit = (index % side) as i64;
            index /= side;
            digit - radius
        })
        .collect()
}

pub fn verify_conjecture(lattice: &Lattice, box_radius: i64) -> Result<ConjectureReport> {
    verify_conjecture_with(lattice, box_radius, Execution::default())
}

/// Fits the max-plus polynomial and compares it with `φ_L` on the box.
///
/// Boxes with at most [`GRID_SUBSAMPLE`] points (every `d ≤ 3` box up to
/// radius 10) are checked exhaustively.
pub fn verify_conjecture_with(
    lattice: &Lattice,
    box_radius: i64,
    exec: Execution,
) -> Result<ConjectureReport> {
    if box_radius < 0 {
        return Err(Error::BadSubset(format!(
            "negative box radius {box_radius}"
        )));
    }
    let fitted = fit_tropical_with(lattice, exec)?;
    let tail = TailExponent::new(lattice)?;
    let d = lattice.dim();
    let (indices, exhaustive) = if d <= 3 {
        let side = (2 * box_radius + 1) as u128;
        ((0..side.pow(d as u32)).collect(), true)
    } else {
        grid_indices(d, box_radius)
    };
    let results = map_range(exec, indices.len(), |k| -> Result<Option<Mismatch>> {
        let v = grid_point(indices[k], d, box_radius);
        let phi = tail.eval(&v)?;
        let poly = fitted.eval(&v)?;
        Ok((phi != poly).then_some(Mismatch { v, phi, poly }))
    });
    let mut mismatches = Vec::new();
    for r in results {
        if let Some(m) = r? {
            mismatches.push(m);
        }
    }
    Ok(ConjectureReport {
        lattice: lattice.clone(),
        supermodular: fitted.is_supermodular(),
        fitted,
        box_radius,
        points_checked: indices.len(),
        exhaustive,
        mismatches,
    })
}

/// Monte-Carlo estimate of `P(V ≥ v)` with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub hits: u64,
    pub samples: u64,
    pub precision: u32,
}

impl TailEstimate {
    /// `|estimate − target| ≤ k·SE`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.estimate - target).abs() <= k * self.std_error
    }
}

/// Smallest sampling precision that resolves `v`, plus a safety margin.
pub fn default_tail_precision(dist: &GaussianDist, v: &[i64]) -> u32 {
    let minval = dist.censoring_bound(0);
    let top = v.iter().copied().max().unwrap_or(0);
    (top - minval + PRECISION_MARGIN).max(1) as u32
}

pub fn mc_tail(dist: &GaussianDist, v: &[i64], samples: usize, seed: u64) -> Result<TailEstimate> {
    let precision = default_tail_precision(dist, v);
    mc_tail_with(dist, v, samples, seed, precision, Execution::default())
}

/// Empirical frequency of `{V ≥ v}`.
///
/// A censored coordinate has true valuation at least the censoring bound,
/// which must reach `max(v)`; otherwise the event would be undecidable and
/// [`Error::PrecisionTooLow`] is returned.
pub fn mc_tail_with(
    dist: &GaussianDist,
    v: &[i64],
    samples: usize,
    seed: u64,
    precision: u32,
    exec: Execution,
) -> Result<TailEstimate> {
    if v.len() != dist.dim() {
        return Err(Error::DimensionMismatch {
            expected: dist.dim(),
            found: v.len(),
        });
    }
    let bound = dist.censoring_bound(precision);
    let top = v.iter().copied().max().unwrap_or(i64::MIN);
    if precision == 0 || bound < top {
        return Err(Error::PrecisionTooLow {
            precision,
            target: top,
            bound,
        });
    }
    let shards = samples.div_ceil(SHARD_SIZE);
    let per_shard = map_range(exec, shards, |s| -> Result<u64> {
        let n = SHARD_SIZE.min(samples - s * SHARD_SIZE);
        let draws = dist.sample_many_shard(s as u64, n, precision, seed)?;
        Ok(draws
            .iter()
            .filter(|draw| {
                draw.valuations.iter().zip(&draw.censored).zip(v).all(
                    |((val, &censored), &target)| {
                        censored || val.finite().is_none_or(|x| x >= target)
                    },
                )
            })
            .count() as u64)
    });
    let hits: u64 = per_shard.into_iter().sum::<Result<u64>>()?;
    let n = samples as f64;
    let estimate = if samples == 0 { 0.0 } else { hits as f64 / n };
    let std_error = if samples == 0 {
        0.0
    } else {
        (estimate * (1.0 - estimate) / n).sqrt()
    };
    Ok(TailEstimate {
        estimate,
        std_error,
        hits,
        samples: samples as u64,
        precision,
    })
}
