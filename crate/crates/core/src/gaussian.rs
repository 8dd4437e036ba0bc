//! Gaussian measures on `K^d`: normalized Haar measures on lattices.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exec::{map_range, Execution};
use crate::field::{FieldConfig, Scalar, ValInt};
use crate::lattice::{hnf, Lattice};
use crate::matrix::MatrixK;
use crate::rng::DigitSource;

/// Samples drawn per RNG shard in batch sampling.
pub const SHARD_SIZE: usize = 4096;

/// The uniform probability measure on a lattice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GaussianDist {
    lattice: Lattice,
}

impl GaussianDist {
    pub fn new(lattice: Lattice) -> Self {
        GaussianDist { lattice }
    }

    /// The standard Gaussian, uniform on `O_K^d`.
    pub fn standard(field: &FieldConfig, d: usize) -> Self {
        GaussianDist::new(Lattice::standard(field, d))
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn field(&self) -> &FieldConfig {
        self.lattice.field()
    }

    pub fn dim(&self) -> usize {
        self.lattice.dim()
    }

    /// Valuations at or above this bound are not resolved by a sample drawn
    /// with `precision` digits.
    pub fn censoring_bound(&self, precision: u32) -> i64 {
        let minval = self
            .lattice
            .matrix()
            .min_val(self.field())
            .finite()
            .unwrap_or(0);
        precision as i64 + minval
    }

    /// One sample, using shard 0 of `seed`.
    pub fn sample(&self, precision: u32, seed: u64) -> Result<SampleResult> {
        self.lattice.require_full_rank()?;
        if precision == 0 {
            return Err(Error::PrecisionTooLow {
                precision,
                target: 1,
                bound: self.censoring_bound(0),
            });
        }
        let mut source = DigitSource::new(seed, 0);
        Ok(self.draw(&mut source, precision, seed))
    }

    /// `count` samples; sample `k` comes from shard `k / SHARD_SIZE`, so the
    /// output does not depend on `exec`.
    pub fn sample_many(
        &self,
        count: usize,
        precision: u32,
        seed: u64,
        exec: Execution,
    ) -> Result<Vec<SampleResult>> {
        self.lattice.require_full_rank()?;
        if precision == 0 {
            return Err(Error::PrecisionTooLow {
                precision,
                target: 1,
                bound: self.censoring_bound(0),
            });
        }
        let shards = count.div_ceil(SHARD_SIZE);
        let chunks = map_range(exec, shards, |s| {
            let n = SHARD_SIZE.min(count - s * SHARD_SIZE);
            self.shard_draws(s as u64, n, precision, seed)
        });
        Ok(chunks.into_iter().flatten().collect())
    }

    /// The first `n` samples of shard `shard`.
    pub(crate) fn sample_many_shard(
        &self,
        shard: u64,
        n: usize,
        precision: u32,
        seed: u64,
    ) -> Result<Vec<SampleResult>> {
        self.lattice.require_full_rank()?;
        Ok(self.shard_draws(shard, n, precision, seed))
    }

    fn shard_draws(&self, shard: u64, n: usize, precision: u32, seed: u64) -> Vec<SampleResult> {
        let mut source = DigitSource::new(seed, shard);
        (0..n)
            .map(|_| self.draw(&mut source, precision, seed))
            .collect()
    }

    /// `X = A·Z` where each `Z_j = Σ_{t<N} u_t p^t` has uniform digits.
    fn draw(&self, source: &mut DigitSource, precision: u32, seed: u64) -> SampleResult {
        let field = self.field();
        let p = field.p();
        let d = self.dim();
        let pb = BigInt::from(p);
        let z: Vec<Scalar> = (0..d)
            .map(|_| {
                let mut acc = BigInt::from(0);
                let mut power = BigInt::from(1);
                for _ in 0..precision {
                    let u = source.digit(p);
                    if u != 0 {
                        acc += &power * u;
                    }
                    power *= &pb;
                }
                Scalar::from_bigint(acc)
            })
            .collect();
        let point = self.lattice.matrix().mul_vec(&z).expect("square lattice");
        let bound = self.censoring_bound(precision);
        let valuations: Vec<ValInt> = point.iter().map(|x| field.val(x)).collect();
        let censored = valuations
            .iter()
            .map(|&v| v >= ValInt::Finite(bound))
            .collect();
        SampleResult {
            point,
            valuations,
            censored,
            precision,
            seed,
        }
    }

    /// `log_q` of the likelihood `Π 1_L(x)/λ(L)`.
    pub fn log_likelihood(&self, data: &[Vec<Scalar>]) -> Result<LogLikelihood> {
        for x in data {
            if !self.lattice.contains(x)? {
                return Ok(LogLikelihood::NegInfinity);
            }
        }
        Ok(LogLikelihood::Finite(
            data.len() as i64 * self.lattice.span_measure_log(),
        ))
    }
}

/// One draw together with its tropicalization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SampleResult {
    pub point: Vec<Scalar>,
    pub valuations: Vec<ValInt>,
    /// Coordinate valuation reached the precision bound; the true valuation
    /// is at least that bound.
    pub censored: Vec<bool>,
    pub precision: u32,
    pub seed: u64,
}

/// `log_q` of a likelihood, or `-∞` when some point lies outside the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LogLikelihood {
    NegInfinity,
    Finite(i64),
}

impl PartialOrd for LogLikelihood {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for LogLikelihood {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (LogLikelihood::NegInfinity, LogLikelihood::NegInfinity) => Ordering::Equal,
            (LogLikelihood::NegInfinity, _) => Ordering::Less,
            (_, LogLikelihood::NegInfinity) => Ordering::Greater,
            (LogLikelihood::Finite(a), LogLikelihood::Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for LogLikelihood {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogLikelihood::NegInfinity => write!(f, "-inf"),
            LogLikelihood::Finite(v) => write!(f, "{v}"),
        }
    }
}

impl Serialize for LogLikelihood {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            LogLikelihood::NegInfinity => s.serialize_str("-inf"),
            LogLikelihood::Finite(v) => s.serialize_i64(*v),
        }
    }
}

/// Maximum-likelihood lattice: the `O_K`-span of the data.
///
/// For data spanning a proper subspace this is the inclusion-minimal
/// maximizer among lattices of that span.
pub fn mle(field: &FieldConfig, data: &[Vec<Scalar>]) -> Result<Lattice> {
    let d = data.first().ok_or(Error::EmptyData)?.len();
    let gens = MatrixK::from_columns(d, data)?;
    let lattice = hnf(field, &gens);
    if lattice.rank() == 0 {
        return Err(Error::EmptyData);
    }
    Ok(lattice)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(p: u64) -> FieldConfig {
        FieldConfig::new(p).unwrap()
    }

    fn v(xs: &[i64]) -> Vec<Scalar> {
        xs.iter().map(|&x| Scalar::from(x)).collect()
    }

    #[test]
    fn standard_samples_are_integral() {
        let g = GaussianDist::standard(&f(3), 3);
        for s in g.sample_many(200, 6, 11, Execution::Sequential).unwrap() {
            assert!(s.valuations.iter().all(|&x| x >= ValInt::Finite(0)));
            assert!(g.lattice().contains(&s.point).unwrap());
        }
    }

    #[test]
    fn support_constraint() {
        let g = GaussianDist::new(Lattice::diagonal(&f(2), &[2, -1]));
        for s in g.sample_many(300, 5, 4, Execution::Sequential).unwrap() {
            assert!(s.valuations[0] >= ValInt::Finite(2));
            assert!(s.valuations[1] >= ValInt::Finite(-1));
        }
    }

    #[test]
    fn censoring_flags_match_bound() {
        let g = GaussianDist::standard(&f(2), 2);
        for s in g.sample_many(100, 2, 0, Execution::Sequential).unwrap() {
            for (val, c) in s.valuations.iter().zip(&s.censored) {
                assert_eq!(*c, *val >= ValInt::Finite(2));
            }
        }
    }

    #[test]
    fn sampling_is_deterministic_and_mode_independent() {
        let g = GaussianDist::new(hnf(&f(5), &MatrixK::from_i64(&[&[1, 0], &[2, 5]])));
        let a = g.sample_many(5000, 4, 9, Execution::Sequential).unwrap();
        let b = g.sample_many(5000, 4, 9, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        assert_eq!(g.sample(4, 9).unwrap(), a[0]);
        assert_ne!(
            a,
            g.sample_many(5000, 4, 10, Execution::Sequential).unwrap()
        );
    }

    #[test]
    fn sampling_requires_full_rank() {
        let l = hnf(&f(2), &MatrixK::from_i64(&[&[1], &[1]]));
        assert!(GaussianDist::new(l).sample(3, 0).is_err());
    }

    #[test]
    fn likelihood_examples() {
        let field = f(3);
        let std = GaussianDist::standard(&field, 2);
        assert_eq!(
            std.log_likelihood(&[v(&[0, 0])]),
            Ok(LogLikelihood::Finite(0))
        );
        let data = vec![v(&[1, 1]), v(&[1, 0])];
        assert_eq!(std.log_likelihood(&data), Ok(LogLikelihood::Finite(0)));
        let small = GaussianDist::new(Lattice::diagonal(&field, &[1, 1]));
        assert_eq!(small.log_likelihood(&data), Ok(LogLikelihood::NegInfinity));
        assert!(std.log_likelihood(&[v(&[1])]).is_err());
        assert!(LogLikelihood::NegInfinity < LogLikelihood::Finite(-100));
    }

    #[test]
    fn mle_examples() {
        let field = f(3);
        let basis = vec![v(&[1, 0, 0]), v(&[0, 1, 0]), v(&[0, 0, 1])];
        assert_eq!(mle(&field, &basis).unwrap(), Lattice::standard(&field, 3));
        let data = vec![v(&[1, 1]), v(&[1, 0])];
        assert_eq!(mle(&field, &data).unwrap(), Lattice::standard(&field, 2));
        let data = vec![v(&[3, 0]), v(&[0, 3]), v(&[1, 1])];
        let l = mle(&field, &data).unwrap();
        assert_eq!(l.matrix(), &MatrixK::from_i64(&[&[1, 0], &[1, 3]]));
        assert_eq!(l.measure_log(), Ok(1));
        assert_eq!(mle(&field, &[]), Err(Error::EmptyData));
        assert_eq!(mle(&field, &[v(&[0, 0])]), Err(Error::EmptyData));
    }
}
