//! Exact arithmetic in the rational subfield of `Q_p`.
//!
//! Every field element is a reduced rational number. The p-adic structure
//! (valuation, absolute value, residue, digit expansion) is computed on demand
//! from a [`FieldConfig`], so the same [`Scalar`] can be read in any `Q_p`.
//! Absolute values are kept as exponents of `q = p` to avoid huge rationals.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// The local field `Q_p`, with uniformizer `p` and residue field `F_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FieldConfig {
    p: u64,
}

impl FieldConfig {
    pub fn new(p: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(FieldConfig { p })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// Cardinality of the residue field.
    pub fn q(&self) -> u64 {
        self.p
    }

    /// The uniformizer raised to `k`, for any integer `k`.
    pub fn pow(&self, k: i64) -> Scalar {
        let base = BigInt::from(self.p).pow(k.unsigned_abs() as u32);
        if k >= 0 {
            Scalar::from_bigint(base)
        } else {
            Scalar(BigRational::new_raw(BigInt::one(), base))
        }
    }

    /// p-adic valuation; `+∞` for zero.
    pub fn val(&self, x: &Scalar) -> ValInt {
        if x.is_zero() {
            return ValInt::Infinity;
        }
        let num = int_valuation(x.0.numer(), self.p);
        let den = int_valuation(x.0.denom(), self.p);
        ValInt::Finite(num - den)
    }

    /// Absolute value `q^{-val(x)}`, stored as its exponent.
    pub fn abs(&self, x: &Scalar) -> AbsValue {
        match self.val(x) {
            ValInt::Infinity => AbsValue::Zero,
            ValInt::Finite(v) => AbsValue::Power(-v),
        }
    }

    /// Image of `x` in the residue field `F_p`.
    pub fn residue(&self, x: &Scalar) -> Result<u64> {
        if x.is_zero() {
            return Ok(0);
        }
        if self.val(x) < ValInt::Finite(0) {
            return Err(Error::NegativeValuation(x.to_string()));
        }
        let p = BigInt::from(self.p);
        let num = x.0.numer().mod_floor(&p).to_u64().unwrap_or(0);
        let den = x.0.denom().mod_floor(&p).to_u64().unwrap_or(0);
        let inv = mod_inverse(den, self.p).ok_or(Error::DivisionByZero)?;
        Ok(mul_mod(num, inv, self.p))
    }

    /// Leading exponent and the first `count` digits of `x = Σ u_i p^i`.
    pub fn digits(&self, x: &Scalar, count: usize) -> Result<DigitExpansion> {
        let start = match self.val(x) {
            ValInt::Infinity => return Err(Error::ZeroInput),
            ValInt::Finite(v) => v,
        };
        let p = Scalar::from(self.p);
        let mut rest = x * &self.pow(-start);
        let mut digits = Vec::with_capacity(count);
        for _ in 0..count {
            let u = self.residue(&rest)?;
            digits.push(u);
            rest = (&rest - &Scalar::from(u))
                .checked_div(&p)
                .expect("p is nonzero");
        }
        Ok(DigitExpansion { start, digits })
    }

    /// Representative of `x` modulo `p^n O_K`: the part of the digit
    /// expansion below `p^n`, as an exact finite sum.
    pub fn truncate_below(&self, x: &Scalar, n: i64) -> Scalar {
        match self.val(x) {
            ValInt::Finite(v) if v < n => {
                let expansion = self.digits(x, (n - v) as usize).expect("nonzero input");
                expansion.partial_sum(self)
            }
            _ => Scalar::zero(),
        }
    }

    /// Smallest valuation among the entries; `+∞` for an all-zero slice.
    pub fn min_val<'a, I>(&self, xs: I) -> ValInt
    where
        I: IntoIterator<Item = &'a Scalar>,
    {
        xs.into_iter()
            .map(|x| self.val(x))
            .min()
            .unwrap_or(ValInt::Infinity)
    }

    /// Sup norm `max |x_i|`.
    pub fn vec_norm(&self, xs: &[Scalar]) -> AbsValue {
        match self.min_val(xs) {
            ValInt::Infinity => AbsValue::Zero,
            ValInt::Finite(v) => AbsValue::Power(-v),
        }
    }
}

impl fmt::Display for FieldConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q_{}", self.p)
    }
}

/// Deterministic trial division; the primes used here are small.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

fn int_valuation(n: &BigInt, p: u64) -> i64 {
    let p = BigUint::from(p);
    let mut m = n.magnitude().clone();
    let mut v = 0;
    loop {
        let (q, r) = m.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        m = q;
        v += 1;
    }
}

pub(crate) fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub(crate) fn mod_inverse(a: u64, p: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128 % p as i128, p as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(p as i128) as u64)
}

/// Valuation: an integer or `+∞` (the valuation of zero).
///
/// Ordered with every finite value below `Infinity`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ValInt {
    Finite(i64),
    Infinity,
}

impl ValInt {
    pub fn finite(self) -> Option<i64> {
        match self {
            ValInt::Finite(v) => Some(v),
            ValInt::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        self == ValInt::Infinity
    }
}

impl Add for ValInt {
    type Output = ValInt;

    fn add(self, rhs: ValInt) -> ValInt {
        match (self, rhs) {
            (ValInt::Finite(a), ValInt::Finite(b)) => ValInt::Finite(a + b),
            _ => ValInt::Infinity,
        }
    }
}

impl fmt::Display for ValInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValInt::Finite(v) => write!(f, "{v}"),
            ValInt::Infinity => write!(f, "inf"),
        }
    }
}

impl Serialize for ValInt {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ValInt::Finite(v) => s.serialize_i64(*v),
            ValInt::Infinity => s.serialize_str("inf"),
        }
    }
}

/// An absolute value `q^e`, or zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum AbsValue {
    Zero,
    Power(i64),
}

impl AbsValue {
    /// Exact rational value given the residue cardinality `q`.
    pub fn to_scalar(self, q: u64) -> Scalar {
        match self {
            AbsValue::Zero => Scalar::zero(),
            AbsValue::Power(e) => FieldConfig { p: q }.pow(e),
        }
    }
}

/// Truncated expansion `Σ_{i ≥ start} u_i p^i` with digits in `{0, …, p−1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DigitExpansion {
    pub start: i64,
    pub digits: Vec<u64>,
}

impl DigitExpansion {
    /// The finite sum of the stored digits.
    pub fn partial_sum(&self, field: &FieldConfig) -> Scalar {
        let mut acc = Scalar::zero();
        let mut power = field.pow(self.start);
        let p = Scalar::from(field.p());
        for &u in &self.digits {
            if u != 0 {
                acc += &(&Scalar::from(u) * &power);
            }
            power = &power * &p;
        }
        acc
    }
}

/// An exact rational number.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Scalar(BigRational);

impl Scalar {
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Result<Self> {
        let denom = denom.into();
        if denom.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Scalar(BigRational::new(numer.into(), denom)))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Scalar(BigRational::from_integer(n))
    }

    pub fn zero() -> Self {
        Scalar(BigRational::zero())
    }

    pub fn one() -> Self {
        Scalar(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn checked_div(&self, rhs: &Scalar) -> Result<Scalar> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Scalar(&self.0 / &rhs.0))
    }

    pub fn inv(&self) -> Result<Scalar> {
        Scalar::one().checked_div(self)
    }

    pub fn signum(&self) -> Ordering {
        match self.0.numer().sign() {
            Sign::Minus => Ordering::Less,
            Sign::NoSign => Ordering::Equal,
            Sign::Plus => Ordering::Greater,
        }
    }

    pub fn abs_archimedean(&self) -> Scalar {
        Scalar(self.0.abs())
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.0
    }
}

impl Default for Scalar {
    fn default() -> Self {
        Scalar::zero()
    }
}

macro_rules! scalar_from_int {
    ($($t:ty),*) => {$(
        impl From<$t> for Scalar {
            fn from(n: $t) -> Self {
                Scalar(BigRational::from_integer(BigInt::from(n)))
            }
        }
    )*};
}

scalar_from_int!(i32, i64, u32, u64, usize);

impl From<BigRational> for Scalar {
    fn from(r: BigRational) -> Self {
        Scalar(r)
    }
}

macro_rules! scalar_binop {
    ($tr:ident, $method:ident) => {
        impl $tr<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                Scalar((&self.0).$method(&rhs.0))
            }
        }
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                Scalar(self.0.$method(rhs.0))
            }
        }
        impl $tr<&Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                Scalar(self.0.$method(&rhs.0))
            }
        }
    };
}

scalar_binop!(Add, add);
scalar_binop!(Sub, sub);
scalar_binop!(Mul, mul);

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, rhs: &Scalar) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&Scalar> for Scalar {
    fn sub_assign(&mut self, rhs: &Scalar) {
        self.0 -= &rhs.0;
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar(-self.0)
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar(-&self.0)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

/// Error from parsing a scalar; `position` is the 0-based byte offset of
/// the offending character.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScalarParseError {
    pub position: usize,
    pub message: String,
}

impl fmt::Display for ScalarParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (offset {})", self.message, self.position)
    }
}

impl std::error::Error for ScalarParseError {}

impl FromStr for Scalar {
    type Err = ScalarParseError;

    /// Accepts `[+-]digits` or `[+-]digits/digits`.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let err = |position: usize, message: &str| ScalarParseError {
            position,
            message: message.to_string(),
        };
        let bytes = s.as_bytes();
        let mut i = 0;
        let negative = match bytes.first() {
            Some(b'-') => {
                i = 1;
                true
            }
            Some(b'+') => {
                i = 1;
                false
            }
            _ => false,
        };
        let num_start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        if i == num_start {
            return Err(err(i, "expected digits"));
        }
        let mut numer: BigInt = s[num_start..i].parse().expect("ascii digits");
        if negative {
            numer = -numer;
        }
        if i == bytes.len() {
            return Ok(Scalar::from_bigint(numer));
        }
        if bytes[i] != b'/' {
            return Err(err(i, "unexpected character"));
        }
        i += 1;
        let den_start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        if i == den_start {
            return Err(err(i, "expected denominator digits"));
        }
        if i != bytes.len() {
            return Err(err(i, "unexpected character"));
        }
        let denom: BigInt = s[den_start..].parse().expect("ascii digits");
        if denom.is_zero() {
            return Err(err(den_start, "zero denominator"));
        }
        Ok(Scalar(BigRational::new(numer, denom)))
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Writes a vector as `(x1, x2, …)`.
pub fn format_vector(xs: &[Scalar]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(", "))
}
