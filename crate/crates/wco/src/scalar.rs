//! Scalar fields for the two computation modes: exact rationals and f64.
//!
//! Every quantity in the calculus is a nonnegative scalar or a signed
//! combination of them, so the whole crate is generic over [`Scalar`].
//! Extended values (`+inf`, from divergent tail series) live in [`Ext`].

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

/// Strict sign of a scalar, after tolerance snapping in float mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

/// A sign decision plus whether it was snapped to zero by the tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignInfo {
    pub sign: Sign,
    /// True when a nonzero float was classified as zero because |x| <= tol.
    pub fuzzy: bool,
}

impl SignInfo {
    fn exact(sign: Sign) -> Self {
        SignInfo { sign, fuzzy: false }
    }

    pub fn is_positive(&self) -> bool {
        self.sign == Sign::Positive
    }

    pub fn is_negative(&self) -> bool {
        self.sign == Sign::Negative
    }

    pub fn is_zero(&self) -> bool {
        self.sign == Sign::Zero
    }
}

/// Field of coefficients the analysis runs in.
///
/// `BigRational` gives exact verdicts; `f64` trades exactness for irrational
/// inputs, with sign decisions taken against an explicit tolerance.
pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// True when comparisons are exact and tolerances are ignored.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn from_int(n: i64) -> Self;
    fn ratio(numer: i64, denom: i64) -> Self;
    fn abs(&self) -> Self;

    /// Integer power; negative exponents require a nonzero base.
    fn powi(&self, exponent: i32) -> Self;

    /// Sign classification. Rational mode is exact; float mode snaps
    /// |x| <= tol to zero and flags the snap.
    fn sign_with(&self, tol: f64) -> SignInfo;

    /// Nearest representable value of an f64, for tolerance thresholds.
    fn from_f64_lossy(value: f64) -> Self;

    /// True for values a validated system may contain (floats must be finite).
    fn is_admissible(&self) -> bool;

    /// Parses a scalar literal: `p/q` or integer always; decimals only in
    /// float mode. The error is the offending literal.
    fn parse_literal(text: &str) -> std::result::Result<Self, String>;

    /// Canonical rendering: `p/q` for rationals, shortest round-trip
    /// decimal for floats.
    fn render(&self) -> String;

    /// Exact sum of the geometric series sum_{t>=0} a * r^t with a >= 0
    /// and r > 0; `Infinite` on divergence.
    fn geometric_sum(a: &Self, r: &Self) -> Ext<Self>;
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn zero() -> Self {
        <BigRational as Zero>::zero()
    }

    fn one() -> Self {
        <BigRational as One>::one()
    }

    fn is_zero(&self) -> bool {
        <BigRational as Zero>::is_zero(self)
    }

    fn from_int(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn ratio(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        BigRational::new(BigInt::from(numer), BigInt::from(denom))
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }

    fn powi(&self, exponent: i32) -> Self {
        if exponent == 0 {
            return <Self as Scalar>::one();
        }
        let positive = exponent.unsigned_abs();
        let mut acc = <Self as Scalar>::one();
        let mut base = self.clone();
        let mut e = positive;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        if exponent < 0 {
            assert!(!Scalar::is_zero(&acc), "negative power of zero");
            acc = <Self as Scalar>::one() / acc;
        }
        acc
    }

    fn sign_with(&self, _tol: f64) -> SignInfo {
        if Signed::is_positive(self) {
            SignInfo::exact(Sign::Positive)
        } else if Signed::is_negative(self) {
            SignInfo::exact(Sign::Negative)
        } else {
            SignInfo::exact(Sign::Zero)
        }
    }

    fn from_f64_lossy(value: f64) -> Self {
        BigRational::from_float(value).unwrap_or_else(<Self as Scalar>::zero)
    }

    fn is_admissible(&self) -> bool {
        true
    }

    fn parse_literal(text: &str) -> std::result::Result<Self, String> {
        let text = text.trim();
        if let Some((p, q)) = text.split_once('/') {
            let numer: BigInt = p.trim().parse().map_err(|_| text.to_owned())?;
            let denom: BigInt = q.trim().parse().map_err(|_| text.to_owned())?;
            if denom.is_zero() {
                return Err(text.to_owned());
            }
            return Ok(BigRational::new(numer, denom));
        }
        let n: BigInt = text.parse().map_err(|_| text.to_owned())?;
        Ok(BigRational::from_integer(n))
    }

    fn render(&self) -> String {
        if self.is_integer() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }

    fn geometric_sum(a: &Self, r: &Self) -> Ext<Self> {
        debug_assert!(!Signed::is_negative(a));
        debug_assert!(Signed::is_positive(r));
        if Scalar::is_zero(a) {
            Ext::Finite(<Self as Scalar>::zero())
        } else if r < &<Self as Scalar>::one() {
            Ext::Finite(a / (<Self as Scalar>::one() - r))
        } else {
            Ext::Infinite
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }

    fn one() -> Self {
        1.0
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }

    fn from_int(n: i64) -> Self {
        n as f64
    }

    fn ratio(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        numer as f64 / denom as f64
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn powi(&self, exponent: i32) -> Self {
        f64::powi(*self, exponent)
    }

    fn sign_with(&self, tol: f64) -> SignInfo {
        debug_assert!(self.is_finite());
        if f64::abs(*self) <= tol {
            SignInfo {
                sign: Sign::Zero,
                fuzzy: *self != 0.0,
            }
        } else if *self > 0.0 {
            SignInfo::exact(Sign::Positive)
        } else {
            SignInfo::exact(Sign::Negative)
        }
    }

    fn from_f64_lossy(value: f64) -> Self {
        value
    }

    fn is_admissible(&self) -> bool {
        self.is_finite()
    }

    fn parse_literal(text: &str) -> std::result::Result<Self, String> {
        let text = text.trim();
        if let Some((p, q)) = text.split_once('/') {
            let numer: f64 = p.trim().parse().map_err(|_| text.to_owned())?;
            let denom: f64 = q.trim().parse().map_err(|_| text.to_owned())?;
            if denom == 0.0 {
                return Err(text.to_owned());
            }
            return Ok(numer / denom);
        }
        let value: f64 = text.parse().map_err(|_| text.to_owned())?;
        if !value.is_finite() {
            return Err(text.to_owned());
        }
        Ok(value)
    }

    fn render(&self) -> String {
        format!("{self}")
    }

    fn geometric_sum(a: &Self, r: &Self) -> Ext<Self> {
        debug_assert!(*a >= 0.0 && *r > 0.0);
        if *a == 0.0 {
            Ext::Finite(0.0)
        } else if *r < 1.0 {
            Ext::Finite(a / (1.0 - r))
        } else {
            Ext::Infinite
        }
    }
}

/// Extended nonnegative-capable scalar: a finite value or `+inf`.
///
/// Arithmetic follows the conventions of the calculus: infinity absorbs
/// addition and multiplication by positives, `0 * inf = 0`, and subtraction
/// involving infinity is refused (callers map it to an error).
#[derive(Debug, Clone, PartialEq)]
pub enum Ext<K> {
    Finite(K),
    Infinite,
}

impl<K: Scalar> Ext<K> {
    pub fn zero() -> Self {
        Ext::Finite(K::zero())
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Ext::Infinite)
    }

    pub fn finite(&self) -> Option<&K> {
        match self {
            Ext::Finite(v) => Some(v),
            Ext::Infinite => None,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        match (self, other) {
            (Ext::Finite(a), Ext::Finite(b)) => Ext::Finite(a.clone() + b.clone()),
            _ => Ext::Infinite,
        }
    }

    /// Multiplication with the `0 * inf = 0` convention.
    pub fn mul(&self, other: &Self) -> Self {
        match (self, other) {
            (Ext::Finite(a), Ext::Finite(b)) => Ext::Finite(a.clone() * b.clone()),
            (Ext::Finite(a), Ext::Infinite) | (Ext::Infinite, Ext::Finite(a)) => {
                if a.is_zero() {
                    Ext::zero()
                } else {
                    Ext::Infinite
                }
            }
            (Ext::Infinite, Ext::Infinite) => Ext::Infinite,
        }
    }

    /// Finite subtraction; `None` when either side is infinite.
    pub fn checked_sub(&self, other: &Self) -> Option<K> {
        match (self, other) {
            (Ext::Finite(a), Ext::Finite(b)) => Some(a.clone() - b.clone()),
            _ => None,
        }
    }

    /// Division by a strictly positive finite scalar.
    pub fn div_by(&self, denom: &K) -> Self {
        match self {
            Ext::Finite(a) => Ext::Finite(a.clone() / denom.clone()),
            Ext::Infinite => Ext::Infinite,
        }
    }

    pub fn sign_with(&self, tol: f64) -> SignInfo {
        match self {
            Ext::Finite(v) => v.sign_with(tol),
            Ext::Infinite => SignInfo {
                sign: Sign::Positive,
                fuzzy: false,
            },
        }
    }

    pub fn render(&self) -> String {
        match self {
            Ext::Finite(v) => v.render(),
            Ext::Infinite => "inf".to_owned(),
        }
    }
}

impl<K: Scalar> PartialOrd for Ext<K> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        use std::cmp::Ordering;
        match (self, other) {
            (Ext::Finite(a), Ext::Finite(b)) => a.partial_cmp(b),
            (Ext::Finite(_), Ext::Infinite) => Some(Ordering::Less),
            (Ext::Infinite, Ext::Finite(_)) => Some(Ordering::Greater),
            (Ext::Infinite, Ext::Infinite) => Some(Ordering::Equal),
        }
    }
}

impl<K: Scalar> fmt::Display for Ext<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

/// Exact binomial coefficient by the Pascal recurrence.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let mut row: Vec<u128> = vec![1];
    for _ in 0..n {
        let mut next = vec![1u128; row.len() + 1];
        for i in 1..row.len() {
            next[i] = row[i - 1] + row[i];
        }
        row = next;
    }
    u64::try_from(row[k]).expect("binomial overflow")
}
