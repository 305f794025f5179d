//! Numeric backends for clique weights.
//!
//! Every weight-moving routine is generic over [`Scalar`]. The exact backend
//! ([`Rational`]) is the default and the only one whose results are compared
//! with zero tolerance; `f64` exists for large instances where rational
//! denominators make the exact pipeline impractical.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational in canonical form (reduced, positive denominator).
pub type Rational = BigRational;

/// Absolute threshold under which `f64` values are treated as zero by the splitter.
pub const FLOAT_NEGLIGIBLE: f64 = 1e-12;

/// Comparison slack for `f64` bound checks.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

/// Which numeric backend a computation runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Backend {
    Exact,
    Float,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Exact => "exact",
            Backend::Float => "float",
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" | "rational" => Ok(Backend::Exact),
            "float" | "f64" => Ok(Backend::Float),
            other => Err(format!("unknown backend `{other}` (expected exact|float)")),
        }
    }
}

pub trait Scalar: Clone + Debug + PartialEq + Send + Sync + 'static {
    const BACKEND: Backend;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    /// `num / den`; `den` must be nonzero.
    fn ratio(num: i64, den: i64) -> Self;
    fn from_rational(q: &Rational) -> Self;
    fn to_f64(&self) -> f64;

    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn div(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn abs(&self) -> Self;

    fn add_assign(&mut self, other: &Self);
    /// `self += factor * k`
    fn add_scaled_int(&mut self, factor: &Self, k: i64);

    fn is_zero(&self) -> bool;
    /// Exact zero for rationals; `|x| <= FLOAT_NEGLIGIBLE` for floats.
    fn is_negligible(&self) -> bool;
    fn signum(&self) -> i32;
    fn lt(&self, other: &Self) -> bool;

    /// Equality up to the backend's comparison slack.
    fn approx_eq(&self, other: &Self) -> bool;
    /// `self <= bound` up to the backend's comparison slack.
    fn approx_le(&self, bound: &Self) -> bool;

    /// Stable text form (`num/den` for rationals, shortest round-trip for floats).
    fn to_text(&self) -> String;

    fn mul_int(&self, k: i64) -> Self {
        self.mul(&Self::from_i64(k))
    }

    fn div_int(&self, k: i64) -> Self {
        self.div(&Self::from_i64(k))
    }
}

impl Scalar for Rational {
    const BACKEND: Backend = Backend::Exact;

    fn zero() -> Self {
        Zero::zero()
    }

    fn one() -> Self {
        One::one()
    }

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }

    fn to_f64(&self) -> f64 {
        // Ratio::to_f64 handles huge numerators/denominators without overflow.
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn add(&self, other: &Self) -> Self {
        self + other
    }

    fn sub(&self, other: &Self) -> Self {
        self - other
    }

    fn mul(&self, other: &Self) -> Self {
        self * other
    }

    fn div(&self, other: &Self) -> Self {
        self / other
    }

    fn neg(&self) -> Self {
        -self
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }

    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }

    fn add_scaled_int(&mut self, factor: &Self, k: i64) {
        match k {
            0 => {}
            1 => *self += factor,
            -1 => *self -= factor,
            _ => *self += factor * BigInt::from(k),
        }
    }

    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }

    fn is_negligible(&self) -> bool {
        Zero::is_zero(self)
    }

    fn signum(&self) -> i32 {
        if Zero::is_zero(self) {
            0
        } else if Signed::is_negative(self) {
            -1
        } else {
            1
        }
    }

    fn lt(&self, other: &Self) -> bool {
        self < other
    }

    fn approx_eq(&self, other: &Self) -> bool {
        self == other
    }

    fn approx_le(&self, bound: &Self) -> bool {
        self <= bound
    }

    fn to_text(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }

    fn mul_int(&self, k: i64) -> Self {
        self * BigInt::from(k)
    }

    fn div_int(&self, k: i64) -> Self {
        self / BigInt::from(k)
    }
}

impl Scalar for f64 {
    const BACKEND: Backend = Backend::Float;

    fn zero() -> Self {
        0.0
    }

    fn one() -> Self {
        1.0
    }

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn from_rational(q: &Rational) -> Self {
        ToPrimitive::to_f64(q).unwrap_or(f64::NAN)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn add(&self, other: &Self) -> Self {
        self + other
    }

    fn sub(&self, other: &Self) -> Self {
        self - other
    }

    fn mul(&self, other: &Self) -> Self {
        self * other
    }

    fn div(&self, other: &Self) -> Self {
        self / other
    }

    fn neg(&self) -> Self {
        -self
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }

    fn add_scaled_int(&mut self, factor: &Self, k: i64) {
        *self += factor * k as f64;
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }

    fn is_negligible(&self) -> bool {
        f64::abs(*self) <= FLOAT_NEGLIGIBLE
    }

    fn signum(&self) -> i32 {
        if *self > 0.0 {
            1
        } else if *self < 0.0 {
            -1
        } else {
            0
        }
    }

    fn lt(&self, other: &Self) -> bool {
        self < other
    }

    fn approx_eq(&self, other: &Self) -> bool {
        f64::abs(self - other) <= FLOAT_TOLERANCE
    }

    fn approx_le(&self, bound: &Self) -> bool {
        *self <= bound + FLOAT_TOLERANCE
    }

    fn to_text(&self) -> String {
        format!("{self:?}")
    }
}

/// Parses `num/den`, an integer, or a decimal literal into an exact rational.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num: BigInt = num.trim().parse().ok()?;
        let den: BigInt = den.trim().parse().ok()?;
        if den.is_zero() {
            return None;
        }
        return Some(BigRational::new(num, den));
    }
    if let Ok(int) = text.parse::<BigInt>() {
        return Some(BigRational::from_integer(int));
    }
    // Decimal or scientific notation: go through the exact binary value.
    let value: f64 = text.parse().ok()?;
    BigRational::from_float(value)
}
