//! Extended-precision real scalar.
//!
//! `Real` wraps an MPFR float. Every constructor and binary operation rounds
//! to the process-wide working precision, so values built on worker threads
//! agree bit-for-bit with values built on the coordinator.

use std::cmp::Ordering;
use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::atomic::{AtomicU32, Ordering as AtomicOrdering};

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Rational};

/// Default working precision in decimal digits.
pub const DEFAULT_DIGITS: u32 = 60;

const GUARD_BITS: u32 = 16;

static PREC_BITS: AtomicU32 = AtomicU32::new(digits_to_bits(DEFAULT_DIGITS));
static PREC_DIGITS: AtomicU32 = AtomicU32::new(DEFAULT_DIGITS);

const fn digits_to_bits(digits: u32) -> u32 {
    // log2(10) < 3.3219281, rounded up.
    (digits as u64 * 33_219_281 / 10_000_000 + 1) as u32 + GUARD_BITS
}

/// Sets the working precision (decimal digits) for all subsequently created values.
pub fn set_precision_digits(digits: u32) {
    let digits = digits.max(10);
    PREC_DIGITS.store(digits, AtomicOrdering::SeqCst);
    PREC_BITS.store(digits_to_bits(digits), AtomicOrdering::SeqCst);
}

/// Working precision in decimal digits.
pub fn precision_digits() -> u32 {
    PREC_DIGITS.load(AtomicOrdering::Relaxed)
}

/// Working precision in bits.
pub fn precision_bits() -> u32 {
    PREC_BITS.load(AtomicOrdering::Relaxed)
}

/// Relative unit roundoff at the working precision.
pub fn epsilon() -> Real {
    Real::from(2.0).powi(1 - precision_bits() as i32)
}

#[derive(Clone, PartialEq, PartialOrd)]
pub struct Real(pub Float);

impl Real {
    pub fn zero() -> Self {
        Real(Float::new(precision_bits()))
    }

    pub fn one() -> Self {
        Real::from(1.0)
    }

    pub fn from_int(v: i64) -> Self {
        Real(Float::with_val(precision_bits(), v))
    }

    pub fn from_rational(q: &Rational) -> Self {
        Real(Float::with_val(precision_bits(), q))
    }

    /// `num / den` rounded once.
    pub fn ratio(num: i64, den: i64) -> Self {
        Real::from_rational(&Rational::from((num, den)))
    }

    /// Parses a decimal literal such as `"2.5"`, `"1e-3"`, `"-7"`.
    pub fn parse(s: &str) -> Option<Self> {
        let p = Float::parse(s.trim()).ok()?;
        Some(Real(Float::with_val(precision_bits(), p)))
    }

    pub fn pi() -> Self {
        Real(Float::with_val(precision_bits(), Constant::Pi))
    }

    pub fn e() -> Self {
        Real::one().exp()
    }

    pub fn infinity() -> Self {
        Real(Float::with_val(precision_bits(), rug::float::Special::Infinity))
    }

    pub fn neg_infinity() -> Self {
        Real(Float::with_val(precision_bits(), rug::float::Special::NegInfinity))
    }

    pub fn nan() -> Self {
        Real(Float::with_val(precision_bits(), rug::float::Special::Nan))
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    pub fn is_nan(&self) -> bool {
        self.0.is_nan()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_sign_negative() && !self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_sign_positive() && !self.0.is_zero() && !self.0.is_nan()
    }

    /// -1, 0 or 1.
    pub fn signum(&self) -> i32 {
        match self.0.cmp0() {
            Some(Ordering::Less) => -1,
            Some(Ordering::Greater) => 1,
            _ => 0,
        }
    }

    fn unary(&self, f: impl FnOnce(&mut Float)) -> Self {
        let mut x = Float::with_val(precision_bits(), &self.0);
        f(&mut x);
        Real(x)
    }

    pub fn abs(&self) -> Self {
        self.unary(|x| x.abs_mut())
    }

    pub fn ln(&self) -> Self {
        self.unary(|x| x.ln_mut())
    }

    pub fn ln_1p(&self) -> Self {
        self.unary(|x| x.ln_1p_mut())
    }

    pub fn exp(&self) -> Self {
        self.unary(|x| x.exp_mut())
    }

    pub fn exp_m1(&self) -> Self {
        self.unary(|x| x.exp_m1_mut())
    }

    pub fn sqrt(&self) -> Self {
        self.unary(|x| x.sqrt_mut())
    }

    pub fn recip(&self) -> Self {
        self.unary(|x| x.recip_mut())
    }

    pub fn sinh(&self) -> Self {
        self.unary(|x| x.sinh_mut())
    }

    pub fn cosh(&self) -> Self {
        self.unary(|x| x.cosh_mut())
    }

    pub fn tanh(&self) -> Self {
        self.unary(|x| x.tanh_mut())
    }

    pub fn gamma(&self) -> Self {
        self.unary(|x| x.gamma_mut())
    }

    /// Upper incomplete gamma Γ(self, x).
    pub fn gamma_inc(&self, x: &Real) -> Self {
        Real(Float::with_val(precision_bits(), self.0.gamma_inc_ref(&x.0)))
    }

    pub fn powi(&self, n: i32) -> Self {
        Real(Float::with_val(precision_bits(), (&self.0).pow(n)))
    }

    /// `self^q` for `self ≥ 0` (MPFR semantics otherwise).
    pub fn powf(&self, q: &Real) -> Self {
        Real(Float::with_val(precision_bits(), (&self.0).pow(&q.0)))
    }

    /// `|self|^q`, with `0^q = 0` for `q > 0`.
    pub fn abs_pow(&self, q: &Real) -> Self {
        self.abs().powf(q)
    }

    pub fn max(self, other: Real) -> Real {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Real) -> Real {
        if other < self {
            other
        } else {
            self
        }
    }

    /// Decimal string with `digits` significant digits.
    pub fn to_string_digits(&self, digits: usize) -> String {
        if self.0.is_zero() {
            return "0".to_string();
        }
        if !self.0.is_finite() {
            return self.0.to_string();
        }
        self.0.to_string_radix(10, Some(digits))
    }

    /// Decimal string that reads back to the same value at the working precision.
    pub fn to_decimal(&self) -> String {
        let digits = (f64::from(precision_bits()) * std::f64::consts::LOG10_2).ceil() as usize + 1;
        self.to_string_digits(digits)
    }
}

impl Default for Real {
    fn default() -> Self {
        Real::zero()
    }
}

impl From<f64> for Real {
    fn from(v: f64) -> Self {
        Real(Float::with_val(precision_bits(), v))
    }
}

impl From<i32> for Real {
    fn from(v: i32) -> Self {
        Real(Float::with_val(precision_bits(), v))
    }
}

impl From<&Rational> for Real {
    fn from(q: &Rational) -> Self {
        Real::from_rational(q)
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_string_digits(25))
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match f.precision() {
            Some(d) => write!(f, "{}", self.to_string_digits(d.max(1))),
            None => write!(f, "{}", self.to_decimal()),
        }
    }
}

impl PartialEq<f64> for Real {
    fn eq(&self, other: &f64) -> bool {
        self.0 == *other
    }
}

impl PartialOrd<f64> for Real {
    fn partial_cmp(&self, other: &f64) -> Option<Ordering> {
        self.0.partial_cmp(other)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $atr:ident, $am:ident, $op:tt) => {
        impl $tr<Real> for Real {
            type Output = Real;
            fn $m(mut self, rhs: Real) -> Real {
                self.0 = Float::with_val(precision_bits(), &self.0 $op &rhs.0);
                self
            }
        }
        impl $tr<&Real> for Real {
            type Output = Real;
            fn $m(mut self, rhs: &Real) -> Real {
                self.0 = Float::with_val(precision_bits(), &self.0 $op &rhs.0);
                self
            }
        }
        impl $tr<Real> for &Real {
            type Output = Real;
            fn $m(self, rhs: Real) -> Real {
                Real(Float::with_val(precision_bits(), &self.0 $op &rhs.0))
            }
        }
        impl $tr<&Real> for &Real {
            type Output = Real;
            fn $m(self, rhs: &Real) -> Real {
                Real(Float::with_val(precision_bits(), &self.0 $op &rhs.0))
            }
        }
        impl $tr<f64> for Real {
            type Output = Real;
            fn $m(self, rhs: f64) -> Real {
                Real(Float::with_val(precision_bits(), &self.0 $op rhs))
            }
        }
        impl $tr<f64> for &Real {
            type Output = Real;
            fn $m(self, rhs: f64) -> Real {
                Real(Float::with_val(precision_bits(), &self.0 $op rhs))
            }
        }
        impl $tr<Real> for f64 {
            type Output = Real;
            fn $m(self, rhs: Real) -> Real {
                Real(Float::with_val(precision_bits(), self $op &rhs.0))
            }
        }
        impl $tr<&Real> for f64 {
            type Output = Real;
            fn $m(self, rhs: &Real) -> Real {
                Real(Float::with_val(precision_bits(), self $op &rhs.0))
            }
        }
        impl $atr<Real> for Real {
            fn $am(&mut self, rhs: Real) {
                self.0 = Float::with_val(precision_bits(), &self.0 $op &rhs.0);
            }
        }
        impl $atr<&Real> for Real {
            fn $am(&mut self, rhs: &Real) {
                self.0 = Float::with_val(precision_bits(), &self.0 $op &rhs.0);
            }
        }
        impl $atr<f64> for Real {
            fn $am(&mut self, rhs: f64) {
                self.0 = Float::with_val(precision_bits(), &self.0 $op rhs);
            }
        }
    };
}

binop!(Add, add, AddAssign, add_assign, +);
binop!(Sub, sub, SubAssign, sub_assign, -);
binop!(Mul, mul, MulAssign, mul_assign, *);
binop!(Div, div, DivAssign, div_assign, /);

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(-self.0)
    }
}

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(Float::with_val(precision_bits(), -&self.0))
    }
}

impl Sum for Real {
    fn sum<I: Iterator<Item = Real>>(iter: I) -> Real {
        iter.fold(Real::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Real> for Real {
    fn sum<I: Iterator<Item = &'a Real>>(iter: I) -> Real {
        iter.fold(Real::zero(), |acc, x| acc + x)
    }
}

impl Product for Real {
    fn product<I: Iterator<Item = Real>>(iter: I) -> Real {
        iter.fold(Real::one(), |acc, x| acc * x)
    }
}

impl<'a> Product<&'a Real> for Real {
    fn product<I: Iterator<Item = &'a Real>>(iter: I) -> Real {
        iter.fold(Real::one(), |acc, x| acc * x)
    }
}

impl serde::Serialize for Real {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_decimal())
    }
}

/// Relative discrepancy `|a − b| / max(|a|, |b|, scale)`; `scale` guards identities whose sides vanish.
pub fn rel_diff(a: &Real, b: &Real, scale: &Real) -> Real {
    let d = (a - b).abs();
    let s = a.abs().max(b.abs()).max(scale.abs());
    if s.is_zero() {
        d
    } else {
        d / s
    }
}
