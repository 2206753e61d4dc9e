//! Truncated Taylor expansions ("jets") in one variable.
//!
//! Convention: `coeffs[j] = f^{(j)}(center) / j!`.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rug::Rational;

use crate::error::{Error, Result};
use crate::real::Real;

/// Field operations needed by jet arithmetic.
pub trait Scalar: Clone + fmt::Debug {
    fn zero() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_rational(q: &Rational) -> Self;
    fn add_ref(&self, o: &Self) -> Self;
    fn sub_ref(&self, o: &Self) -> Self;
    fn mul_ref(&self, o: &Self) -> Self;
    fn div_ref(&self, o: &Self) -> Self;
    fn is_zero_value(&self) -> bool;
}

impl Scalar for Real {
    fn zero() -> Self {
        Real::zero()
    }
    fn from_i64(v: i64) -> Self {
        Real::from_int(v)
    }
    fn from_rational(q: &Rational) -> Self {
        Real::from_rational(q)
    }
    fn add_ref(&self, o: &Self) -> Self {
        self + o
    }
    fn sub_ref(&self, o: &Self) -> Self {
        self - o
    }
    fn mul_ref(&self, o: &Self) -> Self {
        self * o
    }
    fn div_ref(&self, o: &Self) -> Self {
        self / o
    }
    fn is_zero_value(&self) -> bool {
        self.is_zero()
    }
}

impl Scalar for Rational {
    fn zero() -> Self {
        Rational::new()
    }
    fn from_i64(v: i64) -> Self {
        Rational::from(v)
    }
    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }
    fn add_ref(&self, o: &Self) -> Self {
        Rational::from(self + o)
    }
    fn sub_ref(&self, o: &Self) -> Self {
        Rational::from(self - o)
    }
    fn mul_ref(&self, o: &Self) -> Self {
        Rational::from(self * o)
    }
    fn div_ref(&self, o: &Self) -> Self {
        Rational::from(self / o)
    }
    fn is_zero_value(&self) -> bool {
        *self == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Jet<T = Real> {
    pub center: T,
    pub coeffs: Vec<T>,
}

impl<T: Scalar> Jet<T> {
    pub fn constant(value: T, center: T, order: usize) -> Self {
        let mut coeffs = vec![T::zero(); order + 1];
        coeffs[0] = value;
        Jet { center, coeffs }
    }

    /// The identity function `x ↦ x` expanded at `center`.
    pub fn variable(center: T, order: usize) -> Self {
        let mut j = Jet::constant(center.clone(), center, order);
        if order >= 1 {
            j.coeffs[1] = T::from_i64(1);
        }
        j
    }

    pub fn from_coeffs(center: T, coeffs: Vec<T>) -> Self {
        assert!(!coeffs.is_empty(), "a jet needs at least one coefficient");
        Jet { center, coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn value(&self) -> &T {
        &self.coeffs[0]
    }

    pub fn coeff(&self, j: usize) -> T {
        self.coeffs.get(j).cloned().unwrap_or_else(T::zero)
    }

    /// `f^{(j)}(center)`.
    pub fn deriv(&self, j: usize) -> T {
        let mut fact = T::from_i64(1);
        for i in 2..=j {
            fact = fact.mul_ref(&T::from_i64(i as i64));
        }
        self.coeff(j).mul_ref(&fact)
    }

    pub fn truncate(&self, order: usize) -> Self {
        let n = order.min(self.order());
        Jet { center: self.center.clone(), coeffs: self.coeffs[..=n].to_vec() }
    }

    /// Jet of f' (one order lower).
    pub fn derivative(&self) -> Result<Self> {
        if self.order() == 0 {
            return Err(Error::InsufficientOrder { needed: 1, have: 0 });
        }
        let coeffs = (1..self.coeffs.len())
            .map(|k| self.coeffs[k].mul_ref(&T::from_i64(k as i64)))
            .collect();
        Ok(Jet { center: self.center.clone(), coeffs })
    }

    pub fn scale(&self, c: &T) -> Self {
        Jet { center: self.center.clone(), coeffs: self.coeffs.iter().map(|x| x.mul_ref(c)).collect() }
    }

    pub fn add_scalar(&self, c: &T) -> Self {
        let mut out = self.clone();
        out.coeffs[0] = out.coeffs[0].add_ref(c);
        out
    }

    fn common_order(&self, o: &Self) -> usize {
        self.order().min(o.order())
    }

    pub fn add_jet(&self, o: &Self) -> Self {
        let n = self.common_order(o);
        let coeffs = (0..=n).map(|i| self.coeffs[i].add_ref(&o.coeffs[i])).collect();
        Jet { center: self.center.clone(), coeffs }
    }

    pub fn sub_jet(&self, o: &Self) -> Self {
        let n = self.common_order(o);
        let coeffs = (0..=n).map(|i| self.coeffs[i].sub_ref(&o.coeffs[i])).collect();
        Jet { center: self.center.clone(), coeffs }
    }

    /// Truncated Cauchy product.
    pub fn mul_jet(&self, o: &Self) -> Self {
        let n = self.common_order(o);
        let mut coeffs = vec![T::zero(); n + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(n + 1) {
            if a.is_zero_value() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate().take(n + 1 - i) {
                coeffs[i + j] = coeffs[i + j].add_ref(&a.mul_ref(b));
            }
        }
        Jet { center: self.center.clone(), coeffs }
    }

    pub fn div_jet(&self, o: &Self) -> Result<Self> {
        if o.coeffs[0].is_zero_value() {
            return Err(Error::SingularJet("division by a jet with zero value".into()));
        }
        let n = self.common_order(o);
        let mut q: Vec<T> = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let mut acc = self.coeffs[k].clone();
            for j in 1..=k {
                acc = acc.sub_ref(&o.coeffs[j].mul_ref(&q[k - j]));
            }
            q.push(acc.div_ref(&o.coeffs[0]));
        }
        Ok(Jet { center: self.center.clone(), coeffs: q })
    }

    pub fn recip(&self) -> Result<Self> {
        let one = Jet::constant(T::from_i64(1), self.center.clone(), self.order());
        one.div_jet(self)
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut out = Jet::constant(T::from_i64(1), self.center.clone(), self.order());
        for _ in 0..n {
            out = out.mul_jet(self);
        }
        out
    }

    /// Evaluates the power series with Taylor coefficients `outer` (about `self.value()`)
    /// at this jet, i.e. the jet of `F ∘ f` when `outer` is the jet of `F` at `f(center)`.
    pub fn compose(&self, outer: &[T]) -> Self {
        let n = self.order();
        let mut d = self.clone();
        d.coeffs[0] = T::zero();
        let mut acc = Jet::constant(T::zero(), self.center.clone(), n);
        for c in outer.iter().take(n + 1).rev() {
            acc = acc.mul_jet(&d).add_scalar(c);
        }
        acc
    }
}

impl Jet<Real> {
    /// Natural logarithm; requires a positive value.
    pub fn ln(&self) -> Result<Self> {
        let f0 = &self.coeffs[0];
        if !f0.is_positive() {
            return Err(Error::SingularJet(format!("log of non-positive value {f0:?}")));
        }
        let n = self.order();
        let mut g = vec![Real::zero(); n + 1];
        g[0] = f0.ln();
        for k in 1..=n {
            let mut acc = self.coeffs[k].clone();
            for j in 1..k {
                acc -= &g[j] * &self.coeffs[k - j] * (j as f64) / (k as f64);
            }
            g[k] = acc / f0;
        }
        Ok(Jet { center: self.center.clone(), coeffs: g })
    }

    pub fn exp(&self) -> Self {
        let n = self.order();
        let mut g = vec![Real::zero(); n + 1];
        g[0] = self.coeffs[0].exp();
        for k in 1..=n {
            let mut acc = Real::zero();
            for j in 1..=k {
                acc += &self.coeffs[j] * &g[k - j] * (j as f64);
            }
            g[k] = acc / (k as f64);
        }
        Jet { center: self.center.clone(), coeffs: g }
    }

    /// `f^q` for a positive value.
    pub fn powf(&self, q: &Real) -> Result<Self> {
        let f0 = &self.coeffs[0];
        if !f0.is_positive() {
            return Err(Error::SingularJet(format!("real power of non-positive value {f0:?}")));
        }
        Ok(self.powf_unchecked(q))
    }

    fn powf_unchecked(&self, q: &Real) -> Self {
        let f0 = &self.coeffs[0];
        let n = self.order();
        let mut g = vec![Real::zero(); n + 1];
        g[0] = f0.powf(q);
        for k in 1..=n {
            let mut acc = Real::zero();
            for j in 1..=k {
                let w = q * (j as f64) - ((k - j) as f64);
                acc += w * &self.coeffs[j] * &g[k - j];
            }
            g[k] = acc / (f0 * (k as f64));
        }
        Jet { center: self.center.clone(), coeffs: g }
    }

    /// `|f|^p`; the value must be nonzero.
    pub fn abs_pow(&self, p: &Real) -> Result<Self> {
        let s = self.coeffs[0].signum();
        if s == 0 {
            return Err(Error::SingularJet("|f|^p at a zero of f".into()));
        }
        let a = if s < 0 { -self } else { self.clone() };
        Ok(a.powf_unchecked(p))
    }

    /// `|f|^{p−2} f`, the derivative of `|f|^p / p`.
    pub fn signed_pow(&self, p: &Real) -> Result<Self> {
        let s = self.coeffs[0].signum();
        let j = self.abs_pow(&(p - 1.0))?;
        Ok(if s < 0 { -j } else { j })
    }

    /// |f| on a neighbourhood of a point where f ≠ 0; `None` at a zero (non-smooth point).
    pub fn abs(&self) -> Option<Self> {
        match self.coeffs[0].signum() {
            0 => None,
            s if s < 0 => Some(-self),
            _ => Some(self.clone()),
        }
    }

    /// Max absolute difference between coefficients.
    pub fn max_coeff_diff(&self, o: &Self) -> Real {
        self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| (a - b).abs()).fold(Real::zero(), Real::max)
    }
}

macro_rules! jet_binop {
    ($tr:ident, $m:ident, $call:ident) => {
        impl<T: Scalar> $tr<&Jet<T>> for &Jet<T> {
            type Output = Jet<T>;
            fn $m(self, rhs: &Jet<T>) -> Jet<T> {
                self.$call(rhs)
            }
        }
        impl<T: Scalar> $tr<Jet<T>> for Jet<T> {
            type Output = Jet<T>;
            fn $m(self, rhs: Jet<T>) -> Jet<T> {
                self.$call(&rhs)
            }
        }
        impl<T: Scalar> $tr<&Jet<T>> for Jet<T> {
            type Output = Jet<T>;
            fn $m(self, rhs: &Jet<T>) -> Jet<T> {
                self.$call(rhs)
            }
        }
    };
}

jet_binop!(Add, add, add_jet);
jet_binop!(Sub, sub, sub_jet);
jet_binop!(Mul, mul, mul_jet);

impl<T: Scalar> Div<&Jet<T>> for &Jet<T> {
    type Output = Jet<T>;
    /// Panics on a zero divisor; use [`Jet::div_jet`] for the checked form.
    fn div(self, rhs: &Jet<T>) -> Jet<T> {
        self.div_jet(rhs).expect("jet division by zero value")
    }
}

impl<T: Scalar> Neg for &Jet<T> {
    type Output = Jet<T>;
    fn neg(self) -> Jet<T> {
        self.scale(&T::from_i64(-1))
    }
}

impl<T: Scalar> Neg for Jet<T> {
    type Output = Jet<T>;
    fn neg(self) -> Jet<T> {
        -&self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JetOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Checked binary jet arithmetic: centers and orders must agree.
pub fn jet_arith(a: &Jet, b: &Jet, op: JetOp) -> Result<Jet> {
    if a.order() != b.order() {
        return Err(Error::InsufficientOrder { needed: a.order().max(b.order()), have: a.order().min(b.order()) });
    }
    if a.center != b.center {
        return Err(Error::SingularJet("jets expanded at different centers".into()));
    }
    match op {
        JetOp::Add => Ok(a + b),
        JetOp::Sub => Ok(a - b),
        JetOp::Mul => Ok(a * b),
        JetOp::Div => a.div_jet(b),
    }
}

#[derive(Clone, Debug)]
pub enum JetFn {
    Log,
    Exp,
    Pow(Real),
    AbsPow(Real),
}

pub fn jet_fn(a: &Jet, f: &JetFn) -> Result<Jet> {
    match f {
        JetFn::Log => a.ln(),
        JetFn::Exp => Ok(a.exp()),
        JetFn::Pow(q) => a.powf(q),
        JetFn::AbsPow(p) => a.abs_pow(p),
    }
}
