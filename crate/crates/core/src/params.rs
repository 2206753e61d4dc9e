//! The parameter tuple (m, p, γ, k, D, R) of one inequality instance.

use rug::{Integer, Rational};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Clone, Debug)]
pub struct InequalityParams {
    /// Order; odd orders mean |∇Δ^{(m−1)/2}u|.
    pub m: u32,
    pub p: Rational,
    pub gamma: Rational,
    /// Codimension of the singular set.
    pub k: Rational,
    /// Log-normalization scale, `d_scale ≥ radius`.
    pub d_scale: Real,
    pub radius: Real,
}

impl InequalityParams {
    /// Instance on the default domain R = 1, D = e.
    pub fn new(m: u32, p: Rational, gamma: Rational, k: Rational) -> Result<Self> {
        if m == 0 {
            return Err(Error::Domain("m must be at least 1".into()));
        }
        if p <= 1 {
            return Err(Error::Domain(format!("p = {p} must exceed 1")));
        }
        if k <= 0 {
            return Err(Error::Domain(format!("k = {k} must be positive")));
        }
        if gamma < 0 {
            return Err(Error::Domain(format!("gamma = {gamma} must be nonnegative")));
        }
        Ok(Self::unchecked(m, p, gamma, k))
    }

    /// No validation; used for recursions that step outside the public domain (m = 0, shifted γ).
    pub fn unchecked(m: u32, p: Rational, gamma: Rational, k: Rational) -> Self {
        InequalityParams { m, p, gamma, k, d_scale: Real::e(), radius: Real::one() }
    }

    /// Convenience constructor from decimal or fraction strings.
    pub fn parse(m: u32, p: &str, gamma: &str, k: &str) -> Result<Self> {
        Self::new(m, parse_rational(p)?, parse_rational(gamma)?, parse_rational(k)?)
    }

    pub fn with_domain(mut self, radius: Real, d_scale: Real) -> Result<Self> {
        if !radius.is_positive() {
            return Err(Error::Domain("R must be positive".into()));
        }
        if d_scale < radius {
            return Err(Error::Domain("D must be at least R".into()));
        }
        self.radius = radius;
        self.d_scale = d_scale;
        Ok(self)
    }

    pub fn with_order(&self, m: u32) -> Self {
        InequalityParams { m, ..self.clone() }
    }

    pub fn with_gamma(&self, gamma: Rational) -> Self {
        InequalityParams { gamma, ..self.clone() }
    }

    pub fn p_real(&self) -> Real {
        Real::from_rational(&self.p)
    }

    pub fn gamma_real(&self) -> Real {
        Real::from_rational(&self.gamma)
    }

    pub fn k_real(&self) -> Real {
        Real::from_rational(&self.k)
    }

    /// `p` as an integer when it is one.
    pub fn integer_p(&self) -> Option<u32> {
        if *self.p.denom() == 1 {
            self.p.numer().to_u32()
        } else {
            None
        }
    }

    /// k − γ − m·p, positive exactly when the main inequality is claimed.
    pub fn hypothesis_margin(&self) -> Rational {
        Rational::from(&self.k - &self.gamma) - Rational::from(&self.p * self.m)
    }

    pub fn satisfies_hypothesis(&self) -> bool {
        self.hypothesis_margin() > 0
    }

    pub fn summary(&self) -> ParamsSummary {
        ParamsSummary {
            m: self.m,
            p: self.p.to_string(),
            gamma: self.gamma.to_string(),
            k: self.k.to_string(),
            d_scale: self.d_scale.to_string_digits(20),
            radius: self.radius.to_string_digits(20),
        }
    }
}

/// Printable form used in reports.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ParamsSummary {
    pub m: u32,
    pub p: String,
    pub gamma: String,
    pub k: String,
    #[serde(rename = "D")]
    pub d_scale: String,
    #[serde(rename = "R")]
    pub radius: String,
}

/// Parses `"5/2"`, `"2.5"`, `"-3"`, `"1e-3"` or `"1.25E2"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let err = || Error::Parse(s.to_string());
    if s.contains('/') {
        return Rational::parse(s).map(Rational::from).map_err(|_| err());
    }
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| err())?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int_part, frac_part) = match mant.find('.') {
        Some(i) => (&mant[..i], &mant[i + 1..]),
        None => (mant, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let digits = format!("{int_part}{frac_part}");
    let num = Integer::from_str_radix(if digits.is_empty() { "0" } else { &digits }, 10).map_err(|_| err())?;
    let scale = exp - frac_part.len() as i32;
    let mut q = Rational::from(num);
    let pow10 = Integer::from(Integer::u_pow_u(10, scale.unsigned_abs()));
    if scale >= 0 {
        q *= pow10;
    } else {
        q /= pow10;
    }
    if neg {
        q = -q;
    }
    Ok(q)
}

/// Parses a length scale: a decimal, `e`, `e^x`, or `c*e^x`.
pub fn parse_scale(s: &str) -> Result<Real> {
    let s = s.trim();
    let err = || Error::Parse(s.to_string());
    if let Some((c, rest)) = s.split_once('*') {
        return Ok(Real::from_rational(&parse_rational(c)?) * parse_scale(rest)?);
    }
    if s == "e" {
        return Ok(Real::e());
    }
    if let Some(x) = s.strip_prefix("e^") {
        return Ok(Real::from_rational(&parse_rational(x)?).exp());
    }
    let q = parse_rational(s).map_err(|_| err())?;
    Ok(Real::from_rational(&q))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("2.5").unwrap(), Rational::from((5, 2)));
        assert_eq!(parse_rational("5/2").unwrap(), Rational::from((5, 2)));
        assert_eq!(parse_rational("-0.125").unwrap(), Rational::from((-1, 8)));
        assert_eq!(parse_rational("1e-3").unwrap(), Rational::from((1, 1000)));
        assert_eq!(parse_rational("12").unwrap(), Rational::from(12));
        assert_eq!(parse_rational(".5").unwrap(), Rational::from((1, 2)));
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn scale_parsing() {
        let e4 = parse_scale("e^4").unwrap();
        assert!((e4.ln() - 4.0).abs() < 1e-50);
        assert_eq!(parse_scale("2").unwrap().to_f64(), 2.0);
        let two_e = parse_scale("2*e").unwrap();
        assert!((two_e / Real::e() - 2.0).abs() < 1e-50);
    }

    #[test]
    fn validation() {
        assert!(InequalityParams::parse(2, "1", "0", "12").is_err());
        assert!(InequalityParams::parse(0, "2", "0", "12").is_err());
        let p = InequalityParams::parse(2, "2", "0", "12").unwrap();
        assert!(p.satisfies_hypothesis());
        assert_eq!(p.integer_p(), Some(2));
        assert!(p.clone().with_domain(Real::from(2.0), Real::one()).is_err());
    }
}
