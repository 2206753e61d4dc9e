//! Closed-form constants A', A'', A, B, Q, the parameter condition on (p, γ),
//! and the coefficient identities behind them.

mod alpha;
mod expansion;
mod identities;
mod proof;

pub use alpha::{alpha_poly_jet, alpha_poly_jet_exact, critical_exponent, order_poly_jet, order_roots};
pub use expansion::{
    cancellation_report, expansion_a_ij, CancellationCheck, CancellationReport, ExpansionCoefficients,
};
pub use identities::{
    verify_constant_identities, verify_proof_coefficients, verify_radio, verify_recursions, IdentityRecord,
    IdentityReport,
};
pub use proof::{
    lemma_new_sign, lemma_new_sign_beta_coefficient, lemma_new_sign_closed_form, proof_r_coefficients,
    ProofCoefficients,
};

use rug::ops::Pow;
use rug::Rational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::InequalityParams;
use crate::real::Real;

/// Bases of A': (k − γ − (m−2i)p)/p for i = 0..⌊(m−1)/2⌋. Empty for m = 0.
pub fn a_prime_bases(params: &InequalityParams) -> Vec<Rational> {
    let InequalityParams { m, p, gamma, k, .. } = params;
    if *m == 0 {
        return Vec::new();
    }
    (0..=(m - 1) / 2)
        .map(|i| {
            let shift = Rational::from(p * (i64::from(*m) - 2 * i64::from(i)));
            Rational::from(k - gamma) - shift
        })
        .map(|num| num / p)
        .collect()
}

/// Bases of A'': (pk − k + γ + (m−2j)p)/p for j = 1..⌊m/2⌋.
pub fn a_double_prime_bases(params: &InequalityParams) -> Vec<Rational> {
    let InequalityParams { m, p, gamma, k, .. } = params;
    (1..=m / 2)
        .map(|j| {
            let shift = Rational::from(p * (i64::from(*m) - 2 * i64::from(j)));
            Rational::from(p * k) - k + gamma + shift
        })
        .map(|num| num / p)
        .collect()
}

fn all_bases(params: &InequalityParams) -> Vec<Rational> {
    let mut b = a_prime_bases(params);
    b.extend(a_double_prime_bases(params));
    b
}

fn check_domain(params: &InequalityParams) -> Result<()> {
    if params.p <= 1 {
        return Err(Error::Domain(format!("p = {} must exceed 1", params.p)));
    }
    if params.m == 0 {
        return Err(Error::Domain("m must be at least 1".into()));
    }
    Ok(())
}

/// `base^p` with the sign of `base` when p is an integer; an error for a negative base otherwise.
pub fn signed_power(base: &Rational, p: &Rational) -> Result<Real> {
    if *p.denom() == 1 {
        if let Some(e) = p.numer().to_i32() {
            return Ok(Real::from_rational(&Rational::from(base.pow(e))));
        }
    }
    if *base < 0 {
        return Err(Error::UndefinedPower { base: base.to_string(), exponent: p.to_string() });
    }
    Ok(Real::from_rational(base).powf(&Real::from_rational(p)))
}

/// `|base|^p`.
pub fn abs_power(base: &Rational, p: &Rational) -> Real {
    signed_power(&Rational::from(base.abs_ref()), p).expect("nonnegative base")
}

fn product_power(bases: &[Rational], p: &Rational) -> Result<Real> {
    bases.iter().try_fold(Real::one(), |acc, b| Ok(acc * signed_power(b, p)?))
}

fn inverse_square_sum(bases: &[Rational]) -> Result<Rational> {
    let mut s = Rational::new();
    for b in bases {
        if *b == 0 {
            return Err(Error::DivisionByZero(format!("a bracketed factor of B vanishes (base {b})")));
        }
        s += Rational::from(b * b).recip();
    }
    Ok(s)
}

fn b_prefactor(p: &Rational) -> Rational {
    Rational::from(p - 1u32) / Rational::from(p * 2u32)
}

/// A(m,γ) including the empty-product convention; m = 0 gives 1.
pub(crate) fn a_value(params: &InequalityParams) -> Result<Real> {
    product_power(&all_bases(params), &params.p)
}

pub(crate) fn b_value(params: &InequalityParams) -> Result<Real> {
    let bases = all_bases(params);
    let s = inverse_square_sum(&bases)?;
    Ok(a_value(params)? * Real::from_rational(&(b_prefactor(&params.p) * s)))
}

pub fn constant_a_prime(params: &InequalityParams) -> Result<Real> {
    check_domain(params)?;
    product_power(&a_prime_bases(params), &params.p)
}

pub fn constant_a_double_prime(params: &InequalityParams) -> Result<Real> {
    check_domain(params)?;
    product_power(&a_double_prime_bases(params), &params.p)
}

/// A(m,γ) = A'·A''. Errors for p ≤ 1, m = 0, or a negative base under a non-integer p.
pub fn constant_a(params: &InequalityParams) -> Result<Real> {
    check_domain(params)?;
    a_value(params)
}

/// B(m,γ) = (p−1)/(2p)·A·Σ base^{−2}.
pub fn constant_b(params: &InequalityParams) -> Result<Real> {
    check_domain(params)?;
    b_value(params)
}

/// |A(m,γ)|, defined for every p > 1.
pub fn abs_constant_a(params: &InequalityParams) -> Result<Real> {
    check_domain(params)?;
    Ok(all_bases(params).iter().map(|b| abs_power(b, &params.p)).product())
}

/// |B(m,γ)|.
pub fn abs_constant_b(params: &InequalityParams) -> Result<Real> {
    let a = abs_constant_a(params)?;
    let s = inverse_square_sum(&all_bases(params))?;
    Ok(a * Real::from_rational(&(b_prefactor(&params.p) * s)))
}

/// Q = (k−γ−2p)(pk−k+γ)/p².
pub fn q_factor(params: &InequalityParams) -> Rational {
    let InequalityParams { p, gamma, k, .. } = params;
    let a = Rational::from(k - gamma) - Rational::from(p * 2u32);
    let b = Rational::from(p * k) - k + gamma;
    a * b / Rational::from(p * p)
}

/// Q^p, asserted equal to A(2,γ).
pub fn q_pow_p(params: &InequalityParams) -> Result<Real> {
    signed_power(&q_factor(params), &params.p)
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct StarVerdict {
    pub ok: bool,
    #[serde(serialize_with = "ser_rational")]
    pub gamma_crit: Rational,
    /// p exceeds the largest root (13+√105)/4 of 2p²−13p+8.
    pub p_above_threshold: bool,
}

fn ser_rational<S: serde::Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

/// γ_crit = (3pk − 8p² − 2k + 6p)/(4p − 2).
pub fn critical_gamma(p: &Rational, k: &Rational) -> Rational {
    let num = Rational::from(p * k) * 3u32 - Rational::from(p * p) * 8u32 - Rational::from(k * 2u32)
        + Rational::from(p * 6u32);
    num / (Rational::from(p * 4u32) - 2u32)
}

/// p > (13+√105)/4, decided exactly: 4p − 13 > 0 and (4p−13)² > 105.
pub fn p_above_star_threshold(p: &Rational) -> bool {
    let d = Rational::from(p * 4u32) - 13u32;
    d > 0 && Rational::from(&d * &d) > 105
}

/// The parameter condition under which the series improvement is proved.
pub fn star_condition(params: &InequalityParams) -> StarVerdict {
    let gamma_crit = critical_gamma(&params.p, &params.k);
    let above = p_above_star_threshold(&params.p);
    let m = params.m;
    let ok = above
        || m == 1
        || (m.is_multiple_of(2) && params.gamma != gamma_crit)
        || (m % 2 == 1 && m >= 3 && Rational::from(&params.gamma + &params.p) != gamma_crit);
    StarVerdict { ok, gamma_crit, p_above_threshold: above }
}

/// Exact values, available when p is an integer.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactConstants {
    pub a_prime: Rational,
    pub a_double_prime: Rational,
    pub a: Rational,
    pub b: Option<Rational>,
    pub q: Rational,
}

pub fn exact_constants(params: &InequalityParams) -> Option<ExactConstants> {
    let e = params.integer_p()? as i32;
    let prod = |bases: &[Rational]| bases.iter().fold(Rational::from(1), |acc, b| acc * Rational::from(b.pow(e)));
    let a_prime = prod(&a_prime_bases(params));
    let a_double_prime = prod(&a_double_prime_bases(params));
    let a = Rational::from(&a_prime * &a_double_prime);
    let b = inverse_square_sum(&all_bases(params)).ok().map(|s| b_prefactor(&params.p) * s * &a);
    Some(ExactConstants { a_prime, a_double_prime, a, b, q: q_factor(params) })
}

#[derive(Clone, Debug)]
pub struct SharpConstants {
    /// Signed values; `None` when a negative base meets a non-integer p.
    pub a_prime: Option<Real>,
    pub a_double_prime: Option<Real>,
    pub a: Option<Real>,
    pub b: Option<Real>,
    pub abs_a: Real,
    /// `None` when a bracketed factor vanishes.
    pub abs_b: Option<Real>,
    pub q: Rational,
    pub star: StarVerdict,
    pub exact: Option<ExactConstants>,
}

pub fn sharp_constants(params: &InequalityParams) -> Result<SharpConstants> {
    check_domain(params)?;
    Ok(SharpConstants {
        a_prime: constant_a_prime(params).ok(),
        a_double_prime: constant_a_double_prime(params).ok(),
        a: constant_a(params).ok(),
        b: constant_b(params).ok(),
        abs_a: abs_constant_a(params)?,
        abs_b: abs_constant_b(params).ok(),
        q: q_factor(params),
        star: star_condition(params),
        exact: exact_constants(params),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pr(m: u32, p: &str, g: &str, k: &str) -> InequalityParams {
        InequalityParams::parse(m, p, g, k).unwrap()
    }

    #[test]
    fn classical_values() {
        assert_eq!(constant_a(&pr(2, "2", "0", "8")).unwrap(), 64.0);
        assert_eq!(constant_a(&pr(1, "2", "0", "8")).unwrap(), 9.0);
        assert_eq!(constant_a(&pr(4, "2", "0", "12")).unwrap(), 147456.0);
        assert_eq!(constant_b(&pr(2, "2", "0", "12")).unwrap(), 13.0);
        assert_eq!(constant_b(&pr(2, "2", "0", "8")).unwrap(), 5.0);
        assert_eq!(constant_b(&pr(1, "2", "0", "8")).unwrap(), 0.25);
    }

    #[test]
    fn q_examples() {
        assert_eq!(q_factor(&pr(2, "2", "0", "8")), 8);
        assert_eq!(q_factor(&pr(2, "2", "0", "12")), 24);
        let q = pr(2, "2", "4", "12");
        assert_eq!(q_factor(&q), 16);
        assert_eq!(q_pow_p(&q).unwrap(), constant_a(&q).unwrap());
    }

    #[test]
    fn star_examples() {
        let v = star_condition(&pr(2, "2", "0", "5"));
        assert!(!v.ok);
        assert_eq!(v.gamma_crit, 0);
        assert!(star_condition(&pr(2, "6", "0", "5")).ok);
        let v = star_condition(&pr(2, "2", "0", "8"));
        assert!(v.ok);
        assert_eq!(v.gamma_crit, 2);
        assert!(star_condition(&pr(1, "2", "0", "5")).ok);
        // (13+√105)/4 ≈ 5.8117
        assert!(!p_above_star_threshold(&Rational::from((58, 10))));
        assert!(p_above_star_threshold(&Rational::from((582, 100))));
    }

    #[test]
    fn domain_errors() {
        let mut q = pr(2, "2", "0", "12");
        q.p = Rational::from(1);
        assert!(matches!(constant_a(&q), Err(Error::Domain(_))));
        let z = InequalityParams::unchecked(0, Rational::from(2), Rational::new(), Rational::from(12));
        assert!(constant_a(&z).is_err());
        // k − γ − 2p = 0 makes a B bracket vanish.
        assert!(matches!(constant_b(&pr(2, "2", "0", "4")), Err(Error::DivisionByZero(_))));
    }

    #[test]
    fn non_integer_p_with_negative_base() {
        // k − 2p < 0 with p = 5/2.
        let q = pr(2, "2.5", "0", "3");
        assert!(matches!(constant_a(&q), Err(Error::UndefinedPower { .. })));
        assert!(abs_constant_a(&q).unwrap().is_positive());
    }

    #[test]
    fn exact_matches_float() {
        let q = pr(4, "3", "1", "31");
        let e = exact_constants(&q).unwrap();
        assert_eq!(Real::from_rational(&e.a), constant_a(&q).unwrap());
        assert_eq!(e.a, Rational::from(&e.a_prime * &e.a_double_prime));
    }
}
