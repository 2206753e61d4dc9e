//! Identity records: each compares two evaluations of the same quantity,
//! exactly in rational arithmetic where possible.

use rug::ops::Pow;
use rug::Rational;
use serde::Serialize;

use super::alpha::{alpha_poly_jet, alpha_poly_jet_exact};
use super::proof::{proof_r_coefficients, proof_r_coefficients_exact};
use super::{a_double_prime_bases, a_prime_bases, all_bases, b_prefactor, q_factor};
use crate::error::{Error, Result};
use crate::params::InequalityParams;
use crate::real::{rel_diff, Real};

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct IdentityRecord {
    pub identity: String,
    pub params: String,
    pub lhs: String,
    pub rhs: String,
    pub abs_err: Real,
    pub rel_err: Real,
    /// Both sides were compared in exact rational arithmetic.
    pub exact: bool,
}

impl IdentityRecord {
    /// Floating comparison; `scale` is a floor for the relative denominator.
    pub fn numeric(identity: &str, params: &str, lhs: Real, rhs: Real, scale: &Real) -> Self {
        let abs_err = (&lhs - &rhs).abs();
        let rel_err = rel_diff(&lhs, &rhs, scale);
        IdentityRecord {
            identity: identity.to_string(),
            params: params.to_string(),
            lhs: lhs.to_decimal(),
            rhs: rhs.to_decimal(),
            abs_err,
            rel_err,
            exact: false,
        }
    }

    pub fn exact(identity: &str, params: &str, lhs: &Rational, rhs: &Rational) -> Self {
        let diff = Real::from_rational(&Rational::from(lhs - rhs));
        let den = Real::from_rational(lhs).abs().max(Real::from_rational(rhs).abs());
        let rel_err = if diff.is_zero() { Real::zero() } else { diff.abs() / den };
        IdentityRecord {
            identity: identity.to_string(),
            params: params.to_string(),
            lhs: lhs.to_string(),
            rhs: rhs.to_string(),
            abs_err: diff.abs(),
            rel_err,
            exact: true,
        }
    }

    /// Exact records must agree identically; numeric ones to `tol` relative.
    pub fn holds(&self, tol: f64) -> bool {
        if self.exact {
            self.abs_err.is_zero()
        } else {
            self.rel_err < tol
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct IdentityReport {
    pub records: Vec<IdentityRecord>,
}

impl IdentityReport {
    pub fn push(&mut self, r: IdentityRecord) {
        self.records.push(r);
    }

    pub fn extend(&mut self, other: IdentityReport) {
        self.records.extend(other.records);
    }

    pub fn max_rel_err(&self) -> Real {
        self.records.iter().map(|r| r.rel_err.clone()).fold(Real::zero(), Real::max)
    }

    pub fn all_hold(&self, tol: f64) -> bool {
        self.records.iter().all(|r| r.holds(tol))
    }

    pub fn failures(&self, tol: f64) -> Vec<&IdentityRecord> {
        self.records.iter().filter(|r| !r.holds(tol)).collect()
    }
}

fn tag(params: &InequalityParams) -> String {
    format!("m={} p={} gamma={} k={}", params.m, params.p, params.gamma, params.k)
}

/// (A, B) in rationals for integer p, any m ≥ 0; B is `None` when a bracket vanishes.
fn exact_ab(params: &InequalityParams) -> Option<(Rational, Option<Rational>)> {
    let e = params.integer_p()? as i32;
    let bases = all_bases(params);
    let a = bases.iter().fold(Rational::from(1), |acc, b| acc * Rational::from(b.pow(e)));
    let mut s = Rational::new();
    for b in &bases {
        if *b == 0 {
            return Some((a, None));
        }
        s += Rational::from(b * b).recip();
    }
    let b = b_prefactor(&params.p) * s * &a;
    Some((a, Some(b)))
}

/// (|A|, |B|) in floating point for any p > 1 and m ≥ 0.
fn float_ab(params: &InequalityParams) -> (Real, Option<Real>) {
    let p = params.p_real();
    let bases = all_bases(params);
    let a: Real = bases.iter().map(|b| Real::from_rational(b).abs_pow(&p)).product();
    if bases.iter().any(|b| *b == 0) {
        return (a, None);
    }
    let s: Rational = bases.iter().map(|b| Rational::from(b * b).recip()).sum();
    let b = &a * Real::from_rational(&(b_prefactor(&params.p) * s));
    (a, Some(b))
}

/// A = A'·A'' and Q^p = A(2,γ).
pub fn verify_constant_identities(params: &InequalityParams) -> IdentityReport {
    let t = tag(params);
    let mut rep = IdentityReport::default();
    let two = params.with_order(2);
    if let Some(e) = params.integer_p() {
        let e = e as i32;
        let prod = |bases: &[Rational]| bases.iter().fold(Rational::from(1), |acc, b| acc * Rational::from(b.pow(e)));
        let a = prod(&all_bases(params));
        let split = prod(&a_prime_bases(params)) * prod(&a_double_prime_bases(params));
        rep.push(IdentityRecord::exact("A = A'*A''", &t, &a, &split));
        let qp = q_factor(params).pow(e);
        rep.push(IdentityRecord::exact("Q^p = A(2,gamma)", &t, &qp, &prod(&all_bases(&two))));
    } else {
        let p = params.p_real();
        let abs_prod = |bases: &[Rational]| -> Real { bases.iter().map(|b| Real::from_rational(b).abs_pow(&p)).product() };
        let a = abs_prod(&all_bases(params));
        let split = abs_prod(&a_prime_bases(params)) * abs_prod(&a_double_prime_bases(params));
        rep.push(IdentityRecord::numeric("|A| = |A'|*|A''|", &t, a, split, &Real::zero()));
        let qp = Real::from_rational(&q_factor(params)).abs_pow(&p);
        rep.push(IdentityRecord::numeric("|Q|^p = |A(2,gamma)|", &t, qp, abs_prod(&all_bases(&two)), &Real::zero()));
    }
    rep
}

/// The factorisations A(m,γ) = A(s,γ)A(m−s,γ+sp) and
/// B(m,γ) = A(s,γ)B(m−s,γ+sp) + A(m−s,γ+sp)B(s,γ), with s = 2 for even m and s = 1 for odd m.
pub fn verify_recursions(params: &InequalityParams) -> Result<IdentityReport> {
    let m = params.m;
    if m == 0 {
        return Err(Error::Domain("recursions need m ≥ 1".into()));
    }
    let step = if m.is_multiple_of(2) { 2 } else { 1 };
    let head = params.with_order(step);
    let tail = params
        .with_order(m - step)
        .with_gamma(&params.gamma + Rational::from(&params.p * step));
    let t = tag(params);
    let (name_a, name_b) = if step == 2 {
        ("A(m,g) = A(2,g)A(m-2,g+2p)", "B(m,g) = A(2,g)B(m-2,g+2p) + A(m-2,g+2p)B(2,g)")
    } else {
        ("A(m,g) = A(1,g)A(m-1,g+p)", "B(m,g) = A(1,g)B(m-1,g+p) + A(m-1,g+p)B(1,g)")
    };
    let mut rep = IdentityReport::default();
    if let (Some((a, b)), Some((ah, bh)), Some((at, bt))) = (exact_ab(params), exact_ab(&head), exact_ab(&tail)) {
        rep.push(IdentityRecord::exact(name_a, &t, &a, &Rational::from(&ah * &at)));
        if let (Some(b), Some(bh), Some(bt)) = (b, bh, bt) {
            let rhs = Rational::from(&ah * &bt) + Rational::from(&at * &bh);
            rep.push(IdentityRecord::exact(name_b, &t, &b, &rhs));
        }
    } else {
        let (a, b) = float_ab(params);
        let (ah, bh) = float_ab(&head);
        let (at, bt) = float_ab(&tail);
        rep.push(IdentityRecord::numeric(name_a, &t, a, &ah * &at, &Real::zero()));
        if let (Some(b), Some(bh), Some(bt)) = (b, bh, bt) {
            let rhs = &ah * &bt + &at * &bh;
            rep.push(IdentityRecord::numeric(name_b, &t, b, rhs, &Real::zero()));
        }
    }
    Ok(rep)
}

/// At s = (2mp−k)/p with γ = 0: |α_m(s)| equals the product of the |bases| of A(2m,0)
/// (compared exactly), |α_m|^p = |A(2m)|, and
/// |B(2m)| = (p−1)/(2p)·|α_m|^{p−2}(α_m'² − α_m α_m'').
pub fn verify_radio(m: u32, p: &Rational, k: &Rational) -> Result<IdentityReport> {
    let params = InequalityParams::new(2 * m, p.clone(), Rational::new(), k.clone())?;
    let t = tag(&params);
    let s = super::critical_exponent(&params, &Rational::new());
    let (alpha, d1, d2) = alpha_poly_jet_exact(m, k, &s);
    let bases = all_bases(&params);
    let root = bases.iter().fold(Rational::from(1), |acc, b| acc * Rational::from(b.abs_ref()));
    let mut rep = IdentityReport::default();
    rep.push(IdentityRecord::exact("|alpha_m(s)| = |A(2m)|^(1/p)", &t, &Rational::from(alpha.abs_ref()), &root));

    let pr = params.p_real();
    let (abs_a, abs_b) = float_ab(&params);
    let (fa, fd1, fd2) = alpha_poly_jet(m, &params.k_real(), &Real::from_rational(&s));
    rep.push(IdentityRecord::numeric("|alpha_m(s)|^p = |A(2m)|", &t, fa.abs_pow(&pr), abs_a, &Real::zero()));
    if alpha == 0 {
        // Both sides of the B identity involve |α|^{p−2} at a root; nothing further to compare.
        return Ok(rep);
    }
    let Some(abs_b) = abs_b else {
        return Err(Error::DivisionByZero(format!("a bracket of B vanishes at {t}")));
    };
    let disc = Rational::from(&d1 * &d1) - Rational::from(&alpha * &d2);
    let rhs = Real::from_rational(&b_prefactor(p)) * fa.abs_pow(&(&pr - 2.0)) * (&fd1 * &fd1 - &fa * &fd2);
    debug_assert_eq!(Real::from_rational(&disc).signum(), (&fd1 * &fd1 - &fa * &fd2).signum());
    rep.push(IdentityRecord::numeric(
        "|B(2m)| = (p-1)/(2p)|alpha|^(p-2)(alpha'^2 - alpha alpha'')",
        &t,
        abs_b,
        rhs,
        &Real::zero(),
    ));
    Ok(rep)
}

/// r0 = Q^p, r1 = 0, r2 = 0 and r2' = B(2,γ) + μA(2,γ) under λ = Q^{p−1} and the chosen α.
/// Zero-valued identities are measured against Q^p.
pub fn verify_proof_coefficients(params: &InequalityParams, beta: &Rational, mu: &Rational) -> Result<IdentityReport> {
    let two = params.with_order(2);
    let t = format!("{} beta={beta} mu={mu}", tag(&two));
    let mut rep = IdentityReport::default();
    if let Some(c) = proof_r_coefficients_exact(&two, beta, mu)? {
        let (a, b) = exact_ab(&two).expect("integer p");
        let b = b.ok_or_else(|| Error::DivisionByZero("B(2,γ) bracket vanishes".into()))?;
        let zero = Rational::new();
        rep.push(IdentityRecord::exact("r0 = Q^p", &t, &c.r0, &a));
        rep.push(IdentityRecord::exact("r1 = 0", &t, &c.r1, &zero));
        rep.push(IdentityRecord::exact("r2 = 0", &t, &c.r2, &zero));
        rep.push(IdentityRecord::exact("r2' = B + mu A", &t, &c.r2p, &(b + Rational::from(mu * &a))));
        return Ok(rep);
    }
    let c = proof_r_coefficients(&two, &Real::from_rational(beta), &Real::from_rational(mu))?;
    let (a, b) = float_ab(&two);
    let b = b.ok_or_else(|| Error::DivisionByZero("B(2,γ) bracket vanishes".into()))?;
    rep.push(IdentityRecord::numeric("r0 = Q^p", &t, c.r0, a.clone(), &Real::zero()));
    rep.push(IdentityRecord::numeric("r1 = 0", &t, c.r1, Real::zero(), &a));
    rep.push(IdentityRecord::numeric("r2 = 0", &t, c.r2, Real::zero(), &a));
    let rhs = b + Real::from_rational(mu) * &a;
    rep.push(IdentityRecord::numeric("r2' = B + mu A", &t, c.r2p, rhs, &Real::zero()));
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::parse_rational;

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn radio_spot_values() {
        let rep = verify_radio(1, &q("2"), &q("12")).unwrap();
        assert!(rep.all_hold(1e-40));
        assert_eq!(rep.records[1].rhs.parse::<f64>().unwrap(), 576.0);
        assert_eq!(rep.records[2].lhs.parse::<f64>().unwrap(), 13.0);
        let rep = verify_radio(1, &q("2"), &q("8")).unwrap();
        assert_eq!(rep.records[2].lhs.parse::<f64>().unwrap(), 5.0);
        let rep = verify_radio(2, &q("5/2"), &q("20")).unwrap();
        assert!(rep.all_hold(1e-40), "{:?}", rep.failures(1e-40));
    }

    #[test]
    fn recursion_examples() {
        let p = InequalityParams::parse(4, "2", "0", "12").unwrap();
        let rep = verify_recursions(&p).unwrap();
        assert!(rep.records.iter().all(|r| r.exact));
        assert!(rep.all_hold(0.0));
        assert_eq!(rep.records[0].lhs, "147456");
        for m in 1..=3 {
            let p = InequalityParams::parse(m, "5/2", "1/3", "41/2").unwrap();
            let rep = verify_recursions(&p).unwrap();
            assert!(rep.all_hold(1e-40), "m={m}");
        }
    }

    #[test]
    fn constants_and_proof() {
        let p = InequalityParams::parse(5, "3", "2/7", "19").unwrap();
        assert!(verify_constant_identities(&p).all_hold(0.0));
        let rep = verify_proof_coefficients(&p, &q("1/3"), &q("2")).unwrap();
        assert!(rep.records.iter().all(|r| r.exact) && rep.all_hold(0.0));
        let p = InequalityParams::parse(2, "5/2", "1", "19").unwrap();
        let rep = verify_proof_coefficients(&p, &q("-3"), &q("1/2")).unwrap();
        assert!(rep.all_hold(1e-45), "{:?}", rep.failures(1e-45));
    }

    #[test]
    fn exact_record_detects_mismatch() {
        let r = IdentityRecord::exact("x", "", &q("1/3"), &q("1/3"));
        assert!(r.holds(0.0));
        let r = IdentityRecord::exact("x", "", &q("1/3"), &q("1/4"));
        assert!(!r.holds(1.0));
    }
}
