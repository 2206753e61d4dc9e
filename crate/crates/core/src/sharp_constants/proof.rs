//! Coefficients of the one-step (m = 2) weighted estimate and the sign of
//! the cubic remainder coefficient.

use rug::ops::Pow;
use rug::Rational;
use serde::Serialize;

use super::q_factor;
use crate::error::{Error, Result};
use crate::jet::Scalar;
use crate::params::InequalityParams;
use crate::real::Real;

#[derive(Clone, Debug, Serialize)]
pub struct ProofCoefficients<T = Real> {
    pub lambda: T,
    pub alpha: T,
    pub beta: T,
    pub mu: T,
    pub r0: T,
    pub r1: T,
    pub r2: T,
    pub r2p: T,
    pub r3: T,
    pub r3p: T,
    pub r3pp: T,
}

fn check(params: &InequalityParams) -> Result<()> {
    let InequalityParams { p, gamma, k, .. } = params;
    if *p <= 1 {
        return Err(Error::Domain("p must exceed 1".into()));
    }
    let a = Rational::from(k - gamma) - Rational::from(p * 2u32);
    if a <= 0 {
        return Err(Error::Domain(format!("k − γ − 2p = {a} must be positive")));
    }
    let b = Rational::from(p * k) - k + gamma;
    if b == 0 {
        return Err(Error::Domain("pk − k + γ must be nonzero".into()));
    }
    Ok(())
}

/// α = (p−1)(pk−2k+2p+2γ)/((k−γ−2p)(pk−k+γ)).
pub fn alpha_choice(params: &InequalityParams) -> Rational {
    let InequalityParams { p, gamma, k, .. } = params;
    let num = Rational::from(p - 1u32)
        * (Rational::from(p * k) - Rational::from(k * 2u32) + Rational::from(p * 2u32) + Rational::from(gamma * 2u32));
    let den = (Rational::from(k - gamma) - Rational::from(p * 2u32)) * (Rational::from(p * k) - k + gamma);
    num / den
}

/// The seven coefficients as printed, given λ and λ^{p/(p−1)}.
fn coefficients<T: Scalar>(params: &InequalityParams, lambda: T, lambda_pp: T, beta: T, mu: T) -> ProofCoefficients<T> {
    let InequalityParams { p, gamma, k, .. } = params;
    let r = |q: Rational| T::from_rational(&q);
    let alpha = r(alpha_choice(params));
    let pq = p * q_factor(params); // (k−γ−2p)(pk−k+γ)/p
    let pm1 = Rational::from(p - 1u32);
    let c2 = r((Rational::from(p * k) + Rational::from(p * 2u32) - Rational::from(k * 2u32) + Rational::from(gamma * 2u32))
        / Rational::from(p * 2u32));
    let c2p = r((Rational::from(p * k) - Rational::from(k * 2u32) + Rational::from(p * 2u32) + Rational::from(gamma * 2u32))
        / Rational::from(p * 2u32));
    let c3 = r(Rational::from(gamma * 2u32) + Rational::from(p * 4u32) - k - 2u32);
    let pm1_t = r(pm1.clone());
    let p_t = r(p.clone());
    let a2 = alpha.mul_ref(&alpha);
    let a3 = a2.mul_ref(&alpha);

    let r0 = r(pq.clone()).mul_ref(&lambda).sub_ref(&pm1_t.mul_ref(&lambda_pp));
    let r1 = r(pq.clone()).mul_ref(&lambda).mul_ref(&alpha).sub_ref(&p_t.mul_ref(&lambda_pp).mul_ref(&alpha));
    let r2 = {
        let t1 = c2.mul_ref(&alpha).mul_ref(&lambda);
        let t2 = r(pq).mul_ref(&beta).mul_ref(&lambda);
        let inner = r(Rational::from(p / &pm1))
            .mul_ref(&beta)
            .add_ref(&r((p / Rational::from(&pm1 * &pm1)) / 2u32).mul_ref(&a2));
        t1.add_ref(&t2).sub_ref(&pm1_t.mul_ref(&inner).mul_ref(&lambda_pp))
    };
    let r2p = r(Rational::from(&pm1 / p)).add_ref(&c2p.mul_ref(&alpha)).mul_ref(&lambda).add_ref(&mu.mul_ref(&lambda_pp));
    let head = T::zero().sub_ref(&alpha.div_ref(&T::from_i64(2))).add_ref(&c3.mul_ref(&beta)).mul_ref(&lambda);
    let r3 = {
        let pm1_2 = Rational::from(&pm1 * &pm1);
        let pm1_3 = Rational::from(&pm1_2 * &pm1);
        let inner = r(Rational::from(p / &pm1_2))
            .mul_ref(&alpha)
            .mul_ref(&beta)
            .sub_ref(&r((p * Rational::from(p - 2u32)) / (pm1_3 * 6u32)).mul_ref(&a3));
        head.sub_ref(&pm1_t.mul_ref(&inner).mul_ref(&lambda_pp))
    };
    let r3p = head.add_ref(&r(Rational::from(p / &pm1)).mul_ref(&alpha).mul_ref(&mu).mul_ref(&lambda_pp));
    let r3pp = T::zero().sub_ref(&lambda.mul_ref(&alpha));
    ProofCoefficients { lambda, alpha, beta, mu, r0, r1, r2, r2p, r3, r3p, r3pp }
}

/// λ = Q^{p−1}, α as chosen in the proof, and r_0…r_3'' from the printed formulas.
pub fn proof_r_coefficients(params: &InequalityParams, beta: &Real, mu: &Real) -> Result<ProofCoefficients> {
    check(params)?;
    let p = params.p_real();
    let q = Real::from_rational(&q_factor(params));
    let lambda = q.powf(&(&p - 1.0));
    let lambda_pp = lambda.powf(&(&p / (&p - 1.0)));
    Ok(coefficients(params, lambda, lambda_pp, beta.clone(), mu.clone()))
}

/// Rational evaluation for integer p (λ^{p/(p−1)} = Q^p exactly).
pub fn proof_r_coefficients_exact(
    params: &InequalityParams,
    beta: &Rational,
    mu: &Rational,
) -> Result<Option<ProofCoefficients<Rational>>> {
    check(params)?;
    let Some(e) = params.integer_p() else { return Ok(None) };
    let q = q_factor(params);
    let lambda = Rational::from((&q).pow(e as i32 - 1));
    let lambda_pp = Rational::from((&q).pow(e as i32));
    Ok(Some(coefficients(params, lambda, lambda_pp, beta.clone(), mu.clone())))
}

/// r3 + r3' + r3'' at μ = 0.
pub fn lemma_new_sign(params: &InequalityParams, beta: &Real) -> Result<Real> {
    let c = proof_r_coefficients(params, beta, &Real::zero())?;
    Ok(c.r3 + c.r3p + c.r3pp)
}

/// Coefficient of β in r3 + r3' + r3'' (the sum is affine in β).
pub fn lemma_new_sign_beta_coefficient(params: &InequalityParams) -> Result<Real> {
    Ok(lemma_new_sign(params, &Real::one())? - lemma_new_sign(params, &Real::zero())?)
}

/// 2(2p−1)αQ^{p−1}/(3p(4p−3))·(2p²−13p+8), the value of the sum at γ = γ_crit, β = 0.
pub fn lemma_new_sign_closed_form(params: &InequalityParams) -> Result<Real> {
    check(params)?;
    let p = params.p_real();
    let alpha = Real::from_rational(&alpha_choice(params));
    let q = Real::from_rational(&q_factor(params));
    let pre = (&p * 2.0 - 1.0) * 2.0 * alpha * q.powf(&(&p - 1.0)) / (&p * 3.0 * (&p * 4.0 - 3.0));
    Ok(pre * (p.powi(2) * 2.0 - &p * 13.0 + 8.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sharp_constants::{constant_a, constant_b, critical_gamma};

    fn pr(p: &str, g: &str, k: &str) -> InequalityParams {
        InequalityParams::parse(2, p, g, k).unwrap()
    }

    #[test]
    fn k8_example() {
        let c = proof_r_coefficients(&pr("2", "0", "8"), &Real::zero(), &Real::zero()).unwrap();
        assert!((&c.r0 - 64.0).abs() < 1e-50);
        assert!(c.r1.abs() < 1e-50);
        assert!(c.r2.abs() < 1e-50);
        assert!((&c.r2p - 5.0).abs() < 1e-50);
        assert!((&c.r3pp + 1.0).abs() < 1e-50);
        assert!((&c.alpha - 0.125).abs() < 1e-50);
        let c = proof_r_coefficients(&pr("2", "0", "8"), &Real::zero(), &Real::one()).unwrap();
        assert!((&c.r2p - 69.0).abs() < 1e-50);
    }

    #[test]
    fn exact_integer_p() {
        let q = pr("3", "1", "17");
        let c = proof_r_coefficients_exact(&q, &Rational::from((2, 7)), &Rational::from(3)).unwrap().unwrap();
        assert_eq!(c.r1, 0);
        assert_eq!(c.r2, 0);
        let a = Real::from_rational(&Rational::from(&c.r2p));
        let expect = constant_b(&q).unwrap() + constant_a(&q).unwrap() * 3.0;
        assert!((a - expect).abs() < 1e-40);
    }

    #[test]
    fn sign_at_critical_gamma() {
        for (p, k) in [("6", "5"), ("2", "5"), ("3", "11"), ("7", "40")] {
            let pp = crate::params::parse_rational(p).unwrap();
            let kk = crate::params::parse_rational(k).unwrap();
            let g = critical_gamma(&pp, &kk);
            let q = InequalityParams::unchecked(2, pp.clone(), g, kk);
            let Ok(v) = lemma_new_sign(&q, &Real::zero()) else { continue };
            let cf = lemma_new_sign_closed_form(&q).unwrap();
            assert!(crate::real::rel_diff(&v, &cf, &Real::zero()) < 1e-40, "p={p} k={k}");
            let poly = Rational::from(&pp * &pp) * 2u32 - Rational::from(&pp * 13u32) + 8u32;
            assert_eq!(v.signum(), poly.cmp0() as i32, "p={p}");
            assert!(lemma_new_sign_beta_coefficient(&q).unwrap().abs() < 1e-40);
        }
    }

    #[test]
    fn beta_flips_sign_off_critical() {
        let q = pr("2", "0", "8");
        let c = lemma_new_sign_beta_coefficient(&q).unwrap();
        assert!(c.abs() > 1e-3);
        let big = Real::from(1e6);
        assert_ne!(lemma_new_sign(&q, &big).unwrap().signum(), lemma_new_sign(&q, &(-big)).unwrap().signum());
    }

    #[test]
    fn rejects_bad_domain() {
        assert!(proof_r_coefficients(&pr("2", "0", "4"), &Real::zero(), &Real::zero()).is_err());
    }
}
