//! Coefficients a_ij of the expansion of the remainder functional along the
//! extremal family, and the cancellation chain behind the optimality of B.

use rug::Rational;
use serde::Serialize;

use super::identities::IdentityRecord;
use super::{abs_constant_a, abs_constant_b, order_poly_jet};
use crate::error::{Error, Result};
use crate::fit::poly_fit;
use crate::jet::Jet;
use crate::params::InequalityParams;
use crate::real::Real;

/// α and its first two derivatives at s_0, with |α|^{p−2} and the sharp constants.
#[derive(Clone, Debug)]
pub(crate) struct AlphaData {
    pub a: Real,
    pub d1: Real,
    pub d2: Real,
    pub abs_pm2: Real,
    pub p: Real,
    pub abs_a: Real,
    pub abs_b: Real,
}

impl AlphaData {
    pub fn new(params: &InequalityParams, s0: &Real) -> Result<Self> {
        if !params.m.is_multiple_of(2) {
            return Err(Error::Domain("the expansion is stated for even Δ-order".into()));
        }
        let j = order_poly_jet(params.m, &params.k_real(), s0, 2);
        let p = params.p_real();
        let a = j.deriv(0);
        if a.is_zero() && p < 2.0 {
            return Err(Error::SingularJet("s_0 is a root of α and p < 2".into()));
        }
        let abs_pm2 = if a.is_zero() { Real::zero() } else { a.abs_pow(&(&p - 2.0)) };
        Ok(AlphaData {
            d1: j.deriv(1),
            d2: j.deriv(2),
            a,
            abs_pm2,
            abs_a: abs_constant_a(params)?,
            abs_b: abs_constant_b(params)?,
            p,
        })
    }

    pub fn a00(&self) -> Real {
        self.a.abs_pow(&self.p) - &self.abs_a
    }

    pub fn a0j(&self, sj: &Real) -> Real {
        &self.p * sj * &self.abs_pm2 * &self.a * &self.d1
    }

    /// Diagonal entry without the −|B| shift (the last row's formula).
    pub fn a_rr(&self, sr: &Real) -> Real {
        let inner = &self.a * &self.d2 * (sr + 1.0) + (&self.p - 1.0) * self.d1.powi(2) * sr;
        &self.p * sr / 2.0 * &self.abs_pm2 * inner
    }

    /// Diagonal entry for 1 ≤ i ≤ r−1.
    pub fn a_ii(&self, si: &Real) -> Real {
        self.a_rr(si) - &self.abs_b
    }

    pub fn a_ij(&self, si: &Real, sj: &Real) -> Real {
        let inner = &self.a * &self.d2 * (si * 2.0 + 1.0) + (&self.p - 1.0) * self.d1.powi(2) * si * 2.0;
        &self.p * sj / 2.0 * &self.abs_pm2 * inner
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpansionCoefficients {
    pub s: Vec<Real>,
    /// Row i holds a_ij for j = i..=r.
    pub rows: Vec<Vec<Real>>,
}

impl ExpansionCoefficients {
    pub fn r(&self) -> usize {
        self.s.len() - 1
    }

    pub fn get(&self, i: usize, j: usize) -> &Real {
        assert!(i <= j && j <= self.r());
        &self.rows[i][j - i]
    }
}

/// Fills the triangular table a_ij, 0 ≤ i ≤ j ≤ r, for the even Δ-order `params.m`.
pub fn expansion_a_ij(params: &InequalityParams, s: &[Real]) -> Result<ExpansionCoefficients> {
    if s.is_empty() {
        return Err(Error::Domain("need at least s_0".into()));
    }
    let d = AlphaData::new(params, &s[0])?;
    let r = s.len() - 1;
    let mut rows = Vec::with_capacity(r + 1);
    let mut row0 = vec![d.a00()];
    row0.extend(s[1..].iter().map(|sj| d.a0j(sj)));
    rows.push(row0);
    for i in 1..=r {
        let mut row = Vec::with_capacity(r - i + 1);
        row.push(if i < r { d.a_ii(&s[i]) } else { d.a_rr(&s[i]) });
        for sj in &s[i + 1..] {
            row.push(d.a_ij(&s[i], sj));
        }
        rows.push(row);
    }
    Ok(ExpansionCoefficients { s: s.to_vec(), rows })
}

#[derive(Clone, Debug, Serialize)]
pub struct CancellationCheck {
    pub record: IdentityRecord,
}

#[derive(Clone, Debug, Serialize)]
pub struct CancellationReport {
    pub r: usize,
    pub a_1_00: Real,
    pub a_2_00: Real,
    pub records: Vec<IdentityRecord>,
}

impl CancellationReport {
    pub fn max_residual(&self) -> Real {
        self.records.iter().map(|r| r.rel_err.clone()).fold(Real::zero(), Real::max)
    }
}

/// Verifies the chain A_{0,00} = 0, A_{0,0j} = (ε_j−1)A_{1,00}, A_{1,0j} = 2(ε_j−1)A_{2,00},
/// and at every level i ≥ 1: B_{0,ii} = 0, B_{2,ii} = 0, B_{1,ij} = 0, B_{0,ij} = (ε_j−1)B_{1,ii},
/// ending with lim a_rr = |B|. Linear and quadratic forms in ε are verified by multi-point fits.
pub fn cancellation_report(params: &InequalityParams, r: usize) -> Result<CancellationReport> {
    if r == 0 {
        return Err(Error::Domain("r must be positive".into()));
    }
    let p = params.p_real();
    let s_star = Real::from_rational(&super::critical_exponent(params, &Rational::new()));
    let d = AlphaData::new(params, &s_star)?;
    let scale = d.abs_a.clone().max(d.abs_b.clone()).max(Real::one());
    let tag = format!("m={} p={} gamma={} k={} r={r}", params.m, params.p, params.gamma, params.k);
    let mut records = Vec::new();
    let mut push = |name: String, lhs: Real, rhs: Real| {
        records.push(IdentityRecord::numeric(&name, &tag, lhs, rhs, &scale));
    };

    // â_00(ε_0) = |α(s* + ε_0/p)|^p − |A| as a jet in ε_0.
    let alpha_eps = {
        let j = order_poly_jet(params.m, &params.k_real(), &s_star, 3);
        let inner = Jet::variable(Real::zero(), 3).scale(&p.recip()).add_scalar(&s_star);
        let mut outer = j.coeffs.clone();
        outer.resize(4, Real::zero());
        inner.compose(&outer)
    };
    let a_hat = alpha_eps.abs_pow(&p)?.add_scalar(&(-&d.abs_a));
    let a_0_00 = a_hat.coeff(0);
    let a_1_00 = a_hat.coeff(1);
    let a_2_00 = a_hat.coeff(2);
    push("A_0,00 = 0".into(), a_0_00, Real::zero());
    // Cross-check of A_1,00 against the closed form |α|^{p−2}αα'.
    push("A_1,00 = |alpha|^(p-2) alpha alpha'".into(), a_1_00.clone(), &d.abs_pm2 * &d.a * &d.d1);

    // ĥ(ε_0) = |α|^{p−2}αα' along s_0(ε_0); a_0j = (ε_j − 1)·ĥ.
    let h_eps = alpha_eps.signed_pow(&p)?.mul_jet(&alpha_eps.derivative()?.scale(&p));
    let eps_nodes: Vec<Real> = ["0.1", "0.05", "0.02", "0.3", "0.5"].iter().map(|s| Real::parse(s).unwrap()).collect();
    let s_of = |e: &Real| (e - 1.0) / &p;
    {
        let ys: Vec<Real> = eps_nodes.iter().map(|e| d.a0j(&s_of(e))).collect();
        let (c, resid) = poly_fit(&eps_nodes, &ys, 1);
        push("A_0,0j linear fit residual".into(), resid, Real::zero());
        push("A_0,0j = (eps_j - 1) A_1,00 [slope]".into(), c[1].clone(), a_1_00.clone());
        push("A_0,0j = (eps_j - 1) A_1,00 [intercept]".into(), c[0].clone(), -&a_1_00);
        let ys: Vec<Real> = eps_nodes.iter().map(|e| (e - 1.0) * h_eps.coeff(1)).collect();
        let (c, _) = poly_fit(&eps_nodes, &ys, 1);
        push("A_1,0j = 2(eps_j - 1) A_2,00".into(), c[1].clone(), &a_2_00 * 2.0);
    }

    // Level i: b_ii(ε_i) = a_ii + A_2,00(ε_i − ε_i²), b_ij = a_ij − A_2,00(1−ε_j)(1−2ε_i).
    let levels = r.max(2) - 1;
    let fit_nodes: Vec<Real> = ["-0.2", "-0.1", "0.1", "0.2", "0.3"].iter().map(|s| Real::parse(s).unwrap()).collect();
    for i in 1..=levels {
        let b_ii = |ei: &Real| d.a_ii(&s_of(ei)) + &a_2_00 * (ei - ei.powi(2));
        let ys: Vec<Real> = fit_nodes.iter().map(b_ii).collect();
        let (bc, resid) = poly_fit(&fit_nodes, &ys, 2);
        push(format!("b_{i}{i} quadratic fit residual"), resid, Real::zero());
        push(format!("B_0,{i}{i} = 0"), bc[0].clone(), Real::zero());
        push(format!("B_2,{i}{i} = 0"), bc[2].clone(), Real::zero());
        push(format!("B_0,{i}{i} exact at eps_{i} = 0"), b_ii(&Real::zero()), Real::zero());
        let b1_ii = bc[1].clone();
        for j in (i + 1)..=r {
            let mut b0_values = Vec::new();
            for ej in &eps_nodes {
                let sj = s_of(ej);
                let b_ij = |ei: &Real| d.a_ij(&s_of(ei), &sj) - &a_2_00 * (1.0 - ej) * (1.0 - ei * 2.0);
                let ys: Vec<Real> = fit_nodes.iter().map(b_ij).collect();
                let (c, resid) = poly_fit(&fit_nodes, &ys, 1);
                push(format!("b_{i}{j} linear fit residual at eps_{j}={}", ej.to_string_digits(3)), resid, Real::zero());
                push(format!("B_1,{i}{j} = 0 at eps_{j}={}", ej.to_string_digits(3)), c[1].clone(), Real::zero());
                b0_values.push(c[0].clone());
            }
            let (c, resid) = poly_fit(&eps_nodes, &b0_values, 1);
            push(format!("B_0,{i}{j} linear-in-eps_{j} fit residual"), resid, Real::zero());
            push(format!("B_0,{i}{j} = (eps_{j} - 1) B_1,{i}{i} [slope]"), c[1].clone(), b1_ii.clone());
            push(format!("B_0,{i}{j} = (eps_{j} - 1) B_1,{i}{i} [intercept]"), c[0].clone(), -&b1_ii);
        }
    }

    // Terminal limit.
    let ys: Vec<Real> = fit_nodes.iter().map(|e| d.a_rr(&s_of(e))).collect();
    let (c, _) = poly_fit(&fit_nodes, &ys, 2);
    push(format!("lim a_{r}{r} = |B| (fit)"), c[0].clone(), d.abs_b.clone());
    push(format!("lim a_{r}{r} = |B| (eps_r = 0)"), d.a_rr(&s_of(&Real::zero())), d.abs_b.clone());

    Ok(CancellationReport { r, a_1_00, a_2_00, records })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a00_vanishes_at_critical_exponent() {
        let q = InequalityParams::parse(2, "2", "0", "12").unwrap();
        let s0 = Real::from(-4.0);
        let e = expansion_a_ij(&q, &[s0, Real::ratio(-1, 2)]).unwrap();
        assert!(e.get(0, 0).is_zero());
        // a_11 = a_rr at ε_1 = 0 equals |B|.
        assert!((e.get(1, 1) - 13.0).abs() < 1e-50);
    }

    #[test]
    fn zero_s_kills_a0j() {
        let q = InequalityParams::parse(2, "2.5", "0", "12").unwrap();
        let e = expansion_a_ij(&q, &[Real::from(-1.3), Real::zero(), Real::from(0.2)]).unwrap();
        assert!(e.get(0, 1).is_zero());
        assert!(!e.get(0, 2).is_zero());
    }

    #[test]
    fn shifted_diagonal_vanishes() {
        // a_11 with the −|B| shift (r = 2) at ε_0 = ε_1 = 0.
        let q = InequalityParams::parse(2, "2", "0", "12").unwrap();
        let e = expansion_a_ij(&q, &[Real::from(-4.0), Real::ratio(-1, 2), Real::ratio(-1, 2)]).unwrap();
        assert!(e.get(1, 1).abs() < 1e-50);
    }

    #[test]
    fn chain_holds() {
        for (p, k) in [("2", "12"), ("3", "20"), ("2.5", "12")] {
            let q = InequalityParams::parse(2, p, "0", k).unwrap();
            let rep = cancellation_report(&q, 2).unwrap();
            assert!(rep.max_residual() < 1e-20, "p={p} k={k}: {:?}", rep.max_residual());
        }
    }

    #[test]
    fn odd_order_rejected() {
        let q = InequalityParams::parse(1, "2", "0", "12").unwrap();
        assert!(cancellation_report(&q, 1).is_err());
    }
}
