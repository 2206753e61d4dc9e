//! Both sides of the improved inequality for radial probes, and the sharpness
//! experiments for the two constants.
//!
//! All integrals are radial: ∫ t^{k−1}(…) dt. For the extremal family
//! u = χ·t^{s_0}∏X_j^{s_j} the integrands are evaluated in τ = log t through
//! [`ReducedOperator`], so nothing overflows as t → 0.

use rayon::prelude::*;
use rug::Rational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{InequalityParams, ParamsSummary};
use crate::quadrature::{integrate_weighted, sign_changes, PowerWeight, QuadConfig, Substitution, TowerPoint, VectorResult};
use crate::radial_calculus::{family_exponents, iterated_operator, CutoffSpec, RadialProfile, ReducedOperator};
use crate::real::Real;
use crate::sharp_constants::{abs_constant_a, abs_constant_b, star_condition};

#[derive(Clone, Debug, Serialize)]
pub struct RemainderReport {
    pub params: ParamsSummary,
    pub r: usize,
    /// ∫ d^{−γ}|Δ^{m/2}u|^p.
    pub lhs: Real,
    /// ∫ d^{−γ−mp}|u|^p.
    pub t0: Real,
    /// ∫ d^{−γ−mp}X_1²⋯X_i²|u|^p for i = 1..=r (the last with X_r^θ when requested).
    pub series_terms: Vec<Real>,
    /// lhs − |A|·t0 − |B|·Σ_{i<r} series_terms[i−1], integrated as one integrand.
    pub remainder: Real,
    /// remainder ÷ series_terms[r−1] (÷ t0 when r = 0).
    pub quotient: Real,
    pub error_budget: Real,
    pub hypothesis_ok: bool,
    pub star_ok: bool,
    pub converged: bool,
}

fn constants(params: &InequalityParams) -> Result<(Real, Real)> {
    let a = abs_constant_a(params)?;
    let b = abs_constant_b(params).unwrap_or_else(|_| Real::zero());
    Ok((a, b))
}

fn cutoff_pow(chi: &Real, p: &Real) -> Real {
    if chi.is_zero() {
        Real::zero()
    } else {
        chi.powf(p)
    }
}

/// |x|^p is analytic at 0 only for even integer p.
fn kinks_at_zeros(p: &Rational) -> bool {
    !(p.denom() == &1 && p.numer().is_even())
}

const ZERO_SCAN_SAMPLES: usize = 400;

/// Sign changes of Φ on the cutoff transition, where |Φ|^p has a kink.
fn transition_kinks(params: &InequalityParams, op: &ReducedOperator, cut: &CutoffSpec, depth: usize) -> Vec<Real> {
    if !kinks_at_zeros(&params.p) {
        return Vec::new();
    }
    let phi = |t: &Real| -> Real {
        let pt = TowerPoint::from_t(t, &params.d_scale, depth);
        match cut.log_jet(t, params.m as usize) {
            Ok(cj) => op.phi(&pt.x, Some(&cj)),
            Err(_) => Real::zero(),
        }
    };
    sign_changes(phi, &cut.r_flat, &cut.radius, ZERO_SCAN_SAMPLES)
}

/// Component layout shared by both paths: [lhs, t0, term_1..term_r, remainder].
fn assemble(
    params: &InequalityParams,
    r: usize,
    v: VectorResult,
    a: &Real,
    b: &Real,
) -> RemainderReport {
    let lhs = v.values[0].clone();
    let t0 = v.values[1].clone();
    let series_terms: Vec<Real> = v.values[2..2 + r].to_vec();
    let remainder = v.values[2 + r].clone();
    let denom = if r == 0 { &t0 } else { &series_terms[r - 1] };
    let quotient = &remainder / denom;
    let mut error_budget = v.errors[2 + r].clone() + &v.errors[0] + a * &v.errors[1];
    for e in &v.errors[2..2 + r] {
        error_budget += b * e;
    }
    RemainderReport {
        params: params.summary(),
        r,
        lhs,
        t0,
        series_terms,
        remainder,
        quotient,
        error_budget,
        hypothesis_ok: params.satisfies_hypothesis(),
        star_ok: star_condition(params).ok,
        converged: v.converged,
    }
}

fn products(x: &[Real], r: usize) -> Vec<Real> {
    let mut out = Vec::with_capacity(r);
    let mut acc = Real::one();
    for xi in &x[..r] {
        acc *= xi;
        out.push(acc.clone());
    }
    out
}

/// Integrand components from |Δ^{m/2}u|^p (as `op_p`), |u|^p (as `u_p`) and the X's.
#[allow(clippy::too_many_arguments)]
fn components(op_p: Real, u_p: Real, x: &[Real], r: usize, last_power: Option<&Real>, a: &Real, b: &Real) -> Vec<Real> {
    let prods = products(x, r);
    let mut out = Vec::with_capacity(r + 3);
    let mut rem = &op_p - a * &u_p;
    out.push(op_p);
    out.push(u_p.clone());
    for (i, pi) in prods.iter().enumerate() {
        let sq = pi.powi(2);
        if i + 1 < r {
            rem -= b * &sq * &u_p;
        }
        let term = match last_power {
            Some(theta) if i + 1 == r => &prods[r - 1] / &x[r - 1] * &prods[r - 1] / &x[r - 1] * x[r - 1].powf(theta),
            _ => sq,
        };
        out.push(term * &u_p);
    }
    out.push(rem);
    out
}

/// Both sides for an arbitrary radial profile, evaluated from its t-jets.
///
/// Points where t or the profile leaves the exponent range contribute nothing; this is
/// only sound when the weighted integrand is negligible there. Profiles must be integrable against
/// t^{k−1−γ−mp} near 0.
pub fn inequality_sides<P: RadialProfile>(params: &InequalityParams, u: &P, r: usize, cfg: &QuadConfig) -> Result<RemainderReport> {
    let (a, b) = constants(params)?;
    let p = params.p_real();
    let support = u.support().min(params.radius.clone());
    let op = iterated_operator(u, params.m, &params.k_real());
    // Weight t^{k−1−γ−mp}; the operator side gets t^{mp} back inside the integrand.
    let mp = Real::from_rational(&Rational::from(&params.p * params.m));
    let weight = PowerWeight::new(-(Rational::from(&params.p * params.m) + &params.gamma), Vec::new());
    let integrand = |pt: &TowerPoint| -> Vec<Real> {
        if pt.t.is_zero() {
            return vec![Real::zero(); r + 3];
        }
        let (Ok(du), Ok(uu)) = (op.signed_jet(&pt.t, 0), u.value(&pt.t)) else {
            return vec![Real::zero(); r + 3];
        };
        let op_p = du.coeffs[0].abs().powf(&p) * (&mp * &pt.log_t).exp();
        let u_p = uu.abs().powf(&p);
        if !(op_p.is_finite() && u_p.is_finite()) {
            return vec![Real::zero(); r + 3];
        }
        components(op_p, u_p, &pt.x, r, None, &a, &b)
    };
    let mut cuts: Vec<Real> = u.breakpoints().into_iter().filter(|c| c.is_positive() && *c < support).collect();
    cuts.sort_by(|x, y| x.partial_cmp(y).expect("finite breakpoints"));
    if kinks_at_zeros(&params.p) && !cuts.is_empty() {
        // Past the first breakpoint the profile is sampled directly for kinks of |Δ^{m/2}u|^p.
        let mut bounds = cuts.clone();
        bounds.push(support.clone());
        let f = |t: &Real| op.signed_jet(t, 0).map(|j| j.coeffs[0].clone()).unwrap_or_else(|_| Real::zero());
        let extra: Vec<Real> = bounds.windows(2).flat_map(|w| sign_changes(f, &w[0], &w[1], ZERO_SCAN_SAMPLES)).collect();
        cuts.extend(extra);
        cuts.sort_by(|x, y| x.partial_cmp(y).expect("finite breakpoints"));
    }
    cuts.push(support);
    let mut total: Option<VectorResult> = None;
    let mut lo = Real::zero();
    for hi in cuts {
        let sub = if lo.is_zero() { Substitution::LogScale } else { Substitution::Identity };
        let part = integrate_weighted(&weight, &params.k, &params.d_scale, &lo, &hi, sub, r, r + 3, integrand, cfg)?;
        total = Some(match total {
            None => part,
            Some(t) => t.join(part),
        });
        lo = hi;
    }
    let v = total.expect("at least one segment");
    Ok(assemble(params, r, v, &a, &b))
}

/// Both sides for u = χ·t^{s_0}∏X_j^{s_j} with exponents from `eps` (all positive).
/// `last_power` replaces X_r² by X_r^θ in the last series term.
pub fn family_sides(
    params: &InequalityParams,
    eps: &[Rational],
    cutoff: Option<&CutoffSpec>,
    r: usize,
    last_power: Option<&Rational>,
    cfg: &QuadConfig,
) -> Result<RemainderReport> {
    if eps.is_empty() || eps.iter().any(|e| *e <= 0) {
        return Err(Error::Domain("family exponents ε_j must all be positive".into()));
    }
    if r == 0 && last_power.is_some() {
        return Err(Error::Domain("a final-weight exponent needs r ≥ 1".into()));
    }
    let (a, b) = constants(params)?;
    let p = params.p_real();
    let (s0, s) = family_exponents(params, eps);
    let op = ReducedOperator::new(params.m, &params.k_real(), &s0, s.clone());
    let theta = last_power.map(Real::from_rational);
    let radius = cutoff.map(|c| c.radius.clone()).unwrap_or_else(|| params.radius.clone());
    // Shared weight t^{ε_0−1}∏X_j^{p s_j}; the integrand carries |Φ|^p or χ^p and the X-products.
    let weight = PowerWeight::new(
        Rational::from(&eps[0] - &params.k),
        eps[1..].iter().map(|e| Rational::from(e - 1u32)).collect(),
    );
    let depth = r.max(s.len());
    let integrand = |pt: &TowerPoint, chi_t: Option<&Real>| -> Vec<Real> {
        let (phi, chi) = match (chi_t, cutoff) {
            (Some(t), Some(c)) => {
                let Ok(cj) = c.log_jet(t, params.m as usize) else {
                    return vec![Real::zero(); r + 3];
                };
                let chi = cj.coeffs[0].clone();
                (op.phi(&pt.x, Some(&cj)), chi)
            }
            _ => (op.phi(&pt.x, None), Real::one()),
        };
        components(phi.abs().powf(&p), cutoff_pow(&chi, &p), &pt.x, r, theta.as_ref(), &a, &b)
    };
    let splits = cutoff.map(|c| transition_kinks(params, &op, c, depth)).unwrap_or_default();
    let v = crate::quadrature::integrate_with_cutoff(&weight, &params.k, &params.d_scale, cutoff, &radius, &splits, depth, r + 3, integrand, cfg)?;
    Ok(assemble(params, r, v, &a, &b))
}

#[derive(Clone, Debug, Serialize)]
pub struct SharpnessARow {
    pub eps_0: Real,
    pub quotient_a: Real,
    /// quotient_A − |A|.
    pub gap: Real,
    /// Previous gap ÷ this gap (absent on the first row).
    pub gap_ratio: Option<Real>,
    pub err: Real,
}

#[derive(Clone, Debug, Serialize)]
pub struct SharpnessAReport {
    pub params: ParamsSummary,
    pub rows: Vec<SharpnessARow>,
    /// Two-point linear extrapolation to ε_0 = 0 from the last two rows.
    pub extrapolated: Real,
    /// |A| from the closed form, for comparison only.
    pub reference: Real,
}

/// quotient_A(ε_0) = lhs/t0 for u = χ·d^{s_0} along a decreasing grid.
pub fn sharpness_a_sweep(params: &InequalityParams, eps0_grid: &[Rational], cfg: &QuadConfig) -> Result<SharpnessAReport> {
    if eps0_grid.len() < 2 || eps0_grid.iter().any(|e| *e <= 0) || eps0_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Domain("ε_0 grid must be positive, decreasing, with at least two points".into()));
    }
    let cut = CutoffSpec::standard(&params.radius);
    let reports: Vec<Result<RemainderReport>> =
        eps0_grid.par_iter().map(|e| family_sides(params, std::slice::from_ref(e), Some(&cut), 0, None, cfg)).collect();
    let reference = abs_constant_a(params)?;
    let mut rows: Vec<SharpnessARow> = Vec::with_capacity(eps0_grid.len());
    for (e, rep) in eps0_grid.iter().zip(reports) {
        let rep = rep?;
        if !rep.converged {
            return Err(Error::Convergence(format!("sharpness A at ε_0 = {e}")));
        }
        let q = &rep.lhs / &rep.t0;
        let gap = &q - &reference;
        let gap_ratio = rows.last().map(|prev: &SharpnessARow| &prev.gap / &gap);
        let err = (&rep.error_budget / &rep.t0).abs();
        rows.push(SharpnessARow { eps_0: Real::from_rational(e), quotient_a: q, gap, gap_ratio, err });
    }
    let n = rows.len();
    let extrapolated = richardson(&rows[n - 2].eps_0, &rows[n - 2].quotient_a, &rows[n - 1].eps_0, &rows[n - 1].quotient_a);
    Ok(SharpnessAReport { params: params.summary(), rows, extrapolated, reference })
}

/// Linear extrapolation to 0 through (x1, y1), (x2, y2).
pub fn richardson(x1: &Real, y1: &Real, x2: &Real, y2: &Real) -> Real {
    y2 + (y2 - y1) * x2 / (x1 - x2)
}

/// How the inner limits ε_0, …, ε_{r−1} → 0 are taken at fixed ε_r.
#[derive(Clone, Debug, PartialEq)]
#[derive(Default)]
pub enum InnerLimit {
    /// Closed-form limit: divergent lower-order parts are total τ-derivatives and drop out.
    #[default]
    Exact,
    /// Two-point linear extrapolation with all inner ε equal to each of the two values.
    Richardson { eps_hi: Rational, eps_lo: Rational },
}


#[derive(Clone, Debug)]
pub struct SharpnessBConfig {
    /// ε_r values, decreasing.
    pub schedule: Vec<Rational>,
    pub inner: InnerLimit,
    /// Diagonal ε values for the θ-exponent probe (empty to skip).
    pub theta: Rational,
    pub theta_schedule: Vec<Rational>,
}

impl Default for SharpnessBConfig {
    fn default() -> Self {
        let sched = vec![Rational::from((1, 10)), Rational::from((1, 100)), Rational::from((1, 1000))];
        SharpnessBConfig { schedule: sched.clone(), inner: InnerLimit::Exact, theta: Rational::from(1), theta_schedule: sched }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SharpnessBRow {
    pub eps_r: Real,
    /// Limit of the remainder ÷ last series term as the inner ε vanish.
    pub quotient: Real,
    pub numerator: Real,
    pub denominator: Real,
    pub err: Real,
}

#[derive(Clone, Debug, Serialize)]
pub struct ThetaRow {
    pub eps: Real,
    pub quotient: Real,
    pub err: Real,
}

#[derive(Clone, Debug, Serialize)]
pub struct SharpnessBReport {
    pub params: ParamsSummary,
    pub r: usize,
    pub rows: Vec<SharpnessBRow>,
    pub decreasing: bool,
    /// Linear extrapolation in ε_r from the last two rows.
    pub extrapolated: Real,
    /// |B| from the closed form, for comparison only.
    pub reference: Real,
    pub theta: Real,
    pub theta_rows: Vec<ThetaRow>,
    pub converged: bool,
}

/// (1+x)^p − 1 − px − p(p−1)x²/2 without cancellation for small x.
fn binomial_tail3(x: &Real, p: &Real) -> Real {
    if x.abs() > 0.25 {
        return (x + 1.0).abs().powf(p) - 1.0 - p * x - p * (p - 1.0) / 2.0 * x.powi(2);
    }
    let mut coeff = p * (p - 1.0) / 2.0;
    let mut pow = x.powi(2);
    let mut sum = Real::zero();
    let eps = crate::real::epsilon();
    for n in 3..10_000 {
        coeff = coeff * (p - (n as f64 - 1.0)) / (n as f64);
        pow *= x;
        let term = &coeff * &pow;
        sum += &term;
        if term.abs() <= &eps * sum.abs() || term.is_zero() {
            break;
        }
    }
    sum
}

/// Quotient at fixed ε_r with ε_0 = … = ε_{r−1} = 0 taken in closed form.
///
/// On the plateau, |Φ|^p − |A| − |B|Σ_{i<r}P_i² splits into a multiple of P_r², total
/// τ-derivatives of E·(κ_0 + κ·Σ_{i<r}P_i), and a remainder H that is O(X_1³). Only the
/// boundary values of the derivatives at R_flat survive the limit.
fn exact_inner_quotient(params: &InequalityParams, r: usize, eps_r: &Rational, cut: &CutoffSpec, cfg: &QuadConfig) -> Result<SharpnessBRow> {
    let (a_abs, b_abs) = constants(params)?;
    let p = params.p_real();
    let mut eps = vec![Rational::new(); r + 1];
    eps[r] = eps_r.clone();
    let (s0, s) = family_exponents(params, &eps);
    let op = ReducedOperator::new(params.m, &params.k_real(), &s0, s.clone());
    let alpha = op.poly[0].clone();
    let a1 = op.poly[1].clone();
    let a2h = op.poly.get(2).cloned().unwrap_or_else(Real::zero);
    if alpha.is_zero() {
        return Err(Error::Domain("α vanishes at the critical exponent".into()));
    }
    let w = alpha.abs().powf(&(&p - 2.0));
    let alpha_p = alpha.abs().powf(&p);
    let kappa0 = &w * &alpha * &a1;
    let c2 = &w * (&p * &alpha * &a2h + &p * (&p - 1.0) / 2.0 * a1.powi(2));
    let c2p = &w * &p * &alpha * &a2h;
    let kappa = (&c2p - &c2 * 2.0 / &p) / &p;
    let sr = &s[r - 1];
    let a_rr = &p * sr / 2.0 * &w * (&alpha * &a2h * 2.0 * (sr + 1.0) + (&p - 1.0) * a1.powi(2) * sr);

    let d = &params.d_scale;
    let er = Real::from_rational(eps_r);
    let xf = crate::iterlog::x_values(&(&cut.r_flat / d), r)?;
    let pf = products(&xf, r);
    let mut e_f = xf[r - 1].powf(&(&er - 1.0));
    for x in &xf[..r - 1] {
        e_f /= x;
    }
    let boundary = &e_f * (&kappa0 + &kappa * pf[..r - 1].iter().fold(Real::zero(), |acc, v| acc + v));
    let gamma_plateau = xf[r - 1].powf(&er) / &er;

    // ∫E·H dτ on the plateau, with X_1³ moved into the weight.
    let mut h_powers: Vec<Rational> = eps[1..].iter().map(|e| Rational::from(e - 1u32)).collect();
    h_powers[0] += 3;
    let h_weight = PowerWeight::new(-params.k.clone(), h_powers);
    let h_int = integrate_weighted(&h_weight, &params.k, d, &Real::zero(), &cut.r_flat, Substitution::LogScale, r, 1, |pt| {
        let parts = op.plateau_parts(&pt.x);
        let y = &a1 * &parts.g / &alpha;
        let z = (&a2h * (parts.g.powi(2) + &parts.g_prime) + &parts.higher) / &alpha;
        let x = &y + &z;
        let h = &alpha_p * (binomial_tail3(&x, &p) + &p * &parts.higher / &alpha + &p * (&p - 1.0) / 2.0 * &z * (&y * 2.0 + &z));
        vec![h / pt.x[0].clone().powi(3)]
    }, cfg)?;

    // Transition [R_flat, R] at the limiting exponents.
    let t_weight = PowerWeight::new(-params.k.clone(), eps[1..].iter().map(|e| Rational::from(e - 1u32)).collect());
    let trans_f = |pt: &TowerPoint| {
        let Ok(cj) = cut.log_jet(&pt.t, params.m as usize) else {
            return vec![Real::zero(), Real::zero()];
        };
        let chi_p = cutoff_pow(&cj.coeffs[0], &p);
        let phi = op.phi(&pt.x, Some(&cj));
        let prods = products(&pt.x, r);
        let mut num = phi.abs().powf(&p) - &a_abs * &chi_p;
        for pi in &prods[..r - 1] {
            num -= &b_abs * pi.powi(2) * &chi_p;
        }
        vec![num, prods[r - 1].powi(2) * &chi_p]
    };
    let mut bounds = vec![cut.r_flat.clone()];
    bounds.extend(transition_kinks(params, &op, cut, r));
    bounds.push(cut.radius.clone());
    let mut trans: Option<VectorResult> = None;
    for w in bounds.windows(2) {
        let part = integrate_weighted(&t_weight, &params.k, d, &w[0], &w[1], Substitution::Identity, r, 2, trans_f, cfg)?;
        trans = Some(match trans {
            None => part,
            Some(t) => t.join(part),
        });
    }
    let trans = trans.expect("at least one panel");

    let numerator = &a_rr * &gamma_plateau + &h_int.values[0] + &boundary + &trans.values[0];
    let denominator = &gamma_plateau + &trans.values[1];
    let err = (&h_int.errors[0] + &trans.errors[0] + &trans.errors[1] * (&numerator / &denominator).abs()) / &denominator;
    if !(h_int.converged && trans.converged) {
        return Err(Error::Convergence(format!("exact inner limit at ε_r = {eps_r}")));
    }
    Ok(SharpnessBRow { eps_r: er, quotient: &numerator / &denominator, numerator, denominator, err })
}

fn richardson_inner_quotient(
    params: &InequalityParams,
    r: usize,
    eps_r: &Rational,
    hi: &Rational,
    lo: &Rational,
    cut: &CutoffSpec,
    cfg: &QuadConfig,
) -> Result<SharpnessBRow> {
    let at = |delta: &Rational| -> Result<RemainderReport> {
        let mut eps = vec![delta.clone(); r + 1];
        eps[r] = eps_r.clone();
        let rep = family_sides(params, &eps, Some(cut), r, None, cfg)?;
        if !rep.converged {
            return Err(Error::Convergence(format!("inner point ε = {delta} at ε_r = {eps_r}")));
        }
        Ok(rep)
    };
    let (r1, r2) = (at(hi)?, at(lo)?);
    let quotient = richardson(&Real::from_rational(hi), &r1.quotient, &Real::from_rational(lo), &r2.quotient);
    let err = (&r1.error_budget / &r1.series_terms[r - 1]).abs() + (&r2.error_budget / &r2.series_terms[r - 1]).abs();
    Ok(SharpnessBRow {
        eps_r: Real::from_rational(eps_r),
        quotient,
        numerator: r2.remainder,
        denominator: r2.series_terms[r - 1].clone(),
        err,
    })
}

/// Finite-ε quotient with ε_0 = … = ε_r = ε and X_r^θ in the last series term.
pub fn theta_probe(params: &InequalityParams, r: usize, theta: &Rational, eps_grid: &[Rational], cfg: &QuadConfig) -> Result<Vec<ThetaRow>> {
    let cut = CutoffSpec::standard(&params.radius);
    eps_grid
        .par_iter()
        .map(|e| {
            let rep = family_sides(params, &vec![e.clone(); r + 1], Some(&cut), r, Some(theta), cfg)?;
            if !rep.converged {
                return Err(Error::Convergence(format!("θ probe at ε = {e}")));
            }
            let err = (&rep.error_budget / &rep.series_terms[r - 1]).abs();
            Ok(ThetaRow { eps: Real::from_rational(e), quotient: rep.quotient, err })
        })
        .collect()
}

/// Quotient of the remainder by the last series term along a decreasing ε_r schedule,
/// with the inner limits taken per `config.inner`.
pub fn sharpness_b_schedule(params: &InequalityParams, r: usize, config: &SharpnessBConfig, cfg: &QuadConfig) -> Result<SharpnessBReport> {
    if r == 0 {
        return Err(Error::Domain("sharpness of B needs r ≥ 1".into()));
    }
    let sched = &config.schedule;
    if sched.len() < 2 || sched.iter().any(|e| *e <= 0) || sched.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Domain("ε_r schedule must be positive, decreasing, with at least two points".into()));
    }
    let cut = CutoffSpec::standard(&params.radius);
    let rows: Vec<SharpnessBRow> = sched
        .par_iter()
        .map(|e| match &config.inner {
            InnerLimit::Exact => exact_inner_quotient(params, r, e, &cut, cfg),
            InnerLimit::Richardson { eps_hi, eps_lo } => richardson_inner_quotient(params, r, e, eps_hi, eps_lo, &cut, cfg),
        })
        .collect::<Result<_>>()?;
    let decreasing = rows.windows(2).all(|w| w[1].quotient < w[0].quotient);
    let n = rows.len();
    let extrapolated = richardson(&rows[n - 2].eps_r, &rows[n - 2].quotient, &rows[n - 1].eps_r, &rows[n - 1].quotient);
    let theta_rows = if config.theta_schedule.is_empty() {
        Vec::new()
    } else {
        theta_probe(params, r, &config.theta, &config.theta_schedule, cfg)?
    };
    Ok(SharpnessBReport {
        params: params.summary(),
        r,
        rows,
        decreasing,
        extrapolated,
        reference: abs_constant_b(params)?,
        theta: Real::from_rational(&config.theta),
        theta_rows,
        converged: true,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DSweepRow {
    #[serde(rename = "D")]
    pub d_scale: Real,
    pub probe: usize,
    pub remainder: Real,
    pub error_budget: Real,
    pub series_terms: Vec<Real>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DSweepReport {
    pub params: ParamsSummary,
    pub rows: Vec<DSweepRow>,
    /// Smallest grid D from which every probe has remainder ≥ −10·budget at all larger grid D.
    pub threshold: Option<Real>,
}

/// Remainder of each probe family as a function of D.
pub fn d_scale_sweep(params: &InequalityParams, probes: &[Vec<Rational>], d_grid: &[Real], r: usize, cfg: &QuadConfig) -> Result<DSweepReport> {
    if d_grid.iter().any(|d| *d < params.radius) {
        return Err(Error::Domain("every D must be at least R".into()));
    }
    let cut = CutoffSpec::standard(&params.radius);
    let cells: Vec<(usize, usize)> = (0..d_grid.len()).flat_map(|i| (0..probes.len()).map(move |j| (i, j))).collect();
    let rows: Vec<DSweepRow> = cells
        .par_iter()
        .map(|&(i, j)| {
            let pd = params.clone().with_domain(params.radius.clone(), d_grid[i].clone())?;
            let rep = family_sides(&pd, &probes[j], Some(&cut), r, None, cfg)?;
            Ok(DSweepRow {
                d_scale: d_grid[i].clone(),
                probe: j,
                remainder: rep.remainder,
                error_budget: rep.error_budget,
                series_terms: rep.series_terms,
            })
        })
        .collect::<Result<_>>()?;
    let ok_at = |i: usize| rows.iter().filter(|row| row.d_scale == d_grid[i]).all(|row| row.remainder >= -(&row.error_budget * 10.0));
    let mut order: Vec<usize> = (0..d_grid.len()).collect();
    order.sort_by(|&x, &y| d_grid[x].partial_cmp(&d_grid[y]).expect("finite D"));
    let mut threshold = None;
    for &i in order.iter().rev() {
        if ok_at(i) {
            threshold = Some(d_grid[i].clone());
        } else {
            break;
        }
    }
    Ok(DSweepReport { params: params.summary(), rows, threshold })
}
