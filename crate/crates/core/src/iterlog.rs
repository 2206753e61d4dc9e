//! Iterated logarithms X_1(t) = (1 − log t)^{−1}, X_i = X_1 ∘ X_{i−1}, and the series
//! η = Σ X_1⋯X_i, ζ = Σ X_1²⋯X_i², θ = Σ_i Σ_{j≤i} X_1³⋯X_j³X_{j+1}²⋯X_i².
//!
//! Points are carried as ℓ = −log t so that t far below the double range is reachable.
//! Writing X_i = 1/(1+u_i) gives u_1 = ℓ and u_{i+1} = log(1+u_i); the series then
//! are orbit sums of the map g(u) = log(1+u). Only u_i ~ 2/i, so the terms decay like
//! i^{−2}: the orbit is summed explicitly until u < 0.02 and the remainder is taken from
//! formal power-series solutions of the orbit equations.

use std::sync::{Arc, Mutex};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::central_difference;
use crate::jet::Jet;
use crate::real::{precision_bits, precision_digits, Real};
use crate::sharp_constants::{IdentityRecord, IdentityReport};

/// Below this u the orbit tail is summed from its asymptotic series.
const TAIL_SWITCH: f64 = 0.02;

/// Smallest admissible ℓ; corresponds to t ≤ 1 − 10⁻⁶.
fn min_neg_log() -> Real {
    -Real::from(-1e-6).ln_1p()
}

/// ℓ = −log t for t ∈ (0, 1].
fn neg_log(t: &Real) -> Result<Real> {
    if !t.is_positive() || *t > 1.0 {
        return Err(Error::Domain(format!("t = {t} is outside (0, 1]")));
    }
    Ok(-t.ln())
}

/// u_1 … u_r for ℓ ≥ 0.
pub fn u_orbit(ell: &Real, r: usize) -> Vec<Real> {
    let mut out = Vec::with_capacity(r);
    let mut u = ell.clone();
    for _ in 0..r {
        out.push(u.clone());
        u = u.ln_1p();
    }
    out
}

/// (X_1(t), …, X_r(t)) for t ∈ (0, 1].
pub fn x_values(t: &Real, r: usize) -> Result<Vec<Real>> {
    Ok(x_values_neg_log(&neg_log(t)?, r))
}

/// (X_1, …, X_r) at t = e^{−ℓ}, ℓ ≥ 0.
pub fn x_values_neg_log(ell: &Real, r: usize) -> Vec<Real> {
    u_orbit(ell, r).iter().map(|u| (u + 1.0).recip()).collect()
}

/// d/dt X_i^β = (β/t)·X_1⋯X_{i−1}·X_i^{β+1}.
pub fn x_derivative(t: &Real, i: usize, beta: &Real) -> Result<Real> {
    if i == 0 {
        return Err(Error::Domain("X_i is indexed from 1".into()));
    }
    if *t >= 1.0 || !t.is_positive() {
        return Err(Error::Domain(format!("t = {t} is outside (0, 1)")));
    }
    if beta.is_zero() {
        return Ok(Real::zero());
    }
    let x = x_values(t, i)?;
    let head: Real = x[..i - 1].iter().cloned().product();
    Ok(beta / t * head * x[i - 1].powf(&(beta + 1.0)))
}

/// Power-series data for the orbit tails, built once per working precision.
struct TailSeries {
    bits: u32,
    /// λ with Λ(u) = u²·exp(λ(u)) solving Λ(g(u)) = Λ(u)/(1 + g(u)).
    lambda: Vec<Real>,
    /// Σ with Σ − Σ∘g = Λ, Λ², Λ²·(Σ_η∘g) respectively.
    eta: Vec<Real>,
    zeta: Vec<Real>,
    cross: Vec<Real>,
}

static TAIL_CACHE: Mutex<Vec<Arc<TailSeries>>> = Mutex::new(Vec::new());

fn tail_series() -> Arc<TailSeries> {
    let bits = precision_bits();
    let mut cache = TAIL_CACHE.lock().expect("tail cache poisoned");
    if let Some(t) = cache.iter().find(|t| t.bits == bits) {
        return t.clone();
    }
    let t = Arc::new(TailSeries::build(bits, (precision_digits() as usize + 20).max(40)));
    cache.push(t.clone());
    t
}

impl TailSeries {
    fn build(bits: u32, n: usize) -> Self {
        let zero = Real::zero();
        let g_coeffs = (0..=n)
            .map(|k| match k {
                0 => Real::zero(),
                _ if k % 2 == 1 => Real::ratio(1, k as i64),
                _ => -Real::ratio(1, k as i64),
            })
            .collect();
        let g = Jet::from_coeffs(zero.clone(), g_coeffs);
        let mut pows = vec![Jet::constant(Real::one(), zero.clone(), n)];
        for j in 1..=n {
            let next = pows[j - 1].mul_jet(&g);
            pows.push(next);
        }
        // Coefficients of s with s − s∘g = h, s(0) = 0. Matching u^{k+1}: the
        // new unknown s_k enters with weight k/2 and s_{k+1} cancels.
        let solve = |h: &Jet| -> Jet {
            let mut s = vec![Real::zero(); n + 1];
            for k in 1..n {
                let mut acc = h.coeff(k + 1);
                for (j, sj) in s.iter().enumerate().take(k).skip(1) {
                    acc += sj * &pows[j].coeffs[k + 1];
                }
                s[k] = acc / Real::ratio(k as i64, 2);
            }
            Jet::from_coeffs(zero.clone(), s)
        };
        // λ − λ∘g = 2·log(g(u)/u) + log(1 + g(u)).
        let g_over_u = {
            let mut c: Vec<Real> = g.coeffs[1..].to_vec();
            c.push(Real::zero());
            Jet::from_coeffs(zero.clone(), c)
        };
        let log_ratio = g_over_u.ln().expect("g(u)/u starts at 1");
        let log_1p_g = {
            let log1p: Vec<Real> = g.coeffs.clone();
            g.compose(&log1p)
        };
        let lambda = solve(&log_ratio.scale(&Real::from(2.0)).add_jet(&log_1p_g));
        let big_lambda = {
            let e = lambda.exp();
            let mut c = vec![Real::zero(); n + 1];
            for k in 2..=n {
                c[k] = e.coeffs[k - 2].clone();
            }
            Jet::from_coeffs(zero.clone(), c)
        };
        let eta = solve(&big_lambda);
        let l2 = big_lambda.mul_jet(&big_lambda);
        let zeta = solve(&l2);
        let cross = solve(&l2.mul_jet(&g.compose(&eta.coeffs)));
        TailSeries { bits, lambda: lambda.coeffs, eta: eta.coeffs, zeta: zeta.coeffs, cross: cross.coeffs }
    }
}

/// Sums a power series at x (0 ≤ x < 1), stopping once a term drops below `tol·|partial|`.
/// Returns the value and the size of the first omitted term.
fn eval_series(c: &[Real], x: &Real, tol: &Real) -> (Real, Real) {
    let mut sum = Real::zero();
    let mut pw = Real::one();
    for (k, ck) in c.iter().enumerate() {
        let term = ck * &pw;
        if k > 2 && !ck.is_zero() && term.abs() < tol * sum.abs() {
            return (sum, term.abs());
        }
        sum += term;
        pw *= x;
    }
    let last = c.last().map(|v| (v * &pw).abs()).unwrap_or_else(Real::zero);
    (sum, last)
}

/// η, ζ, θ at one point with the bookkeeping of the evaluation.
#[derive(Clone, Debug, Serialize)]
pub struct EtaZetaTheta {
    pub eta: Real,
    pub zeta: Real,
    pub theta: Real,
    /// Orbit terms summed explicitly before the tail series took over.
    pub terms: usize,
    /// Bound on the truncation error of the tail series.
    pub tail_bound: Real,
}

/// η, ζ, θ at t ∈ (0, 1 − 10⁻⁶].
pub fn eta_zeta_theta(t: &Real, tol: &Real) -> Result<EtaZetaTheta> {
    if *t >= 1.0 {
        return Err(Error::Convergence(format!("the series diverge at t = {t}")));
    }
    eta_zeta_theta_neg_log(&neg_log(t)?, tol)
}

/// η, ζ, θ at t = e^{−ℓ}.
pub fn eta_zeta_theta_neg_log(ell: &Real, tol: &Real) -> Result<EtaZetaTheta> {
    if *ell < min_neg_log() {
        // Partial sums grow like 2/ℓ; report the first few for diagnosis.
        let p: Real = x_values_neg_log(ell, 3).into_iter().product();
        return Err(Error::Convergence(format!(
            "t = e^-{ell} is within 1e-6 of 1 (η ≈ 2/ℓ; X_1X_2X_3 = {p})"
        )));
    }
    let ts = tail_series();
    let mut u = ell.clone();
    let mut p = (&u + 1.0).recip();
    let mut s = p.clone();
    let mut eta = p.clone();
    let mut zeta = &p * &p;
    let mut theta = &zeta * &s;
    let mut terms = 1;
    while u >= TAIL_SWITCH {
        u = u.ln_1p();
        p /= &u + 1.0;
        s += &p;
        let p2 = &p * &p;
        eta += &p;
        theta += &p2 * &s;
        zeta += p2;
        terms += 1;
    }
    // Tail beyond u_n = u: with Λ_i = Λ(u_i), Σ_{i>n} P_i = P_n·Σ_η(g(u))/Λ(u), etc.
    let gu = u.ln_1p();
    let (lam, e0) = eval_series(&ts.lambda, &u, tol);
    let big = u.powi(2) * lam.exp();
    let (se, e1) = eval_series(&ts.eta, &gu, tol);
    let (sz, e2) = eval_series(&ts.zeta, &gu, tol);
    let (sh, e3) = eval_series(&ts.cross, &gu, tol);
    let eta_hat = &se / &big;
    let zeta_hat = &sz / big.powi(2);
    let theta_hat = (&se * &sz - sh) / big.powi(3);
    eta += &p * eta_hat;
    let p2 = &p * &p;
    theta += &p2 * (&s * &zeta_hat + &p * theta_hat);
    zeta += &p2 * zeta_hat;
    let tail_bound = (e0 * &eta + (e1 + e2 + e3) / big.powi(3)) * &p;
    Ok(EtaZetaTheta { eta, zeta, theta, terms, tail_bound })
}

/// Depth-r truncation of η with the exact size of what was left out.
#[derive(Clone, Debug, Serialize)]
pub struct IterLogDepth {
    pub r: usize,
    pub tail_bound: Real,
}

impl IterLogDepth {
    pub fn at(t: &Real, r: usize, tol: &Real) -> Result<Self> {
        let full = eta_zeta_theta(t, tol)?;
        let mut prod = Real::one();
        let mut partial = Real::zero();
        for x in x_values(t, r)? {
            prod *= x;
            partial += &prod;
        }
        Ok(IterLogDepth { r, tail_bound: full.eta - partial })
    }
}

/// (η³, ηζ, θ) divided by X_1³; each tends to 1 as t → 0⁺, slowly in log(1/t).
pub fn cubic_ratios_neg_log(ell: &Real, tol: &Real) -> Result<[Real; 3]> {
    let v = eta_zeta_theta_neg_log(ell, tol)?;
    let x1c = (ell + 1.0).recip().powi(3);
    Ok([v.eta.powi(3) / &x1c, &v.eta * &v.zeta / &x1c, v.theta / x1c])
}

/// One row of the iterated-log table.
#[derive(Clone, Debug, Serialize)]
pub struct IterLogRow {
    pub t: Real,
    pub x: Vec<Real>,
    pub eta: Real,
    pub zeta: Real,
    pub theta: Real,
}

pub fn tabulate(ts: &[Real], r: usize, tol: &Real) -> Result<Vec<IterLogRow>> {
    ts.iter()
        .map(|t| {
            let v = eta_zeta_theta(t, tol)?;
            Ok(IterLogRow { t: t.clone(), x: x_values(t, r)?, eta: v.eta, zeta: v.zeta, theta: v.theta })
        })
        .collect()
}

/// Checks t·η' = (η² + ζ)/2 and t·ζ' = 2θ with derivatives from an order-12 central
/// difference in ℓ = −log t (so t·d/dt = −d/dℓ), step `rel_step·ℓ`.
pub fn verify_eta_identities(ells: &[Real], tol: &Real, rel_step: &Real) -> Result<IdentityReport> {
    let mut rep = IdentityReport::default();
    for ell in ells {
        let tag = format!("t=e^-{}", ell.to_string_digits(6));
        let v = eta_zeta_theta_neg_log(ell, tol)?;
        let h = ell * rel_step;
        let f_eta = |x: &Real| eta_zeta_theta_neg_log(x, tol).map(|v| v.eta).unwrap_or_else(|_| Real::nan());
        let f_zeta = |x: &Real| eta_zeta_theta_neg_log(x, tol).map(|v| v.zeta).unwrap_or_else(|_| Real::nan());
        let d_eta = -central_difference(f_eta, ell, &h, 6);
        let d_zeta = -central_difference(f_zeta, ell, &h, 6);
        let rhs_eta = (v.eta.powi(2) + &v.zeta) / 2.0;
        rep.push(IdentityRecord::numeric("t eta' = (eta^2 + zeta)/2", &tag, d_eta, rhs_eta, &Real::zero()));
        rep.push(IdentityRecord::numeric("t zeta' = 2 theta", &tag, d_zeta, &v.theta * 2.0, &Real::zero()));
    }
    Ok(rep)
}

/// Checks d/dt X_i^β against a central difference at each grid point.
pub fn verify_derivative_rule(ells: &[Real], pairs: &[(usize, Real)], rel_step: &Real) -> Result<IdentityReport> {
    let mut rep = IdentityReport::default();
    for ell in ells {
        let t = (-ell).exp();
        for (i, beta) in pairs {
            let tag = format!("t=e^-{} i={i} beta={}", ell.to_string_digits(6), beta.to_string_digits(6));
            let closed = &t * x_derivative(&t, *i, beta)?;
            let f = |x: &Real| x_values_neg_log(x, *i)[*i - 1].powf(beta);
            let fd = -central_difference(f, ell, &(ell * rel_step), 6);
            rep.push(IdentityRecord::numeric("t d/dt X_i^beta = beta X_1..X_(i-1) X_i^(beta+1)", &tag, closed, fd, &Real::zero()));
        }
    }
    Ok(rep)
}
