//! Singular radial integrals ∫ t^{c+k−1}·∏X_l(t/D)^{a_l}·F(t) dt.
//!
//! Near t = 0 the integral is taken in w = X_d(t/D) for a depth d chosen from the
//! exponents, which turns power-of-log singularities into integrands that are flat at
//! w = 0. Panels are integrated by tanh-sinh with level halving; panels that do not
//! converge are bisected. Node evaluations run in parallel and are summed in node order.

use rayon::prelude::*;
use rug::Rational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::poly_fit;
use crate::params::InequalityParams;
use crate::radial_calculus::{CutoffSpec, RadialProfile};
use crate::real::{epsilon, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Substitution {
    Identity,
    LogScale,
}

#[derive(Clone, Debug)]
pub struct QuadConfig {
    pub tol_abs: Real,
    pub tol_rel: Real,
    /// Finest tanh-sinh level per panel (step 2^{−level}).
    pub max_level: usize,
    /// Total integrand evaluations before giving up.
    pub max_evals: usize,
    pub max_bisections: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            tol_abs: Real::from(1e-20),
            tol_rel: Real::from(1e-20),
            max_level: 9,
            max_evals: 1_000_000,
            max_bisections: 12,
        }
    }
}

impl QuadConfig {
    pub fn with_tol(tol: &Real) -> Self {
        QuadConfig { tol_abs: tol.clone(), tol_rel: tol.clone(), ..Default::default() }
    }

    fn accepts(&self, err: &Real, value: &Real) -> bool {
        *err <= self.tol_abs.clone().max(&self.tol_rel * value.abs())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IntegralResult {
    pub value: Real,
    pub err_estimate: Real,
    pub panels: usize,
    pub evaluations: usize,
    pub substitution: Substitution,
    pub converged: bool,
}

/// Several integrals over the same nodes.
#[derive(Clone, Debug, Serialize)]
pub struct VectorResult {
    pub values: Vec<Real>,
    pub errors: Vec<Real>,
    pub panels: usize,
    pub evaluations: usize,
    pub substitution: Substitution,
    pub converged: bool,
}

impl VectorResult {
    fn absorb(&mut self, o: VectorResult) {
        for (v, x) in self.values.iter_mut().zip(o.values) {
            *v += x;
        }
        for (e, x) in self.errors.iter_mut().zip(o.errors) {
            *e += x;
        }
        self.panels += o.panels;
        self.evaluations += o.evaluations;
        self.converged &= o.converged;
    }

    pub fn component(&self, i: usize) -> IntegralResult {
        IntegralResult {
            value: self.values[i].clone(),
            err_estimate: self.errors[i].clone(),
            panels: self.panels,
            evaluations: self.evaluations,
            substitution: self.substitution,
            converged: self.converged,
        }
    }

    /// Sum of two results over adjacent ranges.
    pub fn join(mut self, o: VectorResult) -> VectorResult {
        self.absorb(o);
        self
    }
}

/// One tanh-sinh node on [a, b]: the point, its distances to both ends, and the weight
/// for unit step.
struct Node {
    x: Real,
    from_a: Real,
    to_b: Real,
    weight: Real,
}

fn node(a: &Real, b: &Real, tau: &Real) -> Node {
    let half_pi = Real::pi() / 2.0;
    let len = b - a;
    let y = &half_pi * tau.sinh();
    let q = (-(y.abs() * 2.0)).exp();
    let near = &len * &q / (&q + 1.0);
    let far = &len / (&q + 1.0);
    let (from_a, to_b) = if tau.is_negative() { (near, far) } else { (far, near) };
    let weight = &len / 2.0 * half_pi * tau.cosh() * &q * 4.0 / (&q + 1.0).powi(2);
    Node { x: a + &from_a, from_a, to_b, weight }
}

/// Integrand on a panel: receives (x, x − a, b − x).
pub trait PanelFn: Sync {
    fn eval(&self, x: &Real, from_a: &Real, to_b: &Real) -> Vec<Real>;
}

impl<F: Fn(&Real, &Real, &Real) -> Vec<Real> + Sync> PanelFn for F {
    fn eval(&self, x: &Real, from_a: &Real, to_b: &Real) -> Vec<Real> {
        self(x, from_a, to_b)
    }
}

fn weighted_sum<F: PanelFn>(f: &F, a: &Real, b: &Real, taus: &[Real], dim: usize) -> Vec<Real> {
    let terms: Vec<Vec<Real>> = taus
        .par_iter()
        .map(|tau| {
            let nd = node(a, b, tau);
            if nd.weight.is_zero() || nd.from_a.is_zero() || nd.to_b.is_zero() {
                return vec![Real::zero(); dim];
            }
            f.eval(&nd.x, &nd.from_a, &nd.to_b).into_iter().map(|v| v * &nd.weight).collect()
        })
        .collect();
    let mut acc = vec![Real::zero(); dim];
    for t in terms {
        for (a, v) in acc.iter_mut().zip(t) {
            *a += v;
        }
    }
    acc
}

/// Tanh-sinh on one panel without subdivision.
fn tanh_sinh_panel<F: PanelFn>(f: &F, a: &Real, b: &Real, dim: usize, cfg: &QuadConfig) -> VectorResult {
    const TAU_CAP: i64 = 8;
    // Level 0 (unit step) also fixes the truncation of the τ range.
    let level0: Vec<Vec<Real>> = (-TAU_CAP..=TAU_CAP)
        .into_par_iter()
        .map(|j| {
            let nd = node(a, b, &Real::from_int(j));
            if nd.from_a.is_zero() || nd.to_b.is_zero() {
                return vec![Real::zero(); dim];
            }
            f.eval(&nd.x, &nd.from_a, &nd.to_b).into_iter().map(|v| v * &nd.weight).collect()
        })
        .collect();
    let mut evaluations = level0.len();
    let mut sum = vec![Real::zero(); dim];
    for t in &level0 {
        for (s, v) in sum.iter_mut().zip(t) {
            *s += v;
        }
    }
    let negligible = |j: i64| {
        level0[(j + TAU_CAP) as usize]
            .iter()
            .zip(&sum)
            .all(|(v, s)| v.abs() <= epsilon() * s.abs() || v.is_zero())
    };
    let mut reach = TAU_CAP;
    while reach > 1 && negligible(reach) && negligible(-reach) && negligible(reach - 1) && negligible(1 - reach) {
        reach -= 1;
    }
    let reach = (reach + 1).min(TAU_CAP);
    let mut estimate = vec![Real::zero(); dim];
    for j in -reach..=reach {
        for (s, v) in estimate.iter_mut().zip(&level0[(j + TAU_CAP) as usize]) {
            *s += v;
        }
    }
    // `raw` is the unscaled node sum at the current step h; the estimate is h·raw.
    let mut raw = estimate.clone();
    let mut errors = vec![Real::infinity(); dim];
    let mut converged = false;
    for level in 1..=cfg.max_level {
        let h = Real::from(2.0).powi(-(level as i32));
        let count = reach << level;
        let taus: Vec<Real> = (-count..=count).filter(|j| j.rem_euclid(2) == 1).map(|j| &h * (j as f64)).collect();
        evaluations += taus.len();
        let fresh = weighted_sum(f, a, b, &taus, dim);
        for (r, v) in raw.iter_mut().zip(fresh) {
            *r += v;
        }
        let current: Vec<Real> = raw.iter().map(|r| r * &h).collect();
        errors = current.iter().zip(&estimate).map(|(c, p)| (c - p).abs()).collect();
        estimate = current;
        if level >= 2 && errors.iter().zip(&estimate).all(|(e, v)| cfg.accepts(e, v)) {
            converged = true;
            break;
        }
    }
    VectorResult { values: estimate, errors, panels: 1, evaluations, substitution: Substitution::Identity, converged }
}

/// Adaptive tanh-sinh over [a, b]: panels that fail to converge are bisected, in
/// left-to-right order, until the bisection depth or the evaluation budget runs out.
pub fn tanh_sinh<F: PanelFn>(f: &F, a: &Real, b: &Real, dim: usize, cfg: &QuadConfig) -> VectorResult {
    let mut budget = cfg.max_evals;
    adapt(f, a, b, dim, cfg, 0, &mut budget)
}

fn adapt<F: PanelFn>(f: &F, a: &Real, b: &Real, dim: usize, cfg: &QuadConfig, depth: usize, budget: &mut usize) -> VectorResult {
    let r = tanh_sinh_panel(f, a, b, dim, cfg);
    *budget = budget.saturating_sub(r.evaluations);
    if r.converged || depth >= cfg.max_bisections || *budget == 0 {
        return r;
    }
    let mid = (a + b) / 2.0;
    // Halve the tolerance budget between the two halves.
    let sub = QuadConfig { tol_abs: &cfg.tol_abs / 2.0, ..cfg.clone() };
    let mut left = adapt(f, a, &mid, dim, &sub, depth + 1, budget);
    let right = adapt(f, &mid, b, dim, &sub, depth + 1, budget);
    left.evaluations += r.evaluations;
    left.absorb(right);
    left
}

/// A point of (0, D] with its iterated logarithms at t/D.
#[derive(Clone, Debug)]
pub struct TowerPoint {
    /// log t (finite even when t underflows).
    pub log_t: Real,
    pub t: Real,
    /// u_l with X_l = 1/(1 + u_l), l = 1..=n+1; u_1 = −log(t/D).
    pub u: Vec<Real>,
    /// X_1..X_n at t/D.
    pub x: Vec<Real>,
}

impl TowerPoint {
    pub fn from_t(t: &Real, d_scale: &Real, n: usize) -> Self {
        let ell = -(t / d_scale).ln();
        let mut u = Vec::with_capacity(n + 1);
        u.push(ell);
        while u.len() < n + 1 {
            let next = u.last().unwrap().ln_1p();
            u.push(next);
        }
        Self::finish(t.ln(), u, n)
    }

    /// From w = X_d(t/D), walking down to u_1 with expm1 and up with log1p.
    pub fn from_x(w: &Real, d: usize, d_scale: &Real, n: usize) -> Self {
        let len = (n + 1).max(d + 1);
        let mut u = vec![Real::zero(); len];
        u[d - 1] = w.recip() - 1.0;
        for l in (0..d - 1).rev() {
            u[l] = u[l + 1].exp_m1();
        }
        for l in d..len {
            u[l] = u[l - 1].ln_1p();
        }
        Self::finish(d_scale.ln() - &u[0], u, n)
    }

    fn finish(log_t: Real, u: Vec<Real>, n: usize) -> Self {
        let x = u[..n].iter().map(|v| (v + 1.0).recip()).collect();
        TowerPoint { t: log_t.exp(), log_t, u, x }
    }

    /// log X_l (l ≥ 1), taken as −u_{l+1} to stay finite when u_l overflows.
    pub fn log_x(&self, l: usize) -> Real {
        match self.u.get(l) {
            Some(next) => -next.clone(),
            None => -self.u[l - 1].ln_1p(),
        }
    }
}

/// t^c·∏_l X_l(t/D)^{a_l}; the radial integrand carries t^{c+k−1}.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerWeight {
    pub t_power: Rational,
    pub x_powers: Vec<Rational>,
}

impl PowerWeight {
    pub fn new(t_power: Rational, x_powers: Vec<Rational>) -> Self {
        PowerWeight { t_power, x_powers }
    }

    /// (c + k, a_1 − 1, …, a_n − 1): the integral near 0 is finite iff the first
    /// nonzero entry is positive.
    pub fn exponent_vector(&self, k: &Rational) -> Vec<Rational> {
        let mut b = vec![Rational::from(&self.t_power + k)];
        b.extend(self.x_powers.iter().map(|a| Rational::from(a - 1u32)));
        b
    }

    pub fn integrable_at_zero(&self, k: &Rational) -> bool {
        finiteness_check(&self.exponent_vector(k))
    }

    /// d = 1 + index of the first nonzero exponent; `None` when not integrable.
    pub fn substitution_depth(&self, k: &Rational) -> Option<usize> {
        let b = self.exponent_vector(k);
        let j = b.iter().position(|v| *v != 0)?;
        (b[j] > 0).then_some(j + 1)
    }
}

/// Lexicographic positivity: the first nonzero entry is positive.
pub fn finiteness_check(eps: &[Rational]) -> bool {
    eps.iter().find(|e| **e != 0).is_some_and(|e| *e > 0)
}

/// ∫_a^b t^{c+k−1}∏X_l(t/D)^{a_l}·f(point) dt for 0 ≤ a < b ≤ D, componentwise.
/// `depth` is the number of iterated logs f needs.
#[allow(clippy::too_many_arguments)]
pub fn integrate_weighted<F>(
    weight: &PowerWeight,
    k: &Rational,
    d_scale: &Real,
    a: &Real,
    b: &Real,
    substitution: Substitution,
    depth: usize,
    dim: usize,
    f: F,
    cfg: &QuadConfig,
) -> Result<VectorResult>
where
    F: Fn(&TowerPoint) -> Vec<Real> + Sync,
{
    if a.is_negative() || a >= b || *b > *d_scale {
        return Err(Error::Domain(format!("need 0 ≤ a < b ≤ D, got [{a}, {b}] with D = {d_scale}")));
    }
    if a.is_zero() && !weight.integrable_at_zero(k) {
        return Err(Error::NotIntegrable(format!(
            "exponent vector {:?} has a nonpositive leading entry",
            weight.exponent_vector(k).iter().map(|v| v.to_string()).collect::<Vec<_>>()
        )));
    }
    let n = depth.max(weight.x_powers.len());
    let ck = Real::from_rational(&Rational::from(&weight.t_power + k));
    let powers: Vec<Real> = weight.x_powers.iter().map(Real::from_rational).collect();
    let zero_t = weight.t_power.clone() + k == 0;
    let mut out = match substitution {
        Substitution::Identity => {
            let g = |t: &Real, _: &Real, _: &Real| {
                let pt = TowerPoint::from_t(t, d_scale, n);
                let mut lw = (&ck - 1.0) * &pt.log_t;
                for (l, al) in powers.iter().enumerate() {
                    if !al.is_zero() {
                        lw += al * pt.log_x(l + 1);
                    }
                }
                scaled(lw, &pt, &f, dim)
            };
            tanh_sinh(&g, a, b, dim, cfg)
        }
        Substitution::LogScale => {
            let d = weight.substitution_depth(k).unwrap_or(1);
            let n = n.max(d);
            let w_of = |t: &Real| -> Real {
                if t.is_zero() {
                    Real::zero()
                } else {
                    TowerPoint::from_t(t, d_scale, d).x[d - 1].clone()
                }
            };
            let g = |w: &Real, _: &Real, _: &Real| {
                let pt = TowerPoint::from_x(w, d, d_scale, n);
                // dt = t·dw / (X_1⋯X_{d−1}·X_d²)
                let mut lw = if zero_t { Real::zero() } else { &ck * &pt.log_t };
                for l in 1..=n.max(powers.len()) {
                    let al = powers.get(l - 1).cloned().unwrap_or_else(Real::zero);
                    let coeff = match l.cmp(&d) {
                        std::cmp::Ordering::Less => al - 1.0,
                        std::cmp::Ordering::Equal => al - 2.0,
                        std::cmp::Ordering::Greater => al,
                    };
                    if !coeff.is_zero() {
                        lw += coeff * pt.log_x(l);
                    }
                }
                scaled(lw, &pt, &f, dim)
            };
            tanh_sinh(&g, &w_of(a), &w_of(b), dim, cfg)
        }
    };
    out.substitution = substitution;
    Ok(out)
}

fn scaled<F: Fn(&TowerPoint) -> Vec<Real>>(log_w: Real, pt: &TowerPoint, f: &F, dim: usize) -> Vec<Real> {
    let w = log_w.exp();
    if w.is_zero() || w.is_nan() {
        return vec![Real::zero(); dim];
    }
    f(pt).into_iter().map(|v| v * &w).collect()
}

/// Scalar form of [`integrate_weighted`].
#[allow(clippy::too_many_arguments)]
pub fn integrate_radial<F>(
    weight: &PowerWeight,
    k: &Rational,
    d_scale: &Real,
    a: &Real,
    b: &Real,
    substitution: Substitution,
    g: F,
    cfg: &QuadConfig,
) -> Result<IntegralResult>
where
    F: Fn(&TowerPoint) -> Real + Sync,
{
    let depth = weight.x_powers.len();
    let v = integrate_weighted(weight, k, d_scale, a, b, substitution, depth, 1, |pt| vec![g(pt)], cfg)?;
    Ok(v.component(0))
}

/// ∫_0^R t^{c+k−1}∏X^{a}·f dt: log scale on the plateau, identity on the transition of
/// the cutoff (or log scale up to R without a cutoff). `f` receives t on the transition.
/// `splits` are extra panel boundaries inside the transition, such as zeros where f has a kink.
#[allow(clippy::too_many_arguments)]
pub fn integrate_with_cutoff<F>(
    weight: &PowerWeight,
    k: &Rational,
    d_scale: &Real,
    cutoff: Option<&CutoffSpec>,
    radius: &Real,
    splits: &[Real],
    depth: usize,
    dim: usize,
    f: F,
    cfg: &QuadConfig,
) -> Result<VectorResult>
where
    F: Fn(&TowerPoint, Option<&Real>) -> Vec<Real> + Sync,
{
    let Some(c) = cutoff else {
        return integrate_weighted(weight, k, d_scale, &Real::zero(), radius, Substitution::LogScale, depth, dim, |pt| f(pt, None), cfg);
    };
    let mut out = integrate_weighted(weight, k, d_scale, &Real::zero(), &c.r_flat, Substitution::LogScale, depth, dim, |pt| f(pt, None), cfg)?;
    let mut cuts: Vec<Real> = splits.iter().filter(|x| **x > c.r_flat && **x < c.radius).cloned().collect();
    cuts.sort_by(|x, y| x.partial_cmp(y).expect("finite split points"));
    cuts.push(c.radius.clone());
    let mut lo = c.r_flat.clone();
    for hi in cuts {
        let part = integrate_weighted(weight, k, d_scale, &lo, &hi, Substitution::Identity, depth, dim, |pt| f(pt, Some(&pt.t)), cfg)?;
        out = out.join(part);
        lo = hi;
    }
    out.substitution = Substitution::LogScale;
    Ok(out)
}

/// Points of (a, b) where `f` changes sign, located by sampling on `samples` equal cells and
/// bisecting to working precision. Zeros of even multiplicity are not detected.
pub fn sign_changes<F: Fn(&Real) -> Real + Sync>(f: F, a: &Real, b: &Real, samples: usize) -> Vec<Real> {
    let h = (b - a) / samples as f64;
    let xs: Vec<Real> = (1..samples).map(|i| a + &h * i as f64).collect();
    let vals: Vec<Real> = xs.par_iter().map(&f).collect();
    let brackets: Vec<(Real, Real)> = xs
        .windows(2)
        .zip(vals.windows(2))
        .filter(|(_, v)| v[0].signum() * v[1].signum() < 0)
        .map(|(x, _)| (x[0].clone(), x[1].clone()))
        .collect();
    brackets
        .into_par_iter()
        .map(|(mut lo, mut hi)| {
            let s_lo = f(&lo).signum();
            for _ in 0..crate::real::precision_bits() + 8 {
                let mid = (&lo + &hi) / 2.0;
                if mid == lo || mid == hi {
                    break;
                }
                let s = f(&mid).signum();
                if s == 0 {
                    return mid;
                }
                if s == s_lo {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            (lo + hi) / 2.0
        })
        .collect()
}

/// Γ_ij = ∫ t^{ε_0−1}·∏_l X_l^{−1+ε_l}·Y_ij (·χ^p), Y_ij = X_1²⋯X_i²X_{i+1}⋯X_j.
pub fn gamma_ij(
    params: &InequalityParams,
    eps: &[Rational],
    i: usize,
    j: usize,
    cutoff: Option<&CutoffSpec>,
    cfg: &QuadConfig,
) -> Result<IntegralResult> {
    if i > j || j + 1 > eps.len() {
        return Err(Error::Domain(format!("need 0 ≤ i ≤ j ≤ r, got ({i}, {j}) with r = {}", eps.len() - 1)));
    }
    let weight = gamma_weight(params, eps, i, j);
    let p = params.p_real();
    let radius = cutoff.map(|c| c.radius.clone()).unwrap_or_else(|| params.radius.clone());
    let v = integrate_with_cutoff(
        &weight,
        &params.k,
        &params.d_scale,
        cutoff,
        &radius,
        &[],
        0,
        1,
        |_, t| match (t, cutoff) {
            (Some(t), Some(c)) => vec![c.value(t).map(|v| v.powf(&p)).unwrap_or_else(|_| Real::zero())],
            _ => vec![Real::one()],
        },
        cfg,
    )?;
    Ok(v.component(0))
}

pub fn gamma_weight(params: &InequalityParams, eps: &[Rational], i: usize, j: usize) -> PowerWeight {
    let x_powers = eps[1..]
        .iter()
        .enumerate()
        .map(|(idx, e)| {
            let l = idx + 1;
            let y = if l <= i { 2 } else if l <= j { 1 } else { 0 };
            Rational::from(e - 1u32) + y
        })
        .collect();
    PowerWeight::new(Rational::from(&eps[0] - &params.k), x_powers)
}

/// The integration-by-parts identity ε_iΓ_ii − Σ_{j>i}(1−ε_j)Γ_ij = [t^{ε_0}∏X_l^{−1+ε_l}·X_1⋯X_i]
/// at t = R (no cutoff, ε_0 = … = ε_{i−1} = 0 when i ≥ 1). Returns (combination, boundary term).
pub fn integration_by_parts(params: &InequalityParams, eps: &[Rational], i: usize, cfg: &QuadConfig) -> Result<(Real, Real)> {
    let r = eps.len() - 1;
    if eps[..i].iter().any(|e| *e != 0) {
        return Err(Error::Domain("ε_0 … ε_{i−1} must vanish".into()));
    }
    let mut comb = Real::from_rational(&eps[i]) * gamma_ij(params, eps, i, i, None, cfg)?.value;
    for j in i + 1..=r {
        let g = gamma_ij(params, eps, i, j, None, cfg)?.value;
        comb -= Real::from_rational(&(Rational::from(1) - &eps[j])) * g;
    }
    let radius = &params.radius;
    let x = crate::iterlog::x_values(&(radius / &params.d_scale), r)?;
    let mut b = radius.powf(&Real::from_rational(&eps[0]));
    for (l, xl) in x.iter().enumerate() {
        let mut e = Real::from_rational(&eps[l + 1]) - 1.0;
        if l < i {
            e += 1.0;
        }
        b *= xl.powf(&e);
    }
    Ok((comb, b))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DivergenceKind {
    /// ∫ d^{−k+ε_0}X_1^β.
    Leading,
    /// ∫ d^{−k}X_1⋯X_{i−1}X_i^{1+ε_i}X_{i+1}^β.
    Nested,
}

#[derive(Clone, Debug, Serialize)]
pub struct DivergenceReport {
    pub beta: Real,
    pub eps: Vec<Real>,
    pub values: Vec<Real>,
    pub fitted_exponent: Real,
    /// −1 + β.
    pub predicted_exponent: Real,
}

/// Fits the power of ε in the divergence of the integrals above over `eps_grid`.
pub fn divergence_rate_probe(
    params: &InequalityParams,
    beta: &Rational,
    kind: DivergenceKind,
    i: usize,
    eps_grid: &[Rational],
    cfg: &QuadConfig,
) -> Result<DivergenceReport> {
    if *beta >= 1 {
        return Err(Error::Domain("β must be below 1".into()));
    }
    let mut values = Vec::with_capacity(eps_grid.len());
    for e in eps_grid {
        let weight = match kind {
            DivergenceKind::Leading => PowerWeight::new(Rational::from(e - &params.k), vec![beta.clone()]),
            DivergenceKind::Nested => {
                let i = i.max(1);
                let mut x: Vec<Rational> = vec![Rational::from(1); i - 1];
                x.push(Rational::from(e + 1u32));
                x.push(beta.clone());
                PowerWeight::new(Rational::from(-&params.k), x)
            }
        };
        let v = integrate_radial(&weight, &params.k, &params.d_scale, &Real::zero(), &params.radius, Substitution::LogScale, |_| Real::one(), cfg)?;
        if !v.converged {
            return Err(Error::Convergence(format!("divergence probe at ε = {e}")));
        }
        values.push(v.value);
    }
    let eps: Vec<Real> = eps_grid.iter().map(Real::from_rational).collect();
    let lx: Vec<Real> = eps.iter().map(|e| e.ln()).collect();
    let ly: Vec<Real> = values.iter().map(|v| v.ln()).collect();
    let (c, _) = poly_fit(&lx, &ly, 1);
    let b = Real::from_rational(beta);
    Ok(DivergenceReport { predicted_exponent: &b - 1.0, beta: b, eps, values, fitted_exponent: c[1].clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::parse_rational;

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    fn unit_params() -> InequalityParams {
        InequalityParams::parse(2, "2", "0", "12").unwrap().with_domain(Real::one(), Real::one()).unwrap()
    }

    #[test]
    fn smooth_panel() {
        let f = |x: &Real, _: &Real, _: &Real| vec![x.exp()];
        let r = tanh_sinh(&f, &Real::zero(), &Real::one(), 1, &QuadConfig::default());
        assert!(r.converged);
        assert!((&r.values[0] - (Real::e() - 1.0)).abs() < 1e-40);
    }

    #[test]
    fn endpoint_singularity() {
        // ∫_0^1 x^{-1/2} dx = 2 using the distance to the left end.
        let f = |_: &Real, da: &Real, _: &Real| vec![da.sqrt().recip()];
        let r = tanh_sinh(&f, &Real::zero(), &Real::one(), 1, &QuadConfig::default());
        assert!((&r.values[0] - 2.0).abs() < 1e-30, "{:?}", r.values[0]);
    }

    #[test]
    fn closed_form_family() {
        let p = unit_params();
        let k = p.k.clone();
        for i in 1..=3usize {
            for e in ["1/10", "1/100", "1/1000"] {
                let e = q(e);
                let mut x = vec![Rational::from(1); i - 1];
                x.push(Rational::from(&e + 1u32));
                let w = PowerWeight::new(-k.clone(), x);
                let r = integrate_radial(&w, &k, &p.d_scale, &Real::zero(), &Real::one(), Substitution::LogScale, |_| Real::one(), &QuadConfig::default()).unwrap();
                let want = Real::from_rational(&e).recip();
                assert!(crate::real::rel_diff(&r.value, &want, &Real::zero()) < 1e-20, "i={i} e={e}: {:?}", r.value);
            }
        }
    }

    #[test]
    fn finiteness_examples() {
        assert!(finiteness_check(&[q("0.1"), q("-0.5")]));
        assert!(finiteness_check(&[q("0"), q("0.2")]));
        assert!(!finiteness_check(&[q("0"), q("0")]));
        assert!(finiteness_check(&[q("0"), q("0"), q("0.3")]));
        assert!(!finiteness_check(&[q("0"), q("-1")]));
    }

    #[test]
    fn gamma_examples() {
        let p = unit_params();
        let g = gamma_ij(&p, &[q("1")], 0, 0, None, &QuadConfig::default()).unwrap();
        assert!((g.value - 1.0).abs() < 1e-30);
    }

    #[test]
    fn substitution_invariance() {
        let p = InequalityParams::parse(2, "2", "0", "12").unwrap();
        let w = PowerWeight::new(q("-23/2"), vec![q("-1/2"), q("3/2")]);
        let cfg = QuadConfig::default();
        let a = Real::from(0.05);
        let one = Real::one();
        let f = |pt: &TowerPoint| pt.t.sqrt() + 1.0;
        let r1 = integrate_radial(&w, &p.k, &p.d_scale, &a, &one, Substitution::LogScale, f, &cfg).unwrap();
        let r2 = integrate_radial(&w, &p.k, &p.d_scale, &a, &one, Substitution::Identity, f, &cfg).unwrap();
        assert!((&r1.value - &r2.value).abs() <= &r1.err_estimate + &r2.err_estimate + 1e-40);
    }

    #[test]
    fn integration_by_parts_boundary() {
        let p = unit_params().with_domain(Real::one(), Real::e()).unwrap();
        let cfg = QuadConfig::default();
        let cases: [(&[&str], usize); 4] = [
            (&["1/10", "3/10", "1/5"], 0),
            (&["1/100", "1/10", "1/20"], 0),
            (&["0", "1/10", "1/5"], 1),
            (&["0", "1/100", "1/20"], 1),
        ];
        for (eps, i) in cases {
            let eps: Vec<Rational> = eps.iter().map(|e| q(e)).collect();
            let (comb, boundary) = integration_by_parts(&p, &eps, i, &cfg).unwrap();
            assert!(crate::real::rel_diff(&comb, &boundary, &Real::one()) < 1e-20, "{eps:?}: {comb} vs {boundary}");
        }
    }

    #[test]
    fn gamma_decreases_in_each_exponent() {
        let p = unit_params().with_domain(Real::one(), Real::e()).unwrap();
        let cfg = QuadConfig::default();
        let base = [q("1/5"), q("1/5"), q("1/5")];
        let g0 = gamma_ij(&p, &base, 1, 2, None, &cfg).unwrap().value;
        for l in 0..3 {
            let mut e = base.clone();
            e[l] += q("1/10");
            let g = gamma_ij(&p, &e, 1, 2, None, &cfg).unwrap().value;
            assert!(g < g0, "l={l}");
        }
        let with_cut = gamma_ij(&p, &base, 1, 2, Some(&CutoffSpec::standard(&Real::one())), &cfg).unwrap().value;
        assert!(with_cut < g0 && with_cut.is_positive());
    }

    #[test]
    fn divergence_exponents() {
        let p = unit_params().with_domain(Real::one(), Real::e()).unwrap();
        let grid = [q("1/10000"), q("1/100000"), q("1/1000000")];
        let cfg = QuadConfig::default();
        for beta in ["0", "1/2", "-1"] {
            let rep = divergence_rate_probe(&p, &q(beta), DivergenceKind::Leading, 0, &grid, &cfg).unwrap();
            let rel = ((&rep.fitted_exponent - &rep.predicted_exponent) / &rep.predicted_exponent).abs();
            assert!(rel < 0.05, "β={beta}: {}", rep.fitted_exponent);
            let rep = divergence_rate_probe(&p, &q(beta), DivergenceKind::Nested, 2, &grid, &cfg).unwrap();
            let rel = ((&rep.fitted_exponent - &rep.predicted_exponent) / &rep.predicted_exponent).abs();
            assert!(rel < 0.05, "nested β={beta}: {}", rep.fitted_exponent);
        }
    }

    #[test]
    fn not_integrable_rejected() {
        let p = unit_params();
        let w = PowerWeight::new(-p.k.clone(), vec![Rational::from(1)]);
        let r = integrate_radial(&w, &p.k, &p.d_scale, &Real::zero(), &Real::one(), Substitution::LogScale, |_| Real::one(), &QuadConfig::default());
        assert!(matches!(r, Err(Error::NotIntegrable(_))));
    }
}
