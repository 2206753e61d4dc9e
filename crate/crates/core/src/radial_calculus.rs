//! Radial reduction: for u(x) = f(d(x)) with K affine, Δu = f'' + (k−1)/t·f' and
//! |∇u| = |f'|. Profiles are evaluated as jets in t.
//!
//! For the extremal family the reduction is also available in τ = log t, where
//! Δ^{m/2}(t^{s_0}w) = t^{s_0−m}·P_m(s_0 + ∂_τ)w with P_m the indicial polynomial.

use rug::Rational;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::params::InequalityParams;
use crate::real::Real;
use crate::sharp_constants::{critical_exponent, order_poly_jet};

/// A function t ↦ f(t) of the distance, evaluated as jets.
pub trait RadialProfile: Sync {
    /// Jet of f at t of the requested order.
    fn jet(&self, t: &Real, order: usize) -> Result<Jet>;

    /// f vanishes identically on [support, ∞).
    fn support(&self) -> Real {
        Real::infinity()
    }

    /// Number of derivatives available; `usize::MAX` for smooth profiles.
    fn smoothness_order(&self) -> usize {
        usize::MAX
    }

    /// Interior points where f is smooth but not analytic (quadrature splits there).
    fn breakpoints(&self) -> Vec<Real> {
        Vec::new()
    }

    fn value(&self, t: &Real) -> Result<Real> {
        Ok(self.jet(t, 0)?.coeffs[0].clone())
    }
}

impl<P: RadialProfile + ?Sized> RadialProfile for &P {
    fn jet(&self, t: &Real, order: usize) -> Result<Jet> {
        (**self).jet(t, order)
    }
    fn support(&self) -> Real {
        (**self).support()
    }
    fn smoothness_order(&self) -> usize {
        (**self).smoothness_order()
    }
    fn breakpoints(&self) -> Vec<Real> {
        (**self).breakpoints()
    }
}

impl<P: RadialProfile + ?Sized> RadialProfile for Box<P> {
    fn jet(&self, t: &Real, order: usize) -> Result<Jet> {
        (**self).jet(t, order)
    }
    fn support(&self) -> Real {
        (**self).support()
    }
    fn smoothness_order(&self) -> usize {
        (**self).smoothness_order()
    }
    fn breakpoints(&self) -> Vec<Real> {
        (**self).breakpoints()
    }
}

/// c·t^s.
#[derive(Clone, Debug)]
pub struct PowerProfile {
    pub coeff: Real,
    pub exponent: Real,
}

impl PowerProfile {
    pub fn new(exponent: Real) -> Self {
        PowerProfile { coeff: Real::one(), exponent }
    }
}

impl RadialProfile for PowerProfile {
    fn jet(&self, t: &Real, order: usize) -> Result<Jet> {
        Ok(Jet::variable(t.clone(), order).powf(&self.exponent)?.scale(&self.coeff))
    }
}

fn check_order(have: usize, needed: usize) -> Result<()> {
    if have < needed {
        return Err(Error::InsufficientOrder { needed, have });
    }
    Ok(())
}

/// f'' + (k−1)/t·f' from a jet of f at t; the result is two orders lower.
pub fn laplacian_jet(f: &Jet, k: &Real) -> Result<Jet> {
    check_order(f.order(), 2)?;
    let d1 = f.derivative()?;
    let d2 = d1.derivative()?;
    let n = d2.order();
    let inv_t = Jet::variable(f.center.clone(), n).recip()?.scale(&(k - 1.0));
    Ok(d2 + inv_t * d1.truncate(n))
}

/// The radial Laplacian of a profile in codimension k.
#[derive(Clone, Debug)]
pub struct RadialLaplacian<P> {
    pub inner: P,
    pub k: Real,
}

pub fn radial_laplacian<P: RadialProfile>(f: P, k: &Real) -> RadialLaplacian<P> {
    RadialLaplacian { inner: f, k: k.clone() }
}

impl<P: RadialProfile> RadialProfile for RadialLaplacian<P> {
    fn jet(&self, t: &Real, order: usize) -> Result<Jet> {
        check_order(self.inner.smoothness_order(), order.saturating_add(2))?;
        laplacian_jet(&self.inner.jet(t, order + 2)?, &self.k)
    }
    fn support(&self) -> Real {
        self.inner.support()
    }
    fn smoothness_order(&self) -> usize {
        self.inner.smoothness_order().saturating_sub(2)
    }
    fn breakpoints(&self) -> Vec<Real> {
        self.inner.breakpoints()
    }
}

/// Δ^{m/2} for even m, ∇Δ^{(m−1)/2} (radial component) for odd m.
#[derive(Clone, Debug)]
pub struct IteratedOperator<P> {
    pub inner: P,
    pub m: u32,
    pub k: Real,
}

pub fn iterated_operator<P: RadialProfile>(f: P, m: u32, k: &Real) -> IteratedOperator<P> {
    IteratedOperator { inner: f, m, k: k.clone() }
}

impl<P: RadialProfile> IteratedOperator<P> {
    /// The signed quantity Δ^{m/2}f (or its radial derivative for odd m).
    pub fn signed_jet(&self, t: &Real, order: usize) -> Result<Jet> {
        let m = self.m as usize;
        check_order(self.inner.smoothness_order(), order.saturating_add(m))?;
        let mut f = self.inner.jet(t, order + m)?;
        for _ in 0..m / 2 {
            f = laplacian_jet(&f, &self.k)?;
        }
        if m % 2 == 1 {
            f = f.derivative()?;
        }
        Ok(f)
    }
}

impl<P: RadialProfile> RadialProfile for IteratedOperator<P> {
    /// |Δ^{m/2}f|; a zero of the signed quantity is a non-smooth point and is reported.
    fn jet(&self, t: &Real, order: usize) -> Result<Jet> {
        self.signed_jet(t, order)?
            .abs()
            .ok_or_else(|| Error::SingularJet(format!("|Δ^(m/2) u| is not smooth at its zero t = {t}")))
    }
    fn support(&self) -> Real {
        self.inner.support()
    }
    fn smoothness_order(&self) -> usize {
        self.inner.smoothness_order().saturating_sub(self.m as usize)
    }
    fn breakpoints(&self) -> Vec<Real> {
        self.inner.breakpoints()
    }
}

/// Jets of X_1(v), …, X_n(v) for a jet v with value in (0, 1).
pub fn x_jets_of(v: &Jet, n: usize) -> Result<Vec<Jet>> {
    let mut out = Vec::with_capacity(n);
    let mut arg = v.clone();
    for _ in 0..n {
        let x = (-arg.ln()?).add_scalar(&Real::one()).recip()?;
        out.push(x.clone());
        arg = x;
    }
    Ok(out)
}

/// Jet of X_i at t ∈ (0, 1).
pub fn x_jet(t: &Real, i: usize, order: usize) -> Result<Jet> {
    if i == 0 {
        return Err(Error::Domain("X_i is indexed from 1".into()));
    }
    if !t.is_positive() || *t >= 1.0 {
        return Err(Error::Domain(format!("t = {t} is outside (0, 1)")));
    }
    Ok(x_jets_of(&Jet::variable(t.clone(), order), i)?.pop().expect("i ≥ 1"))
}

/// Smooth cutoff: 1 on (0, r_flat], 0 on [radius, ∞).
#[derive(Clone, Debug, PartialEq)]
pub struct CutoffSpec {
    pub r_flat: Real,
    pub radius: Real,
}

impl CutoffSpec {
    pub fn new(r_flat: Real, radius: Real) -> Result<Self> {
        if !r_flat.is_positive() || r_flat >= radius {
            return Err(Error::Domain(format!("need 0 < r_flat < R, got {r_flat}, {radius}")));
        }
        Ok(CutoffSpec { r_flat, radius })
    }

    /// Plateau on half the radius.
    pub fn standard(radius: &Real) -> Self {
        CutoffSpec { r_flat: radius / 2.0, radius: radius.clone() }
    }

    /// χ composed with a jet of t (in any variable). On the plateau and beyond the
    /// support the jet is exactly constant.
    pub fn compose(&self, t: &Jet) -> Result<Jet> {
        let n = t.order();
        let t0 = t.value();
        if *t0 <= self.r_flat {
            return Ok(Jet::constant(Real::one(), t.center.clone(), n));
        }
        if *t0 >= self.radius {
            return Ok(Jet::constant(Real::zero(), t.center.clone(), n));
        }
        let width = &self.radius - &self.r_flat;
        // s = (R − t)/(R − R_flat) ∈ (0, 1); χ = a/(a + b), a = e^{−1/s}, b = e^{−1/(1−s)}.
        let s = (-t).add_scalar(&self.radius).scale(&width.recip());
        let one_minus_s = (-&s).add_scalar(&Real::one());
        let a = (-s.recip()?).exp();
        let b = (-one_minus_s.recip()?).exp();
        a.div_jet(&(&a + &b))
    }

    /// Jet of χ(e^{τ+h}) in h at t = e^τ.
    pub fn log_jet(&self, t: &Real, order: usize) -> Result<Jet> {
        let tj = Jet::variable(Real::zero(), order).exp().scale(t);
        self.compose(&tj)
    }
}

impl RadialProfile for CutoffSpec {
    fn jet(&self, t: &Real, order: usize) -> Result<Jet> {
        self.compose(&Jet::variable(t.clone(), order))
    }
    fn support(&self) -> Real {
        self.radius.clone()
    }
    fn breakpoints(&self) -> Vec<Real> {
        vec![self.r_flat.clone()]
    }
}

pub fn cutoff(spec: &CutoffSpec) -> CutoffSpec {
    spec.clone()
}

/// u(t) = χ(t)·t^{s_0}·∏_j X_j(t/D)^{s_j}.
#[derive(Clone, Debug)]
pub struct TestFamily {
    pub s0: Real,
    pub s: Vec<Real>,
    pub d_scale: Real,
    pub cutoff: Option<CutoffSpec>,
}

/// s_0 = (mp + γ − k + ε_0)/p and s_j = (−1 + ε_j)/p for the Δ-order m of `params`.
pub fn family_exponents(params: &InequalityParams, eps: &[Rational]) -> (Real, Vec<Real>) {
    let s0 = Real::from_rational(&critical_exponent(params, &eps[0]));
    let s = eps[1..].iter().map(|e| Real::from_rational(&((e - Rational::from(1)) / &params.p))).collect();
    (s0, s)
}

pub fn test_family(params: &InequalityParams, eps: &[Rational], cutoff: Option<CutoffSpec>) -> Result<TestFamily> {
    if eps.is_empty() {
        return Err(Error::Domain("need at least ε_0".into()));
    }
    if eps.iter().any(|e| *e <= 0) {
        return Err(Error::Domain("all ε_j must be positive".into()));
    }
    if params.d_scale < params.radius {
        return Err(Error::Domain("D must be at least R".into()));
    }
    let (s0, s) = family_exponents(params, eps);
    Ok(TestFamily { s0, s, d_scale: params.d_scale.clone(), cutoff })
}

impl TestFamily {
    /// u'/u on the plateau: (s_0 + Σ_j s_j X_1⋯X_j(t/D))/t.
    pub fn log_derivative(&self, t: &Real) -> Result<Real> {
        let x = crate::iterlog::x_values(&(t / &self.d_scale), self.s.len())?;
        let mut prod = Real::one();
        let mut acc = self.s0.clone();
        for (sj, xj) in self.s.iter().zip(&x) {
            prod *= xj;
            acc += sj * &prod;
        }
        Ok(acc / t)
    }
}

impl RadialProfile for TestFamily {
    fn jet(&self, t: &Real, order: usize) -> Result<Jet> {
        if let Some(c) = &self.cutoff {
            if *t >= c.radius {
                return Ok(Jet::constant(Real::zero(), t.clone(), order));
            }
        }
        let v = Jet::variable(t.clone(), order);
        let mut out = v.powf(&self.s0)?;
        if !self.s.is_empty() {
            let xs = x_jets_of(&v.scale(&self.d_scale.recip()), self.s.len())?;
            for (x, sj) in xs.iter().zip(&self.s) {
                out = out * x.powf(sj)?;
            }
        }
        if let Some(c) = &self.cutoff {
            out = out * c.compose(&v)?;
        }
        Ok(out)
    }
    fn support(&self) -> Real {
        self.cutoff.as_ref().map(|c| c.radius.clone()).unwrap_or_else(Real::infinity)
    }
    fn breakpoints(&self) -> Vec<Real> {
        self.cutoff.iter().map(|c| c.r_flat.clone()).collect()
    }
}

/// Jets in h of L_j(τ+h) − L_j(τ), L_j = log X_j(t/D), j = 1..n, given X_1..X_n at t.
/// Uses L_0 = log(t/D) and L_j = −log(1 − L_{j−1}), i.e. ΔL_j = −log(1 − X_j·ΔL_{j−1}).
pub fn log_tower_increments(x: &[Real], order: usize) -> Vec<Jet> {
    let mut prev = Jet::variable(Real::zero(), order);
    let mut out = Vec::with_capacity(x.len());
    for xj in x {
        let arg = (-prev.scale(xj)).add_scalar(&Real::one());
        let next = -arg.ln().expect("value 1");
        out.push(next.clone());
        prev = next;
    }
    out
}

/// Δ^{m/2} of χ·t^{s_0}·∏X_j^{s_j} written as t^{s_0−m}·V·Φ with V = ∏X_j^{s_j};
/// this evaluates Φ = Σ_n P_m^{(n)}(s_0)/n!·∂_τ^n(χV)/V pointwise.
#[derive(Clone, Debug)]
pub struct ReducedOperator {
    pub m: u32,
    /// Taylor coefficients of P_m at s_0.
    pub poly: Vec<Real>,
    pub s: Vec<Real>,
}

impl ReducedOperator {
    pub fn new(m: u32, k: &Real, s0: &Real, s: Vec<Real>) -> Self {
        let poly = order_poly_jet(m, k, s0, m as usize).coeffs;
        ReducedOperator { m, poly, s }
    }

    /// Taylor coefficients in h of V(τ+h)/V(τ), times the τ-jet of χ when given.
    fn ratio_jet(&self, x: &[Real], chi: Option<&Jet>) -> (Jet, Jet) {
        let n = (self.m as usize).max(2);
        let mut lv = Jet::constant(Real::zero(), Real::zero(), n);
        if !self.s.is_empty() {
            let inc = log_tower_increments(&x[..self.s.len()], n);
            for (l, sj) in inc.iter().zip(&self.s) {
                lv = lv + l.scale(sj);
            }
        }
        let mut w = lv.exp();
        if let Some(c) = chi {
            w = w * c;
        }
        (lv, w)
    }

    /// Φ at a point with X_1..X_r (r = s.len()) and the τ-jet of χ there (`None` on the plateau).
    pub fn phi(&self, x: &[Real], chi: Option<&Jet>) -> Real {
        let (_, w) = self.ratio_jet(x, chi);
        let mut acc = Real::zero();
        let mut fact = Real::one();
        for (i, (pn, wn)) in self.poly.iter().zip(&w.coeffs).enumerate() {
            if i > 1 {
                fact *= i as f64;
            }
            acc += pn * wn * &fact;
        }
        acc
    }

    /// Plateau split Φ = α + α'g + (α''/2)(g² + g') + higher, with g = (log V)' and
    /// g' = (log V)''. Each part keeps full relative precision when the X_j are tiny.
    pub fn plateau_parts(&self, x: &[Real]) -> PlateauParts {
        let (lv, w) = self.ratio_jet(x, None);
        let mut higher = Real::zero();
        let mut fact = Real::from(2.0);
        for (i, (pn, wn)) in self.poly.iter().zip(&w.coeffs).enumerate().skip(3) {
            fact *= i as f64;
            higher += pn * wn * &fact;
        }
        PlateauParts { g: lv.coeffs[1].clone(), g_prime: &lv.coeffs[2] * 2.0, higher }
    }
}

/// See [`ReducedOperator::plateau_parts`].
#[derive(Clone, Debug)]
pub struct PlateauParts {
    pub g: Real,
    pub g_prime: Real,
    /// Σ_{n≥3} P^{(n)}(s_0)/n!·∂^nV/V.
    pub higher: Real,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(x: f64) -> Real {
        Real::from(x)
    }

    #[test]
    fn laplacian_of_powers() {
        let k = r(3.0);
        let sq = radial_laplacian(PowerProfile::new(r(2.0)), &k);
        assert!((sq.value(&r(0.7)).unwrap() - 6.0).abs() < 1e-55);
        // t^{2−k} is harmonic.
        let k = r(5.5);
        let h = radial_laplacian(PowerProfile::new(&r(2.0) - &k), &k);
        assert!(h.value(&r(0.3)).unwrap().abs() < 1e-50);
    }

    #[test]
    fn iterated_matches_indicial_polynomial() {
        let k = r(12.0);
        let s = r(-3.3);
        let t = r(0.4);
        for m in 1..=4u32 {
            let op = iterated_operator(PowerProfile::new(s.clone()), m, &k);
            let got = op.signed_jet(&t, 0).unwrap().coeffs[0].clone();
            let want = order_poly_jet(m, &k, &s, 0).coeffs[0].clone() * t.powf(&(&s - f64::from(m)));
            assert!(crate::real::rel_diff(&got, &want, &Real::zero()) < 1e-50, "m={m}");
        }
        let op = iterated_operator(PowerProfile::new(s.clone()), 1, &k);
        assert!(op.jet(&t, 0).unwrap().coeffs[0].is_positive());
    }

    #[test]
    fn x_jet_derivative() {
        let t = r(-1.0).exp();
        let j = x_jet(&t, 1, 1).unwrap();
        assert!((j.deriv(0) - 0.5).abs() < 1e-55);
        assert!((j.deriv(1) - Real::e() / 4.0).abs() < 1e-55);
        let j = x_jet(&t, 2, 0).unwrap();
        assert!((j.deriv(0) - (r(2.0).ln() + 1.0).recip()).abs() < 1e-55);
    }

    #[test]
    fn cutoff_shape() {
        let c = CutoffSpec::standard(&Real::one());
        let p = c.jet(&r(0.25), 3).unwrap();
        assert_eq!(p.deriv(0), 1.0);
        assert!(p.coeffs[1..].iter().all(|x| x.is_zero()));
        assert!(c.jet(&Real::one(), 3).unwrap().coeffs.iter().all(|x| x.is_zero()));
        let mid = c.jet(&r(0.75), 1).unwrap();
        assert!(mid.deriv(0) > 0.0 && mid.deriv(0) < 1.0 && mid.deriv(1) < 0.0);
    }

    #[test]
    fn reduced_operator_matches_jets() {
        let params = InequalityParams::parse(2, "2", "0", "12").unwrap();
        let eps: Vec<Rational> = ["1/10", "1/5", "3/10"].iter().map(|s| crate::params::parse_rational(s).unwrap()).collect();
        let cut = CutoffSpec::standard(&Real::one());
        let fam = test_family(&params, &eps, Some(cut.clone())).unwrap();
        let k = params.k_real();
        for (m, t) in [(2u32, 0.3), (2, 0.7), (3, 0.8), (1, 0.2)] {
            let t = r(t);
            let p = params.with_order(m);
            let (s0, s) = family_exponents(&p, &eps);
            let fam = TestFamily { s0: s0.clone(), s: s.clone(), ..fam.clone() };
            let direct = iterated_operator(&fam, m, &k).signed_jet(&t, 0).unwrap().coeffs[0].clone();
            let op = ReducedOperator::new(m, &k, &s0, s.clone());
            let x = crate::iterlog::x_values(&(&t / &params.d_scale), s.len()).unwrap();
            let v: Real = x.iter().zip(&s).map(|(xj, sj)| xj.powf(sj)).product();
            let chi = cut.log_jet(&t, m as usize).unwrap();
            let phi = op.phi(&x, Some(&chi));
            let via = t.powf(&(&s0 - f64::from(m))) * v * phi;
            assert!(crate::real::rel_diff(&direct, &via, &Real::zero()) < 1e-45, "m={m} t={t}");
        }
    }

    #[test]
    fn family_log_derivative() {
        let params = InequalityParams::parse(2, "2", "0", "12").unwrap();
        let eps: Vec<Rational> = ["1/10", "1/5"].iter().map(|s| crate::params::parse_rational(s).unwrap()).collect();
        let fam = test_family(&params, &eps, Some(CutoffSpec::standard(&Real::one()))).unwrap();
        let t = r(0.2);
        let j = fam.jet(&t, 1).unwrap();
        let got = j.deriv(1) / j.deriv(0);
        assert!((got - fam.log_derivative(&t).unwrap()).abs() < 1e-50);
        assert!(fam.value(&Real::one()).unwrap().is_zero());
        assert!(test_family(&params, &[Rational::new()], None).is_err());
    }
}
