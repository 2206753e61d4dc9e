//! The indicial polynomial of the radial operator.
//!
//! For a Δ-order m (odd m meaning one extra gradient), the operator maps
//! t^s ↦ P_m(s)·t^{s−m} with
//! P_m(s) = ∏_{i<⌈m/2⌉}(s − 2i) · ∏_{j=1}^{⌊m/2⌋}(s + k − 2j).
//! The α_m of the even theory is P_{2m}.

use rug::Rational;

use crate::jet::{Jet, Scalar};
use crate::params::InequalityParams;
use crate::real::Real;

/// Roots of P_m: 0, 2, …, 2(⌈m/2⌉−1) and 2j − k for j = 1..⌊m/2⌋.
pub fn order_roots<T: Scalar>(m: u32, k: &T) -> Vec<T> {
    let mut roots: Vec<T> = (0..m.div_ceil(2)).map(|i| T::from_i64(2 * i64::from(i))).collect();
    roots.extend((1..=m / 2).map(|j| T::from_i64(2 * i64::from(j)).sub_ref(k)));
    roots
}

/// Jet of P_m at `s`, built as a product of linear factors.
pub fn order_poly_jet<T: Scalar>(m: u32, k: &T, s: &T, order: usize) -> Jet<T> {
    let one = Jet::constant(T::from_i64(1), s.clone(), order);
    order_roots(m, k).iter().fold(one, |acc, r| {
        let lin = Jet::variable(s.clone(), order).add_scalar(&T::zero().sub_ref(r));
        acc.mul_jet(&lin)
    })
}

/// (α_m(s), α_m'(s), α_m''(s)) with α_m = P_{2m}.
pub fn alpha_poly_jet(m: u32, k: &Real, s: &Real) -> (Real, Real, Real) {
    let j = order_poly_jet(2 * m, k, s, 2);
    (j.deriv(0), j.deriv(1), j.deriv(2))
}

pub fn alpha_poly_jet_exact(m: u32, k: &Rational, s: &Rational) -> (Rational, Rational, Rational) {
    let j = order_poly_jet(2 * m, k, s, 2);
    (j.deriv(0), j.deriv(1), j.deriv(2))
}

/// s_0 = (m·p + γ − k + ε_0)/p for the Δ-order m of `params`.
pub fn critical_exponent(params: &InequalityParams, eps0: &Rational) -> Rational {
    let InequalityParams { m, p, gamma, k, .. } = params;
    (Rational::from(p * *m) + gamma - k + eps0) / p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spot_values() {
        let (a, d, _) = alpha_poly_jet(1, &Real::from(8.0), &Real::from(-2.0));
        assert_eq!(a, -8.0);
        assert_eq!(d, 2.0);
        assert!(alpha_poly_jet(1, &Real::from(8.0), &Real::zero()).0.is_zero());
        assert!(alpha_poly_jet(2, &Real::from(12.0), &Real::from(2.0)).0.is_zero());
    }

    #[test]
    fn odd_order_roots() {
        let r = order_roots::<Rational>(3, &Rational::from(12));
        assert_eq!(r, vec![Rational::from(0), Rational::from(2), Rational::from(-10)]);
        assert!(order_roots::<Rational>(0, &Rational::from(5)).is_empty());
    }

    #[test]
    fn exact_second_derivative() {
        // α_1(s) = s(s+k−2): α'' = 2.
        let (_, _, dd) = alpha_poly_jet_exact(1, &Rational::from(12), &Rational::from((7, 3)));
        assert_eq!(dd, 2);
    }
}
