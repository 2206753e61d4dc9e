use proptest::prelude::*;
use rellich::iterlog::x_values;
use rellich::prober::{family_sides, inequality_sides};
use rellich::quadrature::{finiteness_check, gamma_ij, QuadConfig};
use rellich::radial_calculus::{test_family, CutoffSpec, RadialProfile};
use rellich::real::rel_diff;
use rellich::sharp_constants::{exact_constants, verify_constant_identities, verify_recursions};
use rellich::{InequalityParams, Jet, Real, Result};
use rug::Rational;

fn rational(num: i64, den: i64) -> Rational {
    Rational::from((num, den))
}

/// c·f.
struct Scaled<P> {
    c: Real,
    inner: P,
}

impl<P: RadialProfile> RadialProfile for Scaled<P> {
    fn jet(&self, t: &Real, order: usize) -> Result<Jet> {
        Ok(self.inner.jet(t, order)?.scale(&self.c))
    }
    fn support(&self) -> Real {
        self.inner.support()
    }
    fn breakpoints(&self) -> Vec<Real> {
        self.inner.breakpoints()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn finiteness_is_lexicographic_positivity(v in proptest::collection::vec(-3i64..=3, 1..6)) {
        let eps: Vec<Rational> = v.iter().map(|x| rational(*x, 4)).collect();
        let first = v.iter().find(|x| **x != 0);
        prop_assert_eq!(finiteness_check(&eps), first.is_some_and(|x| *x > 0));
    }

    #[test]
    fn iterated_logs_increase_with_depth(ell in 0.01f64..1e6) {
        let t = Real::from(-ell).exp();
        let x = x_values(&t, 5).unwrap();
        for w in x.windows(2) {
            prop_assert!(w[0] < w[1] && w[1] <= 1.0 && w[0].is_positive());
        }
    }

    #[test]
    fn integer_p_constants_are_exact(m in 1u32..=8, p in 2i64..=4, g in 0i64..=30, k in 1i64..=200) {
        let params = InequalityParams::new(m, Rational::from(p), rational(g, 5), rational(k, 3)).unwrap();
        prop_assert!(exact_constants(&params).is_some());
        prop_assert!(verify_constant_identities(&params).all_hold(0.0));
        prop_assert!(verify_recursions(&params).unwrap().all_hold(0.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn quotients_are_homogeneous(c in 0.1f64..20.0, e0 in 10i64..=50, e1 in 10i64..=50) {
        let params = InequalityParams::parse(2, "2", "0", "12").unwrap();
        let eps = [rational(e0, 100), rational(e1, 100)];
        let cut = CutoffSpec::standard(&Real::one());
        let cfg = QuadConfig::default();
        let u = test_family(&params, &eps, Some(cut.clone())).unwrap();
        let base = inequality_sides(&params, &u, 1, &cfg).unwrap();
        let scaled = inequality_sides(&params, &Scaled { c: Real::from(c), inner: u }, 1, &cfg).unwrap();
        prop_assert!(rel_diff(&base.quotient, &scaled.quotient, &Real::zero()) < 1e-25);
        let factor = Real::from(c).powf(&params.p_real());
        prop_assert!(rel_diff(&(&base.lhs * &factor), &scaled.lhs, &Real::zero()) < 1e-25);
    }

    #[test]
    fn more_series_terms_shrink_the_remainder(e0 in 5i64..=50, e1 in 5i64..=50, e2 in 5i64..=50) {
        let params = InequalityParams::parse(2, "5/2", "1", "12").unwrap();
        let eps = [rational(e0, 100), rational(e1, 100), rational(e2, 100)];
        let cut = CutoffSpec::standard(&Real::one());
        let cfg = QuadConfig::default();
        let r1 = family_sides(&params, &eps, Some(&cut), 1, None, &cfg).unwrap();
        let r2 = family_sides(&params, &eps, Some(&cut), 2, None, &cfg).unwrap();
        prop_assert!(r2.remainder <= r1.remainder);
        prop_assert!(r2.remainder >= -(&r2.error_budget * 10.0));
    }

    #[test]
    fn gamma_decreases_in_each_exponent(e in proptest::collection::vec(5i64..=50, 3), l in 0usize..3) {
        let params = InequalityParams::parse(2, "2", "0", "12").unwrap();
        let cfg = QuadConfig::default();
        let eps: Vec<Rational> = e.iter().map(|x| rational(*x, 100)).collect();
        let mut bumped = eps.clone();
        bumped[l] += rational(1, 20);
        for (i, j) in [(0, 0), (0, 2), (1, 2), (2, 2)] {
            let g = gamma_ij(&params, &eps, i, j, None, &cfg).unwrap().value;
            let gb = gamma_ij(&params, &bumped, i, j, None, &cfg).unwrap().value;
            prop_assert!(gb < g, "Γ_{}{} at {:?}", i, j, eps);
        }
    }
}
