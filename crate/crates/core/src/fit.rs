//! Small least-squares and extrapolation helpers.

use rug::Rational;

use crate::real::Real;

/// Least-squares polynomial fit of `degree`; returns coefficients (constant first)
/// and the largest absolute residual.
pub fn poly_fit(xs: &[Real], ys: &[Real], degree: usize) -> (Vec<Real>, Real) {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() > degree, "need more points than the degree");
    let n = degree + 1;
    // Normal equations; the callers use a handful of well-separated nodes at 200+ bits.
    let mut a = vec![vec![Real::zero(); n + 1]; n];
    for (x, y) in xs.iter().zip(ys) {
        let pows: Vec<Real> = (0..2 * n).map(|k| x.powi(k as i32)).collect();
        for (i, row) in a.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate().take(n) {
                *cell += &pows[i + j];
            }
            row[n] += &pows[i] * y;
        }
    }
    let coeffs = solve(a);
    let resid = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (eval_poly(&coeffs, x) - y).abs())
        .fold(Real::zero(), Real::max);
    (coeffs, resid)
}

pub fn eval_poly(coeffs: &[Real], x: &Real) -> Real {
    coeffs.iter().rev().fold(Real::zero(), |acc, c| acc * x + c)
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
fn solve(mut a: Vec<Vec<Real>>) -> Vec<Real> {
    let n = a.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap()).unwrap();
        a.swap(col, piv);
        for row in col + 1..n {
            let f = &a[row][col] / &a[col][col];
            for c in col..=n {
                let v = &f * &a[col][c];
                a[row][c] -= v;
            }
        }
    }
    let mut x = vec![Real::zero(); n];
    for i in (0..n).rev() {
        let mut s = a[i][n].clone();
        for j in i + 1..n {
            s -= &a[i][j] * &x[j];
        }
        x[i] = s / &a[i][i];
    }
    x
}

/// Two-point linear extrapolation to x = 0 of y(x) ≈ y0 + c·x.
pub fn richardson_linear(x1: &Real, y1: &Real, x2: &Real, y2: &Real) -> Real {
    (x1 * y2 - x2 * y1) / (x1 - x2)
}

/// First derivative by a central difference of accuracy order 2·`half_width`.
pub fn central_difference<F: Fn(&Real) -> Real>(f: F, x: &Real, h: &Real, half_width: usize) -> Real {
    let n = half_width as i64;
    let mut acc = Real::zero();
    for k in 1..=n {
        // w_k = (−1)^{k+1} (n!)² / (k (n−k)! (n+k)!)
        let mut w = Rational::from(1);
        for i in (n - k + 1)..=n {
            w *= i;
        }
        for i in (n + 1)..=(n + k) {
            w /= i;
        }
        w /= k;
        if k % 2 == 0 {
            w = -w;
        }
        let kh = h * (k as f64);
        acc += Real::from_rational(&w) * (f(&(x + &kh)) - f(&(x - &kh)));
    }
    acc / h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_quadratic() {
        let xs: Vec<Real> = [-2.0, -1.0, 0.5, 1.0, 3.0].iter().map(|&v| Real::from(v)).collect();
        let ys: Vec<Real> = xs.iter().map(|x| x * x * 3.0 - x * 2.0 + 7.0).collect();
        let (c, r) = poly_fit(&xs, &ys, 2);
        assert!((&c[0] - 7.0).abs() < 1e-50);
        assert!((&c[1] + 2.0).abs() < 1e-50);
        assert!((&c[2] - 3.0).abs() < 1e-50);
        assert!(r < 1e-50);
    }

    #[test]
    fn richardson_removes_linear_term() {
        let y = |x: f64| Real::from(5.0) + Real::from(x) * 3.0;
        let v = richardson_linear(&Real::from(0.1), &y(0.1), &Real::from(0.01), &y(0.01));
        assert!((v - 5.0).abs() < 1e-50);
    }

    #[test]
    fn central_difference_of_exp() {
        let x = Real::from(0.3);
        let d = central_difference(|y| y.exp(), &x, &Real::from(1e-3), 6);
        assert!((d - x.exp()).abs() < 1e-30);
    }
}
