use super::{Interval, Polynomial};
use crate::error::{Error, Result};

/// Monomial coefficients of `T_degree`, exact while they stay below 2^53.
fn chebyshev_monomial(degree: usize) -> Vec<f64> {
    let mut prev = vec![0.0; degree + 1];
    let mut cur = vec![0.0; degree + 1];
    prev[0] = 1.0;
    if degree == 0 {
        return prev;
    }
    cur[1] = 1.0;
    for k in 1..degree {
        let mut next = vec![0.0; degree + 1];
        for j in 0..=k {
            next[j + 1] += 2.0 * cur[j];
            next[j] -= prev[j];
        }
        prev = std::mem::replace(&mut cur, next);
    }
    cur
}

/// Degree-`K` polynomial `Q_K` on `[0, delta]` with
/// `sup_{0 < x <= delta} x^2 |1/x - Q_K(x)| = delta / (K + 2)^2`.
///
/// Writing `N = K + 2`, `T_{2N}(y) = S(y) y^4 - 2(-1)^K N^2 y^2 + (-1)^K`
/// for an even polynomial `S` of degree `2K`, and
/// `Q_K(x) = (-1)^K S(sqrt(x/delta)) / (2 N^2 delta)`. Then
/// `x - x^2 Q_K(x) = delta (1 - (-1)^K T_{2N}(sqrt(x/delta))) / (2 N^2)`.
///
/// The returned polynomial keeps the integer coefficients of `S` against the
/// variable `x / delta`, with the prefactor held as the gain.
pub fn cheb_inverse_poly(k: usize, delta: f64) -> Result<Polynomial> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::InvalidParams(format!(
            "delta must be positive, got {delta}"
        )));
    }
    let n = k + 2;
    let t = chebyshev_monomial(2 * n);
    let s: Vec<f64> = (0..=k).map(|j| t[2 * j + 4]).collect();
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    let gain = sign / (2.0 * (n * n) as f64 * delta);
    Polynomial::scaled(s, Interval::new(0.0, delta)?, delta, gain)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chebyshev_monomials() {
        assert_eq!(chebyshev_monomial(4), vec![1.0, 0.0, -8.0, 0.0, 8.0]);
        assert_eq!(
            chebyshev_monomial(6),
            vec![-1.0, 0.0, 18.0, 0.0, -48.0, 0.0, 32.0]
        );
    }

    #[test]
    fn degree_zero_is_constant_one() {
        let q = cheb_inverse_poly(0, 1.0).unwrap();
        assert_eq!(q.monomial_coeffs(), vec![1.0]);
        // max of x - x^2 on [0, 1] is 1/4
        let worst = (0..=1000)
            .map(|i| {
                let x = i as f64 / 1000.0;
                x - x * x * q.eval(x)
            })
            .fold(0.0, f64::max);
        assert!((worst - 0.25).abs() < 1e-15);
    }

    #[test]
    fn degree_one_worked_example() {
        let q = cheb_inverse_poly(1, 1.0).unwrap();
        let c = q.monomial_coeffs();
        assert!((c[0] - 8.0 / 3.0).abs() < 1e-15);
        assert!((c[1] + 16.0 / 9.0).abs() < 1e-15);
        assert!((1.0 - q.eval(1.0)).abs() - 1.0 / 9.0 < 1e-15);
    }

    #[test]
    fn error_curve_never_negative() {
        for k in 0..8 {
            let delta = 0.05;
            let q = cheb_inverse_poly(k, delta).unwrap();
            for i in 0..=2000 {
                let x = delta * i as f64 / 2000.0;
                assert!(x - x * x * q.eval(x) >= -1e-15);
            }
        }
    }

    #[test]
    fn scales_inversely_with_delta() {
        let a = cheb_inverse_poly(3, 1.0).unwrap();
        let b = cheb_inverse_poly(3, 0.25).unwrap();
        for i in 1..=10 {
            let y = i as f64 / 10.0;
            assert!((b.eval(0.25 * y) - 4.0 * a.eval(y)).abs() < 1e-10 * a.eval(y).abs().max(1.0));
        }
    }

    #[test]
    fn rejects_bad_delta() {
        assert!(cheb_inverse_poly(2, 0.0).is_err());
        assert!(cheb_inverse_poly(2, -1.0).is_err());
    }
}
