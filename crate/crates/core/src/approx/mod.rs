//! Best uniform polynomial approximation and the special polynomial
//! constructions consumed by the estimators.
//!
//! Everything here is data-independent: coefficients are computed once per
//! `(target, degree, domain)` and reused across estimator calls through
//! [`cache`].

mod bernstein;
pub mod cache;
mod cheb_inverse;
mod remez;
mod targets;

pub use bernstein::{bernstein_apply, lattice_log_patch};
pub use cheb_inverse::cheb_inverse_poly;
pub use remez::{remez_best_approx, remez_with_options, RemezOptions};
pub use targets::{log_coeffs, sqrt_coeffs, xlogx_best, xlogx_coeffs, Target};

use crate::error::{Error, Result};
use crate::numeric::comp_horner;

/// A closed interval `[lo, hi]` with `lo < hi`, both finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidDomain { lo, hi, extra: "" });
        }
        Ok(Self { lo, hi })
    }

    /// `[0, 1]`
    pub fn unit() -> Self {
        Self { lo: 0.0, hi: 1.0 }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Affine map from `[-1, 1]` onto the interval.
    #[inline]
    pub(crate) fn map_from_unit(self, t: f64) -> f64 {
        // t + 1 is exact for t in [-1, -0.5], which keeps resolution near lo.
        let x = self.lo + (t + 1.0) * (0.5 * self.width());
        x.clamp(self.lo, self.hi)
    }

    #[inline]
    pub(crate) fn to_unit(self, x: f64) -> f64 {
        (2.0 * x - self.lo - self.hi) / self.width()
    }
}

/// Polynomial in monomial form over a stated domain.
///
/// The value at `x` is `gain * Σ coeffs[k] (x / var_scale)^k`. Plain monomial
/// polynomials have `var_scale = gain = 1`; constructions whose raw
/// coefficients span many orders of magnitude keep them against a scaled
/// variable instead, so that exact integer coefficients stay exact.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
    domain: Interval,
    var_scale: f64,
    gain: f64,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>, domain: Interval) -> Result<Self> {
        Self::scaled(coeffs, domain, 1.0, 1.0)
    }

    pub fn scaled(coeffs: Vec<f64>, domain: Interval, var_scale: f64, gain: f64) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParams(
                "polynomial needs at least one coefficient".into(),
            ));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParams(
                "polynomial coefficients must be finite".into(),
            ));
        }
        if !(var_scale.is_finite() && var_scale > 0.0 && gain.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "bad polynomial scaling (var_scale={var_scale}, gain={gain})"
            )));
        }
        Ok(Self {
            coeffs,
            domain,
            var_scale,
            gain,
        })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    /// Coefficients against the scaled variable `x / var_scale`, before `gain`.
    pub fn scaled_coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn var_scale(&self) -> f64 {
        self.var_scale
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    /// Raw monomial coefficients: entry `k` multiplies `x^k`.
    pub fn monomial_coeffs(&self) -> Vec<f64> {
        let mut scale_pow = 1.0;
        self.coeffs
            .iter()
            .map(|&c| {
                let v = self.gain * c / scale_pow;
                scale_pow *= self.var_scale;
                v
            })
            .collect()
    }

    /// Horner evaluation (compensated) at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.gain * comp_horner(&self.coeffs, x / self.var_scale)
    }
}

/// Chebyshev series `Σ c_k T_k(t)` with `t` the affine image of `x` in
/// `[-1, 1]`. Remez iterates live in this basis; it stays well conditioned at
/// degrees where monomial coefficients do not.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebSeries {
    coeffs: Vec<f64>,
    domain: Interval,
}

impl ChebSeries {
    pub fn new(coeffs: Vec<f64>, domain: Interval) -> Self {
        assert!(!coeffs.is_empty());
        Self { coeffs, domain }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Clenshaw recurrence at unit-interval coordinate `t`.
    pub(crate) fn eval_unit(&self, t: f64) -> f64 {
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * t * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        t * b1 - b2 + self.coeffs[0]
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_unit(self.domain.to_unit(x))
    }

    /// Monomial form in the raw variable.
    pub fn to_polynomial(&self) -> Result<Polynomial> {
        let n = self.coeffs.len();
        // Build T_k(alpha x + beta) in the monomial basis by the three-term
        // recurrence and accumulate c_k times each.
        let alpha = 2.0 / self.domain.width();
        let beta = -(self.domain.hi + self.domain.lo) / self.domain.width();
        let mut out = vec![0.0; n];
        let mut prev = vec![0.0; n];
        let mut cur = vec![0.0; n];
        prev[0] = 1.0;
        out[0] += self.coeffs[0];
        if n > 1 {
            cur[0] = beta;
            cur[1] = alpha;
            for (o, &v) in out.iter_mut().zip(&cur) {
                *o += self.coeffs[1] * v;
            }
        }
        for k in 2..n {
            let mut next = vec![0.0; n];
            for j in 0..k {
                next[j] += 2.0 * beta * cur[j] - prev[j];
                next[j + 1] += 2.0 * alpha * cur[j];
            }
            for (o, &v) in out.iter_mut().zip(&next) {
                *o += self.coeffs[k] * v;
            }
            prev = std::mem::replace(&mut cur, next);
        }
        Polynomial::new(out, self.domain)
    }
}

/// Result of a best-approximation run.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxResult {
    pub poly: Polynomial,
    /// The same polynomial in the Chebyshev basis of its domain.
    pub cheb: ChebSeries,
    pub levelled_error: f64,
    pub equioscillation_points: Vec<f64>,
    pub iterations: usize,
}

impl ApproxResult {
    pub fn degree(&self) -> usize {
        self.cheb.degree()
    }
}

/// `T_k(x)` by the three-term recurrence; valid for any real `x`.
pub fn chebyshev_t(k: usize, x: f64) -> f64 {
    match k {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut prev, mut cur) = (1.0, x);
            for _ in 1..k {
                let next = 2.0 * x * cur - prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// Growth function bounding the best approximation error of `ln` on `[a, b]`
/// in terms of `s = b / (a K^2)`.
pub fn w_bound(s: f64) -> f64 {
    assert!(s > 0.0, "w_bound needs s > 0");
    if s <= std::f64::consts::E {
        s / std::f64::consts::E
    } else {
        s.ln()
    }
}
