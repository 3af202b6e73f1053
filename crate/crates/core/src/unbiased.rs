//! Unbiased estimation of polynomials in a Poisson rate.
//!
//! If `n X ~ Poi(n q)` then `Π_{l<j} (X - l/n)` is the unique unbiased
//! estimator of `q^j`. Linear combinations of these falling factorials give
//! unbiased estimates of any polynomial in `q`.

use crate::approx::Polynomial;
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

const LATTICE_TOL: f64 = 1e-9;

/// Recovers the integer count behind `xhat = count / rate`.
pub fn lattice_count(xhat: f64, rate: f64) -> Result<u64> {
    let scaled = xhat * rate;
    let rounded = scaled.round();
    if !(xhat >= 0.0 && scaled.is_finite())
        || (scaled - rounded).abs() > LATTICE_TOL * rounded.max(1.0)
    {
        return Err(Error::NonLatticeInput {
            value: xhat,
            rate,
            scaled,
        });
    }
    Ok(rounded as u64)
}

/// `Π_{k=0}^{j-1} (xhat - k/n)`; the empty product is 1.
pub fn falling_factorial_estimate(xhat: f64, j: usize, n: f64) -> Result<f64> {
    let count = lattice_count(xhat, n)?;
    Ok(falling_factorial_count(count, j, n, 1.0))
}

/// `Π_{k<j} (count - k) / (rate * scale)`.
fn falling_factorial_count(count: u64, j: usize, rate: f64, scale: f64) -> f64 {
    let denom = rate * scale;
    let mut prod = 1.0;
    for k in 0..j as u64 {
        if k >= count {
            return 0.0;
        }
        prod *= (count - k) as f64 / denom;
    }
    prod
}

/// Unbiased estimator of `Σ_k base_coeffs[k] (q / scale)^k` from
/// `n X ~ Poi(n q)`, evaluated as `Σ_k base_coeffs[k] Π_{l<k} (X - l/n) / scale`.
///
/// Scaling the variable keeps every factor `O(1)` in the regime where these
/// estimators are used (`q ≲ scale`), which is what makes degree-40
/// evaluations stable.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledPolyEstimator {
    base_coeffs: Vec<f64>,
    rate: f64,
    scale: f64,
}

impl ScaledPolyEstimator {
    pub fn new(base_coeffs: Vec<f64>, rate: f64, scale: f64) -> Result<Self> {
        if base_coeffs.is_empty() || base_coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParams(
                "estimator needs finite coefficients".into(),
            ));
        }
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::InvalidParams(format!(
                "rate must be positive, got {rate}"
            )));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidParams(format!(
                "scale must be positive, got {scale}"
            )));
        }
        Ok(Self {
            base_coeffs,
            rate,
            scale,
        })
    }

    /// Unbiased estimator of `poly(q)`.
    pub fn from_polynomial(poly: &Polynomial, rate: f64) -> Result<Self> {
        let gain = poly.gain();
        Self::new(
            poly.scaled_coeffs().iter().map(|c| gain * c).collect(),
            rate,
            poly.var_scale(),
        )
    }

    pub fn base_coeffs(&self) -> &[f64] {
        &self.base_coeffs
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn degree(&self) -> usize {
        self.base_coeffs.len() - 1
    }

    /// Estimate from an observed lattice value `xhat = count / rate`.
    pub fn estimate(&self, xhat: f64) -> Result<f64> {
        Ok(self.estimate_count(lattice_count(xhat, self.rate)?))
    }

    /// Estimate from the raw count.
    pub fn estimate_count(&self, count: u64) -> f64 {
        let denom = self.rate * self.scale;
        let mut acc = CompensatedSum::new();
        let mut term = 1.0;
        for (k, &c) in self.base_coeffs.iter().enumerate() {
            if k > 0 {
                let l = (k - 1) as u64;
                if l >= count {
                    break;
                }
                term *= (count - l) as f64 / denom;
            }
            acc.add_product(c, term);
        }
        acc.value()
    }
}

/// See [`ScaledPolyEstimator::estimate`].
pub fn unbiased_poly_estimate(est: &ScaledPolyEstimator, xhat: f64) -> Result<f64> {
    est.estimate(xhat)
}

/// Second moment of `g_{j,q}(X) = Σ_k C(j,k) (-q)^(j-k) Π_{h<k}(X - h/n)`,
/// the unbiased estimator of `(p - q)^j` when `n X ~ Poi(n p)`:
/// `Σ_k C(j,k)^2 (p - q)^(2(j-k)) p^k k! / n^k`.
pub fn falling_factorial_second_moment(j: usize, p: f64, q: f64, n: f64) -> f64 {
    let d2 = (p - q) * (p - q);
    let mut binom = 1.0;
    let mut fact = 1.0;
    let mut acc = CompensatedSum::new();
    for k in 0..=j {
        if k > 0 {
            binom = binom * (j - k + 1) as f64 / k as f64;
            fact *= k as f64;
        }
        let term = binom * binom * d2.powi((j - k) as i32) * (p / n).powi(k as i32) * fact;
        acc.add(term);
    }
    acc.value()
}

/// `g_{j,q}(X)` itself, for checking [`falling_factorial_second_moment`].
pub fn centered_falling_factorial(count: u64, j: usize, q: f64, n: f64) -> f64 {
    let mut binom = 1.0;
    let mut acc = CompensatedSum::new();
    for k in 0..=j {
        if k > 0 {
            binom = binom * (j - k + 1) as f64 / k as f64;
        }
        acc.add(binom * (-q).powi((j - k) as i32) * falling_factorial_count(count, k, n, 1.0));
    }
    acc.value()
}
