use super::{
    check_pair, check_rate, clamp, classify_regime, DivergenceEstimate, EstimatorConfig, Regime,
    RegimeCounts, SplitSamples,
};
use crate::approx::{xlogx_best, xlogx_coeffs};
use crate::error::Result;
use crate::numeric::xlogx;
use crate::unbiased::{lattice_count, ScaledPolyEstimator};

/// Third-order bias-corrected plug-in for `p ln q`, with `q2` independent of
/// `q1`. Zero when `q1 = 0`.
///
/// The bracket is `Σ_{k≤3} g^(k)(q1)/k! · U[(q - q1)^k]` for `g = ln`, where
/// `U` replaces each `q^j` by the falling factorial of `q2`.
pub fn kl_smooth_term(phat1: f64, qhat1: f64, qhat2: f64, n: f64) -> f64 {
    if qhat1 == 0.0 || phat1 == 0.0 {
        return 0.0;
    }
    let (q1, q2) = (qhat1, qhat2);
    let d = q2 - q1;
    let q1_2 = q1 * q1;
    let q1_3 = q1_2 * q1;
    let correction = q1.ln() + d / q1 - d * d / (2.0 * q1_2)
        + 3.0 * q2 / (2.0 * n * q1_2)
        + d * d * d / (3.0 * q1_3)
        - q2 * q2 / (n * q1_3)
        + 2.0 * q2 / (3.0 * n * n * q1_3);
    phat1 * correction
}

/// Unbiased estimator of `Σ_k g_{K,k+1} (q / Δ)^k`, the polynomial standing
/// in for `ln q` on `[0, Δ]`, `Δ = 2 c1 ln n / n`.
///
/// With `Σ_k r_k y^k` the best degree-`K+1` approximation of `y ln y` on
/// `[0, 1]`, `ln q = ln(q/Δ) + ln Δ ≈ Σ_{k≥1} r_k y^(k-1) + ln Δ`.
fn cross_estimator(n: f64, cfg: &EstimatorConfig) -> Result<ScaledPolyEstimator> {
    let k = cfg.degree(n);
    let delta = cfg.delta(n);
    let r = xlogx_coeffs(k)?.poly.monomial_coeffs();
    let mut g: Vec<f64> = r[1..].to_vec();
    g[0] += delta.ln();
    ScaledPolyEstimator::new(g, n, delta)
}

/// Unbiased estimator of the best degree-`K` approximation of `-x ln x` on
/// `[0, Δ_m]` with its constant term removed.
///
/// The `[0, 1]` approximation `Σ r_k y^k ≈ y ln y` is rescaled by
/// `-x ln x = -Δ (y ln y) - Δ ln Δ · y` with `y = x / Δ`.
fn lower_estimator(m: f64, cfg: &EstimatorConfig) -> Result<ScaledPolyEstimator> {
    let k = cfg.degree(m);
    let delta = cfg.delta(m);
    let r = xlogx_best(k)?.poly.monomial_coeffs();
    let mut b: Vec<f64> = r.iter().map(|&rk| -delta * rk).collect();
    b[0] = 0.0;
    b[1] -= delta * delta.ln();
    ScaledPolyEstimator::new(b, m, delta)
}

/// Non-smooth cross-entropy term `p1 · Σ_k g_{K,k+1} Δ^{-k} Π_{l<k}(q1 - l/n)`,
/// clamped to `[-truncate, truncate]`.
pub fn kl_nonsmooth_term(phat1: f64, qhat1: f64, n: f64, cfg: &EstimatorConfig) -> Result<f64> {
    cfg.validate()?;
    check_rate(n)?;
    let count = lattice_count(qhat1, n)?;
    if phat1 == 0.0 {
        return Ok(0.0);
    }
    let est = cross_estimator(n, cfg)?;
    Ok(clamp(phat1 * est.estimate_count(count), cfg.truncate))
}

/// `-p ln p + 1/(2m)`
pub fn entropy_upper(phat1: f64, m: f64) -> f64 {
    -xlogx(phat1) + 1.0 / (2.0 * m)
}

/// Polynomial entropy part for small `p`, capped at 1.
pub fn entropy_lower(phat1: f64, m: f64, cfg: &EstimatorConfig) -> Result<f64> {
    cfg.validate()?;
    check_rate(m)?;
    let count = lattice_count(phat1, m)?;
    Ok(lower_estimator(m, cfg)?.estimate_count(count).min(1.0))
}

/// Adaptive KL estimator with coefficients prepared for fixed per-part
/// rates `(m, n)`.
#[derive(Debug, Clone)]
pub struct KlAdaptive {
    cfg: EstimatorConfig,
    m: f64,
    n: f64,
    lower: ScaledPolyEstimator,
    cross: ScaledPolyEstimator,
}

impl KlAdaptive {
    pub fn new(m: f64, n: f64, cfg: EstimatorConfig) -> Result<Self> {
        cfg.validate()?;
        check_rate(m)?;
        check_rate(n)?;
        Ok(Self {
            cfg,
            m,
            n,
            lower: lower_estimator(m, &cfg)?,
            cross: cross_estimator(n, &cfg)?,
        })
    }

    pub fn estimate(&self, sp: &SplitSamples, sq: &SplitSamples) -> Result<DivergenceEstimate> {
        check_pair(sp, sq)?;
        if sp.rate() != self.m || sq.rate() != self.n {
            return KlAdaptive::new(sp.rate(), sq.rate(), self.cfg)?.estimate(sp, sq);
        }
        let (m, n, cfg) = (self.m, self.n, &self.cfg);
        let thr_m = cfg.threshold(m);
        let (p, q) = (sp.parts(), sq.parts());
        let mut regimes = RegimeCounts::default();
        let terms = (0..sp.len())
            .map(|i| {
                let p1 = p[0].hat(i);
                let entropy = if p[2].hat(i) <= thr_m {
                    self.lower.estimate_count(p[0].counts()[i]).min(1.0)
                } else {
                    entropy_upper(p1, m)
                };
                let regime = classify_regime(q[2].hat(i), n, cfg.c1);
                regimes.record(regime);
                let cross = match regime {
                    Regime::NonSmooth => {
                        if p1 == 0.0 {
                            0.0
                        } else {
                            clamp(
                                p1 * self.cross.estimate_count(q[0].counts()[i]),
                                cfg.truncate,
                            )
                        }
                    }
                    Regime::Smooth => {
                        let pw = if cfg.average_p {
                            0.5 * (p1 + p[1].hat(i))
                        } else {
                            p1
                        };
                        kl_smooth_term(pw, q[0].hat(i), q[1].hat(i), n)
                    }
                };
                -(entropy + cross)
            })
            .collect();
        Ok(DivergenceEstimate::from_terms(0.0, terms, regimes))
    }
}

/// Adaptive estimate of `D(P || Q)` from split samples of both sides.
pub fn estimate_kl_adaptive(
    sp: &SplitSamples,
    sq: &SplitSamples,
    cfg: &EstimatorConfig,
) -> Result<DivergenceEstimate> {
    check_pair(sp, sq)?;
    KlAdaptive::new(sp.rate(), sq.rate(), *cfg)?.estimate(sp, sq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::Histogram;
    use crate::Error;

    fn split(parts: [Vec<u64>; 3], rate: f64) -> SplitSamples {
        SplitSamples::new(parts.map(|c| Histogram::new(c, rate).unwrap())).unwrap()
    }

    #[test]
    fn smooth_term_zero_guards() {
        assert_eq!(kl_smooth_term(0.3, 0.0, 0.2, 100.0), 0.0);
        assert_eq!(kl_smooth_term(0.0, 0.1, 0.2, 100.0), 0.0);
    }

    #[test]
    fn smooth_term_with_equal_parts() {
        let (p, q, n) = (0.2f64, 0.05f64, 300.0);
        let want = p * (q.ln() + 1.0 / (2.0 * n * q) + 2.0 / (3.0 * n * n * q * q));
        let got = kl_smooth_term(p, q, q, n);
        assert!((got - want).abs() < 1e-14 * want.abs());
    }

    #[test]
    fn entropy_upper_examples() {
        assert!((entropy_upper(1.0, 100.0) - 0.005).abs() < 1e-15);
        assert!((entropy_upper(0.0, 100.0) - 0.005).abs() < 1e-15);
        assert!((entropy_upper(0.5, 100.0) - 0.351_573_590_279_972_6).abs() < 1e-7);
    }

    #[test]
    fn entropy_lower_zero_and_cap() {
        let cfg = EstimatorConfig::default();
        assert_eq!(entropy_lower(0.0, 500.0, &cfg).unwrap(), 0.0);
        // Far outside the approximation interval the polynomial explodes and is capped.
        let m = 500.0;
        let v = entropy_lower(200.0 / m, m, &cfg).unwrap();
        assert!(v <= 1.0);
        assert!(entropy_lower(0.0011, m, &cfg).is_err());
    }

    #[test]
    fn nonsmooth_term_cases() {
        let cfg = EstimatorConfig::default();
        let n = 600.0;
        assert_eq!(kl_nonsmooth_term(0.0, 3.0 / n, n, &cfg).unwrap(), 0.0);
        // Only the k = 0 term survives at q1 = 0.
        let k = cfg.degree(n);
        let r1 = xlogx_coeffs(k).unwrap().poly.monomial_coeffs()[1];
        let g1 = r1 + cfg.delta(n).ln();
        let p = 0.01;
        let got = kl_nonsmooth_term(p, 0.0, n, &cfg).unwrap();
        assert!((got - (p * g1).clamp(-1.0, 1.0)).abs() < 1e-15);
        // Large p pushes the raw value past the clamp.
        let got = kl_nonsmooth_term(5.0, 0.0, n, &cfg).unwrap();
        assert_eq!(got, -1.0);
        assert!(matches!(
            kl_nonsmooth_term(0.1, 0.5 / n, n, &cfg),
            Err(Error::NonLatticeInput { .. })
        ));
    }

    #[test]
    fn all_zero_counts_give_zero() {
        let z = split([vec![0; 5], vec![0; 5], vec![0; 5]], 400.0);
        let est = estimate_kl_adaptive(&z, &z, &EstimatorConfig::default()).unwrap();
        assert_eq!(est.value, 0.0);
        assert_eq!(est.regime_counts.nonsmooth, 5);
    }

    #[test]
    fn rejects_mismatch_and_small_rate() {
        let a = split([vec![0; 3], vec![0; 3], vec![0; 3]], 400.0);
        let b = split([vec![0; 4], vec![0; 4], vec![0; 4]], 400.0);
        let cfg = EstimatorConfig::default();
        assert!(matches!(
            estimate_kl_adaptive(&a, &b, &cfg),
            Err(Error::DimensionMismatch { .. })
        ));
        let tiny = split([vec![0; 3], vec![0; 3], vec![0; 3]], 1.0);
        assert!(matches!(
            estimate_kl_adaptive(&tiny, &a, &cfg),
            Err(Error::RateTooSmall { .. })
        ));
    }

    #[test]
    fn value_matches_per_symbol_sum() {
        let sp = split(
            [vec![9, 0, 3, 40], vec![7, 1, 2, 38], vec![8, 0, 1, 41]],
            100.0,
        );
        let sq = split(
            [vec![5, 2, 0, 30], vec![6, 0, 1, 33], vec![4, 1, 0, 29]],
            100.0,
        );
        let est = estimate_kl_adaptive(&sp, &sq, &EstimatorConfig::default()).unwrap();
        let s: f64 = est.per_symbol.as_ref().unwrap().iter().sum();
        assert!((est.value - s).abs() < 1e-14);
        assert_eq!(est.regime_counts.smooth + est.regime_counts.nonsmooth, 4);
    }
}
