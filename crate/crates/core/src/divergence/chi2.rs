use super::{
    check_pair, check_rate, clamp, DivergenceEstimate, EstimatorConfig, Regime, RegimeCounts,
    SplitSamples,
};
use crate::approx::cheb_inverse_poly;
use crate::error::Result;
use crate::unbiased::ScaledPolyEstimator;

/// Order-three bias-corrected plug-in for `p^2 / q`; zero when `q1 = 0`.
///
/// Built like [`super::kl_smooth_term`] with `g(q) = 1/q`, times the unbiased
/// estimate `p1 (p1 - 1/m)` of `p^2`.
pub fn chi2_smooth_term(phat1: f64, qhat1: f64, qhat2: f64, m: f64, n: f64) -> f64 {
    if qhat1 == 0.0 {
        return 0.0;
    }
    let p2 = phat1 * (phat1 - 1.0 / m);
    if p2 == 0.0 {
        return 0.0;
    }
    let (q1, q2) = (qhat1, qhat2);
    let d = q2 - q1;
    let q1_2 = q1 * q1;
    let q1_3 = q1_2 * q1;
    let q1_4 = q1_3 * q1;
    let inv = 1.0 / q1 - d / q1_2 + d * d / q1_3 - 4.0 * q2 / (n * q1_3) - d * d * d / q1_4
        + 3.0 * q2 * q2 / (n * q1_4)
        - 2.0 * q2 / (n * n * q1_4);
    p2 * inv
}

/// χ² estimator with the unbiased transform of the Chebyshev-based
/// approximation of `1/x` prepared for rates `(m, n)`.
#[derive(Debug, Clone)]
pub struct Chi2Estimator {
    m: f64,
    n: f64,
    cfg: EstimatorConfig,
    inverse: ScaledPolyEstimator,
}

impl Chi2Estimator {
    pub fn new(m: f64, n: f64, cfg: EstimatorConfig) -> Result<Self> {
        cfg.validate()?;
        check_rate(m)?;
        check_rate(n)?;
        let poly = cheb_inverse_poly(cfg.degree(n), cfg.delta(n))?;
        Ok(Self {
            m,
            n,
            cfg,
            inverse: ScaledPolyEstimator::from_polynomial(&poly, n)?,
        })
    }

    pub fn estimate(&self, sp: &SplitSamples, sq: &SplitSamples) -> Result<DivergenceEstimate> {
        check_pair(sp, sq)?;
        if sp.rate() != self.m || sq.rate() != self.n {
            return Chi2Estimator::new(sp.rate(), sq.rate(), self.cfg)?.estimate(sp, sq);
        }
        let (m, n) = (self.m, self.n);
        let thr = self.cfg.threshold(n);
        let (p, q) = (sp.parts(), sq.parts());
        let mut regimes = RegimeCounts::default();
        let terms = (0..sp.len())
            .map(|i| {
                let p1 = p[0].hat(i);
                if q[2].hat(i) >= thr {
                    regimes.record(Regime::Smooth);
                    chi2_smooth_term(p1, q[0].hat(i), q[1].hat(i), m, n)
                } else {
                    regimes.record(Regime::NonSmooth);
                    let p2 = p1 * (p1 - 1.0 / m);
                    if p2 == 0.0 {
                        0.0
                    } else {
                        clamp(p2 * self.inverse.estimate_count(q[0].counts()[i]), 1.0)
                    }
                }
            })
            .collect();
        Ok(DivergenceEstimate::from_terms(-1.0, terms, regimes))
    }
}

pub fn estimate_chi2(
    sp: &SplitSamples,
    sq: &SplitSamples,
    cfg: &EstimatorConfig,
) -> Result<DivergenceEstimate> {
    check_pair(sp, sq)?;
    Chi2Estimator::new(sp.rate(), sq.rate(), *cfg)?.estimate(sp, sq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::Histogram;

    #[test]
    fn smooth_term_guards() {
        assert_eq!(chi2_smooth_term(0.3, 0.0, 0.1, 10.0, 10.0), 0.0);
        assert_eq!(chi2_smooth_term(0.0, 0.2, 0.1, 10.0, 10.0), 0.0);
        assert_eq!(chi2_smooth_term(0.1, 0.2, 0.1, 10.0, 10.0), 0.0);
    }

    #[test]
    fn smooth_term_equal_parts() {
        let (p, q, m, n) = (0.3, 0.2, 50.0, 70.0);
        let want = p * (p - 1.0 / m) * (1.0 / q - 1.0 / (n * q * q) - 2.0 / (n * n * q * q * q));
        let got = chi2_smooth_term(p, q, q, m, n);
        assert!((got - want).abs() < 1e-13 * want.abs());
    }

    #[test]
    fn all_zero_gives_minus_one() {
        let z = SplitSamples::new([0, 1, 2].map(|_| Histogram::new(vec![0; 4], 300.0).unwrap()))
            .unwrap();
        let est = estimate_chi2(&z, &z, &EstimatorConfig::default()).unwrap();
        assert_eq!(est.value, -1.0);
        assert_eq!(est.regime_counts.nonsmooth, 4);
    }
}
