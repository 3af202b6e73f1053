use super::{
    check_pair, check_rate, clamp, DivergenceEstimate, EstimatorConfig, Regime, RegimeCounts,
    SplitSamples,
};
use crate::approx::sqrt_coeffs;
use crate::error::Result;
use crate::unbiased::{lattice_count, ScaledPolyEstimator};

/// `R_l(x) = Σ_{k=1}^{K} a_k Δ^{1/2-k} Π_{j<k}(x - j/l)`, the unbiased
/// estimate of the best approximation of `√x` on `[0, Δ]` without its
/// constant term.
#[derive(Debug, Clone)]
pub struct SqrtEstimator {
    poly: ScaledPolyEstimator,
    threshold: f64,
}

impl SqrtEstimator {
    pub fn new(rate: f64, cfg: &EstimatorConfig) -> Result<Self> {
        cfg.validate()?;
        check_rate(rate)?;
        let k = cfg.degree(rate);
        let delta = cfg.delta(rate);
        let a = sqrt_coeffs(k)?.poly.monomial_coeffs();
        let root = delta.sqrt();
        let mut base: Vec<f64> = a.iter().map(|&ak| root * ak).collect();
        base[0] = 0.0;
        Ok(Self {
            poly: ScaledPolyEstimator::new(base, rate, delta)?,
            threshold: cfg.threshold(rate),
        })
    }

    pub fn rate(&self) -> f64 {
        self.poly.rate()
    }

    /// Raw, unclamped `R_l` from a count.
    pub fn raw_count(&self, count: u64) -> f64 {
        self.poly.estimate_count(count)
    }

    fn term_counts(&self, c1: u64, xhat2: f64, xhat3: f64) -> (f64, Regime) {
        if xhat3 >= self.threshold {
            (xhat2.sqrt(), Regime::Smooth)
        } else {
            (clamp(self.raw_count(c1), 1.0), Regime::NonSmooth)
        }
    }
}

/// `√xhat2` when `xhat3 >= c1 ln l / l`, else `R_l(xhat1)` clamped to `[-1, 1]`.
pub fn hellinger_term(
    xhat1: f64,
    xhat2: f64,
    xhat3: f64,
    l: f64,
    cfg: &EstimatorConfig,
) -> Result<f64> {
    let est = SqrtEstimator::new(l, cfg)?;
    let count = lattice_count(xhat1, l)?;
    Ok(est.term_counts(count, xhat2, xhat3).0)
}

/// Estimator of the squared Hellinger distance
/// `1 - Σ √(p_i q_i)` with coefficients prepared for rates `(m, n)`.
#[derive(Debug, Clone)]
pub struct HellingerEstimator {
    p_side: SqrtEstimator,
    q_side: SqrtEstimator,
    cfg: EstimatorConfig,
}

impl HellingerEstimator {
    pub fn new(m: f64, n: f64, cfg: EstimatorConfig) -> Result<Self> {
        Ok(Self {
            p_side: SqrtEstimator::new(m, &cfg)?,
            q_side: SqrtEstimator::new(n, &cfg)?,
            cfg,
        })
    }

    pub fn estimate(&self, sp: &SplitSamples, sq: &SplitSamples) -> Result<DivergenceEstimate> {
        check_pair(sp, sq)?;
        if sp.rate() != self.p_side.rate() || sq.rate() != self.q_side.rate() {
            return HellingerEstimator::new(sp.rate(), sq.rate(), self.cfg)?.estimate(sp, sq);
        }
        let (p, q) = (sp.parts(), sq.parts());
        let mut regimes = RegimeCounts::default();
        let terms = (0..sp.len())
            .map(|i| {
                let (tp, _) = self
                    .p_side
                    .term_counts(p[0].counts()[i], p[1].hat(i), p[2].hat(i));
                let (tq, rq) = self
                    .q_side
                    .term_counts(q[0].counts()[i], q[1].hat(i), q[2].hat(i));
                regimes.record(rq);
                -(tp * tq)
            })
            .collect();
        Ok(DivergenceEstimate::from_terms(1.0, terms, regimes))
    }
}

pub fn estimate_hellinger(
    sp: &SplitSamples,
    sq: &SplitSamples,
    cfg: &EstimatorConfig,
) -> Result<DivergenceEstimate> {
    check_pair(sp, sq)?;
    HellingerEstimator::new(sp.rate(), sq.rate(), *cfg)?.estimate(sp, sq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::Histogram;

    #[test]
    fn term_branches() {
        let cfg = EstimatorConfig::default();
        let l = 900.0;
        assert!((hellinger_term(0.0, 0.49, 0.5, l, &cfg).unwrap() - 0.7).abs() < 1e-15);
        assert_eq!(hellinger_term(0.0, 0.49, 0.0, l, &cfg).unwrap(), 0.0);
        let v = hellinger_term(400.0 / l, 0.0, 0.0, l, &cfg).unwrap();
        assert!((-1.0..=1.0).contains(&v));
    }

    #[test]
    fn nonsmooth_mean_tracks_sqrt() {
        let cfg = EstimatorConfig::default();
        let l = 1e5;
        let est = SqrtEstimator::new(l, &cfg).unwrap();
        let delta = cfg.delta(l);
        let approx = sqrt_coeffs(cfg.degree(l)).unwrap();
        let q = 0.4 * delta;
        let lambda = l * q;
        let mut pmf = (-lambda).exp();
        let mut mean = 0.0;
        for c in 0..400u64 {
            if c > 0 {
                pmf *= lambda / c as f64;
            }
            mean += pmf * est.raw_count(c);
        }
        let a0 = approx.poly.monomial_coeffs()[0];
        let want = delta.sqrt() * (approx.poly.eval(q / delta) - a0);
        assert!((mean - want).abs() < 1e-9, "{mean} vs {want}");
        assert!(
            (mean - q.sqrt()).abs() <= delta.sqrt() * (approx.levelled_error + a0.abs()) + 1e-9
        );
    }

    #[test]
    fn all_zero_gives_one() {
        let z = SplitSamples::new([0, 1, 2].map(|_| Histogram::new(vec![0; 6], 300.0).unwrap()))
            .unwrap();
        let est = estimate_hellinger(&z, &z, &EstimatorConfig::default()).unwrap();
        assert_eq!(est.value, 1.0);
        assert!(est.per_symbol.unwrap().iter().all(|&t| t == 0.0));
    }
}
