//! Divergence estimators on Poissonized, three-way split histograms, plus
//! plug-in baselines on raw histograms.
//!
//! Every adaptive estimator follows the same pattern per symbol: the third
//! split part decides the regime, the first (and second) parts feed either a
//! bias-corrected plug-in term or an unbiased estimate of a best polynomial
//! approximation. Neither the alphabet size nor the likelihood-ratio bound is
//! needed; unseen symbols contribute exactly zero.

mod chi2;
mod hellinger;
mod kl;
mod plugin;

pub use chi2::{chi2_smooth_term, estimate_chi2, Chi2Estimator};
pub use hellinger::{estimate_hellinger, hellinger_term, HellingerEstimator, SqrtEstimator};
pub use kl::{
    entropy_lower, entropy_upper, estimate_kl_adaptive, kl_nonsmooth_term, kl_smooth_term,
    KlAdaptive,
};
pub use plugin::{chi2_plugin, estimate_kl_plugin, hellinger_plugin};

use crate::error::{Error, Result};
use crate::numeric::compensated_sum;

/// Observed symbol counts with the nominal Poisson rate that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    counts: Vec<u64>,
    rate: f64,
}

impl Histogram {
    pub fn new(counts: Vec<u64>, rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::InvalidParams(format!(
                "histogram rate must be positive, got {rate}"
            )));
        }
        Ok(Self { counts, rate })
    }

    /// Histogram whose rate is its own total count.
    pub fn from_counts(counts: Vec<u64>) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        Self::new(counts, total.max(1) as f64)
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `count_i / rate`
    pub fn hat(&self, i: usize) -> f64 {
        self.counts[i] as f64 / self.rate
    }

    /// Applies a symbol permutation: entry `i` of the result is entry
    /// `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            counts: perm.iter().map(|&j| self.counts[j]).collect(),
            rate: self.rate,
        }
    }
}

/// Three independent parts of one Poissonized histogram. Each part has rate
/// `original_rate / 3`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitSamples {
    parts: [Histogram; 3],
}

impl SplitSamples {
    pub fn new(parts: [Histogram; 3]) -> Result<Self> {
        let dim = parts[0].len();
        for p in &parts[1..] {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: p.len(),
                });
            }
            if p.rate() != parts[0].rate() {
                return Err(Error::InvalidParams(
                    "split parts must share one rate".into(),
                ));
            }
        }
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[Histogram; 3] {
        &self.parts
    }

    pub fn part(&self, j: usize) -> &Histogram {
        &self.parts[j]
    }

    /// Per-part rate.
    pub fn rate(&self) -> f64 {
        self.parts[0].rate()
    }

    pub fn len(&self) -> usize {
        self.parts[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts[0].is_empty()
    }

    /// The merged histogram at the original rate.
    pub fn merged(&self) -> Histogram {
        let counts = (0..self.len())
            .map(|i| self.parts.iter().map(|p| p.counts()[i]).sum())
            .collect();
        Histogram {
            counts,
            rate: 3.0 * self.rate(),
        }
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            parts: [
                self.parts[0].permuted(perm),
                self.parts[1].permuted(perm),
                self.parts[2].permuted(perm),
            ],
        }
    }
}

/// Tuning constants shared by the adaptive estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    /// Regime threshold `c1 ln n / n`; approximation interval `[0, 2 c1 ln n / n]`.
    pub c1: f64,
    /// Polynomial degree `round(c2 ln n)`.
    pub c2: f64,
    /// Clamp for the non-smooth KL term.
    pub truncate: f64,
    pub min_degree: usize,
    /// Use `(p1 + p2) / 2` in place of `p1` inside the smooth KL term.
    pub average_p: bool,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            c1: 1.0,
            c2: 1.6,
            truncate: 1.0,
            min_degree: 2,
            average_p: false,
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.c1) {
            return Err(Error::InvalidConfig(format!(
                "c1 must be positive, got {}",
                self.c1
            )));
        }
        if !ok(self.c2) {
            return Err(Error::InvalidConfig(format!(
                "c2 must be positive, got {}",
                self.c2
            )));
        }
        if !ok(self.truncate) {
            return Err(Error::InvalidConfig(format!(
                "truncate must be positive, got {}",
                self.truncate
            )));
        }
        if self.min_degree < 1 {
            return Err(Error::InvalidConfig("min_degree must be at least 1".into()));
        }
        Ok(())
    }

    /// `max(min_degree, round(c2 ln rate))`
    pub fn degree(&self, rate: f64) -> usize {
        let k = (self.c2 * rate.ln()).round();
        (k.max(0.0) as usize).max(self.min_degree)
    }

    /// `c1 ln rate / rate`
    pub fn threshold(&self, rate: f64) -> f64 {
        self.c1 * rate.ln() / rate
    }

    /// Approximation interval length `2 c1 ln rate / rate`.
    pub fn delta(&self, rate: f64) -> f64 {
        2.0 * self.threshold(rate)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Smooth,
    NonSmooth,
}

/// Non-smooth iff `qhat3 <= c1 ln n / n`.
pub fn classify_regime(qhat3: f64, n: f64, c1: f64) -> Regime {
    if qhat3 <= c1 * n.ln() / n {
        Regime::NonSmooth
    } else {
        Regime::Smooth
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RegimeCounts {
    pub smooth: usize,
    pub nonsmooth: usize,
}

impl RegimeCounts {
    fn record(&mut self, regime: Regime) {
        match regime {
            Regime::Smooth => self.smooth += 1,
            Regime::NonSmooth => self.nonsmooth += 1,
        }
    }
}

/// Estimate with its per-symbol decomposition:
/// `value = offset + Σ per_symbol` (summed in symbol order, compensated).
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceEstimate {
    pub value: f64,
    pub offset: f64,
    pub per_symbol: Option<Vec<f64>>,
    /// Regime decisions on the Q side.
    pub regime_counts: RegimeCounts,
}

impl DivergenceEstimate {
    fn from_terms(offset: f64, terms: Vec<f64>, regime_counts: RegimeCounts) -> Self {
        let value = offset + compensated_sum(terms.iter().copied());
        Self {
            value,
            offset,
            per_symbol: Some(terms),
            regime_counts,
        }
    }
}

pub(crate) fn check_pair(sp: &SplitSamples, sq: &SplitSamples) -> Result<()> {
    if sp.len() != sq.len() {
        return Err(Error::DimensionMismatch {
            left: sp.len(),
            right: sq.len(),
        });
    }
    check_rate(sp.rate())?;
    check_rate(sq.rate())
}

pub(crate) fn check_rate(rate: f64) -> Result<()> {
    if rate <= 1.0 {
        return Err(Error::RateTooSmall { rate });
    }
    Ok(())
}

pub(crate) fn clamp(v: f64, bound: f64) -> f64 {
    v.clamp(-bound, bound)
}
