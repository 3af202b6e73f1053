//! Fixture distributions, Poissonized sampling and three-way splitting.
//!
//! Every random draw goes through [`keyed_rng`], a ChaCha stream addressed by
//! the user seed plus a small key tuple, so parallel trials are independent
//! and reproducible regardless of scheduling.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};

use crate::divergence::{Histogram, SplitSamples};
use crate::error::{Error, Result};
use crate::numeric::compensated_sum;

const SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    probs: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidParams(
                "distribution needs at least one symbol".into(),
            ));
        }
        if let Some((i, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !(p.is_finite() && **p >= 0.0))
        {
            return Err(Error::InvalidParams(format!("probability {i} is {p}")));
        }
        let total = compensated_sum(probs.iter().copied());
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidParams(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self { probs })
    }

    pub fn uniform(s: usize) -> Result<Self> {
        if s == 0 {
            return Err(Error::InvalidParams(
                "uniform distribution needs S >= 1".into(),
            ));
        }
        Self::new(vec![1.0 / s as f64; s])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Reads `symbol_index probability` lines; `#` starts a comment and
    /// unlisted indices get probability 0.
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut probs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let (Some(idx), Some(prob), None) = (fields.next(), fields.next(), fields.next())
            else {
                return Err(Error::parse(
                    path,
                    lineno + 1,
                    "expected `symbol_index probability`",
                ));
            };
            let idx: usize = idx
                .parse()
                .map_err(|_| Error::parse(path, lineno + 1, format!("bad symbol index `{idx}`")))?;
            let prob: f64 = prob
                .parse()
                .map_err(|_| Error::parse(path, lineno + 1, format!("bad probability `{prob}`")))?;
            if probs.len() <= idx {
                probs.resize(idx + 1, 0.0);
            }
            probs[idx] = prob;
        }
        Self::new(probs)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for (i, p) in self.probs.iter().enumerate() {
            out.push_str(&format!("{i} {p:?}\n"));
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

/// `(P, Q)` with `p_i <= u q_i` for every symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionPair {
    p: DiscreteDistribution,
    q: DiscreteDistribution,
    u_bound: f64,
}

impl DistributionPair {
    pub fn new(p: DiscreteDistribution, q: DiscreteDistribution, u_bound: f64) -> Result<Self> {
        if p.len() != q.len() {
            return Err(Error::DimensionMismatch {
                left: p.len(),
                right: q.len(),
            });
        }
        if !(u_bound.is_finite() && u_bound >= 1.0) {
            return Err(Error::InvalidParams(format!(
                "likelihood-ratio bound must be >= 1, got {u_bound}"
            )));
        }
        for (i, (&pi, &qi)) in p.probs().iter().zip(q.probs()).enumerate() {
            if pi > u_bound * qi * (1.0 + SUM_TOL) {
                return Err(Error::InvalidParams(format!(
                    "p[{i}] = {pi} exceeds u * q[{i}] = {}",
                    u_bound * qi
                )));
            }
        }
        Ok(Self { p, q, u_bound })
    }

    pub fn p(&self) -> &DiscreteDistribution {
        &self.p
    }

    pub fn q(&self) -> &DiscreteDistribution {
        &self.q
    }

    pub fn u_bound(&self) -> f64 {
        self.u_bound
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn max_ratio(&self) -> f64 {
        self.p
            .probs()
            .iter()
            .zip(self.q.probs())
            .filter(|(&pi, _)| pi > 0.0)
            .map(|(&pi, &qi)| pi / qi)
            .fold(0.0, f64::max)
    }
}

/// `P` uniform on `S` symbols, `Q = (1/(Su), ..., 1/(Su), 1 - (S-1)/(Su))`.
pub fn make_worst_case_pair(s: usize, u: f64) -> Result<DistributionPair> {
    if s < 2 {
        return Err(Error::InvalidParams(format!(
            "worst-case pair needs S >= 2, got {s}"
        )));
    }
    if !(u.is_finite() && u > 1.0) {
        return Err(Error::InvalidParams(format!(
            "worst-case pair needs u > 1, got {u}"
        )));
    }
    let sf = s as f64;
    let small = 1.0 / (sf * u);
    let last = 1.0 - (sf - 1.0) * small;
    let mut q = vec![small; s - 1];
    q.push(last);
    DistributionPair::new(
        DiscreteDistribution::uniform(s)?,
        DiscreteDistribution::new(q)?,
        u,
    )
}

/// `P = Q` uniform on `S` symbols.
pub fn make_uniform_pair(s: usize) -> Result<DistributionPair> {
    let p = DiscreteDistribution::uniform(s)?;
    DistributionPair::new(p.clone(), p, 1.0)
}

/// The pairs `(P, Q1)` and `(P, Q0)` with
/// `P = (1/(2(S-1)), ..., 1/(2(S-1)), 1/2)`,
/// `Q1 = (1/((S-1)u), ..., 1 - 1/u)` and `Q0` perturbing the first `S-1`
/// masses of `Q1` alternately by `±eps`.
pub fn make_two_point_pair(
    s: usize,
    u: f64,
    eps: f64,
) -> Result<(DistributionPair, DistributionPair)> {
    if s < 3 || s.is_multiple_of(2) {
        return Err(Error::InvalidParams(format!(
            "two-point pair needs odd S >= 3, got {s}"
        )));
    }
    if !(u.is_finite() && u > 1.0) {
        return Err(Error::InvalidParams(format!(
            "two-point pair needs u > 1, got {u}"
        )));
    }
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidParams(format!(
            "two-point pair needs eps in (0, 1/2), got {eps}"
        )));
    }
    let k = (s - 1) as f64;
    let mut p = vec![1.0 / (2.0 * k); s - 1];
    p.push(0.5);
    let base = 1.0 / (k * u);
    let last = 1.0 - 1.0 / u;
    let mut q1 = vec![base; s - 1];
    q1.push(last);
    let mut q0: Vec<f64> = (0..s - 1)
        .map(|i| {
            if i % 2 == 0 {
                (1.0 + eps) * base
            } else {
                (1.0 - eps) * base
            }
        })
        .collect();
    q0.push(last);
    let p = DiscreteDistribution::new(p)?;
    Ok((
        DistributionPair::new(p.clone(), DiscreteDistribution::new(q1)?, u)?,
        DistributionPair::new(p, DiscreteDistribution::new(q0)?, u)?,
    ))
}

/// Independent ChaCha stream for `(seed, keys)`.
pub fn keyed_rng(seed: u64, keys: [u64; 3]) -> ChaCha8Rng {
    let mut bytes = [0u8; 32];
    bytes[..8].copy_from_slice(&seed.to_le_bytes());
    for (j, k) in keys.iter().enumerate() {
        bytes[8 * (j + 1)..8 * (j + 2)].copy_from_slice(&k.to_le_bytes());
    }
    ChaCha8Rng::from_seed(bytes)
}

pub fn poisson_draw<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    Poisson::new(lambda)
        .expect("positive finite Poisson mean")
        .sample(rng) as u64
}

/// `counts[i] ~ Poi(rate * p_i)` independently.
pub fn sample_poisson_histogram_with<R: Rng + ?Sized>(
    d: &DiscreteDistribution,
    rate: f64,
    rng: &mut R,
) -> Result<Histogram> {
    let counts = d
        .probs()
        .iter()
        .map(|&p| poisson_draw(rate * p, rng))
        .collect();
    Histogram::new(counts, rate)
}

pub fn sample_poisson_histogram(
    d: &DiscreteDistribution,
    rate: f64,
    seed: u64,
) -> Result<Histogram> {
    if rate < 1.0 {
        return Err(Error::RateTooSmall { rate });
    }
    sample_poisson_histogram_with(d, rate, &mut keyed_rng(seed, [0, 0, 0]))
}

/// Thins every count into three parts by independent uniform trisection.
pub fn split3_with<R: Rng + ?Sized>(h: &Histogram, rng: &mut R) -> Result<SplitSamples> {
    let n = h.len();
    let mut parts = [vec![0u64; n], vec![0u64; n], vec![0u64; n]];
    for (i, &c) in h.counts().iter().enumerate() {
        if c == 0 {
            continue;
        }
        let a = Binomial::new(c, 1.0 / 3.0)
            .expect("valid binomial")
            .sample(rng);
        let b = Binomial::new(c - a, 0.5)
            .expect("valid binomial")
            .sample(rng);
        parts[0][i] = a;
        parts[1][i] = b;
        parts[2][i] = c - a - b;
    }
    let rate = h.rate() / 3.0;
    let [a, b, c] = parts;
    SplitSamples::new([
        Histogram::new(a, rate)?,
        Histogram::new(b, rate)?,
        Histogram::new(c, rate)?,
    ])
}

pub fn split3(h: &Histogram, seed: u64) -> Result<SplitSamples> {
    split3_with(h, &mut keyed_rng(seed, [u64::MAX, 0, 0]))
}

/// Draws the three parts directly as independent `Poi(rate p_i / 3)`
/// histograms, which has the same law as sampling at `rate` and thinning.
pub fn sample_split_direct<R: Rng + ?Sized>(
    d: &DiscreteDistribution,
    rate: f64,
    rng: &mut R,
) -> Result<SplitSamples> {
    let part = rate / 3.0;
    SplitSamples::new([
        sample_poisson_histogram_with(d, part, rng)?,
        sample_poisson_histogram_with(d, part, rng)?,
        sample_poisson_histogram_with(d, part, rng)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distribution_validation() {
        assert!(DiscreteDistribution::new(vec![0.5, 0.5]).is_ok());
        assert!(DiscreteDistribution::new(vec![0.5, 0.4]).is_err());
        assert!(DiscreteDistribution::new(vec![1.5, -0.5]).is_err());
        assert!(DiscreteDistribution::new(vec![]).is_err());
    }

    #[test]
    fn worst_case_examples() {
        let pair = make_worst_case_pair(2, 2.0).unwrap();
        assert_eq!(pair.p().probs(), &[0.5, 0.5]);
        assert_eq!(pair.q().probs(), &[0.25, 0.75]);
        assert_eq!(pair.max_ratio(), 2.0);
        let pair = make_worst_case_pair(4, 4.0).unwrap();
        assert_eq!(
            pair.q().probs(),
            &[1.0 / 16.0, 1.0 / 16.0, 1.0 / 16.0, 13.0 / 16.0]
        );
        assert!(make_worst_case_pair(1, 2.0).is_err());
        assert!(make_worst_case_pair(3, 1.0).is_err());
    }

    #[test]
    fn two_point_examples() {
        let (a, b) = make_two_point_pair(5, 4.0, 0.3).unwrap();
        assert_eq!(a.p(), b.p());
        assert!(a.max_ratio() <= 4.0 && b.max_ratio() <= 4.0);
        assert_eq!(b.q().probs()[0], 1.3 / 16.0);
        assert_eq!(b.q().probs()[1], 0.7 / 16.0);
        assert!(make_two_point_pair(4, 4.0, 0.3).is_err());
        assert!(make_two_point_pair(5, 4.0, 0.5).is_err());
        // last-symbol ratio (1/2)/(1 - 1/u) exceeds u below u = 1.5
        assert!(make_two_point_pair(5, 1.2, 0.3).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let d = DiscreteDistribution::new(vec![0.2, 0.0, 0.8]).unwrap();
        let a = sample_poisson_histogram(&d, 100.0, 7).unwrap();
        let b = sample_poisson_histogram(&d, 100.0, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.counts()[1], 0);
        let s1 = split3(&a, 3).unwrap();
        assert_eq!(s1, split3(&a, 3).unwrap());
        assert_eq!(s1.merged().counts(), a.counts());
        assert!((s1.rate() - 100.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn split_of_zero_histogram() {
        let h = Histogram::new(vec![0; 4], 30.0).unwrap();
        let s = split3(&h, 1).unwrap();
        for part in s.parts() {
            assert!(part.counts().iter().all(|&c| c == 0));
        }
    }

    #[test]
    fn distribution_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.txt");
        let d = DiscreteDistribution::new(vec![0.1, 0.0, 0.7, 0.2]).unwrap();
        d.write(&path).unwrap();
        assert_eq!(DiscreteDistribution::read(&path).unwrap(), d);
        fs::write(&path, "# header\n0 0.25\n2 0.75 # tail\n").unwrap();
        assert_eq!(
            DiscreteDistribution::read(&path).unwrap().probs(),
            &[0.25, 0.0, 0.75]
        );
        fs::write(&path, "0 0.25\n1 abc\n").unwrap();
        assert!(matches!(
            DiscreteDistribution::read(&path),
            Err(Error::Parse { line: 2, .. })
        ));
    }
}
