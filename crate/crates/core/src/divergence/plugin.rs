//! Plug-in baselines on raw (unsplit) histograms. Both sides are normalized
//! to empirical distributions; a zero on the `Q` side is lifted to the
//! lattice point `1/n` nearest zero.

use super::Histogram;
use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, xlogx};

fn check_dims(hp: &Histogram, hq: &Histogram) -> Result<()> {
    if hp.len() != hq.len() {
        return Err(Error::DimensionMismatch {
            left: hp.len(),
            right: hq.len(),
        });
    }
    Ok(())
}

fn empirical(h: &Histogram) -> Vec<f64> {
    let total = h.total() as f64;
    h.counts().iter().map(|&c| c as f64 / total).collect()
}

/// Lattice floor `1/n` for the `Q` side, with `n` the observed total (the
/// nominal rate when nothing was observed).
fn q_floor(hq: &Histogram) -> f64 {
    match hq.total() {
        0 => 1.0 / hq.rate(),
        t => 1.0 / t as f64,
    }
}

/// `Σ p̂_i ln(p̂_i / max(q̂_i, 1/n))`.
pub fn estimate_kl_plugin(hp: &Histogram, hq: &Histogram) -> Result<f64> {
    check_dims(hp, hq)?;
    if hp.total() == 0 {
        return Err(Error::EmptyP);
    }
    let p = empirical(hp);
    let floor = q_floor(hq);
    let q: Vec<f64> = if hq.total() == 0 {
        vec![floor; hq.len()]
    } else {
        empirical(hq).into_iter().map(|v| v.max(floor)).collect()
    };
    Ok(compensated_sum(
        p.iter()
            .zip(&q)
            .filter(|(&pi, _)| pi > 0.0)
            .map(|(&pi, &qi)| xlogx(pi) - pi * qi.ln()),
    ))
}

/// `½ Σ (√p̂_i - √q̂_i)^2`.
pub fn hellinger_plugin(hp: &Histogram, hq: &Histogram) -> Result<f64> {
    check_dims(hp, hq)?;
    if hp.total() == 0 {
        return Err(Error::EmptyInput("p histogram has no counts"));
    }
    if hq.total() == 0 {
        return Err(Error::EmptyInput("q histogram has no counts"));
    }
    let (p, q) = (empirical(hp), empirical(hq));
    Ok(0.5
        * compensated_sum(p.iter().zip(&q).map(|(&a, &b)| {
            let d = a.sqrt() - b.sqrt();
            d * d
        })))
}

/// `Σ p̂_i^2 / q̂_i' - 1`, lifting `q̂_i = 0 < p̂_i` to `1/n`.
pub fn chi2_plugin(hp: &Histogram, hq: &Histogram) -> Result<f64> {
    check_dims(hp, hq)?;
    if hp.total() == 0 {
        return Err(Error::EmptyInput("p histogram has no counts"));
    }
    let p = empirical(hp);
    let floor = q_floor(hq);
    let q: Vec<f64> = if hq.total() == 0 {
        vec![0.0; hq.len()]
    } else {
        empirical(hq)
    };
    let sum = compensated_sum(
        p.iter()
            .zip(&q)
            .filter(|(&pi, _)| pi > 0.0)
            .map(|(&pi, &qi)| {
                let qi = if qi == 0.0 { floor } else { qi };
                pi * pi / qi
            }),
    );
    Ok(sum - 1.0)
}
