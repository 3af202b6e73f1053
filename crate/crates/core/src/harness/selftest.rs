//! Fast invariant checks that need no fixture files.

use crate::approx::{bernstein_apply, cheb_inverse_poly, xlogx_best};
use crate::divergence::{estimate_kl_plugin, Histogram};
use crate::numeric::{golden_max, xlogx};
use crate::sampling::{sample_poisson_histogram, split3, DiscreteDistribution};
use crate::unbiased::{
    centered_falling_factorial, falling_factorial_estimate, falling_factorial_second_moment,
};

#[derive(Debug, Clone, PartialEq)]
pub struct SelfTestOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &'static str, worst: f64, tol: f64) -> SelfTestOutcome {
    SelfTestOutcome {
        name,
        passed: worst <= tol,
        detail: format!("worst deviation {worst:.3e} (tolerance {tol:.0e})"),
    }
}

/// Poisson pmf weights `P(Poi(lambda) = k)` past the mode until they drop
/// below `1e-18`.
fn poisson_pmf(lambda: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut pmf = (-lambda).exp();
    let mut k = 0u64;
    while (k as f64) <= lambda || pmf >= 1e-18 {
        out.push(pmf);
        k += 1;
        pmf *= lambda / k as f64;
    }
    out
}

fn inverse_identity() -> SelfTestOutcome {
    let mut worst: f64 = 0.0;
    for k in 0..=6usize {
        let delta = 1.0;
        let q = cheb_inverse_poly(k, delta).expect("inverse polynomial");
        let err = |x: f64| x - x * x * q.eval(x);
        let grid = 2000;
        let h = delta / grid as f64;
        let mut best: f64 = 0.0;
        for i in 1..grid {
            let x = i as f64 * h;
            if err(x) >= err(x - h) && err(x) >= err(x + h) {
                best = best.max(golden_max(err, x - h, x + h, 200).1);
            }
        }
        best = best.max(err(delta));
        let want = delta / ((k + 2) * (k + 2)) as f64;
        worst = worst.max((best - want).abs() / want);
    }
    outcome("inverse polynomial exact error", worst, 1e-9)
}

fn unbiasedness() -> SelfTestOutcome {
    let mut worst: f64 = 0.0;
    for &(n, q) in &[(20.0, 0.1), (50.0, 0.5), (200.0, 0.02)] {
        let pmf = poisson_pmf(n * q);
        for j in 0..=6 {
            let mean: f64 = pmf
                .iter()
                .enumerate()
                .map(|(c, w)| w * falling_factorial_estimate(c as f64 / n, j, n).expect("lattice"))
                .sum();
            worst = worst.max((mean - q.powi(j as i32)).abs());
        }
    }
    outcome("falling factorials are unbiased", worst, 1e-10)
}

fn second_moment() -> SelfTestOutcome {
    let mut worst: f64 = 0.0;
    for &(j, p, q, n) in &[
        (1, 0.2, 0.0, 30.0),
        (2, 0.1, 0.05, 20.0),
        (4, 0.3, 0.1, 50.0),
    ] {
        let pmf = poisson_pmf(n * p);
        let direct: f64 = pmf
            .iter()
            .enumerate()
            .map(|(c, w)| w * centered_falling_factorial(c as u64, j, q, n).powi(2))
            .sum();
        let closed = falling_factorial_second_moment(j, p, q, n);
        worst = worst.max((direct - closed).abs());
    }
    outcome("second-moment closed form", worst, 1e-9)
}

fn equioscillation() -> SelfTestOutcome {
    let r = xlogx_best(7).expect("x ln x approximation");
    let e = r.levelled_error;
    let mut worst: f64 = 0.0;
    let mut prev_sign = 0.0;
    for &x in &r.equioscillation_points {
        let d = xlogx(x) - r.poly.eval(x);
        worst = worst.max((d.abs() - e).abs() / e);
        if d.signum() == prev_sign {
            worst = f64::INFINITY;
        }
        prev_sign = d.signum();
    }
    if r.equioscillation_points.len() != 9 {
        worst = f64::INFINITY;
    }
    outcome("Remez equioscillation", worst, 1e-6)
}

fn plugin_example() -> SelfTestOutcome {
    let p = Histogram::new(vec![3, 1], 4.0).expect("histogram");
    let q = Histogram::new(vec![0, 4], 4.0).expect("histogram");
    let got = estimate_kl_plugin(&p, &q).expect("plug-in");
    let want = 0.75 * 3f64.ln() + 0.25 * 0.25f64.ln();
    outcome("plug-in lattice floor", (got - want).abs(), 1e-12)
}

fn bernstein_affine() -> SelfTestOutcome {
    let mut worst: f64 = 0.0;
    for n in [3, 50, 2000] {
        for i in 0..=20 {
            let x = i as f64 / 20.0;
            worst = worst.max((bernstein_apply(|t| 2.0 - 3.0 * t, n, x) - (2.0 - 3.0 * x)).abs());
        }
    }
    outcome("Bernstein reproduces affine functions", worst, 1e-12)
}

fn thinning() -> SelfTestOutcome {
    let d = DiscreteDistribution::new(vec![0.5, 0.3, 0.2, 0.0]).expect("distribution");
    let mut mismatches = 0.0;
    for seed in 0..20 {
        let h = sample_poisson_histogram(&d, 500.0, seed).expect("sample");
        let s = split3(&h, seed).expect("split");
        if s.merged().counts() != h.counts() {
            mismatches += 1.0;
        }
    }
    outcome("split parts sum to the input", mismatches, 0.0)
}

pub fn run_selftest() -> Vec<SelfTestOutcome> {
    vec![
        inverse_identity(),
        unbiasedness(),
        second_moment(),
        equioscillation(),
        plugin_example(),
        bernstein_affine(),
        thinning(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selftest_passes() {
        for o in run_selftest() {
            assert!(o.passed, "{}: {}", o.name, o.detail);
        }
    }
}
