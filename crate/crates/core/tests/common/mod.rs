//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use minilp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, ToPrimitive, Zero};

/// Minimax error of the best degree-`k` polynomial fit to `f` on the given
/// points of `[lo, hi]`, solved as a linear program in the Chebyshev basis.
pub fn lp_minimax<F: Fn(f64) -> f64>(f: F, k: usize, lo: f64, hi: f64, xs: &[f64]) -> f64 {
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let coeffs: Vec<_> = (0..=k)
        .map(|_| lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY)))
        .collect();
    let t = lp.add_var(1.0, (0.0, f64::INFINITY));
    for &x in xs {
        let s = (2.0 * x - lo - hi) / (hi - lo);
        let mut basis = Vec::with_capacity(k + 1);
        let (mut a, mut b) = (1.0, s);
        for j in 0..=k {
            basis.push(if j == 0 { 1.0 } else { a });
            if j > 0 {
                let c = 2.0 * s * b - a;
                a = b;
                b = c;
            } else {
                a = s;
                b = 2.0 * s * s - 1.0;
            }
        }
        let fx = f(x);
        let mut upper = LinearExpr::empty();
        let mut lower = LinearExpr::empty();
        for (v, &tj) in coeffs.iter().zip(&basis) {
            upper.add(*v, tj);
            lower.add(*v, tj);
        }
        upper.add(t, -1.0);
        lower.add(t, 1.0);
        lp.add_constraint(upper, ComparisonOp::Le, fx);
        lp.add_constraint(lower, ComparisonOp::Ge, fx);
    }
    lp.solve().expect("minimax LP").objective()
}

pub fn uniform_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect()
}

/// Chebyshev–Lobatto points, clustered at the ends where the targets are
/// least smooth.
pub fn chebyshev_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| {
            let theta = std::f64::consts::PI * i as f64 / (points - 1) as f64;
            let x = lo + (hi - lo) * 0.5 * (1.0 - theta.cos());
            x.clamp(lo, hi)
        })
        .collect()
}

/// Poisson pmf `P(Poi(lambda) = k)` for `k = 0..` until past the mode and
/// below `1e-18`; the discarded tail is far below `1e-14`.
pub fn poisson_pmf(lambda: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut p = (-lambda).exp();
    let mut k = 0u64;
    while (k as f64) <= lambda + 10.0 || p >= 1e-18 {
        out.push(p);
        k += 1;
        p *= lambda / k as f64;
    }
    out
}

pub fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

pub fn to_rational(x: f64) -> BigRational {
    BigRational::from_f64(x).unwrap()
}

/// `g_{j,q}(count)` in exact arithmetic on the f64 inputs.
pub fn exact_centered(count: u64, j: usize, q: f64, n: f64) -> f64 {
    let (q, n) = (to_rational(q), to_rational(n));
    let mut acc = BigRational::zero();
    let mut binom = BigInt::from(1);
    for k in 0..=j {
        if k > 0 {
            binom = binom * BigInt::from(j - k + 1) / BigInt::from(k);
        }
        let mut falling = BigRational::from_integer(BigInt::from(1));
        for l in 0..k as u64 {
            falling =
                falling * BigRational::from_integer(BigInt::from(count as i64 - l as i64)) / &n;
        }
        let mut power = BigRational::from_integer(BigInt::from(1));
        for _ in k..j {
            power *= -&q;
        }
        acc += BigRational::from_integer(binom.clone()) * power * falling;
    }
    acc.to_f64().unwrap()
}

pub fn pmf_second_moment(j: usize, p: f64, q: f64, n: f64) -> f64 {
    poisson_pmf(n * p)
        .iter()
        .enumerate()
        .map(|(k, &w)| w * exact_centered(k as u64, j, q, n).powi(2))
        .sum()
}
