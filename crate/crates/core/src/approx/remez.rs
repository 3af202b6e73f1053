//! Remez exchange for the best uniform polynomial approximation of a
//! continuous function on an interval.
//!
//! Iterates are kept in the Chebyshev basis of the domain. Each step solves
//! the levelled-error system on the current reference, locates the signed
//! extrema of the error curve on a grid oversampled between reference points
//! (refined by golden-section search), and replaces the whole reference with
//! an alternating run of those extrema.

use nalgebra::{DMatrix, DVector};

use super::{ApproxResult, ChebSeries, Interval};
use crate::error::{Error, Result};
use crate::numeric::golden_max;

/// Tuning knobs for [`remez_with_options`].
#[derive(Debug, Clone, Copy)]
pub struct RemezOptions {
    /// Stop when the relative spread of the reference errors drops below this.
    pub tol: f64,
    pub max_iterations: usize,
    /// Grid points per gap between consecutive reference points.
    pub oversample: usize,
    /// Golden-section steps spent refining each extremum.
    pub refine_steps: usize,
}

impl Default for RemezOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iterations: 100,
            oversample: 20,
            refine_steps: 80,
        }
    }
}

/// Best degree-`degree` uniform approximation of `f` on `domain`.
pub fn remez_best_approx<F>(f: F, degree: usize, domain: Interval, tol: f64) -> Result<ApproxResult>
where
    F: Fn(f64) -> f64,
{
    remez_with_options(
        f,
        degree,
        domain,
        RemezOptions {
            tol,
            ..RemezOptions::default()
        },
    )
}

pub fn remez_with_options<F>(
    f: F,
    degree: usize,
    domain: Interval,
    opts: RemezOptions,
) -> Result<ApproxResult>
where
    F: Fn(f64) -> f64,
{
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "tolerance must be positive, got {}",
            opts.tol
        )));
    }
    let n_ref = degree + 2;
    let fu = |t: f64| f(domain.map_from_unit(t));

    // Chebyshev extrema of degree+1, ascending.
    let mut reference: Vec<f64> = (0..n_ref)
        .map(|j| -(std::f64::consts::PI * j as f64 / (n_ref - 1) as f64).cos())
        .collect();
    reference[0] = -1.0;
    reference[n_ref - 1] = 1.0;

    let mut last: Option<ApproxResult> = None;
    let mut last_spread = f64::INFINITY;

    for iter in 1..=opts.max_iterations {
        let (coeffs, levelled) = solve_reference(&fu, &reference, degree)?;
        let series = ChebSeries::new(coeffs, domain);
        let err = |t: f64| fu(t) - series.eval_unit(t);

        let fscale = reference
            .iter()
            .map(|&t| fu(t).abs())
            .fold(0.0, f64::max)
            .max(1.0);
        let extrema = locate_extrema(&err, &reference, levelled.abs(), opts);

        // Exactly representable target: the error curve is rounding noise.
        let max_err = extrema
            .iter()
            .map(|e| e.1.abs())
            .fold(levelled.abs(), f64::max);
        if max_err <= 64.0 * f64::EPSILON * fscale {
            return build_result(series, max_err, &reference, domain, iter);
        }

        let Some(new_ref) = select_reference(&extrema, n_ref) else {
            // Fewer alternations than required; keep the old reference and
            // report the iterate as non-converged.
            let result = build_result(series, max_err, &reference, domain, iter)?;
            return Err(Error::NonConvergence {
                degree,
                iterations: iter,
                spread: last_spread,
                last: Box::new(result),
            });
        };

        let (lo_e, hi_e) = new_ref.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), e| {
            (lo.min(e.1.abs()), hi.max(e.1.abs()))
        });
        let spread = (hi_e - lo_e) / hi_e;
        let points: Vec<f64> = new_ref.iter().map(|e| e.0).collect();
        if spread < opts.tol {
            return build_result(series, hi_e, &points, domain, iter);
        }
        last_spread = spread;
        last = Some(build_result(series, hi_e, &points, domain, iter)?);
        reference = points;
    }

    Err(Error::NonConvergence {
        degree,
        iterations: opts.max_iterations,
        spread: last_spread,
        last: Box::new(last.expect("at least one iteration ran")),
    })
}

fn build_result(
    series: ChebSeries,
    levelled: f64,
    points: &[f64],
    domain: Interval,
    iterations: usize,
) -> Result<ApproxResult> {
    Ok(ApproxResult {
        poly: series.to_polynomial()?,
        cheb: series,
        levelled_error: levelled,
        equioscillation_points: points.iter().map(|&t| domain.map_from_unit(t)).collect(),
        iterations,
    })
}

/// Solves `Σ c_k T_k(t_j) + (-1)^j E = f(t_j)` for the Chebyshev coefficients
/// and the levelled error `E`.
fn solve_reference<F: Fn(f64) -> f64>(
    f: &F,
    reference: &[f64],
    degree: usize,
) -> Result<(Vec<f64>, f64)> {
    let n = reference.len();
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut b = DVector::<f64>::zeros(n);
    for (j, &t) in reference.iter().enumerate() {
        let (mut prev, mut cur) = (1.0, t);
        a[(j, 0)] = 1.0;
        if degree >= 1 {
            a[(j, 1)] = t;
        }
        for k in 2..=degree {
            let next = 2.0 * t * cur - prev;
            prev = cur;
            cur = next;
            a[(j, k)] = cur;
        }
        a[(j, n - 1)] = if j % 2 == 0 { 1.0 } else { -1.0 };
        b[j] = f(t);
    }
    let sol = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::InvalidParams("singular Remez reference system".into()))?;
    let coeffs = sol.iter().take(degree + 1).copied().collect();
    Ok((coeffs, sol[n - 1]))
}

/// Signed extremum of the error curve: `(t, error(t))`.
type Extremum = (f64, f64);

/// Finds one extremum per maximal constant-sign run of the error on a grid
/// oversampled between the reference points and the domain endpoints.
fn locate_extrema<E: Fn(f64) -> f64>(
    err: &E,
    reference: &[f64],
    levelled: f64,
    opts: RemezOptions,
) -> Vec<Extremum> {
    let mut breaks: Vec<f64> = Vec::with_capacity(reference.len() + 2);
    breaks.push(-1.0);
    breaks.extend(reference.iter().copied());
    breaks.push(1.0);
    breaks.dedup();

    let mut grid = Vec::with_capacity(breaks.len() * opts.oversample + 1);
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        for i in 0..opts.oversample {
            grid.push(a + (b - a) * i as f64 / opts.oversample as f64);
        }
    }
    grid.push(1.0);
    let vals: Vec<f64> = grid.iter().map(|&t| err(t)).collect();

    let mut extrema: Vec<Extremum> = Vec::new();
    let mut i = 0;
    let mut prev_sign = if vals[0] >= 0.0 { 1.0 } else { -1.0 };
    while i < grid.len() {
        // Maximal run sharing prev_sign (zeros continue the current run).
        let sign = if vals[i] > 0.0 {
            1.0
        } else if vals[i] < 0.0 {
            -1.0
        } else {
            prev_sign
        };
        let mut best = i;
        while i < grid.len() && (vals[i] * sign >= 0.0) {
            if vals[i] * sign > vals[best] * sign {
                best = i;
            }
            i += 1;
        }
        let lo = grid[best.saturating_sub(1)];
        let hi = grid[(best + 1).min(grid.len() - 1)];
        let (mut t, mut v) = (grid[best], vals[best]);
        if hi > lo {
            let (rt, rv) = golden_max(|s| sign * err(s), lo, hi, opts.refine_steps);
            if rv > sign * v {
                t = rt;
                v = sign * rv;
            }
        }
        extrema.push((t, v));
        prev_sign = -sign;
    }

    prune(extrema, levelled)
}

/// Drops extrema smaller than the levelled error (noise near zero crossings)
/// and merges same-sign neighbours, keeping the larger one.
fn prune(extrema: Vec<Extremum>, levelled: f64) -> Vec<Extremum> {
    let floor = levelled * (1.0 - 1e-9);
    let mut out: Vec<Extremum> = Vec::with_capacity(extrema.len());
    for e in extrema.into_iter().filter(|e| e.1.abs() >= floor) {
        match out.last_mut() {
            Some(last) if last.1.signum() == e.1.signum() => {
                if e.1.abs() > last.1.abs() {
                    *last = e;
                }
            }
            _ => out.push(e),
        }
    }
    out
}

/// Picks `n_ref` consecutive alternating extrema containing the global
/// maximum.
fn select_reference(extrema: &[Extremum], n_ref: usize) -> Option<Vec<Extremum>> {
    if extrema.len() < n_ref {
        return None;
    }
    let (imax, _) = extrema
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |(bi, bv), (i, e)| {
            if e.1.abs() > bv {
                (i, e.1.abs())
            } else {
                (bi, bv)
            }
        });
    let start = imax.saturating_sub(n_ref - 1).min(extrema.len() - n_ref);
    // Prefer the window with the largest minimum |error| among those holding imax.
    let last_start = imax.min(extrema.len() - n_ref);
    let best = (start..=last_start)
        .max_by(|&a, &b| {
            let ma = window_min(&extrema[a..a + n_ref]);
            let mb = window_min(&extrema[b..b + n_ref]);
            ma.partial_cmp(&mb)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(b.cmp(&a))
        })
        .unwrap_or(start);
    Some(extrema[best..best + n_ref].to_vec())
}

fn window_min(w: &[Extremum]) -> f64 {
    w.iter().map(|e| e.1.abs()).fold(f64::INFINITY, f64::min)
}
