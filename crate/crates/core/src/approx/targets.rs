//! The functions the estimators approximate, with cached best approximations.

use std::sync::Arc;

use super::cache::get_or_compute;
use super::{remez_best_approx, ApproxResult, Interval};
use crate::error::{Error, Result};
use crate::numeric::xlogx;

const REMEZ_TOL: f64 = 1e-10;

/// Approximation targets known to the cache and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    /// `x ln x` on `[0, 1]`
    XLogX,
    /// `sqrt(x)` on `[0, 1]`
    Sqrt,
    /// `ln x` on `[a, b]`, `a > 0`
    Log,
    /// The Chebyshev construction approximating `1/x` in weighted norm.
    InvX,
}

impl Target {
    pub fn id(&self) -> &'static str {
        match self {
            Target::XLogX => "xlogx",
            Target::Sqrt => "sqrt",
            Target::Log => "log",
            Target::InvX => "invx",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "xlogx" => Some(Target::XLogX),
            "sqrt" => Some(Target::Sqrt),
            "log" => Some(Target::Log),
            "invx" => Some(Target::InvX),
            _ => None,
        }
    }
}

/// Best degree-`degree` approximation of `x ln x` on `[0, 1]`.
pub fn xlogx_best(degree: usize) -> Result<Arc<ApproxResult>> {
    let dom = Interval::unit();
    get_or_compute(Target::XLogX, degree, dom, || {
        remez_best_approx(xlogx, degree, dom, REMEZ_TOL)
    })
}

/// Coefficients `r_{K,0..K+1}`: the best degree-`K+1` approximation of
/// `x ln x` on `[0, 1]`, as used by the non-smooth KL term.
pub fn xlogx_coeffs(k: usize) -> Result<Arc<ApproxResult>> {
    if k == 0 {
        return Err(Error::InvalidParams("xlogx_coeffs needs K >= 1".into()));
    }
    xlogx_best(k + 1)
}

/// Best degree-`K` approximation of `sqrt(z)` on `[0, 1]`.
pub fn sqrt_coeffs(k: usize) -> Result<Arc<ApproxResult>> {
    if k == 0 {
        return Err(Error::InvalidParams("sqrt_coeffs needs K >= 1".into()));
    }
    let dom = Interval::unit();
    get_or_compute(Target::Sqrt, k, dom, || {
        remez_best_approx(f64::sqrt, k, dom, REMEZ_TOL)
    })
}

/// Best degree-`K` approximation of `ln x` on a positive interval.
pub fn log_coeffs(k: usize, domain: Interval) -> Result<Arc<ApproxResult>> {
    if domain.lo() <= 0.0 {
        return Err(Error::InvalidDomain {
            lo: domain.lo(),
            hi: domain.hi(),
            extra: " and lo > 0 for ln",
        });
    }
    get_or_compute(Target::Log, k, domain, || {
        remez_best_approx(f64::ln, k, domain, REMEZ_TOL)
    })
}
