//! Monte Carlo risk evaluation on synthetic fixtures.

mod config;
mod selftest;

pub use config::parse_spec;
pub use selftest::{run_selftest, SelfTestOutcome};

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::divergence::{
    chi2_plugin, estimate_kl_plugin, hellinger_plugin, Chi2Estimator, EstimatorConfig,
    HellingerEstimator, KlAdaptive, SplitSamples,
};
use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, xlogx};
use crate::sampling::{
    keyed_rng, make_two_point_pair, make_uniform_pair, make_worst_case_pair, sample_split_direct,
    DiscreteDistribution, DistributionPair,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Divergence {
    Kl,
    Hellinger,
    Chi2,
}

impl Divergence {
    /// Exact value by direct summation: `Σ p ln(p/q)`, `½ Σ (√p - √q)^2`
    /// or `Σ p^2/q - 1`.
    pub fn exact(self, p: &DiscreteDistribution, q: &DiscreteDistribution) -> f64 {
        let pairs = p.probs().iter().zip(q.probs());
        match self {
            Divergence::Kl => compensated_sum(
                pairs
                    .filter(|(&a, _)| a > 0.0)
                    .map(|(&a, &b)| xlogx(a) - a * b.ln()),
            ),
            Divergence::Hellinger => {
                0.5 * compensated_sum(pairs.map(|(&a, &b)| (a.sqrt() - b.sqrt()).powi(2)))
            }
            Divergence::Chi2 => {
                compensated_sum(pairs.filter(|(&a, _)| a > 0.0).map(|(&a, &b)| a * a / b)) - 1.0
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimatorId {
    KlAdaptive,
    KlPlugin,
    Hellinger,
    HellingerPlugin,
    Chi2,
    Chi2Plugin,
}

impl EstimatorId {
    pub const ALL: [EstimatorId; 6] = [
        EstimatorId::KlAdaptive,
        EstimatorId::KlPlugin,
        EstimatorId::Hellinger,
        EstimatorId::HellingerPlugin,
        EstimatorId::Chi2,
        EstimatorId::Chi2Plugin,
    ];

    pub fn id(self) -> &'static str {
        match self {
            EstimatorId::KlAdaptive => "kl_adaptive",
            EstimatorId::KlPlugin => "kl_plugin",
            EstimatorId::Hellinger => "hellinger",
            EstimatorId::HellingerPlugin => "hellinger_plugin",
            EstimatorId::Chi2 => "chi2",
            EstimatorId::Chi2Plugin => "chi2_plugin",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.id() == s)
            .ok_or_else(|| Error::UnknownEstimator(s.to_string()))
    }

    pub fn divergence(self) -> Divergence {
        match self {
            EstimatorId::KlAdaptive | EstimatorId::KlPlugin => Divergence::Kl,
            EstimatorId::Hellinger | EstimatorId::HellingerPlugin => Divergence::Hellinger,
            EstimatorId::Chi2 | EstimatorId::Chi2Plugin => Divergence::Chi2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FixtureSpec {
    /// `P = Q` uniform; `u` is ignored.
    Uniform,
    WorstCase,
    TwoPointQ1 {
        eps: f64,
    },
    TwoPointQ0 {
        eps: f64,
    },
}

impl FixtureSpec {
    pub fn parse(name: &str, eps: f64) -> Result<Self> {
        match name {
            "uniform" => Ok(FixtureSpec::Uniform),
            "worst_case" => Ok(FixtureSpec::WorstCase),
            "two_point_q1" => Ok(FixtureSpec::TwoPointQ1 { eps }),
            "two_point_q0" => Ok(FixtureSpec::TwoPointQ0 { eps }),
            other => Err(Error::UnknownFixture(other.to_string())),
        }
    }

    pub fn build(&self, s: usize, u: f64) -> Result<DistributionPair> {
        match *self {
            FixtureSpec::Uniform => make_uniform_pair(s),
            FixtureSpec::WorstCase => make_worst_case_pair(s, u),
            FixtureSpec::TwoPointQ1 { eps } => Ok(make_two_point_pair(s, u, eps)?.0),
            FixtureSpec::TwoPointQ0 { eps } => Ok(make_two_point_pair(s, u, eps)?.1),
        }
    }
}

/// One `(S, m, n, u)` point; `m` and `n` are total Poisson rates before
/// splitting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub s: usize,
    pub m: f64,
    pub n: f64,
    pub u: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub fixture: FixtureSpec,
    pub estimators: Vec<EstimatorId>,
    pub grid: Vec<GridPoint>,
    pub trials: usize,
    pub seed: u64,
    pub cfg: EstimatorConfig,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.grid.is_empty() {
            return Err(Error::InvalidConfig("grid must not be empty".into()));
        }
        if self.estimators.is_empty() {
            return Err(Error::InvalidConfig("no estimators listed".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidConfig("threads must be at least 1".into()));
        }
        self.cfg.validate()
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        parse_spec(&text, path)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiskRow {
    pub estimator: EstimatorId,
    pub s: usize,
    pub m: f64,
    pub n: f64,
    pub u: f64,
    pub truth: f64,
    pub mse: f64,
    pub bias: f64,
    /// Population variance of the trial errors, so `mse = bias^2 + variance`.
    pub variance: f64,
    /// `sd(e^2) / √trials`; `None` for a single trial.
    pub stderr_mse: Option<f64>,
    pub trials: usize,
}

impl RiskRow {
    fn from_errors(estimator: EstimatorId, g: GridPoint, truth: f64, errors: &[f64]) -> Self {
        let t = errors.len() as f64;
        let bias = compensated_sum(errors.iter().copied()) / t;
        let mse = compensated_sum(errors.iter().map(|e| e * e)) / t;
        let variance = compensated_sum(errors.iter().map(|e| (e - bias) * (e - bias))) / t;
        let stderr_mse = (errors.len() > 1).then(|| {
            let ss = compensated_sum(errors.iter().map(|e| (e * e - mse).powi(2)));
            (ss / (t - 1.0)).sqrt() / t.sqrt()
        });
        Self {
            estimator,
            s: g.s,
            m: g.m,
            n: g.n,
            u: g.u,
            truth,
            mse,
            bias,
            variance,
            stderr_mse,
            trials: errors.len(),
        }
    }

    /// Standard error of the mean estimate.
    pub fn stderr_mean(&self) -> Option<f64> {
        (self.trials > 1).then(|| (self.variance / (self.trials as f64 - 1.0)).sqrt())
    }

    pub fn mean_estimate(&self) -> f64 {
        self.truth + self.bias
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RiskReport {
    pub rows: Vec<RiskRow>,
}

pub const CSV_HEADER: &str = "estimator,S,m,n,u,mse,bias,variance,stderr_mse,trials";

impl RiskReport {
    pub fn row(&self, estimator: EstimatorId, s: usize, m: f64, n: f64) -> Option<&RiskRow> {
        self.rows
            .iter()
            .find(|r| r.estimator == estimator && r.s == s && r.m == m && r.n == n)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let stderr = r.stderr_mse.map_or_else(|| "nan".to_string(), fmt_g12);
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                r.estimator.id(),
                r.s,
                fmt_g12(r.m),
                fmt_g12(r.n),
                fmt_g12(r.u),
                fmt_g12(r.mse),
                fmt_g12(r.bias),
                fmt_g12(r.variance),
                stderr,
                r.trials
            );
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// `%.12g`-style formatting.
pub fn fmt_g12(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}").to_lowercase();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-4..DIGITS).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (DIGITS - 1 - exp) as usize, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

enum Prepared {
    Kl(KlAdaptive),
    Hellinger(HellingerEstimator),
    Chi2(Chi2Estimator),
    KlPlugin,
    HellingerPlugin,
    Chi2Plugin,
}

impl Prepared {
    fn new(id: EstimatorId, g: GridPoint, cfg: EstimatorConfig) -> Result<Self> {
        let (m, n) = (g.m / 3.0, g.n / 3.0);
        Ok(match id {
            EstimatorId::KlAdaptive => Prepared::Kl(KlAdaptive::new(m, n, cfg)?),
            EstimatorId::Hellinger => Prepared::Hellinger(HellingerEstimator::new(m, n, cfg)?),
            EstimatorId::Chi2 => Prepared::Chi2(Chi2Estimator::new(m, n, cfg)?),
            EstimatorId::KlPlugin => Prepared::KlPlugin,
            EstimatorId::HellingerPlugin => Prepared::HellingerPlugin,
            EstimatorId::Chi2Plugin => Prepared::Chi2Plugin,
        })
    }

    fn eval(&self, sp: &SplitSamples, sq: &SplitSamples) -> Result<f64> {
        match self {
            Prepared::Kl(e) => Ok(e.estimate(sp, sq)?.value),
            Prepared::Hellinger(e) => Ok(e.estimate(sp, sq)?.value),
            Prepared::Chi2(e) => Ok(e.estimate(sp, sq)?.value),
            Prepared::KlPlugin => estimate_kl_plugin(&sp.merged(), &sq.merged()),
            Prepared::HellingerPlugin => hellinger_plugin(&sp.merged(), &sq.merged()),
            Prepared::Chi2Plugin => chi2_plugin(&sp.merged(), &sq.merged()),
        }
    }
}

/// Per-trial estimates for one grid point, `result[trial][estimator]`.
///
/// Trial `t` of grid point `g` draws from the stream keyed `(seed, g, t)`,
/// `P` parts first, so results do not depend on scheduling.
pub fn simulate_grid_point(spec: &ExperimentSpec, grid_index: usize) -> Result<Vec<Vec<f64>>> {
    let g = spec.grid[grid_index];
    let pair = spec.fixture.build(g.s, g.u)?;
    let prepared = spec
        .estimators
        .iter()
        .map(|&id| Prepared::new(id, g, spec.cfg))
        .collect::<Result<Vec<_>>>()?;
    (0..spec.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = keyed_rng(spec.seed, [grid_index as u64, t as u64, 0]);
            let sp = sample_split_direct(pair.p(), g.m, &mut rng)?;
            let sq = sample_split_direct(pair.q(), g.n, &mut rng)?;
            prepared.iter().map(|e| e.eval(&sp, &sq)).collect()
        })
        .collect()
}

pub fn run_risk_experiment(spec: &ExperimentSpec) -> Result<RiskReport> {
    spec.validate()?;
    match spec.threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("cannot build thread pool: {e}")))?
            .install(|| assemble_report(spec)),
        None => assemble_report(spec),
    }
}

fn assemble_report(spec: &ExperimentSpec) -> Result<RiskReport> {
    let mut rows = Vec::new();
    for (gi, &g) in spec.grid.iter().enumerate() {
        let pair = spec.fixture.build(g.s, g.u)?;
        let estimates = simulate_grid_point(spec, gi)?;
        for (ei, &id) in spec.estimators.iter().enumerate() {
            let truth = id.divergence().exact(pair.p(), pair.q());
            let errors: Vec<f64> = estimates.iter().map(|row| row[ei] - truth).collect();
            rows.push(RiskRow::from_errors(id, g, truth, &errors));
        }
        log::debug!("grid point {gi} done");
    }
    Ok(RiskReport { rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    S,
    M,
    N,
}

/// Least-squares slope of `ln mse` against `ln axis` over the rows of one
/// estimator, with the coefficient of determination.
pub fn rate_fit(report: &RiskReport, estimator: EstimatorId, axis: Axis) -> Result<(f64, f64)> {
    let rows: Vec<&RiskRow> = report
        .rows
        .iter()
        .filter(|r| r.estimator == estimator)
        .collect();
    if rows.len() < 3 {
        return Err(Error::InsufficientRows(format!(
            "{} has {} rows, need at least 3",
            estimator.id(),
            rows.len()
        )));
    }
    let coord = |r: &RiskRow| match axis {
        Axis::S => r.s as f64,
        Axis::M => r.m,
        Axis::N => r.n,
    };
    if let Some(r) = rows.iter().find(|r| r.mse.is_nan() || r.mse <= 0.0) {
        return Err(Error::InsufficientRows(format!(
            "non-positive mse {} at S={} m={} n={}",
            r.mse, r.s, r.m, r.n
        )));
    }
    let xs: Vec<f64> = rows.iter().map(|r| coord(r).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.mse.ln()).collect();
    let k = xs.len() as f64;
    let mx = compensated_sum(xs.iter().copied()) / k;
    let my = compensated_sum(ys.iter().copied()) / k;
    let sxx = compensated_sum(xs.iter().map(|x| (x - mx) * (x - mx)));
    if sxx == 0.0 {
        return Err(Error::InsufficientRows(
            "rows do not vary along the axis".into(),
        ));
    }
    let sxy = compensated_sum(xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)));
    let slope = sxy / sxx;
    let syy = compensated_sum(ys.iter().map(|y| (y - my) * (y - my)));
    let sres = compensated_sum(xs.iter().zip(&ys).map(|(x, y)| {
        let r = y - my - slope * (x - mx);
        r * r
    }));
    let r2 = if syy <= 1e-300 || sres <= 1e-24 * syy {
        1.0
    } else {
        1.0 - sres / syy
    };
    Ok((slope, r2))
}
