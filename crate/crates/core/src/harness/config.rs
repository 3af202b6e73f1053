use std::path::Path;

use super::{EstimatorId, ExperimentSpec, FixtureSpec, GridPoint};
use crate::divergence::EstimatorConfig;
use crate::error::{Error, Result};

/// Parses `key = value` lines (`#` comments) into an [`ExperimentSpec`].
///
/// ```text
/// fixture = worst_case        # uniform | worst_case | two_point_q1 | two_point_q0
/// eps = 0.3                   # two-point perturbation
/// estimators = kl_adaptive, kl_plugin
/// grid = 1000,2000,2000,3; 500,2000,2000,3   # S,m,n,u per point
/// trials = 200
/// seed = 1
/// c1 = 1.0
/// c2 = 1.6
/// truncate = 1.0
/// min_degree = 2
/// average_p = false
/// threads = 4
/// ```
pub fn parse_spec(text: &str, path: &Path) -> Result<ExperimentSpec> {
    let mut fixture = None;
    let mut eps = 0.3;
    let mut estimators = None;
    let mut grid = None;
    let mut trials = 100;
    let mut seed = 0;
    let mut threads = None;
    let mut cfg = EstimatorConfig::default();

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let lineno = lineno + 1;
        let bad = |msg: String| Error::parse(path, lineno, msg);
        let Some((key, value)) = line.split_once('=') else {
            return Err(bad(format!("expected `key = value`, got `{line}`")));
        };
        let (key, value) = (key.trim(), value.trim());
        fn num<T: std::str::FromStr>(value: &str, key: &str) -> std::result::Result<T, String> {
            value
                .parse()
                .map_err(|_| format!("bad value `{value}` for `{key}`"))
        }
        match key {
            "fixture" => fixture = Some(value.to_string()),
            "eps" => eps = num(value, key).map_err(bad)?,
            "estimators" => {
                estimators = Some(
                    value
                        .split(',')
                        .map(|s| EstimatorId::parse(s.trim()))
                        .collect::<Result<Vec<_>>>()?,
                )
            }
            "grid" => {
                let points = value
                    .split(';')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|point| {
                        let f: Vec<&str> = point.split(',').map(str::trim).collect();
                        if f.len() != 4 {
                            return Err(format!("grid point `{point}` needs S,m,n,u"));
                        }
                        Ok(GridPoint {
                            s: num(f[0], "S")?,
                            m: num(f[1], "m")?,
                            n: num(f[2], "n")?,
                            u: num(f[3], "u")?,
                        })
                    })
                    .collect::<std::result::Result<Vec<_>, String>>()
                    .map_err(bad)?;
                grid = Some(points);
            }
            "trials" => trials = num(value, key).map_err(bad)?,
            "seed" => seed = num(value, key).map_err(bad)?,
            "threads" => threads = Some(num(value, key).map_err(bad)?),
            "c1" => cfg.c1 = num(value, key).map_err(bad)?,
            "c2" => cfg.c2 = num(value, key).map_err(bad)?,
            "truncate" => cfg.truncate = num(value, key).map_err(bad)?,
            "min_degree" => cfg.min_degree = num(value, key).map_err(bad)?,
            "average_p" => cfg.average_p = num(value, key).map_err(bad)?,
            other => return Err(bad(format!("unknown key `{other}`"))),
        }
    }

    let fixture = FixtureSpec::parse(
        &fixture.ok_or_else(|| Error::InvalidConfig("missing `fixture`".into()))?,
        eps,
    )?;
    let spec = ExperimentSpec {
        fixture,
        estimators: estimators
            .ok_or_else(|| Error::InvalidConfig("missing `estimators`".into()))?,
        grid: grid.ok_or_else(|| Error::InvalidConfig("missing `grid`".into()))?,
        trials,
        seed,
        cfg,
        threads,
    };
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentSpec> {
        parse_spec(text, Path::new("spec.txt"))
    }

    #[test]
    fn full_spec() {
        let spec = parse(
            "# demo\nfixture = two_point_q0\neps = 0.2\nestimators = kl_adaptive, chi2_plugin\n\
             grid = 5,300,300,4; 7,600,900,4\ntrials = 3\nseed = 11\nc2 = 1.2\nthreads = 2\n",
        )
        .unwrap();
        assert_eq!(spec.fixture, FixtureSpec::TwoPointQ0 { eps: 0.2 });
        assert_eq!(
            spec.estimators,
            vec![EstimatorId::KlAdaptive, EstimatorId::Chi2Plugin]
        );
        assert_eq!(spec.grid.len(), 2);
        assert_eq!(spec.grid[1].n, 900.0);
        assert_eq!((spec.trials, spec.seed, spec.threads), (3, 11, Some(2)));
        assert_eq!(spec.cfg.c2, 1.2);
        assert_eq!(spec.cfg.c1, 1.0);
    }

    #[test]
    fn errors() {
        let base = "fixture = uniform\nestimators = kl_plugin\ngrid = 5,10,10,1\n";
        assert!(parse(base).is_ok());
        assert!(matches!(
            parse(&format!("{base}bogus = 1\n")),
            Err(Error::Parse { line: 4, .. })
        ));
        assert!(matches!(
            parse(&format!("{base}trials = x\n")),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse(&format!("{base}trials = 0\n")),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            parse("fixture = nope\nestimators = kl_plugin\ngrid = 5,10,10,1\n"),
            Err(Error::UnknownFixture(_))
        ));
        assert!(matches!(
            parse("fixture = uniform\nestimators = kl, x\ngrid = 5,10,10,1\n"),
            Err(Error::UnknownEstimator(_))
        ));
        assert!(matches!(
            parse("fixture = uniform\nestimators = kl_plugin\n"),
            Err(Error::InvalidConfig(_))
        ));
        assert!(parse("fixture = uniform\nestimators = kl_plugin\ngrid = 5,10,10\n").is_err());
    }
}
