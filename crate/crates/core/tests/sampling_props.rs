mod common;

use common::poisson_pmf;
use divest_core::divergence::Histogram;
use divest_core::harness::Divergence;
use divest_core::sampling::{
    keyed_rng, make_two_point_pair, make_uniform_pair, make_worst_case_pair, poisson_draw,
    sample_poisson_histogram, sample_poisson_histogram_with, split3, split3_with,
    DiscreteDistribution,
};
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

const TRIALS: usize = 100_000;

#[test]
fn poisson_histogram_means() {
    let d = DiscreteDistribution::new(vec![0.5, 0.3, 0.2, 0.0]).unwrap();
    let rate = 50.0;
    let mut rng = keyed_rng(21, [0, 0, 0]);
    let mut sums = [0.0; 4];
    for _ in 0..TRIALS {
        let h = sample_poisson_histogram_with(&d, rate, &mut rng).unwrap();
        assert_eq!(h.counts()[3], 0);
        for (s, &c) in sums.iter_mut().zip(h.counts()) {
            *s += c as f64 / rate;
        }
    }
    for (i, &p) in d.probs().iter().enumerate().take(3) {
        let mean = sums[i] / TRIALS as f64;
        let se = (p / rate / TRIALS as f64).sqrt();
        assert!((mean - p).abs() < 3.0 * se, "symbol {i}: {mean} vs {p}");
    }
}

#[test]
fn poisson_histogram_is_deterministic() {
    let d = DiscreteDistribution::uniform(40).unwrap();
    let a = sample_poisson_histogram(&d, 300.0, 9).unwrap();
    assert_eq!(a, sample_poisson_histogram(&d, 300.0, 9).unwrap());
    assert_ne!(a, sample_poisson_histogram(&d, 300.0, 10).unwrap());
    assert!(sample_poisson_histogram(&d, 0.5, 9).is_err());
}

#[test]
fn split_of_zero_histogram() {
    let h = Histogram::new(vec![0; 7], 90.0).unwrap();
    let s = split3(&h, 1).unwrap();
    assert!(s.parts().iter().all(|p| p.total() == 0));
    assert_eq!(s.rate(), 30.0);
}

proptest! {
    #[test]
    fn split_parts_sum_to_input(counts in prop::collection::vec(0u64..500, 1..40), seed in any::<u64>()) {
        let h = Histogram::new(counts.clone(), 600.0).unwrap();
        let s = split3(&h, seed).unwrap();
        for (i, &c) in counts.iter().enumerate() {
            prop_assert_eq!(s.part(0).counts()[i] + s.part(1).counts()[i] + s.part(2).counts()[i], c);
        }
        let merged = s.merged();
        prop_assert_eq!(merged.counts(), &counts[..]);
        prop_assert_eq!(s, split3(&h, seed).unwrap());
    }
}

/// Pearson statistic of `observed` against `pmf`, pooling adjacent cells until
/// every expected count reaches 5. Returns the upper tail probability.
fn poisson_gof(observed: &[u64], lambda: f64, trials: usize) -> f64 {
    let pmf = poisson_pmf(lambda);
    let len = pmf.len().max(observed.len());
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut e, mut o) = (0.0, 0.0);
    for k in 0..len {
        e += pmf.get(k).copied().unwrap_or(0.0) * trials as f64;
        o += observed.get(k).copied().unwrap_or(0) as f64;
        if e >= 5.0 {
            cells.push((o, e));
            e = 0.0;
            o = 0.0;
        }
    }
    if let Some(last) = cells.last_mut() {
        last.0 += o;
        last.1 += e;
    }
    let stat: f64 = cells.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let df = (cells.len() - 1) as f64;
    1.0 - ChiSquared::new(df).unwrap().cdf(stat)
}

#[test]
fn split_parts_are_poisson() {
    let rates = [0.3, 1.0, 2.5, 4.0, 7.5, 12.0, 20.0, 33.0, 60.0, 150.0];
    for (case, &lambda) in rates.iter().enumerate() {
        let mut rng = keyed_rng(77, [case as u64, 0, 0]);
        let mut hist = [Vec::new(), Vec::new(), Vec::new()];
        for _ in 0..TRIALS {
            let h = Histogram::new(vec![poisson_draw(lambda, &mut rng)], 3.0).unwrap();
            let s = split3_with(&h, &mut rng).unwrap();
            for (j, hj) in hist.iter_mut().enumerate() {
                let c = s.part(j).counts()[0] as usize;
                if hj.len() <= c {
                    hj.resize(c + 1, 0u64);
                }
                hj[c] += 1;
            }
        }
        for (j, hj) in hist.iter().enumerate() {
            let mean = hj
                .iter()
                .enumerate()
                .map(|(k, &c)| (k as u64 * c) as f64)
                .sum::<f64>()
                / TRIALS as f64;
            let se = (lambda / 3.0 / TRIALS as f64).sqrt();
            assert!(
                (mean - lambda / 3.0).abs() < 3.0 * se,
                "lambda={lambda} part {j}: mean {mean}"
            );
        }
        let pval = poisson_gof(&hist[0], lambda / 3.0, TRIALS);
        assert!(pval > 0.001, "lambda={lambda}: p-value {pval}");
    }
}

#[test]
fn worst_case_pair() {
    let pair = make_worst_case_pair(2, 2.0).unwrap();
    assert_eq!(pair.p().probs(), &[0.5, 0.5]);
    assert_eq!(pair.q().probs(), &[0.25, 0.75]);
    assert_eq!(pair.max_ratio(), 2.0);

    let pair = make_worst_case_pair(4, 4.0).unwrap();
    let want = [1.0 / 16.0, 1.0 / 16.0, 1.0 / 16.0, 13.0 / 16.0];
    for (a, b) in pair.q().probs().iter().zip(want) {
        assert!((a - b).abs() < 1e-15);
    }

    for &(s, u) in &[(10usize, 1.5), (1000, 3.0), (37, 20.0)] {
        let pair = make_worst_case_pair(s, u).unwrap();
        let (p, q) = (pair.p().probs(), pair.q().probs());
        for i in 0..s - 1 {
            assert!((p[i] / q[i] - u).abs() <= 4.0 * f64::EPSILON * u);
        }
        assert!(p[s - 1] / q[s - 1] <= 1.0);
    }
    assert!(make_worst_case_pair(1, 2.0).is_err());
    assert!(make_worst_case_pair(5, 1.0).is_err());
}

#[test]
fn two_point_pairs() {
    let (one, zero) = make_two_point_pair(5, 4.0, 0.3).unwrap();
    for pair in [&one, &zero] {
        assert!(pair.max_ratio() <= 4.0);
    }
    let gap =
        (Divergence::Kl.exact(one.p(), one.q()) - Divergence::Kl.exact(zero.p(), zero.q())).abs();
    assert!(gap >= 0.3 * 0.3 / 4.0, "gap {gap}");
    assert!((gap - 0.023_578).abs() < 1e-6);

    let (one, zero) = make_two_point_pair(7, 3.0, 1e-300).unwrap();
    assert_eq!(one.q(), zero.q());

    assert!(make_two_point_pair(4, 4.0, 0.3).is_err());
    assert!(make_two_point_pair(5, 4.0, 0.5).is_err());
}

#[test]
fn uniform_pair_has_zero_divergences() {
    let pair = make_uniform_pair(25).unwrap();
    for div in [Divergence::Kl, Divergence::Hellinger, Divergence::Chi2] {
        assert!(div.exact(pair.p(), pair.q()).abs() < 1e-15);
    }
}

#[test]
fn distribution_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.txt");
    let d = DiscreteDistribution::new(vec![0.1, 0.0, 0.7, 0.2]).unwrap();
    d.write(&path).unwrap();
    assert_eq!(DiscreteDistribution::read(&path).unwrap(), d);

    std::fs::write(&path, "# heading\n0 0.25\n2 0.75\n").unwrap();
    assert_eq!(
        DiscreteDistribution::read(&path).unwrap().probs(),
        &[0.25, 0.0, 0.75]
    );
    std::fs::write(&path, "0 0.5\n1 0.4\n").unwrap();
    assert!(DiscreteDistribution::read(&path).is_err());
}
