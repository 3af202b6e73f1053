use crate::numeric::CompensatedSum;

/// `B_n[f](x) = Σ_i C(n, i) x^i (1 - x)^(n - i) f(i / n)`.
///
/// Weights are built by ratio recurrence outward from the mode of the
/// binomial pmf (so `n` in the tens of thousands neither overflows nor
/// underflows where it matters) and normalized by their sum.
pub fn bernstein_apply<F: Fn(f64) -> f64>(f: F, n: usize, x: f64) -> f64 {
    assert!(n >= 1, "Bernstein operator needs n >= 1");
    assert!(
        (0.0..=1.0).contains(&x),
        "Bernstein operator is defined on [0, 1]"
    );
    if x == 0.0 {
        return f(0.0);
    }
    if x == 1.0 {
        return f(1.0);
    }
    let nf = n as f64;
    let odds = x / (1.0 - x);
    let mode = ((nf + 1.0) * x).floor().min(nf) as usize;

    let mut weights = vec![0.0; n + 1];
    weights[mode] = 1.0;
    // w_i / w_{i-1} = (n - i + 1) / i * x / (1 - x)
    for i in mode + 1..=n {
        let w = weights[i - 1] * (nf - i as f64 + 1.0) / i as f64 * odds;
        if w < 1e-300 {
            break;
        }
        weights[i] = w;
    }
    for i in (0..mode).rev() {
        let w = weights[i + 1] * (i as f64 + 1.0) / (nf - i as f64) / odds;
        if w < 1e-300 {
            break;
        }
        weights[i] = w;
    }

    let mut total = CompensatedSum::new();
    let mut acc = CompensatedSum::new();
    for (i, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        total.add(w);
        acc.add_product(w, f(i as f64 / nf));
    }
    acc.value() / total.value()
}

/// `ln x` on `[1/n, 1]`, continued below `1/n` by its quartic Taylor
/// polynomial at `1/n`. The result is `C^4` on `[0, 1]` and coincides with
/// `ln(max(x, 1/n))` except at 0.
pub fn lattice_log_patch(n: usize, x: f64) -> f64 {
    let nf = n as f64;
    if x >= 1.0 / nf {
        return x.ln();
    }
    let d = nf * (x - 1.0 / nf);
    -nf.ln() + d - d * d / 2.0 + d * d * d / 3.0 - d * d * d * d / 4.0
}
