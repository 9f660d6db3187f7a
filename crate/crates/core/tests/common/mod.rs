//! Helpers shared by the integration suites.
#![allow(dead_code)] // not every suite uses every helper

/// Two-sided Kolmogorov-Smirnov statistic of `samples` against the uniform
/// distribution on [0, 1].
pub fn ks_statistic(samples: &mut [f64]) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let mut d = 0.0_f64;
    for (i, &u) in samples.iter().enumerate() {
        let above = (i as f64 + 1.0) / n - u;
        let below = u - i as f64 / n;
        d = d.max(above).max(below);
    }
    d
}

/// Asymptotic two-sided KS critical value at significance `alpha`.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![lo];
    }
    let h = (hi - lo) / (steps - 1) as f64;
    (0..steps).map(|i| lo + h * i as f64).collect()
}
