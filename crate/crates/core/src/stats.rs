//! Statistical machinery turning Monte Carlo samples into pass/fail
//! verdicts: empirical CDF distances, DKW bounds, mean confidence
//! intervals, and Poisson count checks.
//!
//! Thresholds are sized with the non-asymptotic DKW inequality
//! `P(sup |F_n - F| > eps) <= 2 exp(-2 n eps^2)` rather than asymptotic
//! Kolmogorov quantiles: valid at every sample size and simple to audit.
//! Where a test compares discretized simulation output against a
//! continuum law, an explicit per-test discretization allowance is added
//! on top of the DKW term by the caller.

use serde::Serialize;

use crate::error::{Error, Result};

/// Outcome of one statistical check. `passed` holds exactly when
/// `statistic <= threshold`; the constructor enforces it.
#[derive(Debug, Clone, Serialize)]
pub struct TestVerdict {
    pub description: String,
    pub statistic: f64,
    pub threshold: f64,
    pub n: usize,
    pub passed: bool,
}

impl TestVerdict {
    pub fn new(description: impl Into<String>, statistic: f64, threshold: f64, n: usize) -> Self {
        TestVerdict {
            description: description.into(),
            statistic,
            threshold,
            n,
            passed: statistic <= threshold,
        }
    }

    /// One-line report, e.g. for the `verify` subcommand.
    pub fn render(&self) -> String {
        format!(
            "{}  {} (statistic={:.6}, threshold={:.6}, n={})",
            if self.passed { "PASS" } else { "FAIL" },
            self.description,
            self.statistic,
            self.threshold,
            self.n
        )
    }
}

/// Two-sided Kolmogorov-Smirnov distance between a sorted sample and a
/// reference CDF: `sup_i max(|i/n - F(x_i)|, |(i-1)/n - F(x_i)|)`.
///
/// The sample must be sorted ascending; passing an unsorted slice is a
/// contract violation (checked cheaply in debug builds only).
pub fn ks_statistic<F: Fn(f64) -> f64>(sorted_sample: &[f64], cdf: F) -> Result<f64> {
    let n = sorted_sample.len();
    if n == 0 {
        return Err(Error::contract("ks_statistic requires a nonempty sample"));
    }
    debug_assert!(
        sorted_sample.windows(2).all(|w| w[0] <= w[1]),
        "ks_statistic requires a sorted sample"
    );
    let nf = n as f64;
    let mut sup = 0.0_f64;
    for (i, &x) in sorted_sample.iter().enumerate() {
        let f = cdf(x);
        let hi = ((i + 1) as f64 / nf - f).abs();
        let lo = (i as f64 / nf - f).abs();
        sup = sup.max(hi).max(lo);
    }
    Ok(sup)
}

/// Two-sample Kolmogorov-Smirnov distance `sup_x |F_a(x) - F_b(x)|`.
/// Handles ties by evaluating the gap only after all points equal to the
/// current value have been consumed from both samples.
pub fn ks_two_sample(sorted_a: &[f64], sorted_b: &[f64]) -> Result<f64> {
    if sorted_a.is_empty() || sorted_b.is_empty() {
        return Err(Error::contract("ks_two_sample requires nonempty samples"));
    }
    debug_assert!(sorted_a.windows(2).all(|w| w[0] <= w[1]));
    debug_assert!(sorted_b.windows(2).all(|w| w[0] <= w[1]));
    let (na, nb) = (sorted_a.len() as f64, sorted_b.len() as f64);
    let (mut ia, mut ib) = (0usize, 0usize);
    let mut sup = 0.0_f64;
    while ia < sorted_a.len() && ib < sorted_b.len() {
        let v = sorted_a[ia].min(sorted_b[ib]);
        while ia < sorted_a.len() && sorted_a[ia] <= v {
            ia += 1;
        }
        while ib < sorted_b.len() && sorted_b[ib] <= v {
            ib += 1;
        }
        sup = sup.max((ia as f64 / na - ib as f64 / nb).abs());
    }
    Ok(sup)
}

/// DKW epsilon: with probability at least `1 - delta`, the empirical CDF of
/// `n` iid draws stays within `sqrt(ln(2/delta) / (2n))` of the truth.
pub fn dkw_epsilon(n: usize, delta: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::contract("dkw_epsilon requires n >= 1"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::contract(format!("delta must be in (0,1), got {delta}")));
    }
    Ok(((2.0 / delta).ln() / (2.0 * n as f64)).sqrt())
}

/// Distribution-free two-sample KS threshold at level `alpha`:
/// `sqrt(ln(2/alpha)/2) * sqrt((n + m) / (n m))`.
pub fn two_sample_threshold(n: usize, m: usize, alpha: f64) -> Result<f64> {
    if n == 0 || m == 0 {
        return Err(Error::contract("two_sample_threshold requires n, m >= 1"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::contract(format!("alpha must be in (0,1), got {alpha}")));
    }
    let c = ((2.0 / alpha).ln() / 2.0).sqrt();
    Ok(c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt())
}

/// Sample mean and `z`-scaled standard error. Requires `n >= 2`.
pub fn mean_ci(sample: &[f64], z: f64) -> Result<(f64, f64)> {
    let (mean, var) = mean_and_variance(sample)?;
    let halfwidth = z * (var / sample.len() as f64).sqrt();
    Ok((mean, halfwidth))
}

/// Sample mean and unbiased (n-1) variance. Requires `n >= 2`.
pub fn mean_and_variance(sample: &[f64]) -> Result<(f64, f64)> {
    let n = sample.len();
    if n < 2 {
        return Err(Error::contract("mean_and_variance requires n >= 2"));
    }
    let mean = sample.iter().sum::<f64>() / n as f64;
    let ss = sample.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
    Ok((mean, ss / (n - 1) as f64))
}

/// Pearson correlation of paired samples. Requires equal lengths `>= 2`
/// and nonzero variances.
pub fn correlation(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::contract("correlation requires equal-length samples"));
    }
    let n = xs.len();
    if n < 2 {
        return Err(Error::contract("correlation requires n >= 2"));
    }
    let (mx, vx) = mean_and_variance(xs)?;
    let (my, vy) = mean_and_variance(ys)?;
    if vx == 0.0 || vy == 0.0 {
        return Err(Error::contract("correlation undefined for constant samples"));
    }
    let cov = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / (n - 1) as f64;
    Ok(cov / (vx * vy).sqrt())
}

/// Check that empirical Poisson counts match intensity `lambda`:
/// passes iff `|mean(counts) - lambda| <= z sqrt(lambda/n) + allowance * lambda`.
pub fn poisson_mean_check(
    description: impl Into<String>,
    counts: &[u64],
    lambda: f64,
    z: f64,
    allowance: f64,
) -> Result<TestVerdict> {
    if counts.is_empty() {
        return Err(Error::contract("poisson_mean_check requires nonempty counts"));
    }
    let n = counts.len();
    let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / n as f64;
    let threshold = z * (lambda / n as f64).sqrt() + allowance * lambda;
    Ok(TestVerdict::new(description, (mean - lambda).abs(), threshold, n))
}
