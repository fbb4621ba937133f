//! Distribution tests and small regression helpers used by the samplers'
//! checks, the CLI `sample` subcommand and the rate harness.

use std::cmp::Ordering;

use statrs::function::erf::erfc;

use crate::error::{invalid, Result};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    v
}

/// One-sample Kolmogorov-Smirnov statistic `sup |F_n - F|`.
pub fn ks_statistic<F: Fn(f64) -> f64>(xs: &[f64], cdf: F) -> f64 {
    let v = sorted(xs);
    let n = v.len() as f64;
    v.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    })
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> f64 {
    let a = sorted(xs);
    let b = sorted(ys);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Asymptotic critical value `c(level)` of the Kolmogorov distribution.
pub fn ks_critical(level: f64) -> f64 {
    (-(0.5 * level).ln() / 2.0).sqrt()
}

/// One-sample test at significance `level`.
pub fn ks_passes(statistic: f64, n: usize, level: f64) -> bool {
    statistic < ks_critical(level) / (n as f64).sqrt()
}

/// Two-sample test at significance `level`.
pub fn ks_two_sample_passes(xs: &[f64], ys: &[f64], level: f64) -> bool {
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    ks_two_sample(xs, ys) < ks_critical(level) * ((n + m) / (n * m)).sqrt()
}

/// Hill estimate of the tail index from the `k` largest values of a
/// positive sample.
pub fn hill_estimator(xs: &[f64], k: usize) -> Result<f64> {
    if k == 0 || k >= xs.len() {
        return invalid(format!(
            "Hill estimator needs 0 < k < n, got k = {k}, n = {}",
            xs.len()
        ));
    }
    let mut v = xs.to_vec();
    let pivot = v.len() - k - 1;
    v.select_nth_unstable_by(pivot, |a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let threshold = v[pivot];
    if !(threshold > 0.0) {
        return invalid("Hill estimator requires positive order statistics");
    }
    let h = v[pivot + 1..]
        .iter()
        .map(|x| (x / threshold).ln())
        .sum::<f64>()
        / k as f64;
    Ok(1.0 / h)
}

/// CDF of the standard Cauchy law.
pub fn cauchy_cdf(x: f64) -> f64 {
    0.5 + x.atan() / std::f64::consts::PI
}

/// CDF of the centred Gaussian with variance 2, the `alpha = 2` member of the
/// `exp(-|xi|^alpha)` family.
pub fn gauss2_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / 2.0)
}

/// CDF of the positive 1/2-stable law with Laplace transform `exp(-sqrt(lambda))`.
pub fn levy_half_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        erfc(1.0 / (2.0 * x.sqrt()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares of `y` on `x`.
pub fn ols(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() || x.len() < 2 {
        return invalid("least squares needs at least two paired points");
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    if sxx == 0.0 {
        return invalid("least squares needs distinct abscissae");
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}
