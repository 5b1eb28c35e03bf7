//! Small sample statistics used by the diagnostics.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSe {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

/// Sample mean and its standard error (`NaN` error for fewer than 2 values).
pub fn mean_se(xs: &[f64]) -> MeanSe {
    let n = xs.len();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let std_error = if n < 2 {
        f64::NAN
    } else {
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    };
    MeanSe { mean, std_error, n }
}

/// Two-sample z-score for independent estimates. Estimates equal to
/// rounding error score zero.
pub fn z_score(a: f64, se_a: f64, b: f64, se_b: f64) -> f64 {
    let se = (se_a * se_a + se_b * se_b).sqrt();
    if (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0) {
        return 0.0;
    }
    if se == 0.0 {
        f64::INFINITY
    } else {
        (a - b) / se
    }
}

/// Hill estimate of the tail index from the values above `threshold`,
/// together with the number of exceedances.
pub fn hill_estimator(xs: &[f64], threshold: f64) -> (f64, usize) {
    let logs: Vec<f64> = xs
        .iter()
        .filter(|&&x| x > threshold)
        .map(|x| (x / threshold).ln())
        .collect();
    let k = logs.len();
    (k as f64 / logs.iter().sum::<f64>(), k)
}

/// Survival function of the Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample Kolmogorov-Smirnov statistic and asymptotic p-value
/// against the continuous CDF `cdf`.
pub fn ks_test<F: Fn(f64) -> f64>(xs: &[f64], cdf: F) -> (f64, f64) {
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len() as f64;
    let mut stat: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        stat = stat.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    let root = n.sqrt();
    let p = kolmogorov_survival((root + 0.12 + 0.11 / root) * stat);
    (stat, p)
}

/// Two-sided sign test of a zero median (normal approximation with
/// continuity correction); zeros are dropped.
pub fn sign_test(xs: &[f64]) -> f64 {
    let pos = xs.iter().filter(|&&x| x > 0.0).count() as f64;
    let n = xs.iter().filter(|&&x| x != 0.0).count() as f64;
    if n == 0.0 {
        return 1.0;
    }
    let z = ((pos - 0.5 * n).abs() - 0.5).max(0.0) / (0.25 * n).sqrt();
    libm::erfc(z / std::f64::consts::SQRT_2)
}

/// Least-squares slope of `y = b t` with its standard error.
pub fn slope_through_origin(ts: &[f64], ys: &[f64]) -> (f64, f64) {
    let stt: f64 = ts.iter().map(|t| t * t).sum();
    let b = ts.iter().zip(ys).map(|(t, y)| t * y).sum::<f64>() / stt;
    let m = ts.len();
    if m < 2 {
        return (b, f64::NAN);
    }
    let rss: f64 = ts.iter().zip(ys).map(|(t, y)| (y - b * t).powi(2)).sum();
    (b, (rss / (m - 1) as f64 / stt).sqrt())
}
