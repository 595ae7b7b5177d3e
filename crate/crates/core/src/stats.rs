//! Sample summaries and the Kolmogorov–Smirnov distance to N(0, 1).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Complementary error function.
///
/// Chebyshev-fitted exponential form (Numerical Recipes `erfcc`); the
/// fractional error is below 1.2e-7 for every real argument.
pub fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let poly = -z * z - 1.265_512_23
        + t * (1.000_023_68
            + t * (0.374_091_96
                + t * (0.096_784_18
                    + t * (-0.186_288_06
                        + t * (0.278_868_07
                            + t * (-1.135_203_98 + t * (1.488_515_87 + t * (-0.822_152_23 + t * 0.170_872_77))))))));
    let ans = t * poly.exp();
    if x >= 0.0 {
        ans
    } else {
        2.0 - ans
    }
}

/// Standard normal CDF with absolute error at most 6e-8.
///
/// Evaluated from the tail that keeps `erfc` below 1, so the relative bound
/// on `erfc` turns into an absolute one.
pub fn normal_cdf(x: f64) -> f64 {
    let t = erfc(x.abs() * std::f64::consts::FRAC_1_SQRT_2);
    if x >= 0.0 {
        1.0 - 0.5 * t
    } else {
        0.5 * t
    }
}

/// `sup_x |F_n(x) - Phi(x)|` for the empirical CDF `F_n` of `samples`.
pub fn ks_distance_normal(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    Ok(xs.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let phi = normal_cdf(x);
        d.max((i as f64 + 1.0) / n - phi).max(phi - i as f64 / n)
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    /// Unbiased; absent below two samples.
    pub variance: Option<f64>,
    pub skewness: Option<f64>,
    pub excess_kurtosis: Option<f64>,
    pub ks_distance: f64,
}

/// Skewness and excess kurtosis use the plain moment ratios
/// `m3 / m2^1.5` and `m4 / m2^2 - 3` of the central sample moments.
pub fn summary_stats(samples: &[f64]) -> Result<Summary> {
    let ks_distance = ks_distance_normal(samples)?;
    let count = samples.len();
    let n = count as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in samples {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let variance = (count >= 2).then(|| m2 / (n - 1.0));
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
    let shape_ok = count >= 2 && m2 > 0.0;
    Ok(Summary {
        count,
        mean,
        variance,
        skewness: shape_ok.then(|| m3 / m2.powf(1.5)),
        excess_kurtosis: shape_ok.then(|| m4 / (m2 * m2) - 3.0),
        ks_distance,
    })
}

/// Median of a non-empty slice (mean of the middle pair for even length).
pub fn median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Ok(if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    })
}
