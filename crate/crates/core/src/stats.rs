//! Sample moments and quantiles used by the Monte Carlo harness.

use alloc::vec::Vec;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance (divisor `n - 1`).
pub fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

fn central_moment(xs: &[f64], m: f64, k: i32) -> f64 {
    xs.iter().map(|x| libm::pow(x - m, f64::from(k))).sum::<f64>() / xs.len() as f64
}

/// Moment skewness `m3 / m2^{3/2}`.
pub fn skewness(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let m2 = central_moment(xs, m, 2);
    central_moment(xs, m, 3) / libm::pow(m2, 1.5)
}

/// Excess kurtosis `m4 / m2² - 3`.
pub fn excess_kurtosis(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let m2 = central_moment(xs, m, 2);
    central_moment(xs, m, 4) / (m2 * m2) - 3.0
}

/// Linear-interpolation quantile of an ascending sample.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = libm::floor(pos) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Bowley quartile skewness `(Q3 + Q1 - 2 Q2) / (Q3 - Q1)`; moment-free.
pub fn quartile_skewness(xs: &[f64]) -> f64 {
    let mut sorted: Vec<f64> = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&sorted, 0.25);
    let q2 = quantile_sorted(&sorted, 0.5);
    let q3 = quantile_sorted(&sorted, 0.75);
    (q3 + q1 - 2.0 * q2) / (q3 - q1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_of_small_sample() {
        let xs = [1.0, 2.0, 3.0, 4.0, 10.0];
        assert_eq!(mean(&xs), 4.0);
        assert!((sample_variance(&xs) - 12.5).abs() < 1e-12);
        // m2 = 10, m3 = 36, m4 = 0.2 (81 + 16 + 1 + 0 + 1296) = 278.8
        assert!((skewness(&xs) - 36.0 / libm::pow(10.0, 1.5)).abs() < 1e-12);
        assert!((excess_kurtosis(&xs) - (2.788 - 3.0)).abs() < 1e-12);
    }

    #[test]
    fn quantiles_interpolate() {
        let s = [0.0, 1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&s, 0.0), 0.0);
        assert_eq!(quantile_sorted(&s, 0.5), 2.0);
        assert_eq!(quantile_sorted(&s, 0.625), 2.5);
        assert_eq!(quantile_sorted(&s, 1.0), 4.0);
    }

    #[test]
    fn skew_measures_agree_on_sign_for_skewed_samples() {
        // Exponential-like quantiles: right skewed.
        let right: Vec<f64> = (1..200).map(|i| -libm::log(1.0 - i as f64 / 200.0)).collect();
        assert!(skewness(&right) > 0.0 && quartile_skewness(&right) > 0.0);
        let left: Vec<f64> = right.iter().map(|x| -x).collect();
        assert!(skewness(&left) < 0.0 && quartile_skewness(&left) < 0.0);
    }
}
