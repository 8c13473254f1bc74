//! Compensated summation and order-statistic helpers.
//!
//! All aggregation is sequential over index-ordered slices, so summary
//! statistics are identical for any worker count.

/// Kahan–Babuška (Neumaier) compensated sum.
pub(crate) fn kahan_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    kahan_sum(values.iter().copied()) / values.len() as f64
}

/// Unbiased sample variance (two-pass, compensated).
pub(crate) fn sample_variance(values: &[f64], mean: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let ss = kahan_sum(values.iter().map(|v| {
        let d = v - mean;
        d * d
    }));
    ss / (values.len() - 1) as f64
}

/// Mean and standard error of the mean.
pub(crate) fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let m = mean(values);
    let var = sample_variance(values, m);
    (m, (var / values.len() as f64).sqrt())
}

/// Lower median of a sorted slice: element `(len − 1) / 2`.
pub(crate) fn lower_median(sorted: &[f64]) -> f64 {
    sorted[(sorted.len() - 1) / 2]
}

/// Lower empirical quantile: smallest k with `(k+1)/len ≥ p`.
pub(crate) fn quantile(sorted: &[f64], p: f64) -> f64 {
    let len = sorted.len();
    let k = ((p * len as f64).ceil() as usize).saturating_sub(1).min(len - 1);
    sorted[k]
}
