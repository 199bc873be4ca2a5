/// `log Σ exp(xs)` with the maximum shifted out; `-inf` for an empty slice
/// or when every entry is `-inf`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    if m == f64::INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// `log((1/N) Σ exp(xs))`.
pub fn log_mean_exp(xs: &[f64]) -> f64 {
    log_sum_exp(xs) - (xs.len() as f64).ln()
}

/// Estimate of the log normalizing constant from the weight increments
/// recorded at each resampling point (rows) for each particle (columns):
/// `Σ_t (log Σ_i exp(w_t^i) − log N)`. Zero when there were no resampling
/// points.
pub fn log_normalizer(per_step_log_weights: &[Vec<f64>]) -> f64 {
    per_step_log_weights.iter().map(|row| log_mean_exp(row)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_sum_exp_is_stable() {
        assert_eq!(log_sum_exp(&[1000.0, 1000.0]), 1000.0 + 2f64.ln());
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY, 0.0]), 0.0);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY; 3]), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }

    #[test]
    fn normalizer_examples() {
        let l2 = 2f64.ln();
        assert!((log_normalizer(&[vec![l2; 5]]) - l2).abs() < 1e-15);
        assert_eq!(log_normalizer(&[vec![0.0; 3], vec![0.0; 3]]), 0.0);
        assert_eq!(log_normalizer(&[]), 0.0);
    }
}
