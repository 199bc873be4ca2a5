use rand::Rng as _;

use super::InferenceError;
use crate::runtime::RngStream;

/// Systematic resampling: one uniform `u` from `stream`, then ancestors at
/// the positions `(u + k) / n` of the cumulative normalized weights.
pub fn systematic_resample(
    log_weights: &[f64],
    stream: RngStream,
) -> Result<Vec<usize>, InferenceError> {
    let u: f64 = stream.rng().random();
    systematic_ancestors(log_weights, u)
}

/// Systematic resampling for a given offset `u ∈ [0, 1)`. Returns `n`
/// nondecreasing ancestor indices; particles with zero weight are never
/// chosen.
pub fn systematic_ancestors(log_weights: &[f64], u: f64) -> Result<Vec<usize>, InferenceError> {
    let n = log_weights.len();
    if n == 0 {
        return Err(InferenceError::NoParticles);
    }
    let total = super::log_sum_exp(log_weights);
    if total == f64::NEG_INFINITY {
        return Err(InferenceError::AllZeroLikelihood);
    }
    let normalized: Vec<f64> = if total == f64::INFINITY {
        // Treat infinite weights as equal and everything else as zero.
        let inf = log_weights.iter().filter(|w| **w == f64::INFINITY).count() as f64;
        log_weights
            .iter()
            .map(|w| if *w == f64::INFINITY { 1.0 / inf } else { 0.0 })
            .collect()
    } else {
        log_weights.iter().map(|w| (w - total).exp()).collect()
    };
    let last = normalized.iter().rposition(|w| *w > 0.0).expect("some weight is positive");

    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    let mut cum = normalized[0];
    for k in 0..n {
        let pos = (u + k as f64) / n as f64;
        while i < last && pos >= cum {
            i += 1;
            cum += normalized[i];
        }
        out.push(i);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_weights_keep_everyone() {
        for u in [0.0, 0.3, 0.999] {
            assert_eq!(systematic_ancestors(&[0.0; 4], u).unwrap(), vec![0, 1, 2, 3]);
        }
    }

    #[test]
    fn zero_weights_are_never_chosen() {
        for u in [0.0, 0.5, 0.99] {
            assert_eq!(
                systematic_ancestors(&[f64::NEG_INFINITY, 0.0], u).unwrap(),
                vec![1, 1]
            );
            assert_eq!(
                systematic_ancestors(&[0.0, f64::NEG_INFINITY], u).unwrap(),
                vec![0, 0]
            );
        }
    }

    #[test]
    fn all_zero_is_an_error() {
        let e = systematic_ancestors(&[f64::NEG_INFINITY; 3], 0.5).unwrap_err();
        assert_eq!(e.to_string(), "all particles have zero likelihood");
    }
}
