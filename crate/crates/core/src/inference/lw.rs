use rayon::prelude::*;

use super::{log_mean_exp, InferenceError};
use crate::ast::{Annotation, Term};
use crate::runtime::{Evaluator, RngStream, Value};

/// `n` independent runs of a direct-style program, each on stream
/// `(seed, i, 0)`, with their final log-weights.
pub fn run_likelihood_weighting<A: Annotation>(
    program: &Term<A>,
    n: usize,
    seed: u64,
) -> Result<Vec<(Value, f64)>, InferenceError> {
    let ev = Evaluator::new(program).map_err(InferenceError::Program)?;
    run_likelihood_weighting_compiled(&ev, n, seed)
}

pub fn run_likelihood_weighting_compiled(
    ev: &Evaluator,
    n: usize,
    seed: u64,
) -> Result<Vec<(Value, f64)>, InferenceError> {
    if n == 0 {
        return Err(InferenceError::NoParticles);
    }
    let results: Vec<Result<(Value, f64), InferenceError>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = RngStream::new(seed, i as u32, 0).rng();
            // CPS programs may pause; likelihood weighting just resumes.
            let out = ev.run_to_end(0.0, &mut rng);
            out.map_err(|source| InferenceError::Runtime {
                particle: i,
                source,
            })
        })
        .collect();
    results.into_iter().collect()
}

/// `log((1/n) Σ exp(w_i))` over weighted samples.
pub fn lw_log_normalizer(samples: &[(Value, f64)]) -> f64 {
    let ws: Vec<f64> = samples.iter().map(|(_, w)| *w).collect();
    log_mean_exp(&ws)
}
