//! Likelihood weighting and sequential Monte Carlo over CPS programs.

mod estimate;
mod lw;
mod resample;
mod smc;

pub use estimate::{log_mean_exp, log_normalizer, log_sum_exp};
pub use lw::{lw_log_normalizer, run_likelihood_weighting, run_likelihood_weighting_compiled};
pub use resample::{systematic_ancestors, systematic_resample};
pub use smc::{
    run_aligned_smc, run_smc, run_unaligned_smc, Particle, ParticleState, Schedule, SmcResult,
};

use crate::runtime::RuntimeError;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum InferenceError {
    #[error("particle count must be at least 1")]
    NoParticles,
    #[error("all particles have zero likelihood")]
    AllZeroLikelihood,
    #[error(
        "population not aligned at barrier {step}: particle {particle} {particle_state} \
         while particle 0 {first_state}; the analysis missed a dynamic weight"
    )]
    NotAligned {
        step: usize,
        particle: usize,
        particle_state: &'static str,
        first_state: &'static str,
    },
    #[error(transparent)]
    Program(RuntimeError),
    #[error("particle {particle}: {source}")]
    Runtime {
        particle: usize,
        #[source]
        source: RuntimeError,
    },
}
