use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::{log_normalizer, systematic_resample, InferenceError};
use crate::ast::{Annotation, Term};
use crate::runtime::{Evaluator, Outcome, RngStream, Value};

/// Where a particle's execution stands.
#[derive(Clone, Debug)]
pub enum ParticleState {
    /// Stopped at a weight; holds the continuation.
    Paused(Value),
    Final(Value),
}

impl ParticleState {
    fn describe(&self) -> &'static str {
        match self {
            ParticleState::Paused(_) => "paused at a weight",
            ParticleState::Final(_) => "finished",
        }
    }
}

/// One execution in the population. `log_weight` counts only what was
/// accumulated since the last resampling.
#[derive(Clone, Debug)]
pub struct Particle {
    pub state: ParticleState,
    pub log_weight: f64,
    pub stream: RngStream,
}

/// Which pauses resampling waits for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Schedule {
    /// Every particle must pause at the same barriers; a population that is
    /// part paused, part finished is an error.
    Aligned,
    /// Resample whenever any particle pauses; finished particles take part
    /// with their last weight and then with weight zero.
    Unaligned,
}

#[derive(Clone, Debug)]
pub struct SmcResult {
    /// Unweighted draws after the final resampling.
    pub samples: Vec<Value>,
    pub log_normalizer: f64,
    pub resample_count: usize,
    /// Weight increments since the previous resampling, one row per
    /// resampling point.
    pub per_step_log_weights: Vec<Vec<f64>>,
    pub wall_time: Duration,
    /// The population just before the final resampling, with its weights.
    pub weighted_final: Vec<(Value, f64)>,
}

/// Aligned SMC: `program` is an aligned, CPS-converted term.
pub fn run_aligned_smc<A: Annotation>(
    program: &Term<A>,
    n: usize,
    seed: u64,
) -> Result<SmcResult, InferenceError> {
    let ev = Evaluator::new(program).map_err(InferenceError::Program)?;
    run_smc(&ev, n, seed, Schedule::Aligned)
}

/// Unaligned SMC: `program` is CPS-converted without the alignment rewrite.
pub fn run_unaligned_smc<A: Annotation>(
    program: &Term<A>,
    n: usize,
    seed: u64,
) -> Result<SmcResult, InferenceError> {
    let ev = Evaluator::new(program).map_err(InferenceError::Program)?;
    run_smc(&ev, n, seed, Schedule::Unaligned)
}

/// Bootstrap SMC over a compiled CPS program: advance every particle to its
/// next pause, record weights, resample systematically, zero the weights,
/// repeat; the round in which every particle has finished is the final
/// resampling.
pub fn run_smc(
    ev: &Evaluator,
    n: usize,
    seed: u64,
    schedule: Schedule,
) -> Result<SmcResult, InferenceError> {
    if n == 0 {
        return Err(InferenceError::NoParticles);
    }
    let start = Instant::now();
    let mut generation = 0u32;
    let mut particles = advance(ev, (0..n).map(|_| None).collect(), seed, generation)?;
    let mut per_step = Vec::new();

    loop {
        if schedule == Schedule::Aligned {
            check_aligned(&particles, per_step.len())?;
        }
        let row: Vec<f64> = particles.iter().map(|p| p.log_weight).collect();
        let ancestors = systematic_resample(&row, RngStream::resampling(seed, generation))?;
        per_step.push(row);

        if particles
            .iter()
            .all(|p| matches!(p.state, ParticleState::Final(_)))
        {
            let samples = ancestors
                .iter()
                .map(|&a| final_value(&particles[a]).clone())
                .collect();
            let weighted_final = particles
                .into_iter()
                .map(|p| (final_value(&p).clone(), p.log_weight))
                .collect();
            return Ok(SmcResult {
                samples,
                log_normalizer: log_normalizer(&per_step),
                resample_count: per_step.len(),
                per_step_log_weights: per_step,
                wall_time: start.elapsed(),
                weighted_final,
            });
        }

        generation += 1;
        let copies = ancestors
            .iter()
            .map(|&a| Some(particles[a].state.clone()))
            .collect();
        particles = advance(ev, copies, seed, generation)?;
    }
}

fn final_value(p: &Particle) -> &Value {
    match &p.state {
        ParticleState::Final(v) => v,
        ParticleState::Paused(_) => unreachable!("checked by caller"),
    }
}

/// Run each slot to its next pause: `None` starts the program, a paused
/// state resumes it, a finished state stays put with weight zero.
fn advance(
    ev: &Evaluator,
    states: Vec<Option<ParticleState>>,
    seed: u64,
    generation: u32,
) -> Result<Vec<Particle>, InferenceError> {
    let results: Vec<Result<Particle, InferenceError>> = states
        .into_par_iter()
        .enumerate()
        .map(|(i, state)| {
            let stream = RngStream::new(seed, i as u32, generation);
            let outcome = match state {
                Some(ParticleState::Final(v)) => {
                    return Ok(Particle {
                        state: ParticleState::Final(v),
                        log_weight: 0.0,
                        stream,
                    })
                }
                Some(ParticleState::Paused(k)) => ev.resume(&k, 0.0, &mut stream.rng()),
                None => ev.eval(0.0, &mut stream.rng()),
            }
            .map_err(|source| InferenceError::Runtime {
                particle: i,
                source,
            })?;
            Ok(match outcome {
                Outcome::Paused(k, w) => Particle {
                    state: ParticleState::Paused(k),
                    log_weight: w,
                    stream,
                },
                Outcome::Final(v, w) => Particle {
                    state: ParticleState::Final(v),
                    log_weight: w,
                    stream,
                },
            })
        })
        .collect();
    // Report the lowest-numbered failure so errors do not depend on the
    // thread schedule.
    results.into_iter().collect()
}

fn check_aligned(particles: &[Particle], step: usize) -> Result<(), InferenceError> {
    let first = std::mem::discriminant(&particles[0].state);
    match particles
        .iter()
        .position(|p| std::mem::discriminant(&p.state) != first)
    {
        None => Ok(()),
        Some(i) => Err(InferenceError::NotAligned {
            step,
            particle: i,
            particle_state: particles[i].state.describe(),
            first_state: particles[0].state.describe(),
        }),
    }
}
