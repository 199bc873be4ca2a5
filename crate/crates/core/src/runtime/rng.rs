use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used for every random draw.
pub type Rng = ChaCha8Rng;

/// Identifies an independent random stream: a run seed plus the particle
/// slot and the resampling generation it belongs to. Copies produced by
/// resampling move to the next generation, so they draw different futures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub particle: u32,
    pub generation: u32,
}

impl RngStream {
    pub fn new(seed: u64, particle: u32, generation: u32) -> Self {
        RngStream {
            seed,
            particle,
            generation,
        }
    }

    /// Stream reserved for resampling decisions at a given generation.
    pub fn resampling(seed: u64, generation: u32) -> Self {
        RngStream::new(seed, u32::MAX, generation)
    }

    pub fn rng(&self) -> Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(((self.particle as u64) << 32) | self.generation as u64);
        r
    }
}
