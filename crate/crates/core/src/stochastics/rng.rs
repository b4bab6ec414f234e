use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// A deterministic random stream addressed by `(root_seed, stream_id)`.
///
/// Each path (or Monte Carlo block) owns the stream whose id is its index, so
/// its draws do not depend on how many other paths exist or on which worker
/// thread runs it. ChaCha supports 2^64 independent streams per seed.
#[derive(Debug, Clone)]
pub struct RngStream {
    root_seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(root_seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(root_seed);
        rng.set_stream(stream_id);
        Self {
            root_seed,
            stream_id,
            rng,
        }
    }

    pub fn root_seed(&self) -> u64 {
        self.root_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Number of 32-bit words consumed so far.
    pub fn position(&self) -> u128 {
        self.rng.get_word_pos()
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    /// A Brownian increment `ΔB = √dt · ζ`, `ζ ~ N(0, 1)`.
    pub fn brownian_increment(&mut self, dt: f64) -> f64 {
        dt.sqrt() * self.standard_normal()
    }
}

pub fn standard_normal(stream: &mut RngStream) -> f64 {
    stream.standard_normal()
}
