use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Seeded random stream addressed by `(seed, stream id)`.
///
/// Streams with equal addresses replay identical sequences; distinct stream
/// ids are independent ChaCha streams over the same key. Workers derive
/// their own stream ids so results do not depend on scheduling order.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    /// Stream whose id is a hash of `parts`, e.g. `[purpose, iteration, doc]`.
    pub fn derive(seed: u64, parts: &[u64]) -> Self {
        Self::new(seed, stream_id(parts))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Order-sensitive hash of a tuple of integers.
pub fn stream_id(parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(0x243F_6A88_85A3_08D3, |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Per-coordinate or shared standard deviation.
#[derive(Debug, Clone, Copy)]
pub enum Scale<'a> {
    Scalar(f64),
    PerCoord(&'a [f64]),
}

/// `mean + std ⊙ ε` with `ε ~ N(0, I)`.
pub fn gaussian_vector(mean: &[f64], std: Scale<'_>, rng: &mut RandomStream) -> Vec<f64> {
    mean.iter()
        .enumerate()
        .map(|(i, &m)| {
            let s = match std {
                Scale::Scalar(s) => s,
                Scale::PerCoord(v) => v[i],
            };
            m + s * rng.standard_normal()
        })
        .collect()
}
