//! Reproducible randomness.
//!
//! Every random quantity is addressed by a key rather than drawn from a
//! shared sequence: Brownian nodes by their position in the dyadic tree,
//! Monte Carlo loops by `(seed, stream)`. Values therefore do not depend on
//! evaluation order or on the number of worker threads.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

/// Maps 64 random bits to a uniform in the open interval `(0, 1)`.
#[inline]
pub fn open_unit(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Standard normal variate from 64 random bits, by inversion.
#[inline]
pub fn normal_from_bits(bits: u64) -> f64 {
    thread_local! {
        static STD: Normal = Normal::standard();
    }
    STD.with(|n| n.inverse_cdf(open_unit(bits)))
}

/// Independent stream number `stream` of the generator seeded by `seed`.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform draw in `(0, 1)` from any generator.
#[inline]
pub fn uniform(rng: &mut impl RngCore) -> f64 {
    open_unit(rng.next_u64())
}

/// Standard normal draw from any generator.
#[inline]
pub fn normal(rng: &mut impl RngCore) -> f64 {
    normal_from_bits(rng.next_u64())
}

/// Keyed Gaussian noise: `normals(key, out)` always fills `out` with the same
/// values for the same seed and key.
#[derive(Clone, Debug)]
pub struct KeyedNormals {
    base: ChaCha8Rng,
    seed: u64,
}

impl KeyedNormals {
    pub fn new(seed: u64) -> Self {
        KeyedNormals { base: ChaCha8Rng::seed_from_u64(seed), seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn normals(&self, key: u64, out: &mut [f64]) {
        let mut rng = self.base.clone();
        rng.set_stream(key);
        for x in out {
            *x = normal(&mut rng);
        }
    }
}
