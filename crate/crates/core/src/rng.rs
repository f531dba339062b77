//! Counter-based keyed random streams.
//!
//! A key `(master_seed, purpose, index)` names an independent stream. Two
//! access patterns are offered: sequential draws through a ChaCha8 generator
//! whose key is `(master_seed, purpose)` and whose stream id is `index`, and
//! random access through a keyed 64-bit mixing function evaluated at a
//! counter. Both are pure functions of the key.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

#[inline]
fn to_unit(z: u64) -> f64 {
    (z >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RngKey {
    pub master_seed: u64,
    pub purpose: String,
    pub index: u64,
}

impl RngKey {
    pub fn new(master_seed: u64, purpose: impl Into<String>, index: u64) -> Self {
        Self { master_seed, purpose: purpose.into(), index }
    }

    /// Same seed and index, different purpose.
    pub fn with_purpose(&self, purpose: impl Into<String>) -> Self {
        Self::new(self.master_seed, purpose, self.index)
    }

    pub fn with_index(&self, index: u64) -> Self {
        Self::new(self.master_seed, self.purpose.clone(), index)
    }

    /// 64-bit digest of the full key.
    pub fn digest(&self) -> u64 {
        let a = mix64(self.master_seed ^ GOLDEN);
        let b = mix64(a ^ fnv1a(self.purpose.as_bytes()));
        mix64(b ^ self.index.wrapping_mul(GOLDEN))
    }

    /// Sequential stream for this key.
    pub fn stream(&self) -> ChaCha8Rng {
        let mut seed = [0u8; 32];
        seed[..8].copy_from_slice(&self.master_seed.to_le_bytes());
        seed[8..16].copy_from_slice(&fnv1a(self.purpose.as_bytes()).to_le_bytes());
        seed[16..24].copy_from_slice(&mix64(self.master_seed).to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(self.index);
        rng
    }

    /// Random-access uniform in [0, 1) at `counter`.
    pub fn uniform_at(&self, counter: u64) -> f64 {
        UniformField::new(self).at(counter)
    }
}

/// Precomputed random-access view of a key: `at(c)` is a uniform in [0, 1)
/// determined by the key and `c` alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UniformField {
    digest: u64,
}

impl UniformField {
    pub fn new(key: &RngKey) -> Self {
        Self { digest: key.digest() }
    }

    #[inline]
    pub fn at(&self, counter: u64) -> f64 {
        let z = mix64(self.digest.wrapping_add(counter.wrapping_add(1).wrapping_mul(GOLDEN)));
        to_unit(mix64(z ^ self.digest.rotate_left(17)))
    }

    /// As [`UniformField::at`] but in the open interval (0, 1).
    #[inline]
    pub fn open_at(&self, counter: u64) -> f64 {
        self.at(counter) + 0.5 * (1.0 / (1u64 << 53) as f64)
    }
}
