//! Small deterministic helpers: a seedable PRNG for starting subspaces and a
//! stable hash for run configurations.  No external entropy anywhere.

/// SplitMix64. Good enough statistical quality for starting vectors and
/// randomized test sweeps, fully reproducible across platforms.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in (-1, 1).
    pub fn next_symmetric(&mut self) -> f64 {
        let u = self.next_u64() >> 11; // 53 bits
        2.0 * (u as f64 / (1u64 << 53) as f64) - 1.0
    }
}

/// FNV-1a over bytes; used to derive deterministic seeds and config hashes.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub fn hash_f64s(h: &mut u64, xs: &[f64]) {
    for x in xs {
        let b = x.to_bits().to_le_bytes();
        for &byte in &b {
            *h ^= byte as u64;
            *h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
}

pub fn hash_usizes(h: &mut u64, xs: &[usize]) {
    for x in xs {
        let b = (*x as u64).to_le_bytes();
        for &byte in &b {
            *h ^= byte as u64;
            *h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
}
