//! Deterministic, portable pseudo-random streams.
//!
//! The generator is xoshiro256** (public-domain algorithm by Blackman and
//! Vigna) seeded through splitmix64, implemented here directly so the byte
//! stream is pinned by this crate rather than by an external dependency.
//! Identical seeds produce identical sequences on every platform, which is
//! what makes traces reproducible byte for byte.
//!
//! Experiment cells derive their streams with [`stream_seed`] from
//! `(base seed, solver label, seed index)`, so concurrently executed cells
//! never share state.

/// xoshiro256** generator state.
#[derive(Clone, Debug)]
pub struct Rng {
    s: [u64; 4],
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Rng {
    /// Expands a 64-bit seed into the full generator state via splitmix64.
    pub fn seed_from_u64(seed: u64) -> Self {
        let mut sm = seed;
        let s = [
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
        ];
        Self { s }
    }

    /// Next raw 64-bit output.
    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform double in `[0, 1)` using the top 53 bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform double in `[lo, hi)`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform double in `[-amplitude, amplitude)`.
    pub fn symmetric(&mut self, amplitude: f64) -> f64 {
        amplitude * (2.0 * self.uniform() - 1.0)
    }

    /// Uniform index in `[0, n)`. Panics when `n == 0`.
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "index: empty range");
        // Modulo bias is ~n/2^64, far below anything the statistical
        // tolerances in this crate can resolve.
        (self.next_u64() % n as u64) as usize
    }

    /// Standard normal via Box-Muller; consumes exactly two uniforms.
    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * (1.0 - u1).ln()).sqrt();
        r * (std::f64::consts::TAU * u2).cos()
    }

    /// Bernoulli draw with success probability `p`.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }
}

/// FNV-1a hash of a label, used to fold solver names into stream seeds.
pub fn hash_label(label: &str) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for b in label.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// Derives a per-cell seed from `(base, label, index)`.
///
/// The three inputs are absorbed through a splitmix64 chain, so cells differ
/// in any one coordinate get unrelated streams.
pub fn stream_seed(base: u64, label: &str, index: u64) -> u64 {
    let mut state = base ^ 0xA076_1D64_78BD_642F;
    let mut out = splitmix64(&mut state);
    state ^= hash_label(label);
    out ^= splitmix64(&mut state);
    state ^= index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    out ^ splitmix64(&mut state)
}
