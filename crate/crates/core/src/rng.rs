//! Small deterministic random number generator.
//!
//! Experiments must reproduce bit-for-bit from a `u64` seed regardless of
//! thread count, so trial streams are derived by counter-based splitting
//! instead of sequential draws from one shared generator. The generator is
//! xoshiro256++ seeded through a SplitMix64 expansion.

/// Finalizer of SplitMix64; bijective on `u64`.
fn splitmix_finalize(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed for an indexed sub-stream (trial, start, probe, ...).
///
/// Distinct `stream` values give decorrelated generators for the same root,
/// which is what makes parallel trial execution order-independent.
pub fn derive_seed(root: u64, stream: u64) -> u64 {
    splitmix_finalize(root ^ splitmix_finalize(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

/// xoshiro256++ with a cached spare for Gaussian draws.
#[derive(Clone, Debug)]
pub struct Rng {
    state: [u64; 4],
    spare_normal: Option<f64>,
}

impl Rng {
    pub fn seed_from(seed: u64) -> Self {
        let mut s = seed;
        let mut state = [0u64; 4];
        for word in &mut state {
            s = s.wrapping_add(0x9E37_79B9_7F4A_7C15);
            *word = splitmix_finalize(s);
        }
        // All-zero state is unreachable through SplitMix expansion, but keep
        // the generator total.
        if state == [0, 0, 0, 0] {
            state[0] = 1;
        }
        Rng {
            state,
            spare_normal: None,
        }
    }

    /// Generator for sub-stream `stream` of `root`.
    pub fn split(root: u64, stream: u64) -> Self {
        Rng::seed_from(derive_seed(root, stream))
    }

    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.state;
        let result = s[0]
            .wrapping_add(s[3])
            .rotate_left(23)
            .wrapping_add(s[0]);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform in [0, 1) with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in (0, 1]; safe as a logarithm argument.
    pub fn next_open_f64(&mut self) -> f64 {
        1.0 - self.next_f64()
    }

    /// Standard normal via Box-Muller; consumes two uniforms per pair.
    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = self.next_open_f64();
        let u2 = self.next_f64();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = std::f64::consts::TAU * u2;
        self.spare_normal = Some(radius * angle.sin());
        radius * angle.cos()
    }

    pub fn fill_normal(&mut self, out: &mut [f64]) {
        for v in out {
            *v = self.next_normal();
        }
    }

    pub fn normal_vec(&mut self, len: usize) -> Vec<f64> {
        let mut v = vec![0.0; len];
        self.fill_normal(&mut v);
        v
    }
}
