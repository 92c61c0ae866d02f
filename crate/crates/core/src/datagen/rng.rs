//! Counter-based generator: every draw is a pure function of `(key, counter)`,
//! so any element of a dataset can be generated independently of the others.
//!
//! The mixing function is the SplitMix64 finalizer applied to
//! `key + counter · 0x9E3779B97F4A7C15`. Uniforms use the top 53 bits and are
//! offset by half an ulp, so they lie in the open interval `(0, 1)`.

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterRng {
    key: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        CounterRng { key: mix64(seed) }
    }

    /// Independent stream for a sub-task, e.g. the shuffle of a dataset.
    pub fn substream(self, tag: u64) -> Self {
        CounterRng { key: mix64(self.key ^ mix64(tag.wrapping_add(GAMMA))) }
    }

    #[inline]
    pub fn bits(self, counter: u64) -> u64 {
        mix64(self.key.wrapping_add(counter.wrapping_mul(GAMMA)))
    }

    #[inline]
    pub fn uniform(self, counter: u64) -> f64 {
        ((self.bits(counter) >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal from the cosine branch of Box–Muller, consuming
    /// counters `counter` and `counter + 1`.
    #[inline]
    pub fn normal(self, counter: u64) -> f64 {
        let u1 = self.uniform(counter);
        let u2 = self.uniform(counter + 1);
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Gamma(`shape`, 1) for integer `shape`, as a sum of exponentials;
    /// consumes `shape` counters.
    pub fn gamma_int(self, counter: u64, shape: u32) -> f64 {
        (0..shape as u64).map(|i| -self.uniform(counter + i).ln()).sum()
    }

    /// Integer in `0..bound` by Lemire's multiply-shift with rejection.
    /// Rejected draws advance `counter`.
    pub fn below(self, counter: &mut u64, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let m = (self.bits(*counter) as u128) * (bound as u128);
            *counter += 1;
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }
}
