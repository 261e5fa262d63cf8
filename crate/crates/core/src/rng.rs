//! Portable seeded random number generation.
//!
//! Every random quantity in the crate comes from [`Rng64`], which is
//! xoshiro256** seeded through SplitMix64. Both are fully specified by their
//! update equations, so a seed reproduces the same stream in any language:
//!
//! ```text
//! SplitMix64 (seeding):   z = (s += 0x9E3779B97F4A7C15)
//!                         z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//!                         z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//!                         out = z ^ (z >> 31)
//!     state words s0..s3 are the first four SplitMix64 outputs.
//!
//! xoshiro256** (output):  out = rotl(s1 * 5, 7) * 9
//!                         t = s1 << 17
//!                         s2 ^= s0; s3 ^= s1; s1 ^= s2; s0 ^= s3
//!                         s2 ^= t;  s3 = rotl(s3, 45)
//! ```
//!
//! Derived draws (all arithmetic wrapping on u64):
//!
//! * `next_f64`  = `(out >> 11) * 2^-53`, uniform on [0, 1)
//! * `below(n)`  = `(out * n) >> 64` computed in 128 bits (Lemire multiply-shift,
//!   no rejection step; bias is below n / 2^64)
//! * `normal()`  = Box-Muller cosine branch,
//!   `sqrt(-2 ln(1 - u1)) * cos(2 pi u2)` with two consecutive `next_f64` draws

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone)]
pub struct Rng64 {
    inner: Xoshiro256StarStar,
}

impl Rng64 {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: Xoshiro256StarStar::seed_from_u64(seed),
        }
    }

    /// Independent stream for `(seed, stream)`, used when one run needs
    /// several generators that must not depend on evaluation order.
    pub fn derived(seed: u64, stream: u64) -> Self {
        Self::new(seed ^ stream.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform index in `0..n`. `n` must be non-zero.
    #[inline]
    pub fn below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    /// Standard normal deviate. Always consumes exactly two uniforms.
    pub fn normal(&mut self) -> f64 {
        let u1 = self.next_f64();
        let u2 = self.next_f64();
        (-2.0 * (1.0 - u1).ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Index drawn from a categorical distribution by inverse CDF on one uniform.
    pub fn categorical(&mut self, probs: &[f64]) -> usize {
        let u = self.next_f64();
        pick_categorical(probs, u)
    }

    /// In-place Fisher-Yates shuffle, walking from the back.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}

pub(crate) fn pick_categorical(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // rounding slack in the cumulative sum lands on the last non-zero entry
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}
