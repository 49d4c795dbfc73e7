//! Seeded random streams. The generator is SplitMix64 (increment
//! `0x9E3779B97F4A7C15`, output mix constants `0xBF58476D1CE4E5B9` and
//! `0x94D049BB133111EB`), its state being a plain counter, so every draw is
//! reproducible across platforms. Normal variates come from the inverse
//! normal CDF, one uniform per variate.

use crate::special::normal_quantile_approx;
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// The SplitMix64 output function applied to one word.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of an independent substream `tag` of `seed`.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    mix64(seed ^ mix64(tag.wrapping_add(1).wrapping_mul(GAMMA)))
}

/// Seed of Monte Carlo trial `index` under master seed `master`.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    derive_seed(master, index.wrapping_add(1 << 32))
}

/// Named substreams of one instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Support = 1,
    Signals = 2,
    Matrices = 3,
    Noise = 4,
}

#[derive(Debug, Clone)]
pub struct Rng(SplitMix64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(SplitMix64::seed_from_u64(seed))
    }

    pub fn stream(seed: u64, stream: Stream) -> Self {
        Self::new(derive_seed(seed, stream as u64))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform on the open interval (0, 1): `((x >> 11) + ½) 2⁻⁵³`.
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn normal(&mut self) -> f64 {
        normal_quantile_approx(self.uniform())
    }

    pub fn fill_normal(&mut self, out: &mut [f64]) {
        for v in out {
            *v = self.normal();
        }
    }

    /// Uniform integer in `0..bound`, without modulo bias (Lemire's method).
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "empty range");
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let m = (self.next_u64() as u128) * (bound as u128);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }

    /// Uniform `k`-subset of `0..n`, by a partial Fisher–Yates shuffle, sorted.
    pub fn subset(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n);
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.below((n - i) as u64) as usize;
            pool.swap(i, j);
        }
        let mut s = pool[..k].to_vec();
        s.sort_unstable();
        s
    }
}


#[cfg(test)]
mod properties {
    use super::Rng;
    use proptest::prelude::{any, prop_assert, prop_assert_eq, proptest};

    proptest! {
        #[test]
        fn subset_sorted_distinct(seed in any::<u64>(), n in 1usize..500, frac in 0.0f64..1.0) {
            let k = ((n as f64 * frac) as usize).max(1);
            let s = Rng::new(seed).subset(n, k);
            prop_assert_eq!(s.len(), k);
            prop_assert!(s.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(s.iter().all(|&i| i < n));
        }

        #[test]
        fn below_is_bounded(seed in any::<u64>(), bound in 1u64..1_000_000) {
            let mut r = Rng::new(seed);
            for _ in 0..64 {
                prop_assert!(r.below(bound) < bound);
            }
        }
    }
}
