//! Pinned random streams.
//!
//! Every consumer of randomness draws from its own xoshiro256++ stream. The
//! stream state is seeded through SplitMix64 from
//! `seed ^ (stream_id * 0x9E3779B97F4A7C15)`, uniforms are
//! `((x >> 11) + 0.5) * 2^-53` (never exactly 0 or 1), and normals are the
//! inverse normal CDF of those uniforms. Nothing here depends on the platform
//! or on thread scheduling.

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use statrs::function::erf::erfc_inv;

/// Independent streams used by the simulator and the CV harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Coefficients = 1,
    Design = 2,
    Noise = 3,
    ZeroMask = 4,
    Folds = 5,
}

const STREAM_SPACING: u64 = 0x9E37_79B9_7F4A_7C15;

pub struct StreamRng {
    inner: Xoshiro256PlusPlus,
}

impl StreamRng {
    pub fn new(seed: u64, stream: Stream) -> Self {
        let key = seed ^ (stream as u64).wrapping_mul(STREAM_SPACING);
        StreamRng { inner: Xoshiro256PlusPlus::seed_from_u64(key) }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on the open interval `(0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn normal(&mut self) -> f64 {
        std_normal_quantile(self.uniform())
    }

    /// An index in `0..n` by multiply-shift (`n > 0`).
    pub fn below(&mut self, n: usize) -> usize {
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    /// Fisher-Yates shuffle, last position first.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}

/// Standard normal quantile, `-sqrt(2) * erfc^{-1}(2p)`.
pub fn std_normal_quantile(p: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_matches_reference_values() {
        // reference values from an independent ndtri implementation
        let cases = [
            (0.5, 0.0),
            (0.975, 1.959963984540054),
            (0.025, -1.959963984540054),
            (0.8413447460685429, 1.0),
            (1e-10, -6.361340902404056),
            (0.999, 3.090232306167813),
        ];
        for (p, z) in cases {
            let got = std_normal_quantile(p);
            assert!((got - z).abs() <= 1e-12 * (1.0 + z.abs()), "p={p}: {got} vs {z}");
        }
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let draw = |seed, s| {
            let mut r = StreamRng::new(seed, s);
            (0..4).map(|_| r.next_u64()).collect::<Vec<_>>()
        };
        assert_eq!(draw(42, Stream::Design), draw(42, Stream::Design));
        assert_ne!(draw(42, Stream::Design), draw(42, Stream::Noise));
        assert_ne!(draw(42, Stream::Design), draw(43, Stream::Design));
    }

    #[test]
    fn uniform_stays_in_open_interval_and_below_is_bounded() {
        let mut r = StreamRng::new(0, Stream::Folds);
        for _ in 0..10_000 {
            let u = r.uniform();
            assert!(u > 0.0 && u < 1.0);
            assert!(r.below(7) < 7);
        }
    }

    #[test]
    fn shuffle_is_a_permutation() {
        let mut v: Vec<usize> = (0..50).collect();
        StreamRng::new(9, Stream::Folds).shuffle(&mut v);
        let mut sorted = v.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..50).collect::<Vec<_>>());
        assert_ne!(v, sorted);
    }
}
