//! Portable pseudo-random streams.
//!
//! Everything random in the pipeline (corpus shuffle, parameter init, epoch
//! order) is drawn from splitmix64 so results are bit-reproducible on any
//! platform and in any language that implements the same few lines.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Stream tag for parameter initialization.
pub const STREAM_INIT: u64 = 0x494E_4954;
/// Stream tag base for per-epoch training shuffles; the epoch index is added.
pub const STREAM_EPOCH: u64 = 0x4550_4F43_0000_0000;

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Independent stream for `(seed, stream)`, obtained by mixing the pair
    /// through one splitmix64 output.
    pub fn derive(seed: u64, stream: u64) -> Self {
        let mut mixer = SplitMix64::new(seed ^ stream.wrapping_mul(GOLDEN_GAMMA));
        SplitMix64::new(mixer.next_u64())
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[0, bound)` by plain modulo reduction. `bound` must be > 0.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        self.next_u64() % bound
    }
}

/// Top-down Fisher-Yates: for `i = n-1 ..= 1`, swap `i` with `next_below(i + 1)`.
pub fn fisher_yates<T>(items: &mut [T], rng: &mut SplitMix64) {
    for i in (1..items.len()).rev() {
        let j = rng.next_below(i as u64 + 1) as usize;
        items.swap(i, j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_values() {
        // Reference outputs for seed 1234567 from the published C implementation.
        let mut rng = SplitMix64::new(1234567);
        let expected = [
            6457827717110365317u64,
            3203168211198807973,
            9817491932198370423,
            4593380528125082431,
            16408922859458223821,
        ];
        for e in expected {
            assert_eq!(rng.next_u64(), e);
        }
    }

    #[test]
    fn fisher_yates_is_a_permutation() {
        let mut v: Vec<u32> = (0..100).collect();
        fisher_yates(&mut v, &mut SplitMix64::new(7));
        let mut sorted = v.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..100).collect::<Vec<_>>());
        assert_ne!(v, sorted);
    }

    #[test]
    fn next_f64_in_unit_interval() {
        let mut rng = SplitMix64::new(0);
        for _ in 0..10_000 {
            let x = rng.next_f64();
            assert!((0.0..1.0).contains(&x));
        }
    }

    #[test]
    fn derived_streams_differ() {
        let a = SplitMix64::derive(1, STREAM_INIT).next_u64();
        let b = SplitMix64::derive(2, STREAM_INIT).next_u64();
        let c = SplitMix64::derive(1, STREAM_EPOCH).next_u64();
        assert_ne!(a, b);
        assert_ne!(a, c);
    }
}
