//! Deterministic, substream-capable random source.
//!
//! Reproducibility is a feature of every estimator in this crate, so the
//! random layer is pinned down completely: a ChaCha12 stream cipher keyed by
//! a 64-bit seed, with the 64-bit ChaCha nonce serving as a counter-based
//! substream index. Identical `(seed, stream_id)` produce the identical bit
//! sequence on every platform; distinct stream ids are independent streams.

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

use crate::FloatScalar;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A seedable random stream with independent substreams.
///
/// Single-owner mutable state: a stream may be moved between threads but is
/// never shared; parallel code derives one stream per worker with
/// [`RngStream::substream`].
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha12Rng,
}

impl RngStream {
    /// Stream `stream_id` of the generator keyed by `seed`.
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    /// The seed this stream was created from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The substream index this stream was created from.
    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// A fresh, statistically independent child stream.
    ///
    /// The child's stream id is a bijective hash of `(stream_id, index)`, so
    /// distinct indices never collide with each other and do not reuse the
    /// low stream-id range where callers typically allocate their own
    /// streams. Derivation does not advance `self`.
    pub fn substream(&self, index: u64) -> Self {
        let child = splitmix64(self.stream_id ^ GOLDEN.wrapping_mul(index.wrapping_add(1)));
        Self::new(self.seed, child)
    }

    /// Split off `count` independent worker streams, advancing `self` once.
    ///
    /// The children are keyed by a salt drawn from `self`, so consecutive
    /// splits from the same parent produce unrelated families.
    pub fn split(&mut self, count: usize) -> Vec<Self> {
        let salt = self.next_u64();
        (0..count as u64)
            .map(|i| Self::new(self.seed, splitmix64(salt ^ GOLDEN.wrapping_mul(i.wrapping_add(1)))))
            .collect()
    }

    /// Next raw 64 random bits.
    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform `f64` on the open interval (0, 1).
    ///
    /// 53-bit mantissa construction; an exact 0 (probability 2⁻⁵³) is
    /// re-drawn because the supports of all laws in this crate are open.
    #[inline]
    pub fn next_open01(&mut self) -> f64 {
        loop {
            let u = (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
            if u > 0.0 {
                return u;
            }
        }
    }

    /// Uniform scalar on the open interval (0, 1).
    ///
    /// For `f32` the rounded conversion could land on 1.0; such draws are
    /// rejected so the result is strictly interior for every scalar type.
    #[inline]
    pub fn uniform<T: FloatScalar>(&mut self) -> T {
        loop {
            let t = T::from(self.next_open01()).expect("uniform draw must cast");
            if t > T::zero() && t < T::one() {
                return t;
            }
        }
    }

    /// A uniformly random sign, −1 or +1.
    #[inline]
    pub fn sign<T: FloatScalar>(&mut self) -> T {
        if self.next_u64() & 1 == 0 {
            T::one()
        } else {
            -T::one()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_parameters_reproduce_bits() {
        let mut a = RngStream::new(42, 7);
        let mut b = RngStream::new(42, 7);
        for _ in 0..1000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn distinct_streams_differ() {
        let mut a = RngStream::new(42, 0);
        let mut b = RngStream::new(42, 1);
        let same = (0..64).filter(|_| a.next_u64() == b.next_u64()).count();
        assert_eq!(same, 0);
    }

    #[test]
    fn substreams_are_distinct_and_deterministic() {
        let base = RngStream::new(9, 3);
        let ids: Vec<u64> = (0..100).map(|i| base.substream(i).stream_id()).collect();
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), ids.len(), "substream ids must not collide");
        assert_eq!(base.substream(5).stream_id(), ids[5]);
        // derivation leaves the parent untouched
        let mut p1 = RngStream::new(9, 3);
        let mut p2 = RngStream::new(9, 3);
        let _ = p2.substream(0);
        assert_eq!(p1.next_u64(), p2.next_u64());
    }

    #[test]
    fn open01_stays_interior() {
        let mut rng = RngStream::new(1, 0);
        for _ in 0..100_000 {
            let u = rng.next_open01();
            assert!(u > 0.0 && u < 1.0);
        }
        let mut rng = RngStream::new(1, 0);
        for _ in 0..10_000 {
            let u: f32 = rng.uniform();
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn pinned_bit_sequence() {
        // Frozen first outputs; a change here means the generator is no
        // longer byte-reproducible across releases or platforms.
        let mut rng = RngStream::new(0, 0);
        let got: Vec<u64> = (0..4).map(|_| rng.next_u64()).collect();
        assert_eq!(
            got,
            [
                13486662071293341567,
                14267822071968393595,
                476749353381333526,
                10775836403224147664
            ]
        );
        let mut rng = RngStream::new(12345, 67890);
        let got: Vec<u64> = (0..4).map(|_| rng.next_u64()).collect();
        assert_eq!(
            got,
            [
                2363093083574358320,
                10891122782165121838,
                10084839296915917422,
                5965850166193515787
            ]
        );
    }
}
