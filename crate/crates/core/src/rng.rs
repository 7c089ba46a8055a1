//! Reproducible random streams.
//!
//! Every stream is a ChaCha8 keystream keyed by `seed` and positioned on the
//! 64-bit `stream_id`, so streams with distinct ids never overlap and the
//! value sequence depends only on `(seed, stream_id)`, never on thread count
//! or scheduling. Normals come from Box–Muller, which consumes exactly two
//! words per pair of variates.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TWO_POW_53: f64 = (1u64 << 53) as f64;

#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Derives an independent stream sharing this seed.
    pub fn split(&self, stream_id: u64) -> Self {
        Self::new(self.seed, stream_id)
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / TWO_POW_53
    }

    /// Uniform in `[lo, hi)`; `hi` must exceed `lo`.
    pub fn uniform_usize(&mut self, lo: usize, hi: usize) -> usize {
        debug_assert!(hi > lo);
        lo + ((self.next_f64() * (hi - lo) as f64) as usize).min(hi - lo - 1)
    }

    /// Fills `out` with i.i.d. standard normals. Always consumes
    /// `2 * ceil(out.len() / 2)` words.
    pub fn fill_standard_normal(&mut self, out: &mut [f64]) {
        let mut chunks = out.chunks_exact_mut(2);
        for pair in &mut chunks {
            let (a, b) = self.normal_pair();
            pair[0] = a;
            pair[1] = b;
        }
        if let [last] = chunks.into_remainder() {
            *last = self.normal_pair().0;
        }
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.normal_pair().0
    }

    #[inline]
    fn normal_pair(&mut self) -> (f64, f64) {
        // u1 in (0, 1] keeps ln finite.
        let u1 = ((self.next_u64() >> 11) + 1) as f64 / TWO_POW_53;
        let u2 = self.next_f64();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        (r * theta.cos(), r * theta.sin())
    }
}
