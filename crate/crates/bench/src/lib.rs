// SPDX-License-Identifier: Apache-2.0

//! Shared fixtures for the criterion benchmarks.

use hitab::prng::SampleStream;
use hitab::schemes::DEFAULT_R_BITS;
use hitab::{KeyCodec, MemoryBudget, PolynomialHash, Preset, Scheme, SimpleTabulation, TabulationParams};

pub const SEED: u64 = 0xBE7C_0001;

/// `n` pseudorandom keys masked to `max`.
pub fn keys(n: usize, max: u64) -> Vec<u64> {
    let mut s = SampleStream::new(SEED);
    (0..n).map(|_| s.next_u64() & max).collect()
}

/// Simple tabulation of `c` 16-bit characters to one 64-bit word.
pub fn simple(c: u32) -> SimpleTabulation {
    let p = TabulationParams::for_codec(KeyCodec::new(16, c).unwrap(), 64, 1).unwrap();
    SimpleTabulation::generate(p, SEED).unwrap()
}

pub fn preset(p: Preset) -> Scheme {
    p.build(DEFAULT_R_BITS, SEED, &MemoryBudget::default()).unwrap()
}

pub fn poly(k: u32) -> Scheme {
    Scheme::Poly(PolynomialHash::new(k, SEED, DEFAULT_R_BITS).unwrap())
}
