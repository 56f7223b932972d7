// SPDX-License-Identifier: Apache-2.0

//! Counter-based table generator.
//!
//! Generator id 1 is ChaCha8 keyed by `seed (u64 LE) || domain tag (8 bytes) || 0^16`.
//! Table `t` reads stream `t`; entry `e` of a table with `w` 64-bit words per
//! entry occupies 64-bit words `[e*w, (e+1)*w)` of that stream, and the most
//! significant word is masked down to the packed output width. Any entry can
//! be recomputed in isolation from `(seed, t, e)`.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum GeneratorId {
    ChaCha8V1 = 1,
}

impl GeneratorId {
    pub const CURRENT: GeneratorId = GeneratorId::ChaCha8V1;

    pub fn name(self) -> &'static str {
        match self {
            GeneratorId::ChaCha8V1 => "chacha8-stream-v1",
        }
    }
}

impl TryFrom<u8> for GeneratorId {
    type Error = ParseError;

    fn try_from(v: u8) -> Result<Self, ParseError> {
        match v {
            1 => Ok(GeneratorId::ChaCha8V1),
            other => Err(ParseError::UnknownGenerator(other)),
        }
    }
}

const TABLE_TAG: [u8; 8] = *b"hitabTBL";
const SUBSEED_TAG: [u8; 8] = *b"hitabSUB";
const COEFF_TAG: [u8; 8] = *b"hitabPOL";
const SAMPLE_TAG: [u8; 8] = *b"hitabSMP";

fn keyed(seed: u64, tag: [u8; 8]) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&tag);
    ChaCha8Rng::from_seed(key)
}

/// Fills table `table` sequentially: `out.len()` must be a multiple of `words`.
pub(crate) fn fill_table(seed: u64, table: u64, words: usize, top_mask: u64, out: &mut [u64]) {
    debug_assert!(words > 0 && out.len() % words == 0);
    let mut rng = keyed(seed, TABLE_TAG);
    rng.set_stream(table);
    for entry in out.chunks_exact_mut(words) {
        for w in entry.iter_mut() {
            *w = rng.next_u64();
        }
        entry[words - 1] &= top_mask;
    }
}

/// Recomputes a single entry without materializing its table.
pub(crate) fn table_entry(seed: u64, table: u64, entry: u64, top_mask: u64, out: &mut [u64]) {
    let words = out.len();
    let mut rng = keyed(seed, TABLE_TAG);
    rng.set_stream(table);
    rng.set_word_pos(u128::from(entry) * words as u128 * 2);
    for w in out.iter_mut() {
        *w = rng.next_u64();
    }
    out[words - 1] &= top_mask;
}

/// Sub-seed for one component of a composed scheme.
///
/// Distinct `(level, role)` pairs give independent streams under one master seed.
pub fn derive_seed(master: u64, level: u32, role: u32) -> u64 {
    let mut rng = keyed(master, SUBSEED_TAG);
    rng.set_stream((u64::from(level) << 32) | u64::from(role));
    rng.next_u64()
}

/// Word stream used for polynomial coefficients.
pub(crate) fn coefficient_stream(seed: u64) -> impl FnMut() -> u64 {
    let mut rng = keyed(seed, COEFF_TAG);
    move || rng.next_u64()
}

/// A deterministic stream of 64-bit words for sampling keys and trial seeds.
#[derive(Debug, Clone)]
pub struct SampleStream {
    rng: ChaCha8Rng,
}

impl SampleStream {
    pub fn new(seed: u64) -> Self {
        SampleStream {
            rng: keyed(seed, SAMPLE_TAG),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform value in `[0, bound)` by rejection.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        // 2^64 mod bound; values at or above it split evenly into residues.
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let v = self.rng.next_u64();
            if v >= threshold {
                return v % bound;
            }
        }
    }
}
