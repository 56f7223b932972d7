// SPDX-License-Identifier: Apache-2.0

//! Triple tabulation for 64-bit keys.
//!
//! The top level `[2^16]^4 → [2^32]^14` is followed by one shared middle
//! function `[2^16]^2 → [2^16]^20` applied to each 32-bit intermediate
//! character, and a bottom simple tabulation over all `14 * 20 = 280`
//! resulting 16-bit characters.

use crate::budget::MemoryBudget;
use crate::error::Result;
use crate::keyspace::KeyCodec;
use crate::prng::derive_seed;
use crate::tabulation::{
    extract_char, LazyTabulation, LookupCounter, Probe, SimpleTabulation, TableSource, TabulationParams,
};

use super::with_scratch;

const CHAR_BITS: u32 = 16;
const TOP_CHARS: u32 = 4;
const TOP_OUT_BITS: u32 = 32;
const TOP_OUT_CHARS: u32 = 14;
const MIDDLE_OUT_CHARS: u32 = 20;
const BOTTOM_CHARS: u32 = TOP_OUT_CHARS * MIDDLE_OUT_CHARS;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripleTabulation<S = SimpleTabulation> {
    seed: u64,
    top: S,
    middle: S,
    bottom: S,
}

/// Top, middle and bottom parameters, hashing to `r_bits`.
pub fn triple_params(r_bits: u32) -> Result<[TabulationParams; 3]> {
    Ok([
        TabulationParams::new(CHAR_BITS, TOP_CHARS, TOP_OUT_BITS, TOP_OUT_CHARS)?,
        TabulationParams::new(CHAR_BITS, 2, CHAR_BITS, MIDDLE_OUT_CHARS)?,
        TabulationParams::new(CHAR_BITS, BOTTOM_CHARS, r_bits, 1)?,
    ])
}

impl TripleTabulation {
    pub fn new(r_bits: u32, seed: u64) -> Result<Self> {
        Self::with_budget(r_bits, seed, &MemoryBudget::default())
    }

    pub fn with_budget(r_bits: u32, seed: u64, budget: &MemoryBudget) -> Result<Self> {
        let params = triple_params(r_bits)?;
        budget.check(
            "triple tabulation tables",
            params.iter().map(TabulationParams::table_bytes).sum(),
        )?;
        let unlimited = MemoryBudget::unlimited();
        let [top, middle, bottom] = params;
        Ok(TripleTabulation {
            seed,
            top: SimpleTabulation::generate_with_budget(top, derive_seed(seed, 0, 0), &unlimited)?,
            middle: SimpleTabulation::generate_with_budget(middle, derive_seed(seed, 1, 0), &unlimited)?,
            bottom: SimpleTabulation::generate_with_budget(bottom, derive_seed(seed, 2, 0), &unlimited)?,
        })
    }

    /// All-zero tables at every level.
    pub fn zeroed(r_bits: u32) -> Result<Self> {
        let [top, middle, bottom] = triple_params(r_bits)?;
        Ok(TripleTabulation {
            seed: 0,
            top: SimpleTabulation::zeroed(top),
            middle: SimpleTabulation::zeroed(middle),
            bottom: SimpleTabulation::zeroed(bottom),
        })
    }
}

impl TripleTabulation<LazyTabulation> {
    pub fn lazy(r_bits: u32, seed: u64) -> Result<Self> {
        let [top, middle, bottom] = triple_params(r_bits)?;
        Ok(TripleTabulation {
            seed,
            top: LazyTabulation::new(top, derive_seed(seed, 0, 0)),
            middle: LazyTabulation::new(middle, derive_seed(seed, 1, 0)),
            bottom: LazyTabulation::new(bottom, derive_seed(seed, 2, 0)),
        })
    }
}

impl<S: TableSource> TripleTabulation<S> {
    pub(crate) fn from_parts(seed: u64, top: S, middle: S, bottom: S) -> Result<Self> {
        let r_bits = bottom.params().out_char_bits();
        let expected = triple_params(r_bits)?;
        let found = [*top.params(), *middle.params(), *bottom.params()];
        if expected != found {
            return Err(crate::Error::domain(format!(
                "triple tabulation levels {found:?} do not match {expected:?}"
            )));
        }
        Ok(TripleTabulation {
            seed,
            top,
            middle,
            bottom,
        })
    }

    pub fn codec(&self) -> KeyCodec {
        KeyCodec::new(CHAR_BITS, TOP_CHARS).expect("valid codec")
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn top(&self) -> &S {
        &self.top
    }

    pub fn middle(&self) -> &S {
        &self.middle
    }

    pub fn bottom(&self) -> &S {
        &self.bottom
    }

    pub fn output_bits(&self) -> u32 {
        self.bottom.params().out_char_bits()
    }

    /// `4 + 14 * 2 + 280 = 312`.
    pub fn lookups_per_key(&self) -> u64 {
        u64::from(TOP_CHARS + TOP_OUT_CHARS * 2 + BOTTOM_CHARS)
    }

    /// Total number of characters looked up in the bottom tables.
    pub fn bottom_chars(&self) -> u32 {
        BOTTOM_CHARS
    }

    pub fn eval(&self, key: u64) -> Result<u64> {
        // 64-bit keys: every u64 is in range.
        Ok(self.eval_unchecked(key, &mut ()))
    }

    pub fn eval_counted(&self, key: u64, counter: &mut LookupCounter) -> Result<u64> {
        Ok(self.eval_unchecked(key, counter))
    }

    pub(crate) fn eval_unchecked<P: Probe>(&self, key: u64, probe: &mut P) -> u64 {
        let top_words = self.top.params().words();
        let mid_words = self.middle.params().words();
        with_scratch(top_words, |top| {
            self.top.eval_key_into(key, top, probe);
            with_scratch(mid_words, |mid| {
                let mut acc = [0u64; 1];
                for j in 0..TOP_OUT_CHARS {
                    let y = extract_char(top, j, TOP_OUT_BITS);
                    self.middle.eval_key_into(y, mid, probe);
                    for t in 0..MIDDLE_OUT_CHARS {
                        let ch = extract_char(mid, t, CHAR_BITS);
                        self.bottom
                            .xor_entry((j * MIDDLE_OUT_CHARS + t) as usize, ch, &mut acc);
                    }
                    probe.lookups(u64::from(MIDDLE_OUT_CHARS));
                }
                acc[0]
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_tables_give_zero() {
        let t = TripleTabulation::zeroed(64).unwrap();
        for key in [0, 1, u64::MAX, 0xDEAD_BEEF_0123_4567] {
            assert_eq!(t.eval(key).unwrap(), 0);
        }
    }

    #[test]
    fn lookup_count_is_312() {
        let t = TripleTabulation::zeroed(64).unwrap();
        let mut n = LookupCounter::default();
        t.eval_counted(12345, &mut n).unwrap();
        assert_eq!(n.0, 4 + 14 * 2 + 280);
        assert_eq!(t.lookups_per_key(), 312);
    }

    #[test]
    fn lazy_is_deterministic_and_seeded() {
        let a = TripleTabulation::lazy(64, 7).unwrap();
        let b = TripleTabulation::lazy(64, 7).unwrap();
        let c = TripleTabulation::lazy(64, 8).unwrap();
        for key in [0u64, 99, u64::MAX] {
            assert_eq!(a.eval(key).unwrap(), b.eval(key).unwrap());
            assert_ne!(a.eval(key).unwrap(), c.eval(key).unwrap());
        }
    }

    #[test]
    fn parameters_match_construction() {
        let [top, middle, bottom] = triple_params(64).unwrap();
        assert_eq!(top.words(), 7);
        assert_eq!(middle.words(), 5);
        assert_eq!(bottom.in_char_count(), 280);
        // About 167 MB of tables in total.
        let total: u128 = [top, middle, bottom].iter().map(|p| p.table_bytes()).sum();
        assert_eq!(total, 4 * 65536 * 56 + 2 * 65536 * 40 + 280 * 65536 * 8);
        assert!(matches!(
            TripleTabulation::with_budget(64, 0, &MemoryBudget::new(1 << 20)),
            Err(crate::Error::Resource { .. })
        ));
    }
}
