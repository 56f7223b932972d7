// SPDX-License-Identifier: Apache-2.0

//! Double tabulation `r ∘ h`: a simple tabulation `h: Φ^c → Ψ^d` whose output
//! characters are hashed by a second, independent simple tabulation
//! `r: Ψ^d → R`. If `h` is k-unique then `r ∘ h` is k-independent.

use crate::budget::MemoryBudget;
use crate::error::{Error, Result};
use crate::keyspace::KeyCodec;
use crate::prng::derive_seed;
use crate::tabulation::{
    LazyTabulation, LookupCounter, Probe, SimpleTabulation, TableSource, TabulationParams,
};

use super::{with_scratch, Preset};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DoubleTabulation<S = SimpleTabulation, T = S> {
    codec: KeyCodec,
    seed: u64,
    first: S,
    second: T,
}

/// Parameters of both levels of a double tabulation.
pub fn double_params(
    codec: KeyCodec,
    d: u32,
    psi_bits: u32,
    r_bits: u32,
) -> Result<(TabulationParams, TabulationParams)> {
    if !(1..=64).contains(&r_bits) {
        return Err(Error::domain(format!("hash width {r_bits} outside 1..=64")));
    }
    let first = TabulationParams::for_codec(codec, psi_bits, d)?;
    let second = TabulationParams::new(psi_bits, d, r_bits, 1)?;
    Ok((first, second))
}

impl DoubleTabulation {
    pub fn new(codec: KeyCodec, d: u32, psi_bits: u32, r_bits: u32, seed: u64) -> Result<Self> {
        Self::with_budget(codec, d, psi_bits, r_bits, seed, &MemoryBudget::default())
    }

    pub fn with_budget(
        codec: KeyCodec,
        d: u32,
        psi_bits: u32,
        r_bits: u32,
        seed: u64,
        budget: &MemoryBudget,
    ) -> Result<Self> {
        let (p1, p2) = double_params(codec, d, psi_bits, r_bits)?;
        budget.check("double tabulation tables", p1.table_bytes() + p2.table_bytes())?;
        let unlimited = MemoryBudget::unlimited();
        Ok(DoubleTabulation {
            codec,
            seed,
            first: SimpleTabulation::generate_with_budget(p1, derive_seed(seed, 0, 0), &unlimited)?,
            second: SimpleTabulation::generate_with_budget(p2, derive_seed(seed, 1, 0), &unlimited)?,
        })
    }

    /// One of the two double-tabulation presets, hashing to `r_bits` bits.
    pub fn preset(preset: Preset, r_bits: u32, seed: u64, budget: &MemoryBudget) -> Result<Self> {
        let (codec, d, psi_bits) = preset.first_level()?;
        if preset == Preset::Triple64x4 {
            return Err(Error::domain("preset 64-4-triple is a triple tabulation"));
        }
        Self::with_budget(codec, d, psi_bits, r_bits, seed, budget)
    }
}

impl DoubleTabulation<LazyTabulation> {
    /// A double tabulation that recomputes table entries on demand.
    ///
    /// Hashes identically to [`DoubleTabulation::new`] with the same arguments
    /// while using no table memory.
    pub fn lazy(codec: KeyCodec, d: u32, psi_bits: u32, r_bits: u32, seed: u64) -> Result<Self> {
        let (p1, p2) = double_params(codec, d, psi_bits, r_bits)?;
        Ok(DoubleTabulation {
            codec,
            seed,
            first: LazyTabulation::new(p1, derive_seed(seed, 0, 0)),
            second: LazyTabulation::new(p2, derive_seed(seed, 1, 0)),
        })
    }
}

impl<S: TableSource, T: TableSource> DoubleTabulation<S, T> {
    /// Composes two levels. The second level must take the first level's
    /// output characters as input and produce one character of at most 64 bits.
    pub fn from_parts(first: S, second: T, seed: u64) -> Result<Self> {
        let (p1, p2) = (*first.params(), *second.params());
        let codec = p1.input_codec()?;
        if p2.in_char_bits() != p1.out_char_bits() || p2.in_char_count() != p1.out_char_count() {
            return Err(Error::domain(format!(
                "second level expects {} characters of {} bits, first level emits {} of {} bits",
                p2.in_char_count(),
                p2.in_char_bits(),
                p1.out_char_count(),
                p1.out_char_bits()
            )));
        }
        if p2.out_char_count() != 1 || p2.out_char_bits() > 64 {
            return Err(Error::domain(
                "second level must emit one character of at most 64 bits",
            ));
        }
        Ok(DoubleTabulation {
            codec,
            seed,
            first,
            second,
        })
    }

    pub fn codec(&self) -> KeyCodec {
        self.codec
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn first(&self) -> &S {
        &self.first
    }

    pub fn second(&self) -> &T {
        &self.second
    }

    pub fn output_bits(&self) -> u32 {
        self.second.params().out_char_bits()
    }

    /// `c + d`.
    pub fn lookups_per_key(&self) -> u64 {
        u64::from(self.first.params().in_char_count() + self.first.params().out_char_count())
    }

    pub fn eval(&self, key: u64) -> Result<u64> {
        self.codec.check_key(key)?;
        Ok(self.eval_unchecked(key, &mut ()))
    }

    pub fn eval_counted(&self, key: u64, counter: &mut LookupCounter) -> Result<u64> {
        self.codec.check_key(key)?;
        Ok(self.eval_unchecked(key, counter))
    }

    pub(crate) fn eval_unchecked<P: Probe>(&self, key: u64, probe: &mut P) -> u64 {
        let words = self.first.params().words();
        with_scratch(words, |mid| {
            self.first.eval_key_into(key, mid, probe);
            self.second.eval_packed_word(mid, probe)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn codec(b: u32, c: u32) -> KeyCodec {
        KeyCodec::new(b, c).unwrap()
    }

    #[test]
    fn zero_tables_give_zero() {
        let (p1, p2) = double_params(codec(4, 2), 6, 4, 32).unwrap();
        let dt = DoubleTabulation::from_parts(SimpleTabulation::zeroed(p1), SimpleTabulation::zeroed(p2), 0)
            .unwrap();
        for key in 0..256 {
            assert_eq!(dt.eval(key).unwrap(), 0);
        }
    }

    #[test]
    fn composition_matches_levels() {
        let dt = DoubleTabulation::new(codec(8, 3), 10, 8, 64, 42).unwrap();
        for key in (0..1u64 << 24).step_by(1 << 10) {
            let mid = dt.first().eval(key).unwrap();
            let chars: Vec<u64> = (0..10)
                .map(|j| crate::tabulation::extract_char(&mid, j, 8))
                .collect();
            let expect = dt.second().eval_chars(&chars).unwrap()[0];
            assert_eq!(dt.eval(key).unwrap(), expect);
        }
    }

    #[test]
    fn mismatched_levels_rejected() {
        let p1 = TabulationParams::new(4, 2, 4, 6).unwrap();
        let bad = [
            TabulationParams::new(5, 6, 32, 1).unwrap(),
            TabulationParams::new(4, 5, 32, 1).unwrap(),
            TabulationParams::new(4, 6, 32, 2).unwrap(),
        ];
        for p2 in bad {
            assert!(DoubleTabulation::from_parts(
                SimpleTabulation::zeroed(p1),
                SimpleTabulation::zeroed(p2),
                0
            )
            .is_err());
        }
        assert!(double_params(codec(4, 2), 6, 4, 0).is_err());
        assert!(double_params(codec(4, 2), 6, 4, 65).is_err());
    }

    #[test]
    fn out_of_range_key() {
        let dt = DoubleTabulation::new(codec(4, 2), 4, 4, 16, 1).unwrap();
        assert!(dt.eval(256).is_err());
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let a = DoubleTabulation::new(codec(6, 2), 8, 6, 64, 9).unwrap();
        let b = DoubleTabulation::new(codec(6, 2), 8, 6, 64, 9).unwrap();
        let c = DoubleTabulation::new(codec(6, 2), 8, 6, 64, 10).unwrap();
        assert_eq!(a, b);
        assert!((0..4096).any(|k| a.eval(k).unwrap() != c.eval(k).unwrap()));
    }

    #[test]
    fn lazy_matches_materialized() {
        let dt = DoubleTabulation::new(codec(10, 2), 12, 10, 48, 3).unwrap();
        let lazy = DoubleTabulation::lazy(codec(10, 2), 12, 10, 48, 3).unwrap();
        for key in (0..1u64 << 20).step_by(4099) {
            assert_eq!(dt.eval(key).unwrap(), lazy.eval(key).unwrap());
        }
    }

    #[test]
    fn counts_c_plus_d_lookups() {
        let dt = DoubleTabulation::new(codec(4, 3), 7, 4, 64, 0).unwrap();
        let mut n = LookupCounter::default();
        dt.eval_counted(5, &mut n).unwrap();
        assert_eq!(n.0, 10);
        assert_eq!(dt.lookups_per_key(), 10);
    }
}
