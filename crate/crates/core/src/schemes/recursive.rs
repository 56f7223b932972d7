// SPDX-License-Identifier: Apache-2.0

//! Recursive tabulation.
//!
//! With `ℓ = ⌈lg c⌉ + 1` levels and `c' = 2^ℓ`, a key of `u = 2^key_bits` is
//! split into `c'` characters over `Φ = [u^{1/c'}]`. Level `i` maps
//! `c_(i) = c'/2^i` characters to `d_(i) = 12 c_(i)` characters over
//! `[u^{1/2^{i+1}}]`, each of which is a key for level `i + 1`. The last level
//! emits characters over `Φ` that index `D = Π d_(i)` independent bottom tables.
//! One function is shared by all invocations of a level.

use crate::budget::MemoryBudget;
use crate::error::{Error, Result};
use crate::keyspace::KeyCodec;
use crate::prng::derive_seed;
use crate::tabulation::{
    extract_char, LookupCounter, Probe, SimpleTabulation, TableSource, TabulationParams, MAX_IN_CHAR_BITS,
};

/// Output characters per input character on every level.
pub const LEVEL_EXPANSION: u32 = 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecursivePlan {
    c: u32,
    key_bits: u32,
    levels: u32,
    padded_chars: u32,
    char_bits: u32,
    level_in_chars: Vec<u32>,
    level_out_chars: Vec<u32>,
    level_out_bits: Vec<u32>,
    bottom_table_count: u64,
    target_uniqueness: u64,
}

impl RecursivePlan {
    /// Plans a recursion for keys of `key_bits` bits viewed as `c` characters.
    ///
    /// `key_bits` must split evenly into `c'` characters.
    pub fn new(c: u32, key_bits: u32) -> Result<Self> {
        if c == 0 {
            return Err(Error::domain("c must be positive"));
        }
        if !(1..=64).contains(&key_bits) {
            return Err(Error::domain(format!("key width {key_bits} outside 1..=64")));
        }
        let levels = c.next_power_of_two().trailing_zeros() + 1;
        let padded_chars = 1u32
            .checked_shl(levels)
            .filter(|&p| p <= 64)
            .ok_or_else(|| Error::domain(format!("c = {c} needs too many characters")))?;
        if key_bits % padded_chars != 0 {
            return Err(Error::domain(format!(
                "a {key_bits}-bit key does not split into {padded_chars} equal characters"
            )));
        }
        let char_bits = key_bits / padded_chars;
        if char_bits > MAX_IN_CHAR_BITS {
            return Err(Error::domain(format!(
                "{char_bits}-bit characters exceed the table limit"
            )));
        }
        let level_in_chars: Vec<u32> = (0..levels).map(|i| padded_chars >> i).collect();
        let level_out_chars: Vec<u32> = level_in_chars.iter().map(|&ci| LEVEL_EXPANSION * ci).collect();
        let level_out_bits: Vec<u32> = (0..levels).map(|i| key_bits >> (i + 1)).collect();
        let bottom_table_count = level_out_chars.iter().map(|&d| u64::from(d)).product();
        let target_uniqueness = integer_root_of_power_of_two(key_bits, 10 * padded_chars);
        Ok(RecursivePlan {
            c,
            key_bits,
            levels,
            padded_chars,
            char_bits,
            level_in_chars,
            level_out_chars,
            level_out_bits,
            bottom_table_count,
            target_uniqueness,
        })
    }

    pub fn c(&self) -> u32 {
        self.c
    }

    pub fn key_bits(&self) -> u32 {
        self.key_bits
    }

    /// `ℓ = ⌈lg c⌉ + 1`.
    pub fn levels(&self) -> u32 {
        self.levels
    }

    /// `c' = 2^ℓ`.
    pub fn padded_chars(&self) -> u32 {
        self.padded_chars
    }

    /// Bits of `Φ = [u^{1/c'}]`.
    pub fn char_bits(&self) -> u32 {
        self.char_bits
    }

    /// `c_(i) = c'/2^i`.
    pub fn level_in_chars(&self) -> &[u32] {
        &self.level_in_chars
    }

    /// `d_(i) = 12 c_(i)`.
    pub fn level_out_chars(&self) -> &[u32] {
        &self.level_out_chars
    }

    /// Bits of `Ψ_(i) = [u^{1/2^{i+1}}]`.
    pub fn level_out_bits(&self) -> &[u32] {
        &self.level_out_bits
    }

    /// `D = Π d_(i)`.
    pub fn bottom_table_count(&self) -> u64 {
        self.bottom_table_count
    }

    /// `⌊u^{1/(10c')}⌋`.
    pub fn target_uniqueness(&self) -> u64 {
        self.target_uniqueness
    }

    pub fn level_params(&self, level: usize) -> Result<TabulationParams> {
        TabulationParams::new(
            self.char_bits,
            self.level_in_chars[level],
            self.level_out_bits[level],
            self.level_out_chars[level],
        )
    }

    pub fn bottom_params(&self, r_bits: u32) -> Result<TabulationParams> {
        let count =
            u32::try_from(self.bottom_table_count).map_err(|_| Error::domain("too many bottom tables"))?;
        TabulationParams::new(self.char_bits, count, r_bits, 1)
    }

    /// Memory needed by all level functions and the bottom tables.
    pub fn table_bytes(&self, r_bits: u32) -> Result<u128> {
        let mut total = self.bottom_params(r_bits)?.table_bytes();
        for i in 0..self.levels as usize {
            total += self.level_params(i)?.table_bytes();
        }
        Ok(total)
    }

    /// Number of times level `i` is invoked per key: `Π_{j<i} d_(j)`.
    pub fn level_invocations(&self, level: usize) -> u64 {
        self.level_out_chars[..level]
            .iter()
            .map(|&d| u64::from(d))
            .product()
    }

    /// Table lookups per key: `Σ_i invocations(i) * c_(i) + D`.
    pub fn predicted_lookups(&self) -> u64 {
        (0..self.levels as usize)
            .map(|i| self.level_invocations(i) * u64::from(self.level_in_chars[i]))
            .sum::<u64>()
            + self.bottom_table_count
    }
}

/// `⌊2^(bits/root)⌋`: the largest `k` with `k^root ≤ 2^bits`.
fn integer_root_of_power_of_two(bits: u32, root: u32) -> u64 {
    let fits = |k: u64| -> bool {
        let mut acc: u128 = 1;
        for _ in 0..root {
            acc = match acc.checked_mul(u128::from(k)) {
                Some(v) if v <= 1u128 << bits => v,
                _ => return false,
            };
        }
        true
    };
    let (mut lo, mut hi) = (1u64, 1u64 << (bits / root + 1).min(63));
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        if fits(mid) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    lo
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecursiveTabulation {
    plan: RecursivePlan,
    seed: u64,
    levels: Vec<SimpleTabulation>,
    bottom: SimpleTabulation,
}

impl RecursiveTabulation {
    pub fn new(plan: RecursivePlan, r_bits: u32, seed: u64) -> Result<Self> {
        Self::with_budget(plan, r_bits, seed, &MemoryBudget::default())
    }

    pub fn with_budget(plan: RecursivePlan, r_bits: u32, seed: u64, budget: &MemoryBudget) -> Result<Self> {
        budget.check("recursive tabulation tables", plan.table_bytes(r_bits)?)?;
        let unlimited = MemoryBudget::unlimited();
        let levels = (0..plan.levels())
            .map(|i| {
                SimpleTabulation::generate_with_budget(
                    plan.level_params(i as usize)?,
                    derive_seed(seed, i, 0),
                    &unlimited,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let bottom = SimpleTabulation::generate_with_budget(
            plan.bottom_params(r_bits)?,
            derive_seed(seed, plan.levels(), 1),
            &unlimited,
        )?;
        Ok(RecursiveTabulation {
            plan,
            seed,
            levels,
            bottom,
        })
    }

    pub(crate) fn from_parts(
        c: u32,
        key_bits: u32,
        seed: u64,
        levels: Vec<SimpleTabulation>,
        bottom: SimpleTabulation,
    ) -> Result<Self> {
        let plan = RecursivePlan::new(c, key_bits)?;
        if levels.len() != plan.levels() as usize {
            return Err(Error::domain("wrong number of recursion levels"));
        }
        for (i, level) in levels.iter().enumerate() {
            if *level.params() != plan.level_params(i)? {
                return Err(Error::domain(format!("level {i} does not match the plan")));
            }
        }
        if *bottom.params() != plan.bottom_params(bottom.params().out_char_bits())? {
            return Err(Error::domain("bottom tables do not match the plan"));
        }
        Ok(RecursiveTabulation {
            plan,
            seed,
            levels,
            bottom,
        })
    }

    pub fn plan(&self) -> &RecursivePlan {
        &self.plan
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn level(&self, i: usize) -> &SimpleTabulation {
        &self.levels[i]
    }

    pub fn bottom(&self) -> &SimpleTabulation {
        &self.bottom
    }

    pub fn codec(&self) -> KeyCodec {
        KeyCodec::new(self.plan.char_bits(), self.plan.padded_chars()).expect("plan codec")
    }

    pub fn output_bits(&self) -> u32 {
        self.bottom.params().out_char_bits()
    }

    pub fn lookups_per_key(&self) -> u64 {
        self.plan.predicted_lookups()
    }

    pub fn eval(&self, key: u64) -> Result<u64> {
        self.codec().check_key(key)?;
        Ok(self.eval_unchecked(key, &mut ()))
    }

    pub fn eval_counted(&self, key: u64, counter: &mut LookupCounter) -> Result<u64> {
        self.codec().check_key(key)?;
        Ok(self.eval_unchecked(key, counter))
    }

    pub(crate) fn eval_unchecked<P: Probe>(&self, key: u64, probe: &mut P) -> u64 {
        let mut scratch: Vec<Vec<u64>> = self
            .levels
            .iter()
            .map(|l| vec![0u64; l.params().words()])
            .collect();
        let mut acc = [0u64; 1];
        self.descend(0, key, 0, &mut scratch, &mut acc, probe);
        acc[0]
    }

    /// Depth-first: the bottom table index is `Σ t_i * Π_{j>i} d_(j)` where
    /// `t_i` is the output position taken on level `i`. `scratch[0]` belongs
    /// to `level`.
    fn descend<P: Probe>(
        &self,
        level: usize,
        key: u64,
        base: u64,
        scratch: &mut [Vec<u64>],
        acc: &mut [u64],
        probe: &mut P,
    ) {
        let (buf, rest) = scratch.split_first_mut().expect("scratch per level");
        self.levels[level].eval_key_into(key, buf, probe);
        let out_bits = self.plan.level_out_bits[level];
        let out_chars = self.plan.level_out_chars[level];
        let last = level + 1 == self.levels.len();
        let stride: u64 = self.plan.level_out_chars[level + 1..]
            .iter()
            .map(|&d| u64::from(d))
            .product();
        for t in 0..out_chars {
            let ch = extract_char(buf, t, out_bits);
            let index = base + u64::from(t) * stride;
            if last {
                self.bottom.xor_entry(index as usize, ch, acc);
                probe.lookups(1);
            } else {
                self.descend(level + 1, ch, index, rest, acc, probe);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_arithmetic() {
        let p = RecursivePlan::new(3, 64).unwrap();
        assert_eq!(p.levels(), 3);
        assert_eq!(p.padded_chars(), 8);
        assert_eq!(p.level_in_chars(), &[8, 4, 2]);
        assert_eq!(p.level_out_chars(), &[96, 48, 24]);
        assert_eq!(p.bottom_table_count(), 110_592);
        assert_eq!(p.char_bits(), 8);
        assert_eq!(p.level_out_bits(), &[32, 16, 8]);

        let p = RecursivePlan::new(2, 64).unwrap();
        assert_eq!((p.levels(), p.padded_chars()), (2, 4));
        assert_eq!(p.level_in_chars(), &[4, 2]);
        assert_eq!(p.level_out_chars(), &[48, 24]);
        assert_eq!(p.bottom_table_count(), 1152);

        let p = RecursivePlan::new(1, 64).unwrap();
        assert_eq!((p.levels(), p.padded_chars()), (1, 2));
        assert_eq!(p.level_in_chars(), &[2]);
        assert_eq!(p.level_out_chars(), &[24]);
        assert_eq!(p.bottom_table_count(), 24);
    }

    #[test]
    fn plan_rejects_uneven_split() {
        assert!(RecursivePlan::new(3, 12).is_err());
        assert!(RecursivePlan::new(0, 64).is_err());
        assert!(RecursivePlan::new(2, 0).is_err());
        assert!(RecursivePlan::new(2, 65).is_err());
        assert!(RecursivePlan::new(64, 64).is_err());
    }

    #[test]
    fn last_level_emits_base_characters() {
        for (c, bits) in [(1, 8), (2, 16), (3, 64), (4, 32), (5, 64)] {
            let p = RecursivePlan::new(c, bits).unwrap();
            assert_eq!(*p.level_in_chars().last().unwrap(), 2);
            assert_eq!(*p.level_out_bits().last().unwrap(), p.char_bits());
            for i in 0..p.levels() as usize - 1 {
                // Each output character is a next-level key.
                assert_eq!(p.level_out_bits()[i], p.level_in_chars()[i + 1] * p.char_bits());
            }
        }
    }

    #[test]
    fn target_uniqueness_is_floor_root() {
        // 2^(64/80) = 2^0.8 -> 1
        assert_eq!(RecursivePlan::new(3, 64).unwrap().target_uniqueness(), 1);
        assert_eq!(integer_root_of_power_of_two(40, 10), 16);
        assert_eq!(integer_root_of_power_of_two(32, 20), 3);
        assert_eq!(integer_root_of_power_of_two(64, 2), 1 << 32);
        assert_eq!(integer_root_of_power_of_two(63, 1), 1 << 63);
    }

    #[test]
    fn predicted_lookups() {
        let p = RecursivePlan::new(3, 64).unwrap();
        assert_eq!(p.level_invocations(0), 1);
        assert_eq!(p.level_invocations(2), 96 * 48);
        assert_eq!(p.predicted_lookups(), 8 + 96 * 4 + 96 * 48 * 2 + 110_592);
    }

    #[test]
    fn full_size_within_budget_only() {
        let p = RecursivePlan::new(3, 64).unwrap();
        // 110592 tables of 256 entries dominate.
        assert!(p.table_bytes(64).unwrap() > 110_592 * 256 * 8);
        assert!(matches!(
            RecursiveTabulation::with_budget(p, 64, 0, &MemoryBudget::new(1 << 24)),
            Err(Error::Resource { .. })
        ));
    }

    #[test]
    fn counted_lookups_match_plan() {
        let p = RecursivePlan::new(2, 16).unwrap();
        let rt = RecursiveTabulation::new(p.clone(), 32, 5).unwrap();
        let mut n = LookupCounter::default();
        rt.eval_counted(0xBEEF, &mut n).unwrap();
        assert_eq!(n.0, p.predicted_lookups());
        assert!(rt.eval(1 << 16).is_err());
    }
}
