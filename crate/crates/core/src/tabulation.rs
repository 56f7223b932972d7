// SPDX-License-Identifier: Apache-2.0

//! Simple tabulation: `h(x) = h_0[x_0] ^ h_1[x_1] ^ ... ^ h_{c-1}[x_{c-1}]`.
//!
//! Each table entry is a packed vector of `d` output characters. Output
//! character `j` occupies bits `[j*b_out, (j+1)*b_out)` of a little-endian
//! sequence of 64-bit words, so XOR of whole vectors is word-wise XOR.

use crate::budget::MemoryBudget;
use crate::error::{Error, ParseError, Result};
use crate::keyspace::{low_mask, KeyCodec, PositionCharSet};
use crate::prng::{self, GeneratorId};
use crate::wire::{Reader, Writer};

pub const HTAB_MAGIC: [u8; 4] = *b"HTAB";
pub const HTAB_VERSION: u8 = 1;

/// Largest supported input character width. Tables hold `2^in_char_bits` entries.
pub const MAX_IN_CHAR_BITS: u32 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TabulationParams {
    in_char_bits: u32,
    in_char_count: u32,
    out_char_bits: u32,
    out_char_count: u32,
}

impl TabulationParams {
    pub fn new(
        in_char_bits: u32,
        in_char_count: u32,
        out_char_bits: u32,
        out_char_count: u32,
    ) -> Result<Self> {
        if !(1..=MAX_IN_CHAR_BITS).contains(&in_char_bits) {
            return Err(Error::domain(format!(
                "input character width {in_char_bits} outside 1..={MAX_IN_CHAR_BITS}"
            )));
        }
        if in_char_count == 0 || out_char_count == 0 {
            return Err(Error::domain("character counts must be positive"));
        }
        if !(1..=64).contains(&out_char_bits) {
            return Err(Error::domain(format!(
                "output character width {out_char_bits} outside 1..=64"
            )));
        }
        Ok(TabulationParams {
            in_char_bits,
            in_char_count,
            out_char_bits,
            out_char_count,
        })
    }

    /// Parameters for a function on keys of `codec`.
    pub fn for_codec(codec: KeyCodec, out_char_bits: u32, out_char_count: u32) -> Result<Self> {
        Self::new(
            codec.char_bits(),
            codec.char_count(),
            out_char_bits,
            out_char_count,
        )
    }

    pub fn in_char_bits(&self) -> u32 {
        self.in_char_bits
    }

    /// `c`, the number of tables.
    pub fn in_char_count(&self) -> u32 {
        self.in_char_count
    }

    pub fn out_char_bits(&self) -> u32 {
        self.out_char_bits
    }

    /// `d`, the number of output characters per entry.
    pub fn out_char_count(&self) -> u32 {
        self.out_char_count
    }

    /// The key codec, when the input fits in one 64-bit word.
    pub fn input_codec(&self) -> Result<KeyCodec> {
        KeyCodec::new(self.in_char_bits, self.in_char_count)
    }

    pub fn output_bits(&self) -> u64 {
        u64::from(self.out_char_bits) * u64::from(self.out_char_count)
    }

    /// 64-bit words per packed output vector.
    pub fn words(&self) -> usize {
        self.output_bits().div_ceil(64) as usize
    }

    /// Serialized bytes per table entry.
    pub fn entry_bytes(&self) -> usize {
        self.output_bits().div_ceil(8) as usize
    }

    /// Mask applied to the most significant word of every entry.
    pub fn top_mask(&self) -> u64 {
        match self.output_bits() % 64 {
            0 => u64::MAX,
            r => low_mask(r as u32),
        }
    }

    pub fn table_len(&self) -> u64 {
        1 << self.in_char_bits
    }

    /// In-memory size of all tables.
    pub fn table_bytes(&self) -> u128 {
        u128::from(self.in_char_count) * u128::from(self.table_len()) * self.words() as u128 * 8
    }
}

/// Reads output character `j` of width `bits` out of a packed vector.
#[inline]
pub fn extract_char(packed: &[u64], j: u32, bits: u32) -> u64 {
    let start = u64::from(j) * u64::from(bits);
    let word = (start / 64) as usize;
    let shift = (start % 64) as u32;
    let mut v = packed[word] >> shift;
    if shift + bits > 64 {
        v |= packed[word + 1] << (64 - shift);
    }
    v & low_mask(bits)
}

/// Writes output character `j` of width `bits` into a packed vector.
pub fn insert_char(packed: &mut [u64], j: u32, bits: u32, value: u64) {
    let start = u64::from(j) * u64::from(bits);
    let word = (start / 64) as usize;
    let shift = (start % 64) as u32;
    let value = value & low_mask(bits);
    packed[word] = (packed[word] & !(low_mask(bits) << shift)) | (value << shift);
    if shift + bits > 64 {
        let spill = shift + bits - 64;
        let hi = value >> (64 - shift);
        packed[word + 1] = (packed[word + 1] & !low_mask(spill)) | hi;
    }
}

/// Receives the number of table lookups performed by an evaluation.
pub trait Probe {
    fn lookups(&mut self, n: u64);
}

impl Probe for () {
    #[inline(always)]
    fn lookups(&mut self, _: u64) {}
}

/// Counts table lookups.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct LookupCounter(pub u64);

impl Probe for LookupCounter {
    fn lookups(&mut self, n: u64) {
        self.0 += n;
    }
}

/// Anything that can serve table entries of a simple tabulation function.
pub trait TableSource {
    fn params(&self) -> &TabulationParams;

    /// XORs entry `ch` of table `table` into `acc`.
    fn xor_entry(&self, table: usize, ch: u64, acc: &mut [u64]);

    /// Evaluates on a character vector. Characters must already be in range.
    fn eval_chars_into<P: Probe>(&self, chars: &[u64], acc: &mut [u64], probe: &mut P) {
        acc.fill(0);
        for (i, &ch) in chars.iter().enumerate() {
            self.xor_entry(i, ch, acc);
        }
        probe.lookups(chars.len() as u64);
    }

    /// Evaluates with input characters read from a packed vector of `in_char_bits`-wide characters.
    fn eval_packed_into<P: Probe>(&self, input: &[u64], acc: &mut [u64], probe: &mut P) {
        let p = *self.params();
        acc.fill(0);
        for i in 0..p.in_char_count() {
            let ch = extract_char(input, i, p.in_char_bits());
            self.xor_entry(i as usize, ch, acc);
        }
        probe.lookups(u64::from(p.in_char_count()));
    }

    /// [`Self::eval_packed_into`] for outputs of one word.
    fn eval_packed_word<P: Probe>(&self, input: &[u64], probe: &mut P) -> u64 {
        let mut out = [0u64; 1];
        self.eval_packed_into(input, &mut out, probe);
        out[0]
    }

    /// Evaluates on a key of at most 64 bits.
    fn eval_key_into<P: Probe>(&self, key: u64, acc: &mut [u64], probe: &mut P) {
        let p = *self.params();
        let b = p.in_char_bits();
        let mask = low_mask(b);
        acc.fill(0);
        for i in 0..p.in_char_count() {
            self.xor_entry(i as usize, (key >> (i * b)) & mask, acc);
        }
        probe.lookups(u64::from(p.in_char_count()));
    }
}

/// A simple tabulation function with materialized tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleTabulation {
    params: TabulationParams,
    seed: u64,
    generator: GeneratorId,
    words: usize,
    /// Table `i`, entry `a` lives at `(i * 2^b + a) * words`.
    tables: Vec<u64>,
}

impl SimpleTabulation {
    /// Generates tables from `seed` under the default 1 GiB budget.
    pub fn generate(params: TabulationParams, seed: u64) -> Result<Self> {
        Self::generate_with_budget(params, seed, &MemoryBudget::default())
    }

    pub fn generate_with_budget(params: TabulationParams, seed: u64, budget: &MemoryBudget) -> Result<Self> {
        budget.check("simple tabulation tables", params.table_bytes())?;
        let words = params.words();
        let per_table = params.table_len() as usize * words;
        let mut tables = vec![0u64; per_table * params.in_char_count() as usize];
        for (i, table) in tables.chunks_exact_mut(per_table).enumerate() {
            prng::fill_table(seed, i as u64, words, params.top_mask(), table);
        }
        Ok(SimpleTabulation {
            params,
            seed,
            generator: GeneratorId::CURRENT,
            words,
            tables,
        })
    }

    /// Builds a function from explicit tables, laid out table-major.
    ///
    /// `tables[i][a]` is the packed entry for character `a` in position `i`.
    pub fn from_tables(params: TabulationParams, tables: &[Vec<Vec<u64>>]) -> Result<Self> {
        let words = params.words();
        if tables.len() != params.in_char_count() as usize {
            return Err(Error::domain(format!(
                "expected {} tables, got {}",
                params.in_char_count(),
                tables.len()
            )));
        }
        let mut flat = Vec::with_capacity(params.table_bytes() as usize / 8);
        for (i, table) in tables.iter().enumerate() {
            if table.len() as u64 != params.table_len() {
                return Err(Error::domain(format!(
                    "table {i} has {} entries, expected {}",
                    table.len(),
                    params.table_len()
                )));
            }
            for entry in table {
                if entry.len() != words || entry[words - 1] & !params.top_mask() != 0 {
                    return Err(Error::domain(format!(
                        "table {i} has an entry outside the packed output width"
                    )));
                }
                flat.extend_from_slice(entry);
            }
        }
        Ok(SimpleTabulation {
            params,
            seed: 0,
            generator: GeneratorId::CURRENT,
            words,
            tables: flat,
        })
    }

    /// All-zero tables.
    pub fn zeroed(params: TabulationParams) -> Self {
        let words = params.words();
        SimpleTabulation {
            params,
            seed: 0,
            generator: GeneratorId::CURRENT,
            words,
            tables: vec![0; (params.table_bytes() / 8) as usize],
        }
    }

    pub fn params(&self) -> &TabulationParams {
        &self.params
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn generator(&self) -> GeneratorId {
        self.generator
    }

    pub fn entry(&self, table: usize, ch: u64) -> &[u64] {
        let at = (table * self.params.table_len() as usize + ch as usize) * self.words;
        &self.tables[at..at + self.words]
    }

    fn check_key(&self, key: u64) -> Result<()> {
        self.params.input_codec()?.check_key(key)
    }

    /// `h(key)` as a packed output vector.
    pub fn eval(&self, key: u64) -> Result<Vec<u64>> {
        let mut out = vec![0; self.words];
        self.eval_into(key, &mut out)?;
        Ok(out)
    }

    pub fn eval_into(&self, key: u64, out: &mut [u64]) -> Result<()> {
        self.check_key(key)?;
        self.eval_key_into(key, out, &mut ());
        Ok(())
    }

    /// `h(key)` for outputs of at most 64 bits.
    pub fn eval_u64(&self, key: u64) -> Result<u64> {
        if self.words != 1 {
            return Err(Error::domain("output wider than 64 bits"));
        }
        self.check_key(key)?;
        Ok(self.eval_word_unchecked(key))
    }

    /// Single-word fast path. `key` must be in range and output one word wide.
    #[inline]
    pub(crate) fn eval_word_unchecked(&self, key: u64) -> u64 {
        let b = self.params.in_char_bits();
        let len = self.params.table_len() as usize;
        let mask = low_mask(b);
        let mut acc = 0;
        for i in 0..self.params.in_char_count() as usize {
            let ch = ((key >> (i as u32 * b)) & mask) as usize;
            acc ^= self.tables[i * len + ch];
        }
        acc
    }

    /// Evaluation that also counts table lookups.
    pub fn eval_counted(&self, key: u64, counter: &mut LookupCounter) -> Result<Vec<u64>> {
        self.check_key(key)?;
        let mut out = vec![0; self.words];
        self.eval_key_into(key, &mut out, counter);
        Ok(out)
    }

    /// Evaluates on a character vector of any length `c`.
    pub fn eval_chars(&self, chars: &[u64]) -> Result<Vec<u64>> {
        if chars.len() != self.params.in_char_count() as usize {
            return Err(Error::domain(format!(
                "expected {} characters, got {}",
                self.params.in_char_count(),
                chars.len()
            )));
        }
        if let Some(bad) = chars.iter().find(|&&ch| ch >= self.params.table_len()) {
            return Err(Error::domain(format!("character {bad:#x} out of range")));
        }
        let mut out = vec![0; self.words];
        self.eval_chars_into(chars, &mut out, &mut ());
        Ok(out)
    }

    /// `h(S) = XOR of h_i[a]` over `(i, a)` in `S`. `h(∅) = 0`.
    pub fn eval_set(&self, set: &PositionCharSet) -> Result<Vec<u64>> {
        let mut out = vec![0; self.words];
        for pc in set.iter() {
            if pc.position >= self.params.in_char_count() || pc.character >= self.params.table_len() {
                return Err(Error::domain(format!(
                    "position character ({}, {:#x}) out of range",
                    pc.position, pc.character
                )));
            }
            self.xor_entry(pc.position as usize, pc.character, &mut out);
        }
        Ok(out)
    }

    pub fn serialize(&self) -> Vec<u8> {
        let p = &self.params;
        let entry_bytes = p.entry_bytes();
        let mut w =
            Writer::with_capacity(32 + p.in_char_count() as usize * p.table_len() as usize * entry_bytes);
        w.bytes(&HTAB_MAGIC);
        w.u8(HTAB_VERSION);
        w.u8(self.generator as u8);
        w.bytes(&[0, 0]);
        w.u32(p.in_char_bits());
        w.u32(p.in_char_count());
        w.u32(p.out_char_bits());
        w.u32(p.out_char_count());
        w.u64(self.seed);
        let mut bytes = Vec::with_capacity(self.words * 8);
        for entry in self.tables.chunks_exact(self.words) {
            bytes.clear();
            for word in entry {
                bytes.extend_from_slice(&word.to_le_bytes());
            }
            w.bytes(&bytes[..entry_bytes]);
        }
        w.finish()
    }

    pub fn deserialize(bytes: &[u8]) -> Result<Self> {
        Self::deserialize_with_budget(bytes, &MemoryBudget::default())
    }

    pub fn deserialize_with_budget(bytes: &[u8], budget: &MemoryBudget) -> Result<Self> {
        let mut r = Reader::checked(bytes, HTAB_MAGIC)?;
        let value = Self::read_body(&mut r, budget)?;
        r.expect_end()?;
        Ok(value)
    }

    fn read_body(r: &mut Reader<'_>, budget: &MemoryBudget) -> Result<Self> {
        let version = r.u8()?;
        if version != HTAB_VERSION {
            return Err(ParseError::UnsupportedVersion(version).into());
        }
        let generator = GeneratorId::try_from(r.u8()?)?;
        r.take(2)?;
        let (b, c, ob, d) = (r.u32()?, r.u32()?, r.u32()?, r.u32()?);
        let params = TabulationParams::new(b, c, ob, d)
            .map_err(|e| ParseError::Malformed(format!("bad parameters: {e}")))?;
        let seed = r.u64()?;
        let entries = u128::from(c) * u128::from(params.table_len());
        let entry_bytes = params.entry_bytes();
        let body = entries * entry_bytes as u128;
        if body != r.remaining() as u128 {
            return Err(ParseError::Malformed(format!(
                "table body is {} bytes, expected {body}",
                r.remaining()
            ))
            .into());
        }
        budget.check("simple tabulation tables", params.table_bytes())?;
        let words = params.words();
        let mut tables = Vec::with_capacity(entries as usize * words);
        let mut buf = vec![0u8; words * 8];
        for _ in 0..entries {
            buf.fill(0);
            buf[..entry_bytes].copy_from_slice(r.take(entry_bytes)?);
            let start = tables.len();
            tables.extend(
                buf.chunks_exact(8)
                    .map(|b| u64::from_le_bytes(b.try_into().unwrap())),
            );
            if tables[start + words - 1] & !params.top_mask() != 0 {
                return Err(ParseError::Malformed("entry exceeds output width".into()).into());
            }
        }
        Ok(SimpleTabulation {
            params,
            seed,
            generator,
            words,
            tables,
        })
    }
}

impl TableSource for SimpleTabulation {
    fn params(&self) -> &TabulationParams {
        &self.params
    }

    #[inline]
    fn xor_entry(&self, table: usize, ch: u64, acc: &mut [u64]) {
        let at = (table * self.params.table_len() as usize + ch as usize) * self.words;
        for (a, t) in acc.iter_mut().zip(&self.tables[at..at + self.words]) {
            *a ^= t;
        }
    }

    #[inline]
    fn eval_packed_word<P: Probe>(&self, input: &[u64], probe: &mut P) -> u64 {
        if self.words != 1 {
            let mut out = [0u64; 1];
            self.eval_packed_into(input, &mut out, probe);
            return out[0];
        }
        let b = self.params.in_char_bits();
        let len = self.params.table_len() as usize;
        let c = self.params.in_char_count();
        let mut acc = 0;
        for i in 0..c {
            acc ^= self.tables[i as usize * len + extract_char(input, i, b) as usize];
        }
        probe.lookups(u64::from(c));
        acc
    }
}

/// A simple tabulation function whose entries are recomputed from the
/// generator on every lookup. Agrees exactly with [`SimpleTabulation::generate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LazyTabulation {
    params: TabulationParams,
    seed: u64,
}

impl LazyTabulation {
    pub fn new(params: TabulationParams, seed: u64) -> Self {
        LazyTabulation { params, seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl TableSource for LazyTabulation {
    fn params(&self) -> &TabulationParams {
        &self.params
    }

    fn xor_entry(&self, table: usize, ch: u64, acc: &mut [u64]) {
        let mut entry = [0u64; 16];
        let words = self.params.words();
        let mut heap;
        let entry: &mut [u64] = if words <= entry.len() {
            &mut entry[..words]
        } else {
            heap = vec![0u64; words];
            &mut heap
        };
        prng::table_entry(self.seed, table as u64, ch, self.params.top_mask(), entry);
        for (a, t) in acc.iter_mut().zip(entry.iter()) {
            *a ^= t;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keyspace::PositionChar;
    use proptest::prelude::*;

    fn params(b: u32, c: u32, ob: u32, d: u32) -> TabulationParams {
        TabulationParams::new(b, c, ob, d).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(TabulationParams::new(0, 2, 8, 1).is_err());
        assert!(TabulationParams::new(33, 2, 8, 1).is_err());
        assert!(TabulationParams::new(8, 0, 8, 1).is_err());
        assert!(TabulationParams::new(8, 2, 0, 1).is_err());
        assert!(TabulationParams::new(8, 2, 65, 1).is_err());
        let p = params(16, 2, 16, 20);
        assert_eq!(p.output_bits(), 320);
        assert_eq!(p.words(), 5);
        assert_eq!(p.entry_bytes(), 40);
        assert_eq!(p.top_mask(), u64::MAX);
        let p = params(22, 3, 22, 24);
        assert_eq!(p.words(), 9);
        assert_eq!(p.entry_bytes(), 66);
        assert_eq!(p.top_mask(), low_mask(528 - 512));
    }

    #[test]
    fn packed_char_access_straddles_words() {
        let mut packed = vec![0u64; 9];
        for j in 0..24 {
            insert_char(&mut packed, j, 22, (j as u64 * 0x2F_0F1D + 7) & low_mask(22));
        }
        for j in 0..24 {
            assert_eq!(
                extract_char(&packed, j, 22),
                (j as u64 * 0x2F_0F1D + 7) & low_mask(22)
            );
        }
        let mut full = vec![0u64; 2];
        insert_char(&mut full, 1, 64, u64::MAX);
        assert_eq!(full, vec![0, u64::MAX]);
    }

    #[test]
    fn zero_tables_hash_to_zero() {
        let h = SimpleTabulation::zeroed(params(4, 3, 7, 3));
        for key in 0..1 << 12 {
            assert_eq!(h.eval(key).unwrap(), vec![0]);
        }
    }

    #[test]
    fn single_table_is_identity_lookup() {
        let h = SimpleTabulation::generate(params(8, 1, 64, 1), 3).unwrap();
        for key in 0..256 {
            assert_eq!(h.eval(key).unwrap(), h.entry(0, key));
        }
    }

    #[test]
    fn explicit_tables_match_direct_xor() {
        let p = params(2, 2, 4, 1);
        let t0 = [0x3u64, 0xA, 0x5, 0xF];
        let t1 = [0x9u64, 0x0, 0xC, 0x6];
        let tables: Vec<Vec<Vec<u64>>> = [t0, t1]
            .iter()
            .map(|t| t.iter().map(|&v| vec![v]).collect())
            .collect();
        let h = SimpleTabulation::from_tables(p, &tables).unwrap();
        for x0 in 0..4u64 {
            for x1 in 0..4u64 {
                let key = x0 | (x1 << 2);
                let expected = t0[x0 as usize] ^ t1[x1 as usize];
                assert_eq!(h.eval_u64(key).unwrap(), expected);
            }
        }
    }

    #[test]
    fn from_tables_rejects_bad_shapes() {
        let p = params(1, 1, 4, 1);
        assert!(SimpleTabulation::from_tables(p, &[]).is_err());
        assert!(SimpleTabulation::from_tables(p, &[vec![vec![0]]]).is_err());
        assert!(SimpleTabulation::from_tables(p, &[vec![vec![0], vec![16]]]).is_err());
    }

    #[test]
    fn eval_rejects_out_of_range() {
        let h = SimpleTabulation::generate(params(4, 2, 8, 1), 0).unwrap();
        assert!(h.eval(256).is_err());
        assert!(h.eval_chars(&[1]).is_err());
        assert!(h.eval_chars(&[1, 16]).is_err());
        let codec = KeyCodec::new(4, 3).unwrap();
        let s = PositionCharSet::from_members(codec, [PositionChar::new(2, 0)]).unwrap();
        assert!(h.eval_set(&s).is_err());
    }

    #[test]
    fn eval_set_basics() {
        let h = SimpleTabulation::generate(params(4, 2, 16, 3), 11).unwrap();
        let codec = h.params().input_codec().unwrap();
        assert_eq!(h.eval_set(&PositionCharSet::empty(codec)).unwrap(), vec![0]);
        let s = PositionCharSet::from_members(codec, [PositionChar::new(0, 9)]).unwrap();
        assert_eq!(h.eval_set(&s).unwrap(), h.entry(0, 9));
        for key in 0..256 {
            let s = PositionCharSet::from_key(codec, key).unwrap();
            assert_eq!(h.eval_set(&s).unwrap(), h.eval(key).unwrap());
        }
    }

    #[test]
    fn lookup_count_equals_c() {
        for c in 1..=6 {
            let h = SimpleTabulation::generate(params(4, c, 8, 2), 1).unwrap();
            let mut counter = LookupCounter::default();
            h.eval_counted(0, &mut counter).unwrap();
            assert_eq!(counter.0, u64::from(c));
        }
    }

    #[test]
    fn seeds_change_tables() {
        let p = params(8, 2, 32, 2);
        let a = SimpleTabulation::generate(p, 5).unwrap();
        let b = SimpleTabulation::generate(p, 5).unwrap();
        let c = SimpleTabulation::generate(p, 6).unwrap();
        assert_eq!(a.serialize(), b.serialize());
        // Digest the body only: a CRC over data that already ends in its CRC is constant.
        let digest = |h: &SimpleTabulation| {
            let bytes = h.serialize();
            crc32fast::hash(&bytes[..bytes.len() - 4])
        };
        assert_ne!(digest(&a), digest(&c));
    }

    #[test]
    fn budget_enforced() {
        let p = params(16, 4, 64, 1);
        let err = SimpleTabulation::generate_with_budget(p, 0, &MemoryBudget::new(1 << 20));
        assert!(matches!(err, Err(Error::Resource { .. })));
        let p = params(32, 4, 64, 8);
        assert!(matches!(
            SimpleTabulation::generate(p, 0),
            Err(Error::Resource { .. })
        ));
    }

    #[test]
    fn lazy_agrees_with_materialized() {
        let p = params(6, 3, 22, 7);
        let h = SimpleTabulation::generate(p, 77).unwrap();
        let lazy = LazyTabulation::new(p, 77);
        let mut a = vec![0; p.words()];
        let mut b = vec![0; p.words()];
        for key in (0..1u64 << 18).step_by(997) {
            h.eval_key_into(key, &mut a, &mut ());
            lazy.eval_key_into(key, &mut b, &mut ());
            assert_eq!(a, b);
        }
    }

    #[test]
    fn rectangle_cancels_exhaustively() {
        for b in 1..=4 {
            for seed in 0..4 {
                let h = SimpleTabulation::generate(params(b, 2, 64, 1), seed).unwrap();
                let n = 1u64 << b;
                let key = |x: u64, y: u64| x | (y << b);
                for a in 0..n {
                    for a2 in a + 1..n {
                        for y in 0..n {
                            for y2 in y + 1..n {
                                let v = h.eval_u64(key(a, y)).unwrap()
                                    ^ h.eval_u64(key(a, y2)).unwrap()
                                    ^ h.eval_u64(key(a2, y)).unwrap()
                                    ^ h.eval_u64(key(a2, y2)).unwrap();
                                assert_eq!(v, 0);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn serialization_round_trip_and_errors() {
        let h = SimpleTabulation::generate(params(5, 3, 22, 5), 1234).unwrap();
        let bytes = h.serialize();
        assert_eq!(&bytes[..4], b"HTAB");
        assert_eq!(bytes[4], 1);
        assert_eq!(bytes[5], 1);
        // header 32 bytes, 3*32 entries of ceil(110/8)=14 bytes, CRC.
        assert_eq!(bytes.len(), 32 + 3 * 32 * 14 + 4);
        let back = SimpleTabulation::deserialize(&bytes).unwrap();
        assert_eq!(back, h);
        for key in (0..1 << 15).step_by(33) {
            assert_eq!(back.eval(key).unwrap(), h.eval(key).unwrap());
        }

        let mut corrupt = bytes.clone();
        corrupt[40] ^= 1;
        assert!(matches!(
            SimpleTabulation::deserialize(&corrupt),
            Err(Error::Parse(ParseError::ChecksumMismatch { .. }))
        ));

        let mut magic = bytes.clone();
        magic[0] = b'X';
        assert!(matches!(
            SimpleTabulation::deserialize(&magic),
            Err(Error::Parse(ParseError::BadMagic { .. }))
        ));

        let mut version = bytes[..bytes.len() - 4].to_vec();
        version[4] = 9;
        let version = reseal(version);
        assert_eq!(
            SimpleTabulation::deserialize(&version),
            Err(Error::Parse(ParseError::UnsupportedVersion(9)))
        );

        let mut gen = bytes[..bytes.len() - 4].to_vec();
        gen[5] = 0;
        assert_eq!(
            SimpleTabulation::deserialize(&reseal(gen)),
            Err(Error::Parse(ParseError::UnknownGenerator(0)))
        );

        let short = reseal(bytes[..20].to_vec());
        assert!(matches!(
            SimpleTabulation::deserialize(&short),
            Err(Error::Parse(ParseError::Truncated { .. }))
        ));
        assert!(matches!(
            SimpleTabulation::deserialize(b"HTA"),
            Err(Error::Parse(ParseError::Truncated { .. }))
        ));

        let body = reseal(bytes[..bytes.len() - 5].to_vec());
        assert!(matches!(
            SimpleTabulation::deserialize(&body),
            Err(Error::Parse(ParseError::Malformed(_)))
        ));
    }

    fn reseal(mut body: Vec<u8>) -> Vec<u8> {
        let crc = crc32fast::hash(&body);
        body.extend_from_slice(&crc.to_le_bytes());
        body
    }

    proptest! {
        #[test]
        fn linearity(seed: u64, a in proptest::collection::btree_set((0u32..3, 0u64..16), 0..12),
                     b in proptest::collection::btree_set((0u32..3, 0u64..16), 0..12)) {
            let h = SimpleTabulation::generate(params(4, 3, 13, 9), seed).unwrap();
            let codec = KeyCodec::new(4, 3).unwrap();
            let to_set = |s: &std::collections::BTreeSet<(u32, u64)>| {
                PositionCharSet::from_members(codec, s.iter().map(|&(p, c)| PositionChar::new(p, c))).unwrap()
            };
            let (sa, sb) = (to_set(&a), to_set(&b));
            let lhs = h.eval_set(&sa.symmetric_difference(&sb).unwrap()).unwrap();
            let ra = h.eval_set(&sa).unwrap();
            let rb = h.eval_set(&sb).unwrap();
            let rhs: Vec<u64> = ra.iter().zip(&rb).map(|(x, y)| x ^ y).collect();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn key_difference_identity(seed: u64, x in 0u64..1 << 12, y in 0u64..1 << 12) {
            let h = SimpleTabulation::generate(params(4, 3, 64, 1), seed).unwrap();
            let codec = h.params().input_codec().unwrap();
            let d = PositionCharSet::from_key(codec, x).unwrap()
                .symmetric_difference(&PositionCharSet::from_key(codec, y).unwrap()).unwrap();
            prop_assert_eq!(h.eval_set(&d).unwrap()[0], h.eval_u64(x).unwrap() ^ h.eval_u64(y).unwrap());
        }
    }
}
