// SPDX-License-Identifier: Apache-2.0

//! Composed hash schemes and their `HSCH` container.
//!
//! Container layout: `"HSCH"`, version byte (1), scheme tag byte, two reserved
//! zero bytes, master seed (u64 LE), a tag-specific body, then a CRC-32 of all
//! preceding bytes. Nested `HTAB` containers are each prefixed by their
//! length as a u64 LE.
//!
//! | tag | scheme    | body                                               |
//! |-----|-----------|----------------------------------------------------|
//! | 1   | double    | first level, second level                          |
//! | 2   | triple    | top, middle, bottom                                |
//! | 3   | recursive | u32 c, u32 key_bits, levels `0..ℓ`, bottom tables  |
//! | 4   | poly      | u32 k, u32 range_bits, k coefficients `a_0..` (u64)|

mod double;
mod poly;
mod recursive;
mod triple;

pub use double::{double_params, DoubleTabulation};
pub use poly::{mersenne_reduce, PolynomialHash, MERSENNE_61};
pub use recursive::{RecursivePlan, RecursiveTabulation, LEVEL_EXPANSION};
pub use triple::{triple_params, TripleTabulation};

use std::fmt;
use std::str::FromStr;

use crate::bounds::BoundParams;
use crate::budget::MemoryBudget;
use crate::error::{Error, ParseError, Result};
use crate::keyspace::KeyCodec;
use crate::tabulation::{LookupCounter, SimpleTabulation, HTAB_MAGIC};
use crate::wire::{Reader, Writer};

pub const HSCH_MAGIC: [u8; 4] = *b"HSCH";
pub const HSCH_VERSION: u8 = 1;

/// Default hash width for the presets.
pub const DEFAULT_R_BITS: u32 = 64;

/// Runs `f` on a zeroed scratch buffer of `words` words.
pub(crate) fn with_scratch<T>(words: usize, f: impl FnOnce(&mut [u64]) -> T) -> T {
    const STACK: usize = 16;
    if words <= STACK {
        let mut buf = [0u64; STACK];
        f(&mut buf[..words])
    } else {
        f(&mut vec![0u64; words])
    }
}

/// Parameter sets certified to be 100-unique with overwhelming probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    /// 32-bit keys, `Φ = Ψ = [2^16]`, `c = 2`, `d = 20`.
    Double32x2,
    /// 64-bit keys, `Φ = Ψ = [2^22]`, `c = 3`, `d = 24`.
    Double64x3,
    /// 64-bit keys, `Φ = [2^16]`, `Ψ = [2^32]`, `c = 4`, `d = 14`, with the
    /// 32-2 parameters applied to each 32-bit output character.
    Triple64x4,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Double32x2, Preset::Double64x3, Preset::Triple64x4];

    /// Uniqueness the failure bound certifies.
    pub const CLAIMED_UNIQUENESS: u64 = 100;

    pub fn name(self) -> &'static str {
        match self {
            Preset::Double32x2 => "32-2",
            Preset::Double64x3 => "64-3",
            Preset::Triple64x4 => "64-4-triple",
        }
    }

    /// `(codec, d, Ψ bits)` of the first-level simple tabulation.
    pub fn first_level(self) -> Result<(KeyCodec, u32, u32)> {
        Ok(match self {
            Preset::Double32x2 => (KeyCodec::new(16, 2)?, 20, 16),
            Preset::Double64x3 => (KeyCodec::new(22, 3)?, 24, 22),
            Preset::Triple64x4 => (KeyCodec::new(16, 4)?, 14, 32),
        })
    }

    pub fn key_bits(self) -> u32 {
        match self {
            Preset::Double32x2 => 32,
            Preset::Double64x3 | Preset::Triple64x4 => 64,
        }
    }

    /// Published upper bound on the probability the first level is not 100-unique.
    pub fn claimed_failure_bound(self) -> f64 {
        match self {
            Preset::Double32x2 => 1.5e-42,
            Preset::Double64x3 => 1.4e-49,
            Preset::Triple64x4 => 9.0e-36,
        }
    }

    /// Bound parameters for the first-level function, `k = 100`, `ε = 1`.
    pub fn bound_params(self) -> Result<BoundParams> {
        let (codec, d, psi_bits) = self.first_level()?;
        BoundParams::from_bits(
            codec.char_count(),
            d,
            codec.char_bits(),
            psi_bits,
            Self::CLAIMED_UNIQUENESS,
        )
    }

    pub fn build(self, r_bits: u32, seed: u64, budget: &MemoryBudget) -> Result<Scheme> {
        Ok(match self {
            Preset::Triple64x4 => Scheme::Triple(TripleTabulation::with_budget(r_bits, seed, budget)?),
            p => Scheme::Double(DoubleTabulation::preset(p, r_bits, seed, budget)?),
        })
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::domain(format!("unknown preset {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum SchemeTag {
    Double = 1,
    Triple = 2,
    Recursive = 3,
    Poly = 4,
}

impl SchemeTag {
    pub fn name(self) -> &'static str {
        match self {
            SchemeTag::Double => "double",
            SchemeTag::Triple => "triple",
            SchemeTag::Recursive => "recursive",
            SchemeTag::Poly => "poly",
        }
    }
}

impl TryFrom<u8> for SchemeTag {
    type Error = ParseError;

    fn try_from(v: u8) -> Result<Self, ParseError> {
        Ok(match v {
            1 => SchemeTag::Double,
            2 => SchemeTag::Triple,
            3 => SchemeTag::Recursive,
            4 => SchemeTag::Poly,
            other => return Err(ParseError::UnknownScheme(other)),
        })
    }
}

/// Any composed hash function that maps a key of at most 64 bits to a hash value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scheme {
    Double(DoubleTabulation),
    Triple(TripleTabulation),
    Recursive(RecursiveTabulation),
    Poly(PolynomialHash),
}

impl Scheme {
    pub fn tag(&self) -> SchemeTag {
        match self {
            Scheme::Double(_) => SchemeTag::Double,
            Scheme::Triple(_) => SchemeTag::Triple,
            Scheme::Recursive(_) => SchemeTag::Recursive,
            Scheme::Poly(_) => SchemeTag::Poly,
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            Scheme::Double(s) => s.seed(),
            Scheme::Triple(s) => s.seed(),
            Scheme::Recursive(s) => s.seed(),
            Scheme::Poly(s) => s.seed(),
        }
    }

    /// Largest accepted key, inclusive.
    pub fn max_key(&self) -> u64 {
        match self {
            Scheme::Double(s) => s.codec().key_mask(),
            Scheme::Triple(s) => s.codec().key_mask(),
            Scheme::Recursive(s) => s.codec().key_mask(),
            Scheme::Poly(_) => MERSENNE_61 - 1,
        }
    }

    pub fn output_bits(&self) -> u32 {
        match self {
            Scheme::Double(s) => s.output_bits(),
            Scheme::Triple(s) => s.output_bits(),
            Scheme::Recursive(s) => s.output_bits(),
            Scheme::Poly(s) => s.range_bits(),
        }
    }

    /// Table lookups per key; zero for the polynomial.
    pub fn lookups_per_key(&self) -> u64 {
        match self {
            Scheme::Double(s) => s.lookups_per_key(),
            Scheme::Triple(s) => s.lookups_per_key(),
            Scheme::Recursive(s) => s.lookups_per_key(),
            Scheme::Poly(_) => 0,
        }
    }

    pub fn eval(&self, key: u64) -> Result<u64> {
        match self {
            Scheme::Double(s) => s.eval(key),
            Scheme::Triple(s) => s.eval(key),
            Scheme::Recursive(s) => s.eval(key),
            Scheme::Poly(s) => s.eval(key),
        }
    }

    pub fn eval_counted(&self, key: u64, counter: &mut LookupCounter) -> Result<u64> {
        match self {
            Scheme::Double(s) => s.eval_counted(key, counter),
            Scheme::Triple(s) => s.eval_counted(key, counter),
            Scheme::Recursive(s) => s.eval_counted(key, counter),
            Scheme::Poly(s) => s.eval(key),
        }
    }

    pub fn serialize(&self) -> Vec<u8> {
        let mut w = Writer::with_capacity(1 << 16);
        w.bytes(&HSCH_MAGIC);
        w.u8(HSCH_VERSION);
        w.u8(self.tag() as u8);
        w.bytes(&[0, 0]);
        w.u64(self.seed());
        let nest = |w: &mut Writer, t: &SimpleTabulation| {
            let bytes = t.serialize();
            w.u64(bytes.len() as u64);
            w.bytes(&bytes);
        };
        match self {
            Scheme::Double(s) => {
                nest(&mut w, s.first());
                nest(&mut w, s.second());
            }
            Scheme::Triple(s) => {
                nest(&mut w, s.top());
                nest(&mut w, s.middle());
                nest(&mut w, s.bottom());
            }
            Scheme::Recursive(s) => {
                w.u32(s.plan().c());
                w.u32(s.plan().key_bits());
                for i in 0..s.plan().levels() as usize {
                    nest(&mut w, s.level(i));
                }
                nest(&mut w, s.bottom());
            }
            Scheme::Poly(s) => {
                w.u32(s.k());
                w.u32(s.range_bits());
                for &a in s.coefficients() {
                    w.u64(a);
                }
            }
        }
        w.finish()
    }

    pub fn deserialize(bytes: &[u8], budget: &MemoryBudget) -> Result<Self> {
        let mut r = Reader::checked(bytes, HSCH_MAGIC)?;
        let version = r.u8()?;
        if version != HSCH_VERSION {
            return Err(ParseError::UnsupportedVersion(version).into());
        }
        let tag = SchemeTag::try_from(r.u8()?)?;
        r.take(2)?;
        let seed = r.u64()?;
        let mut nested = NestedTables::new(budget);
        let scheme = match tag {
            SchemeTag::Double => {
                let first = nested.read(&mut r)?;
                let second = nested.read(&mut r)?;
                Scheme::Double(DoubleTabulation::from_parts(first, second, seed)?)
            }
            SchemeTag::Triple => {
                let top = nested.read(&mut r)?;
                let middle = nested.read(&mut r)?;
                let bottom = nested.read(&mut r)?;
                Scheme::Triple(TripleTabulation::from_parts(seed, top, middle, bottom)?)
            }
            SchemeTag::Recursive => {
                let (c, key_bits) = (r.u32()?, r.u32()?);
                let plan = RecursivePlan::new(c, key_bits)
                    .map_err(|e| ParseError::Malformed(format!("bad recursion plan: {e}")))?;
                let levels = (0..plan.levels())
                    .map(|_| nested.read(&mut r))
                    .collect::<Result<Vec<_>>>()?;
                let bottom = nested.read(&mut r)?;
                Scheme::Recursive(RecursiveTabulation::from_parts(
                    c, key_bits, seed, levels, bottom,
                )?)
            }
            SchemeTag::Poly => {
                let (k, range_bits) = (r.u32()?, r.u32()?);
                if u64::from(k) * 8 != r.remaining() as u64 {
                    return Err(ParseError::Malformed(format!(
                        "{k} coefficients do not fill {} bytes",
                        r.remaining()
                    ))
                    .into());
                }
                let coefficients = (0..k).map(|_| r.u64()).collect::<Result<Vec<_>, _>>()?;
                let mut p = PolynomialHash::from_coefficients(coefficients, range_bits)
                    .map_err(|e| ParseError::Malformed(e.to_string()))?;
                p.set_seed(seed);
                Scheme::Poly(p)
            }
        };
        r.expect_end()?;
        Ok(scheme)
    }
}

/// Decodes nested `HTAB` containers against a shared memory budget.
struct NestedTables<'b> {
    budget: &'b MemoryBudget,
    used: u128,
}

impl<'b> NestedTables<'b> {
    fn new(budget: &'b MemoryBudget) -> Self {
        NestedTables { budget, used: 0 }
    }

    fn read(&mut self, r: &mut Reader<'_>) -> Result<SimpleTabulation> {
        let len = r.u64()?;
        let len = usize::try_from(len)
            .ok()
            .filter(|&n| n <= r.remaining())
            .ok_or(ParseError::Truncated {
                offset: 0,
                needed: len as usize,
            })?;
        let bytes = r.take(len)?;
        let needed = Self::peek_table_bytes(bytes)?;
        self.used += needed;
        self.budget.check("scheme tables", self.used)?;
        SimpleTabulation::deserialize_with_budget(bytes, &MemoryBudget::unlimited())
    }

    /// Table memory declared by an `HTAB` header, before decoding the body.
    fn peek_table_bytes(bytes: &[u8]) -> Result<u128> {
        if bytes.len() < 24 || bytes[..4] != HTAB_MAGIC {
            return Err(ParseError::Malformed("nested table container".into()).into());
        }
        let field = |i: usize| u32::from_le_bytes(bytes[8 + 4 * i..12 + 4 * i].try_into().unwrap());
        let params = crate::tabulation::TabulationParams::new(field(0), field(1), field(2), field(3))
            .map_err(|e| ParseError::Malformed(format!("nested table parameters: {e}")))?;
        Ok(params.table_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_parameters() {
        let (codec, d, psi) = Preset::Double32x2.first_level().unwrap();
        assert_eq!((codec.char_count(), codec.char_bits(), d, psi), (2, 16, 20, 16));
        let (codec, d, psi) = Preset::Double64x3.first_level().unwrap();
        assert_eq!((codec.char_count(), codec.char_bits(), d, psi), (3, 22, 24, 22));
        let (codec, d, psi) = Preset::Triple64x4.first_level().unwrap();
        assert_eq!((codec.char_count(), codec.char_bits(), d, psi), (4, 16, 14, 32));
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
            assert_eq!(p.first_level().unwrap().0.key_bits(), p.key_bits());
        }
        assert!("bogus".parse::<Preset>().is_err());
    }

    #[test]
    fn preset_64_3_exceeds_default_budget() {
        let err = Preset::Double64x3.build(64, 0, &MemoryBudget::default());
        assert!(matches!(err, Err(Error::Resource { .. })));
    }

    fn round_trip(s: &Scheme) {
        let bytes = s.serialize();
        assert_eq!(&bytes[..4], b"HSCH");
        assert_eq!(bytes[5], s.tag() as u8);
        let back = Scheme::deserialize(&bytes, &MemoryBudget::default()).unwrap();
        assert_eq!(&back, s);
        assert_eq!(back.serialize(), bytes);
    }

    #[test]
    fn containers_round_trip() {
        let codec = KeyCodec::new(6, 2).unwrap();
        round_trip(&Scheme::Double(
            DoubleTabulation::new(codec, 8, 6, 64, 1).unwrap(),
        ));
        round_trip(&Scheme::Recursive(
            RecursiveTabulation::new(RecursivePlan::new(2, 16).unwrap(), 32, 2).unwrap(),
        ));
        round_trip(&Scheme::Poly(PolynomialHash::new(7, 3, 40).unwrap()));
    }

    #[test]
    fn container_errors() {
        let codec = KeyCodec::new(4, 2).unwrap();
        let s = Scheme::Double(DoubleTabulation::new(codec, 4, 4, 16, 1).unwrap());
        let bytes = s.serialize();
        let budget = MemoryBudget::default();

        let mut bad = bytes.clone();
        bad[20] ^= 0x80;
        assert!(matches!(
            Scheme::deserialize(&bad, &budget),
            Err(Error::Parse(ParseError::ChecksumMismatch { .. }))
        ));

        let reseal = |mut body: Vec<u8>| {
            let crc = crc32fast::hash(&body);
            body.extend_from_slice(&crc.to_le_bytes());
            body
        };
        let mut v = bytes[..bytes.len() - 4].to_vec();
        v[4] = 2;
        assert_eq!(
            Scheme::deserialize(&reseal(v), &budget),
            Err(Error::Parse(ParseError::UnsupportedVersion(2)))
        );
        let mut v = bytes[..bytes.len() - 4].to_vec();
        v[5] = 77;
        assert_eq!(
            Scheme::deserialize(&reseal(v), &budget),
            Err(Error::Parse(ParseError::UnknownScheme(77)))
        );
        assert!(matches!(
            Scheme::deserialize(&bytes, &MemoryBudget::new(64)),
            Err(Error::Resource { .. })
        ));
        assert!(matches!(
            Scheme::deserialize(&reseal(bytes[..30].to_vec()), &budget),
            Err(Error::Parse(_))
        ));
    }
}
