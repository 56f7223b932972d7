// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};
use crate::keyspace::KeyCodec;
use crate::prng::SampleStream;
use crate::tabulation::{extract_char, SimpleTabulation};

/// Largest domain an explicit function may have.
pub const MAX_DOMAIN: u64 = 1 << 20;

/// A dense table `U → Ψ^d` with `U = [domain_size]` and `Ψ = [2^out_char_bits]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExplicitFunction {
    domain_size: u64,
    out_char_count: u32,
    out_char_bits: u32,
    /// Row-major: `values[x * d + j] = f(x)_j`.
    values: Vec<u64>,
}

impl ExplicitFunction {
    pub fn new(domain_size: u64, out_char_count: u32, out_char_bits: u32, values: Vec<u64>) -> Result<Self> {
        if domain_size == 0 || domain_size > MAX_DOMAIN {
            return Err(Error::domain(format!(
                "domain size {domain_size} outside 1..={MAX_DOMAIN}"
            )));
        }
        if out_char_count == 0 || !(1..=32).contains(&out_char_bits) {
            return Err(Error::domain("need d >= 1 and 1..=32 output bits"));
        }
        if values.len() as u64 != domain_size * u64::from(out_char_count) {
            return Err(Error::domain(format!(
                "expected {} values, got {}",
                domain_size * u64::from(out_char_count),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|&&v| v >> out_char_bits != 0) {
            return Err(Error::domain(format!("value {v} exceeds {out_char_bits} bits")));
        }
        Ok(ExplicitFunction {
            domain_size,
            out_char_count,
            out_char_bits,
            values,
        })
    }

    pub fn from_fn(
        domain_size: u64,
        out_char_count: u32,
        out_char_bits: u32,
        mut f: impl FnMut(u64, u32) -> u64,
    ) -> Result<Self> {
        if domain_size > MAX_DOMAIN {
            return Err(Error::domain(format!(
                "domain size {domain_size} exceeds {MAX_DOMAIN}"
            )));
        }
        let values = (0..domain_size)
            .flat_map(|x| (0..out_char_count).map(move |j| (x, j)))
            .map(|(x, j)| f(x, j))
            .collect();
        Self::new(domain_size, out_char_count, out_char_bits, values)
    }

    /// `f(x)_j = x` in every position.
    pub fn identity(domain_size: u64, out_char_count: u32, out_char_bits: u32) -> Result<Self> {
        if domain_size > 1 << out_char_bits {
            return Err(Error::domain("domain does not fit the output alphabet"));
        }
        Self::from_fn(domain_size, out_char_count, out_char_bits, |x, _| x)
    }

    /// `f(x) = (x_0, ..., x_{c-1})`: keys as their own characters.
    pub fn identity_characters(codec: KeyCodec) -> Result<Self> {
        let n = 1u64
            .checked_shl(codec.key_bits())
            .filter(|&n| n <= MAX_DOMAIN)
            .ok_or_else(|| Error::domain("codec domain is too large"))?;
        Self::from_fn(n, codec.char_count(), codec.char_bits(), |x, j| {
            (x >> (j * codec.char_bits())) & codec.char_mask()
        })
    }

    /// Every key of a simple tabulation's domain, hashed.
    pub fn from_tabulation(st: &SimpleTabulation) -> Result<Self> {
        let p = *st.params();
        let codec = p.input_codec()?;
        if p.out_char_bits() > 32 {
            return Err(Error::domain("output characters wider than 32 bits"));
        }
        let n = 1u64
            .checked_shl(codec.key_bits())
            .filter(|&n| n <= MAX_DOMAIN)
            .ok_or_else(|| Error::domain("tabulation domain is too large"))?;
        let mut values = Vec::with_capacity((n * u64::from(p.out_char_count())) as usize);
        for x in 0..n {
            let out = st.eval(x)?;
            values.extend((0..p.out_char_count()).map(|j| extract_char(&out, j, p.out_char_bits())));
        }
        Self::new(n, p.out_char_count(), p.out_char_bits(), values)
    }

    /// Uniformly random values drawn from `stream`.
    pub fn random(
        domain_size: u64,
        out_char_count: u32,
        out_char_bits: u32,
        stream: &mut SampleStream,
    ) -> Result<Self> {
        Self::from_fn(domain_size, out_char_count, out_char_bits, |_, _| {
            stream.below(1 << out_char_bits)
        })
    }

    pub fn domain_size(&self) -> u64 {
        self.domain_size
    }

    pub fn out_char_count(&self) -> u32 {
        self.out_char_count
    }

    pub fn out_char_bits(&self) -> u32 {
        self.out_char_bits
    }

    /// `f(x)_j`.
    #[inline]
    pub fn value(&self, x: u64, j: u32) -> u64 {
        self.values[(x * u64::from(self.out_char_count) + u64::from(j)) as usize]
    }

    pub fn row(&self, x: u64) -> &[u64] {
        let d = self.out_char_count as usize;
        &self.values[x as usize * d..(x as usize + 1) * d]
    }

    /// Applies a permutation of `Ψ` per output position: `f'(x)_j = perms[j][f(x)_j]`.
    pub fn relabel(&self, perms: &[Vec<u64>]) -> Result<Self> {
        if perms.len() != self.out_char_count as usize {
            return Err(Error::domain("one permutation per output position"));
        }
        Self::from_fn(
            self.domain_size,
            self.out_char_count,
            self.out_char_bits,
            |x, j| perms[j as usize][self.value(x, j) as usize],
        )
    }
}
