// SPDX-License-Identifier: Apache-2.0

//! Memory budget for character tables.

use crate::error::{Error, Result};

/// Environment variable overriding the default table budget, in bytes.
pub const MEM_BUDGET_ENV: &str = "HITAB_MEM_BUDGET";

/// Default table budget: 1 GiB.
pub const DEFAULT_MEM_BUDGET: u64 = 1 << 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemoryBudget {
    bytes: u64,
}

impl MemoryBudget {
    pub const fn new(bytes: u64) -> Self {
        MemoryBudget { bytes }
    }

    pub const fn unlimited() -> Self {
        MemoryBudget { bytes: u64::MAX }
    }

    /// Reads `HITAB_MEM_BUDGET`, falling back to the 1 GiB default.
    ///
    /// Accepts a plain byte count or a number with a `K`, `M`, `G` suffix
    /// (binary multiples).
    pub fn from_env() -> Result<Self> {
        match std::env::var(MEM_BUDGET_ENV) {
            Ok(raw) => parse_size(&raw)
                .map(Self::new)
                .ok_or_else(|| Error::domain(format!("cannot parse {MEM_BUDGET_ENV}={raw:?}"))),
            Err(_) => Ok(Self::default()),
        }
    }

    pub fn bytes(&self) -> u64 {
        self.bytes
    }

    pub fn check(&self, what: &'static str, needed: u128) -> Result<()> {
        if needed > u128::from(self.bytes) {
            return Err(Error::Resource {
                what,
                needed,
                budget: u128::from(self.bytes),
            });
        }
        Ok(())
    }
}

impl Default for MemoryBudget {
    fn default() -> Self {
        MemoryBudget::new(DEFAULT_MEM_BUDGET)
    }
}

fn parse_size(raw: &str) -> Option<u64> {
    let raw = raw.trim();
    let (digits, shift) = match raw.char_indices().last()? {
        (i, 'k' | 'K') => (&raw[..i], 10),
        (i, 'm' | 'M') => (&raw[..i], 20),
        (i, 'g' | 'G') => (&raw[..i], 30),
        _ => (raw, 0),
    };
    digits.trim().parse::<u64>().ok()?.checked_mul(1 << shift)
}
