// SPDX-License-Identifier: Apache-2.0

use super::{for_each_subset, subset_count, ExplicitFunction};
use crate::error::{Error, Result};
use crate::keyspace::low_mask;

/// Default cap on the number of second-level table fillings.
pub const DEFAULT_FILLING_BUDGET: u64 = 1 << 24;

/// Cap on joint-distribution counters held at once.
const MAX_COUNTERS: u128 = 1 << 26;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndependenceOutcome {
    pub fillings: u64,
    pub tuples: u64,
    /// Largest `s ≤ k` such that every set of at most `s` keys is uniform.
    pub independent_up_to: u32,
    /// First non-uniform key set, size-major then lexicographic.
    pub witness: Option<Vec<u64>>,
}

impl IndependenceOutcome {
    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }
}

/// Decides whether `x ↦ ⊕_j r_j(f(x)_j)` is k-independent over uniformly
/// random tables `r_j: Ψ → [2^r_bits]`, by enumerating every filling.
pub fn exact_independence(f: &ExplicitFunction, k: u32, r_bits: u32) -> Result<IndependenceOutcome> {
    exact_independence_with_budget(f, k, r_bits, DEFAULT_FILLING_BUDGET)
}

pub fn exact_independence_with_budget(
    f: &ExplicitFunction,
    k: u32,
    r_bits: u32,
    budget: u64,
) -> Result<IndependenceOutcome> {
    if k == 0 || r_bits == 0 {
        return Err(Error::domain("k and r_bits must be positive"));
    }
    let alphabet = 1u64 << f.out_char_bits();
    let table_bits = u128::from(alphabet) * u128::from(f.out_char_count()) * u128::from(r_bits);
    if table_bits >= 64 || (1u128 << table_bits) > u128::from(budget) {
        return Err(Error::Resource {
            what: "table fillings",
            needed: if table_bits >= 128 {
                u128::MAX
            } else {
                1u128 << table_bits
            },
            budget: budget.into(),
        });
    }
    let n = f.domain_size();
    let k_eff = u64::from(k).min(n) as usize;
    let mut counters: u128 = 0;
    for s in 1..=k_eff as u64 {
        let cells = 1u128
            .checked_shl((u64::from(r_bits) * s) as u32)
            .unwrap_or(u128::MAX);
        counters = counters.saturating_add(subset_count(n, s, s).saturating_mul(cells));
    }
    if counters > MAX_COUNTERS {
        return Err(Error::Resource {
            what: "joint distribution counters",
            needed: counters,
            budget: MAX_COUNTERS,
        });
    }

    let mut tuples: Vec<Vec<u64>> = Vec::new();
    for_each_subset(n, 1, k_eff, |set| {
        tuples.push(set.to_vec());
        false
    });
    let mut offsets = Vec::with_capacity(tuples.len() + 1);
    let mut total = 0usize;
    for t in &tuples {
        offsets.push(total);
        total += 1 << (r_bits as usize * t.len());
    }
    let mut counts = vec![0u32; total];

    let fillings = 1u64 << table_bits;
    let rmask = low_mask(r_bits);
    let mut hashes = vec![0u64; n as usize];
    for filling in 0..fillings {
        for (x, h) in hashes.iter_mut().enumerate() {
            let mut acc = 0;
            for (j, &a) in f.row(x as u64).iter().enumerate() {
                let slot = (j as u64 * alphabet + a) * u64::from(r_bits);
                acc ^= (filling >> slot) & rmask;
            }
            *h = acc;
        }
        for (t, &off) in tuples.iter().zip(&offsets) {
            let mut idx = 0usize;
            for (i, &x) in t.iter().enumerate() {
                idx |= (hashes[x as usize] as usize) << (r_bits as usize * i);
            }
            counts[off + idx] += 1;
        }
    }

    let mut witness = None;
    let mut independent_up_to = k;
    for (t, &off) in tuples.iter().zip(&offsets) {
        let cells = 1usize << (r_bits as usize * t.len());
        let expect = fillings / cells as u64;
        let uniform = counts[off..off + cells].iter().all(|&c| u64::from(c) == expect);
        if !uniform {
            independent_up_to = t.len() as u32 - 1;
            witness = Some(t.clone());
            break;
        }
    }
    Ok(IndependenceOutcome {
        fillings,
        tuples: tuples.len() as u64,
        independent_up_to,
        witness,
    })
}
