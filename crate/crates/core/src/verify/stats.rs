// SPDX-License-Identifier: Apache-2.0

use statrs::function::gamma::gamma_ur;

use crate::error::{Error, Result};
use crate::prng::SampleStream;

/// Seed of the trial-seed stream used by the standard statistical runs.
pub const FROZEN_TRIAL_SEED: u64 = 0x5EED_0000_0000_0001;

/// p-values inside this closed interval do not reject uniformity.
pub const NON_REJECTION_BAND: (f64, f64) = (1e-4, 1.0 - 1e-4);

/// Smallest expected count per cell.
const MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ChiSquareOutcome {
    pub statistic: f64,
    pub degrees_of_freedom: u64,
    pub p_value: f64,
    pub trials: u64,
    pub cells: u64,
}

impl ChiSquareOutcome {
    pub fn in_band(&self) -> bool {
        (NON_REJECTION_BAND.0..=NON_REJECTION_BAND.1).contains(&self.p_value)
    }
}

/// Pearson chi-square test of the joint hash values of `keys` against uniform.
///
/// Each trial builds a function from the next word of a [`SampleStream`]
/// seeded with `trial_seed`, hashes every key and keeps the top `lg bins`
/// bits of each `output_bits`-wide value.
pub fn chi_square_independence<F, G>(
    mut factory: F,
    keys: &[u64],
    trials: u64,
    bins: u64,
    output_bits: u32,
    trial_seed: u64,
) -> Result<ChiSquareOutcome>
where
    F: FnMut(u64) -> Result<G>,
    G: Fn(u64) -> Result<u64>,
{
    if keys.is_empty() || keys.len() > 4 {
        return Err(Error::domain("between 1 and 4 keys are supported"));
    }
    for (i, k) in keys.iter().enumerate() {
        if keys[..i].contains(k) {
            return Err(Error::domain(format!("key {k:#x} is repeated")));
        }
    }
    if bins < 2 || !bins.is_power_of_two() {
        return Err(Error::domain(format!("bins {bins} must be a power of two >= 2")));
    }
    let bin_bits = bins.trailing_zeros();
    if !(1..=64).contains(&output_bits) || bin_bits > output_bits {
        return Err(Error::domain("bins exceed the hash range"));
    }
    let cells = bins
        .checked_pow(keys.len() as u32)
        .filter(|&c| c <= 1 << 24)
        .ok_or_else(|| Error::domain("too many cells"))?;
    if trials < 100 * bins || (trials as f64) / (cells as f64) < MIN_EXPECTED {
        return Err(Error::domain(format!(
            "{trials} trials undersample {cells} cells ({bins} bins per key)"
        )));
    }

    let shift = output_bits - bin_bits;
    let mut counts = vec![0u64; cells as usize];
    let mut seeds = SampleStream::new(trial_seed);
    for _ in 0..trials {
        let h = factory(seeds.next_u64())?;
        let mut cell = 0u64;
        for &k in keys {
            cell = cell * bins + (h(k)? >> shift) % bins;
        }
        counts[cell as usize] += 1;
    }

    let expected = trials as f64 / cells as f64;
    let statistic: f64 = counts
        .iter()
        .map(|&c| {
            let diff = c as f64 - expected;
            diff * diff / expected
        })
        .sum();
    let dof = cells - 1;
    Ok(ChiSquareOutcome {
        statistic,
        degrees_of_freedom: dof,
        p_value: gamma_ur(dof as f64 / 2.0, statistic / 2.0),
        trials,
        cells,
    })
}
