// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};
use crate::prng::SampleStream;
use crate::tabulation::SimpleTabulation;

use super::stats::FROZEN_TRIAL_SEED;

/// Box count at or below which the check is exhaustive.
pub const EXHAUSTIVE_BOX_LIMIT: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoxOutcome {
    pub exhaustive: bool,
    pub checked: u64,
    /// First box whose XOR is nonzero: `(a_i, a'_i)` per position.
    pub failure: Option<Vec<(u64, u64)>>,
}

impl BoxOutcome {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// XOR of the hashes of all `2^c` keys choosing `a_i` or `a'_i` in each position.
fn box_xor(st: &SimpleTabulation, sides: &[(u64, u64)], acc: &mut [u64]) -> Result<bool> {
    let c = sides.len();
    acc.fill(0);
    let mut chars = vec![0u64; c];
    for corner in 0..1u64 << c {
        for (i, &(a, b)) in sides.iter().enumerate() {
            chars[i] = if corner >> i & 1 == 0 { a } else { b };
        }
        let out = st.eval_chars(&chars)?;
        for (x, y) in acc.iter_mut().zip(&out) {
            *x ^= *y;
        }
    }
    Ok(acc.iter().all(|&w| w == 0))
}

/// Checks that every combinatorial box XORs to zero.
///
/// Exhaustive over all `C(|Φ|, 2)^c` boxes when there are at most `limit`,
/// otherwise `limit` boxes drawn from a stream seeded with `seed`.
pub fn box_zero_check(st: &SimpleTabulation, limit: u64, seed: u64) -> Result<BoxOutcome> {
    let p = *st.params();
    let c = p.in_char_count() as usize;
    if c > 16 {
        return Err(Error::domain("boxes are limited to 16 positions"));
    }
    let sigma = 1u128 << p.in_char_bits();
    let pairs = sigma * (sigma - 1) / 2;
    let total = (0..c).try_fold(1u128, |acc, _| acc.checked_mul(pairs));
    let mut acc = vec![0u64; p.words()];

    match total {
        Some(total) if total <= u128::from(limit) => {
            let sigma = sigma as u64;
            let all_pairs: Vec<(u64, u64)> = (0..sigma)
                .flat_map(|a| (a + 1..sigma).map(move |b| (a, b)))
                .collect();
            let mut idx = vec![0usize; c];
            let mut checked = 0;
            loop {
                let sides: Vec<(u64, u64)> = idx.iter().map(|&i| all_pairs[i]).collect();
                checked += 1;
                if !box_xor(st, &sides, &mut acc)? {
                    return Ok(BoxOutcome {
                        exhaustive: true,
                        checked,
                        failure: Some(sides),
                    });
                }
                // Odometer over pair indices, last position fastest.
                let mut pos = c;
                while pos > 0 {
                    pos -= 1;
                    idx[pos] += 1;
                    if idx[pos] < all_pairs.len() {
                        break;
                    }
                    idx[pos] = 0;
                    if pos == 0 {
                        return Ok(BoxOutcome {
                            exhaustive: true,
                            checked,
                            failure: None,
                        });
                    }
                }
            }
        }
        _ => {
            let mut stream = SampleStream::new(seed);
            let sigma = sigma as u64;
            for checked in 1..=limit {
                let sides: Vec<(u64, u64)> = (0..c)
                    .map(|_| {
                        let a = stream.below(sigma);
                        let b = (a + 1 + stream.below(sigma - 1)) % sigma;
                        (a.min(b), a.max(b))
                    })
                    .collect();
                if !box_xor(st, &sides, &mut acc)? {
                    return Ok(BoxOutcome {
                        exhaustive: false,
                        checked,
                        failure: Some(sides),
                    });
                }
            }
            Ok(BoxOutcome {
                exhaustive: false,
                checked: limit,
                failure: None,
            })
        }
    }
}

/// Rectangle check for two-character keys: exhaustive when `|Φ| ≤ 16`.
pub fn rectangle_zero_check(st: &SimpleTabulation) -> Result<BoxOutcome> {
    if st.params().in_char_count() != 2 {
        return Err(Error::domain("rectangles need exactly two input characters"));
    }
    box_zero_check(st, EXHAUSTIVE_BOX_LIMIT, FROZEN_TRIAL_SEED)
}
