// SPDX-License-Identifier: Apache-2.0

use super::{
    exact_independence, has_odd_character, has_unique_character, is_k_odd, is_k_unique,
    odd_composition_check, ExplicitFunction,
};
use crate::error::Result;
use crate::prng::SampleStream;

/// Tallies from running the implication checks on random small functions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ImplicationReport {
    pub trials: u64,
    pub unique: u64,
    pub odd: u64,
    pub independent: u64,
    pub composition_hypotheses: u64,
    /// k-unique but not k-odd.
    pub unique_not_odd: u64,
    /// k-odd but `r ∘ f` not exactly k-independent.
    pub odd_not_independent: u64,
    /// Both inputs of the odd composition are k-odd but `F` is not.
    pub composition_failures: u64,
    /// Witnesses that did not re-verify under the plain scan.
    pub bad_witnesses: u64,
}

impl ImplicationReport {
    pub fn passed(&self) -> bool {
        self.unique_not_odd == 0
            && self.odd_not_independent == 0
            && self.composition_failures == 0
            && self.bad_witnesses == 0
    }
}

fn random_function(stream: &mut SampleStream) -> Result<(ExplicitFunction, u32)> {
    let n = 3 + stream.below(4);
    // Keep |Ψ|·d ≤ 12 so exact enumeration stays at ≤ 2^12 fillings.
    let (bits, d) = match stream.below(3) {
        0 => (1, 1 + stream.below(3) as u32),
        1 => (2, 1 + stream.below(3) as u32),
        _ => (3, 1),
    };
    let k = 2 + stream.below(n.min(4) - 1) as u32;
    let f = if stream.below(2) == 0 {
        ExplicitFunction::random(n, d, bits, stream)?
    } else {
        // A coordinate that is often injective.
        let alphabet = 1 << bits;
        let shift = stream.below(alphabet);
        let mut draws: Vec<u64> = (0..n * u64::from(d)).map(|_| stream.below(alphabet)).collect();
        for x in 0..n {
            draws[(x * u64::from(d)) as usize] = (x + shift) % alphabet;
        }
        ExplicitFunction::new(n, d, bits, draws)?
    };
    Ok((f, k))
}

fn random_inner(stream: &mut SampleStream, domain: u64, bits: u32) -> Result<ExplicitFunction> {
    let d = 1 + stream.below(2) as u32;
    let alphabet = 1u64 << bits;
    if stream.below(2) == 0 {
        ExplicitFunction::random(domain, d, bits, stream)
    } else {
        let shift = stream.below(alphabet);
        ExplicitFunction::from_fn(domain, d, bits, |x, j| {
            if j == 0 {
                (x + shift) % alphabet
            } else {
                stream.below(alphabet)
            }
        })
    }
}

/// Checks k-unique ⇒ k-odd ⇒ exact k-independence of `r ∘ f` (one-bit `r`)
/// and odd composition on `trials` random functions.
pub fn implication_suite(trials: u64, seed: u64) -> Result<ImplicationReport> {
    let mut stream = SampleStream::new(seed);
    let mut rep = ImplicationReport::default();
    for _ in 0..trials {
        let (f, k) = random_function(&mut stream)?;
        rep.trials += 1;
        let unique = is_k_unique(&f, k)?;
        let odd = is_k_odd(&f, k)?;
        if let Some(w) = unique.witness() {
            if has_unique_character(&f, &w.key_set) {
                rep.bad_witnesses += 1;
            }
        }
        if let Some(w) = odd.witness() {
            if has_odd_character(&f, &w.key_set) {
                rep.bad_witnesses += 1;
            }
        }
        let independent = exact_independence(&f, k, 1)?.passed();
        rep.unique += u64::from(unique.passed());
        rep.odd += u64::from(odd.passed());
        rep.independent += u64::from(independent);
        if unique.passed() && !odd.passed() {
            rep.unique_not_odd += 1;
        }
        if odd.passed() && !independent {
            rep.odd_not_independent += 1;
        }

        let inner_bits = 1 + stream.below(2) as u32;
        let domain = 1u64 << f.out_char_bits();
        let g = (0..f.out_char_count())
            .map(|_| random_inner(&mut stream, domain, inner_bits))
            .collect::<Result<Vec<_>>>()?;
        let comp = odd_composition_check(&f, &g, k)?;
        rep.composition_hypotheses += u64::from(comp.hypotheses_hold);
        rep.composition_failures += u64::from(!comp.holds());
    }
    Ok(rep)
}
