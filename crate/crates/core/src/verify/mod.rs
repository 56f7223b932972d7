// SPDX-License-Identifier: Apache-2.0

//! Brute-force oracles for small instances.
//!
//! A function `f: U → Ψ^d` is k-unique if every set of at most k keys has an
//! output position character `(j, a)` produced by exactly one key, and k-odd
//! if some `(j, a)` is produced an odd number of times. All checkers enumerate
//! subsets size-major, then lexicographically by sorted key list, and stop at
//! the first violation.

mod boxes;
mod exact;
mod function;
mod stats;
mod suite;

pub use boxes::{box_zero_check, rectangle_zero_check, BoxOutcome};
pub use exact::{
    exact_independence, exact_independence_with_budget, IndependenceOutcome, DEFAULT_FILLING_BUDGET,
};
pub use function::ExplicitFunction;
pub use stats::{chi_square_independence, ChiSquareOutcome, FROZEN_TRIAL_SEED, NON_REJECTION_BAND};
pub use suite::{implication_suite, ImplicationReport};

use std::fmt;

use crate::error::{Error, Result};

/// Default cap on the number of enumerated subsets.
pub const DEFAULT_SUBSET_BUDGET: u64 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    NotUnique,
    NotOdd,
}

impl ViolationKind {
    pub fn name(self) -> &'static str {
        match self {
            ViolationKind::NotUnique => "not-unique",
            ViolationKind::NotOdd => "not-odd",
        }
    }
}

/// A key set with no unique (or no odd) output position character.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ViolationWitness {
    pub kind: ViolationKind,
    pub key_set: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckOutcome {
    Pass { subsets: u64 },
    Fail { subsets: u64, witness: ViolationWitness },
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, CheckOutcome::Pass { .. })
    }

    pub fn witness(&self) -> Option<&ViolationWitness> {
        match self {
            CheckOutcome::Pass { .. } => None,
            CheckOutcome::Fail { witness, .. } => Some(witness),
        }
    }

    /// Subsets examined, including the violating one.
    pub fn subsets(&self) -> u64 {
        match self {
            CheckOutcome::Pass { subsets } | CheckOutcome::Fail { subsets, .. } => *subsets,
        }
    }
}

/// `Σ_{s=lo..=hi} C(n, s)`, saturating.
pub(crate) fn subset_count(n: u64, lo: u64, hi: u64) -> u128 {
    let mut total: u128 = 0;
    let mut binom: u128 = 1;
    for s in 0..=hi.min(n) {
        if s >= lo {
            total = total.saturating_add(binom);
        }
        binom = binom.saturating_mul(u128::from(n - s)) / u128::from(s + 1);
    }
    total
}

/// Visits all subsets of `[n]` with `lo ≤ size ≤ hi`, size-major and lexicographic.
/// Stops when `visit` returns `true`.
pub(crate) fn for_each_subset(n: u64, lo: usize, hi: usize, mut visit: impl FnMut(&[u64]) -> bool) -> bool {
    for size in lo..=hi.min(n as usize) {
        let mut idx: Vec<u64> = (0..size as u64).collect();
        loop {
            if visit(&idx) {
                return true;
            }
            // Rightmost slot that can still move, then reset the tail after it.
            let mut i = size;
            while i > 0 && idx[i - 1] == n - (size - i + 1) as u64 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for t in i..size {
                idx[t] = idx[t - 1] + 1;
            }
        }
    }
    false
}

fn check_budget(f: &ExplicitFunction, k: u32, budget: u64) -> Result<()> {
    if k < 2 {
        return Err(Error::domain("k must be at least 2"));
    }
    let needed = subset_count(f.domain_size(), 2, k.into());
    if needed > u128::from(budget) {
        return Err(Error::Resource {
            what: "subset enumeration",
            needed,
            budget: budget.into(),
        });
    }
    Ok(())
}

fn scan(
    f: &ExplicitFunction,
    k: u32,
    budget: u64,
    kind: ViolationKind,
    ok: impl Fn(&ExplicitFunction, &[u64]) -> bool,
) -> Result<CheckOutcome> {
    check_budget(f, k, budget)?;
    let mut subsets = 0u64;
    let mut witness = None;
    for_each_subset(f.domain_size(), 2, k as usize, |set| {
        subsets += 1;
        if ok(f, set) {
            false
        } else {
            witness = Some(set.to_vec());
            true
        }
    });
    Ok(match witness {
        None => CheckOutcome::Pass { subsets },
        Some(key_set) => CheckOutcome::Fail {
            subsets,
            witness: ViolationWitness { kind, key_set },
        },
    })
}

/// Whether some output position character occurs in exactly one key of `set`.
pub fn has_unique_character(f: &ExplicitFunction, set: &[u64]) -> bool {
    (0..f.out_char_count()).any(|j| {
        set.iter().any(|&x| {
            let a = f.value(x, j);
            set.iter().filter(|&&y| f.value(y, j) == a).count() == 1
        })
    })
}

/// Whether some output position character occurs an odd number of times in `set`.
pub fn has_odd_character(f: &ExplicitFunction, set: &[u64]) -> bool {
    (0..f.out_char_count()).any(|j| {
        set.iter().any(|&x| {
            let a = f.value(x, j);
            set.iter().filter(|&&y| f.value(y, j) == a).count() % 2 == 1
        })
    })
}

pub fn is_k_unique(f: &ExplicitFunction, k: u32) -> Result<CheckOutcome> {
    is_k_unique_with_budget(f, k, DEFAULT_SUBSET_BUDGET)
}

pub fn is_k_unique_with_budget(f: &ExplicitFunction, k: u32, budget: u64) -> Result<CheckOutcome> {
    scan(f, k, budget, ViolationKind::NotUnique, has_unique_character)
}

pub fn is_k_odd(f: &ExplicitFunction, k: u32) -> Result<CheckOutcome> {
    is_k_odd_with_budget(f, k, DEFAULT_SUBSET_BUDGET)
}

pub fn is_k_odd_with_budget(f: &ExplicitFunction, k: u32, budget: u64) -> Result<CheckOutcome> {
    scan(f, k, budget, ViolationKind::NotOdd, has_odd_character)
}

/// Odd composition checked on one instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompositionOutcome {
    /// `F(x)_{(i,j)} = g_i(f(x)_i)_j`, positions ordered by `i` then `j`.
    pub composed: ExplicitFunction,
    /// `f` and every `g_i` are k-odd.
    pub hypotheses_hold: bool,
    /// The check of `F`; `None` when the hypotheses fail.
    pub conclusion: Option<CheckOutcome>,
}

impl CompositionOutcome {
    /// False only if the hypotheses hold and `F` is not k-odd.
    pub fn holds(&self) -> bool {
        self.conclusion.as_ref().map_or(true, CheckOutcome::passed)
    }
}

/// Materializes `F` from `f` and `g_0..g_{d-1}`.
pub fn compose(f: &ExplicitFunction, g: &[ExplicitFunction]) -> Result<ExplicitFunction> {
    if g.len() != f.out_char_count() as usize {
        return Err(Error::domain(format!(
            "f has {} output positions but {} inner functions were given",
            f.out_char_count(),
            g.len()
        )));
    }
    let alphabet = 1u64 << f.out_char_bits();
    let bits = g.first().map_or(1, ExplicitFunction::out_char_bits);
    for (i, gi) in g.iter().enumerate() {
        if gi.domain_size() != alphabet {
            return Err(Error::domain(format!(
                "g_{i} has domain {} but f outputs characters below {alphabet}",
                gi.domain_size()
            )));
        }
        if gi.out_char_bits() != bits {
            return Err(Error::domain("inner functions must share one output alphabet"));
        }
    }
    let width: u32 = g.iter().map(ExplicitFunction::out_char_count).sum();
    ExplicitFunction::from_fn(f.domain_size(), width, bits, |x, pos| {
        let mut p = pos;
        for (i, gi) in g.iter().enumerate() {
            if p < gi.out_char_count() {
                return gi.value(f.value(x, i as u32), p);
            }
            p -= gi.out_char_count();
        }
        unreachable!()
    })
}

pub fn odd_composition_check(
    f: &ExplicitFunction,
    g: &[ExplicitFunction],
    k: u32,
) -> Result<CompositionOutcome> {
    let composed = compose(f, g)?;
    let mut hypotheses_hold = is_k_odd(f, k)?.passed();
    for gi in g {
        if !hypotheses_hold {
            break;
        }
        hypotheses_hold = is_k_odd(gi, k)?.passed();
    }
    let conclusion = if hypotheses_hold {
        Some(is_k_odd(&composed, k)?)
    } else {
        None
    };
    Ok(CompositionOutcome {
        composed,
        hypotheses_hold,
        conclusion,
    })
}

/// One line of `key=value` fields.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerdictRecord {
    pub check: String,
    pub params: String,
    pub passed: bool,
    pub witness: Vec<u64>,
    pub counts: Vec<(String, String)>,
}

impl VerdictRecord {
    pub fn new(check: impl Into<String>, params: impl Into<String>, passed: bool) -> Self {
        VerdictRecord {
            check: check.into(),
            params: params.into(),
            passed,
            witness: Vec::new(),
            counts: Vec::new(),
        }
    }

    pub fn with_witness(mut self, keys: &[u64]) -> Self {
        self.witness = keys.to_vec();
        self
    }

    pub fn with(mut self, key: impl Into<String>, value: impl fmt::Display) -> Self {
        self.counts.push((key.into(), value.to_string()));
        self
    }

    pub fn from_check(check: &str, params: impl Into<String>, outcome: &CheckOutcome) -> Self {
        let rec = VerdictRecord::new(check, params, outcome.passed()).with("subsets", outcome.subsets());
        match outcome.witness() {
            Some(w) => rec.with_witness(&w.key_set).with("kind", w.kind.name()),
            None => rec,
        }
    }
}

impl fmt::Display for VerdictRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "check={} params={} verdict={}",
            self.check,
            self.params,
            if self.passed { "pass" } else { "fail" }
        )?;
        if self.witness.is_empty() {
            f.write_str(" witness=-")?;
        } else {
            let keys: Vec<String> = self.witness.iter().map(|k| format!("{k:x}")).collect();
            write!(f, " witness={}", keys.join(","))?;
        }
        for (k, v) in &self.counts {
            write!(f, " {k}={v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests;
