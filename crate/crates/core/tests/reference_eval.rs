// SPDX-License-Identifier: Apache-2.0

//! Schemes against straightforward re-implementations built from their parts.

use hitab::prng::{derive_seed, SampleStream};
use hitab::schemes::{triple_params, MERSENNE_61};
use hitab::tabulation::extract_char;
use hitab::{
    DoubleTabulation, KeyCodec, LazyTabulation, LookupCounter, MemoryBudget, PolynomialHash, Preset,
    RecursivePlan, RecursiveTabulation, SimpleTabulation, TableSource, TripleTabulation,
};
use num_bigint::BigUint;

fn chars(packed: &[u64], count: u32, bits: u32) -> Vec<u64> {
    (0..count).map(|j| extract_char(packed, j, bits)).collect()
}

/// Two passes: expand all levels breadth-first, then XOR the bottom tables.
fn recursive_reference(rt: &RecursiveTabulation, key: u64) -> u64 {
    let plan = rt.plan();
    let mut frontier = vec![key];
    for level in 0..plan.levels() as usize {
        let f = rt.level(level);
        let (d, bits) = (plan.level_out_chars()[level], plan.level_out_bits()[level]);
        frontier = frontier
            .iter()
            .flat_map(|&k| chars(&f.eval(k).unwrap(), d, bits))
            .collect();
    }
    assert_eq!(frontier.len() as u64, plan.bottom_table_count());
    frontier
        .iter()
        .enumerate()
        .fold(0, |acc, (i, &ch)| acc ^ rt.bottom().entry(i, ch)[0])
}

#[test]
fn recursive_matches_two_pass_reference() {
    let rt = RecursiveTabulation::new(RecursivePlan::new(2, 16).unwrap(), 64, 5).unwrap();
    assert_eq!(rt.plan().bottom_table_count(), 48 * 24);
    let mut keys = SampleStream::new(1);
    for i in 0..10_000u64 {
        let key = if i < 16 { i } else { keys.below(1 << 16) };
        assert_eq!(
            rt.eval(key).unwrap(),
            recursive_reference(&rt, key),
            "key {key:#x}"
        );
    }
    let mut n = LookupCounter::default();
    rt.eval_counted(77, &mut n).unwrap();
    assert_eq!(n.0, rt.plan().predicted_lookups());
}

#[test]
fn recursive_three_levels() {
    let plan = RecursivePlan::new(3, 24).unwrap();
    assert_eq!(plan.level_out_chars(), &[96, 48, 24]);
    let rt = RecursiveTabulation::new(plan, 32, 6).unwrap();
    let mut keys = SampleStream::new(2);
    for _ in 0..50 {
        let key = keys.below(1 << 24);
        assert_eq!(rt.eval(key).unwrap(), recursive_reference(&rt, key));
    }
}

#[test]
fn double_is_composition() {
    let codec = KeyCodec::new(8, 4).unwrap();
    let dt = DoubleTabulation::new(codec, 24, 8, 64, 11).unwrap();
    let first = SimpleTabulation::generate(*dt.first().params(), derive_seed(11, 0, 0)).unwrap();
    let second = SimpleTabulation::generate(*dt.second().params(), derive_seed(11, 1, 0)).unwrap();
    let mut keys = SampleStream::new(3);
    for _ in 0..10_000 {
        let key = keys.below(1 << 32);
        let mid = chars(&first.eval(key).unwrap(), 24, 8);
        let expect = second.eval_chars(&mid).unwrap()[0];
        assert_eq!(dt.eval(key).unwrap(), expect);
    }
}

#[test]
fn preset_32_2_uses_22_lookups() {
    let lazy = {
        let (codec, d, psi) = Preset::Double32x2.first_level().unwrap();
        DoubleTabulation::lazy(codec, d, psi, 64, 1).unwrap()
    };
    let full = DoubleTabulation::preset(Preset::Double32x2, 64, 1, &MemoryBudget::default()).unwrap();
    assert_eq!(full.lookups_per_key(), 22);
    let mut keys = SampleStream::new(4);
    for _ in 0..1000 {
        let key = keys.below(1 << 32);
        let mut n = LookupCounter::default();
        let v = full.eval_counted(key, &mut n).unwrap();
        assert_eq!(n.0, 22);
        assert_eq!(v, lazy.eval(key).unwrap());
    }
}

#[test]
fn triple_is_composition() {
    let [pt, pm, pb] = triple_params(64).unwrap();
    let seed = 21;
    let top = LazyTabulation::new(pt, derive_seed(seed, 0, 0));
    let middle = LazyTabulation::new(pm, derive_seed(seed, 1, 0));
    let bottom = LazyTabulation::new(pb, derive_seed(seed, 2, 0));
    let lazy = TripleTabulation::lazy(64, seed).unwrap();
    let mut keys = SampleStream::new(5);
    for _ in 0..200 {
        let key = keys.next_u64();
        let mut y = vec![0u64; pt.words()];
        top.eval_key_into(key, &mut y, &mut ());
        let mut all = Vec::with_capacity(280);
        for ych in chars(&y, 14, 32) {
            let mut z = vec![0u64; pm.words()];
            middle.eval_chars_into(&[ych & 0xFFFF, ych >> 16], &mut z, &mut ());
            all.extend(chars(&z, 20, 16));
        }
        let mut out = [0u64];
        bottom.eval_chars_into(&all, &mut out, &mut ());
        assert_eq!(lazy.eval(key).unwrap(), out[0]);
    }
    let mut n = LookupCounter::default();
    lazy.eval_counted(1, &mut n).unwrap();
    assert_eq!(n.0, 312);
}

#[test]
fn polynomial_matches_bignum() {
    let p = BigUint::from(MERSENNE_61);
    let mut keys = SampleStream::new(6);
    for (k, bits) in [(2u32, 64u32), (5, 32), (20, 61), (100, 17)] {
        let h = PolynomialHash::new(k, 1000 + u64::from(k), bits).unwrap();
        let coeffs: Vec<BigUint> = h.coefficients().iter().map(|&a| BigUint::from(a)).collect();
        let mask = BigUint::from(u64::MAX >> (64 - bits));
        let n = if k == 100 { 5_000 } else { 100_000 };
        for i in 0..n {
            let x = match i {
                0 => 0,
                1 => MERSENNE_61 - 1,
                _ => keys.below(MERSENNE_61),
            };
            let xb = BigUint::from(x);
            let mut acc = BigUint::from(0u32);
            let mut pow = BigUint::from(1u32);
            for a in &coeffs {
                acc += a * &pow;
                pow = pow * &xb % &p;
            }
            let expect = (acc % &p) & &mask;
            assert_eq!(BigUint::from(h.eval(x).unwrap()), expect, "k={k} x={x}");
        }
    }
}
