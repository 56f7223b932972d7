// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;

use super::exact::exact_independence_with_budget;
use super::*;
use crate::keyspace::KeyCodec;
use crate::prng::SampleStream;
use crate::schemes::{double_params, DoubleTabulation};
use crate::tabulation::{LazyTabulation, SimpleTabulation, TabulationParams};

fn constant(n: u64, d: u32) -> ExplicitFunction {
    ExplicitFunction::from_fn(n, d, 2, |_, _| 1).unwrap()
}

#[test]
fn subset_order_and_count() {
    let mut seen = Vec::new();
    for_each_subset(4, 1, 3, |s| {
        seen.push(s.to_vec());
        false
    });
    let expect: Vec<Vec<u64>> = vec![
        vec![0],
        vec![1],
        vec![2],
        vec![3],
        vec![0, 1],
        vec![0, 2],
        vec![0, 3],
        vec![1, 2],
        vec![1, 3],
        vec![2, 3],
        vec![0, 1, 2],
        vec![0, 1, 3],
        vec![0, 2, 3],
        vec![1, 2, 3],
    ];
    assert_eq!(seen, expect);
    for n in 0..9u64 {
        for hi in 0..6u64 {
            let mut count = 0u128;
            for_each_subset(n, 2, hi as usize, |_| {
                count += 1;
                false
            });
            assert_eq!(count, subset_count(n, 2, hi), "n={n} hi={hi}");
        }
    }
}

#[test]
fn identity_is_unique_for_every_k() {
    let f = ExplicitFunction::identity(8, 2, 3).unwrap();
    for k in 2..=5 {
        assert!(is_k_unique(&f, k).unwrap().passed());
        assert!(is_k_odd(&f, k).unwrap().passed());
    }
}

#[test]
fn constant_has_pair_witness() {
    let f = constant(5, 3);
    let out = is_k_unique(&f, 2).unwrap();
    assert_eq!(
        out.witness(),
        Some(&ViolationWitness {
            kind: ViolationKind::NotUnique,
            key_set: vec![0, 1]
        })
    );
    assert_eq!(out.subsets(), 1);
    assert_eq!(is_k_odd(&f, 2).unwrap().witness().unwrap().key_set, vec![0, 1]);
    // Odd-sized sets of a constant function are odd.
    assert!(is_k_odd(&constant(1, 1), 3).unwrap().passed());
}

#[test]
fn xor_closed_quadruple_is_not_4_odd() {
    let f = ExplicitFunction::from_fn(4, 2, 1, |x, j| (x >> j) & 1).unwrap();
    assert!(is_k_odd(&f, 3).unwrap().passed());
    let out = is_k_odd(&f, 4).unwrap();
    assert_eq!(out.witness().unwrap().key_set, vec![0, 1, 2, 3]);
    assert_eq!(out.witness().unwrap().kind, ViolationKind::NotOdd);
}

/// Second implementation: bitmask subsets, hash-map tallies.
fn reference_scan(f: &ExplicitFunction, k: u32, want_odd: bool) -> Option<Vec<u64>> {
    let n = f.domain_size();
    let mut violations: Vec<Vec<u64>> = Vec::new();
    for mask in 1u64..1 << n {
        let size = mask.count_ones();
        if size < 2 || size > k {
            continue;
        }
        let keys: Vec<u64> = (0..n).filter(|x| mask >> x & 1 == 1).collect();
        let mut tally: HashMap<(u32, u64), u32> = HashMap::new();
        for &x in &keys {
            for j in 0..f.out_char_count() {
                *tally.entry((j, f.value(x, j))).or_default() += 1;
            }
        }
        let ok = tally
            .values()
            .any(|&c| if want_odd { c % 2 == 1 } else { c == 1 });
        if !ok {
            violations.push(keys);
        }
    }
    violations.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    violations.into_iter().next()
}

#[test]
fn checker_matches_reference_on_tabulation() {
    let mut found_violation = false;
    for (params, seed) in (0..40).flat_map(|s| {
        [
            (TabulationParams::new(2, 2, 4, 4).unwrap(), s),
            (TabulationParams::new(2, 2, 1, 2).unwrap(), s),
        ]
    }) {
        let st = SimpleTabulation::generate(params, seed).unwrap();
        let f = ExplicitFunction::from_tabulation(&st).unwrap();
        assert_eq!(f.domain_size(), 16);
        for k in 2..=4 {
            let u = is_k_unique(&f, k).unwrap();
            assert_eq!(
                u.witness().map(|w| w.key_set.clone()),
                reference_scan(&f, k, false)
            );
            let o = is_k_odd(&f, k).unwrap();
            assert_eq!(
                o.witness().map(|w| w.key_set.clone()),
                reference_scan(&f, k, true)
            );
            found_violation |= !u.passed();
        }
    }
    assert!(found_violation);
}

#[test]
fn witnesses_reverify() {
    let mut stream = SampleStream::new(11);
    for _ in 0..200 {
        let f = ExplicitFunction::random(6, 2, 2, &mut stream).unwrap();
        if let Some(w) = is_k_unique(&f, 4).unwrap().witness() {
            assert!(!has_unique_character(&f, &w.key_set));
            assert!(w.key_set.len() >= 2 && w.key_set.len() <= 4);
        }
        if let Some(w) = is_k_odd(&f, 4).unwrap().witness() {
            assert!(!has_odd_character(&f, &w.key_set));
        }
    }
}

#[test]
fn verdicts_survive_relabeling() {
    let mut stream = SampleStream::new(12);
    for _ in 0..200 {
        let f = ExplicitFunction::random(6, 3, 2, &mut stream).unwrap();
        let perms: Vec<Vec<u64>> = (0..3)
            .map(|_| {
                let mut p: Vec<u64> = (0..4).collect();
                for i in (1..4).rev() {
                    p.swap(i, stream.below(i as u64 + 1) as usize);
                }
                p
            })
            .collect();
        let g = f.relabel(&perms).unwrap();
        for k in 2..=4 {
            assert_eq!(is_k_unique(&f, k).unwrap(), is_k_unique(&g, k).unwrap());
            assert_eq!(is_k_odd(&f, k).unwrap(), is_k_odd(&g, k).unwrap());
        }
    }
}

#[test]
fn subset_budget_is_enforced() {
    let f = ExplicitFunction::identity(64, 1, 6).unwrap();
    assert!(matches!(
        is_k_unique_with_budget(&f, 5, 1000),
        Err(crate::Error::Resource { .. })
    ));
    assert!(is_k_unique(&f, 1).is_err());
    assert!(is_k_unique(&f, 4).unwrap().passed());
}

#[test]
fn function_validation() {
    assert!(ExplicitFunction::new(2, 1, 1, vec![0, 2]).is_err());
    assert!(ExplicitFunction::new(2, 1, 1, vec![0]).is_err());
    assert!(ExplicitFunction::new(0, 1, 1, vec![]).is_err());
    assert!(ExplicitFunction::identity(5, 1, 2).is_err());
    let f = ExplicitFunction::identity_characters(KeyCodec::new(2, 2).unwrap()).unwrap();
    assert_eq!(f.row(0b1110), &[0b10, 0b11]);
}

#[test]
fn composition_of_identities() {
    let f = ExplicitFunction::identity(4, 2, 2).unwrap();
    let g = vec![ExplicitFunction::identity(4, 1, 2).unwrap(); 2];
    let out = odd_composition_check(&f, &g, 4).unwrap();
    assert!(out.hypotheses_hold);
    assert!(out.holds());
    assert_eq!(out.composed.out_char_count(), 2);
    assert_eq!(out.composed.row(3), &[3, 3]);
}

#[test]
fn composition_vacuous_and_errors() {
    let f = constant(4, 1);
    let g = vec![ExplicitFunction::identity(4, 1, 2).unwrap()];
    let out = odd_composition_check(&f, &g, 2).unwrap();
    assert!(!out.hypotheses_hold);
    assert!(out.conclusion.is_none());
    assert!(out.holds());
    assert!(compose(&f, &[]).is_err());
    assert!(compose(&f, &[ExplicitFunction::identity(2, 1, 1).unwrap()]).is_err());
}

#[test]
fn composition_over_random_odd_functions() {
    let mut stream = SampleStream::new(13);
    let mut tested = 0;
    for _ in 0..1000 {
        let f = ExplicitFunction::random(5, 2, 2, &mut stream).unwrap();
        let g: Vec<ExplicitFunction> = (0..2)
            .map(|_| ExplicitFunction::random(4, 2, 2, &mut stream).unwrap())
            .collect();
        let out = odd_composition_check(&f, &g, 3).unwrap();
        assert!(out.holds());
        tested += u32::from(out.hypotheses_hold);
    }
    assert!(tested > 20, "only {tested} trials met the hypotheses");
}

#[test]
fn simple_tabulation_is_3_not_4_independent() {
    let f = ExplicitFunction::identity_characters(KeyCodec::new(1, 2).unwrap()).unwrap();
    let three = exact_independence(&f, 3, 1).unwrap();
    assert!(three.passed());
    assert_eq!(three.fillings, 16);
    let four = exact_independence(&f, 4, 1).unwrap();
    assert!(!four.passed());
    assert_eq!(four.witness, Some(vec![0, 1, 2, 3]));
    assert_eq!(four.independent_up_to, 3);
}

#[test]
fn unique_function_gives_exact_independence() {
    let f = ExplicitFunction::identity(4, 2, 2).unwrap();
    assert!(is_k_unique(&f, 4).unwrap().passed());
    let out = exact_independence(&f, 4, 1).unwrap();
    assert_eq!(out.fillings, 256);
    assert!(out.passed());
    assert_eq!(out.tuples, 15);
}

#[test]
fn injective_single_lookup_is_fully_independent() {
    let f = ExplicitFunction::identity(4, 1, 2).unwrap();
    assert!(exact_independence(&f, 4, 1).unwrap().passed());
    assert!(exact_independence(&f, 4, 2).unwrap().passed());
    let g = constant(3, 1);
    let out = exact_independence(&g, 2, 1).unwrap();
    assert_eq!(out.witness, Some(vec![0, 1]));
    assert_eq!(out.independent_up_to, 1);
}

#[test]
fn filling_budget_is_enforced() {
    let f = ExplicitFunction::identity(4, 4, 3).unwrap();
    assert!(matches!(
        exact_independence(&f, 2, 1),
        Err(crate::Error::Resource { .. })
    ));
    let small = ExplicitFunction::identity(4, 2, 2).unwrap();
    assert!(exact_independence_with_budget(&small, 2, 1, 255).is_err());
}

#[test]
fn rectangles_cancel_exhaustively() {
    let params = TabulationParams::new(2, 2, 8, 3).unwrap();
    for seed in 0..20 {
        let st = SimpleTabulation::generate(params, seed).unwrap();
        let out = rectangle_zero_check(&st).unwrap();
        assert!(out.exhaustive && out.passed());
        assert_eq!(out.checked, 36);
    }
}

#[test]
fn boxes_cancel_when_sampled_and_in_three_dimensions() {
    let wide = SimpleTabulation::generate(TabulationParams::new(12, 2, 64, 2).unwrap(), 3).unwrap();
    let out = rectangle_zero_check(&wide).unwrap();
    assert!(!out.exhaustive && out.passed());
    let cube = SimpleTabulation::generate(TabulationParams::new(2, 3, 16, 1).unwrap(), 4).unwrap();
    let out = box_zero_check(&cube, 1 << 20, 1).unwrap();
    assert!(out.exhaustive && out.passed());
    assert_eq!(out.checked, 216);
    assert!(rectangle_zero_check(&cube).is_err());
}

fn small_double(seed: u64) -> crate::Result<impl Fn(u64) -> crate::Result<u64>> {
    let h = DoubleTabulation::lazy(KeyCodec::new(8, 2).unwrap(), 6, 8, 32, seed)?;
    Ok(move |k| h.eval(k))
}

#[test]
fn chi_square_accepts_double_tabulation() {
    let out =
        chi_square_independence(small_double, &[1, 2, 0x0300], 20_000, 4, 32, FROZEN_TRIAL_SEED).unwrap();
    assert_eq!(out.cells, 64);
    assert_eq!(out.degrees_of_freedom, 63);
    assert!(out.in_band(), "{out:?}");
}

#[test]
fn chi_square_rejects_broken_scheme() {
    let broken = |seed| -> crate::Result<_> {
        let (p1, p2) = double_params(KeyCodec::new(8, 2).unwrap(), 6, 8, 32)?;
        let h =
            DoubleTabulation::from_parts(LazyTabulation::new(p1, seed), SimpleTabulation::zeroed(p2), seed)?;
        Ok(move |k| h.eval(k))
    };
    let out = chi_square_independence(broken, &[1, 2, 3], 20_000, 4, 32, FROZEN_TRIAL_SEED).unwrap();
    assert!(out.p_value < 1e-10);
}

#[test]
fn chi_square_calibration_stream() {
    let reference = |seed| -> crate::Result<_> {
        Ok(move |k: u64| {
            let mut s = SampleStream::new(seed ^ k.wrapping_mul(0x9E37_79B9_7F4A_7C15));
            Ok(s.next_u64())
        })
    };
    let out = chi_square_independence(reference, &[1, 2, 3], 20_000, 4, 64, FROZEN_TRIAL_SEED).unwrap();
    assert!(out.in_band(), "{out:?}");
}

#[test]
fn chi_square_argument_errors() {
    assert!(chi_square_independence(small_double, &[1, 2], 399, 4, 32, 0).is_err());
    assert!(chi_square_independence(small_double, &[1, 2], 10_000, 3, 32, 0).is_err());
    assert!(chi_square_independence(small_double, &[1, 1], 10_000, 4, 32, 0).is_err());
    assert!(chi_square_independence(small_double, &[], 10_000, 4, 32, 0).is_err());
    assert!(chi_square_independence(small_double, &[1, 2, 3, 4, 5], 10_000, 2, 32, 0).is_err());
}

#[test]
fn chi_square_is_deterministic() {
    let a = chi_square_independence(small_double, &[5, 6], 2_000, 4, 32, 9).unwrap();
    let b = chi_square_independence(small_double, &[5, 6], 2_000, 4, 32, 9).unwrap();
    assert_eq!(a, b);
}

#[test]
fn implication_suite_holds() {
    let rep = implication_suite(500, 7).unwrap();
    assert!(rep.passed(), "{rep:?}");
    assert_eq!(rep.trials, 500);
    assert!(rep.unique > 20 && rep.odd > rep.unique / 2, "{rep:?}");
    assert!(rep.composition_hypotheses > 20, "{rep:?}");
}

#[test]
fn verdict_record_format() {
    let f = constant(3, 1);
    let rec = VerdictRecord::from_check("k-unique", "n=3,d=1,k=2", &is_k_unique(&f, 2).unwrap());
    assert_eq!(
        rec.to_string(),
        "check=k-unique params=n=3,d=1,k=2 verdict=fail witness=0,1 subsets=1 kind=not-unique"
    );
    let pass = VerdictRecord::new("rectangle", "b=2", true).with("checked", 36);
    assert_eq!(
        pass.to_string(),
        "check=rectangle params=b=2 verdict=pass witness=- checked=36"
    );
}
