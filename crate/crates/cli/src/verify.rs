// SPDX-License-Identifier: Apache-2.0

use std::io::Write;

use clap::{Args, ValueEnum};
use hitab::schemes::double_params;
use hitab::verify::{
    chi_square_independence, exact_independence_with_budget, implication_suite, is_k_odd_with_budget,
    is_k_unique_with_budget, rectangle_zero_check, ExplicitFunction, VerdictRecord, DEFAULT_FILLING_BUDGET,
    DEFAULT_SUBSET_BUDGET, FROZEN_TRIAL_SEED,
};
use hitab::{DoubleTabulation, KeyCodec, LazyTabulation, Preset, SimpleTabulation, TabulationParams};

use crate::error::{CliError, CliResult};
use crate::outln;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Uniqueness,
    Oddness,
    Lemma1,
    Rectangle,
    Chisq,
    All,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    /// Trials for the randomized parts; chisq defaults to 100000, the rest to 500.
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_SUBSET_BUDGET)]
    pub subset_budget: u64,
    #[arg(long, default_value_t = DEFAULT_FILLING_BUDGET)]
    pub filling_budget: u64,
}

/// Keys hashed jointly by the chi-square suite.
pub const CHISQ_KEYS: [u64; 3] = [0x0000_0001, 0x0001_0000, 0x1234_5678];
pub const CHISQ_BINS: u64 = 4;

/// `(name, f, k, expect_pass)`: frozen small instances.
fn instances() -> hitab::Result<Vec<(&'static str, ExplicitFunction, u32, bool)>> {
    let grid = ExplicitFunction::identity_characters(KeyCodec::new(1, 2)?)?;
    let coord = ExplicitFunction::identity(4, 2, 2)?;
    Ok(vec![
        ("identity-coordinate", coord, 4, true),
        ("grid-2x2", grid.clone(), 3, true),
        ("grid-2x2", grid, 4, false),
    ])
}

fn params_text(name: &str, f: &ExplicitFunction, k: u32) -> String {
    format!(
        "{name}:n={},d={},psi=2^{},k={k}",
        f.domain_size(),
        f.out_char_count(),
        f.out_char_bits()
    )
}

fn uniqueness(a: &VerifyArgs) -> CliResult<Vec<VerdictRecord>> {
    let mut recs = Vec::new();
    for (name, f, k, expect) in instances()? {
        let out = is_k_unique_with_budget(&f, k, a.subset_budget)?;
        let mut rec = VerdictRecord::from_check("uniqueness", params_text(name, &f, k), &out);
        rec.passed = out.passed() == expect;
        recs.push(rec.with("expected", if expect { "unique" } else { "not-unique" }));
    }
    Ok(recs)
}

fn oddness(a: &VerifyArgs) -> CliResult<Vec<VerdictRecord>> {
    let mut recs = Vec::new();
    for (name, f, k, expect) in instances()? {
        let out = is_k_odd_with_budget(&f, k, a.subset_budget)?;
        let mut rec = VerdictRecord::from_check("oddness", params_text(name, &f, k), &out);
        rec.passed = out.passed() == expect;
        recs.push(rec.with("expected", if expect { "odd" } else { "not-odd" }));
    }
    let trials = a.trials.unwrap_or(500);
    let r = implication_suite(trials, a.seed)?;
    recs.push(
        VerdictRecord::new(
            "implications",
            format!("trials={trials},seed={}", a.seed),
            r.passed(),
        )
        .with("unique", r.unique)
        .with("odd", r.odd)
        .with("independent", r.independent)
        .with("composition_hypotheses", r.composition_hypotheses)
        .with("unique_not_odd", r.unique_not_odd)
        .with("odd_not_independent", r.odd_not_independent)
        .with("composition_failures", r.composition_failures)
        .with("bad_witnesses", r.bad_witnesses),
    );
    Ok(recs)
}

fn lemma1(a: &VerifyArgs) -> CliResult<Vec<VerdictRecord>> {
    let mut recs = Vec::new();
    let coord = ExplicitFunction::identity(4, 2, 2)?;
    let unique = is_k_unique_with_budget(&coord, 4, a.subset_budget)?;
    let out = exact_independence_with_budget(&coord, 4, 1, a.filling_budget)?;
    recs.push(
        VerdictRecord::new(
            "lemma1",
            "identity-coordinate:n=4,d=2,psi=2^2,k=4,r_bits=1",
            unique.passed() && out.passed(),
        )
        .with("unique", unique.passed())
        .with("fillings", out.fillings)
        .with("tuples", out.tuples)
        .with("independent_up_to", out.independent_up_to),
    );

    let grid = ExplicitFunction::identity_characters(KeyCodec::new(1, 2)?)?;
    let three = exact_independence_with_budget(&grid, 3, 1, a.filling_budget)?;
    let four = exact_independence_with_budget(&grid, 4, 1, a.filling_budget)?;
    let mut rec = VerdictRecord::new(
        "simple-3-not-4",
        "simple:in_bits=1,c=2,d=1,r_bits=1",
        three.passed() && !four.passed(),
    )
    .with("fillings", four.fillings)
    .with("independent_up_to", four.independent_up_to);
    if let Some(w) = &four.witness {
        rec = rec.with_witness(w);
    }
    recs.push(rec);
    Ok(recs)
}

fn rectangle(a: &VerifyArgs) -> CliResult<Vec<VerdictRecord>> {
    let params = TabulationParams::new(2, 2, 16, 2)?;
    let seeds = 100;
    let (mut checked, mut failed) = (0u64, 0u64);
    let mut witness = Vec::new();
    for i in 0..seeds {
        let st = SimpleTabulation::generate(params, a.seed.wrapping_add(i))?;
        let out = rectangle_zero_check(&st)?;
        checked += out.checked;
        if let Some(sides) = out.failure {
            failed += 1;
            if witness.is_empty() {
                witness = sides.iter().flat_map(|&(x, y)| [x, y]).collect();
            }
        }
    }
    Ok(vec![VerdictRecord::new(
        "rectangle",
        format!("in_bits=2,c=2,seeds={seeds},first_seed={}", a.seed),
        failed == 0,
    )
    .with_witness(&witness)
    .with("rectangles", checked)
    .with("failures", failed)])
}

fn chisq(a: &VerifyArgs) -> CliResult<Vec<VerdictRecord>> {
    let trials = a.trials.unwrap_or(100_000);
    let (codec, d, psi_bits) = Preset::Double32x2.first_level()?;
    let r_bits = 64;
    let sound = |seed| -> hitab::Result<_> {
        let h = DoubleTabulation::lazy(codec, d, psi_bits, r_bits, seed)?;
        Ok(move |k| h.eval(k))
    };
    let good = chi_square_independence(sound, &CHISQ_KEYS, trials, CHISQ_BINS, r_bits, FROZEN_TRIAL_SEED)?;

    // Second level tables left at zero: every key hashes to 0.
    let broken = |seed| -> hitab::Result<_> {
        let (p1, p2) = double_params(codec, d, psi_bits, r_bits)?;
        let h =
            DoubleTabulation::from_parts(LazyTabulation::new(p1, seed), SimpleTabulation::zeroed(p2), seed)?;
        Ok(move |k| h.eval(k))
    };
    let bad = chi_square_independence(broken, &CHISQ_KEYS, trials, CHISQ_BINS, r_bits, FROZEN_TRIAL_SEED)?;

    let keys: Vec<String> = CHISQ_KEYS.iter().map(|k| format!("{k:x}")).collect();
    let p = |name: &str| format!("{name}:keys={},bins={CHISQ_BINS},trials={trials}", keys.join("+"));
    Ok(vec![
        VerdictRecord::new("chisq", p("32-2"), good.in_band())
            .with("statistic", format!("{:.4}", good.statistic))
            .with("dof", good.degrees_of_freedom)
            .with("p_value", format!("{:.6e}", good.p_value)),
        VerdictRecord::new("chisq-reject", p("broken-32-2"), bad.p_value < 1e-10)
            .with("statistic", format!("{:.4}", bad.statistic))
            .with("dof", bad.degrees_of_freedom)
            .with("p_value", format!("{:.6e}", bad.p_value)),
    ])
}

pub fn run(a: VerifyArgs, out: &mut impl Write) -> CliResult {
    let one = [a.suite];
    let suites: &[Suite] = match a.suite {
        Suite::All => &[
            Suite::Uniqueness,
            Suite::Oddness,
            Suite::Lemma1,
            Suite::Rectangle,
            Suite::Chisq,
        ],
        _ => &one,
    };
    let mut failed = 0;
    for s in suites {
        let recs = match s {
            Suite::Uniqueness => uniqueness(&a)?,
            Suite::Oddness => oddness(&a)?,
            Suite::Lemma1 => lemma1(&a)?,
            Suite::Rectangle => rectangle(&a)?,
            Suite::Chisq => chisq(&a)?,
            Suite::All => unreachable!(),
        };
        for r in recs {
            failed += usize::from(!r.passed);
            outln!(out, "{r}")?;
        }
    }
    if failed > 0 {
        return Err(CliError::Failed(format!("{failed} verdict(s) failed")));
    }
    Ok(())
}
