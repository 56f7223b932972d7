// SPDX-License-Identifier: Apache-2.0

use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use hitab::bounds::{bound_report, union_ln, Mode};
use hitab::schemes::DEFAULT_R_BITS;
use hitab::{
    BoundOptions, BoundParams, DoubleTabulation, KeyCodec, PolynomialHash, Preset, RecursivePlan,
    RecursiveTabulation, Scheme,
};

use crate::error::{io_usage, CliError, CliResult};
use crate::outln;

#[derive(Args, Debug)]
pub struct GenArgs {
    /// One of 32-2, 64-3, 64-4-triple.
    #[arg(long, conflicts_with_all = ["recursive", "poly"])]
    pub preset: Option<String>,
    /// Input characters per key.
    #[arg(long)]
    pub c: Option<u32>,
    /// Bits per input character.
    #[arg(long)]
    pub in_bits: Option<u32>,
    /// Output characters of the first level.
    #[arg(long)]
    pub d: Option<u32>,
    /// Bits per output character of the first level.
    #[arg(long)]
    pub out_bits: Option<u32>,
    /// Build a recursive tabulation for `--c` characters of a `--key-bits` key.
    #[arg(long, requires = "key_bits", conflicts_with = "poly")]
    pub recursive: bool,
    #[arg(long)]
    pub key_bits: Option<u32>,
    /// Build the degree K-1 polynomial baseline instead.
    #[arg(long, value_name = "K")]
    pub poly: Option<u32>,
    /// Hash width in bits.
    #[arg(long, default_value_t = DEFAULT_R_BITS)]
    pub r_bits: u32,
    /// Uniqueness the certificate is computed for.
    #[arg(long, default_value_t = Preset::CLAIMED_UNIQUENESS)]
    pub k: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, short)]
    pub out: PathBuf,
}

enum Certificate {
    Single(BoundParams),
    Levels(Vec<BoundParams>),
    None,
}

fn need(v: Option<u32>, flag: &str) -> CliResult<u32> {
    v.ok_or_else(|| CliError::Usage(format!("--{flag} is required without --preset")))
}

fn build(a: &GenArgs) -> CliResult<(Scheme, Certificate)> {
    let budget = crate::budget()?;
    if let Some(name) = &a.preset {
        let preset: Preset = name.parse()?;
        let params = preset.bound_params()?.with_k(a.k)?;
        return Ok((
            preset.build(a.r_bits, a.seed, &budget)?,
            Certificate::Single(params),
        ));
    }
    if let Some(k) = a.poly {
        let p = PolynomialHash::new(k, a.seed, a.r_bits)?;
        return Ok((Scheme::Poly(p), Certificate::None));
    }
    if a.recursive {
        let plan = RecursivePlan::new(need(a.c, "c")?, need(a.key_bits, "key-bits")?)?;
        let mut levels = Vec::new();
        for i in 0..plan.levels() as usize {
            let p = plan.level_params(i)?;
            levels.push(BoundParams::from_bits(
                p.in_char_count(),
                p.out_char_count(),
                p.in_char_bits(),
                p.out_char_bits(),
                a.k,
            )?);
        }
        let r = RecursiveTabulation::with_budget(plan, a.r_bits, a.seed, &budget)?;
        return Ok((Scheme::Recursive(r), Certificate::Levels(levels)));
    }
    let (c, in_bits, d, out_bits) = (
        need(a.c, "c")?,
        need(a.in_bits, "in-bits")?,
        need(a.d, "d")?,
        need(a.out_bits, "out-bits")?,
    );
    let codec = KeyCodec::new(in_bits, c)?;
    let params = BoundParams::from_bits(c, d, in_bits, out_bits, a.k)?;
    let h = DoubleTabulation::with_budget(codec, d, out_bits, a.r_bits, a.seed, &budget)?;
    Ok((Scheme::Double(h), Certificate::Single(params)))
}

pub fn run(a: GenArgs, out: &mut impl Write) -> CliResult {
    let (scheme, cert) = build(&a)?;
    let bytes = scheme.serialize();
    std::fs::write(&a.out, &bytes).map_err(|e| io_usage("write", &a.out, e))?;

    outln!(out, "scheme={}", scheme.tag().name())?;
    outln!(out, "seed={}", scheme.seed())?;
    outln!(out, "file={}", a.out.display())?;
    outln!(out, "bytes={}", bytes.len())?;
    outln!(out, "output_bits={}", scheme.output_bits())?;
    outln!(out, "lookups_per_key={}", scheme.lookups_per_key())?;
    let options = BoundOptions::default();
    match cert {
        Certificate::Single(params) => {
            let report = bound_report(&params, options, Mode::Total);
            write!(out, "{}", report.render_kv()).map_err(|e| CliError::Usage(e.to_string()))?;
            outln!(out, "certificate={}", report.decimal())?;
        }
        Certificate::Levels(levels) => {
            let mut lns = Vec::new();
            for (i, params) in levels.iter().enumerate() {
                let report = bound_report(params, options, Mode::Total);
                outln!(out, "level{i}.params={params}")?;
                outln!(out, "level{i}.total_decimal={}", report.decimal())?;
                outln!(out, "level{i}.precision_ok={}", report.precision_ok)?;
                lns.push(report.probability_ln());
            }
            // Union over levels, each level function being one shared table set.
            let total = union_ln(lns).min(0.0);
            outln!(out, "certificate={}", hitab::bounds::round_up_decimal(total))?;
        }
        Certificate::None => outln!(out, "certificate=none")?,
    }
    Ok(())
}
