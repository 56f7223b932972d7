// SPDX-License-Identifier: Apache-2.0

use std::io::Write;

use clap::{Args, ValueEnum};
use hitab::bounds::{bound_report, Mode};
use hitab::{BoundOptions, BoundParams, Convention, Epsilon, Exponent, Preset};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    Total,
    POnly,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Format {
    Kv,
    Table,
}

#[derive(Args, Debug)]
pub struct BoundArgs {
    /// Take c, d, Φ and Ψ from a preset's first level.
    #[arg(long, conflicts_with_all = ["c", "d", "phi_bits", "psi_bits"])]
    pub preset: Option<String>,
    #[arg(long)]
    pub c: Option<u32>,
    #[arg(long)]
    pub d: Option<u32>,
    /// `|Φ| = 2^phi_bits`.
    #[arg(long)]
    pub phi_bits: Option<u32>,
    /// `|Ψ| = 2^psi_bits`.
    #[arg(long)]
    pub psi_bits: Option<u32>,
    #[arg(long, default_value_t = Preset::CLAIMED_UNIQUENESS)]
    pub k: u64,
    /// Decimal or fraction in (0, 1].
    #[arg(long, default_value = "1")]
    pub epsilon: String,
    #[arg(long, value_enum, default_value_t = ModeArg::Total)]
    pub mode: ModeArg,
    /// List length where the P-only sum starts.
    #[arg(long)]
    pub lstar: Option<u64>,
    #[arg(long, default_value = "active-all")]
    pub convention: String,
    #[arg(long, default_value = "ceil")]
    pub exponent: String,
    #[arg(long, value_enum, default_value_t = Format::Kv)]
    pub format: Format,
}

pub fn params(a: &BoundArgs) -> CliResult<BoundParams> {
    let epsilon: Epsilon = a.epsilon.parse()?;
    let base = match &a.preset {
        Some(name) => name.parse::<Preset>()?.bound_params()?.with_k(a.k)?,
        None => {
            let get = |v: Option<u32>, flag: &str| {
                v.ok_or_else(|| CliError::Usage(format!("--{flag} is required without --preset")))
            };
            BoundParams::from_bits(
                get(a.c, "c")?,
                get(a.d, "d")?,
                get(a.phi_bits, "phi-bits")?,
                get(a.psi_bits, "psi-bits")?,
                a.k,
            )?
        }
    };
    Ok(base.with_epsilon(epsilon))
}

pub fn run(a: BoundArgs, out: &mut impl Write) -> CliResult {
    let params = params(&a)?;
    let options = BoundOptions {
        convention: a.convention.parse::<Convention>()?,
        exponent: a.exponent.parse::<Exponent>()?,
    };
    let mode = match (a.mode, a.lstar) {
        (ModeArg::Total, None) => Mode::Total,
        (ModeArg::Total, Some(_)) => return Err(CliError::Usage("--lstar needs --mode p-only".into())),
        (ModeArg::POnly, Some(lstar)) => Mode::POnly { lstar },
        (ModeArg::POnly, None) => return Err(CliError::Usage("--mode p-only needs --lstar".into())),
    };
    if let Mode::POnly { lstar } = mode {
        if lstar < 2 {
            return Err(CliError::Usage(format!("--lstar {lstar} must be at least 2")));
        }
    }
    let report = bound_report(&params, options, mode);
    let text = match a.format {
        Format::Kv => report.render_kv(),
        Format::Table => report.to_string(),
    };
    let text = if text.ends_with('\n') { text } else { text + "\n" };
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Usage(format!("write failed: {e}")))
}
