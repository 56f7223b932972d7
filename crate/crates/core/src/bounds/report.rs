// SPDX-License-Identifier: Apache-2.0

use std::fmt::{self, Write as _};

use super::{BoundOptions, BoundParams, Mode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TermWinner {
    P,
    Q,
}

/// One list length `ℓ` inside an inner sum. Values are natural logs, already clamped at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub ell: u64,
    pub p_ln: f64,
    /// `None` in P-only mode.
    pub q_ln: Option<f64>,
    pub winner: TermWinner,
}

impl Term {
    pub fn ln(&self) -> f64 {
        match self.q_ln {
            Some(q) => q.min(self.p_ln),
            None => self.p_ln,
        }
    }
}

/// `C(c, c') · Σ_ℓ term` for one number of active positions.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveSubtotal {
    pub c_active: u32,
    pub binomial: u128,
    pub subtotal_ln: f64,
    pub terms: Vec<Term>,
}

impl ActiveSubtotal {
    /// Maximal runs of equal winners as `(winner, first ℓ, last ℓ)`.
    pub fn winner_runs(&self) -> Vec<(TermWinner, u64, u64)> {
        let mut runs: Vec<(TermWinner, u64, u64)> = Vec::new();
        for t in &self.terms {
            match runs.last_mut() {
                Some(run) if run.0 == t.winner => run.2 = t.ell,
                _ => runs.push((t.winner, t.ell, t.ell)),
            }
        }
        runs
    }

    fn runs_text(&self) -> String {
        let runs = self.winner_runs();
        if runs.is_empty() {
            return "-".into();
        }
        runs.iter()
            .map(|(w, a, b)| {
                let w = if *w == TermWinner::P { "P" } else { "Q" };
                if a == b {
                    format!("{w}:{a}")
                } else {
                    format!("{w}:{a}-{b}")
                }
            })
            .collect::<Vec<_>>()
            .join(",")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub params: BoundParams,
    pub options: BoundOptions,
    pub mode: Mode,
    /// Natural log of the double sum, unclamped.
    pub total_ln: f64,
    /// The same sum evaluated with wide mantissas.
    pub total_ln_high: f64,
    pub precision_ok: bool,
    pub per_active: Vec<ActiveSubtotal>,
}

impl BoundReport {
    /// The reported probability bound: the double sum, capped at 1.
    pub fn probability_ln(&self) -> f64 {
        self.total_ln.max(self.total_ln_high).min(0.0)
    }

    pub fn probability(&self) -> f64 {
        self.probability_ln().exp()
    }

    /// Scientific notation, two significant digits, rounded up.
    pub fn decimal(&self) -> String {
        round_up_decimal(self.probability_ln())
    }

    /// Line-oriented `key=value` rendering.
    pub fn render_kv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "params={}", self.params);
        let _ = writeln!(out, "mode={}", self.mode);
        let _ = writeln!(out, "convention={}", self.options.convention);
        let _ = writeln!(out, "exponent={}", self.options.exponent);
        let _ = writeln!(out, "total_log_e={:.12e}", self.total_ln);
        let _ = writeln!(out, "total_log_e_high={:.12e}", self.total_ln_high);
        let _ = writeln!(out, "total_decimal={}", self.decimal());
        let _ = writeln!(out, "precision_ok={}", self.precision_ok);
        for s in &self.per_active {
            let _ = writeln!(
                out,
                "subtotal.c{}=log_e:{:.12e};decimal:{};binomial:{};winners:{}",
                s.c_active,
                s.subtotal_ln,
                round_up_decimal(s.subtotal_ln),
                s.binomial,
                s.runs_text()
            );
        }
        out
    }
}

/// Human-readable table.
impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "bound {} [{}]", self.params, self.mode)?;
        writeln!(
            f,
            "convention {}, exponent {}",
            self.options.convention, self.options.exponent
        )?;
        writeln!(
            f,
            "{:>4}  {:>10}  {:>22}  {:>9}  winners",
            "c'", "C(c,c')", "ln subtotal", "subtotal"
        )?;
        for s in &self.per_active {
            writeln!(
                f,
                "{:>4}  {:>10}  {:>22.12e}  {:>9}  {}",
                s.c_active,
                s.binomial,
                s.subtotal_ln,
                round_up_decimal(s.subtotal_ln),
                s.runs_text()
            )?;
        }
        write!(f, "total {} (ln {:.12e})", self.decimal(), self.total_ln)?;
        if !self.precision_ok {
            write!(
                f,
                "  PRECISION WARNING: high-precision ln {:.12e}",
                self.total_ln_high
            )?;
        }
        Ok(())
    }
}

/// Formats `e^ln` as `m.me±x`, rounding the mantissa up.
///
/// A relative margin of `1e-9` covers the error of the `f64` exponential, so a
/// value sitting on a rounding boundary is pushed to the next step.
pub fn round_up_decimal(ln: f64) -> String {
    if ln == f64::NEG_INFINITY {
        return "0".into();
    }
    if ln.is_nan() {
        return "NaN".into();
    }
    if ln == 0.0 {
        return "1.0e0".into();
    }
    let log10 = ln / std::f64::consts::LN_10;
    let mut exp = log10.floor() as i64;
    let mantissa = 10f64.powf(log10 - exp as f64) * (1.0 + 1e-9);
    let mut tenths = (mantissa * 10.0 - 1e-12).ceil() as i64;
    if tenths < 10 {
        tenths = 10;
    }
    if tenths >= 100 {
        tenths = 10;
        exp += 1;
    }
    format!("{}.{}e{}", tenths / 10, tenths % 10, exp)
}
