// SPDX-License-Identifier: Apache-2.0

//! Failure-probability certificates for k-uniqueness of simple tabulation.
//!
//! For a random simple tabulation `h: Φ^c → Ψ^d`, the probability that `h` is
//! not k-unique (or, for `ε < 1`, lacks the stronger distinct-output property)
//! is bounded by
//!
//! ```text
//! Σ_{c'=1..c} C(c, c') Σ_{ℓ=2c'..kc'} min{P_{ℓ,c'}, Q^k_{ℓ,c'}}
//!
//! P_{ℓ,c} = (ec|Φ|/ℓ)^ℓ · (e(ℓ/c)^{2c-1} / (ε 2^{c-1} |Ψ|))^m
//! Q^k_{ℓ,c} = (ec|Φ|/ℓ)^ℓ · (e(ℓ/c)^c / k)^k · (e k² c / (ε ℓ |Ψ|))^m
//! ```
//!
//! with `m = ⌈qℓ⌉` equations and `q = εd/(2c)`. Every term is clamped at 1.
//! All sums are accumulated in the log domain, in a fixed order, once in
//! `f64` and once with 256-bit mantissas; the report flags any relative
//! disagreement above `1e-6`.
//!
//! [`asymptotic_failure_estimate`] is an advisory order-of-magnitude figure
//! only. The double sum above is the certified bound.

mod arith;
mod report;

pub use report::{round_up_decimal, ActiveSubtotal, BoundReport, Term, TermWinner};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

use arith::{Arith, BigArith, F64Arith};

/// Mantissa bits of the high-precision route.
pub const HIGH_PRECISION_BITS: usize = 256;

/// Maximum relative disagreement, in log space, between the two precisions.
pub const PRECISION_TOLERANCE: f64 = 1e-6;

/// `ε ∈ (0, 1]` as an exact fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Epsilon {
    num: u64,
    den: u64,
}

impl Epsilon {
    pub const ONE: Epsilon = Epsilon { num: 1, den: 1 };

    pub fn new(num: u64, den: u64) -> Result<Self> {
        if num == 0 || den == 0 || num > den {
            return Err(Error::domain(format!("epsilon {num}/{den} is not in (0, 1]")));
        }
        let g = gcd(num, den);
        Ok(Epsilon {
            num: num / g,
            den: den / g,
        })
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// Parses `1`, `0.5`, or `1/2`.
impl FromStr for Epsilon {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::domain(format!("cannot parse epsilon {s:?}"));
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            return Epsilon::new(
                n.trim().parse().map_err(|_| bad())?,
                d.trim().parse().map_err(|_| bad())?,
            );
        }
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if frac.len() > 18 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let den = 10u64.pow(frac.len() as u32);
        let int: u64 = if int.is_empty() {
            0
        } else {
            int.parse().map_err(|_| bad())?
        };
        let frac: u64 = if frac.is_empty() {
            0
        } else {
            frac.parse().map_err(|_| bad())?
        };
        let num = int
            .checked_mul(den)
            .and_then(|v| v.checked_add(frac))
            .ok_or_else(bad)?;
        Epsilon::new(num, den)
    }
}

/// Inputs to the failure-probability calculator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BoundParams {
    c: u32,
    d: u32,
    phi_size: u128,
    psi_size: u128,
    k: u64,
    epsilon: Epsilon,
}

impl BoundParams {
    pub fn new(c: u32, d: u32, phi_size: u128, psi_size: u128, k: u64, epsilon: Epsilon) -> Result<Self> {
        if c == 0 || d == 0 || phi_size == 0 || psi_size == 0 || k == 0 {
            return Err(Error::domain("bound parameters must be positive"));
        }
        if c > 64 {
            return Err(Error::domain(format!("c = {c} is too large")));
        }
        Ok(BoundParams {
            c,
            d,
            phi_size,
            psi_size,
            k,
            epsilon,
        })
    }

    /// `|Φ| = 2^phi_bits`, `|Ψ| = 2^psi_bits`, `ε = 1`.
    pub fn from_bits(c: u32, d: u32, phi_bits: u32, psi_bits: u32, k: u64) -> Result<Self> {
        if phi_bits > 127 || psi_bits > 127 {
            return Err(Error::domain("alphabet sizes above 2^127 are not supported"));
        }
        Self::new(c, d, 1 << phi_bits, 1 << psi_bits, k, Epsilon::ONE)
    }

    pub fn with_epsilon(mut self, epsilon: Epsilon) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_k(self, k: u64) -> Result<Self> {
        Self::new(self.c, self.d, self.phi_size, self.psi_size, k, self.epsilon)
    }

    pub fn c(&self) -> u32 {
        self.c
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn phi_size(&self) -> u128 {
        self.phi_size
    }

    pub fn psi_size(&self) -> u128 {
        self.psi_size
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn epsilon(&self) -> Epsilon {
        self.epsilon
    }

    /// `q = εd/(2c)` for a given number of positions, as `(numerator, denominator)`.
    pub fn q(&self, positions: u32) -> (u128, u128) {
        (
            u128::from(self.epsilon.num) * u128::from(self.d),
            u128::from(self.epsilon.den) * 2 * u128::from(positions),
        )
    }
}

impl fmt::Display for BoundParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "c={},d={},phi={},psi={},k={},epsilon={}",
            self.c, self.d, self.phi_size, self.psi_size, self.k, self.epsilon
        )
    }
}

/// How `c` is substituted when only `c' < c` positions are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Convention {
    /// Every `c`, including the one inside `q`, becomes `c'`.
    #[default]
    ActiveAll,
    /// `q = εd/(2c)` keeps the full `c`; every other `c` becomes `c'`.
    FixedQ,
    /// Every `c` keeps its full value; only the summation ranges use `c'`.
    GlobalAll,
}

impl Convention {
    pub const ALL: [Convention; 3] = [Convention::ActiveAll, Convention::FixedQ, Convention::GlobalAll];

    pub fn name(self) -> &'static str {
        match self {
            Convention::FixedQ => "fixed-q",
            Convention::ActiveAll => "active-all",
            Convention::GlobalAll => "global-all",
        }
    }

    /// `(positions used inside the counting factors, positions used inside q)`.
    fn positions(self, c: u32, c_active: u32) -> (u32, u32) {
        match self {
            Convention::FixedQ => (c_active, c),
            Convention::ActiveAll => (c_active, c_active),
            Convention::GlobalAll => (c, c),
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Convention::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::domain(format!("unknown convention {s:?}")))
    }
}

/// Number of equations charged per list length `ℓ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Exponent {
    /// `m = ⌈qℓ⌉`.
    #[default]
    Ceil,
    /// `m = qℓ`, an upper bound whenever the term is at most 1.
    Relaxed,
}

impl Exponent {
    pub fn name(self) -> &'static str {
        match self {
            Exponent::Ceil => "ceil",
            Exponent::Relaxed => "relaxed",
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ceil" => Ok(Exponent::Ceil),
            "relaxed" => Ok(Exponent::Relaxed),
            _ => Err(Error::domain(format!("unknown exponent form {s:?}"))),
        }
    }
}

/// Which terms enter the sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// `min{P, Q}` for `ℓ = 2c'..kc'`.
    Total,
    /// `P` alone for `ℓ = 2c'..ℓ*`.
    POnly { lstar: u64 },
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Total => f.write_str("total"),
            Mode::POnly { lstar } => write!(f, "p-only(lstar={lstar})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct BoundOptions {
    pub convention: Convention,
    pub exponent: Exponent,
}

/// One evaluation of a single term, generic over the arithmetic.
struct TermEval<'a, A: Arith> {
    arith: &'a mut A,
    params: BoundParams,
    options: BoundOptions,
}

impl<A: Arith> TermEval<'_, A> {
    fn zero(&mut self) -> A::Num {
        self.arith.int(0)
    }

    fn equations(&mut self, ell: u64, q_positions: u32) -> A::Num {
        let (qn, qd) = self.params.q(q_positions);
        let num = qn * u128::from(ell);
        match self.options.exponent {
            Exponent::Ceil => self.arith.int(num.div_ceil(qd)),
            Exponent::Relaxed => {
                let n = self.arith.int(num);
                let d = self.arith.int(qd);
                self.arith.div(&n, &d)
            }
        }
    }

    /// `ℓ (1 + ln c + ln|Φ| - ln ℓ)`.
    fn list_factor(&mut self, ell: u64, c: u32) -> A::Num {
        let a = &mut *self.arith;
        let one = a.int(1);
        let lc = a.ln_int(c.into());
        let lphi = a.ln_int(self.params.phi_size);
        let lell = a.ln_int(ell.into());
        let s = a.add(&one, &lc);
        let s = a.add(&s, &lphi);
        let s = a.sub(&s, &lell);
        let l = a.int(ell.into());
        a.mul(&l, &s)
    }

    fn ln_epsilon(&mut self) -> A::Num {
        let eps = self.params.epsilon;
        let a = &mut *self.arith;
        let n = a.ln_int(eps.num.into());
        let d = a.ln_int(eps.den.into());
        a.sub(&n, &d)
    }

    fn clamp(&mut self, v: A::Num) -> A::Num {
        let z = self.zero();
        self.arith.min(&v, &z)
    }

    fn p(&mut self, ell: u64, c_active: u32) -> A::Num {
        let (cf, cq) = self.options.convention.positions(self.params.c, c_active);
        let list = self.list_factor(ell, cf);
        let m = self.equations(ell, cq);
        let leps = self.ln_epsilon();
        let a = &mut *self.arith;
        let one = a.int(1);
        let lell = a.ln_int(ell.into());
        let lc = a.ln_int(cf.into());
        let ln2 = a.ln_int(2);
        let lpsi = a.ln_int(self.params.psi_size);
        let ratio = a.sub(&lell, &lc);
        let pow = a.int(u128::from(2 * cf - 1));
        let t = a.mul(&pow, &ratio);
        let mut s = a.add(&one, &t);
        s = a.sub(&s, &leps);
        let cm1 = a.int(u128::from(cf - 1));
        let t = a.mul(&cm1, &ln2);
        s = a.sub(&s, &t);
        s = a.sub(&s, &lpsi);
        let eq = a.mul(&m, &s);
        let v = a.add(&list, &eq);
        self.clamp(v)
    }

    fn q(&mut self, ell: u64, c_active: u32) -> A::Num {
        let (cf, cq) = self.options.convention.positions(self.params.c, c_active);
        let list = self.list_factor(ell, cf);
        let m = self.equations(ell, cq);
        let leps = self.ln_epsilon();
        let k = self.params.k;
        let a = &mut *self.arith;
        let one = a.int(1);
        let lell = a.ln_int(ell.into());
        let lc = a.ln_int(cf.into());
        let lk = a.ln_int(k.into());
        let lpsi = a.ln_int(self.params.psi_size);
        let kk = a.int(k.into());
        let c_num = a.int(cf.into());
        // k (1 + c (ln ℓ - ln c) - ln k)
        let ratio = a.sub(&lell, &lc);
        let t = a.mul(&c_num, &ratio);
        let s = a.add(&one, &t);
        let s = a.sub(&s, &lk);
        let keys = a.mul(&kk, &s);
        // m (1 + 2 ln k + ln c - ln ε - ln ℓ - ln|Ψ|)
        let two = a.int(2);
        let t = a.mul(&two, &lk);
        let mut s = a.add(&one, &t);
        s = a.add(&s, &lc);
        s = a.sub(&s, &leps);
        s = a.sub(&s, &lell);
        s = a.sub(&s, &lpsi);
        let eq = a.mul(&m, &s);
        let v = a.add(&list, &keys);
        let v = a.add(&v, &eq);
        self.clamp(v)
    }
}

fn check_p_range(ell: u64, c_active: u32, params: &BoundParams) -> Result<()> {
    if c_active == 0 || c_active > params.c {
        return Err(Error::domain(format!(
            "active positions {c_active} outside 1..={}",
            params.c
        )));
    }
    if ell < 2 * u64::from(c_active) {
        return Err(Error::domain(format!(
            "list length {ell} is below 2c' = {}",
            2 * c_active
        )));
    }
    Ok(())
}

/// `ln min(P_{ℓ,c'}, 1)`.
pub fn p_bound(ell: u64, c_active: u32, params: &BoundParams, options: BoundOptions) -> Result<f64> {
    check_p_range(ell, c_active, params)?;
    let mut arith = F64Arith;
    Ok(TermEval {
        arith: &mut arith,
        params: *params,
        options,
    }
    .p(ell, c_active))
}

/// `ln min(Q^k_{ℓ,c'}, 1)`.
pub fn q_bound(ell: u64, c_active: u32, params: &BoundParams, options: BoundOptions) -> Result<f64> {
    check_p_range(ell, c_active, params)?;
    if ell > params.k * u64::from(c_active) {
        return Err(Error::domain(format!(
            "list length {ell} exceeds kc' = {}",
            params.k * u64::from(c_active)
        )));
    }
    let mut arith = F64Arith;
    Ok(TermEval {
        arith: &mut arith,
        params: *params,
        options,
    }
    .q(ell, c_active))
}

/// `ln C(n, r)` computed exactly then logged.
fn ln_binomial<A: Arith>(a: &mut A, n: u32, r: u32) -> A::Num {
    let mut acc: u128 = 1;
    for i in 0..u128::from(r) {
        acc = acc * (u128::from(n) - i) / (i + 1);
    }
    a.ln_int(acc)
}

fn binomial(n: u32, r: u32) -> u128 {
    (0..u128::from(r)).fold(1u128, |acc, i| acc * (u128::from(n) - i) / (i + 1))
}

struct Evaluation {
    total_ln: f64,
    subtotals: Vec<(u32, f64)>,
    terms: Vec<Vec<Term>>,
}

fn evaluate<A: Arith>(
    arith: &mut A,
    params: &BoundParams,
    options: BoundOptions,
    mode: Mode,
    record_terms: bool,
) -> Evaluation {
    let mut total: Option<A::Num> = None;
    let mut subtotals = Vec::new();
    let mut all_terms = Vec::new();
    for c_active in 1..=params.c {
        let lo = 2 * u64::from(c_active);
        let hi = match mode {
            Mode::Total => params.k * u64::from(c_active),
            Mode::POnly { lstar } => lstar,
        };
        let mut inner: Option<A::Num> = None;
        let mut terms = Vec::new();
        for ell in lo..=hi {
            let mut ev = TermEval {
                arith: &mut *arith,
                params: *params,
                options,
            };
            let p = ev.p(ell, c_active);
            let (term, q) = match mode {
                Mode::Total => {
                    let q = ev.q(ell, c_active);
                    let m = arith.min(&p, &q);
                    (m, Some(q))
                }
                Mode::POnly { .. } => (p.clone(), None),
            };
            if record_terms {
                let p_ln = arith.to_f64(&p);
                let q_ln = q.as_ref().map(|q| arith.to_f64(q));
                terms.push(Term {
                    ell,
                    p_ln,
                    q_ln,
                    winner: match q_ln {
                        Some(q) if q < p_ln => TermWinner::Q,
                        _ => TermWinner::P,
                    },
                });
            }
            inner = Some(arith.log_add(inner, &term));
        }
        let Some(inner) = inner else {
            subtotals.push((c_active, f64::NEG_INFINITY));
            all_terms.push(terms);
            continue;
        };
        let lb = ln_binomial(arith, params.c, c_active);
        let sub = arith.add(&lb, &inner);
        subtotals.push((c_active, arith.to_f64(&sub)));
        all_terms.push(terms);
        total = Some(arith.log_add(total, &sub));
    }
    Evaluation {
        total_ln: total.map_or(f64::NEG_INFINITY, |t| arith.to_f64(&t)),
        subtotals,
        terms: all_terms,
    }
}

/// Evaluates the certified bound with the default options.
pub fn total_bound(params: &BoundParams) -> BoundReport {
    total_bound_with(params, BoundOptions::default())
}

pub fn total_bound_with(params: &BoundParams, options: BoundOptions) -> BoundReport {
    bound_report(params, options, Mode::Total)
}

/// The P-only double sum with list lengths up to `lstar`.
pub fn p_only_bound(params: &BoundParams, lstar: u64, options: BoundOptions) -> BoundReport {
    bound_report(params, options, Mode::POnly { lstar })
}

pub fn bound_report(params: &BoundParams, options: BoundOptions, mode: Mode) -> BoundReport {
    let fast = evaluate(&mut F64Arith, params, options, mode, true);
    let high = evaluate(
        &mut BigArith::new(HIGH_PRECISION_BITS),
        params,
        options,
        mode,
        false,
    );
    let precision_ok = precision_agrees(fast.total_ln, high.total_ln);
    let per_active = fast
        .subtotals
        .iter()
        .zip(fast.terms)
        .map(|(&(c_active, subtotal_ln), terms)| ActiveSubtotal {
            c_active,
            binomial: binomial(params.c(), c_active),
            subtotal_ln,
            terms,
        })
        .collect();
    BoundReport {
        params: *params,
        options,
        mode,
        total_ln: fast.total_ln,
        total_ln_high: high.total_ln,
        precision_ok,
        per_active,
    }
}

fn precision_agrees(a: f64, b: f64) -> bool {
    if a == b {
        return true;
    }
    (a - b).abs() <= PRECISION_TOLERANCE * b.abs().max(f64::MIN_POSITIVE)
}

/// Largest integer `k` with `k^root ≤ n`.
pub fn integer_root(n: u128, root: u32) -> u128 {
    assert!(root > 0);
    let fits = |k: u128| -> bool {
        let mut acc: u128 = 1;
        for _ in 0..root {
            match acc.checked_mul(k) {
                Some(v) if v <= n => acc = v,
                _ => return false,
            }
        }
        true
    };
    let (mut lo, mut hi) = (0u128, n.min(1 << 64));
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        if fits(mid) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    lo
}

/// `⌊|Ψ|^{1/(5c)}⌋`, the uniqueness the asymptotic analysis targets.
pub fn uniqueness_target(params: &BoundParams) -> u128 {
    integer_root(params.psi_size, 5 * params.c)
}

/// An advisory estimate. It drops a lower-order factor and certifies nothing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdvisoryEstimate {
    pub ln: f64,
}

impl AdvisoryEstimate {
    pub fn log2(&self) -> f64 {
        self.ln / std::f64::consts::LN_2
    }

    pub fn is_certificate(&self) -> bool {
        false
    }
}

/// `ln(|Φ|² / |Ψ|^{εd/(2c)})`.
pub fn asymptotic_failure_estimate(params: &BoundParams) -> AdvisoryEstimate {
    let (qn, qd) = params.q(params.c);
    let exponent = qn as f64 / qd as f64;
    AdvisoryEstimate {
        ln: 2.0 * (params.phi_size as f64).ln() - exponent * (params.psi_size as f64).ln(),
    }
}

/// `ln Σ e^{x_i}` in the given order.
pub fn union_ln(lns: impl IntoIterator<Item = f64>) -> f64 {
    let mut a = F64Arith;
    let mut acc = None;
    for x in lns {
        if x != f64::NEG_INFINITY {
            acc = Some(a.log_add(acc, &x));
        }
    }
    acc.unwrap_or(f64::NEG_INFINITY)
}
