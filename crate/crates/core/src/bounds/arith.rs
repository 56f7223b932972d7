// SPDX-License-Identifier: Apache-2.0

//! Log-domain arithmetic backends: native `f64` and 256-bit binary floats.

use astro_float::{BigFloat, Consts, RoundingMode};

/// The operations the bound formulas need, over some real-number type.
pub(crate) trait Arith {
    type Num: Clone;

    fn int(&mut self, v: u128) -> Self::Num;
    fn add(&mut self, a: &Self::Num, b: &Self::Num) -> Self::Num;
    fn sub(&mut self, a: &Self::Num, b: &Self::Num) -> Self::Num;
    fn mul(&mut self, a: &Self::Num, b: &Self::Num) -> Self::Num;
    fn div(&mut self, a: &Self::Num, b: &Self::Num) -> Self::Num;
    fn ln(&mut self, a: &Self::Num) -> Self::Num;
    fn exp(&mut self, a: &Self::Num) -> Self::Num;
    fn less(&mut self, a: &Self::Num, b: &Self::Num) -> bool;
    fn to_f64(&mut self, a: &Self::Num) -> f64;

    fn ln_int(&mut self, v: u128) -> Self::Num {
        let x = self.int(v);
        self.ln(&x)
    }

    fn min(&mut self, a: &Self::Num, b: &Self::Num) -> Self::Num {
        if self.less(b, a) {
            b.clone()
        } else {
            a.clone()
        }
    }

    /// `ln(e^a + e^b)`; `None` stands for `ln 0`.
    fn log_add(&mut self, a: Option<Self::Num>, b: &Self::Num) -> Self::Num {
        let Some(a) = a else { return b.clone() };
        let (hi, lo) = if self.less(&a, b) {
            (b.clone(), a)
        } else {
            (a, b.clone())
        };
        let diff = self.sub(&lo, &hi);
        let e = self.exp(&diff);
        let one = self.int(1);
        let s = self.add(&one, &e);
        let l = self.ln(&s);
        self.add(&hi, &l)
    }
}

pub(crate) struct F64Arith;

impl Arith for F64Arith {
    type Num = f64;

    fn int(&mut self, v: u128) -> f64 {
        v as f64
    }
    fn add(&mut self, a: &f64, b: &f64) -> f64 {
        a + b
    }
    fn sub(&mut self, a: &f64, b: &f64) -> f64 {
        a - b
    }
    fn mul(&mut self, a: &f64, b: &f64) -> f64 {
        a * b
    }
    fn div(&mut self, a: &f64, b: &f64) -> f64 {
        a / b
    }
    fn ln(&mut self, a: &f64) -> f64 {
        a.ln()
    }
    fn exp(&mut self, a: &f64) -> f64 {
        a.exp()
    }
    fn less(&mut self, a: &f64, b: &f64) -> bool {
        a < b
    }
    fn to_f64(&mut self, a: &f64) -> f64 {
        *a
    }

    fn log_add(&mut self, a: Option<f64>, b: &f64) -> f64 {
        match a {
            None => *b,
            Some(a) => {
                let (hi, lo) = if a < *b { (*b, a) } else { (a, *b) };
                hi + (lo - hi).exp().ln_1p()
            }
        }
    }
}

/// Binary floating point with a fixed mantissa width.
pub(crate) struct BigArith {
    precision: usize,
    consts: Consts,
}

const RM: RoundingMode = RoundingMode::ToEven;

impl BigArith {
    pub fn new(precision: usize) -> Self {
        BigArith {
            precision,
            consts: Consts::new().expect("astro-float constants cache"),
        }
    }
}

impl Arith for BigArith {
    type Num = BigFloat;

    fn int(&mut self, v: u128) -> BigFloat {
        let p = self.precision;
        let hi = BigFloat::from_u64((v >> 64) as u64, p);
        let lo = BigFloat::from_u64(v as u64, p);
        let shift = BigFloat::from_u64(1 << 32, p).mul(&BigFloat::from_u64(1 << 32, p), p, RM);
        hi.mul(&shift, p, RM).add(&lo, p, RM)
    }
    fn add(&mut self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, self.precision, RM)
    }
    fn sub(&mut self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, self.precision, RM)
    }
    fn mul(&mut self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, self.precision, RM)
    }
    fn div(&mut self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.div(b, self.precision, RM)
    }
    fn ln(&mut self, a: &BigFloat) -> BigFloat {
        a.ln(self.precision, RM, &mut self.consts)
    }
    fn exp(&mut self, a: &BigFloat) -> BigFloat {
        a.exp(self.precision, RM, &mut self.consts)
    }
    fn less(&mut self, a: &BigFloat, b: &BigFloat) -> bool {
        matches!(a.cmp(b), Some(c) if c < 0)
    }
    fn to_f64(&mut self, a: &BigFloat) -> f64 {
        // Decimal rendering carries the full precision; parsing rounds once.
        format!("{a}").parse().unwrap_or(f64::NAN)
    }
}
