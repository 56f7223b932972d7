// SPDX-License-Identifier: Apache-2.0

//! Polynomial hashing `((a_{k-1} x^{k-1} + ... + a_0) mod p) mod 2^r` over the
//! Mersenne prime `p = 2^61 - 1`.

use crate::error::{Error, Result};
use crate::keyspace::low_mask;
use crate::prng::coefficient_stream;

pub const MERSENNE_EXPONENT: u32 = 61;
pub const MERSENNE_61: u64 = (1 << MERSENNE_EXPONENT) - 1;

/// Reduces `v < 2^122` modulo `2^61 - 1`.
#[inline]
pub fn mersenne_reduce(v: u128) -> u64 {
    let p = u128::from(MERSENNE_61);
    let folded = (v & p) + (v >> MERSENNE_EXPONENT);
    let folded = (folded & p) + (folded >> MERSENNE_EXPONENT);
    let r = folded as u64;
    if r >= MERSENNE_61 {
        r - MERSENNE_61
    } else {
        r
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolynomialHash {
    seed: u64,
    /// `a_0, a_1, ..., a_{k-1}`.
    coefficients: Vec<u64>,
    range_bits: u32,
}

impl PolynomialHash {
    /// A random polynomial of degree `k - 1`: a k-independent hash into `[2^range_bits]`.
    pub fn new(k: u32, seed: u64, range_bits: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::domain("k must be positive"));
        }
        let mut next = coefficient_stream(seed);
        let coefficients = (0..k)
            .map(|_| loop {
                let v = next() & MERSENNE_61;
                if v < MERSENNE_61 {
                    break v;
                }
            })
            .collect();
        let mut p = Self::from_coefficients(coefficients, range_bits)?;
        p.set_seed(seed);
        Ok(p)
    }

    pub fn from_coefficients(coefficients: Vec<u64>, range_bits: u32) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::domain("need at least one coefficient"));
        }
        if !(1..=64).contains(&range_bits) {
            return Err(Error::domain(format!("range width {range_bits} outside 1..=64")));
        }
        if let Some(bad) = coefficients.iter().find(|&&a| a >= MERSENNE_61) {
            return Err(Error::domain(format!("coefficient {bad} is not below 2^61-1")));
        }
        Ok(PolynomialHash {
            seed: 0,
            coefficients,
            range_bits,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub(crate) fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
    }

    /// Independence `k`, one more than the degree.
    pub fn k(&self) -> u32 {
        self.coefficients.len() as u32
    }

    pub fn coefficients(&self) -> &[u64] {
        &self.coefficients
    }

    pub fn range_bits(&self) -> u32 {
        self.range_bits
    }

    pub fn eval(&self, key: u64) -> Result<u64> {
        if key >= MERSENNE_61 {
            return Err(Error::domain(format!("key {key:#x} is not below 2^61-1")));
        }
        Ok(self.eval_unchecked(key))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, key: u64) -> u64 {
        let x = u128::from(key);
        let mut acc = *self.coefficients.last().expect("non-empty");
        for &a in self.coefficients.iter().rev().skip(1) {
            acc = mersenne_reduce(u128::from(acc) * x + u128::from(a));
        }
        acc & low_mask(self.range_bits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_polynomial() {
        let p = PolynomialHash::from_coefficients(vec![0; 5], 61).unwrap();
        for key in [0, 1, 12345, MERSENNE_61 - 1] {
            assert_eq!(p.eval(key).unwrap(), 0);
        }
    }

    #[test]
    fn identity_polynomial() {
        let p = PolynomialHash::from_coefficients(vec![0, 1], 61).unwrap();
        for key in [0, 1, 1 << 60, MERSENNE_61 - 1] {
            assert_eq!(p.eval(key).unwrap(), key);
        }
    }

    #[test]
    fn small_quadratic() {
        let p = PolynomialHash::from_coefficients(vec![5, 7, 11], 61).unwrap();
        assert_eq!(p.eval(3).unwrap(), 125);
    }

    #[test]
    fn range_mask() {
        let p = PolynomialHash::from_coefficients(vec![0, 1], 8).unwrap();
        assert_eq!(p.eval(0x1FF).unwrap(), 0xFF);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(PolynomialHash::new(0, 1, 32).is_err());
        assert!(PolynomialHash::from_coefficients(vec![MERSENNE_61], 32).is_err());
        assert!(PolynomialHash::from_coefficients(vec![1], 0).is_err());
        let p = PolynomialHash::new(3, 1, 32).unwrap();
        assert!(p.eval(MERSENNE_61).is_err());
    }

    #[test]
    fn reduction_edges() {
        let p = u128::from(MERSENNE_61);
        assert_eq!(mersenne_reduce(0), 0);
        assert_eq!(mersenne_reduce(p), 0);
        assert_eq!(mersenne_reduce(p + 1), 1);
        assert_eq!(mersenne_reduce((p - 1) * (p - 1)), 1);
        assert_eq!(mersenne_reduce((p - 1) * (p - 1) + (p - 1)), 0);
    }

    #[test]
    fn seeded_coefficients() {
        let a = PolynomialHash::new(100, 3, 64).unwrap();
        assert_eq!(a, PolynomialHash::new(100, 3, 64).unwrap());
        assert_eq!(a.k(), 100);
        assert_ne!(
            a.coefficients(),
            PolynomialHash::new(100, 4, 64).unwrap().coefficients()
        );
    }
}
