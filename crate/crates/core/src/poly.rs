//! Dense polynomials over big integers.

use std::fmt;

use rayon::prelude::*;
use rug::integer::Order;
use rug::Integer;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numtheory::vp_big_unchecked;

/// Below this length (of the shorter factor) multiplication is schoolbook.
const KRONECKER_MIN_LEN: usize = 24;

/// Ascending coefficients, trailing zeros stripped. The zero polynomial has no
/// coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct IntPolynomial {
    coeffs: Vec<Integer>,
}

impl IntPolynomial {
    pub fn new(mut coeffs: Vec<Integer>) -> Self {
        while coeffs.last().is_some_and(|c| *c == 0) {
            coeffs.pop();
        }
        IntPolynomial { coeffs }
    }

    pub fn zero() -> Self {
        IntPolynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        IntPolynomial { coeffs: vec![Integer::from(1)] }
    }

    pub fn from_i64s(cs: &[i64]) -> Self {
        Self::new(cs.iter().map(|&c| Integer::from(c)).collect())
    }

    /// `(c - w)^e` expanded with binomial coefficients.
    pub fn linear_power(c: i32, e: u32) -> Self {
        let mut out = Vec::with_capacity(e as usize + 1);
        for i in 0..=e {
            let mut term = Integer::from(Integer::binomial_u(e, i));
            term *= Integer::from(Integer::i_pow_u(c as i32, e - i));
            if i % 2 == 1 {
                term = -term;
            }
            out.push(term);
        }
        Self::new(out)
    }

    pub fn coeffs(&self) -> &[Integer] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Integer> {
        self.coeffs
    }

    /// Coefficient of `t^i`, zero past the degree.
    pub fn coeff(&self, i: usize) -> Integer {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Order of vanishing at 0; `None` for the zero polynomial.
    pub fn low_order(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| *c != 0)
    }

    pub fn eval(&self, x: &Integer) -> Integer {
        let mut acc = Integer::new();
        for c in self.coeffs.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }

    pub fn eval_at_one(&self) -> Integer {
        self.coeffs.iter().sum()
    }

    /// Largest bit length among the coefficients.
    pub fn max_bits(&self) -> u32 {
        self.coeffs.iter().map(|c| c.significant_bits()).max().unwrap_or(0)
    }

    pub fn neg(&self) -> Self {
        IntPolynomial { coeffs: self.coeffs.iter().map(|c| Integer::from(-c)).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.len().max(other.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.coeff(i) + other.coeff(i));
        }
        Self::new(out)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &Integer) -> Self {
        Self::new(self.coeffs.iter().map(|c| Integer::from(c * k)).collect())
    }

    /// Multiplies by `t^k`.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Integer::new(); k];
        out.extend(self.coeffs.iter().cloned());
        IntPolynomial { coeffs: out }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.len().min(other.len()) < KRONECKER_MIN_LEN {
            self.mul_schoolbook(other)
        } else {
            self.mul_kronecker(other)
        }
    }

    pub fn mul_schoolbook(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let n = self.len() + other.len() - 1;
        let out: Vec<Integer> = (0..n)
            .into_par_iter()
            .with_min_len(64)
            .map(|k| {
                let lo = k.saturating_sub(other.len() - 1);
                let hi = k.min(self.len() - 1);
                let mut acc = Integer::new();
                for i in lo..=hi {
                    acc += &self.coeffs[i] * &other.coeffs[k - i];
                }
                acc
            })
            .collect();
        Self::new(out)
    }

    /// Kronecker substitution: both factors are split into nonnegative
    /// parts, each part is packed into one big integer with limb-aligned
    /// slots, and the four products are unpacked and recombined.
    pub fn mul_kronecker(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let (ap, an) = self.split_sign();
        let (bp, bn) = other.split_sign();
        let bits = self.max_bits() as usize
            + other.max_bits() as usize
            + usize::BITS as usize
            - self.len().min(other.len()).leading_zeros() as usize
            + 1;
        let slot = bits.div_ceil(64);
        let n = self.len() + other.len() - 1;

        let prods: Vec<Option<Vec<Integer>>> = [(&ap, &bp), (&an, &bn), (&ap, &bn), (&an, &bp)]
            .into_par_iter()
            .map(|(x, y)| {
                if x.iter().all(|c| *c == 0) || y.iter().all(|c| *c == 0) {
                    return None;
                }
                let px = pack(x, slot);
                let py = pack(y, slot);
                Some(unpack(&Integer::from(&px * &py), slot, n))
            })
            .collect();

        let mut out = vec![Integer::new(); n];
        for (idx, p) in prods.into_iter().enumerate() {
            if let Some(p) = p {
                for (o, c) in out.iter_mut().zip(p) {
                    if idx < 2 {
                        *o += c;
                    } else {
                        *o -= c;
                    }
                }
            }
        }
        Self::new(out)
    }

    fn split_sign(&self) -> (Vec<Integer>, Vec<Integer>) {
        let mut pos = Vec::with_capacity(self.len());
        let mut neg = Vec::with_capacity(self.len());
        for c in &self.coeffs {
            if *c >= 0 {
                pos.push(c.clone());
                neg.push(Integer::new());
            } else {
                pos.push(Integer::new());
                neg.push(Integer::from(-c));
            }
        }
        (pos, neg)
    }

    /// Gcd of the coefficients (nonnegative; zero for the zero polynomial).
    pub fn content(&self) -> Integer {
        let mut g = Integer::new();
        for c in &self.coeffs {
            g.gcd_mut(c);
            if g == 1 {
                break;
            }
        }
        g
    }

    /// Minimum `p`-adic valuation over the nonzero coefficients; `None` for the
    /// zero polynomial. `p` must be prime.
    pub fn content_valuation(&self, p: u64) -> Option<u32> {
        self.coeffs.iter().filter(|c| **c != 0).map(|c| vp_big_unchecked(c, p)).min()
    }

    pub fn is_divisible_by(&self, d: &Integer) -> bool {
        self.coeffs.iter().all(|c| c.is_divisible(d))
    }

    /// Exact division of every coefficient; fails if any remainder is nonzero.
    pub fn div_exact(&self, d: &Integer) -> Result<Self> {
        if *d == 0 {
            return Err(Error::pre("division by zero"));
        }
        if !self.is_divisible_by(d) {
            return Err(Error::Consistency(format!("polynomial not divisible by {d}")));
        }
        Ok(IntPolynomial { coeffs: self.coeffs.iter().map(|c| Integer::from(c.div_exact_ref(d))).collect() })
    }

    pub fn div_exact_mut(&mut self, d: &Integer) -> Result<()> {
        *self = self.div_exact(d)?;
        Ok(())
    }

    /// Coefficients as decimal strings, ascending degree.
    pub fn to_decimal_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(|c| c.to_string()).collect()
    }

    pub fn from_decimal_strings<S: AsRef<str>>(cs: &[S]) -> Result<Self> {
        let mut out = Vec::with_capacity(cs.len());
        for s in cs {
            let v = Integer::from_str_radix(s.as_ref().trim(), 10)
                .map_err(|e| Error::pre(format!("bad coefficient {:?}: {e}", s.as_ref())))?;
            out.push(v);
        }
        Ok(Self::new(out))
    }
}

fn pack(cs: &[Integer], slot: usize) -> Integer {
    let mut limbs = vec![0u64; cs.len() * slot];
    for (i, c) in cs.iter().enumerate() {
        if *c == 0 {
            continue;
        }
        let ds = c.to_digits::<u64>(Order::Lsf);
        limbs[i * slot..i * slot + ds.len()].copy_from_slice(&ds);
    }
    Integer::from_digits(&limbs, Order::Lsf)
}

fn unpack(x: &Integer, slot: usize, n: usize) -> Vec<Integer> {
    let limbs = x.to_digits::<u64>(Order::Lsf);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let start = (i * slot).min(limbs.len());
        let end = ((i + 1) * slot).min(limbs.len());
        let mut c = Integer::new();
        if start < end {
            c.assign_digits(&limbs[start..end], Order::Lsf);
        }
        out.push(c);
    }
    out
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if *c == 0 {
                continue;
            }
            let neg = *c < 0;
            let a = Integer::from(c.abs_ref());
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            match (i, a == 1) {
                (0, _) => write!(f, "{a}")?,
                (1, true) => write!(f, "t")?,
                (1, false) => write!(f, "{a}*t")?,
                (_, true) => write!(f, "t^{i}")?,
                (_, false) => write!(f, "{a}*t^{i}")?,
            }
        }
        Ok(())
    }
}

impl Serialize for IntPolynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_decimal_strings().serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntPolynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        IntPolynomial::from_decimal_strings(&v).map_err(D::Error::custom)
    }
}

/// Product of many polynomials, pairing up balanced factors.
pub fn product(mut fs: Vec<IntPolynomial>) -> IntPolynomial {
    if fs.is_empty() {
        return IntPolynomial::one();
    }
    while fs.len() > 1 {
        fs.sort_by_key(|p| std::cmp::Reverse(p.len()));
        let a = fs.pop().unwrap();
        let b = fs.pop().unwrap();
        fs.push(a.mul(&b));
    }
    fs.pop().unwrap()
}
