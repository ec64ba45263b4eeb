//! Primes, p-adic valuations and Legendre's formula.

use rug::Integer;

use crate::ball::BallReal;
use crate::error::{Error, Result};

/// All primes up to `limit`, in increasing order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeList {
    limit: u64,
    primes: Vec<u64>,
}

impl PrimeList {
    /// Wraps a list already known to be all primes up to `limit`.
    #[cfg(test)]
    pub(crate) fn from_sorted(primes: Vec<u64>, limit: u64) -> Self {
        PrimeList { limit, primes }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.primes.iter().copied()
    }
}

/// Sieve of Eratosthenes over odd numbers only.
pub fn primes_upto(limit: u64) -> PrimeList {
    let mut primes = Vec::new();
    if limit >= 2 {
        primes.push(2);
    }
    if limit >= 3 {
        // slot i stands for 2i + 3
        let slots = ((limit - 3) / 2 + 1) as usize;
        let mut composite = vec![false; slots];
        let mut i = 0usize;
        loop {
            let p = 2 * i as u64 + 3;
            if p * p > limit {
                break;
            }
            if !composite[i] {
                let mut j = ((p * p - 3) / 2) as usize;
                while j < slots {
                    composite[j] = true;
                    j += p as usize;
                }
            }
            i += 1;
        }
        primes.extend(
            composite.iter().enumerate().filter(|(_, c)| !**c).map(|(i, _)| 2 * i as u64 + 3),
        );
    }
    PrimeList { limit, primes }
}

pub(crate) fn is_prime_small(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn check_prime(p: u64) -> Result<()> {
    if is_prime_small(p) {
        Ok(())
    } else {
        Err(Error::pre(format!("{p} is not prime")))
    }
}

/// Exponent of `p` in `n`.
pub fn vp(n: u64, p: u64) -> Result<u32> {
    if n == 0 {
        return Err(Error::pre("valuation of 0 is undefined"));
    }
    check_prime(p)?;
    let mut n = n;
    let mut k = 0;
    while n % p == 0 {
        n /= p;
        k += 1;
    }
    Ok(k)
}

/// Exponent of `p` in a nonzero big integer.
pub fn vp_big(n: &Integer, p: u64) -> Result<u32> {
    if *n == 0 {
        return Err(Error::pre("valuation of 0 is undefined"));
    }
    check_prime(p)?;
    Ok(vp_big_unchecked(n, p))
}

/// `n != 0` and `p` prime are the caller's responsibility.
pub(crate) fn vp_big_unchecked(n: &Integer, p: u64) -> u32 {
    if p == 2 {
        return n.find_one(0).expect("nonzero");
    }
    let mut tmp = n.clone();
    tmp.remove_factor_mut(&Integer::from(p))
}

/// Legendre's formula: the exponent of `p` in `n!`.
pub fn vp_factorial(n: u64, p: u64) -> Result<u64> {
    check_prime(p)?;
    Ok(vp_factorial_unchecked(n, p))
}

pub(crate) fn vp_factorial_unchecked(n: u64, p: u64) -> u64 {
    let mut total = 0;
    let mut q = n;
    while q >= p {
        q /= p;
        total += q;
    }
    total
}

/// Two-sided estimate `n/(p-1) - log n / log p - 1 <= v_p(n!) <= (n-1)/(p-1)`.
///
/// The lower end involves logarithms and is kept as a ball; the upper end is
/// stored already floored, which is exact for an integer-valued quantity.
#[derive(Clone, Debug, PartialEq)]
pub struct ValuationBounds {
    pub lower: BallReal,
    pub upper: u64,
}

impl ValuationBounds {
    /// Lower bound rounded down to an integer; always a valid bound.
    pub fn lower_floor(&self) -> Integer {
        self.lower.floor_lo()
    }

    /// Certified check that `lower <= v <= upper`: the whole lower ball must
    /// sit at or below `v`.
    pub fn sandwiches(&self, v: u64) -> bool {
        *self.lower.hi() <= v && v <= self.upper
    }
}

pub fn vp_factorial_bounds(n: u64, p: u64, prec: u32) -> Result<ValuationBounds> {
    if n < 2 {
        return Err(Error::pre("valuation bounds need n >= 2"));
    }
    check_prime(p)?;
    let nb = BallReal::from_u64(n, prec);
    let pb = BallReal::from_u64(p, prec);
    let lower = &(&nb.div_u64(p - 1) - &(nb.ln() / pb.ln())) - &BallReal::from_u64(1, prec);
    Ok(ValuationBounds { lower, upper: (n - 1) / (p - 1) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_division_primes(limit: u64) -> Vec<u64> {
        (2..=limit).filter(|&n| (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0)).collect()
    }

    #[test]
    fn small_sieves() {
        assert!(primes_upto(0).is_empty());
        assert!(primes_upto(1).is_empty());
        assert_eq!(primes_upto(2).primes(), &[2]);
        assert_eq!(primes_upto(10).primes(), &[2, 3, 5, 7]);
        assert_eq!(primes_upto(9).primes(), &[2, 3, 5, 7]);
    }

    #[test]
    fn hundredth_prime() {
        let ps = primes_upto(541);
        assert_eq!(ps.len(), 100);
        assert_eq!(ps.primes(), trial_division_primes(541).as_slice());
        assert_eq!(primes_upto(540).len(), 99);
    }

    #[test]
    fn sieve_matches_trial_division() {
        for limit in [3u64, 4, 25, 49, 97, 1000, 1999] {
            assert_eq!(primes_upto(limit).primes(), trial_division_primes(limit).as_slice(), "{limit}");
        }
    }

    #[test]
    fn plain_valuations() {
        assert_eq!(vp(7, 2).unwrap(), 0);
        assert_eq!(vp(8, 2).unwrap(), 3);
        assert_eq!(vp(360, 3).unwrap(), 2);
        assert!(vp(0, 2).is_err());
        assert!(vp(12, 4).is_err());
        assert_eq!(vp_big(&Integer::from(-96), 2).unwrap(), 5);
        assert_eq!(vp_big(&Integer::from(-96), 3).unwrap(), 1);
        assert!(vp_big(&Integer::new(), 3).is_err());
    }

    #[test]
    fn legendre_examples() {
        assert_eq!(vp_factorial(0, 2).unwrap(), 0);
        assert_eq!(vp_factorial(10, 2).unwrap(), 8);
        assert_eq!(vp_factorial(37, 2).unwrap(), 34);
        assert_eq!(vp_factorial(1, 5).unwrap(), 0);
    }

    #[test]
    fn bounds_examples() {
        let b = vp_factorial_bounds(10, 2, 128).unwrap();
        assert_eq!(b.upper, 9);
        let expect = 10.0 - 10f64.ln() / 2f64.ln() - 1.0;
        assert!((b.lower.to_f64() - expect).abs() < 1e-12);
        assert!((b.lower.to_f64() - 5.678).abs() < 1e-3);
        assert!(b.sandwiches(8));

        let b = vp_factorial_bounds(2, 2, 128).unwrap();
        assert_eq!(b.upper, 1);
        assert!(b.lower.contains_f64(0.0));
        assert!(b.sandwiches(1));

        let b = vp_factorial_bounds(37, 2, 128).unwrap();
        assert!(b.sandwiches(34));
        assert!(vp_factorial_bounds(1, 2, 64).is_err());
    }

    #[test]
    fn recursion_identity() {
        for p in [2u64, 3, 5, 7, 11] {
            for l in 1..500u64 {
                assert_eq!(
                    vp_factorial(l, p).unwrap(),
                    vp(l, p).unwrap() as u64 + vp_factorial(l - 1, p).unwrap()
                );
            }
        }
    }
}
