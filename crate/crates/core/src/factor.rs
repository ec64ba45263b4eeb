//! Common factors of the normalized approximants and the constant κ_m.

use std::collections::BTreeMap;

use rayon::prelude::*;
use rug::Integer;
use serde::Serialize;

use crate::ball::{BallReal, DEFAULT_PREC};
use crate::error::{Error, Result};
use crate::hermite_pade::ApproxSystem;
use crate::numtheory::{primes_upto, vp, vp_factorial_unchecked, PrimeList};

/// Published lower bounds for κ_m, m = 2..=14.
pub const KAPPA_TABLE: [(u32, f64); 13] = [
    (2, 0.0),
    (3, 0.215544),
    (4, 0.173121),
    (5, 0.387118),
    (6, 0.322600),
    (7, 0.375535),
    (8, 0.397256),
    (9, 0.474840),
    (10, 0.427356),
    (11, 0.501455),
    (12, 0.459667),
    (13, 0.502575),
    (14, 0.534653),
];

/// `Σ_p log p / (p(p-1))`, as published to eleven places.
pub const KAPPA_LIMIT_DECIMAL: &str = "0.75536661083";

/// Lower bound claimed for κ_m on m ≥ 80.
pub const KAPPA_HALF_TAIL_BOUND: &str = "0.549133";

/// `s(2) = e`, `s(m) = m (log m)^2` for `m ≥ 3`.
pub fn s_of_m(m: u32, prec: u32) -> Result<BallReal> {
    match m {
        0 | 1 => Err(Error::pre("s(m) needs m >= 2")),
        2 => Ok(BallReal::e(prec)),
        _ => {
            let lm = BallReal::from_u64(m as u64, prec).ln();
            Ok(lm.sqr().mul_u64(m as u64))
        }
    }
}

/// `w_n(x) = 1 - n/x - ((n-1)/log n)(log x / x)` for `n > 1`, `x > 0`.
pub fn w_weight(n: &BallReal, x: &BallReal) -> Result<BallReal> {
    let log_x = x.checked_ln().ok_or_else(|| Error::pre("w_n(x) needs x > 0"))?;
    w_weight_log(n, x, &log_x)
}

fn w_weight_log(n: &BallReal, x: &BallReal, log_x: &BallReal) -> Result<BallReal> {
    let prec = n.prec();
    if !n.certainly_gt(&BallReal::from_u64(1, prec)) {
        return Err(Error::pre("w_n(x) needs n > 1"));
    }
    let one = BallReal::from_u64(1, prec);
    let term = &n.sub_u64(1) / &n.ln() * (log_x / x);
    Ok(&(&one - &(n / x)) - &term)
}

/// `w_n(s e^s)` evaluated from `s` without forming `e^s` directly.
pub fn w_at_threshold(n: &BallReal, s: &BallReal) -> Result<BallReal> {
    let x = s * &s.exp();
    let log_x = &s.ln() + s;
    w_weight_log(n, &x, &log_x)
}

/// `min_{0≤j≤m} (⌊j/p⌋ + ⌊(m-j)/p⌋)`.
pub fn min_floor_sum(m: u64, p: u64) -> u64 {
    (0..=m).map(|j| j / p + (m - j) / p).min().unwrap_or(0)
}

fn check_prime_below(p: u64, limit_num: u64, limit_den: u64, what: &str) -> Result<()> {
    if !crate::numtheory::is_prime_small(p) {
        return Err(Error::pre(format!("{p} is not prime")));
    }
    if p * limit_den > limit_num {
        return Err(Error::pre(format!("p = {p} exceeds {what}")));
    }
    Ok(())
}

/// Guaranteed exponent of `p` in the common factor of every `B*_{k,j}`:
/// `min_j(⌊j/p⌋ + ⌊(m-j)/p⌋) · v_p((l-1)!)`, for `p ≤ (m+1)/2`.
pub fn nu_lower_exponent(m: u64, p: u64, l: u64) -> Result<u64> {
    if l < 2 {
        return Err(Error::pre("l must be >= 2"));
    }
    check_prime_below(p, m + 1, 2, "(m+1)/2")?;
    Ok(min_floor_sum(m, p) * vp_factorial_unchecked(l - 1, p))
}

/// Exponent `⌊m/p⌋ v_p(l!) - v_p(l)` dividing the column `B*_{k,0}`, for `p ≤ m`.
pub fn j0_factor_exponent(m: u64, p: u64, l: u64) -> Result<i64> {
    if l < 2 {
        return Err(Error::pre("l must be >= 2"));
    }
    check_prime_below(p, m, 1, "m")?;
    Ok((m / p * vp_factorial_unchecked(l, p)) as i64 - vp(l, p)? as i64)
}

/// Exponent guaranteed for column `j ≥ 1`:
/// `(⌊j/p⌋ + ⌊(m-j)/p⌋) v_p((l-1)!)`.
pub fn column_exponent(m: u64, j: u64, p: u64, l: u64) -> u64 {
    (j / p + (m - j) / p) * vp_factorial_unchecked(l - 1, p)
}

fn admissible_primes(m: usize) -> PrimeList {
    primes_upto((m as u64 + 1) / 2)
}

/// Minimum valuation over all coefficients of column `j` (all rows `k`).
pub fn column_valuation(system: &ApproxSystem, j: usize, p: u64) -> Option<u32> {
    system.rows().iter().filter_map(|row| row[j].content_valuation(p)).min()
}

/// Verifies the per-column exponents on a system that has not been divided:
/// column 0 against `⌊m/p⌋ v_p(l!) - v_p(l)` for `p ≤ m`, columns `j ≥ 1`
/// against `(⌊j/p⌋ + ⌊(m-j)/p⌋) v_p((l-1)!)` for `p ≤ (m+1)/2`.
pub fn check_column_exponents(system: &ApproxSystem) -> Result<()> {
    if *system.content_factor() != 1 {
        return Err(Error::pre("column exponents refer to the undivided system"));
    }
    let m = system.m() as u64;
    let l = system.l() as u64;
    for p in primes_upto(m).iter() {
        let need = j0_factor_exponent(m, p, l)?;
        let have = column_valuation(system, 0, p).map_or(i64::MAX, |v| v as i64);
        if have < need {
            return Err(Error::Falsified(format!(
                "column 0, m = {m}, l = {l}, p = {p}: valuation {have} < {need}"
            )));
        }
    }
    for p in admissible_primes(system.m()).iter() {
        for j in 1..=m {
            let need = column_exponent(m, j, p, l);
            let have = column_valuation(system, j as usize, p).map_or(u64::MAX, |v| v as u64);
            if have < need {
                return Err(Error::Falsified(format!(
                    "column {j}, m = {m}, l = {l}, p = {p}: valuation {have} < {need}"
                )));
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CommonFactorReport {
    pub m: usize,
    pub l: u32,
    pub nu_exact: BTreeMap<u64, u32>,
    pub nu_lower: BTreeMap<u64, u64>,
    #[serde(serialize_with = "ser_integer")]
    pub d_exact: Integer,
    #[serde(serialize_with = "ser_integer")]
    pub d_lower: Integer,
}

fn ser_integer<S: serde::Serializer>(v: &Integer, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// Computes the exact `p`-part of the joint content for every `p ≤ (m+1)/2`,
/// checks it against the guaranteed exponent, and divides the whole system
/// by the exact factor.
///
/// The system must not have been divided before.
pub fn extract_common_factor(system: &mut ApproxSystem) -> Result<CommonFactorReport> {
    if *system.content_factor() != 1 {
        return Err(Error::pre("common factor has already been extracted from this system"));
    }
    let m = system.m();
    let l = system.l();
    let primes = admissible_primes(m);
    let mut nu_exact = BTreeMap::new();
    let mut nu_lower = BTreeMap::new();
    let mut d_exact = Integer::from(1);
    let mut d_lower = Integer::from(1);
    for p in primes.iter() {
        let exact = system
            .iter_polys()
            .collect::<Vec<_>>()
            .par_iter()
            .filter_map(|poly| poly.content_valuation(p))
            .min()
            .ok_or_else(|| Error::Consistency("system has only zero polynomials".into()))?;
        let lower = nu_lower_exponent(m as u64, p, l as u64)?;
        if (exact as u64) < lower {
            return Err(Error::Falsified(format!(
                "m = {m}, l = {l}, p = {p}: content valuation {exact} below guaranteed {lower}"
            )));
        }
        d_exact *= Integer::from(Integer::u_pow_u(p as u32, exact));
        d_lower *= Integer::from(Integer::u_pow_u(p as u32, lower as u32));
        nu_exact.insert(p, exact);
        nu_lower.insert(p, lower);
    }
    if d_exact != 1 {
        system.divide_all(&d_exact)?;
    }
    Ok(CommonFactorReport { m, l, nu_exact, nu_lower, d_exact, d_lower })
}

#[derive(Clone, Debug, PartialEq)]
pub struct KappaTerm {
    pub p: u64,
    pub min_floor_sum: u64,
    pub w: BallReal,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KappaValue {
    pub m: u32,
    pub value: BallReal,
    pub terms: Vec<KappaTerm>,
}

/// `κ_m = (1/m) Σ_{p ≤ (m+1)/2} min_j(⌊j/p⌋+⌊(m-j)/p⌋) (log p/(p-1)) w_p(s e^s)`.
pub fn kappa_m(m: u32) -> Result<KappaValue> {
    kappa_m_prec(m, DEFAULT_PREC)
}

pub fn kappa_m_prec(m: u32, prec: u32) -> Result<KappaValue> {
    let s = s_of_m(m, prec)?;
    let mut value = BallReal::from_u64(0, prec);
    let mut terms = Vec::new();
    for p in admissible_primes(m as usize).iter() {
        let pb = BallReal::from_u64(p, prec);
        let w = w_at_threshold(&pb, &s)?;
        let mfs = min_floor_sum(m as u64, p);
        let contrib = (pb.ln().div_u64(p - 1) * &w).mul_u64(mfs);
        value = &value + &contrib;
        terms.push(KappaTerm { p, min_floor_sum: mfs, w });
    }
    let value = value.div_u64(m as u64);
    Ok(KappaValue { m, value, terms })
}

/// `w_{(m+1)/2}(s e^s) (1/m) Σ_{p ≤ (m+1)/2} (⌊(m+1)/p⌋ - 1) log p/(p-1)`.
pub fn kappa_simplified_lower(m: u32) -> Result<BallReal> {
    kappa_simplified_lower_prec(m, DEFAULT_PREC)
}

pub fn kappa_simplified_lower_prec(m: u32, prec: u32) -> Result<BallReal> {
    let s = s_of_m(m, prec)?;
    let mut sum = BallReal::from_u64(0, prec);
    let primes = admissible_primes(m as usize);
    if primes.is_empty() {
        return Ok(sum);
    }
    for p in primes.iter() {
        let k = (m as u64 + 1) / p - 1;
        sum = &sum + &BallReal::from_u64(p, prec).ln().div_u64(p - 1).mul_u64(k);
    }
    let n = BallReal::from_u64(m as u64 + 1, prec).div_u64(2);
    let w = w_at_threshold(&n, &s)?;
    Ok((sum * w).div_u64(m as u64))
}

/// `(9/10) w_{(m+1)/2}(s e^s) Σ_{p ≤ m/20+1} log p/(p(p-1))`.
pub fn kappa_tail_closed_form(m: u32, prec: u32) -> Result<BallReal> {
    let s = s_of_m(m, prec)?;
    let n = BallReal::from_u64(m as u64 + 1, prec).div_u64(2);
    let w = w_at_threshold(&n, &s)?;
    let sum = kappa_partial_sum(m as u64 / 20 + 1, prec);
    Ok((w * sum).mul_u64(9).div_u64(10))
}

/// `Σ_{p ≤ limit} log p/(p(p-1))`.
pub fn kappa_partial_sum(limit: u64, prec: u32) -> BallReal {
    partial_sum_over(&primes_upto(limit), prec)
}

fn partial_sum_over(primes: &PrimeList, prec: u32) -> BallReal {
    let parts: Vec<BallReal> = primes
        .primes()
        .par_chunks(4096)
        .map(|chunk| {
            let mut acc = BallReal::from_u64(0, prec);
            for &p in chunk {
                let t = BallReal::from_u64(p, prec).ln().div_u64(p).div_u64(p - 1);
                acc = &acc + &t;
            }
            acc
        })
        .collect();
    parts.iter().fold(BallReal::from_u64(0, prec), |a, b| &a + b)
}

/// `θ(x) = Σ_{p ≤ x} log p` over a prime list.
pub fn chebyshev_theta(primes: &PrimeList, prec: u32) -> BallReal {
    let parts: Vec<BallReal> = primes
        .primes()
        .par_chunks(4096)
        .map(|chunk| {
            let mut acc = BallReal::from_u64(0, prec);
            for &p in chunk {
                acc = &acc + &BallReal::from_u64(p, prec).ln();
            }
            acc
        })
        .collect();
    parts.iter().fold(BallReal::from_u64(0, prec), |a, b| &a + b)
}

/// Threshold above which `|θ(x) - x| < 0.2 x / (log x)^2` (Dusart).
pub const THETA_BOUND_FROM: u64 = 3_594_641;

/// Largest sieve used by [`kappa_limit`].
pub const KAPPA_LIMIT_MAX_SIEVE: u64 = 1 << 26;

/// Which tail estimate closed the enclosure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TailMethod {
    /// `0 ≤ T ≤ log N/(N-1) + log(N/(N-1))`, summing over all integers.
    Integers,
    /// Partial summation against `θ` with an explicit Chebyshev bound.
    Chebyshev,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KappaLimit {
    pub enclosure: BallReal,
    pub cutoff: u64,
    pub method: TailMethod,
}

/// Enclosure of `Σ_p log p/(p(p-1))` with width at most `tolerance`.
pub fn kappa_limit(tolerance: f64) -> Result<BallReal> {
    Ok(kappa_limit_detailed(tolerance)?.enclosure)
}

pub fn kappa_limit_detailed(tolerance: f64) -> Result<KappaLimit> {
    if !(tolerance > 0.0) || !tolerance.is_finite() {
        return Err(Error::pre("tolerance must be a positive finite number"));
    }
    let prec = DEFAULT_PREC;
    let tol = BallReal::from_rational(
        &rug::Rational::from_f64(tolerance).expect("finite"),
        prec,
    );

    // Elementary tail over all integers: fine for coarse tolerances.
    let mut n = 1024u64;
    while n <= THETA_BOUND_FROM {
        let tail = integer_tail(n, prec);
        if tail.hi() <= tol.lo() {
            let partial = kappa_partial_sum(n, prec);
            let enclosure = partial.hull(&(&partial + &tail));
            if enclosure.width() <= *tol.lo() {
                return Ok(KappaLimit { enclosure, cutoff: n, method: TailMethod::Integers });
            }
        }
        n *= 2;
    }

    let mut n = THETA_BOUND_FROM.next_power_of_two();
    while n <= KAPPA_LIMIT_MAX_SIEVE {
        let primes = primes_upto(n);
        let enclosure = chebyshev_enclosure(&primes, n, prec);
        if enclosure.width() <= *tol.lo() {
            return Ok(KappaLimit { enclosure, cutoff: n, method: TailMethod::Chebyshev });
        }
        n *= 2;
    }
    Err(Error::ResourceLimit(format!(
        "tolerance {tolerance:e} needs a sieve beyond {KAPPA_LIMIT_MAX_SIEVE}"
    )))
}

/// `log N/(N-1) + log(N/(N-1))`, which dominates `Σ_{n>N} log n/(n(n-1))`.
fn integer_tail(n: u64, prec: u32) -> BallReal {
    let nb = BallReal::from_u64(n, prec);
    let nm1 = BallReal::from_u64(n - 1, prec);
    &(nb.ln() / &nm1) + &(&nb / &nm1).ln()
}

/// With `g(x) = 1/(x(x-1))`, partial summation gives
/// `T = -θ(N) g(N) + ∫_N^∞ θ(x)(-g'(x)) dx`, and
/// `∫_N^∞ x(-g'(x)) dx = 1/(N-1) + log(N/(N-1))`. For `N ≥ 3594641` the factor
/// `θ(x)/x` lies within `1 ± 0.2/(log N)^2` on the whole range.
fn chebyshev_enclosure(primes: &PrimeList, n: u64, prec: u32) -> BallReal {
    assert!(n >= THETA_BOUND_FROM);
    let partial = partial_sum_over(primes, prec);
    let theta = chebyshev_theta(primes, prec);
    let nb = BallReal::from_u64(n, prec);
    let nm1 = BallReal::from_u64(n - 1, prec);
    let g_n = (&nb * &nm1).recip();
    let integral = &nm1.recip() + &(&nb / &nm1).ln();
    let eps = BallReal::lit("0.2", prec) / nb.ln().sqr();
    let one = BallReal::from_u64(1, prec);
    let factor = (&one - &eps).hull(&(&one + &eps));
    let tail = &(&factor * &integral) - &(&theta * &g_n);
    &partial + &tail
}

#[derive(Clone, Debug, PartialEq)]
pub struct KappaHalfRow {
    pub m: u32,
    pub bound: BallReal,
    pub closed_form: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KappaHalfReport {
    pub rows: Vec<KappaHalfRow>,
}

impl KappaHalfReport {
    /// Smallest certified lower bound over the range.
    pub fn min_lower(&self) -> Option<f64> {
        self.rows.iter().map(|r| r.bound.lo().to_f64()).reduce(f64::min)
    }
}

/// Certifies `κ_m ≥ 1/2` for every `m` in `lo..=hi`, using the simplified
/// bound below 80 and the closed form `(9/10) w Σ_{p ≤ m/20+1}` from 80 on,
/// where the closed form must also reach 0.549133 up to rounding in the sixth
/// place.
pub fn check_kappa_half(lo: u32, hi: u32) -> Result<KappaHalfReport> {
    if lo < 13 || hi > 10_000 || lo > hi {
        return Err(Error::pre("range must satisfy 13 <= lo <= hi <= 10000"));
    }
    let prec = DEFAULT_PREC;
    let half = BallReal::lit("0.5", prec);
    // the published figure is the m = 80 value 0.54913278... rounded to six places
    let tail_bound = &BallReal::lit(KAPPA_HALF_TAIL_BOUND, prec) - &BallReal::lit("1e-6", prec);
    let rows: Vec<Result<KappaHalfRow>> = (lo..=hi)
        .into_par_iter()
        .map(|m| {
            let closed_form = m >= 80;
            let bound = if closed_form {
                kappa_tail_closed_form(m, prec)?
            } else {
                kappa_simplified_lower_prec(m, prec)?
            };
            if !bound.certainly_ge(&half) {
                return Err(Error::Falsified(format!("kappa lower bound at m = {m} is {bound}, not >= 0.5")));
            }
            if closed_form && !bound.certainly_ge(&tail_bound) {
                return Err(Error::Falsified(format!(
                    "closed-form bound at m = {m} is {bound}, below {KAPPA_HALF_TAIL_BOUND} - 1e-6"
                )));
            }
            Ok(KappaHalfRow { m, bound, closed_form })
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(KappaHalfReport { rows })
}

#[derive(Clone, Debug, PartialEq)]
pub struct KappaTableRow {
    pub m: u32,
    pub kappa: BallReal,
    pub published: f64,
}

impl KappaTableRow {
    /// `kappa.lo - published`, rounded down.
    pub fn margin(&self) -> f64 {
        let pv = BallReal::from_rational(&rug::Rational::from_f64(self.published).unwrap(), self.kappa.prec());
        (self.kappa.lo().clone() - pv.hi()).to_f64_round(rug::float::Round::Down)
    }
}

/// κ_m for `m = 2..=m_max` (at most 14) alongside the published values.
pub fn kappa_table(m_max: u32) -> Result<Vec<KappaTableRow>> {
    if !(2..=14).contains(&m_max) {
        return Err(Error::pre("published kappa values cover 2 <= m <= 14"));
    }
    KAPPA_TABLE
        .iter()
        .filter(|(m, _)| *m <= m_max)
        .map(|&(m, published)| Ok(KappaTableRow { m, kappa: kappa_m(m)?.value, published }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite_pade::build_system;

    #[test]
    fn s_values() {
        assert!(s_of_m(1, 64).is_err());
        assert!(s_of_m(2, 128).unwrap().contains_f64(std::f64::consts::E) || (s_of_m(2, 128).unwrap().to_f64() - std::f64::consts::E).abs() < 1e-15);
        let s5 = s_of_m(5, 128).unwrap().to_f64();
        assert!((s5 - 5.0 * 5f64.ln().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn nu_lower_examples() {
        assert_eq!(nu_lower_exponent(3, 2, 38).unwrap(), 34);
        assert_eq!(nu_lower_exponent(5, 3, 10).unwrap(), 4);
        assert!(nu_lower_exponent(2, 2, 10).is_err());
        assert!(nu_lower_exponent(9, 4, 10).is_err());
        assert!(admissible_primes(2).is_empty());
    }

    #[test]
    fn j0_examples() {
        assert_eq!(j0_factor_exponent(2, 2, 4).unwrap(), 1);
        assert_eq!(j0_factor_exponent(3, 3, 3).unwrap(), 0);
        assert_eq!(j0_factor_exponent(4, 2, 2).unwrap(), 1);
        assert!(j0_factor_exponent(2, 3, 4).is_err());
    }

    #[test]
    fn floor_sum_bound() {
        // min_j(...) ≥ ⌊(m+1)/p⌋ - 1
        for m in 1..200u64 {
            for p in primes_upto((m + 1) / 2).iter() {
                assert!(min_floor_sum(m, p) + 1 >= (m + 1) / p);
            }
        }
    }

    #[test]
    fn extraction_m2_trivial() {
        let mut s = build_system(2, 7).unwrap();
        let r = extract_common_factor(&mut s).unwrap();
        assert_eq!(r.d_lower, 1);
        assert_eq!(r.d_exact, 1);
        assert!(r.nu_exact.is_empty());
    }

    #[test]
    fn extraction_m5_l6() {
        let mut s = build_system(5, 6).unwrap();
        check_column_exponents(&s).unwrap();
        let before = s.clone();
        let r = extract_common_factor(&mut s).unwrap();
        assert!(r.nu_exact[&2] as u64 >= r.nu_lower[&2]);
        assert!(r.nu_exact[&3] as u64 >= r.nu_lower[&3]);
        assert!(r.d_exact.is_divisible(&r.d_lower));
        assert_eq!(s.content_factor(), &r.d_exact);
        for (a, b) in before.iter_polys().zip(s.iter_polys()) {
            assert_eq!(&b.scale(&r.d_exact), a);
        }
        assert!(extract_common_factor(&mut s).is_err());
        assert!(check_column_exponents(&s).is_err());
    }

    #[test]
    fn kappa_small_examples() {
        assert!(kappa_m(2).unwrap().value.is_exact());
        assert_eq!(kappa_m(2).unwrap().value.to_f64(), 0.0);
        let k5 = kappa_m(5).unwrap();
        assert!(k5.value.lo().to_f64() >= 0.387118);
        assert_eq!(k5.terms.len(), 2);
        assert_eq!(k5.terms[0].min_floor_sum, 2);
        assert_eq!(k5.terms[1].min_floor_sum, 1);
        assert!(kappa_m(13).unwrap().value.lo().to_f64() >= 0.502575);
    }

    #[test]
    fn kappa_simplified_examples() {
        assert_eq!(kappa_simplified_lower(2).unwrap().to_f64(), 0.0);
        assert!(*kappa_simplified_lower(15).unwrap().lo() >= 0.5);
        assert!(*kappa_simplified_lower(79).unwrap().lo() >= 0.5);
        for m in 2..=200u32 {
            let a = kappa_simplified_lower(m).unwrap();
            let b = kappa_m(m).unwrap().value;
            assert!(a.lo() <= b.hi(), "m={m}");
        }
    }

    #[test]
    fn w_decreasing_in_n() {
        for x in [1e3, 1e6] {
            let xb = BallReal::from_rational(&rug::Rational::from_f64(x).unwrap(), 128);
            let mut prev: Option<BallReal> = None;
            for k in 0..=392 {
                let y = BallReal::from_u64(2 * 4 + k, 128).div_u64(4);
                let w = w_weight(&y, &xb).unwrap();
                if let Some(p) = &prev {
                    assert!(w.certainly_lt(p), "x={x} y={}", y.to_f64());
                }
                prev = Some(w);
            }
        }
        assert!(w_weight(&BallReal::from_u64(1, 64), &BallReal::from_u64(10, 64)).is_err());
    }

    #[test]
    fn kappa_half_ranges() {
        let r = check_kappa_half(13, 13).unwrap();
        assert!(r.min_lower().unwrap() >= 0.5);
        let r = check_kappa_half(80, 90).unwrap();
        assert!(r.rows.iter().all(|row| row.closed_form));
        assert!(check_kappa_half(12, 20).is_err());
    }

    #[test]
    fn tail_closed_form_at_80() {
        let v = kappa_tail_closed_form(80, 128).unwrap().to_f64();
        // 0.9 · (log2/2 + log3/6 + log5/20)
        let oracle = 0.9 * (2f64.ln() / 2.0 + 3f64.ln() / 6.0 + 5f64.ln() / 20.0);
        assert!((v - oracle).abs() < 1e-12);
        assert!(v > 0.5491327 && v < 0.549133);
    }

    #[test]
    fn partial_sums_monotone() {
        let mut prev = BallReal::from_u64(0, 128);
        for limit in [2u64, 3, 10, 100, 1000, 10_000] {
            let s = kappa_partial_sum(limit, 128);
            assert!(s.certainly_gt(&prev));
            prev = s;
        }
        assert!(*kappa_partial_sum(100, 128).hi() < 0.7554);
    }

    #[test]
    fn coarse_limit_uses_integer_tail() {
        let k = kappa_limit_detailed(0.5).unwrap();
        assert_eq!(k.method, TailMethod::Integers);
        assert!(k.enclosure.contains_f64(0.7553666108));
        assert!(kappa_limit(0.0).is_err());
        assert!(kappa_limit(f64::NAN).is_err());
    }

    #[test]
    fn table_margins() {
        let rows = kappa_table(14).unwrap();
        assert_eq!(rows.len(), 13);
        for r in rows {
            assert!(r.margin() >= -1e-6, "m={} margin={}", r.m, r.margin());
        }
        assert!(kappa_table(15).is_err());
    }

    #[test]
    fn fine_limit_encloses_published_value() {
        let k = kappa_limit_detailed(1e-9).unwrap();
        assert_eq!(k.method, TailMethod::Chebyshev);
        assert!(k.enclosure.width() <= 1e-9);
        let published = BallReal::lit(KAPPA_LIMIT_DECIMAL, 128);
        assert!(k.enclosure.contains_ball(&published) || k.enclosure.overlaps(&published));
        // the enclosure must contain every partial sum below the cutoff
        assert!(kappa_partial_sum(1_000_000, 128).hi() <= k.enclosure.hi());
    }

    #[test]
    fn chebyshev_bound_holds_at_sieve_points() {
        let primes = primes_upto(1 << 22);
        for x in [THETA_BOUND_FROM, 4_000_000, 1 << 22] {
            let sub = PrimeList::from_sorted(primes.iter().take_while(|&p| p <= x).collect(), x);
            let theta = chebyshev_theta(&sub, 128);
            let xb = BallReal::from_u64(x, 128);
            let slack = &xb * &BallReal::lit("0.2", 128) / xb.ln().sqr();
            assert!((&theta - &xb).abs().certainly_lt(&slack), "x={x}");
        }
    }
}
