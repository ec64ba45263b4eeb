//! Certified evaluation of linear forms in powers of `e`, the growth checks
//! on the approximation system at `t = 1`, and small exhaustive searches.

use rayon::prelude::*;
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::ball::{BallReal, DEFAULT_PREC, PREC_CAP};
use crate::error::{Error, Result};
use crate::factor::{extract_common_factor, CommonFactorReport};
use crate::hermite_pade::{build_system, ApproxSystem};
use crate::measure::{first_index, generic_lower_bound, params_for_e_prec, SMALL_M_BD};

/// Largest power of `e` handled by [`exp_enclosure`].
pub const EXP_MAX_J: u32 = 64;

/// `e` from its Taylor series: `Σ_{n≤N} 1/n!` plus a tail in `[0, 2/(N+1)!]`,
/// with `N` chosen so the tail is below `2^{-bits-10}`.
fn e_taylor(bits: u32) -> BallReal {
    let prec = bits + 16;
    let target = Integer::from(1) << (bits + 11);
    let mut n_fact = Integer::from(1);
    let mut n = 0u32;
    // smallest N with (N+1)! > 2^{bits+11}
    while Integer::from(&n_fact * (n + 1)) <= target {
        n += 1;
        n_fact *= n;
    }
    // Σ N!/i! by Horner: acc_k = k·acc_{k-1} + 1
    let mut sum = Integer::from(1);
    for k in 1..=n {
        sum *= k;
        sum += 1;
    }
    // sum = Σ_{i=0}^{N} N!/i!
    let lo = Rational::from((sum.clone(), n_fact.clone()));
    let next_fact = Integer::from(&n_fact * (n + 1));
    let hi = Rational::from((sum * (n + 1) + 2u32, next_fact));
    BallReal::from_rational(&lo, prec).hull(&BallReal::from_rational(&hi, prec))
}

fn exp_unchecked(j: u32, bits: u32) -> BallReal {
    if j == 0 {
        return BallReal::from_u64(1, bits.max(2));
    }
    e_taylor(bits + 8).powi(j)
}

/// Enclosure of `e^j` with width at most `2^{-bits+4} e^j`, from the Taylor
/// series of `e`. The result is cross-checked against the library
/// exponential.
pub fn exp_enclosure(j: u32, bits: u32) -> Result<BallReal> {
    if j > EXP_MAX_J {
        return Err(Error::pre(format!("e^j is supported for j <= {EXP_MAX_J}")));
    }
    if bits > PREC_CAP {
        return Err(Error::PrecisionCap { cap: PREC_CAP, what: format!("e^{j} at {bits} bits") });
    }
    if bits < 8 {
        return Err(Error::pre("at least 8 bits are required"));
    }
    let ball = exp_unchecked(j, bits);
    let reference = BallReal::from_u64(j as u64, bits + 16).exp();
    if !ball.overlaps(&reference) {
        return Err(Error::Consistency(format!("e^{j}: series {ball} disagrees with {reference}")));
    }
    Ok(ball)
}

/// `λ_0 + λ_1 e + … + λ_m e^m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearForm {
    #[serde(with = "integer_strings")]
    lambda: Vec<Integer>,
}

mod integer_strings {
    use rug::Integer;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Integer], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| x.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Integer>, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.iter()
            .map(|s| Integer::from_str_radix(s, 10).map_err(serde::de::Error::custom))
            .collect()
    }
}

impl LinearForm {
    pub fn new(lambda: Vec<Integer>) -> Result<Self> {
        if lambda.is_empty() {
            return Err(Error::pre("a linear form needs at least one coefficient"));
        }
        if lambda.len() > EXP_MAX_J as usize + 1 {
            return Err(Error::pre(format!("at most {} coefficients", EXP_MAX_J + 1)));
        }
        Ok(LinearForm { lambda })
    }

    pub fn from_i64s(lambda: &[i64]) -> Result<Self> {
        Self::new(lambda.iter().map(|&x| Integer::from(x)).collect())
    }

    pub fn lambda(&self) -> &[Integer] {
        &self.lambda
    }

    pub fn m(&self) -> usize {
        self.lambda.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.lambda.iter().all(|x| *x == 0)
    }

    /// `max_j |λ_j|` over all coefficients including `λ_0`.
    pub fn height(&self) -> Integer {
        self.lambda.iter().map(|x| x.clone().abs()).max().expect("non-empty")
    }

    pub fn scaled(&self, c: &Integer) -> Self {
        LinearForm { lambda: self.lambda.iter().map(|x| Integer::from(x * c)).collect() }
    }

    fn max_bits(&self) -> u32 {
        self.lambda.iter().map(|x| x.significant_bits()).max().unwrap_or(0)
    }
}

fn form_value(form: &LinearForm, prec: u32) -> BallReal {
    let e = e_taylor(prec + 8);
    let mut acc = BallReal::from_integer(&form.lambda[0], prec);
    let mut power = BallReal::from_u64(1, prec + 16);
    for lam in &form.lambda[1..] {
        power = &power * &e;
        if *lam != 0 {
            acc = &acc + &(&power * &BallReal::from_integer(lam, prec + 16));
        }
    }
    acc.abs()
}

/// Enclosure of `|Λ|`, refined by precision doubling until its relative width
/// is below `2^{-target_bits}`.
pub fn eval_linear_form(form: &LinearForm, target_bits: u32) -> Result<BallReal> {
    if form.is_zero() {
        return Err(Error::pre("linear form is identically zero"));
    }
    let mut prec = target_bits + form.max_bits() + 2 * form.m() as u32 + 32;
    let cap = PREC_CAP.max(2 * prec);
    loop {
        let v = form_value(form, prec);
        if !v.contains_zero() {
            let rel = Float::with_val(prec, v.lo() >> target_bits);
            if v.width() <= rel {
                return Ok(v);
            }
        }
        if prec >= cap {
            let what = format!("|Λ| = {v} is not resolved to {target_bits} relative bits");
            return Err(Error::PrecisionCap { cap, what });
        }
        prec = (2 * prec).min(cap);
    }
}

/// Outcome of comparing `|Λ|` with the measure bound at a given height.
#[derive(Clone, Debug, PartialEq)]
pub struct FormCertificate {
    pub form: LinearForm,
    pub log_h: BallReal,
    pub value: BallReal,
    /// Natural log of the bound `F (2H)^{-m-ε(H)}`.
    pub log_bound: BallReal,
    pub passed: bool,
    pub precision_used: u32,
}

/// Flat JSON shape of a [`FormCertificate`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub lambda: Vec<String>,
    pub m: usize,
    #[serde(rename = "logH")]
    pub log_h: String,
    pub value_lo: String,
    pub value_hi: String,
    pub bound_hi: String,
    pub log_bound_hi: String,
    pub passed: bool,
    pub bits: u32,
}

impl FormCertificate {
    pub fn record(&self) -> CertificateRecord {
        let bound = self.log_bound.exp();
        CertificateRecord {
            lambda: self.form.lambda.iter().map(|x| x.to_string()).collect(),
            m: self.form.m(),
            log_h: self.log_h.to_certified_string(),
            value_lo: self.value.lo_string(25),
            value_hi: self.value.hi_string(25),
            bound_hi: bound.hi_string(25),
            log_bound_hi: self.log_bound.hi_string(25),
            passed: self.passed,
            bits: self.precision_used,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self.record()).expect("plain record")
    }
}

/// Checks `|Λ| > F (2H)^{-m-ε(H)}` for `H = e^{logH}`.
pub fn verify_measure(form: &LinearForm, log_h: &BallReal) -> Result<FormCertificate> {
    verify_measure_prec(form, log_h, 64)
}

pub fn verify_measure_prec(form: &LinearForm, log_h: &BallReal, target_bits: u32) -> Result<FormCertificate> {
    if form.is_zero() {
        return Err(Error::pre("λ must not be the zero vector"));
    }
    let m = form.m() as u32;
    if m < 2 {
        return Err(Error::pre("the measure is stated for m >= 2"));
    }
    let mut prec = DEFAULT_PREC.max(log_h.prec());
    let log_h = log_h.with_prec(prec);
    let height = BallReal::from_integer(&form.height(), prec);
    if !height.ln().certainly_le(&log_h) {
        return Err(Error::pre(format!("log max|λ_j| exceeds logH = {log_h}")));
    }
    let mut bits = target_bits;
    loop {
        let params = params_for_e_prec(m, prec)?;
        let s = &params.s;
        if !log_h.certainly_ge(&(s * &s.exp())) {
            return Err(Error::pre(format!("logH = {log_h} is below s e^s for m = {m}")));
        }
        let bound = generic_lower_bound(&params, &log_h.with_prec(prec))?;
        let value = eval_linear_form(form, bits)?;
        let log_value = value.ln();
        let passed = log_value.certainly_gt(&bound.log_bound);
        if passed || log_value.certainly_le(&bound.log_bound) {
            return Ok(FormCertificate {
                form: form.clone(),
                log_h: log_h.clone(),
                value: value.clone(),
                log_bound: bound.log_bound,
                passed,
                precision_used: value.prec(),
            });
        }
        if prec >= PREC_CAP {
            return Err(Error::PrecisionCap { cap: PREC_CAP, what: "measure comparison".into() });
        }
        prec *= 2;
        bits *= 2;
    }
}

/// `l` from which the growth estimates are claimed for `m = 2, 3, 4`.
pub fn qr_threshold(m: usize) -> Result<u32> {
    if !(2..=4).contains(&m) {
        return Err(Error::pre("growth checks cover m = 2, 3, 4"));
    }
    Ok(first_index(m as u32)?.to_u32().expect("small"))
}

/// Per-row outcome of a growth check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthRow {
    pub k: usize,
    /// Natural log of the checked quantity, upper end.
    pub log_value_hi: f64,
    /// Natural log of the bound, lower end.
    pub log_bound_lo: f64,
}

impl GrowthRow {
    /// `value / bound`, rounded; the verdict never uses it.
    pub fn ratio(&self) -> f64 {
        (self.log_value_hi - self.log_bound_lo).exp()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthReport {
    pub m: usize,
    pub l: u32,
    pub rows: Vec<GrowthRow>,
    pub max_ratio: f64,
    pub bits: u32,
    pub common_factor: Option<CommonFactorReport>,
}

fn growth_constants(m: usize) -> (BallReal, BallReal) {
    let (_, b, d) = SMALL_M_BD.iter().find(|r| r.0 as usize == m).expect("m in 2..=4");
    (BallReal::parse_decimal(b, DEFAULT_PREC).unwrap(), BallReal::parse_decimal(d, DEFAULT_PREC).unwrap())
}

/// `log Q(l) = m l log l + b l`.
pub fn log_q(m: usize, l: u32) -> Result<BallReal> {
    qr_threshold(m)?;
    let (b, _) = growth_constants(m);
    let lb = BallReal::from_u64(l as u64, DEFAULT_PREC);
    Ok(&(&lb * &lb.ln()).mul_u64(m as u64) + &(&b * &lb))
}

/// `log R(l) = -l log l + d l`.
pub fn log_r(m: usize, l: u32) -> Result<BallReal> {
    qr_threshold(m)?;
    let (_, d) = growth_constants(m);
    let lb = BallReal::from_u64(l as u64, DEFAULT_PREC);
    Ok(&(&d * &lb) - &(&lb * &lb.ln()))
}

/// Builds the system for a growth check and divides out the common factor.
pub fn prepare_growth_system(m: usize, l: u32, allow_heavy: bool) -> Result<(ApproxSystem, CommonFactorReport)> {
    let threshold = qr_threshold(m)?;
    if l < threshold {
        return Err(Error::pre(format!("l = {l} is below the threshold {threshold} for m = {m}")));
    }
    if m == 4 && !allow_heavy {
        return Err(Error::ResourceLimit("m = 4 growth checks need the heavy opt-in".into()));
    }
    let mut system = build_system(m, l)?;
    let cf = extract_common_factor(&mut system)?;
    Ok((system, cf))
}

/// `|B_{k,0}(1)| ≤ Q(l)` for every row, compared against the lower end of `Q`.
pub fn check_q_bound(m: usize, l: u32) -> Result<GrowthReport> {
    let (system, cf) = prepare_growth_system(m, l, false)?;
    q_bound_on(&system, Some(cf))
}

/// `Σ_j |B_{k,0}(1) e^j + B_{k,j}(1)| ≤ R(l)`, compared against the lower end of `R`.
pub fn check_r_bound(m: usize, l: u32) -> Result<GrowthReport> {
    let (system, cf) = prepare_growth_system(m, l, false)?;
    r_bound_on(&system, Some(cf))
}

/// Both checks on one construction.
pub fn check_qr(m: usize, l: u32, allow_heavy: bool) -> Result<(GrowthReport, GrowthReport)> {
    let (system, cf) = prepare_growth_system(m, l, allow_heavy)?;
    let q = q_bound_on(&system, Some(cf.clone()))?;
    let r = r_bound_on(&system, Some(cf))?;
    Ok((q, r))
}

fn finish(m: usize, l: u32, rows: Vec<GrowthRow>, bits: u32, cf: Option<CommonFactorReport>) -> GrowthReport {
    let max_ratio = rows.iter().map(GrowthRow::ratio).fold(0.0, f64::max);
    GrowthReport { m, l, rows, max_ratio, bits, common_factor: cf }
}

pub fn q_bound_on(system: &ApproxSystem, cf: Option<CommonFactorReport>) -> Result<GrowthReport> {
    let (m, l) = (system.m(), system.l());
    let bound = log_q(m, l)?;
    let mut rows = Vec::new();
    for k in 0..=m {
        let b0 = system.poly(k, 0).eval_at_one().abs();
        if b0 == 0 {
            return Err(Error::Consistency(format!("B_({k},0)(1) vanishes")));
        }
        let log_b = BallReal::from_integer(&b0, DEFAULT_PREC).ln();
        if !log_b.certainly_le(&bound) {
            return Err(Error::Falsified(format!(
                "m = {m}, l = {l}, k = {k}: log|B_k0(1)| = {log_b} exceeds log Q = {bound}"
            )));
        }
        rows.push(GrowthRow { k, log_value_hi: log_b.hi().to_f64(), log_bound_lo: bound.lo().to_f64() });
    }
    Ok(finish(m, l, rows, DEFAULT_PREC, cf))
}

/// `Σ_j |L_{k,j}|` at the given precision, with `L_{k,j} = B_{k,0}(1) e^j + B_{k,j}(1)`.
fn remainder_sum(system: &ApproxSystem, k: usize, prec: u32) -> BallReal {
    let e = e_taylor(prec + 8);
    let b0 = BallReal::from_integer(&system.poly(k, 0).eval_at_one(), prec);
    let mut power = BallReal::from_u64(1, prec);
    let mut total = BallReal::from_u64(0, prec);
    for j in 1..=system.m() {
        power = &power * &e;
        let bj = BallReal::from_integer(&system.poly(k, j).eval_at_one(), prec);
        total = &total + &(&(&b0 * &power) + &bj).abs();
    }
    total
}

/// Enclosure of `B_{k,0}(1) e^j + B_{k,j}(1)` at the given precision.
pub fn remainder_at_one(system: &ApproxSystem, k: usize, j: usize, prec: u32) -> BallReal {
    let e = exp_unchecked(j as u32, prec);
    let b0 = BallReal::from_integer(&system.poly(k, 0).eval_at_one(), prec);
    let bj = BallReal::from_integer(&system.poly(k, j).eval_at_one(), prec);
    &(&b0 * &e) + &bj
}

/// Same quantity from the exact remainder series `Σ_{n<N} r_n` plus a tail
/// bound, for cross-checking [`remainder_at_one`].
pub fn remainder_via_series(system: &ApproxSystem, k: usize, j: usize, order: usize, prec: u32) -> Result<BallReal> {
    let series = system.remainder(k, j, order)?;
    let partial: Rational = series.coefficients().iter().sum();
    let b0 = system.poly(k, 0);
    let deg = b0.degree().unwrap_or(0);
    let big_k = order.checked_sub(deg).filter(|&kk| kk >= 2 * j.max(1)).ok_or_else(|| {
        Error::pre(format!("series order {order} too short for a tail bound"))
    })?;
    // |r_n| ≤ Σ|b_i| j^{n-deg}/(n-deg)! once n - deg ≥ j; the tail of j^K/K! is at most twice its head
    let s: Integer = b0.coeffs().iter().map(|c| c.clone().abs()).sum();
    let head = Rational::from((Integer::from(Integer::u_pow_u(j as u32, big_k as u32)), Integer::factorial(big_k as u32)));
    let tail = Rational::from(s) * head * 2u32;
    let lo = BallReal::from_rational(&Rational::from(&partial - &tail), prec);
    let hi = BallReal::from_rational(&Rational::from(&partial + &tail), prec);
    Ok(lo.hull(&hi))
}

pub fn r_bound_on(system: &ApproxSystem, cf: Option<CommonFactorReport>) -> Result<GrowthReport> {
    let (m, l) = (system.m(), system.l());
    let bound = log_r(m, l)?;
    let lb = l as f64;
    let mut rows = Vec::new();
    let mut bits_used = 0;
    for k in 0..=m {
        let b0_bits = system.poly(k, 0).eval_at_one().significant_bits();
        // cancellation leaves ~e^{-l log l} from operands of size |B_k0|
        let presize = b0_bits + (lb * lb.log2()).ceil() as u32 + 64;
        let cap = 8 * presize;
        let mut prec = presize;
        loop {
            let sum = remainder_sum(system, k, prec);
            if sum.certainly_positive() || !sum.contains_zero() {
                let log_sum = sum.ln();
                if log_sum.certainly_le(&bound) {
                    rows.push(GrowthRow { k, log_value_hi: log_sum.hi().to_f64(), log_bound_lo: bound.lo().to_f64() });
                    bits_used = bits_used.max(prec);
                    break;
                }
                if log_sum.certainly_gt(&bound) {
                    return Err(Error::Falsified(format!(
                        "m = {m}, l = {l}, k = {k}: log Σ|L_kj| = {log_sum} exceeds log R = {bound}"
                    )));
                }
            }
            if prec >= cap {
                return Err(Error::PrecisionCap { cap, what: format!("R check, m = {m}, l = {l}, k = {k}") });
            }
            prec *= 2;
        }
    }
    Ok(finish(m, l, rows, bits_used, cf))
}

/// Result of [`empirical_min_search`].
#[derive(Clone, Debug, PartialEq)]
pub struct MinSearch {
    pub form: LinearForm,
    pub value: BallReal,
    pub candidates: u64,
}

/// Largest number of points [`empirical_min_search`] will enumerate.
pub const SEARCH_BUDGET: u64 = 100_000_000;

/// Minimum of `|λ_0 + λ_1 e + … + λ_m e^m|` over `|λ_j| ≤ box` for
/// `j = 1..m`, with `λ_0` free (it is always the nearest integer to
/// `-Σ λ_j e^j`). Signs are normalised so the last nonzero entry is positive.
pub fn empirical_min_search(m: usize, bx: u32) -> Result<MinSearch> {
    if !(1..=3).contains(&m) {
        return Err(Error::pre("search supports 1 <= m <= 3"));
    }
    if !(1..=50).contains(&bx) {
        return Err(Error::pre("box must be in 1..=50"));
    }
    let side = 2 * bx as u64 + 1;
    if side.pow(m as u32 + 1) > SEARCH_BUDGET {
        return Err(Error::ResourceLimit(format!("(2·{bx}+1)^{} exceeds {SEARCH_BUDGET}", m + 1)));
    }
    let b = bx as i64;
    let e_pows: Vec<f64> = (1..=m).map(|j| (j as f64).exp()).collect();
    let count = side.pow(m as u32);
    // tails (λ_1..λ_m) with last nonzero entry positive
    let screen = |idx: u64| -> Option<(f64, Vec<i64>)> {
        let mut lam = Vec::with_capacity(m);
        let mut r = idx;
        for _ in 0..m {
            lam.push((r % side) as i64 - b);
            r /= side;
        }
        match lam.iter().rev().find(|&&x| x != 0) {
            Some(&x) if x > 0 => {}
            _ => return None,
        }
        let x: f64 = lam.iter().zip(&e_pows).map(|(l, e)| *l as f64 * e).sum();
        Some(((x - x.round()).abs(), lam))
    };
    let best = (0..count)
        .into_par_iter()
        .filter_map(screen)
        .map(|(v, _)| v)
        .reduce(|| f64::INFINITY, f64::min);
    // certify everything that the f64 screen cannot separate from the best
    let slack = 1e-9 + best * 1e-6;
    let mut close: Vec<Vec<i64>> = (0..count)
        .into_par_iter()
        .filter_map(screen)
        .filter(|(v, _)| *v <= best + slack)
        .map(|(_, l)| l)
        .collect();
    close.sort();
    let mut winner: Option<(LinearForm, BallReal)> = None;
    for tail in close {
        let x: f64 = tail.iter().zip(&e_pows).map(|(l, e)| *l as f64 * e).sum();
        let mut lambda = vec![Integer::from(-(x.round() as i64))];
        lambda.extend(tail.iter().map(|&t| Integer::from(t)));
        // the rounded λ_0 may be off by one when x is near a half-integer in f64
        for delta in [-1i64, 0, 1] {
            let mut cand = lambda.clone();
            cand[0] += delta;
            let form = LinearForm::new(cand)?;
            let v = eval_linear_form(&form, 64)?;
            let better = match &winner {
                None => true,
                Some((_, w)) => {
                    if v.certainly_lt(w) {
                        true
                    } else if v.overlaps(w) {
                        return Err(Error::NonConvergence("tie in the minimum search".into()));
                    } else {
                        false
                    }
                }
            };
            if better {
                winner = Some((form, v));
            }
        }
    }
    let (form, value) = winner.ok_or_else(|| Error::Consistency("empty search".into()))?;
    Ok(MinSearch { form, value, candidates: count })
}

/// Convergents `p/q` of the continued fraction `e = [2; 1, 2, 1, 1, 4, 1, 1, 6, …]`
/// with `q ≤ q_max`.
pub fn e_convergents(q_max: &Integer) -> Vec<(Integer, Integer)> {
    let term = |i: usize| -> u64 {
        match i {
            0 => 2,
            _ if i % 3 == 2 => 2 * (i as u64 + 1) / 3,
            _ => 1,
        }
    };
    let (mut p0, mut q0) = (Integer::from(1), Integer::from(0));
    let (mut p1, mut q1) = (Integer::from(term(0)), Integer::from(1));
    let mut out = vec![(p1.clone(), q1.clone())];
    for i in 1.. {
        let a = term(i);
        let p2 = Integer::from(&p1 * a) + &p0;
        let q2 = Integer::from(&q1 * a) + &q0;
        if q2 > *q_max {
            break;
        }
        out.push((p2.clone(), q2.clone()));
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
    }
    out
}
