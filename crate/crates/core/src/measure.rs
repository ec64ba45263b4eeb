//! Inverse of `z log z`, the parameter algebra behind the lower-bound
//! criterion, and the explicit transcendence-measure bounds built on it.
//!
//! Every quantity depending on the height is taken as `log H` or `log log H`
//! so that `H` itself is never formed.

use rug::Integer;
use serde::Serialize;

use crate::ball::{BallReal, DEFAULT_PREC, PREC_CAP};
use crate::error::{Error, Result};
use crate::factor::{kappa_m_prec, s_of_m};

/// Constant in `b(m)` for `m ≥ 5`.
pub const DELTA: &str = "0.0000525";
/// The same constant as it appears in the `m ≥ 15` estimates.
pub const DELTA_ALT: &str = "0.0000535";
/// Constant in `d(m)` for `m ≥ 5`.
pub const D_SHIFT: &str = "0.02394";

/// `(b, d)` for `m = 2, 3, 4`.
pub const SMALL_M_BD: [(u32, &str, &str); 3] =
    [(2, "1.6791", "0.3654"), (3, "2.1016", "0.5139"), (4, "3.3612", "1.6016")];

/// Published `(B, C, D)` for `m = 2, 3, 4`.
pub const SMALL_M_BCD: [(u32, f64, u32, f64); 3] =
    [(2, 2.4099, 2, 3.8111), (3, 3.6433, 3, 5.1819), (4, 9.7676, 4, 7.3631)];

/// Published coefficients of `1/log log H` for `m = 2, 3, 4`.
pub const SMALL_M_OMEGA: [(u32, &str); 3] = [(2, "4.93"), (3, "6.49"), (4, "15.7")];

/// Published `(m, f(m), product)` rows, both columns truncated to four places.
pub const FM_TABLE: [(u32, f64, f64); 10] = [
    (5, 0.4638, 0.5324),
    (6, 0.6159, 0.6551),
    (7, 0.6032, 0.6469),
    (8, 0.6158, 0.6603),
    (9, 0.5768, 0.6296),
    (10, 0.6366, 0.6831),
    (11, 0.5995, 0.6529),
    (12, 0.6444, 0.6936),
    (13, 0.6286, 0.6812),
    (14, 0.6203, 0.6749),
];

const Z_MAX_ITERATIONS: usize = 10_000;

/// `z_0 = y`, `z_n = y / log z_{n-1}`, for `n = 0..count`.
pub fn z_iterates(y: &BallReal, count: usize) -> Result<Vec<BallReal>> {
    check_y(y)?;
    let mut out = Vec::with_capacity(count);
    let mut z = y.clone();
    for _ in 0..count {
        out.push(z.clone());
        z = y / &z.ln();
    }
    Ok(out)
}

fn check_y(y: &BallReal) -> Result<()> {
    if !y.certainly_gt(&BallReal::e(y.prec())) {
        return Err(Error::pre(format!("z(y) iteration needs y > e, got {y}")));
    }
    Ok(())
}

/// Enclosure of the `z ≥ 1/e` with `z log z = y`, of width at most `tolerance`.
///
/// The nested iterates bracket `z` from both sides (odd ones below, even ones
/// above); once they stall, certified bisection on `z log z - y` finishes.
pub fn z_inverse(y: &BallReal, tolerance: f64) -> Result<BallReal> {
    check_y(y)?;
    if !(tolerance > 0.0) {
        return Err(Error::pre("tolerance must be positive"));
    }
    let prec = y.prec();
    let tol = rug::Float::with_val(prec, tolerance);
    let mut lo = rug::Float::with_val(prec, 0);
    let mut hi = y.hi().clone();
    let mut z = y.clone();
    let mut stall = 0;
    for n in 1..=Z_MAX_ITERATIONS {
        z = y / &z.ln();
        let before = rug::Float::with_val(prec, &hi - &lo);
        if n % 2 == 1 {
            if *z.lo() > lo {
                lo = z.lo().clone();
            }
        } else if *z.hi() < hi {
            hi = z.hi().clone();
        }
        if rug::Float::with_val(prec, &hi - &lo) <= tol {
            return BallReal::from_bounds(lo, hi);
        }
        // stop iterating once an odd/even pair no longer halves the gap
        if n % 2 == 0 {
            let after = rug::Float::with_val(prec, &hi - &lo);
            if after * 2u32 > before {
                stall += 1;
                if stall > 4 {
                    break;
                }
            } else {
                stall = 0;
            }
        }
    }
    bisect_z(y, lo, hi, &tol)
}

fn bisect_z(y: &BallReal, mut lo: rug::Float, mut hi: rug::Float, tol: &rug::Float) -> Result<BallReal> {
    let prec = y.prec();
    for _ in 0..4 * prec as usize {
        if rug::Float::with_val(prec, &hi - &lo) <= *tol {
            return BallReal::from_bounds(lo, hi);
        }
        let mid = rug::Float::with_val(prec, &lo + &hi) / 2u32;
        let mb = BallReal::from_bounds(mid.clone(), mid.clone())?;
        let f = &(&mb * &mb.ln()) - y;
        if f.certainly_negative() {
            lo = mid;
        } else if f.certainly_positive() {
            hi = mid;
        } else {
            break;
        }
    }
    Err(Error::NonConvergence(format!(
        "z({y}) cannot be resolved to width {tol} at {prec} bits"
    )))
}

/// `z(y) ≤ (1 + log s/s) y / log y` for `y ≥ s e^s`, `s ≥ e`.
pub fn z_upper_bound(y: &BallReal, s: &BallReal) -> Result<BallReal> {
    let prec = y.prec();
    // both hypotheses are closed, so a ball touching the boundary is accepted
    if s.certainly_lt(&BallReal::e(prec)) {
        return Err(Error::pre("z upper bound needs s >= e"));
    }
    let threshold = s * &s.exp();
    if y.certainly_lt(&threshold) {
        return Err(Error::pre(format!("z upper bound needs y >= s e^s = {threshold}")));
    }
    Ok(u_of_s(s) * (y / &y.ln()))
}

/// `1 + log s / s`.
pub fn u_of_s(s: &BallReal) -> BallReal {
    (&s.ln() / s).add_u64(1)
}

/// Which family the parameters were built for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamFamily {
    Exponential,
    Sparse { m1: u32, m2: u32 },
}

/// `(a, b, c, d)` of the `Q`/`R` growth rates and everything derived from them.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureParams {
    pub family: ParamFamily,
    pub m: u32,
    pub a: BallReal,
    pub b: BallReal,
    pub c: BallReal,
    pub d: BallReal,
    pub s: BallReal,
    pub kappa: BallReal,
    /// `b + ad/c`
    pub big_b: BallReal,
    /// `a`
    pub big_c: BallReal,
    /// `a + b + a e^{-s}`
    pub big_d: BallReal,
    /// `1/(2 e^D)`
    pub f: BallReal,
    /// `c - d/s`
    pub v: BallReal,
    /// `1 + log s / s`
    pub u: BallReal,
    /// `max{n_0, e, e^s}` with `n_0` the first index where the growth bounds hold.
    pub n1: BallReal,
}

impl MeasureParams {
    fn derive(
        family: ParamFamily,
        m: u32,
        a: BallReal,
        b: BallReal,
        c: BallReal,
        d: BallReal,
        s: BallReal,
        kappa: BallReal,
        n0: BallReal,
    ) -> Self {
        let big_b = &b + &(&a * &d / &c);
        let big_c = a.clone();
        let big_d = &(&a + &b) + &(&a * &(-&s).exp());
        let f = big_d.exp().mul_u64(2).recip();
        let v = &c - &(&d / &s);
        let u = u_of_s(&s);
        let n1 = n0.max(&BallReal::e(s.prec())).max(&s.exp());
        MeasureParams { family, m, a, b, c, d, s, kappa, big_b, big_c, big_d, f, v, u, n1 }
    }

    pub fn prec(&self) -> u32 {
        self.a.prec()
    }

    /// `v n_1 log n_1`, the least admissible `log(2H)`.
    pub fn log2h_threshold(&self) -> BallReal {
        &self.v * &(&self.n1 * &self.n1.ln())
    }

    /// `B̂ = u B / v`.
    pub fn b_hat(&self) -> BallReal {
        &(&self.u * &self.big_b) / &self.v
    }
}

fn dec(s: &str, prec: u32) -> BallReal {
    BallReal::parse_decimal(s, prec).expect("valid literal")
}

fn ceil_ball(x: &BallReal) -> BallReal {
    BallReal::from_integer(&x.ceil_hi(), x.prec())
}

/// Parameters for `Θ_j = e^j`, `j = 1..m`.
pub fn params_for_e(m: u32) -> Result<MeasureParams> {
    params_for_e_prec(m, DEFAULT_PREC)
}

pub fn params_for_e_prec(m: u32, prec: u32) -> Result<MeasureParams> {
    let s = s_of_m(m, prec)?;
    let kappa = kappa_m_prec(m, prec)?.value;
    let a = BallReal::from_u64(m as u64, prec);
    let c = BallReal::from_u64(1, prec);
    let (b, d) = match SMALL_M_BD.iter().find(|(mm, _, _)| *mm == m) {
        Some((_, b, d)) => (dec(b, prec), dec(d, prec)),
        None => {
            let mb = BallReal::from_u64(m as u64, prec);
            let m1 = BallReal::from_u64(m as u64 + 1, prec);
            let one_k = kappa.add_u64(1);
            let b = &(&(&m1 * &m1.ln()) - &(&one_k * &mb)) + &dec(DELTA, prec);
            let half = BallReal::from_u64(2 * m as u64 + 1, prec).div_u64(2);
            let d = &(&(&half * &mb.ln()) - &(&one_k * &mb)) - &dec(D_SHIFT, prec);
            (b, d)
        }
    };
    let n0 = ceil_ball(&s.exp());
    Ok(MeasureParams::derive(ParamFamily::Exponential, m, a, b, c, d, s, kappa, n0))
}

/// Parameters for a polynomial in `e` with `m1 + 1` terms and degree `m2`.
pub fn params_sparse(m1: u32, m2: u32, prec: u32) -> Result<MeasureParams> {
    if m1 < 1 {
        return Err(Error::pre("m1 must be >= 1"));
    }
    if m2 < 2 {
        return Err(Error::pre("m2 must be >= 2"));
    }
    let s = s_sparse(m2, prec);
    let a = BallReal::from_u64(m1 as u64, prec);
    let c = BallReal::from_u64(1, prec);
    let m1b = BallReal::from_u64(m1 as u64 + 1, prec);
    let b = &(m1b.ln().mul_u64(m1 as u64 + 2)) - &a;
    let d = BallReal::from_u64(m2 as u64, prec).ln().mul_u64(m1 as u64 + 2);
    let n0 = ceil_ball(&(&s * &s.exp()));
    let family = ParamFamily::Sparse { m1, m2 };
    Ok(MeasureParams::derive(family, m1, a, b, c, d, s, BallReal::from_u64(0, prec), n0))
}

/// `m2 (log m2)^2`.
fn s_sparse(m2: u32, prec: u32) -> BallReal {
    BallReal::from_u64(m2 as u64, prec).ln().sqr().mul_u64(m2 as u64)
}

/// `ε(H)` and `F` such that `|Λ| > F (2H)^{-a/c-ε(H)}`.
#[derive(Clone, Debug, PartialEq)]
pub struct GenericBound {
    pub epsilon: BallReal,
    pub prefactor: BallReal,
    /// `a/c + ε(H)`
    pub exponent: BallReal,
    /// `log F - (a/c + ε) log 2H`
    pub log_bound: BallReal,
}

fn log2h(log_h: &BallReal) -> BallReal {
    log_h + &BallReal::ln2(log_h.prec())
}

fn check_log2h(params: &MeasureParams, l2h: &BallReal) -> Result<()> {
    let need = params.log2h_threshold();
    if !l2h.certainly_ge(&need) {
        return Err(Error::pre(format!("log(2H) = {l2h} is below v n1 log n1 = {need}")));
    }
    Ok(())
}

/// `ε(H) log 2H = B z(log(2H)/v) + C log z(log(2H)/v)`.
pub fn generic_lower_bound(params: &MeasureParams, log_h: &BallReal) -> Result<GenericBound> {
    let prec = params.prec().max(log_h.prec());
    let log_h = log_h.with_prec(prec);
    let l2h = log2h(&log_h);
    check_log2h(params, &l2h)?;
    let y = &l2h / &params.v;
    let tol = y.hi().to_f64() * 2f64.powi(-(prec as i32) + 8);
    let z = z_inverse(&y, tol)?;
    let eps_num = &(&params.big_b * &z) + &(&params.big_c * &z.ln());
    let epsilon = &eps_num / &l2h;
    let exponent = &(&params.a / &params.c) + &epsilon;
    let log_bound = &params.f.ln() - &(&exponent * &l2h);
    Ok(GenericBound { epsilon, prefactor: params.f.clone(), exponent, log_bound })
}

/// Closed-form weakening with exponent `a/c + Bu/(v log log 2H)` and prefactor
/// `v^C/(2 e^D u^C) (log log 2H / log 2H)^C`.
#[derive(Clone, Debug, PartialEq)]
pub struct CorollaryBound {
    pub exponent: BallReal,
    pub prefactor: BallReal,
    pub log_bound: BallReal,
}

pub fn corollary_bound(params: &MeasureParams, log_h: &BallReal) -> Result<CorollaryBound> {
    let prec = params.prec().max(log_h.prec());
    let log_h = log_h.with_prec(prec);
    let cap = &(&params.d / &params.s).add_u64(1);
    if !params.c.certainly_le(cap) {
        return Err(Error::pre("corollary needs c <= 1 + d/s"));
    }
    let l2h = log2h(&log_h);
    check_log2h(params, &l2h)?;
    let ll2h = l2h.ln();
    let exponent = &(&params.a / &params.c) + &(&(&params.big_b * &params.u) / &(&params.v * &ll2h));
    // C is the integer a in every family used here
    let c_int = params.big_c.midpoint().to_integer().expect("finite").to_u32().expect("small");
    let ratio = &params.v / &params.u;
    let prefactor = &(&params.f * &ratio.powi(c_int)) * &(&ll2h / &l2h).powi(c_int);
    let log_bound = &prefactor.ln() - &(&exponent * &l2h);
    Ok(CorollaryBound { exponent, prefactor, log_bound })
}

/// `m + Y` with `Y log H = ε(H) log 2H + D + (m+1) log 2`, the exponent of `H`
/// that the generic bound actually delivers.
pub fn implied_omega(params: &MeasureParams, log_h: &BallReal) -> Result<BallReal> {
    let g = generic_lower_bound(params, log_h)?;
    let prec = g.epsilon.prec();
    let log_h = log_h.with_prec(prec);
    let l2h = log2h(&log_h);
    let m = params.m as u64;
    let num = &(&(&g.epsilon * &l2h) + &params.big_d) + &BallReal::ln2(prec).mul_u64(m + 1);
    Ok(&(&num / &log_h) + &params.a)
}

/// `log(s e^s) = s + log s`, the least admissible `log log H`.
pub fn loglog_threshold(m: u32, prec: u32) -> Result<BallReal> {
    let s = s_of_m(m, prec)?;
    Ok(&s + &s.ln())
}

/// Upper bound for `ω(m, H)` in terms of `log log H`.
pub fn omega_upper(m: u32, loglog_h: &BallReal) -> Result<BallReal> {
    let prec = loglog_h.prec().max(DEFAULT_PREC);
    let ll = loglog_h.with_prec(prec);
    let need = loglog_threshold(m, prec)?;
    if !ll.certainly_ge(&need) {
        return Err(Error::pre(format!("log log H = {ll} is below log(s e^s) = {need}")));
    }
    let coeff = omega_coefficient(m, prec)?;
    Ok(&(&coeff / &ll) + &BallReal::from_u64(m as u64, prec))
}

/// Coefficient of `1 / log log H` in [`omega_upper`].
pub fn omega_coefficient(m: u32, prec: u32) -> Result<BallReal> {
    if let Some((_, c)) = SMALL_M_OMEGA.iter().find(|(mm, _)| *mm == m) {
        return Ok(dec(c, prec));
    }
    if m < 2 {
        return Err(Error::pre("m must be >= 2"));
    }
    let kappa = kappa_m_prec(m, prec)?.value;
    let lm = BallReal::from_u64(m as u64, prec).ln();
    let one = BallReal::from_u64(1, prec);
    let first = if m <= 14 {
        &one - &(kappa.mul_u64(2) / lm.sqr())
    } else {
        &one - &(kappa.add_u64(1) / lm.sqr())
    };
    let second = &one - &(&kappa / &lm);
    Ok(&(&first * &second) * &lm.mul_u64(m as u64 * m as u64))
}

#[derive(Clone, Debug, PartialEq)]
pub struct FmRow {
    pub m: u32,
    pub f: BallReal,
    pub product: BallReal,
    /// `u(B + δ')/(v m² log m)` with `v = 1 - d/s` taken literally.
    pub f_compact: BallReal,
    pub published_f: f64,
    pub published_product: f64,
}

impl FmRow {
    /// Both columns agree with the published rows after truncation to four
    /// places.
    pub fn matches_published(&self) -> bool {
        truncates_to(&self.f, self.published_f) && truncates_to(&self.product, self.published_product)
    }
}

/// Whether every point of `x` truncates to `target` at four places.
pub fn truncates_to(x: &BallReal, target: f64) -> bool {
    let prec = x.prec();
    let t = BallReal::from_rational(&rug::Rational::from_f64(target).unwrap(), prec);
    let scaled = (&t.mul_u64(10_000)).midpoint().to_integer().unwrap();
    let lo = BallReal::from_integer(&scaled, prec).div_u64(10_000);
    let hi = BallReal::from_integer(&(scaled + 1u32), prec).div_u64(10_000);
    x.certainly_ge(&lo) && x.certainly_lt(&hi)
}

/// `δ'` replacing `10^{-6}` in `f(5)`.
pub const FM_DELTA_M5: &str = "0.0002069";
pub const FM_DELTA: &str = "0.000001";

/// `f(m)` and `(1 - κ/log m)(1 - 2κ/(log m)^2)` for `m = lo..=hi` within 5..=14.
pub fn fm_table(lo: u32, hi: u32) -> Result<Vec<FmRow>> {
    if lo < 5 || hi > 14 || lo > hi {
        return Err(Error::pre("f(m) table covers 5 <= m <= 14"));
    }
    let prec = DEFAULT_PREC;
    let mut rows = Vec::new();
    for m in lo..=hi {
        let params = params_for_e_prec(m, prec)?;
        let kappa = &params.kappa;
        let mb = BallReal::from_u64(m as u64, prec);
        let m1 = BallReal::from_u64(m as u64 + 1, prec);
        let lm = mb.ln();
        let llm = lm.ln();
        let one = BallReal::from_u64(1, prec);
        let delta_p = dec(if m == 5 { FM_DELTA_M5 } else { FM_DELTA }, prec);
        let m_lm = &mb * &lm;
        let m2_lm = &m_lm * &mb;

        let first = &(&one + &m_lm.recip()) + &(llm.mul_u64(2) / (&m_lm * &lm));
        let second = &(&(&(&(&one - &(kappa.add_u64(1) / &lm)) + &(&(&m1 * &m1.ln()) / &m2_lm))
            + &mb.mul_u64(2).recip())
            - &(&(&dec("1.02394", prec) + kappa) / &m_lm))
            + &(&(&dec(DELTA, prec) + &delta_p) / &m2_lm);
        let den = &(&(&one - &lm.recip()) - &m_lm.mul_u64(2).recip()) + &(kappa.add_u64(1) / lm.sqr());
        let f = &(&first * &second) / &den;

        let product = &(&one - &(kappa / &lm)) * &(&one - &(kappa.mul_u64(2) / lm.sqr()));
        if !f.certainly_le(&product) {
            return Err(Error::Falsified(format!("f({m}) = {f} exceeds {product}")));
        }
        let f_compact = &(&params.u * &(&params.big_b + &delta_p)) / &(&params.v * &(&mb * &m_lm));
        let (_, published_f, published_product) =
            FM_TABLE.iter().copied().find(|r| r.0 == m).expect("row exists");
        rows.push(FmRow { m, f, product, f_compact, published_f, published_product });
    }
    Ok(rows)
}

/// `ρ` as published: 12.88 for `m2 < 11`, 2 from there on.
pub fn rho_for(m2: u32) -> &'static str {
    if m2 >= 11 {
        "2"
    } else {
        "12.88"
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SparseBound {
    pub m1: u32,
    pub m2: u32,
    pub rho: &'static str,
    /// `m1 + ρ(m1² + 3m1 + 2) log m2 / log log H`
    pub exponent: BallReal,
    /// General bound on the same parameters, when its hypothesis on H holds.
    pub generic: Option<GenericBound>,
}

fn sparse_exponent(m1: u32, m2: u32, ll: &BallReal) -> BallReal {
    let prec = ll.prec();
    let k = (m1 as u64 + 1) * (m1 as u64 + 2);
    let rho = dec(rho_for(m2), prec);
    let t = &(&rho * &BallReal::from_u64(m2 as u64, prec).ln().mul_u64(k)) / ll;
    &t + &BallReal::from_u64(m1 as u64, prec)
}

fn check_sparse_height(m2: u32, ll: &BallReal) -> Result<()> {
    let s = s_sparse(m2, ll.prec());
    let need = &s + &s.ln();
    if !ll.certainly_ge(&need) {
        return Err(Error::pre(format!("log log H = {ll} is below log(s e^s) = {need} for m2 = {m2}")));
    }
    Ok(())
}

/// Exponent bound for `|P(e)|` with `P` having at most `m1 + 1` terms and
/// degree `m2`.
pub fn sparse_bound(m1: u32, m2: u32, loglog_h: &BallReal) -> Result<SparseBound> {
    if m1 < 1 {
        return Err(Error::pre("m1 must be >= 1"));
    }
    if m2 < 4 {
        return Err(Error::pre("m2 must be >= 4"));
    }
    if m2 < m1 + 1 {
        return Err(Error::pre("m2 must be >= m1 + 1"));
    }
    let ll = loglog_h.with_prec(loglog_h.prec().max(DEFAULT_PREC));
    check_sparse_height(m2, &ll)?;
    let exponent = sparse_exponent(m1, m2, &ll);
    let params = params_sparse(m1, m2, ll.prec())?;
    let generic = generic_lower_bound(&params, &ll.exp()).ok();
    Ok(SparseBound { m1, m2, rho: rho_for(m2), exponent, generic })
}

/// Exponent bound for `λ_0 + λ_1 e^d + … + λ_m e^{md}`, i.e. the sparse bound
/// at `m1 = m`, `m2 = d m`.
pub fn power_measure(dexp: u32, m: u32, loglog_h: &BallReal) -> Result<SparseBound> {
    if dexp < 2 {
        return Err(Error::pre("d must be >= 2"));
    }
    if m < 1 {
        return Err(Error::pre("m must be >= 1"));
    }
    let m2 = dexp.checked_mul(m).ok_or_else(|| Error::pre("d m overflows"))?;
    let ll = loglog_h.with_prec(loglog_h.prec().max(DEFAULT_PREC));
    check_sparse_height(m2, &ll)?;
    let exponent = sparse_exponent(m, m2, &ll);
    let generic = if m2 >= 4 {
        params_sparse(m, m2, ll.prec()).ok().and_then(|p| generic_lower_bound(&p, &ll.exp()).ok())
    } else {
        None
    };
    Ok(SparseBound { m1: m, m2, rho: rho_for(m2), exponent, generic })
}

/// Runs `f` at increasing precision until it succeeds or the cap is reached.
pub fn with_adaptive_precision<T>(start: u32, mut f: impl FnMut(u32) -> Result<T>) -> Result<T> {
    let mut prec = start;
    loop {
        match f(prec) {
            Err(Error::NonConvergence(_)) if prec < PREC_CAP => prec *= 2,
            Err(Error::NonConvergence(what)) => return Err(Error::PrecisionCap { cap: PREC_CAP, what }),
            other => return other,
        }
    }
}

/// `⌈e^s⌉` as an integer, the first index `l` at which the growth bounds are
/// used for the exponential system.
pub fn first_index(m: u32) -> Result<Integer> {
    Ok(s_of_m(m, DEFAULT_PREC)?.exp().ceil_hi())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn b(x: f64) -> BallReal {
        BallReal::from_rational(&rug::Rational::from_f64(x).unwrap(), 128)
    }

    #[test]
    fn z_examples() {
        let y = BallReal::from_u64(4, 128).ln().mul_u64(4);
        let z = z_inverse(&y, 1e-20).unwrap();
        assert!(z.contains_f64(4.0));
        let z = z_inverse(&b(100.0), 1e-12).unwrap();
        let back = &z * &z.ln();
        assert!((back.to_f64() - 100.0).abs() < 1e-10);
        let y = &BallReal::e(128) + &b(0.01);
        let z = z_inverse(&y, 1e-15).unwrap();
        assert!(*z.lo() > std::f64::consts::E);
        assert!(z_inverse(&b(2.0), 1e-6).is_err());
        assert!(z_inverse(&BallReal::e(128), 1e-6).is_err());
    }

    #[test]
    fn z_bracketing() {
        let it = z_iterates(&b(1000.0), 6).unwrap();
        let z = z_inverse(&b(1000.0), 1e-20).unwrap();
        assert!(it[1].certainly_lt(&it[3]));
        assert!(it[3].certainly_lt(&z));
        assert!(z.certainly_lt(&it[2]));
        assert!(it[2].certainly_lt(&it[0]));
    }

    #[test]
    fn z_upper_examples() {
        let e = BallReal::e(128);
        let y = &e * &e.exp();
        let z = z_inverse(&y, 1e-20).unwrap();
        assert!(z.contains_ball(&e.exp()) || z.overlaps(&e.exp()));
        let ub = z_upper_bound(&y, &e).unwrap();
        assert!(ub.hi() >= e.exp().lo());
        assert!(z_upper_bound(&b(100.0), &e).unwrap().certainly_ge(&z_inverse(&b(100.0), 1e-20).unwrap()));
        let s5 = s_of_m(5, 128).unwrap();
        let y = &s5 * &s5.exp();
        assert!(z_upper_bound(&y, &s5).unwrap().hi() >= s5.exp().lo());
        assert!(z_upper_bound(&b(10.0), &e).is_err());
    }

    #[test]
    fn small_m_constants() {
        for &(m, bb, c, dd) in &SMALL_M_BCD {
            let p = params_for_e(m).unwrap();
            assert!((p.big_b.to_f64() - bb).abs() < 1e-9, "B m={m}");
            assert_eq!(p.big_c.to_f64(), c as f64);
            assert!((p.big_d.to_f64() - dd).abs() < 1e-4, "D m={m} {}", p.big_d);
        }
        assert_eq!(first_index(2).unwrap(), 16);
        assert_eq!(first_index(3).unwrap(), 38);
        assert_eq!(first_index(4).unwrap(), 2181);
        // u/v figures used for the small-m coefficients
        for (m, cap) in [(2, 1.5804), (3, 1.5796), (4, 1.5984)] {
            let p = params_for_e(m).unwrap();
            assert!((&p.u / &p.v).certainly_le(&b(cap)), "m={m}");
        }
    }

    #[test]
    fn m5_params_match_closed_form() {
        let p = params_for_e(5).unwrap();
        let k = &p.kappa;
        let m = b(5.0);
        let lm = m.ln();
        let m1 = b(6.0);
        // B(m) = m² log m − (1+κ)m² + (m+1)log(m+1) + ½ m log m − (1.02394+κ)m + δ
        let closed = &(&(&(&(&(lm.mul_u64(25)) - &k.add_u64(1).mul_u64(25)) + &(&m1 * &m1.ln()))
            + &lm.mul_u64(5).div_u64(2))
            - &(&b(1.02394) + k).mul_u64(5))
            + &dec(DELTA, 128);
        assert!((p.big_b.to_f64() - closed.to_f64()).abs() < 1e-9);
        // D(m) = (m+1)log(m+1) − κm + δ + m e^{-s}
        let closed_d = &(&(&(&m1 * &m1.ln()) - &k.mul_u64(5)) + &dec(DELTA, 128)) + &(&m * &(-&p.s).exp());
        assert!((p.big_d.to_f64() - closed_d.to_f64()).abs() < 1e-9);
    }

    #[test]
    fn generic_and_corollary_m2() {
        let p = params_for_e(2).unwrap();
        let g = generic_lower_bound(&p, &b(45.0)).unwrap();
        assert!(g.epsilon.certainly_positive());
        let c = corollary_bound(&p, &b(45.0)).unwrap();
        assert!(c.log_bound.certainly_le(&g.log_bound));
        assert!(generic_lower_bound(&p, &b(30.0)).is_err());
        assert!(p.b_hat().certainly_ge(&p.big_b));
    }

    #[test]
    fn corollary_m3_at_threshold() {
        let p = params_for_e(3).unwrap();
        let s = &p.s;
        let log_h = (s * &s.exp()).add_u64(1);
        let c = corollary_bound(&p, &log_h).unwrap();
        let g = generic_lower_bound(&p, &log_h).unwrap();
        assert!(c.log_bound.certainly_le(&g.log_bound));
    }

    #[test]
    fn omega_examples() {
        let w = omega_upper(2, &b(4.0)).unwrap();
        assert!((w.to_f64() - 3.2325).abs() < 1e-12);
        assert!(omega_upper(2, &b(3.0)).is_err());
        let c5 = omega_coefficient(5, 128).unwrap();
        let f = &c5 / &BallReal::from_u64(5, 128).ln().mul_u64(25);
        assert!((f.to_f64() - 0.5324).abs() < 1e-4);
        // m = 15 picks the (1+κ) factor
        let k15 = kappa_m_prec(15, 128).unwrap().value;
        let l15 = b(15.0).ln();
        let one = b(1.0);
        let expect = &(&(&one - &(k15.add_u64(1) / l15.sqr())) * &(&one - &(&k15 / &l15))) * &l15.mul_u64(225);
        assert!(omega_coefficient(15, 128).unwrap().overlaps(&expect));
    }

    #[test]
    fn fm_rows() {
        let rows = fm_table(5, 14).unwrap();
        assert_eq!(rows.len(), 10);
        for r in &rows {
            assert!(r.matches_published(), "m={} f={} product={}", r.m, r.f, r.product);
        }
        assert!(fm_table(4, 14).is_err());
    }

    #[test]
    fn dominance_small_m() {
        for m in 2..=4u32 {
            let p = params_for_e(m).unwrap();
            let start = loglog_threshold(m, 128).unwrap().to_f64().ceil();
            for step in 0..6 {
                let ll = b(start + step as f64 * 3.0);
                let implied = implied_omega(&p, &ll.exp()).unwrap();
                let bound = omega_upper(m, &ll).unwrap();
                assert!(implied.certainly_le(&bound), "m={m} ll={}", ll.to_f64());
            }
        }
    }

    #[test]
    fn sparse_examples() {
        let s = sparse_bound(1, 11, &b(70.0)).unwrap();
        assert_eq!(s.rho, "2");
        let ll = b(15.0);
        let s = sparse_bound(1, 4, &ll).unwrap();
        assert_eq!(s.rho, "12.88");
        let expect = 1.0 + 6.0 * 12.88 * 4f64.ln() / 15.0;
        assert!((s.exponent.to_f64() - expect).abs() < 1e-12);
        assert!(sparse_bound(1, 3, &ll).is_err());
        assert!(sparse_bound(4, 4, &ll).is_err());
        assert!(sparse_bound(1, 4, &b(5.0)).is_err());
    }

    #[test]
    fn power_examples() {
        assert_eq!(power_measure(2, 2, &b(15.0)).unwrap().rho, "12.88");
        let s = power_measure(6, 2, &b(80.0)).unwrap();
        assert_eq!((s.m2, s.rho), (12, "2"));
        let s = power_measure(2, 1, &b(5.0)).unwrap();
        let expect = 1.0 + 6.0 * 12.88 * 2f64.ln() / 5.0;
        assert!((s.exponent.to_f64() - expect).abs() < 1e-12);
        assert!(power_measure(1, 3, &b(50.0)).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]
        #[test]
        fn z_brackets_random(y in 2.8182f64..1e6) {
            let yb = b(y);
            let it = z_iterates(&yb, 4).unwrap();
            let z = z_inverse(&yb, 1e-12).unwrap();
            prop_assert!(it[1].certainly_lt(&it[3]) || y < 3.0);
            prop_assert!(z.lo() >= it[1].lo() && z.hi() <= it[2].hi());
            prop_assert!(z.width() <= 1e-12);
        }

        #[test]
        fn z_monotone(y in 3.0f64..1e5, dy in 1e-3f64..10.0) {
            let a = z_inverse(&b(y), 1e-15).unwrap();
            let c = z_inverse(&b(y + dy), 1e-15).unwrap();
            prop_assert!(a.certainly_lt(&c));
        }
    }
}
