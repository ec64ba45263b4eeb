//! Certified real arithmetic.
//!
//! A [`BallReal`] is a closed interval `[lo, hi]` of MPFR floats. Every
//! operation rounds the lower end toward −∞ and the upper end toward +∞, so
//! the exact real result of the same expression on any inputs inside the
//! operand intervals is always contained in the output. Comparisons come in a
//! "certainly" flavour only: a `true` answer is a proof, a `false` answer may
//! just mean the enclosures are too wide.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rug::float::{Constant, Round};
use rug::ops::{AssignRound, Pow};
use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};

/// Working precision used when the caller has no better idea.
pub const DEFAULT_PREC: u32 = 128;

/// Hard ceiling for adaptive precision doubling.
pub const PREC_CAP: u32 = 16_384;

#[derive(Clone, Debug, PartialEq)]
pub struct BallReal {
    lo: Float,
    hi: Float,
}

fn down<T>(prec: u32, val: T) -> Float
where
    Float: AssignRound<T, Round = Round, Ordering = Ordering>,
{
    Float::with_val_round(prec, val, Round::Down).0
}

fn up<T>(prec: u32, val: T) -> Float
where
    Float: AssignRound<T, Round = Round, Ordering = Ordering>,
{
    Float::with_val_round(prec, val, Round::Up).0
}

impl BallReal {
    /// Builds a ball from explicit endpoints. Fails on NaN or `lo > hi`.
    pub fn from_bounds(lo: Float, hi: Float) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::pre("ball endpoints must satisfy lo <= hi"));
        }
        Ok(BallReal { lo, hi })
    }

    pub fn from_integer(v: &Integer, prec: u32) -> Self {
        BallReal {
            lo: Float::with_val_round(prec, v, Round::Down).0,
            hi: Float::with_val_round(prec, v, Round::Up).0,
        }
    }

    pub fn from_i64(v: i64, prec: u32) -> Self {
        Self::from_integer(&Integer::from(v), prec)
    }

    pub fn from_u64(v: u64, prec: u32) -> Self {
        Self::from_integer(&Integer::from(v), prec)
    }

    pub fn from_rational(v: &Rational, prec: u32) -> Self {
        BallReal {
            lo: Float::with_val_round(prec, v, Round::Down).0,
            hi: Float::with_val_round(prec, v, Round::Up).0,
        }
    }

    /// Parses a decimal literal such as `"0.0000525"` or `"1e-9"` into an
    /// enclosure of the exact decimal value.
    pub fn parse_decimal(s: &str, prec: u32) -> Result<Self> {
        let s = s.trim();
        let parsed = Float::parse(s).map_err(|e| Error::pre(format!("bad decimal {s:?}: {e}")))?;
        let lo = Float::with_val_round(prec, parsed, Round::Down).0;
        let parsed = Float::parse(s).map_err(|e| Error::pre(format!("bad decimal {s:?}: {e}")))?;
        let hi = Float::with_val_round(prec, parsed, Round::Up).0;
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::pre(format!("decimal {s:?} is not a finite number")));
        }
        Ok(BallReal { lo, hi })
    }

    /// Parses a literal that is known to be valid; for internal constants.
    pub(crate) fn lit(s: &str, prec: u32) -> Self {
        Self::parse_decimal(s, prec).expect("valid decimal literal")
    }

    /// Euler's number.
    pub fn e(prec: u32) -> Self {
        Self::from_u64(1, prec).exp()
    }

    pub fn ln2(prec: u32) -> Self {
        BallReal {
            lo: Float::with_val_round(prec, Constant::Log2, Round::Down).0,
            hi: Float::with_val_round(prec, Constant::Log2, Round::Up).0,
        }
    }

    pub fn lo(&self) -> &Float {
        &self.lo
    }

    pub fn hi(&self) -> &Float {
        &self.hi
    }

    pub fn prec(&self) -> u32 {
        self.lo.prec().max(self.hi.prec())
    }

    /// Midpoint rounded to nearest; not itself certified.
    pub fn midpoint(&self) -> Float {
        let p = self.prec() + 1;
        let mut m = Float::with_val(p, &self.lo + &self.hi);
        m /= 2;
        m
    }

    /// An upper bound on `max(mid - lo, hi - mid)`.
    pub fn radius(&self) -> Float {
        let mid = self.midpoint();
        let a = up(self.prec() + 2, &self.hi - &mid);
        let b = up(self.prec() + 2, &mid - &self.lo);
        if a > b {
            a
        } else {
            b
        }
    }

    /// Upper bound on `hi - lo`.
    pub fn width(&self) -> Float {
        up(self.prec(), &self.hi - &self.lo)
    }

    pub fn to_f64(&self) -> f64 {
        self.midpoint().to_f64()
    }

    /// Same interval, re-rounded outward to `prec` bits.
    pub fn with_prec(&self, prec: u32) -> Self {
        BallReal {
            lo: Float::with_val_round(prec, &self.lo, Round::Down).0,
            hi: Float::with_val_round(prec, &self.hi, Round::Up).0,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    // ---- comparisons -------------------------------------------------

    pub fn certainly_lt(&self, other: &BallReal) -> bool {
        self.hi < other.lo
    }

    pub fn certainly_le(&self, other: &BallReal) -> bool {
        self.hi <= other.lo
    }

    pub fn certainly_gt(&self, other: &BallReal) -> bool {
        other.certainly_lt(self)
    }

    pub fn certainly_ge(&self, other: &BallReal) -> bool {
        other.certainly_le(self)
    }

    pub fn certainly_positive(&self) -> bool {
        self.lo > 0
    }

    pub fn certainly_negative(&self) -> bool {
        self.hi < 0
    }

    pub fn contains_zero(&self) -> bool {
        self.lo <= 0 && self.hi >= 0
    }

    pub fn contains_f64(&self, x: f64) -> bool {
        self.lo <= x && self.hi >= x
    }

    pub fn contains_rational(&self, x: &Rational) -> bool {
        self.lo <= *x && self.hi >= *x
    }

    pub fn contains_integer(&self, x: &Integer) -> bool {
        self.lo <= *x && self.hi >= *x
    }

    /// Whether `other` lies entirely inside `self`.
    pub fn contains_ball(&self, other: &BallReal) -> bool {
        self.lo <= other.lo && self.hi >= other.hi
    }

    pub fn overlaps(&self, other: &BallReal) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// Smallest ball containing both.
    pub fn hull(&self, other: &BallReal) -> BallReal {
        let lo = if self.lo < other.lo { self.lo.clone() } else { other.lo.clone() };
        let hi = if self.hi > other.hi { self.hi.clone() } else { other.hi.clone() };
        BallReal { lo, hi }
    }

    // ---- elementary functions ---------------------------------------

    pub fn abs(&self) -> BallReal {
        if self.lo >= 0 {
            self.clone()
        } else if self.hi <= 0 {
            -self
        } else {
            let p = self.prec();
            let nlo = Float::with_val(p, -&self.lo);
            let hi = if nlo > self.hi { nlo } else { self.hi.clone() };
            BallReal { lo: Float::with_val(p, 0), hi }
        }
    }

    pub fn max(&self, other: &BallReal) -> BallReal {
        let lo = if self.lo > other.lo { self.lo.clone() } else { other.lo.clone() };
        let hi = if self.hi > other.hi { self.hi.clone() } else { other.hi.clone() };
        BallReal { lo, hi }
    }

    pub fn min(&self, other: &BallReal) -> BallReal {
        let lo = if self.lo < other.lo { self.lo.clone() } else { other.lo.clone() };
        let hi = if self.hi < other.hi { self.hi.clone() } else { other.hi.clone() };
        BallReal { lo, hi }
    }

    pub fn exp(&self) -> BallReal {
        let p = self.prec();
        let mut lo = Float::with_val(p, &self.lo);
        lo.exp_round(Round::Down);
        let mut hi = Float::with_val(p, &self.hi);
        hi.exp_round(Round::Up);
        BallReal { lo, hi }
    }

    /// Natural logarithm; `None` unless the ball is certainly positive.
    pub fn checked_ln(&self) -> Option<BallReal> {
        if !self.certainly_positive() {
            return None;
        }
        let p = self.prec();
        let mut lo = Float::with_val(p, &self.lo);
        lo.ln_round(Round::Down);
        let mut hi = Float::with_val(p, &self.hi);
        hi.ln_round(Round::Up);
        Some(BallReal { lo, hi })
    }

    /// Natural logarithm. Panics unless the ball is certainly positive; use
    /// [`checked_ln`](Self::checked_ln) on user-controlled values.
    pub fn ln(&self) -> BallReal {
        self.checked_ln().expect("logarithm of a ball that is not certainly positive")
    }

    pub fn checked_div(&self, other: &BallReal) -> Option<BallReal> {
        if other.contains_zero() {
            return None;
        }
        let p = self.prec().max(other.prec());
        let cands_lo = [
            down(p, &self.lo / &other.lo),
            down(p, &self.lo / &other.hi),
            down(p, &self.hi / &other.lo),
            down(p, &self.hi / &other.hi),
        ];
        let cands_hi = [
            up(p, &self.lo / &other.lo),
            up(p, &self.lo / &other.hi),
            up(p, &self.hi / &other.lo),
            up(p, &self.hi / &other.hi),
        ];
        Some(BallReal { lo: min_of(cands_lo), hi: max_of(cands_hi) })
    }

    pub fn recip(&self) -> BallReal {
        let one = BallReal::from_u64(1, self.prec());
        &one / self
    }

    pub fn sqr(&self) -> BallReal {
        self.powi(2)
    }

    pub fn powi(&self, n: u32) -> BallReal {
        let p = self.prec();
        if n == 0 {
            return BallReal::from_u64(1, p);
        }
        let pd = |x: &Float| down(p, x.pow(n));
        let pu = |x: &Float| up(p, x.pow(n));
        if self.lo >= 0 || n % 2 == 1 {
            // monotone increasing on the whole interval
            BallReal { lo: pd(&self.lo), hi: pu(&self.hi) }
        } else if self.hi <= 0 {
            BallReal { lo: pd(&self.hi), hi: pu(&self.lo) }
        } else {
            let m = self.abs();
            BallReal { lo: Float::with_val(p, 0), hi: pu(m.hi()) }
        }
    }

    pub fn mul_u64(&self, k: u64) -> BallReal {
        self * &BallReal::from_u64(k, self.prec())
    }

    pub fn div_u64(&self, k: u64) -> BallReal {
        self / &BallReal::from_u64(k, self.prec())
    }

    pub fn add_u64(&self, k: u64) -> BallReal {
        self + &BallReal::from_u64(k, self.prec())
    }

    pub fn sub_u64(&self, k: u64) -> BallReal {
        self - &BallReal::from_u64(k, self.prec())
    }

    /// Largest integer certainly `<=` every point of the ball.
    pub fn floor_lo(&self) -> Integer {
        self.lo.to_integer_round(Round::Down).map(|(i, _)| i).expect("finite ball")
    }

    /// Smallest integer certainly `>=` every point of the ball.
    pub fn ceil_hi(&self) -> Integer {
        self.hi.to_integer_round(Round::Up).map(|(i, _)| i).expect("finite ball")
    }

    /// Certified decimal rendering; see the `Display` impl.
    pub fn to_certified_string(&self) -> String {
        format!("{self}")
    }

    /// Lower end rendered to `digits` significant decimals, rounded down.
    pub fn lo_string(&self, digits: usize) -> String {
        render(&self.lo, digits, Round::Down)
    }

    /// Upper end rendered to `digits` significant decimals, rounded up.
    pub fn hi_string(&self, digits: usize) -> String {
        render(&self.hi, digits, Round::Up)
    }
}

fn min_of<const N: usize>(xs: [Float; N]) -> Float {
    xs.into_iter().reduce(|a, b| if b < a { b } else { a }).expect("non-empty")
}

fn max_of<const N: usize>(xs: [Float; N]) -> Float {
    xs.into_iter().reduce(|a, b| if b > a { b } else { a }).expect("non-empty")
}

impl<'a> Add<&'a BallReal> for &'a BallReal {
    type Output = BallReal;
    fn add(self, rhs: &BallReal) -> BallReal {
        let p = self.prec().max(rhs.prec());
        BallReal { lo: down(p, &self.lo + &rhs.lo), hi: up(p, &self.hi + &rhs.hi) }
    }
}

impl<'a> Sub<&'a BallReal> for &'a BallReal {
    type Output = BallReal;
    fn sub(self, rhs: &BallReal) -> BallReal {
        let p = self.prec().max(rhs.prec());
        BallReal { lo: down(p, &self.lo - &rhs.hi), hi: up(p, &self.hi - &rhs.lo) }
    }
}

impl<'a> Mul<&'a BallReal> for &'a BallReal {
    type Output = BallReal;
    fn mul(self, rhs: &BallReal) -> BallReal {
        let p = self.prec().max(rhs.prec());
        let lo = min_of([
            down(p, &self.lo * &rhs.lo),
            down(p, &self.lo * &rhs.hi),
            down(p, &self.hi * &rhs.lo),
            down(p, &self.hi * &rhs.hi),
        ]);
        let hi = max_of([
            up(p, &self.lo * &rhs.lo),
            up(p, &self.lo * &rhs.hi),
            up(p, &self.hi * &rhs.lo),
            up(p, &self.hi * &rhs.hi),
        ]);
        BallReal { lo, hi }
    }
}

impl<'a> std::ops::Div<&'a BallReal> for &'a BallReal {
    type Output = BallReal;
    fn div(self, rhs: &BallReal) -> BallReal {
        self.checked_div(rhs).expect("division by a ball containing zero")
    }
}

impl Neg for &BallReal {
    type Output = BallReal;
    fn neg(self) -> BallReal {
        BallReal { lo: Float::with_val(self.hi.prec(), -&self.hi), hi: Float::with_val(self.lo.prec(), -&self.lo) }
    }
}

impl Neg for BallReal {
    type Output = BallReal;
    fn neg(self) -> BallReal {
        -&self
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<BallReal> for BallReal {
            type Output = BallReal;
            fn $m(self, rhs: BallReal) -> BallReal {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a BallReal> for BallReal {
            type Output = BallReal;
            fn $m(self, rhs: &BallReal) -> BallReal {
                (&self).$m(rhs)
            }
        }
        impl<'a> $tr<BallReal> for &'a BallReal {
            type Output = BallReal;
            fn $m(self, rhs: BallReal) -> BallReal {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

use std::ops::Div;

/// Decimal string of `x` with `digits` significant digits, rounded in the
/// given direction.
fn render(x: &Float, digits: usize, round: Round) -> String {
    let (neg, s, exp) = x.to_sign_string_exp_round(10, Some(digits.max(1)), round);
    match exp {
        None => format!("{}{}", if neg { "-" } else { "" }, s),
        Some(e) => format_digits(neg, &s, e),
    }
}

/// `0.DIGITS × 10^exp` laid out as a plain decimal when the exponent is
/// moderate, otherwise in `d.ddde±N` form.
fn format_digits(neg: bool, digits: &str, exp: i32) -> String {
    let digits = digits.trim_end_matches('0');
    let digits = if digits.is_empty() { "0" } else { digits };
    let sign = if neg { "-" } else { "" };
    let n = digits.len() as i32;
    if (-4..=21).contains(&exp) {
        if exp <= 0 {
            format!("{sign}0.{}{}", "0".repeat((-exp) as usize), digits)
        } else if exp >= n {
            format!("{sign}{}{}", digits, "0".repeat((exp - n) as usize))
        } else {
            let (a, b) = digits.split_at(exp as usize);
            format!("{sign}{a}.{b}")
        }
    } else {
        let (a, b) = digits.split_at(1);
        let e = exp - 1;
        if b.is_empty() {
            format!("{sign}{a}e{e}")
        } else {
            format!("{sign}{a}.{b}e{e}")
        }
    }
}

fn decimal_exponent(x: &Float) -> Option<i32> {
    let (_, _, e) = x.to_sign_string_exp(10, Some(1));
    e
}

impl fmt::Display for BallReal {
    /// Prints the midpoint to the number of significant digits supported by
    /// the radius, followed by `±` and an upper bound on the distance from the
    /// printed value to every point of the ball. Exact balls print without `±`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lo.is_infinite() || self.hi.is_infinite() {
            return write!(f, "[{}, {}]", self.lo, self.hi);
        }
        let mid = self.midpoint();
        let rad = self.radius();
        let digits = match (decimal_exponent(&mid), decimal_exponent(&rad)) {
            (None, _) => 1,
            (Some(_), None) => 30,
            (Some(em), Some(er)) => (em - er + 1).clamp(1, 30) as usize,
        };
        let printed = if mid.is_zero() { "0".to_string() } else { render(&mid, digits, Round::Nearest) };
        // distance from the printed value to the farthest end of the ball
        let p = self.prec() + 64;
        let pv = Float::with_val(p, Float::parse(&printed).expect("rendered decimal parses"));
        let d1 = up(p, &self.hi - &pv);
        let d2 = up(p, &pv - &self.lo);
        let r = if d1 > d2 { d1 } else { d2 };
        if r.is_zero() {
            write!(f, "{printed}")
        } else {
            let (_, s, e) = r.to_sign_string_exp_round(10, Some(2), Round::Up);
            let e = e.unwrap_or(1);
            let (a, b) = s.split_at(1);
            write!(f, "{printed}±{a}.{b}e{}", e - 1)
        }
    }
}

impl PartialOrd for BallReal {
    /// Only answers when the balls are disjoint (or both the same point).
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        if self.is_exact() && other.is_exact() && self.lo == other.lo {
            Some(Ordering::Equal)
        } else if self.certainly_lt(other) {
            Some(Ordering::Less)
        } else if self.certainly_gt(other) {
            Some(Ordering::Greater)
        } else {
            None
        }
    }
}
