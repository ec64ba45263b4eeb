//! Type II Hermite–Padé approximants to `1, e^{α_1 t}, …, e^{α_m t}`.
//!
//! For a multi-index `l̄ = (l_0, …, l_m)` with `L = Σ l_j` the polynomial
//! `A_{l̄,0}(t) = Σ_{i} t^{L-i} i! σ_i`, where `σ_i` is the coefficient of `w^i`
//! in `Ω(w) = ∏ (α_j - w)^{l_j}`, satisfies
//! `e^{α_j t} A_{l̄,0}(t) - A_{l̄,j}(t) = O(t^{L+1})`. `A_{l̄,j}` is the same
//! construction with the nodes shifted by `-α_j`.

use rayon::prelude::*;
use rug::{Integer, Rational};

use crate::error::{Error, Result};
use crate::poly::{product, IntPolynomial};

/// Largest `(m+1)·l` accepted by [`build_system`].
pub const DEFAULT_ORDER_CAP: u64 = 12_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    entries: Vec<u32>,
    total: u64,
}

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::pre("multi-index must have at least one entry"));
        }
        if entries.iter().any(|&l| l == 0) {
            return Err(Error::pre("multi-index entries must be >= 1"));
        }
        let total = entries.iter().map(|&l| l as u64).sum();
        Ok(MultiIndex { entries, total })
    }

    /// `(l, …, l-1, …, l)` with the lowered entry at position `k`.
    pub fn for_row(m: usize, l: u32, k: usize) -> Result<Self> {
        if k > m {
            return Err(Error::pre(format!("row {k} out of range for m = {m}")));
        }
        let mut entries = vec![l; m + 1];
        entries[k] = l.checked_sub(1).ok_or_else(|| Error::pre("l must be >= 1"))?;
        Self::new(entries)
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn m(&self) -> usize {
        self.entries.len() - 1
    }

    /// `L`, the sum of the entries.
    pub fn total(&self) -> u64 {
        self.total
    }
}

fn check_nodes(lbar: &MultiIndex, nodes: &[i64]) -> Result<()> {
    if nodes.len() != lbar.entries.len() {
        return Err(Error::pre(format!(
            "{} nodes for a multi-index of length {}",
            nodes.len(),
            lbar.entries.len()
        )));
    }
    if nodes.iter().any(|&b| i32::try_from(b).is_err()) {
        return Err(Error::pre("nodes must fit in 32 bits"));
    }
    Ok(())
}

/// `Ω(w, β) = ∏_j (β_j - w)^{l_j}` as a polynomial in `w`.
pub fn omega_poly(lbar: &MultiIndex, beta: &[i64]) -> Result<IntPolynomial> {
    check_nodes(lbar, beta)?;
    let factors = lbar
        .entries
        .iter()
        .zip(beta)
        .map(|(&l, &b)| IntPolynomial::linear_power(b as i32, l))
        .collect();
    Ok(product(factors))
}

/// Coefficient of `w^i` in `Ω(w, β)`; requires `β_0 = 0`.
pub fn sigma(i: u64, lbar: &MultiIndex, beta: &[i64]) -> Result<Integer> {
    check_nodes(lbar, beta)?;
    if beta[0] != 0 {
        return Err(Error::pre("sigma requires beta_0 = 0"));
    }
    if i > lbar.total {
        return Err(Error::pre(format!("index {i} exceeds L = {}", lbar.total)));
    }
    Ok(omega_poly(lbar, beta)?.coeff(i as usize))
}

fn check_alpha(lbar: &MultiIndex, alpha: &[i64]) -> Result<()> {
    check_nodes(lbar, alpha)?;
    if alpha[0] != 0 {
        return Err(Error::pre("alpha_0 must be 0"));
    }
    let mut sorted = alpha.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::pre("alpha entries must be distinct"));
    }
    Ok(())
}

/// `Σ_i t^{L-i} (i!/scale!) σ_i` over the nodes shifted by `-α_j`.
///
/// `scale` must not exceed `l_j`, the lowest index with `σ_i ≠ 0`, so every
/// ratio of factorials is an integer.
fn build_scaled(lbar: &MultiIndex, alpha: &[i64], j: usize, scale: u64) -> Result<IntPolynomial> {
    let shift = alpha[j];
    let beta: Vec<i64> = alpha.iter().map(|a| a - shift).collect();
    check_nodes(lbar, &beta)?;
    let om = omega_poly(lbar, &beta)?;
    let big_l = lbar.total as usize;
    let lo = lbar.entries[j] as u64;
    debug_assert!(scale <= lo);
    let mut ratio = Integer::from(1);
    for i in scale + 1..lo {
        ratio *= i;
    }
    let mut coeffs = vec![Integer::new(); big_l + 1];
    for i in lo as usize..=big_l {
        if i as u64 > scale {
            ratio *= i as u64;
        }
        let s = om.coeff(i);
        if s != 0 {
            coeffs[big_l - i] = s * &ratio;
        }
    }
    Ok(IntPolynomial::new(coeffs))
}

/// `A_{l̄,0}(t, α)`; requires `α_0 = 0` and distinct nodes.
pub fn build_a0(lbar: &MultiIndex, alpha: &[i64]) -> Result<IntPolynomial> {
    check_alpha(lbar, alpha)?;
    build_scaled(lbar, alpha, 0, 0)
}

/// `A_{l̄,j}(t, α) = A_{l̄,0}(t, α - α_j)` with the zero node at position `j`.
pub fn build_aj(lbar: &MultiIndex, alpha: &[i64], j: usize) -> Result<IntPolynomial> {
    check_alpha(lbar, alpha)?;
    if j == 0 || j > lbar.m() {
        return Err(Error::pre(format!("j = {j} must be in 1..={}", lbar.m())));
    }
    build_scaled(lbar, alpha, j, 0)
}

/// Exact Taylor coefficients of a remainder, `t^0 … t^order`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RemainderSeries {
    coefficients: Vec<Rational>,
}

impl RemainderSeries {
    pub fn coefficients(&self) -> &[Rational] {
        &self.coefficients
    }

    pub fn truncation_order(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// Index of the first nonzero coefficient, if any.
    pub fn order_of_vanishing(&self) -> Option<usize> {
        self.coefficients.iter().position(|c| *c != 0)
    }
}

/// Coefficients of `s·e^{x t} p(t) + q(t)` up to `t^order`.
pub fn exp_series_combination(
    p: &IntPolynomial,
    x: i64,
    s: i32,
    q: &IntPolynomial,
    order: usize,
) -> Vec<Rational> {
    // x^n / n! for n = 0..=order
    let mut pows = Vec::with_capacity(order + 1);
    let mut cur = Rational::from(1);
    for n in 0..=order {
        if n > 0 {
            cur *= x;
            cur /= n as u64;
        }
        pows.push(cur.clone());
    }
    (0..order + 1)
        .into_par_iter()
        .with_min_len(16)
        .map(|big_n| {
            let mut acc = Rational::new();
            for h in 0..=big_n.min(p.len().saturating_sub(1)) {
                let c = &p.coeffs()[h];
                if *c != 0 {
                    acc += Rational::from(c * &pows[big_n - h]);
                }
            }
            if s < 0 {
                acc = -acc;
            }
            acc + q.coeff(big_n)
        })
        .collect()
}

/// Series of `e^{α_j t} A_{l̄,0}(t) - A_{l̄,j}(t)` through `t^order`.
///
/// Fails with a consistency error if any of the coefficients `0..=L` is
/// nonzero.
pub fn remainder_series(
    lbar: &MultiIndex,
    alpha: &[i64],
    j: usize,
    order: usize,
) -> Result<RemainderSeries> {
    let big_l = lbar.total as usize;
    if order < big_l + 1 {
        return Err(Error::pre(format!("order {order} must be at least L + 1 = {}", big_l + 1)));
    }
    let a0 = build_a0(lbar, alpha)?;
    let aj = build_aj(lbar, alpha, j)?;
    let coefficients = exp_series_combination(&a0, alpha[j], 1, &aj.neg(), order);
    if let Some(n) = coefficients[..=big_l].iter().position(|c| *c != 0) {
        return Err(Error::Consistency(format!(
            "remainder coefficient t^{n} is {} (expected vanishing through t^{big_l})",
            coefficients[n]
        )));
    }
    Ok(RemainderSeries { coefficients })
}

/// The normalized forms `B*_{k,j}` for one `(m, l)` with nodes `α_j = j`.
///
/// `B*_{k,0} = A*_{k,0}/(l-1)!` and `B*_{k,j} = -A*_{k,j}/(l-1)!` for `j ≥ 1`,
/// so that `B*_{k,0}(t) e^{jt} + B*_{k,j}(t) = O(t^{(m+1)l})`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApproxSystem {
    m: usize,
    l: u32,
    alpha: Vec<i64>,
    polys: Vec<Vec<IntPolynomial>>,
    content_factor: Integer,
}

impl ApproxSystem {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn alpha(&self) -> &[i64] {
        &self.alpha
    }

    /// `L = (m+1)l - 1`.
    pub fn big_l(&self) -> u64 {
        (self.m as u64 + 1) * self.l as u64 - 1
    }

    pub fn poly(&self, k: usize, j: usize) -> &IntPolynomial {
        &self.polys[k][j]
    }

    pub fn rows(&self) -> &[Vec<IntPolynomial>] {
        &self.polys
    }

    pub fn iter_polys(&self) -> impl Iterator<Item = &IntPolynomial> {
        self.polys.iter().flatten()
    }

    /// Product of everything divided out so far (1 for a fresh system).
    pub fn content_factor(&self) -> &Integer {
        &self.content_factor
    }

    pub fn multi_index(&self, k: usize) -> MultiIndex {
        MultiIndex::for_row(self.m, self.l, k).expect("l >= 2")
    }

    /// `L - l_j^{(k)}`.
    pub fn expected_degree(&self, k: usize, j: usize) -> u64 {
        self.big_l() - if j == k { self.l as u64 - 1 } else { self.l as u64 }
    }

    /// Divides every polynomial by `d` and records it in the content factor.
    pub(crate) fn divide_all(&mut self, d: &Integer) -> Result<()> {
        let divided: Result<Vec<Vec<IntPolynomial>>> = self
            .polys
            .par_iter()
            .map(|row| row.iter().map(|p| p.div_exact(d)).collect())
            .collect();
        self.polys = divided?;
        self.content_factor *= d;
        Ok(())
    }

    /// Series of `B*_{k,0}(t) e^{jt} + B*_{k,j}(t)` through `t^order`.
    pub fn remainder(&self, k: usize, j: usize, order: usize) -> Result<RemainderSeries> {
        if k > self.m || j == 0 || j > self.m {
            return Err(Error::pre(format!("(k, j) = ({k}, {j}) out of range")));
        }
        let coefficients =
            exp_series_combination(&self.polys[k][0], self.alpha[j], 1, &self.polys[k][j], order);
        Ok(RemainderSeries { coefficients })
    }
}

pub fn build_system(m: usize, l: u32) -> Result<ApproxSystem> {
    build_system_capped(m, l, DEFAULT_ORDER_CAP)
}

pub fn build_system_capped(m: usize, l: u32, cap: u64) -> Result<ApproxSystem> {
    if m < 1 {
        return Err(Error::pre("m must be >= 1"));
    }
    if l < 2 {
        return Err(Error::pre("l must be >= 2 so every entry of the multi-index is positive"));
    }
    let order = (m as u64 + 1) * l as u64;
    if order > cap {
        return Err(Error::ResourceLimit(format!("(m+1)l = {order} exceeds the cap {cap}")));
    }
    let alpha: Vec<i64> = (0..=m as i64).collect();
    let cells: Vec<(usize, usize)> = (0..=m).flat_map(|k| (0..=m).map(move |j| (k, j))).collect();
    let built: Result<Vec<IntPolynomial>> = cells
        .par_iter()
        .map(|&(k, j)| {
            let lbar = MultiIndex::for_row(m, l, k)?;
            let p = build_scaled(&lbar, &alpha, j, l as u64 - 1)?;
            Ok(if j == 0 { p } else { p.neg() })
        })
        .collect();
    let mut flat = built?.into_iter();
    let polys = (0..=m).map(|_| flat.by_ref().take(m + 1).collect()).collect();
    Ok(ApproxSystem { m, l, alpha, polys, content_factor: Integer::from(1) })
}

/// Largest `m` for which [`determinant_shape`] expands the determinant.
pub const DETERMINANT_MAX_M: usize = 5;

/// `det(B*_{k,j})`, checked to be a single monomial `c·t^{m(m+1)l}`.
///
/// Returns `(c, exponent)`. The determinant is taken over the normalized
/// forms; relative to the raw `A*_{k,j}` it differs by the nonzero factor
/// `±((l-1)!)^{m+1}`.
pub fn determinant_shape(m: usize, l: u32) -> Result<(Integer, u64)> {
    if m > DETERMINANT_MAX_M {
        return Err(Error::ResourceLimit(format!(
            "determinant expansion limited to m <= {DETERMINANT_MAX_M}"
        )));
    }
    let sys = build_system(m, l)?;
    let det = determinant(&sys.polys);
    let expected = (m as u64) * (m as u64 + 1) * l as u64;
    let nonzero: Vec<usize> =
        det.coeffs().iter().enumerate().filter(|(_, c)| **c != 0).map(|(i, _)| i).collect();
    match nonzero.as_slice() {
        [e] if *e as u64 == expected => Ok((det.coeff(*e), expected)),
        [] => Err(Error::Falsified(format!("determinant vanishes identically for m = {m}, l = {l}"))),
        _ => Err(Error::Falsified(format!(
            "determinant for m = {m}, l = {l} has terms at degrees {nonzero:?}, expected only {expected}"
        ))),
    }
}

/// Leibniz expansion of a square polynomial matrix.
pub fn determinant(rows: &[Vec<IntPolynomial>]) -> IntPolynomial {
    let n = rows.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut terms = Vec::new();
    permutations(&mut perm, 0, true, &mut |p, even| terms.push((p.to_vec(), even)));
    let parts: Vec<IntPolynomial> = terms
        .par_iter()
        .map(|(p, even)| {
            let prod = product((0..n).map(|i| rows[i][p[i]].clone()).collect());
            if *even {
                prod
            } else {
                prod.neg()
            }
        })
        .collect();
    parts.iter().fold(IntPolynomial::zero(), |acc, p| acc.add(p))
}

fn permutations(p: &mut Vec<usize>, start: usize, even: bool, f: &mut impl FnMut(&[usize], bool)) {
    if start == p.len() {
        f(p, even);
        return;
    }
    for i in start..p.len() {
        p.swap(start, i);
        permutations(p, start + 1, if i == start { even } else { !even }, f);
        p.swap(start, i);
    }
}
