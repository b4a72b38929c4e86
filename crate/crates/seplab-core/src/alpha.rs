//! The derived series U, Q, Q1, F = B - U, G = QF, E = C(G) built exactly
//! from a formal solution, extraction of the leading asymptotic coefficients
//! alpha_n / beta_n / gamma_n from the tau expansion of E, the resulting
//! splitting-constant estimate with its tail bound, and the hat (leading
//! monomial) view with its graded sup norm.

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::numeric::{
    eps_series_coeffs, pi_const, rat, rat_int, rational_to_bigfloat, BigFloat, PrecisionContext,
    Rational,
};
use crate::poly::{tau_basis, to_tau_with_basis, UPoly};
use crate::series::{op_c, DSeries, FormalSolution, SeriesError};

#[derive(Debug, Error)]
pub enum AlphaError {
    #[error("derived-series structure check failed: {0}")]
    StructureFailure(&'static str),
    #[error("alpha extraction needs series order >= 9, got {0}")]
    OrderTooLow(usize),
    #[error("alpha estimate needs odd cap N >= 15, got {0}")]
    InsufficientOrder(usize),
    #[error("hat norm of an empty coefficient list")]
    EmptyInput,
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// The six derived series, all exact to a common order.
pub struct DerivedSeries {
    pub u: DSeries,
    pub q: DSeries,
    pub q1: DSeries,
    pub f: DSeries,
    pub g: DSeries,
    pub e: DSeries,
}

fn upoly(cs: &[(i64, i64)]) -> UPoly {
    UPoly::from_coeffs(cs.iter().map(|&(n, d)| rat(n, d)).collect())
}

/// U = eps u + (u - u^3) d^3 + (10/3 u^5 - 16/3 u^3 + 2u) d^5.
pub fn u_series(order: usize) -> DSeries {
    let eps = eps_series_coeffs(order.max(1));
    let mut s = DSeries::zero(order);
    for n in (1..=order).step_by(2) {
        s.set_coeff(n, UPoly::u().scale(&eps[n]));
    }
    if order >= 3 {
        s.set_coeff(3, s.coeff(3).add(&upoly(&[(0, 1), (1, 1), (0, 1), (-1, 1)])));
    }
    if order >= 5 {
        s.set_coeff(
            5,
            s.coeff(5).add(&upoly(&[(0, 1), (2, 1), (0, 1), (-16, 3), (0, 1), (10, 3)])),
        );
    }
    s
}

/// Q = (1-u^2) d^2 + (u^4 - u^2) d^4 - (13/6 u^6 - 7/2 u^4 + 4/3 u^2) d^6
///     + (47/6 u^8 - 31/6 u^6 + 58/15 u^4 - 104/45 u^2 + 1) d^8.
pub fn q_series(order: usize) -> DSeries {
    let mut s = DSeries::zero(order);
    if order >= 2 {
        s.set_coeff(2, upoly(&[(1, 1), (0, 1), (-1, 1)]));
    }
    if order >= 4 {
        s.set_coeff(4, upoly(&[(0, 1), (0, 1), (-1, 1), (0, 1), (1, 1)]));
    }
    if order >= 6 {
        s.set_coeff(6, upoly(&[(0, 1), (0, 1), (-4, 3), (0, 1), (7, 2), (0, 1), (-13, 6)]));
    }
    if order >= 8 {
        s.set_coeff(
            8,
            upoly(&[(1, 1), (0, 1), (-104, 45), (0, 1), (58, 15), (0, 1), (-31, 6), (0, 1), (47, 6)]),
        );
    }
    s
}

/// Q1 = (1-u^2) d^2 + 3/2 (u^2 - u^4) d^4.
pub fn q1_series(order: usize) -> DSeries {
    let mut s = DSeries::zero(order);
    if order >= 2 {
        s.set_coeff(2, upoly(&[(1, 1), (0, 1), (-1, 1)]));
    }
    if order >= 4 {
        s.set_coeff(4, upoly(&[(0, 1), (0, 1), (3, 2), (0, 1), (-3, 2)]));
    }
    s
}

/// Builds U, Q, Q1, F = eps A - U, G = QF and E = C(G) exactly to order N,
/// running the structural checks on the way.
pub fn build_derived_series(sol: &FormalSolution, n: usize) -> Result<DerivedSeries, AlphaError> {
    assert!(sol.order() + 1 >= n, "solution order {} too small for series order {n}", sol.order());
    let eps = DSeries::from_scalar_coeffs(n, &eps_series_coeffs(n.max(1)));
    let a = sol.as_dseries(n);
    let b = eps.mul(&a);
    if !b.is_class_q() {
        return Err(AlphaError::StructureFailure("B = eps*A is not class Q"));
    }
    // B_n(+/-1) = 0 for n >= 3 where B_n excludes the eps*u part
    let eps_u = {
        let mut s = DSeries::from_scalar_coeffs(n, &eps_series_coeffs(n.max(1)));
        s = s.scale_poly(&UPoly::u());
        s
    };
    let b_tail = b.sub(&eps_u);
    let one = rat_int(1);
    for m in 3..=n {
        let p = b_tail.coeff(m);
        if !p.eval(&one).is_zero() || !p.eval(&-one.clone()).is_zero() {
            return Err(AlphaError::StructureFailure("B_n(+/-1) != 0"));
        }
    }

    let u = u_series(n);
    let f = b.sub(&u);
    // U absorbs the d^1..d^5 part of B: F starts at d^7
    match f.leading_order() {
        None => return Err(AlphaError::StructureFailure("F is identically zero")),
        Some(l) if l < 7 => return Err(AlphaError::StructureFailure("F has terms below d^7")),
        _ => {}
    }

    let q = q_series(n);
    let g = q.mul(&f);
    if g.leading_order().map_or(false, |l| l < 9) {
        return Err(AlphaError::StructureFailure("G has terms below d^9"));
    }

    let e = op_c(&g)?;
    // E is odd in d with odd polynomial coefficients
    for m in (0..=n).step_by(2) {
        if !e.coeff(m).is_zero() {
            return Err(AlphaError::StructureFailure("E has a nonzero even-order coefficient"));
        }
    }
    for m in (1..=n).step_by(2) {
        if !e.coeff(m).is_odd() {
            return Err(AlphaError::StructureFailure("an E_n is not an odd polynomial"));
        }
    }
    Ok(DerivedSeries { u, q, q1: q1_series(n), f, g, e })
}

/// One extraction row: the tau_n, tau_{n-2}, tau_{n-4} components of E_n.
/// `e_lead` is the exact tau_n coefficient; alpha_n = e_lead pi^{n-1}
/// (-1)^{(n-1)/2} / (n-1)!, and beta/gamma are the analogous conversions two
/// and four steps down.
#[derive(Clone, Debug)]
pub struct AlphaRow {
    pub n: usize,
    pub e_lead: Rational,
    pub alpha_n: BigFloat,
    /// beta_{n-2}
    pub beta_n: BigFloat,
    /// gamma_{n-4}
    pub gamma_n: BigFloat,
}

pub struct AlphaTable {
    pub rows: Vec<AlphaRow>,
    pub partial_sum: BigFloat,
    pub tail_bound: BigFloat,
    pub alpha_estimate: BigFloat,
    ctx: PrecisionContext,
}

impl AlphaTable {
    pub fn max_n(&self) -> usize {
        self.rows.last().map_or(0, |r| r.n)
    }

    pub fn context(&self) -> PrecisionContext {
        self.ctx
    }
}

/// tau-coefficient -> asymptotic coefficient: a = x (n-1)! (i/pi)^{n-1} with
/// odd n gives x = a pi^{n-1} (-1)^{(n-1)/2} / (n-1)!.
fn convert_component(
    tau_coeff: &Rational,
    n: usize,
    pi_pows: &[BigFloat],
    ctx: PrecisionContext,
) -> BigFloat {
    if tau_coeff.is_zero() {
        return BigFloat::zero(ctx);
    }
    debug_assert!(n % 2 == 1);
    let mut v = rational_to_bigfloat(tau_coeff, ctx).mul(&pi_pows[n - 1], ctx);
    for k in 1..n {
        v = v.div_u32(k as u32, ctx);
    }
    if ((n - 1) / 2) % 2 == 1 {
        v = v.neg();
    }
    v
}

/// Expand each odd E_n in the tau basis and read off alpha_n, beta_{n-2},
/// gamma_{n-4}; `e_lead` stays exact.
pub fn extract_alpha_coeffs(ds: &DerivedSeries, ctx: PrecisionContext) -> Result<AlphaTable, AlphaError> {
    let order = ds.e.order();
    if order < 9 {
        return Err(AlphaError::OrderTooLow(order));
    }
    let basis = tau_basis(order);
    let pi = pi_const(ctx.with_guard(16));
    let mut pi_pows = Vec::with_capacity(order + 1);
    pi_pows.push(BigFloat::from_u64(1, ctx.with_guard(16)));
    for k in 1..=order {
        let next = pi_pows[k - 1].mul(&pi, ctx.with_guard(16));
        pi_pows.push(next);
    }

    let mut rows = Vec::new();
    for n in (7..=order).step_by(2) {
        let en = ds.e.coeff(n);
        let expansion = to_tau_with_basis(en, &basis);
        let e_lead = expansion.coeff(n);
        let alpha_n = convert_component(&e_lead, n, &pi_pows, ctx);
        let beta_n = convert_component(&expansion.coeff(n - 2), n - 2, &pi_pows, ctx);
        let gamma_n = convert_component(&expansion.coeff(n - 4), n - 4, &pi_pows, ctx);
        rows.push(AlphaRow { n, e_lead, alpha_n, beta_n, gamma_n });
    }

    let cap = rows.last().map_or(0, |r| r.n);
    let (partial_sum, tail_bound, alpha_estimate) = summarize(&rows, cap, ctx)?;
    Ok(AlphaTable { rows, partial_sum, tail_bound, alpha_estimate, ctx })
}

/// The paper's tail bound 762333542 / (N(N-1)...(N-7)).
pub fn tail_bound(n_cap: usize, ctx: PrecisionContext) -> BigFloat {
    let mut denom = rat_int(1);
    for k in 0..8usize {
        denom = denom * rat_int((n_cap - k) as i64);
    }
    rational_to_bigfloat(&(rat_int(762333542) / denom), ctx)
}

fn summarize(
    rows: &[AlphaRow],
    n_cap: usize,
    ctx: PrecisionContext,
) -> Result<(BigFloat, BigFloat, BigFloat), AlphaError> {
    let w = ctx.with_guard(16);
    let mut sum = BigFloat::zero(w);
    for r in rows.iter().filter(|r| r.n <= n_cap) {
        sum = sum.add(&r.alpha_n, w);
    }
    let estimate = sum.div(&pi_const(w), w).add(&BigFloat::zero(ctx), ctx);
    let partial = sum.add(&BigFloat::zero(ctx), ctx);
    Ok((partial, tail_bound(n_cap, ctx), estimate))
}

/// (1/pi) sum of alpha_n for odd n in [7, n_cap], with the tail bound at n_cap.
pub fn alpha_estimate(
    table: &AlphaTable,
    n_cap: usize,
    ctx: PrecisionContext,
) -> Result<(BigFloat, BigFloat), AlphaError> {
    if n_cap < 15 {
        return Err(AlphaError::InsufficientOrder(n_cap));
    }
    let n_cap = n_cap.min(table.max_n());
    let (_, tail, estimate) = summarize(&table.rows, n_cap, ctx)?;
    Ok((estimate, tail))
}

/// Leading monomial coefficients of E: (n, coeff of u^n in E_n), exact.
pub fn hat_leading(ds: &DerivedSeries) -> Vec<(usize, Rational)> {
    let mut out = Vec::new();
    for n in 0..=ds.e.order() {
        out.push((n, ds.e.coeff(n).coeff(n)));
    }
    out
}

/// Hat of an arbitrary series (used by the multiplicativity tests).
pub fn hat_of_series(x: &DSeries) -> Vec<Rational> {
    (0..=x.order()).map(|n| x.coeff(n).coeff(n)).collect()
}

/// |x|_{m,p} = sup |x_n| / ((n-p)! pi^{-n}) over n >= m, n = m mod 2.
pub fn hat_norm(
    entries: &[(usize, BigFloat)],
    m: usize,
    p: i64,
    ctx: PrecisionContext,
) -> Result<BigFloat, AlphaError> {
    assert!((m as i64) > p && p >= -1, "hat norm requires m > p >= -1");
    if entries.is_empty() {
        return Err(AlphaError::EmptyInput);
    }
    let w = ctx.with_guard(16);
    let pi = pi_const(w);
    let mut sup = BigFloat::zero(w);
    for (n, v) in entries {
        if *n < m || (*n % 2) != (m % 2) || v.is_zero() {
            continue;
        }
        // weight = pi^n / (n-p)!
        let mut weight = BigFloat::from_u64(1, w);
        for _ in 0..*n {
            weight = weight.mul(&pi, w);
        }
        let fact_top = *n as i64 - p;
        let mut k = rat_int(1);
        for j in 1..=fact_top {
            k = k * rat_int(j);
        }
        weight = weight.div(&rational_to_bigfloat(&k, w), w);
        let val = v.abs().mul(&weight, w);
        if val > sup {
            sup = val;
        }
    }
    Ok(sup.add(&BigFloat::zero(ctx), ctx))
}

/// Exact-rational variant for entries that are exact (the E hat series).
pub fn hat_norm_exact(
    entries: &[(usize, Rational)],
    m: usize,
    p: i64,
    ctx: PrecisionContext,
) -> Result<BigFloat, AlphaError> {
    let conv: Vec<(usize, BigFloat)> = entries
        .iter()
        .map(|(n, q)| (*n, rational_to_bigfloat(q, ctx.with_guard(32))))
        .collect();
    hat_norm(&conv, m, p, ctx)
}
