//! Truncated power series in d with polynomial coefficients (the class Q),
//! the operator calculus f(dD), and the order-by-order construction of the
//! formal solution A(d,u) of
//!
//!     A(d, T+) - A(d, T-) = 2 eps (1 - A^2),   eps = sinh(2d)/2,
//!
//! together with exact residual verification.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::{
    d_from_eps, eps_series_coeffs, rat_int, rational_to_bigfloat, BigFloat, NumericError,
    PrecisionContext, Rational,
};
use crate::poly::{apply_d, tau_basis, PolyError, UPoly};

#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("operator coefficients cover order {have}, series needs {need}")]
    OrderMismatch { have: usize, need: usize },
    #[error("residual R_{order} is not divisible by (1-u^2)^2: {source}")]
    DivisibilityFailure { order: usize, source: PolyError },
    #[error("residual R_{order} is not an even polynomial")]
    ParityFailure { order: usize },
    #[error("residual R_{order} does not vanish at u = +/-1")]
    EndpointFailure { order: usize },
    #[error("evaluation truncation {want} exceeds solution order {have}")]
    TruncationTooLarge { want: usize, have: usize },
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

/// Truncated series sum_{n=0}^{order} coeff[n](u) d^n.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DSeries {
    order: usize,
    coeffs: Vec<UPoly>,
}

impl DSeries {
    pub fn zero(order: usize) -> Self {
        DSeries { order, coeffs: vec![UPoly::zero(); order + 1] }
    }

    pub fn from_coeffs(order: usize, mut coeffs: Vec<UPoly>) -> Self {
        coeffs.resize(order + 1, UPoly::zero());
        coeffs.truncate(order + 1);
        DSeries { order, coeffs }
    }

    /// A scalar-coefficient series, e.g. eps(d).
    pub fn from_scalar_coeffs(order: usize, scalars: &[Rational]) -> Self {
        let coeffs = (0..=order)
            .map(|n| {
                scalars
                    .get(n)
                    .map(|c| UPoly::constant(c.clone()))
                    .unwrap_or_else(UPoly::zero)
            })
            .collect();
        DSeries { order, coeffs }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeff(&self, n: usize) -> &UPoly {
        &self.coeffs[n]
    }

    pub fn coeffs(&self) -> &[UPoly] {
        &self.coeffs
    }

    pub fn set_coeff(&mut self, n: usize, p: UPoly) {
        self.coeffs[n] = p;
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|p| p.is_zero())
    }

    /// deg coeff[n] <= n for every n.
    pub fn is_class_q(&self) -> bool {
        self.coeffs
            .iter()
            .enumerate()
            .all(|(n, p)| p.degree().map_or(true, |d| d <= n))
    }

    pub fn truncated(&self, order: usize) -> Self {
        let order = order.min(self.order);
        DSeries { order, coeffs: self.coeffs[..=order].to_vec() }
    }

    /// Lowest n with a nonzero coefficient.
    pub fn leading_order(&self) -> Option<usize> {
        self.coeffs.iter().position(|p| !p.is_zero())
    }

    pub fn add(&self, other: &Self) -> Self {
        let order = self.order.min(other.order);
        let coeffs = (0..=order).map(|n| self.coeffs[n].add(&other.coeffs[n])).collect();
        DSeries { order, coeffs }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let order = self.order.min(other.order);
        let coeffs = (0..=order).map(|n| self.coeffs[n].sub(&other.coeffs[n])).collect();
        DSeries { order, coeffs }
    }

    pub fn neg(&self) -> Self {
        DSeries { order: self.order, coeffs: self.coeffs.iter().map(|p| p.neg()).collect() }
    }

    /// Product truncated at min(order_a, order_b).
    pub fn mul(&self, other: &Self) -> Self {
        let order = self.order.min(other.order);
        let mut coeffs = vec![UPoly::zero(); order + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(order + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(order + 1 - i) {
                if b.is_zero() {
                    continue;
                }
                coeffs[i + j] = coeffs[i + j].add(&a.mul(b));
            }
        }
        DSeries { order, coeffs }
    }

    pub fn scale_poly(&self, p: &UPoly) -> Self {
        DSeries { order: self.order, coeffs: self.coeffs.iter().map(|c| c.mul(p)).collect() }
    }

    pub fn scale(&self, s: &Rational) -> Self {
        DSeries { order: self.order, coeffs: self.coeffs.iter().map(|c| c.scale(s)).collect() }
    }

    /// Multiply by d^k, truncating at the same order.
    pub fn shift(&self, k: usize) -> Self {
        let mut coeffs = vec![UPoly::zero(); self.order + 1];
        for n in 0..=self.order.saturating_sub(k) {
            coeffs[n + k] = self.coeffs[n].clone();
        }
        DSeries { order: self.order, coeffs }
    }
}

/// T+(d,u) = (u + tanh d)/(1 + u tanh d) expanded in d: coefficient of d^n
/// is tau_{n+1}(u).
pub fn t_plus_series(order: usize) -> DSeries {
    let taus = tau_basis(order + 1);
    DSeries::from_coeffs(order, (0..=order).map(|n| taus[n + 1].clone()).collect())
}

/// The linear operator f(dD): coefficient of d^n of the image is
/// sum_{i=0}^n f_i D^i X_{n-i}.
pub fn apply_f_of_dd(f_coeffs: &[Rational], x: &DSeries) -> Result<DSeries, SeriesError> {
    if f_coeffs.len() < x.order() + 1 {
        return Err(SeriesError::OrderMismatch { have: f_coeffs.len(), need: x.order() + 1 });
    }
    let order = x.order();
    // iterated D of each coefficient, advanced lazily
    let mut table: Vec<(usize, UPoly)> = x.coeffs.iter().map(|p| (0, p.clone())).collect();
    let mut out = vec![UPoly::zero(); order + 1];
    for (n, slot) in out.iter_mut().enumerate() {
        let mut acc = UPoly::zero();
        for i in 0..=n {
            if f_coeffs[i].is_zero() {
                continue;
            }
            let k = n - i;
            while table[k].0 < i {
                table[k].1 = apply_d(&table[k].1);
                table[k].0 += 1;
            }
            if !table[k].1.is_zero() {
                acc = acc.add(&table[k].1.scale(&f_coeffs[i]));
            }
        }
        *slot = acc;
    }
    Ok(DSeries::from_coeffs(order, out))
}

/// Taylor coefficients through `order` of the named even/odd profiles.
pub fn cosh_coeffs(order: usize) -> Vec<Rational> {
    scaled_exp_like(order, false, 1)
}

pub fn sinh_coeffs(order: usize) -> Vec<Rational> {
    scaled_exp_like(order, true, 1)
}

pub fn cosh_half_coeffs(order: usize) -> Vec<Rational> {
    scaled_exp_like(order, false, 2)
}

pub fn sinh_half_coeffs(order: usize) -> Vec<Rational> {
    scaled_exp_like(order, true, 2)
}

pub fn exp_coeffs(order: usize) -> Vec<Rational> {
    let mut c = vec![Rational::zero(); order + 1];
    let mut term = Rational::one();
    c[0] = term.clone();
    for i in 1..=order {
        term = term / rat_int(i as i64);
        c[i] = term.clone();
    }
    c
}

fn scaled_exp_like(order: usize, odd: bool, denom_base: i64) -> Vec<Rational> {
    // coefficients of cosh(z/denom_base) (even) or sinh(z/denom_base) (odd)
    let mut c = vec![Rational::zero(); order + 1];
    let mut fact = Rational::one();
    let mut pow = Rational::one();
    let scale = rat_int(denom_base);
    for i in 0..=order {
        if i > 0 {
            fact = fact * rat_int(i as i64);
            pow = pow / &scale;
        }
        if (i % 2 == 1) == odd {
            c[i] = &pow / &fact;
        }
    }
    c
}

/// Exact reciprocal of cosh(z/2): 1/cosh(z/2) = g with g * cosh(z/2) = 1.
pub fn inv_cosh_half_coeffs(order: usize) -> Vec<Rational> {
    let ch = cosh_half_coeffs(order);
    let mut g = vec![Rational::zero(); order + 1];
    g[0] = Rational::one();
    for n in 1..=order {
        // ch[0] = 1: g[n] = -(sum_{j<n} g[j] ch[n-j])
        let mut acc = Rational::zero();
        for j in 0..n {
            if !g[j].is_zero() && !ch[n - j].is_zero() {
                acc += &g[j] * &ch[n - j];
            }
        }
        g[n] = -acc;
    }
    g
}

pub fn op_c(x: &DSeries) -> Result<DSeries, SeriesError> {
    apply_f_of_dd(&cosh_half_coeffs(x.order()), x)
}

pub fn op_s(x: &DSeries) -> Result<DSeries, SeriesError> {
    apply_f_of_dd(&sinh_half_coeffs(x.order()), x)
}

pub fn op_c2(x: &DSeries) -> Result<DSeries, SeriesError> {
    apply_f_of_dd(&cosh_coeffs(x.order()), x)
}

pub fn op_s2(x: &DSeries) -> Result<DSeries, SeriesError> {
    apply_f_of_dd(&sinh_coeffs(x.order()), x)
}

pub fn op_c_inverse(x: &DSeries) -> Result<DSeries, SeriesError> {
    apply_f_of_dd(&inv_cosh_half_coeffs(x.order()), x)
}

/// The formal solution A(d,u) = u + sum_{k>=1} A_{2k+1}(u) d^{2k}; `polys[k]`
/// is A_{2k+1}, an odd polynomial vanishing at u = +/-1 for k >= 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormalSolution {
    order: usize,
    polys: Vec<UPoly>,
}

impl FormalSolution {
    /// Truncation order N (even): coefficients through d^N are exact.
    pub fn order(&self) -> usize {
        self.order
    }

    /// A_{2k+1} for k = 0..=order/2.
    pub fn polys(&self) -> &[UPoly] {
        &self.polys
    }

    pub fn poly(&self, k: usize) -> &UPoly {
        &self.polys[k]
    }

    /// The solution as a DSeries of the given order (zero odd coefficients).
    pub fn as_dseries(&self, order: usize) -> DSeries {
        let mut s = DSeries::zero(order);
        for (k, p) in self.polys.iter().enumerate() {
            if 2 * k <= order {
                s.set_coeff(2 * k, p.clone());
            }
        }
        s
    }
}

/// Constructs A_1, ..., A_{N+1} by the induction of the formal-solution
/// theorem: at each even n the residual
///
///   R_{n+3}(u) d^{n+3} = Z(d,T+) - Z(d,T-) - 2 eps(d) (1 - Z^2) + O(d^{n+4})
///
/// is formed exactly, checked to be even with double roots at +/-1, divided
/// by (1-u^2)^2, integrated from 0 and multiplied by -(1-u^2).
pub fn compute_formal_solution(n: usize) -> Result<FormalSolution, SeriesError> {
    assert!(n % 2 == 0, "formal solution order must be even");
    let cap = n + 1; // residual orders reach d^{n+1}
    let eps = eps_series_coeffs(cap.max(1) + 2);
    let sinh_c = sinh_coeffs(cap + 2);

    let mut polys = vec![UPoly::u()];
    // z[k] = coefficient of d^k of the partial solution (even k only)
    let mut z: Vec<UPoly> = vec![UPoly::zero(); cap + 1];
    z[0] = UPoly::u();
    // z2[k] = coefficient of d^k of Z^2, maintained incrementally
    let mut z2: Vec<UPoly> = vec![UPoly::zero(); cap + 1];
    z2[0] = z[0].mul(&z[0]);
    // iterated D of each solution coefficient: (power applied, D^power A)
    let mut iterd: Vec<(usize, UPoly)> = vec![(0, z[0].clone())];

    let mut top = 0usize;
    while top + 2 <= n {
        let m = top + 3;
        // d^m coefficient of S2(Z) = sinh(dD) Z
        let mut s2m = UPoly::zero();
        for (idx, entry) in iterd.iter_mut().enumerate() {
            let k = 2 * idx;
            let i = m - k;
            if i % 2 == 0 {
                continue;
            }
            while entry.0 < i {
                entry.1 = apply_d(&entry.1);
                entry.0 += 1;
            }
            if !entry.1.is_zero() {
                s2m = s2m.add(&entry.1.scale(&sinh_c[i]));
            }
        }
        // d^m coefficient of eps (1 - Z^2)
        let mut rhs = UPoly::constant(eps[m].clone());
        for j in (1..=m).step_by(2) {
            let idx = m - j;
            if !z2[idx].is_zero() && !eps[j].is_zero() {
                rhs = rhs.sub(&z2[idx].scale(&eps[j]));
            }
        }
        let r = s2m.sub(&rhs).scale(&rat_int(2));

        // the residual must be even with double roots at u = +/-1
        if !r.is_even() {
            return Err(SeriesError::ParityFailure { order: m });
        }
        let one = rat_int(1);
        if !r.eval(&one).is_zero()
            || !r.eval(&-one.clone()).is_zero()
            || !r.derivative().eval(&one).is_zero()
            || !r.derivative().eval(&(-one)).is_zero()
        {
            return Err(SeriesError::EndpointFailure { order: m });
        }
        let quotient = r
            .div_one_minus_u()
            .and_then(|p| p.div_one_minus_u())
            .and_then(|p| p.div_one_plus_u())
            .and_then(|p| p.div_one_plus_u())
            .map_err(|source| SeriesError::DivisibilityFailure { order: m, source })?;
        // A_{m} = -(1-u^2) * integral_0^u quotient/2
        let a_new = quotient.scale(&crate::numeric::rat(1, 2)).integral().mul_one_minus_u2().neg();

        let knew = top + 2;
        z[knew] = a_new.clone();
        for j in (0..=top).step_by(2) {
            let ord = knew + j;
            if ord <= cap {
                z2[ord] = z2[ord].add(&a_new.mul(&z[j]).scale(&rat_int(2)));
            }
        }
        if 2 * knew <= cap {
            z2[2 * knew] = z2[2 * knew].add(&a_new.mul(&a_new));
        }
        iterd.push((0, a_new.clone()));
        polys.push(a_new);
        top += 2;
    }
    Ok(FormalSolution { order: n, polys })
}

/// S2(A) - eps (1 - A^2) truncated at order N+1; identically zero for a
/// correct solution of order N.
pub fn residual_of_equation(sol: &FormalSolution) -> Result<DSeries, SeriesError> {
    let order = sol.order() + 1;
    let a = sol.as_dseries(order);
    let s2 = op_s2(&a)?;
    let eps = DSeries::from_scalar_coeffs(order, &eps_series_coeffs(order.max(1)));
    let one = {
        let mut s = DSeries::zero(order);
        s.set_coeff(0, UPoly::one());
        s
    };
    let rhs = eps.mul(&one.sub(&a.mul(&a)));
    Ok(s2.sub(&rhs))
}

/// y_eps(t) truncated: d = d_from_eps(eps), u = tanh(d t / eps),
/// sum_{2k <= truncation} A_{2k+1}(u) d^{2k}.
pub fn evaluate_a(
    sol: &FormalSolution,
    truncation: usize,
    eps: &BigFloat,
    t: &BigFloat,
    ctx: PrecisionContext,
) -> Result<BigFloat, SeriesError> {
    if truncation > sol.order() {
        return Err(SeriesError::TruncationTooLarge { want: truncation, have: sol.order() });
    }
    let w = ctx.with_guard(16);
    let d = d_from_eps(eps, w)?;
    let u = crate::numeric::functions::tanh(&d.mul(t, w).div(eps, w), w);
    let d2 = d.mul(&d, w);
    // Horner in d^2 over the A_{2k+1}(u)
    let kmax = truncation / 2;
    let mut acc = BigFloat::zero(w);
    for k in (0..=kmax).rev() {
        acc = acc.mul(&d2, w);
        acc = acc.add(&sol.poly(k).eval_bigfloat(&u, w), w);
    }
    Ok(acc.add(&BigFloat::zero(ctx), ctx))
}

/// Gevrey-1 diagnostic on B = eps * A: values ||B_n||_n * pi^n / n! for odd n.
pub fn gevrey_diagnostic(
    sol: &FormalSolution,
    ctx: PrecisionContext,
) -> Result<Vec<(usize, BigFloat)>, PolyError> {
    let order = sol.order() + 1;
    let eps = DSeries::from_scalar_coeffs(order, &eps_series_coeffs(order));
    let b = eps.mul(&sol.as_dseries(order));
    let pi = crate::numeric::pi_const(ctx);
    let mut out = Vec::new();
    let mut pi_pow = BigFloat::from_u64(1, ctx);
    let mut fact = BigFloat::from_u64(1, ctx);
    for nn in 1..=order {
        pi_pow = pi_pow.mul(&pi, ctx);
        fact = fact.mul_i64(nn as i64, ctx);
        if nn % 2 == 1 {
            let norm = crate::poly::norm_n(b.coeff(nn), nn, ctx)?;
            out.push((nn, norm.mul(&pi_pow, ctx).div(&fact, ctx)));
        }
    }
    Ok(out)
}

/// JSON document for a formal solution: exact "num/den" strings.
#[derive(Serialize, Deserialize)]
pub struct FormalSolutionDoc {
    pub order: usize,
    pub polys: Vec<Vec<String>>,
}

impl From<&FormalSolution> for FormalSolutionDoc {
    fn from(sol: &FormalSolution) -> Self {
        FormalSolutionDoc {
            order: sol.order,
            polys: sol
                .polys
                .iter()
                .map(|p| p.coeffs().iter().map(|c| format!("{}/{}", c.numer(), c.denom())).collect())
                .collect(),
        }
    }
}

impl FormalSolutionDoc {
    pub fn to_solution(&self) -> Option<FormalSolution> {
        let mut polys = Vec::with_capacity(self.polys.len());
        for cs in &self.polys {
            let mut coeffs = Vec::with_capacity(cs.len());
            for s in cs {
                let (n, d) = s.split_once('/')?;
                coeffs.push(Rational::new(n.parse().ok()?, d.parse().ok()?));
            }
            polys.push(UPoly::from_coeffs(coeffs));
        }
        Some(FormalSolution { order: self.order, polys })
    }
}
