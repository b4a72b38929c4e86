//! Exact rational arithmetic and configurable-precision floats.
//!
//! All floating computation is parametrized by an explicit [`PrecisionContext`];
//! there is no global rounding state. The exact side is [`Rational`]
//! (reduced arbitrary-precision fractions), the substrate of the series
//! pipeline; floats only enter where pi does.

pub mod bigfloat;
pub mod format;
pub mod functions;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub use bigfloat::BigFloat;

/// Exact signed rational; invariants (reduced form, positive denominator)
/// are maintained by the backing implementation.
pub type Rational = num_rational::BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NumericError {
    #[error("eps must be positive")]
    NonPositiveEps,
}

/// Mantissa width for float operations; at least 64 bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrecisionContext {
    bits: u32,
}

impl PrecisionContext {
    pub fn new(bits: u32) -> Self {
        assert!(bits >= 64, "PrecisionContext requires at least 64 bits");
        PrecisionContext { bits }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn with_guard(&self, extra: u32) -> Self {
        PrecisionContext { bits: self.bits + extra }
    }
}

/// pi correct to the context precision.
pub fn pi_const(ctx: PrecisionContext) -> BigFloat {
    functions::pi(ctx)
}

/// Exact rational -> float, correctly rounded (relative error <= 2^(1-bits)).
pub fn rational_to_bigfloat(q: &Rational, ctx: PrecisionContext) -> BigFloat {
    if q.is_zero() {
        return BigFloat::zero(ctx);
    }
    let sign = if q.is_negative() { -1 } else { 1 };
    let num = q.numer().magnitude();
    let den = q.denom().magnitude();
    let a = BigFloat::from_biguint_exp(sign, num.clone(), 0, ctx.with_guard(8));
    let b = BigFloat::from_biguint_exp(1, den.clone(), 0, ctx.with_guard(8));
    a.div(&b, ctx)
}

/// d = asinh(2 eps)/2, the coupling eps = sinh(2d)/2, polished with one Newton
/// step so that |sinh(2d)/2 - eps| stays within a few ulp.
pub fn d_from_eps(eps: &BigFloat, ctx: PrecisionContext) -> Result<BigFloat, NumericError> {
    if eps.is_zero() || eps.is_negative() {
        return Err(NumericError::NonPositiveEps);
    }
    let w = ctx.with_guard(32);
    let two_eps = eps.mul_i64(2, w);
    let mut d = functions::asinh(&two_eps, w).mul(&BigFloat::exp2(-1, w), w);
    // Newton correction on f(d) = sinh(2d)/2 - eps
    let two_d = d.mul_i64(2, w);
    let resid = functions::sinh(&two_d, w).mul(&BigFloat::exp2(-1, w), w).sub(eps, w);
    let deriv = functions::cosh(&two_d, w);
    d = d.sub(&resid.div(&deriv, w), w);
    Ok(d.add(&BigFloat::zero(ctx), ctx))
}

/// eps = sinh(2d)/2.
pub fn eps_from_d(d: &BigFloat, ctx: PrecisionContext) -> BigFloat {
    let w = ctx.with_guard(16);
    functions::sinh(&d.mul_i64(2, w), w)
        .mul(&BigFloat::exp2(-1, w), w)
        .add(&BigFloat::zero(ctx), ctx)
}

/// Taylor coefficients of eps = sinh(2d)/2 in d: index k holds 2^(k-1)/k! for
/// odd k, zero for even k; returned through d^order inclusive.
pub fn eps_series_coeffs(order: usize) -> Vec<Rational> {
    assert!(order >= 1);
    let mut coeffs = vec![Rational::zero(); order + 1];
    let mut fact = BigUint::one();
    for k in 1..=order {
        fact *= k as u32;
        if k % 2 == 1 {
            coeffs[k] = Rational::new(
                BigInt::from(BigUint::one() << (k - 1)),
                BigInt::from(fact.clone()),
            );
        }
    }
    coeffs
}

/// Default mantissa width for splitting work at a given eps:
/// max(192, ceil(1.5 * (pi^2/(2 eps)) / ln 2) + 64).
pub fn default_splitting_bits(eps: f64) -> u32 {
    assert!(eps > 0.0);
    let needed = (1.5 * (std::f64::consts::PI.powi(2) / (2.0 * eps)) / std::f64::consts::LN_2)
        .ceil() as u32
        + 64;
    needed.max(192)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(bits: u32) -> PrecisionContext {
        PrecisionContext::new(bits)
    }

    #[test]
    fn pi_known_64_bit_value() {
        // first 64 mantissa bits of pi, from the published hex expansion
        // pi = 0x3.243F6A8885A308D31319...
        let p = pi_const(ctx(64));
        assert_eq!(
            format::to_hex_string(&p),
            "0x1.921fb54442d1846ap+1"
        );
    }

    #[test]
    fn pi_cross_precision_agreement() {
        // ctx(128) and ctx(256) agree on the first 38 decimal digits
        let a = format::to_decimal_string(&pi_const(ctx(128)), 38);
        let b = format::to_decimal_string(&pi_const(ctx(256)), 38);
        assert_eq!(a, b);
        assert!(a.starts_with("3.141592653589793238462643383279502884"));
    }

    #[test]
    fn pi_squared_half_derived_value() {
        // pi^2/2 = 4.934802200544679309... (independent oracle value)
        let c = ctx(192);
        let p = pi_const(c);
        let v = p.mul(&p, c).mul(&BigFloat::exp2(-1, c), c);
        let s = format::to_decimal_string(&v, 19);
        assert_eq!(s, "4.934802200544679309e0");
    }

    #[test]
    fn d_from_eps_contract() {
        let c = ctx(192);
        for &e in &[0.5f64, 0.2, 0.05] {
            let eps = BigFloat::from_f64(e, c);
            let d = d_from_eps(&eps, c).unwrap();
            // residual |sinh(2d)/2 - eps| <= 4 ulp(eps)
            let resid = eps_from_d(&d, c).sub(&eps, c).abs();
            let ulp = BigFloat::exp2(eps.ulp_exponent().unwrap(), c);
            assert!(resid.le_with_ulp_slack(&ulp.mul_i64(4, c), 0), "residual too big at eps={e}");
            // round trip eps_from_d(d_from_eps(x)) = x to <= 8 ulp
            let rt = eps_from_d(&d, c);
            let diff = rt.sub(&eps, c).abs();
            assert!(diff.le_with_ulp_slack(&ulp.mul_i64(8, c), 0));
        }
    }

    #[test]
    fn d_from_eps_derived_value() {
        // eps = 0.05 -> d = asinh(0.1)/2; independent oracle: f64 asinh
        let c = ctx(128);
        let eps = rational_to_bigfloat(&rat(1, 20), c);
        let d = d_from_eps(&eps, c).unwrap();
        assert!((d.to_f64() - 0.1f64.asinh() / 2.0).abs() < 1e-16);
    }

    #[test]
    fn d_from_eps_rejects_nonpositive() {
        let c = ctx(64);
        assert_eq!(d_from_eps(&BigFloat::zero(c), c), Err(NumericError::NonPositiveEps));
        assert_eq!(
            d_from_eps(&BigFloat::from_i64(-1, c), c),
            Err(NumericError::NonPositiveEps)
        );
    }

    #[test]
    fn d_from_eps_strictly_increasing() {
        let c = ctx(96);
        let mut prev = BigFloat::zero(c);
        for k in 1..40 {
            let eps = rational_to_bigfloat(&rat(k, 40), c);
            let d = d_from_eps(&eps, c).unwrap();
            assert!(d > prev);
            prev = d;
        }
    }

    #[test]
    fn eps_series_known_coefficients() {
        let c = eps_series_coeffs(5);
        assert_eq!(c[0], Rational::zero());
        assert_eq!(c[1], rat_int(1));
        assert_eq!(c[2], Rational::zero());
        assert_eq!(c[3], rat(2, 3));
        assert_eq!(c[5], rat(2, 15));
    }

    #[test]
    fn eps_series_matches_sinh_oracle() {
        // sum c_k d^k vs sinh(2d)/2 at d = 1/8 through order 31; the series
        // tail is ~2^-189 so anything above 2^-150 is a real mismatch
        let c = ctx(160);
        let coeffs = eps_series_coeffs(31);
        let d = rational_to_bigfloat(&rat(1, 8), c);
        let mut acc = BigFloat::zero(c);
        for k in (0..=31).rev() {
            acc = acc.mul(&d, c).add(&rational_to_bigfloat(&coeffs[k], c), c);
        }
        let direct = eps_from_d(&d, c);
        let diff = acc.sub(&direct, c).abs();
        assert!(diff.msb_exponent().map_or(true, |e| e < -150));
    }

    #[test]
    fn rational_to_bigfloat_cross_precision() {
        // converting at p bits then p+64 bits differ by <= 2^(1-p)|x|
        let q = rat(22, 7);
        for &p in &[64u32, 128, 192] {
            let lo = rational_to_bigfloat(&q, ctx(p));
            let hi = rational_to_bigfloat(&q, ctx(p + 64));
            let diff = lo.sub(&hi, ctx(p + 96)).abs();
            let bound = hi.abs().mul(&BigFloat::exp2(1 - p as i64, ctx(p + 96)), ctx(p + 96));
            assert!(diff <= bound);
        }
    }

    #[test]
    fn default_bits_formula() {
        assert_eq!(default_splitting_bits(0.4), 192);
        assert!(default_splitting_bits(0.05) > 192);
    }
}
