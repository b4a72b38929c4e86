//! Elementary functions on [`BigFloat`], accurate to a few ulp at the context
//! precision (each is evaluated with guard bits and rounded once at the end).

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::bigfloat::BigFloat;
use super::PrecisionContext;

fn wide(ctx: PrecisionContext, guard: u32) -> PrecisionContext {
    PrecisionContext::new(ctx.bits() + guard)
}

fn round(x: BigFloat, ctx: PrecisionContext) -> BigFloat {
    x.add(&BigFloat::zero(ctx), ctx)
}

/// pi via Machin's formula in fixed point: 16 atan(1/5) - 4 atan(1/239).
pub fn pi(ctx: PrecisionContext) -> BigFloat {
    let w = ctx.bits() as u64 + 32;
    let a5 = atan_inv_fixed(5u32, w);
    let a239 = atan_inv_fixed(239u32, w);
    let scaled = (a5 << 4u32) - (a239 << 2u32);
    // scaled ~ pi * 2^w
    BigFloat::from_biguint_exp(1, scaled, -(w as i64), ctx)
}

fn atan_inv_fixed(n: u32, frac_bits: u64) -> BigUint {
    // atan(1/n) * 2^frac_bits by the alternating Gregory series
    let n = BigUint::from(n);
    let n2 = &n * &n;
    let mut term = (BigUint::one() << frac_bits) / &n;
    let mut sum = term.clone();
    let mut k = 1u64;
    let mut subtract = true;
    while !term.is_zero() {
        term /= &n2;
        if term.is_zero() {
            break;
        }
        let t = &term / BigUint::from(2 * k + 1);
        if subtract {
            sum -= &t;
        } else {
            sum += &t;
        }
        subtract = !subtract;
        k += 1;
    }
    sum
}

/// exp(x) by scaling-and-squaring plus the Taylor series on the reduced argument.
pub fn exp(x: &BigFloat, ctx: PrecisionContext) -> BigFloat {
    if x.is_zero() {
        return BigFloat::from_u64(1, ctx);
    }
    // reduce so |r| <= 1/4: r = x / 2^m
    let msb = x.msb_exponent().unwrap();
    let m = (msb + 2).max(0) as u32;
    let w = wide(ctx, 32 + m);
    let r = x.mul(&BigFloat::exp2(-(m as i64), w), w);
    let mut term = BigFloat::from_u64(1, w);
    let mut sum = term.clone();
    let limit = -(w.bits() as i64 + 8);
    let mut k = 1u32;
    loop {
        term = term.mul(&r, w).div_u32(k, w);
        if term.is_zero() || term.msb_exponent().unwrap() < limit {
            break;
        }
        sum = sum.add(&term, w);
        k += 1;
    }
    let mut y = sum;
    for _ in 0..m {
        y = y.mul(&y, w);
    }
    round(y, ctx)
}

/// Natural log; argument must be positive.
pub fn ln(x: &BigFloat, ctx: PrecisionContext) -> BigFloat {
    assert!(!x.is_zero() && !x.is_negative(), "ln requires a positive argument");
    let w = wide(ctx, 32);
    // x = m * 2^k with m in [1, 2)
    let k = x.msb_exponent().unwrap() - 1;
    let m = x.mul(&BigFloat::exp2(-k, w), w);
    // ln m = 2 atanh((m-1)/(m+1)), argument in [0, 1/3)
    let one = BigFloat::from_u64(1, w);
    let y = m.sub(&one, w).div(&m.add(&one, w), w);
    let lm = atanh_series(&y, w).mul_i64(2, w);
    if k == 0 {
        return round(lm, ctx);
    }
    let l2 = ln2(w);
    round(lm.add(&l2.mul_i64(k, w), w), ctx)
}

fn ln2(ctx: PrecisionContext) -> BigFloat {
    // ln 2 = 2 atanh(1/3)
    let third = BigFloat::from_u64(1, ctx).div_u32(3, ctx);
    atanh_series(&third, ctx).mul_i64(2, ctx)
}

/// atanh by its Taylor series; caller guarantees |y| well inside (-1, 1) and
/// small enough for fast convergence (|y| <= 1/3 in practice).
fn atanh_series(y: &BigFloat, w: PrecisionContext) -> BigFloat {
    if y.is_zero() {
        return BigFloat::zero(w);
    }
    let y2 = y.mul(y, w);
    let mut pow = y.clone();
    let mut sum = y.clone();
    let limit = -(w.bits() as i64 + 8) + y.msb_exponent().unwrap();
    let mut k = 1u32;
    loop {
        pow = pow.mul(&y2, w);
        let term = pow.div_u32(2 * k + 1, w);
        if term.is_zero() || term.msb_exponent().unwrap() < limit {
            break;
        }
        sum = sum.add(&term, w);
        k += 1;
    }
    sum
}

/// sinh: direct odd series for |x| < 1, exponential form otherwise.
pub fn sinh(x: &BigFloat, ctx: PrecisionContext) -> BigFloat {
    if x.is_zero() {
        return BigFloat::zero(ctx);
    }
    let w = wide(ctx, 32);
    if x.msb_exponent().unwrap() <= 0 {
        let x2 = x.mul(x, w);
        let mut term = x.clone();
        let mut sum = x.clone();
        let limit = x.msb_exponent().unwrap() - (w.bits() as i64 + 8);
        let mut k = 1u32;
        loop {
            term = term.mul(&x2, w).div_u32(2 * k, w).div_u32(2 * k + 1, w);
            if term.is_zero() || term.msb_exponent().unwrap() < limit {
                break;
            }
            sum = sum.add(&term, w);
            k += 1;
        }
        round(sum, ctx)
    } else {
        let e = exp(x, w);
        let inv = BigFloat::from_u64(1, w).div(&e, w);
        round(e.sub(&inv, w).mul(&BigFloat::exp2(-1, w), w), ctx)
    }
}

pub fn cosh(x: &BigFloat, ctx: PrecisionContext) -> BigFloat {
    let w = wide(ctx, 32);
    if x.is_zero() {
        return BigFloat::from_u64(1, ctx);
    }
    if x.msb_exponent().unwrap() <= 0 {
        let x2 = x.mul(x, w);
        let mut term = BigFloat::from_u64(1, w);
        let mut sum = term.clone();
        let limit = -(w.bits() as i64 + 8);
        let mut k = 1u32;
        loop {
            term = term.mul(&x2, w).div_u32(2 * k - 1, w).div_u32(2 * k, w);
            if term.is_zero() || term.msb_exponent().unwrap() < limit {
                break;
            }
            sum = sum.add(&term, w);
            k += 1;
        }
        round(sum, ctx)
    } else {
        let e = exp(x, w);
        let inv = BigFloat::from_u64(1, w).div(&e, w);
        round(e.add(&inv, w).mul(&BigFloat::exp2(-1, w), w), ctx)
    }
}

pub fn tanh(x: &BigFloat, ctx: PrecisionContext) -> BigFloat {
    if x.is_zero() {
        return BigFloat::zero(ctx);
    }
    let w = wide(ctx, 32);
    if x.is_negative() {
        return tanh(&x.neg(), ctx).neg();
    }
    if x.msb_exponent().unwrap() <= -1 {
        // t = s / sqrt(1 + s^2), no cancellation for small x
        let s = sinh(x, w);
        let one = BigFloat::from_u64(1, w);
        let den = one.add(&s.mul(&s, w), w).sqrt(w);
        round(s.div(&den, w), ctx)
    } else {
        // (e^{2x} - 1)/(e^{2x} + 1), e^{2x} >= e so no cancellation
        let e2 = exp(&x.mul_i64(2, w), w);
        let one = BigFloat::from_u64(1, w);
        round(e2.sub(&one, w).div(&e2.add(&one, w), w), ctx)
    }
}

/// Inverse hyperbolic tangent for |x| < 1.
pub fn atanh(x: &BigFloat, ctx: PrecisionContext) -> BigFloat {
    if x.is_zero() {
        return BigFloat::zero(ctx);
    }
    if x.is_negative() {
        return atanh(&x.neg(), ctx).neg();
    }
    let w = wide(ctx, 32);
    if x.msb_exponent().unwrap() <= -2 {
        round(atanh_series(x, w), ctx)
    } else {
        let one = BigFloat::from_u64(1, w);
        let q = one.add(x, w).div(&one.sub(x, w), w);
        round(ln(&q, w).mul(&BigFloat::exp2(-1, w), w), ctx)
    }
}

/// Inverse hyperbolic sine.
pub fn asinh(x: &BigFloat, ctx: PrecisionContext) -> BigFloat {
    if x.is_zero() {
        return BigFloat::zero(ctx);
    }
    if x.is_negative() {
        return asinh(&x.neg(), ctx).neg();
    }
    let w = wide(ctx, 32);
    if x.msb_exponent().unwrap() <= -2 {
        // sum (-1)^k (2k-1)!!/(2k)!! x^{2k+1}/(2k+1), |x| < 1/4
        let x2 = x.mul(x, w);
        let mut term = x.clone();
        let mut sum = x.clone();
        let limit = x.msb_exponent().unwrap() - (w.bits() as i64 + 8);
        let mut k = 0u32;
        loop {
            // t_{k+1} = -t_k * x^2 * (2k+1)^2 / ((2k+2)(2k+3)) without the 1/(2k+1) part;
            // carry the full term including the /(2k+1) factor explicitly
            term = term
                .mul(&x2, w)
                .mul_i64(-((2 * k + 1) as i64), w)
                .mul_i64((2 * k + 1) as i64, w)
                .div_u32(2 * k + 2, w)
                .div_u32(2 * k + 3, w);
            if term.is_zero() || term.msb_exponent().unwrap() < limit {
                break;
            }
            sum = sum.add(&term, w);
            k += 1;
        }
        round(sum, ctx)
    } else {
        let one = BigFloat::from_u64(1, w);
        let r = x.mul(x, w).add(&one, w).sqrt(w);
        round(ln(&x.add(&r, w), w), ctx)
    }
}

/// cos with range reduction modulo 2 pi.
pub fn cos(x: &BigFloat, ctx: PrecisionContext) -> BigFloat {
    let mag_bits = x.msb_exponent().unwrap_or(0).max(0) as u32;
    let w = wide(ctx, 48 + mag_bits);
    let two_pi = pi(w).mul_i64(2, w);
    let k = x.div(&two_pi, w).round_to_i64();
    let r = x.sub(&two_pi.mul_i64(k, w), w);
    // |r| <= pi + ulp; the series loses at most ~5 bits to cancellation
    let r2 = r.mul(&r, w);
    let mut term = BigFloat::from_u64(1, w);
    let mut sum = term.clone();
    let limit = -(w.bits() as i64 + 8);
    let mut j = 1u32;
    loop {
        term = term.mul(&r2, w).div_u32(2 * j - 1, w).div_u32(2 * j, w).neg();
        if term.is_zero() || term.msb_exponent().unwrap() < limit {
            break;
        }
        sum = sum.add(&term, w);
        j += 1;
    }
    round(sum, ctx)
}

/// Nonnegative integer power by binary exponentiation.
pub fn powi(x: &BigFloat, mut n: u64, ctx: PrecisionContext) -> BigFloat {
    let w = wide(ctx, 32);
    let mut base = x.add(&BigFloat::zero(w), w);
    let mut acc = BigFloat::from_u64(1, w);
    while n > 0 {
        if n & 1 == 1 {
            acc = acc.mul(&base, w);
        }
        base = base.mul(&base, w);
        n >>= 1;
    }
    round(acc, ctx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(bits: u32) -> PrecisionContext {
        PrecisionContext::new(bits)
    }

    fn assert_close(x: &BigFloat, v: f64, tol: f64) {
        let got = x.to_f64();
        assert!(
            (got - v).abs() <= tol * v.abs().max(1e-300),
            "got {got}, want {v}"
        );
    }

    #[test]
    fn pi_first_digits() {
        let p = pi(c(128));
        assert_close(&p, std::f64::consts::PI, 1e-15);
    }

    #[test]
    fn elementary_functions_match_f64() {
        let ctx = c(96);
        for &v in &[0.001, 0.1, 0.3, 0.9, 1.7, 3.0, 10.0] {
            let x = BigFloat::from_f64(v, ctx);
            assert_close(&exp(&x, ctx), v.exp(), 1e-14);
            assert_close(&ln(&x, ctx), v.ln(), 1e-14);
            assert_close(&sinh(&x, ctx), v.sinh(), 1e-14);
            assert_close(&cosh(&x, ctx), v.cosh(), 1e-14);
            assert_close(&tanh(&x, ctx), v.tanh(), 1e-14);
            assert_close(&asinh(&x, ctx), v.asinh(), 1e-14);
            assert_close(&cos(&x, ctx), v.cos(), 1e-13);
            let xn = x.neg();
            assert_close(&tanh(&xn, ctx), (-v).tanh(), 1e-14);
            if v < 1.0 {
                assert_close(&atanh(&x, ctx), v.atanh(), 1e-14);
            }
        }
    }

    #[test]
    fn exp_ln_round_trip_high_precision() {
        let ctx = c(256);
        let x = BigFloat::from_f64(0.7320508075688772, ctx);
        let y = ln(&exp(&x, ctx), ctx);
        let diff = y.sub(&x, ctx).abs();
        assert!(diff.msb_exponent().map_or(true, |e| e < -250));
    }

    #[test]
    fn cos_large_argument_reduction() {
        let ctx = c(128);
        let x = BigFloat::from_f64(1234.5678, ctx);
        assert_close(&cos(&x, ctx), 1234.5678f64.cos(), 1e-12);
    }

    #[test]
    fn powi_matches() {
        let ctx = c(192);
        let p = pi(ctx);
        let p8 = powi(&p, 8, ctx);
        assert_close(&p8, std::f64::consts::PI.powi(8), 1e-14);
    }
}
