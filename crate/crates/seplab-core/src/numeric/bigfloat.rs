//! Arbitrary-precision binary floating point with explicit precision contexts.
//!
//! Values are `sign * mant * 2^exp` with the mantissa normalized to exactly
//! `prec` bits (top bit set). Add/sub/mul/div/sqrt are correctly rounded
//! (round to nearest, ties to even) at the precision of the supplied context.

use num_bigint::BigUint;
use num_integer::Roots;
use num_traits::{One, ToPrimitive, Zero};
use std::cmp::Ordering;

use super::PrecisionContext;

#[derive(Clone, Debug)]
pub struct BigFloat {
    sign: i8,
    mant: BigUint,
    exp: i64,
    prec: u32,
}

impl BigFloat {
    pub fn zero(ctx: PrecisionContext) -> Self {
        BigFloat { sign: 0, mant: BigUint::zero(), exp: 0, prec: ctx.bits() }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn is_negative(&self) -> bool {
        self.sign < 0
    }

    pub fn precision_bits(&self) -> u32 {
        self.prec
    }

    pub(crate) fn sign_mant_exp(&self) -> (i8, &BigUint, i64) {
        (self.sign, &self.mant, self.exp)
    }

    /// Exponent of the most significant bit: value magnitude is in [2^(k-1), 2^k).
    pub fn msb_exponent(&self) -> Option<i64> {
        if self.sign == 0 {
            None
        } else {
            Some(self.exp + self.mant.bits() as i64)
        }
    }

    /// Exponent of one unit in the last place of this value.
    pub fn ulp_exponent(&self) -> Option<i64> {
        if self.sign == 0 {
            None
        } else {
            Some(self.exp)
        }
    }

    /// 2^k, exact.
    pub fn exp2(k: i64, ctx: PrecisionContext) -> Self {
        normalize(1, BigUint::one(), k, ctx.bits(), false)
    }

    /// `sign * mant * 2^exp`, rounded to the context.
    pub(crate) fn from_biguint_exp(sign: i8, mant: BigUint, exp: i64, ctx: PrecisionContext) -> Self {
        if mant.is_zero() {
            return Self::zero(ctx);
        }
        normalize(sign, mant, exp, ctx.bits(), false)
    }

    pub fn from_u64(v: u64, ctx: PrecisionContext) -> Self {
        normalize(if v == 0 { 0 } else { 1 }, BigUint::from(v), 0, ctx.bits(), false)
    }

    pub fn from_i64(v: i64, ctx: PrecisionContext) -> Self {
        let sign = match v.cmp(&0) {
            Ordering::Less => -1,
            Ordering::Equal => 0,
            Ordering::Greater => 1,
        };
        normalize(sign, BigUint::from(v.unsigned_abs()), 0, ctx.bits(), false)
    }

    pub fn from_f64(v: f64, ctx: PrecisionContext) -> Self {
        assert!(v.is_finite(), "BigFloat::from_f64 requires a finite value");
        if v == 0.0 {
            return Self::zero(ctx);
        }
        let bits = v.to_bits();
        let sign = if bits >> 63 == 1 { -1 } else { 1 };
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, exp) = if biased == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), biased - 1075)
        };
        normalize(sign, BigUint::from(mant), exp, ctx.bits(), false)
    }

    pub fn to_f64(&self) -> f64 {
        if self.sign == 0 {
            return 0.0;
        }
        let nb = self.mant.bits();
        let (top, shift) = if nb > 64 {
            let s = nb - 64;
            ((&self.mant >> s).to_u64().unwrap(), s as i64)
        } else {
            (self.mant.to_u64().unwrap(), 0)
        };
        let mut v = top as f64;
        let mut e = self.exp + shift;
        // apply the exponent in safe chunks
        while e > 512 {
            v *= f64::powi(2.0, 512);
            e -= 512;
        }
        while e < -512 {
            v *= f64::powi(2.0, -512);
            e += 512;
        }
        v *= f64::powi(2.0, e as i32);
        self.sign as f64 * v
    }

    pub fn neg(&self) -> Self {
        let mut r = self.clone();
        r.sign = -r.sign;
        r
    }

    pub fn abs(&self) -> Self {
        let mut r = self.clone();
        r.sign = r.sign.abs();
        r
    }

    pub fn add(&self, other: &Self, ctx: PrecisionContext) -> Self {
        match (self.sign, other.sign) {
            (0, _) => round_to(other, ctx),
            (_, 0) => round_to(self, ctx),
            (sa, sb) if sa == sb => {
                let (m, e) = mag_add(&self.mant, self.exp, &other.mant, other.exp, ctx.bits());
                normalize(sa, m, e, ctx.bits(), false)
            }
            (sa, _) => {
                match mag_cmp(&self.mant, self.exp, &other.mant, other.exp) {
                    Ordering::Equal => Self::zero(ctx),
                    Ordering::Greater => {
                        let (m, e) =
                            mag_sub(&self.mant, self.exp, &other.mant, other.exp, ctx.bits());
                        normalize(sa, m, e, ctx.bits(), false)
                    }
                    Ordering::Less => {
                        let (m, e) =
                            mag_sub(&other.mant, other.exp, &self.mant, self.exp, ctx.bits());
                        normalize(-sa, m, e, ctx.bits(), false)
                    }
                }
            }
        }
    }

    pub fn sub(&self, other: &Self, ctx: PrecisionContext) -> Self {
        self.add(&other.neg(), ctx)
    }

    pub fn mul(&self, other: &Self, ctx: PrecisionContext) -> Self {
        if self.sign == 0 || other.sign == 0 {
            return Self::zero(ctx);
        }
        normalize(
            self.sign * other.sign,
            &self.mant * &other.mant,
            self.exp + other.exp,
            ctx.bits(),
            false,
        )
    }

    pub fn div(&self, other: &Self, ctx: PrecisionContext) -> Self {
        assert!(other.sign != 0, "BigFloat division by zero");
        if self.sign == 0 {
            return Self::zero(ctx);
        }
        let extra = ctx.bits() as u64 + 4 + other.mant.bits();
        let num = &self.mant << extra;
        let (q, r) = num_integer::Integer::div_rem(&num, &other.mant);
        normalize(
            self.sign * other.sign,
            q,
            self.exp - other.exp - extra as i64,
            ctx.bits(),
            !r.is_zero(),
        )
    }

    pub fn mul_i64(&self, k: i64, ctx: PrecisionContext) -> Self {
        self.mul(&Self::from_i64(k, ctx), ctx)
    }

    pub fn div_u32(&self, k: u32, ctx: PrecisionContext) -> Self {
        assert!(k != 0);
        if self.sign == 0 {
            return Self::zero(ctx);
        }
        let extra = ctx.bits() as u64 + 36;
        let num = &self.mant << extra;
        let (q, r) = num_integer::Integer::div_rem(&num, &BigUint::from(k));
        normalize(self.sign, q, self.exp - extra as i64, ctx.bits(), !r.is_zero())
    }

    /// Square root; panics on negative input.
    pub fn sqrt(&self, ctx: PrecisionContext) -> Self {
        assert!(self.sign >= 0, "BigFloat::sqrt of a negative value");
        if self.sign == 0 {
            return Self::zero(ctx);
        }
        // scale so the integer sqrt has ~prec+4 result bits and the exponent is even
        let target = 2 * (ctx.bits() as i64 + 4);
        let mut shift = target - self.mant.bits() as i64;
        if shift < 0 {
            shift = 0;
        }
        if (self.exp - shift) & 1 != 0 {
            shift += 1;
        }
        let m = &self.mant << shift as u64;
        let s = m.sqrt();
        let sticky = &s * &s != m;
        normalize(1, s, (self.exp - shift) / 2, ctx.bits(), sticky)
    }

    /// Integer nearest to the value, for arguments that fit in i64.
    pub fn round_to_i64(&self) -> i64 {
        if self.sign == 0 {
            return 0;
        }
        let nb = self.mant.bits() as i64;
        let int_bits = nb + self.exp;
        assert!(int_bits <= 62, "round_to_i64 overflow");
        let mag = if self.exp >= 0 {
            (&self.mant << self.exp as u64).to_i64().unwrap()
        } else {
            let shift = (-self.exp) as u64;
            let q = (&self.mant >> shift).to_i64().unwrap();
            let rem_top = (&self.mant >> (shift - 1)).to_i64().unwrap() & 1;
            q + rem_top
        };
        self.sign as i64 * mag
    }

    pub fn cmp_value(&self, other: &Self) -> Ordering {
        match (self.sign, other.sign) {
            (0, 0) => Ordering::Equal,
            (a, b) if a != b => a.cmp(&b),
            (s, _) => {
                let mag = mag_cmp(&self.mant, self.exp, &other.mant, other.exp);
                if s > 0 {
                    mag
                } else {
                    mag.reverse()
                }
            }
        }
    }

    /// `self <= other + slack_ulps * ulp(other)`.
    pub fn le_with_ulp_slack(&self, other: &Self, slack_ulps: u32) -> bool {
        if self.cmp_value(other) != Ordering::Greater {
            return true;
        }
        let ulp_exp = match other.ulp_exponent() {
            Some(e) => e,
            None => self.msb_exponent().unwrap() - self.prec as i64,
        };
        let ctx = PrecisionContext::new(self.prec.max(other.prec) + 8);
        let slack = Self::exp2(ulp_exp, ctx).mul_i64(slack_ulps as i64, ctx);
        let bound = other.add(&slack, ctx);
        self.cmp_value(&bound) != Ordering::Greater
    }
}

impl PartialEq for BigFloat {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_value(other) == Ordering::Equal
    }
}

impl PartialOrd for BigFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp_value(other))
    }
}

fn round_to(x: &BigFloat, ctx: PrecisionContext) -> BigFloat {
    if x.sign == 0 {
        return BigFloat::zero(ctx);
    }
    normalize(x.sign, x.mant.clone(), x.exp, ctx.bits(), false)
}

/// Round `mant * 2^exp` to `prec` bits, nearest-even, with an extra sticky flag
/// describing discarded nonzero mass strictly below the given mantissa.
fn normalize(sign: i8, mant: BigUint, exp: i64, prec: u32, sticky: bool) -> BigFloat {
    if mant.is_zero() {
        // sticky mass alone cannot round up to a representable value here;
        // callers never produce (0, sticky=true)
        return BigFloat { sign: 0, mant, exp: 0, prec };
    }
    let nb = mant.bits();
    let prec = prec as u64;
    if nb <= prec {
        let shift = prec - nb;
        debug_assert!(!sticky || shift == 0, "sticky with short mantissa loses mass");
        return BigFloat { sign, mant: mant << shift, exp: exp - shift as i64, prec: prec as u32 };
    }
    let drop = nb - prec;
    let mut q: BigUint = &mant >> drop;
    let round_bit = mant.bit(drop - 1);
    let below = if drop >= 2 {
        sticky || {
            let mask = (BigUint::one() << (drop - 1)) - BigUint::one();
            !(&mant & mask).is_zero()
        }
    } else {
        sticky
    };
    if round_bit && (below || q.bit(0)) {
        q += 1u32;
        if q.bits() > prec {
            q >>= 1;
            return BigFloat {
                sign,
                mant: q,
                exp: exp + drop as i64 + 1,
                prec: prec as u32,
            };
        }
    }
    BigFloat { sign, mant: q, exp: exp + drop as i64, prec: prec as u32 }
}

fn mag_cmp(ma: &BigUint, ea: i64, mb: &BigUint, eb: i64) -> Ordering {
    let ka = ea + ma.bits() as i64;
    let kb = eb + mb.bits() as i64;
    if ka != kb {
        return ka.cmp(&kb);
    }
    // align least significant bits
    if ea >= eb {
        (ma << (ea - eb) as u64).cmp(mb)
    } else {
        ma.cmp(&(mb << (eb - ea) as u64))
    }
}

/// Exact-or-sticky aligned magnitude addition; result is (mant, exp).
fn mag_add(ma: &BigUint, ea: i64, mb: &BigUint, eb: i64, prec: u32) -> (BigUint, i64) {
    let (mh, eh, ml, el) = if ea >= eb { (ma, ea, mb, eb) } else { (mb, eb, ma, ea) };
    let shift = (eh - el) as u64;
    let cap = prec as u64 + mh.bits() + 4;
    if shift <= cap {
        ((mh << shift) + ml, el)
    } else {
        // the low operand only contributes sticky mass
        (((mh << (cap + 1)) + BigUint::one()), eh - (cap as i64 + 1))
    }
}

/// Aligned magnitude subtraction, caller guarantees |a| > |b|.
fn mag_sub(ma: &BigUint, ea: i64, mb: &BigUint, eb: i64, prec: u32) -> (BigUint, i64) {
    if ea >= eb {
        let shift = (ea - eb) as u64;
        let cap = prec as u64 + ma.bits() + 4;
        if shift <= cap {
            ((ma << shift) - mb, eb)
        } else {
            (((ma << (cap + 1)) - BigUint::one()), ea - (cap as i64 + 1))
        }
    } else {
        let shift = (eb - ea) as u64;
        // b has the higher exponent but smaller magnitude; the alignment shift
        // stays bounded because |a| > |b| forces ea + bits(a) >= eb + bits(b)
        (ma - (mb << shift), ea)
    }
}
