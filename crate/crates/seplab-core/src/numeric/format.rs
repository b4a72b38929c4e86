//! Deterministic string renderings of [`BigFloat`]: round-trip hex floats for
//! bit-exact columns and fixed-width scientific decimal for human columns.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::One;

use super::bigfloat::BigFloat;

/// C99-style hex float, e.g. `0x1.921fb54442d18p+1`. Exact: every mantissa bit
/// is printed, so equal strings mean equal values at equal precision.
pub fn to_hex_string(x: &BigFloat) -> String {
    let (sign, mant, exp) = x.sign_mant_exp();
    if sign == 0 {
        return "0x0p+0".to_string();
    }
    let nb = mant.bits();
    // leading bit + fractional bits padded to whole nibbles
    let frac_bits = nb - 1;
    let nibbles = frac_bits.div_ceil(4);
    let pad = nibbles * 4 - frac_bits;
    let mask = (BigUint::one() << frac_bits) - BigUint::one();
    let frac = (mant & mask) << pad;
    let mut hex = frac.to_str_radix(16);
    while (hex.len() as u64) < nibbles {
        hex.insert(0, '0');
    }
    let bin_exp = exp + frac_bits as i64;
    let s = if sign < 0 { "-" } else { "" };
    if nibbles == 0 {
        format!("{s}0x1p{bin_exp:+}")
    } else {
        format!("{s}0x1.{hex}p{bin_exp:+}")
    }
}

/// Scientific decimal with `digits` significant digits, e.g. `1.2641503310e0`.
/// Rounds to nearest; deterministic for a given (value, digits).
pub fn to_decimal_string(x: &BigFloat, digits: usize) -> String {
    assert!(digits >= 1);
    let (sign, mant, exp) = x.sign_mant_exp();
    if sign == 0 {
        return if digits == 1 {
            "0e0".to_string()
        } else {
            format!("0.{}e0", "0".repeat(digits - 1))
        };
    }
    // estimate the decimal exponent of the leading digit
    let bit_exp = exp + mant.bits() as i64 - 1; // |x| in [2^bit_exp, 2^(bit_exp+1))
    let mut e10 = (bit_exp as f64 * std::f64::consts::LOG10_2).floor() as i64;
    loop {
        // I = round(|x| * 10^(digits-1-e10)); want I in [10^(digits-1), 10^digits)
        let s = digits as i64 - 1 - e10;
        let i_val = scale_to_integer(mant, exp, s);
        let lo = pow10(digits as u32 - 1);
        let hi = &lo * 10u32;
        if i_val < lo {
            e10 -= 1;
            continue;
        }
        if i_val >= hi {
            e10 += 1;
            continue;
        }
        let ds = i_val.to_string();
        let neg = if sign < 0 { "-" } else { "" };
        return if digits == 1 {
            format!("{neg}{ds}e{e10}")
        } else {
            format!("{neg}{}.{}e{}", &ds[..1], &ds[1..], e10)
        };
    }
}

fn pow10(k: u32) -> BigUint {
    num_traits::pow::pow(BigUint::from(10u32), k as usize)
}

/// round(mant * 2^exp * 10^s) as an integer (round half up; the half case can
/// only occur when the value is exactly representable, where it is harmless).
fn scale_to_integer(mant: &BigUint, exp: i64, s: i64) -> BigUint {
    let mut num = mant.clone();
    let mut den = BigUint::one();
    if s >= 0 {
        num *= pow10(s as u32);
    } else {
        den *= pow10((-s) as u32);
    }
    if exp >= 0 {
        num <<= exp as u64;
    } else {
        den <<= (-exp) as u64;
    }
    // round(num/den) = floor((2 num + den) / (2 den))
    let (q, _r) = ((&num << 1u32) + &den).div_rem(&(&den << 1u32));
    q
}

/// Parse a plain decimal string (optional sign, optional fraction, optional
/// exponent like `1.5e-3`) into an exact rational.
pub fn rational_from_decimal_str(s: &str) -> Option<num_rational::BigRational> {
    use num_bigint::BigInt;
    let s = s.trim();
    let (mant_str, exp10) = match s.find(['e', 'E']) {
        Some(pos) => {
            let e: i64 = s[pos + 1..].parse().ok()?;
            (&s[..pos], e)
        }
        None => (s, 0i64),
    };
    let (sign, body) = match mant_str.strip_prefix('-') {
        Some(b) => (-1, b),
        None => (1, mant_str.strip_prefix('+').unwrap_or(mant_str)),
    };
    let (int_part, frac_part) = match body.find('.') {
        Some(pos) => (&body[..pos], &body[pos + 1..]),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let num: BigInt = digits.parse().ok()?;
    let shift = exp10 - frac_part.len() as i64;
    let (num, den) = if shift >= 0 {
        (num * BigInt::from(10u32).pow(shift as u32), BigInt::one())
    } else {
        (num, BigInt::from(10u32).pow((-shift) as u32))
    };
    Some(num_rational::BigRational::new(BigInt::from(sign) * num, den))
}
