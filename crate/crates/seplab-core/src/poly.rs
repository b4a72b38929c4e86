//! Polynomials in u over the rationals, the operator D = (1-u^2) d/du, the
//! tau basis generated by tau_{n+1} = (1/n) D tau_n, and the graded norms
//! built on that basis.

use num_traits::{Signed, Zero};
use std::fmt;
use thiserror::Error;

use crate::numeric::{rat, rat_int, rational_to_bigfloat, BigFloat, PrecisionContext, Rational};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolyError {
    #[error("polynomial degree {deg} exceeds the norm grade {grade}")]
    DegreeTooHigh { deg: usize, grade: usize },
    #[error("exact division by {divisor} left a nonzero remainder")]
    NotDivisible { divisor: &'static str },
}

/// Dense polynomial in u; `coeffs[k]` multiplies u^k, the top entry is
/// nonzero, and the zero polynomial is the empty list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UPoly {
    coeffs: Vec<Rational>,
}

impl UPoly {
    pub fn zero() -> Self {
        UPoly { coeffs: Vec::new() }
    }

    pub fn from_coeffs(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        UPoly { coeffs }
    }

    pub fn constant(c: Rational) -> Self {
        Self::from_coeffs(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(rat_int(1))
    }

    /// The monomial u.
    pub fn u() -> Self {
        Self::from_coeffs(vec![Rational::zero(), rat_int(1)])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn leading_coeff(&self) -> Option<&Rational> {
        self.coeffs.last()
    }

    /// All even-power coefficients vanish.
    pub fn is_odd(&self) -> bool {
        self.coeffs.iter().step_by(2).all(|c| c.is_zero())
    }

    /// All odd-power coefficients vanish.
    pub fn is_even(&self) -> bool {
        self.coeffs.iter().skip(1).step_by(2).all(|c| c.is_zero())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut r = vec![Rational::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            r[i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            r[i] += c;
        }
        Self::from_coeffs(r)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut r = vec![Rational::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            r[i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            r[i] -= c;
        }
        Self::from_coeffs(r)
    }

    pub fn neg(&self) -> Self {
        UPoly { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut r = vec![Rational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                r[i + j] += a * b;
            }
        }
        Self::from_coeffs(r)
    }

    pub fn scale(&self, s: &Rational) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        UPoly { coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_bigfloat(&self, x: &BigFloat, ctx: PrecisionContext) -> BigFloat {
        let mut acc = BigFloat::zero(ctx);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x, ctx).add(&rational_to_bigfloat(c, ctx), ctx);
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        let mut r = Vec::with_capacity(self.coeffs.len() - 1);
        for (k, c) in self.coeffs.iter().enumerate().skip(1) {
            r.push(c * rat_int(k as i64));
        }
        Self::from_coeffs(r)
    }

    /// Antiderivative with zero constant term.
    pub fn integral(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut r = vec![Rational::zero(); self.coeffs.len() + 1];
        for (k, c) in self.coeffs.iter().enumerate() {
            r[k + 1] = c / rat_int(k as i64 + 1);
        }
        Self::from_coeffs(r)
    }

    /// Exact division by (1 - u); errors if the remainder is nonzero.
    pub fn div_one_minus_u(&self) -> Result<Self, PolyError> {
        if self.is_zero() {
            return Ok(Self::zero());
        }
        // p_k = s_k - s_{k-1}  =>  s_k = p_k + s_{k-1}
        let n = self.coeffs.len() - 1;
        let mut s = vec![Rational::zero(); n];
        let mut prev = Rational::zero();
        for k in 0..n {
            let sk = &self.coeffs[k] + &prev;
            s[k] = sk.clone();
            prev = sk;
        }
        if self.coeffs[n] != -prev {
            return Err(PolyError::NotDivisible { divisor: "(1-u)" });
        }
        Ok(Self::from_coeffs(s))
    }

    /// Exact division by (1 + u); errors if the remainder is nonzero.
    pub fn div_one_plus_u(&self) -> Result<Self, PolyError> {
        if self.is_zero() {
            return Ok(Self::zero());
        }
        // p_k = s_k + s_{k-1}  =>  s_k = p_k - s_{k-1}
        let n = self.coeffs.len() - 1;
        let mut s = vec![Rational::zero(); n];
        let mut prev = Rational::zero();
        for k in 0..n {
            let sk = &self.coeffs[k] - &prev;
            s[k] = sk.clone();
            prev = sk;
        }
        if self.coeffs[n] != prev {
            return Err(PolyError::NotDivisible { divisor: "(1+u)" });
        }
        Ok(Self::from_coeffs(s))
    }

    /// Multiply by (1 - u^2) = tau_2.
    pub fn mul_one_minus_u2(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut r = vec![Rational::zero(); self.coeffs.len() + 2];
        for (i, c) in self.coeffs.iter().enumerate() {
            r[i] += c;
            r[i + 2] -= c;
        }
        Self::from_coeffs(r)
    }
}

impl fmt::Display for UPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let coeff_is_one = mag == rat_int(1);
            match (k, coeff_is_one) {
                (0, _) => write!(f, "{mag}")?,
                (_, true) => {}
                (_, false) => write!(f, "{mag}*")?,
            }
            match k {
                0 => {}
                1 => write!(f, "u")?,
                _ => write!(f, "u^{k}")?,
            }
        }
        Ok(())
    }
}

/// D = (1 - u^2) d/du. Maps odd polynomials to even and vice versa, raising
/// the degree by at most one.
pub fn apply_d(p: &UPoly) -> UPoly {
    p.derivative().mul_one_minus_u2()
}

/// [tau_0, ..., tau_n]: tau_0 = 1, tau_1 = u, tau_{k+1} = (1/k) D tau_k.
/// tau_k has exact degree k with leading coefficient (-1)^(k-1) for k >= 1.
pub fn tau_basis(n_max: usize) -> Vec<UPoly> {
    let mut basis = Vec::with_capacity(n_max + 1);
    basis.push(UPoly::one());
    if n_max == 0 {
        return basis;
    }
    basis.push(UPoly::u());
    for k in 1..n_max {
        let next = apply_d(&basis[k]).scale(&crate::numeric::rat(1, k as i64));
        basis.push(next);
    }
    basis
}

/// Coefficients of p in the tau basis: p = sum a_k tau_k.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TauExpansion {
    coeffs: Vec<Rational>,
}

impl TauExpansion {
    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Reconstruct the monomial form against a basis at least as long.
    pub fn to_monomial(&self, basis: &[UPoly]) -> UPoly {
        assert!(basis.len() >= self.coeffs.len());
        let mut acc = UPoly::zero();
        for (k, a) in self.coeffs.iter().enumerate() {
            if !a.is_zero() {
                acc = acc.add(&basis[k].scale(a));
            }
        }
        acc
    }
}

/// Expand p in the tau basis by exact triangular back-substitution (tau_k has
/// exact degree k, so the change of basis is upper triangular).
pub fn to_tau(p: &UPoly) -> TauExpansion {
    let deg = match p.degree() {
        None => return TauExpansion { coeffs: Vec::new() },
        Some(d) => d,
    };
    let basis = tau_basis(deg);
    to_tau_with_basis(p, &basis)
}

/// Same as [`to_tau`] with a caller-provided basis (len > deg p).
pub fn to_tau_with_basis(p: &UPoly, basis: &[UPoly]) -> TauExpansion {
    let deg = match p.degree() {
        None => return TauExpansion { coeffs: Vec::new() },
        Some(d) => d,
    };
    assert!(basis.len() > deg);
    let mut rem = p.clone();
    let mut coeffs = vec![Rational::zero(); deg + 1];
    for k in (0..=deg).rev() {
        if let Some(d) = rem.degree() {
            if d == k {
                let lead = rem.leading_coeff().unwrap().clone();
                let tau_lead = basis[k].leading_coeff().unwrap();
                let a = &lead / tau_lead;
                rem = rem.sub(&basis[k].scale(&a));
                coeffs[k] = a;
            }
        } else {
            break;
        }
    }
    debug_assert!(rem.is_zero());
    TauExpansion { coeffs }
}

/// The graded norm of Def. "sum |a_i| (pi/2)^(n-i)" over the tau expansion;
/// requires deg p <= n. Absolute values make it a genuine norm.
pub fn norm_n(p: &UPoly, n: usize, ctx: PrecisionContext) -> Result<BigFloat, PolyError> {
    if let Some(d) = p.degree() {
        if d > n {
            return Err(PolyError::DegreeTooHigh { deg: d, grade: n });
        }
    }
    if p.is_zero() {
        return Ok(BigFloat::zero(ctx));
    }
    let w = ctx.with_guard(16);
    let half_pi = crate::numeric::pi_const(w).mul(&BigFloat::exp2(-1, w), w);
    let exp = to_tau(p);
    let mut acc = BigFloat::zero(w);
    // Horner in x = pi/2 for sum_i |a_i| x^(n-i): feed a_0 (highest power) first
    for i in 0..=n {
        acc = acc.mul(&half_pi, w);
        let a = exp.coeff(i);
        if !a.is_zero() {
            acc = acc.add(&rational_to_bigfloat(&a.abs(), w), w);
        }
    }
    Ok(acc.add(&BigFloat::zero(ctx), ctx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{format, rat_int};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn upoly(cs: &[(i64, i64)]) -> UPoly {
        UPoly::from_coeffs(cs.iter().map(|&(n, d)| rat(n, d)).collect())
    }

    fn random_poly(rng: &mut ChaCha8Rng, deg: usize) -> UPoly {
        let mut cs = Vec::with_capacity(deg + 1);
        for _ in 0..=deg {
            cs.push(rat(rng.random_range(-9..=9), rng.random_range(1..=9)));
        }
        UPoly::from_coeffs(cs)
    }

    #[test]
    fn tau_low_orders() {
        let t = tau_basis(3);
        assert_eq!(t[0], UPoly::one());
        assert_eq!(t[1], UPoly::u());
        // tau_2 = D(u) = 1 - u^2
        assert_eq!(t[2], upoly(&[(1, 1), (0, 1), (-1, 1)]));
        // tau_3 = (1/2) D(1-u^2) = u^3 - u
        assert_eq!(t[3], upoly(&[(0, 1), (-1, 1), (0, 1), (1, 1)]));
    }

    #[test]
    fn tau_exact_degree_and_leading_coeff() {
        let t = tau_basis(40);
        for (k, tk) in t.iter().enumerate().skip(1) {
            assert_eq!(tk.degree(), Some(k));
            let want = if (k - 1) % 2 == 0 { rat_int(1) } else { rat_int(-1) };
            assert_eq!(*tk.leading_coeff().unwrap(), want, "leading coeff of tau_{k}");
        }
    }

    #[test]
    fn apply_d_cases() {
        assert!(apply_d(&UPoly::one()).is_zero());
        assert_eq!(apply_d(&UPoly::u()), upoly(&[(1, 1), (0, 1), (-1, 1)]));
        // p = u^3 - u -> (1-u^2)(3u^2-1) = -3u^4 + 4u^2 - 1
        let p = upoly(&[(0, 1), (-1, 1), (0, 1), (1, 1)]);
        let dp = apply_d(&p);
        assert_eq!(dp, upoly(&[(-1, 1), (0, 1), (4, 1), (0, 1), (-3, 1)]));
        // cross check by evaluation at u in {0, 1/2, 2}
        for x in [rat_int(0), rat(1, 2), rat_int(2)] {
            let lhs = dp.eval(&x);
            let one_minus = rat_int(1) - &x * &x;
            let rhs = one_minus * p.derivative().eval(&x);
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn apply_d_flips_parity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let deg = rng.random_range(1..12);
            let p = random_poly(&mut rng, deg);
            let odd_part = UPoly::from_coeffs(
                p.coeffs()
                    .iter()
                    .enumerate()
                    .map(|(k, c)| if k % 2 == 1 { c.clone() } else { Rational::zero() })
                    .collect(),
            );
            assert!(apply_d(&odd_part).is_even());
        }
    }

    #[test]
    fn to_tau_examples() {
        let e = to_tau(&UPoly::u());
        assert_eq!(e.coeffs(), &[rat_int(0), rat_int(1)]);
        // u^2 = tau_0 - tau_2
        let e2 = to_tau(&upoly(&[(0, 1), (0, 1), (1, 1)]));
        assert_eq!(e2.coeffs(), &[rat_int(1), rat_int(0), rat_int(-1)]);
        // a basis element expands to a unit vector
        let t = tau_basis(5);
        let e5 = to_tau(&t[5]);
        let mut want = vec![rat_int(0); 6];
        want[5] = rat_int(1);
        assert_eq!(e5.coeffs(), &want[..]);
    }

    #[test]
    fn tau_round_trip_random_to_degree_50() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let basis = tau_basis(50);
        for _ in 0..30 {
            let deg = rng.random_range(0..=50);
            let p = random_poly(&mut rng, deg);
            let back = to_tau_with_basis(&p, &basis).to_monomial(&basis);
            assert_eq!(back, p);
        }
    }

    #[test]
    fn norm_examples() {
        let ctx = PrecisionContext::new(128);
        // ||u||_1 = 1
        let n1 = norm_n(&UPoly::u(), 1, ctx).unwrap();
        assert_eq!(format::to_decimal_string(&n1, 10), "1.000000000e0");
        // ||1||_1 = pi/2
        let n2 = norm_n(&UPoly::one(), 1, ctx).unwrap();
        assert!(format::to_decimal_string(&n2, 10).starts_with("1.57079632"));
        // zero polynomial
        let n0 = norm_n(&UPoly::zero(), 5, ctx).unwrap();
        assert!(n0.is_zero());
        // degree too high
        assert!(matches!(
            norm_n(&upoly(&[(0, 1), (0, 1), (1, 1)]), 1, ctx),
            Err(PolyError::DegreeTooHigh { .. })
        ));
    }

    #[test]
    fn norm_operator_inequalities() {
        // ||Dp||_{n+1} <= n ||p||_n, and ||p||_n <= ||Dp||_{n+1} for odd p
        let ctx = PrecisionContext::new(128);
        let mut rng = ChaCha8Rng::seed_from_u64(271828);
        for n in 2..=30usize {
            for _ in 0..20 {
                let deg = rng.random_range(1..=n);
                let p = random_poly(&mut rng, deg);
                let np = norm_n(&p, n, ctx).unwrap();
                let ndp = norm_n(&apply_d(&p), n + 1, ctx).unwrap();
                assert!(
                    ndp.le_with_ulp_slack(&np.mul_i64(n as i64, ctx), 8),
                    "Thm 3.3(1) violated at n={n}"
                );
                let podd = UPoly::from_coeffs(
                    p.coeffs()
                        .iter()
                        .enumerate()
                        .map(|(k, c)| if k % 2 == 1 { c.clone() } else { Rational::zero() })
                        .collect(),
                );
                if !podd.is_zero() {
                    let npo = norm_n(&podd, n, ctx).unwrap();
                    let ndpo = norm_n(&apply_d(&podd), n + 1, ctx).unwrap();
                    assert!(npo.le_with_ulp_slack(&ndpo, 8), "Thm 3.3(2) violated at n={n}");
                }
            }
        }
    }

    #[test]
    fn tau_matches_tanh_derivatives() {
        // tau_n(tanh z) = (1/(n-1)!) (d/dz)^{n-1} tanh z, checked against a
        // series-composition oracle: tanh(z0 + h) expanded via the addition
        // formula (t0 + tanh h)/(1 + t0 tanh h) as a power series in h.
        let ctx = PrecisionContext::new(192);
        let order = 12usize;
        let taus = tau_basis(order);
        for (zn, zd) in [(1i64, 10i64), (1, 3), (1, 1)] {
            let z = rational_to_bigfloat(&rat(zn, zd), ctx);
            let t0 = crate::numeric::functions::tanh(&z, ctx);
            // tanh h = sinh h / cosh h as exact rational series in h
            let tanh_series = tanh_taylor(order);
            // numerator t0 + tanh h, denominator 1 + t0 tanh h as BigFloat series
            let mut num: Vec<BigFloat> = tanh_series
                .iter()
                .map(|c| rational_to_bigfloat(c, ctx))
                .collect();
            num[0] = num[0].add(&t0, ctx);
            let mut den: Vec<BigFloat> = tanh_series
                .iter()
                .map(|c| rational_to_bigfloat(c, ctx).mul(&t0, ctx))
                .collect();
            den[0] = den[0].add(&BigFloat::from_u64(1, ctx), ctx);
            let comp = series_div(&num, &den, ctx);
            // comp[k] = coeff of h^k = (d/dz)^k tanh(z0) / k!
            for n in 1..=order {
                // comp[n-1] = (d/dz)^{n-1} tanh(z0) / (n-1)! which is exactly tau_n(tanh z0)
                let tau_val = taus[n].eval_bigfloat(&t0, ctx);
                let diff = tau_val.sub(&comp[n - 1], ctx).abs();
                let scale = comp[n - 1].abs().add(&BigFloat::exp2(-100, ctx), ctx);
                let rel = diff.div(&scale, ctx);
                // the oracle's series division cancels tens of bits at n ~ 11;
                // a formula error would show up as an O(1) relative difference
                assert!(
                    rel.msb_exponent().map_or(true, |e| e < -110),
                    "tau_{n}(tanh z) mismatch at z={zn}/{zd}"
                );
            }
        }
    }

    fn tanh_taylor(order: usize) -> Vec<Rational> {
        // sinh/cosh series division, exact
        let mut sinh = vec![Rational::zero(); order + 1];
        let mut cosh = vec![Rational::zero(); order + 1];
        let mut fact = rat_int(1);
        for k in 0..=order {
            if k > 0 {
                fact = fact * rat_int(k as i64);
            }
            if k % 2 == 1 {
                sinh[k] = rat_int(1) / fact.clone();
            } else {
                cosh[k] = rat_int(1) / fact.clone();
            }
        }
        // t = sinh/cosh: t[n] = sinh[n] - sum_{j<n} t[j] cosh[n-j] (cosh[0]=1)
        let mut t = vec![Rational::zero(); order + 1];
        for n in 0..=order {
            let mut acc = sinh[n].clone();
            for j in 0..n {
                acc -= &t[j] * &cosh[n - j];
            }
            t[n] = acc;
        }
        t
    }

    fn series_div(num: &[BigFloat], den: &[BigFloat], ctx: PrecisionContext) -> Vec<BigFloat> {
        let n = num.len();
        let mut q: Vec<BigFloat> = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = num[k].clone();
            for j in 0..k {
                acc = acc.sub(&q[j].mul(&den[k - j], ctx), ctx);
            }
            q.push(acc.div(&den[0], ctx));
        }
        q
    }

    #[test]
    fn display_matches_table_style() {
        let a3 = upoly(&[(0, 1), (1, 1), (0, 1), (-1, 1)]);
        assert_eq!(a3.to_string(), "u - u^3");
        let a5 = upoly(&[(0, 1), (4, 3), (0, 1), (-14, 3), (0, 1), (10, 3)]);
        assert_eq!(a5.to_string(), "4/3*u - 14/3*u^3 + 10/3*u^5");
    }
}
