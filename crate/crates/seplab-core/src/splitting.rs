//! High-precision iteration of the plane map, local invariant-manifold charts
//! at the saddles A = (1,1) and B = (-1,-1), graph evaluation of the
//! manifolds, and measurement of the vertical splitting distance against the
//! leading asymptotic prediction.

use thiserror::Error;

use crate::numeric::functions::{atanh, cos, exp, pi, powi, tanh};
use crate::numeric::{BigFloat, PrecisionContext};

#[derive(Debug, Error)]
pub enum SplitError {
    #[error("orbit shows no level crossing within {0} steps")]
    NoCrossing(usize),
    #[error("near-resonance at order {order}: the chart system is singular")]
    ResonanceFailure { order: usize },
    #[error("chart residual {got_log2} log2 exceeds the -{want_log2} threshold")]
    ChartResidual { got_log2: i64, want_log2: i64 },
    #[error("transported curve never crosses x within {0} iterations")]
    OutOfDomain(usize),
    #[error("measured splitting is below the precision floor; raise precision_bits")]
    PrecisionInsufficient,
}

#[derive(Clone, Copy, Debug)]
pub struct MapParams<'a> {
    pub eps: &'a BigFloat,
    pub ctx: PrecisionContext,
}

#[derive(Clone, Debug)]
pub struct Point2 {
    pub u: BigFloat,
    pub v: BigFloat,
}

/// The half-step map phi(x, y) = (y, x + 2 eps (1 - y^2)).
pub fn step_phi(p: &Point2, params: MapParams) -> Point2 {
    let MapParams { eps, ctx } = params;
    let one = BigFloat::from_u64(1, ctx);
    let y2 = p.v.mul(&p.v, ctx);
    let next = p.u.add(&eps.mul_i64(2, ctx).mul(&one.sub(&y2, ctx), ctx), ctx);
    Point2 { u: p.v.clone(), v: next }
}

/// Exact inverse of phi: (x1, y1) -> (y1 - 2 eps (1 - x1^2), x1).
pub fn step_phi_inv(p: &Point2, params: MapParams) -> Point2 {
    let MapParams { eps, ctx } = params;
    let one = BigFloat::from_u64(1, ctx);
    let x2 = p.u.mul(&p.u, ctx);
    let prev = p.v.sub(&eps.mul_i64(2, ctx).mul(&one.sub(&x2, ctx), ctx), ctx);
    Point2 { u: prev, v: p.u.clone() }
}

/// The double-step map Phi = phi o phi that keeps each manifold on one curve.
pub fn step_cap_phi(p: &Point2, params: MapParams) -> Point2 {
    step_phi(&step_phi(p, params), params)
}

pub fn step_cap_phi_inv(p: &Point2, params: MapParams) -> Point2 {
    step_phi_inv(&step_phi_inv(p, params), params)
}

/// Phi and its tangent map: returns (Phi(p), J_Phi(p) w).
fn cap_phi_with_tangent(p: &Point2, w: &Point2, params: MapParams) -> (Point2, Point2) {
    let MapParams { eps, ctx } = params;
    let one = BigFloat::from_u64(1, ctx);
    let two_eps = eps.mul_i64(2, ctx);
    // u1 = u + 2e(1 - v^2), du1 = du - 4e v dv
    let u1 = p.u.add(&two_eps.mul(&one.sub(&p.v.mul(&p.v, ctx), ctx), ctx), ctx);
    let du1 = w.u.sub(&two_eps.mul_i64(2, ctx).mul(&p.v, ctx).mul(&w.v, ctx), ctx);
    // v1 = v + 2e(1 - u1^2), dv1 = dv - 4e u1 du1
    let v1 = p.v.add(&two_eps.mul(&one.sub(&u1.mul(&u1, ctx), ctx), ctx), ctx);
    let dv1 = w.v.sub(&two_eps.mul_i64(2, ctx).mul(&u1, ctx).mul(&du1, ctx), ctx);
    (Point2 { u: u1, v: v1 }, Point2 { u: du1, v: dv1 })
}

/// Phi^{-1} and its tangent map.
fn cap_phi_inv_with_tangent(p: &Point2, w: &Point2, params: MapParams) -> (Point2, Point2) {
    let MapParams { eps, ctx } = params;
    let one = BigFloat::from_u64(1, ctx);
    let two_eps = eps.mul_i64(2, ctx);
    // v0 = v - 2e(1 - u^2), dv0 = dv + 4e u du
    let v0 = p.v.sub(&two_eps.mul(&one.sub(&p.u.mul(&p.u, ctx), ctx), ctx), ctx);
    let dv0 = w.v.add(&two_eps.mul_i64(2, ctx).mul(&p.u, ctx).mul(&w.u, ctx), ctx);
    // u0 = u - 2e(1 - v0^2), du0 = du + 4e v0 dv0
    let u0 = p.u.sub(&two_eps.mul(&one.sub(&v0.mul(&v0, ctx), ctx), ctx), ctx);
    let du0 = w.u.add(&two_eps.mul_i64(2, ctx).mul(&v0, ctx).mul(&dv0, ctx), ctx);
    (Point2 { u: u0, v: v0 }, Point2 { u: du0, v: dv0 })
}

/// y_0..y_steps of the three-term recurrence y_{n+1} = y_{n-1} + 2e(1-y_n^2).
pub fn orbit(y0: &BigFloat, y1: &BigFloat, steps: usize, params: MapParams) -> Vec<BigFloat> {
    assert!(steps >= 1);
    let MapParams { eps, ctx } = params;
    let one = BigFloat::from_u64(1, ctx);
    let two_eps = eps.mul_i64(2, ctx);
    let mut ys = Vec::with_capacity(steps + 1);
    ys.push(y0.clone());
    ys.push(y1.clone());
    for n in 1..steps {
        let y = &ys[n];
        let next = ys[n - 1].add(&two_eps.mul(&one.sub(&y.mul(y, ctx), ctx), ctx), ctx);
        ys.push(next);
    }
    ys
}

/// The first-level length: n1 = inf{ n : y_{2n} + y_{2n+1} < 0 } for the
/// orbit started at y0 = 0, y1 = eps, and l1 = 2 eps n1.
pub fn first_level_length(
    eps: &BigFloat,
    params: MapParams,
    max_steps: usize,
) -> Result<(usize, BigFloat), SplitError> {
    let ctx = params.ctx;
    let one = BigFloat::from_u64(1, ctx);
    let two_eps = eps.mul_i64(2, ctx);
    let mut prev = BigFloat::zero(ctx);
    let mut cur = eps.clone();
    let mut n = 0usize;
    loop {
        // invariant: prev = y_{2n}, cur = y_{2n+1}
        if prev.add(&cur, ctx).is_negative() {
            return Ok((n, two_eps.mul_i64(n as i64, ctx)));
        }
        if 2 * n >= max_steps {
            return Err(SplitError::NoCrossing(max_steps));
        }
        let next = prev.add(&two_eps.mul(&one.sub(&cur.mul(&cur, ctx), ctx), ctx), ctx);
        let next2 = cur.add(&two_eps.mul(&one.sub(&next.mul(&next, ctx), ctx), ctx), ctx);
        prev = next;
        cur = next2;
        n += 1;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FixedPoint {
    /// (1, 1)
    A,
    /// (-1, -1)
    B,
}

impl FixedPoint {
    pub fn coords(&self, ctx: PrecisionContext) -> Point2 {
        match self {
            FixedPoint::A => Point2 { u: BigFloat::from_u64(1, ctx), v: BigFloat::from_u64(1, ctx) },
            FixedPoint::B => Point2 { u: BigFloat::from_i64(-1, ctx), v: BigFloat::from_i64(-1, ctx) },
        }
    }
}

/// Taylor parametrization p(s) of a one-dimensional invariant manifold at a
/// saddle: Phi(p(s)) = p(lambda s), p(0) = base, p'(0) an eigenvector.
pub struct ManifoldChart {
    pub base: FixedPoint,
    pub stable: bool,
    pub lambda: BigFloat,
    pub coeffs: Vec<Point2>,
    pub order: usize,
    residual_log2: i64,
}

impl ManifoldChart {
    pub fn eval(&self, s: &BigFloat, ctx: PrecisionContext) -> Point2 {
        let mut x = BigFloat::zero(ctx);
        let mut y = BigFloat::zero(ctx);
        for k in (1..=self.order).rev() {
            x = x.add(&self.coeffs[k].u, ctx).mul(s, ctx);
            y = y.add(&self.coeffs[k].v, ctx).mul(s, ctx);
        }
        let base = self.base.coords(ctx);
        Point2 { u: base.u.add(&x, ctx), v: base.v.add(&y, ctx) }
    }

    /// (p(s), p'(s)).
    pub fn eval_with_deriv(&self, s: &BigFloat, ctx: PrecisionContext) -> (Point2, Point2) {
        let mut x = BigFloat::zero(ctx);
        let mut y = BigFloat::zero(ctx);
        let mut dx = BigFloat::zero(ctx);
        let mut dy = BigFloat::zero(ctx);
        for k in (1..=self.order).rev() {
            let cu = &self.coeffs[k].u;
            let cv = &self.coeffs[k].v;
            dx = dx.mul(s, ctx).add(&cu.mul_i64(k as i64, ctx), ctx);
            dy = dy.mul(s, ctx).add(&cv.mul_i64(k as i64, ctx), ctx);
            x = x.add(cu, ctx).mul(s, ctx);
            y = y.add(cv, ctx).mul(s, ctx);
        }
        // dx currently holds sum k c_k s^{k-1}
        let base = self.base.coords(ctx);
        (
            Point2 { u: base.u.add(&x, ctx), v: base.v.add(&y, ctx) },
            Point2 { u: dx, v: dy },
        )
    }

    pub fn residual_log2(&self) -> i64 {
        self.residual_log2
    }
}

/// Jacobian of Phi at a point (entries row-major).
pub fn cap_phi_jacobian(p: &Point2, params: MapParams) -> [BigFloat; 4] {
    let MapParams { eps, ctx } = params;
    let one = BigFloat::from_u64(1, ctx);
    let u1 = p.u.add(&eps.mul_i64(2, ctx).mul(&one.sub(&p.v.mul(&p.v, ctx), ctx), ctx), ctx);
    let m4ev = eps.mul_i64(-4, ctx).mul(&p.v, ctx);
    let m4eu1 = eps.mul_i64(-4, ctx).mul(&u1, ctx);
    // [[1, -4 e v], [-4 e u1, 1 + 16 e^2 u1 v]]
    let d22 = one.add(&m4eu1.mul(&m4ev, ctx), ctx);
    [one.clone(), m4ev, m4eu1, d22]
}

/// Solves Phi(p(s)) = p(lambda s) order by order; the order-k coefficient
/// satisfies a 2x2 linear system whose determinant vanishes only at a
/// resonance lambda^k in the spectrum, which cannot happen at a saddle but is
/// checked anyway.
pub fn build_manifold_chart(
    base: FixedPoint,
    stable: bool,
    order: usize,
    params: MapParams,
) -> Result<ManifoldChart, SplitError> {
    assert!(order >= 5, "chart order must be at least 5");
    let MapParams { eps, ctx } = params;
    let one = BigFloat::from_u64(1, ctx);
    let b = base.coords(ctx);
    // trace 2 + 16 e^2, det 1
    let tr = one.add(&one, ctx).add(&eps.mul(eps, ctx).mul_i64(16, ctx), ctx);
    let disc = tr.mul(&tr, ctx).sub(&BigFloat::from_u64(4, ctx), ctx).sqrt(ctx);
    let lambda = if stable {
        tr.sub(&disc, ctx).mul(&BigFloat::exp2(-1, ctx), ctx)
    } else {
        tr.add(&disc, ctx).mul(&BigFloat::exp2(-1, ctx), ctx)
    };
    // eigenvector of [[1, -4 e b_v], [-4 e b_u, ...]] for lambda:
    // (1 - lambda) x - 4 e b_v y = 0 -> (x, y) = (-4 e b_v, lambda - 1)
    let mut ex = eps.mul_i64(-4, ctx).mul(&b.v, ctx);
    let mut ey = lambda.sub(&one, ctx);
    let norm = ex.mul(&ex, ctx).add(&ey.mul(&ey, ctx), ctx).sqrt(ctx);
    ex = ex.div(&norm, ctx);
    ey = ey.div(&norm, ctx);
    // orient into the strip between the saddles
    let inward = match base {
        FixedPoint::A => ex.is_negative(),
        FixedPoint::B => !ex.is_negative() && !ex.is_zero(),
    };
    if !inward {
        ex = ex.neg();
        ey = ey.neg();
    }

    let zero = BigFloat::zero(ctx);
    let mut xs = vec![zero.clone(); order + 1];
    let mut ys = vec![zero.clone(); order + 1];
    xs[1] = ex;
    ys[1] = ey;
    // lambda powers
    let mut lam_pow = Vec::with_capacity(order + 1);
    lam_pow.push(one.clone());
    for k in 1..=order {
        let next = lam_pow[k - 1].mul(&lambda, ctx);
        lam_pow.push(next);
    }
    let reso_floor = -(ctx.bits() as i64) / 2;
    let two_eps = eps.mul_i64(2, ctx);
    for k in 2..=order {
        // S1 = sum_{i=1}^{k-1} y_i y_{k-i}; u1 coefficients below k are lam^i x_i
        let mut s1 = BigFloat::zero(ctx);
        let mut s2 = BigFloat::zero(ctx);
        for i in 1..k {
            s1 = s1.add(&ys[i].mul(&ys[k - i], ctx), ctx);
            let u1i = lam_pow[i].mul(&xs[i], ctx);
            let u1ki = lam_pow[k - i].mul(&xs[k - i], ctx);
            s2 = s2.add(&u1i.mul(&u1ki, ctx), ctx);
        }
        // (1 - lam^k) x_k - 4 e b_v y_k            = 2 e S1
        // -4 e b_u lam^k x_k + (1 - lam^k) y_k     = 2 e S2
        let m11 = one.sub(&lam_pow[k], ctx);
        let m12 = eps.mul_i64(-4, ctx).mul(&b.v, ctx);
        let m21 = eps.mul_i64(-4, ctx).mul(&b.u, ctx).mul(&lam_pow[k], ctx);
        let m22 = m11.clone();
        let det = m11.mul(&m22, ctx).sub(&m12.mul(&m21, ctx), ctx);
        if det.msb_exponent().map_or(true, |e| e < reso_floor) {
            return Err(SplitError::ResonanceFailure { order: k });
        }
        let r1 = two_eps.mul(&s1, ctx);
        let r2 = two_eps.mul(&s2, ctx);
        xs[k] = r1.mul(&m22, ctx).sub(&m12.mul(&r2, ctx), ctx).div(&det, ctx);
        ys[k] = m11.mul(&r2, ctx).sub(&r1.mul(&m21, ctx), ctx).div(&det, ctx);
    }

    let coeffs: Vec<Point2> =
        xs.into_iter().zip(ys).map(|(u, v)| Point2 { u, v }).collect();
    let mut chart = ManifoldChart { base, stable, lambda, coeffs, order, residual_log2: i64::MIN };
    chart.residual_log2 = chart_residual_log2(&chart, params);
    let want = -(ctx.bits() as i64) / 2;
    if chart.residual_log2 >= want {
        return Err(SplitError::ChartResidual { got_log2: chart.residual_log2, want_log2: -want });
    }
    Ok(chart)
}

/// log2 of the largest Taylor coefficient of Phi(p(s)) - p(lambda s) through
/// the chart order (i64::MIN when identically zero at working precision).
fn chart_residual_log2(chart: &ManifoldChart, params: MapParams) -> i64 {
    let MapParams { eps, ctx } = params;
    let order = chart.order;
    let zero = BigFloat::zero(ctx);
    let one = BigFloat::from_u64(1, ctx);
    let b = chart.base.coords(ctx);
    // series arithmetic on Vec<BigFloat> truncated at `order`
    let mul = |a: &[BigFloat], c: &[BigFloat]| -> Vec<BigFloat> {
        let mut r = vec![zero.clone(); order + 1];
        for i in 0..=order {
            if a[i].is_zero() {
                continue;
            }
            for j in 0..=order - i {
                if c[j].is_zero() {
                    continue;
                }
                r[i + j] = r[i + j].add(&a[i].mul(&c[j], ctx), ctx);
            }
        }
        r
    };
    let mut x = vec![zero.clone(); order + 1];
    let mut y = vec![zero.clone(); order + 1];
    x[0] = b.u.clone();
    y[0] = b.v.clone();
    for k in 1..=order {
        x[k] = chart.coeffs[k].u.clone();
        y[k] = chart.coeffs[k].v.clone();
    }
    // u1 = x + 2e(1 - y^2), v1 = y + 2e(1 - u1^2)
    let two_eps = eps.mul_i64(2, ctx);
    let y2 = mul(&y, &y);
    let mut u1 = x.clone();
    u1[0] = u1[0].add(&two_eps, ctx);
    for k in 0..=order {
        u1[k] = u1[k].sub(&two_eps.mul(&y2[k], ctx), ctx);
    }
    let u12 = mul(&u1, &u1);
    let mut v1 = y.clone();
    v1[0] = v1[0].add(&two_eps, ctx);
    for k in 0..=order {
        v1[k] = v1[k].sub(&two_eps.mul(&u12[k], ctx), ctx);
    }
    let _ = one;
    // residual against p(lambda s)
    let mut worst = i64::MIN;
    let mut lam_pow = BigFloat::from_u64(1, ctx);
    for k in 0..=order {
        if k > 0 {
            lam_pow = lam_pow.mul(&chart.lambda, ctx);
        }
        let rx = u1[k].sub(&x[k].mul(&lam_pow, ctx), ctx);
        let ry = v1[k].sub(&y[k].mul(&lam_pow, ctx), ctx);
        for r in [rx, ry] {
            if let Some(e) = r.msb_exponent() {
                worst = worst.max(e);
            }
        }
    }
    worst
}

/// Largest |coeff_k|^(1/k) growth exponent, used to pick a safe chart radius.
fn coeff_growth_log2(chart: &ManifoldChart) -> i64 {
    let mut g = 0i64;
    for k in 1..=chart.order {
        for c in [&chart.coeffs[k].u, &chart.coeffs[k].v] {
            if let Some(e) = c.msb_exponent() {
                g = g.max((e + k as i64 - 1).div_euclid(k as i64));
            }
        }
    }
    g
}

/// Second coordinate of the manifold graph over first coordinate = x: the
/// local chart is transported with Phi (unstable) or Phi^{-1} (stable) until
/// the curve crosses x, then the crossing parameter is isolated by bisection
/// and polished by Newton iteration on the transported first coordinate.
pub fn manifold_graph_value(
    chart: &ManifoldChart,
    x: &BigFloat,
    params: MapParams,
) -> Result<BigFloat, SplitError> {
    let ctx = params.ctx;
    // pick s0 = 2^-m so the chart truncation error is far below 2^-(bits/2):
    // |c_k| <= 2^{g k} gives tail ~ 2^{(g - m)(order+1)}
    let g = coeff_growth_log2(chart);
    let m = g + ((ctx.bits() as i64 / 2 + 48) / chart.order as i64) + 2;
    let s0 = BigFloat::exp2(-m, ctx);
    let budget = 4 * (ctx.bits() as usize) + 4096;

    let transported = |s: &BigFloat, j: usize| -> (Point2, Point2) {
        let (mut p, mut w) = chart.eval_with_deriv(s, ctx);
        for _ in 0..j {
            let step = if chart.stable {
                cap_phi_inv_with_tangent(&p, &w, params)
            } else {
                cap_phi_with_tangent(&p, &w, params)
            };
            p = step.0;
            w = step.1;
        }
        (p, w)
    };

    let (lo_s, hi_s) = if chart.stable {
        (chart.lambda.mul(&s0, ctx), s0.clone())
    } else {
        (s0.div(&chart.lambda, ctx), s0.clone())
    };
    let mut prev = transported(&s0, 0).0;
    for j in 0..budget {
        let cur = transported(&s0, j + 1).0;
        let (a, b) = (&prev.u, &cur.u);
        let crosses = (x >= a && x <= b) || (x >= b && x <= a);
        if crosses {
            // fundamental parameter interval at level j+1 spans [prev, cur]
            let mut lo = lo_s.clone();
            let mut hi = hi_s.clone();
            let eval = |s: &BigFloat| transported(s, j + 1);
            let g_lo = eval(&lo).0.u.sub(x, ctx);
            if g_lo.is_zero() {
                return Ok(eval(&lo).0.v);
            }
            let lo_negative = g_lo.is_negative();
            // bisection to roughly half precision
            for _ in 0..(ctx.bits() / 2 + 16) {
                let mid = lo.add(&hi, ctx).mul(&BigFloat::exp2(-1, ctx), ctx);
                let gm = eval(&mid).0.u.sub(x, ctx);
                if gm.is_zero() {
                    return Ok(eval(&mid).0.v);
                }
                if gm.is_negative() == lo_negative {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            // Newton polish on s -> first coordinate, with the exact tangent
            let mut s = lo.add(&hi, ctx).mul(&BigFloat::exp2(-1, ctx), ctx);
            for _ in 0..10 {
                let (p, w) = eval(&s);
                if w.u.is_zero() {
                    break;
                }
                let delta = p.u.sub(x, ctx).div(&w.u, ctx);
                s = s.sub(&delta, ctx);
            }
            return Ok(eval(&s).0.v);
        }
        prev = cur;
    }
    Err(SplitError::OutOfDomain(budget))
}

/// One measured/predicted record of the vertical splitting at abscissa x.
#[derive(Clone, Debug)]
pub struct SplittingSample {
    pub eps: BigFloat,
    pub x: BigFloat,
    pub t: BigFloat,
    pub measured: BigFloat,
    pub predicted: BigFloat,
    pub ratio: BigFloat,
}

/// The leading-order prediction 4 pi alpha cos(pi t/eps + pi) /
/// (eps^3 (1 - tanh(t)^2)) * exp(-pi^2/(2 eps)).
pub fn predicted_splitting(
    eps: &BigFloat,
    t: &BigFloat,
    alpha: &BigFloat,
    ctx: PrecisionContext,
) -> BigFloat {
    let w = ctx.with_guard(32);
    let pi_v = pi(w);
    let phase = pi_v.mul(t, w).div(eps, w).add(&pi_v, w);
    let cos_v = cos(&phase, w);
    let th = tanh(t, w);
    let one = BigFloat::from_u64(1, w);
    let sech2 = one.sub(&th.mul(&th, w), w);
    let eps3 = powi(eps, 3, w);
    let expo = exp(&pi_v.mul(&pi_v, w).div(&eps.mul_i64(2, w), w).neg(), w);
    pi_v.mul_i64(4, w)
        .mul(alpha, w)
        .mul(&cos_v, w)
        .div(&eps3.mul(&sech2, w), w)
        .mul(&expo, w)
        .add(&BigFloat::zero(ctx), ctx)
}

/// Measures stable-minus-unstable graph distance on the grid and pairs it
/// with the prediction; `alpha` comes from the exact pipeline.
pub fn vertical_splitting(
    eps: &BigFloat,
    x_grid: &[BigFloat],
    alpha: &BigFloat,
    chart_order: usize,
    params: MapParams,
) -> Result<Vec<SplittingSample>, SplitError> {
    let ctx = params.ctx;
    let stable = build_manifold_chart(FixedPoint::A, true, chart_order, params)?;
    let unstable = build_manifold_chart(FixedPoint::B, false, chart_order, params)?;
    let mut out = Vec::with_capacity(x_grid.len());
    let mut max_measured = BigFloat::zero(ctx);
    for x in x_grid {
        let ws = manifold_graph_value(&stable, x, params)?;
        let wu = manifold_graph_value(&unstable, x, params)?;
        let measured = ws.sub(&wu, ctx);
        if measured.abs() > max_measured {
            max_measured = measured.abs();
        }
        let t = atanh(x, ctx);
        let predicted = predicted_splitting(eps, &t, alpha, ctx);
        let ratio = if predicted.is_zero() {
            BigFloat::zero(ctx)
        } else {
            measured.div(&predicted, ctx)
        };
        out.push(SplittingSample { eps: eps.clone(), x: x.clone(), t, measured, predicted, ratio });
    }
    // amplitude below the precision floor means the working precision cannot
    // resolve the splitting
    let floor = BigFloat::exp2(-(ctx.bits() as i64) / 2 + 16, ctx);
    if max_measured < floor {
        return Err(SplitError::PrecisionInsufficient);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{rat, rational_to_bigfloat};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ctx(bits: u32) -> PrecisionContext {
        PrecisionContext::new(bits)
    }

    fn bf(v: f64, c: PrecisionContext) -> BigFloat {
        BigFloat::from_f64(v, c)
    }

    #[test]
    fn fixed_points_exact() {
        let c = ctx(128);
        let eps = rational_to_bigfloat(&rat(3, 10), c);
        let params = MapParams { eps: &eps, ctx: c };
        for fpt in [FixedPoint::A, FixedPoint::B] {
            let p = fpt.coords(c);
            let q = step_phi(&p, params);
            assert!(q.u == p.u && q.v == p.v, "phi must fix {fpt:?} exactly");
            let r = step_cap_phi(&p, params);
            assert!(r.u == p.u && r.v == p.v);
        }
    }

    #[test]
    fn one_step_hand_value() {
        // eps = 0.05, (0, 0.05) -> (0.05, 0.09975); oracle in exact rationals
        let c = ctx(192);
        let eps = rational_to_bigfloat(&rat(1, 20), c);
        let params = MapParams { eps: &eps, ctx: c };
        let p = Point2 { u: BigFloat::zero(c), v: rational_to_bigfloat(&rat(1, 20), c) };
        let q = step_phi(&p, params);
        let want_v = rational_to_bigfloat(&rat(399, 4000), c); // 0.09975 exactly
        assert_eq!(q.u, p.v);
        let diff = q.v.sub(&want_v, c).abs();
        assert!(diff.msb_exponent().map_or(true, |e| e < -180));
    }

    #[test]
    fn inverse_round_trip_random_points() {
        let c = ctx(192);
        let eps = rational_to_bigfloat(&rat(2, 5), c);
        let params = MapParams { eps: &eps, ctx: c };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let p = Point2 {
                u: bf(rng.random_range(-1.5..1.5), c),
                v: bf(rng.random_range(-1.5..1.5), c),
            };
            let back = step_phi_inv(&step_phi(&p, params), params);
            // <= 8 ulp on each coordinate
            let du = back.u.sub(&p.u, c).abs();
            let dv = back.v.sub(&p.v, c).abs();
            for (d, orig) in [(du, &p.u), (dv, &p.v)] {
                let ulp_exp = orig.ulp_exponent().unwrap_or(-(c.bits() as i64));
                assert!(d <= BigFloat::exp2(ulp_exp + 3, c), "round trip off by more than 8 ulp");
            }
        }
    }

    #[test]
    fn reversibility_conjugacy() {
        // R(u,v) = (-v,-u): R o Phi o R = Phi^{-1}
        let c = ctx(192);
        let eps = rational_to_bigfloat(&rat(3, 10), c);
        let params = MapParams { eps: &eps, ctx: c };
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let p = Point2 {
                u: bf(rng.random_range(-1.2..1.2), c),
                v: bf(rng.random_range(-1.2..1.2), c),
            };
            let r = |q: &Point2| Point2 { u: q.v.neg(), v: q.u.neg() };
            let lhs = r(&step_cap_phi(&r(&p), params));
            let rhs = step_cap_phi_inv(&p, params);
            let du = lhs.u.sub(&rhs.u, c).abs();
            let dv = lhs.v.sub(&rhs.v, c).abs();
            for (d, orig) in [(du, &rhs.u), (dv, &rhs.v)] {
                let ulp_exp = orig.ulp_exponent().unwrap_or(-(c.bits() as i64) - 10);
                assert!(d <= BigFloat::exp2(ulp_exp + 3, c), "reversibility violated");
            }
        }
    }

    #[test]
    fn jacobian_determinant_is_one() {
        let c = ctx(192);
        let eps = rational_to_bigfloat(&rat(1, 4), c);
        let params = MapParams { eps: &eps, ctx: c };
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let p = Point2 {
                u: bf(rng.random_range(-1.2..1.2), c),
                v: bf(rng.random_range(-1.2..1.2), c),
            };
            let j = cap_phi_jacobian(&p, params);
            let det = j[0].mul(&j[3], c).sub(&j[1].mul(&j[2], c), c);
            let one = BigFloat::from_u64(1, c);
            let diff = det.sub(&one, c).abs();
            assert!(diff.msb_exponent().map_or(true, |e| e < -180), "det != 1");
            // finite-difference cross check at 2^-60 step
            let h = BigFloat::exp2(-60, c);
            let pu = Point2 { u: p.u.add(&h, c), v: p.v.clone() };
            let fd = step_cap_phi(&pu, params).u.sub(&step_cap_phi(&p, params).u, c).div(&h, c);
            let d11 = fd.sub(&j[0], c).abs();
            assert!(d11.msb_exponent().map_or(true, |e| e < -50));
        }
    }

    #[test]
    fn orbit_values_and_plateau() {
        let c = ctx(128);
        let eps = rational_to_bigfloat(&rat(1, 20), c);
        let params = MapParams { eps: &eps, ctx: c };
        let ys = orbit(&BigFloat::zero(c), &eps, 1600, params);
        assert_eq!(ys.len(), 1601);
        // y_2 = 0.09975
        let want = rational_to_bigfloat(&rat(399, 4000), c);
        assert!(ys[2].sub(&want, c).abs().msb_exponent().map_or(true, |e| e < -100));
        // double-precision oracle agreement over the first 120 steps (the
        // recurrence amplifies differences by ~1.105 per step, so the f64
        // comparison window must stay short)
        let mut a = 0.0f64;
        let mut b = 0.05f64;
        for n in 1..120 {
            let next = a + 2.0 * 0.05 * (1.0 - b * b);
            a = b;
            b = next;
            assert!((ys[n + 1].to_f64() - b).abs() < 1e-8, "f64 oracle diverges at step {n}");
        }
        // plateau: >= 100 consecutive |y_n - 1| < 0.05
        let mut run = 0usize;
        let mut best = 0usize;
        for y in &ys {
            if (y.to_f64() - 1.0).abs() < 0.05 {
                run += 1;
                best = best.max(run);
            } else {
                run = 0;
            }
        }
        assert!(best >= 100, "plateau too short: {best}");
        // constant seed stays put exactly
        let one = BigFloat::from_u64(1, c);
        let flat = orbit(&one, &one, 10, params);
        assert!(flat.iter().all(|y| *y == one));
    }

    #[test]
    fn first_level_length_band() {
        // the plateau exit is governed by the e^{-pi^2/(2 eps)} manifold
        // separation (~2^-142 at eps = 1/20), so the run needs the
        // eps-dependent default precision; lower precision exits early on
        // rounding noise
        let c = ctx(crate::numeric::default_splitting_bits(0.05));
        let eps = rational_to_bigfloat(&rat(1, 20), c);
        let params = MapParams { eps: &eps, ctx: c };
        let (n1, l1) = first_level_length(&eps, params, 1_000_000).unwrap();
        let l1f = l1.to_f64();
        // band around pi^2/(4 eps) = 49.35
        assert!((39.5..=64.2).contains(&l1f), "l1 = {l1f} (n1 = {n1}) outside band");
        // growth like 1/eps: l1(0.04) > 1.5 * l1(0.08)
        let c1 = ctx(crate::numeric::default_splitting_bits(0.04));
        let e1 = rational_to_bigfloat(&rat(1, 25), c1);
        let c2 = ctx(crate::numeric::default_splitting_bits(0.08));
        let e2 = rational_to_bigfloat(&rat(2, 25), c2);
        let p1 = MapParams { eps: &e1, ctx: c1 };
        let p2 = MapParams { eps: &e2, ctx: c2 };
        let l1a = first_level_length(&e1, p1, 1_000_000).unwrap().1.to_f64();
        let l1b = first_level_length(&e2, p2, 1_000_000).unwrap().1.to_f64();
        assert!(l1a > 1.5 * l1b, "l1 growth violated: {l1a} vs {l1b}");
    }

    #[test]
    fn chart_eigen_structure() {
        let c = ctx(192);
        let eps = rational_to_bigfloat(&rat(3, 10), c);
        let params = MapParams { eps: &eps, ctx: c };
        let cs = build_manifold_chart(FixedPoint::A, true, 20, params).unwrap();
        let cu = build_manifold_chart(FixedPoint::A, false, 20, params).unwrap();
        // lambda_s * lambda_u = 1
        let prod = cs.lambda.mul(&cu.lambda, c);
        let one = BigFloat::from_u64(1, c);
        assert!(prod.sub(&one, c).abs().msb_exponent().map_or(true, |e| e < -180));
        assert!(cs.lambda < one && cu.lambda > one);
        // trace equals 2 + 16 e^2 against a finite-difference Jacobian
        let j = cap_phi_jacobian(&FixedPoint::A.coords(c), params);
        let tr = j[0].add(&j[3], c);
        let want = BigFloat::from_u64(2, c).add(&eps.mul(&eps, c).mul_i64(16, c), c);
        assert!(tr.sub(&want, c).abs().msb_exponent().map_or(true, |e| e < -180));
        // residual through order 20 below 2^-96 at 192 bits
        assert!(cs.residual_log2() < -96);
        assert!(cu.residual_log2() < -96);
    }

    #[test]
    fn graph_values_and_symmetry() {
        let c = ctx(192);
        let eps = rational_to_bigfloat(&rat(3, 10), c);
        let params = MapParams { eps: &eps, ctx: c };
        let stable = build_manifold_chart(FixedPoint::A, true, 32, params).unwrap();
        let unstable = build_manifold_chart(FixedPoint::B, false, 32, params).unwrap();
        // reversibility maps the stable graph onto the unstable one:
        // y = w_u(x)  =>  w_s(-y) = -x
        let x = bf(0.15, c);
        let y = manifold_graph_value(&unstable, &x, params).unwrap();
        let back = manifold_graph_value(&stable, &y.neg(), params).unwrap();
        let diff = back.add(&x, c).abs();
        assert!(
            diff.msb_exponent().map_or(true, |e| e < -(c.bits() as i64) / 2 + 8),
            "reversibility symmetry violated: {:?}",
            diff.to_f64()
        );
        // near A the stable graph approaches 1
        let near = manifold_graph_value(&stable, &bf(0.95, c), params).unwrap();
        assert!((near.to_f64() - 1.0).abs() < 0.12);
        // at eps = 0.1 the graph at x = 0 stays below 0.1 in magnitude
        let eps_small = rational_to_bigfloat(&rat(1, 10), c);
        let params_small = MapParams { eps: &eps_small, ctx: c };
        let ch = build_manifold_chart(FixedPoint::A, true, 32, params_small).unwrap();
        let w0 = manifold_graph_value(&ch, &BigFloat::zero(c), params_small).unwrap();
        assert!(w0.to_f64().abs() < 0.1, "w(0) = {}", w0.to_f64());
    }

    #[test]
    fn splitting_against_f64_oracle() {
        // the measured distance at eps = 0.4 must match the double-precision
        // prototype measurement (~7.1e-3 amplitude, sign structure of cos)
        let c = ctx(256);
        let eps = rational_to_bigfloat(&rat(2, 5), c);
        let params = MapParams { eps: &eps, ctx: c };
        let alpha = bf(1.469, c);
        let xs: Vec<BigFloat> = [-0.38f64, 0.0, 0.38]
            .iter()
            .map(|&t| {
                let tb = bf(t, c);
                crate::numeric::functions::tanh(&tb, c)
            })
            .collect();
        let samples = vertical_splitting(&eps, &xs, &alpha, 40, params).unwrap();
        // measured at t=0 is negative (cos(pi) phase), near the t = +-0.38
        // peaks it is positive
        assert!(samples[1].measured.is_negative());
        assert!(!samples[0].measured.is_negative());
        assert!(!samples[2].measured.is_negative());
        let m0 = samples[1].measured.to_f64();
        assert!((m0.abs() - 5.9e-3).abs() < 1.0e-3, "center splitting {m0}");
    }
}
