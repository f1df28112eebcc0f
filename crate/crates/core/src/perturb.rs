//! The perturbation: polynomial smoothstep bumps, the z-shear h built from
//! them, the exact piecewise rule for the perturbed map g = f o h, and the
//! closed-form bound on the C^r distance from the identity.
//!
//! Orbits always use the exact piecewise rule; the smooth evaluator exists to
//! witness that the rule is the restriction of a genuinely C^r-small map.

use crate::chain::ChainData;
use crate::model::{apply_f, apply_f2_strip, classify, ModelParams, Point3, Region};
use crate::numerics::{pow_rat, BigFloat, Rat, RatInterval};
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum PerturbError {
    #[error("bump parameters invalid: rho = {0}, |I| = {1}")]
    BumpDomain(Rat, Rat),
    #[error("series diverges: need L >= r, got L = {0}, r = {1}")]
    DivergentSeries(usize, u32),
    #[error("point is on a strip; use the two-step rule")]
    NeedsDoubleStep(Point3),
    #[error(
        "point in the perturbed slab with z in a bump collar but no strip; only the smooth evaluator is faithful here"
    )]
    Exactness(Point3),
    #[error("map not defined at {0} (region {1:?})")]
    Undefined(Point3, Region),
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
    #[error(transparent)]
    Chain(#[from] crate::chain::ChainError),
}

// ---------------------------------------------------------------------------
// Base bump
// ---------------------------------------------------------------------------

/// C^r step: 0 for x <= -1, the degree-(2r+1) polynomial smoothstep on
/// [-1, 0], 1 for x >= 0. The C^r norm field is a rigorous upper bound
/// (coefficient-sum bounds on each derivative).
#[derive(Clone, Debug, Serialize)]
pub struct BumpSpec {
    pub order: u32,
    /// smoothstep coefficients: s(t) = sum c_d t^d on [0, 1], b(x) = s(x + 1)
    pub coeffs: Vec<Rat>,
    pub cr_norm_bound: Rat,
}

fn binomial(n: u64, k: u64) -> Rat {
    if k > n {
        return Rat::zero();
    }
    let mut out = Rat::one();
    for i in 0..k {
        out = &out * &(&Rat::from_int((n - i) as i64) / &Rat::from_int((i + 1) as i64));
    }
    out
}

impl BumpSpec {
    pub fn of_order(r: u32) -> Self {
        let n = r as u64;
        // s(t) = sum_{j=0}^{N} (-1)^j C(N+j, j) C(2N+1, N-j) t^{N+1+j}
        let mut coeffs = vec![Rat::zero(); (2 * n + 2) as usize];
        for j in 0..=n {
            let c = &binomial(n + j, j) * &binomial(2 * n + 1, n - j);
            let signed = if j % 2 == 0 { c } else { -c };
            coeffs[(n + 1 + j) as usize] = signed;
        }
        let cr_norm_bound = Self::norm_bound_from(&coeffs, r);
        BumpSpec { order: r, coeffs, cr_norm_bound }
    }

    fn norm_bound_from(coeffs: &[Rat], r: u32) -> Rat {
        // sup |s^(j)| on [0,1] <= sum of |coefficients| of the j-th derivative
        let mut best = Rat::one(); // j = 0: sup |s| = 1
        let mut cur: Vec<Rat> = coeffs.to_vec();
        for _ in 1..=r {
            let mut next = vec![Rat::zero(); cur.len().saturating_sub(1)];
            for (d, c) in cur.iter().enumerate().skip(1) {
                next[d - 1] = &Rat::from_int(d as i64) * c;
            }
            let sum: Rat = next.iter().fold(Rat::zero(), |acc, c| &acc + &c.abs());
            if sum > best {
                best = sum;
            }
            cur = next;
        }
        best
    }

    /// Exact evaluation at a rational point.
    pub fn eval_rat(&self, x: &Rat) -> Rat {
        if x <= &Rat::from_int(-1) {
            return Rat::zero();
        }
        if x >= &Rat::zero() {
            return Rat::one();
        }
        let t = x + &Rat::one();
        let mut acc = Rat::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * &t) + c;
        }
        acc
    }

    pub fn eval_big(&self, x: &BigFloat) -> BigFloat {
        let prec = x.precision();
        let neg_one = BigFloat::from_rat(&Rat::from_int(-1), prec);
        let zero = BigFloat::zero(prec);
        if *x <= neg_one {
            return zero;
        }
        let one = BigFloat::from_u64(1, prec);
        if *x >= zero {
            return one;
        }
        let t = x.add(&one);
        let mut acc = BigFloat::zero(prec);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(&t).add(&BigFloat::from_rat(c, prec));
        }
        acc
    }
}

/// Two-sided plateau bump: 1 on I, 0 outside the rho|I| collar of I.
pub fn bump_interval_eval(
    spec: &BumpSpec,
    rho: &Rat,
    interval: &RatInterval,
    x: &BigFloat,
) -> Result<BigFloat, PerturbError> {
    let width = interval.width();
    if !rho.is_positive() || !width.is_positive() {
        return Err(PerturbError::BumpDomain(rho.clone(), width));
    }
    let prec = x.precision();
    let scale = BigFloat::from_rat(&(rho * &width), prec);
    let a = BigFloat::from_rat(&interval.lo, prec);
    let b = BigFloat::from_rat(&interval.hi, prec);
    let left = spec.eval_big(&x.sub(&a).div(&scale));
    let right = spec.eval_big(&b.sub(x).div(&scale));
    Ok(left.add(&right).sub(&BigFloat::from_u64(1, prec)))
}

/// Exact rational version of the plateau bump, for the h-mode cross checks.
pub fn bump_interval_eval_rat(
    spec: &BumpSpec,
    rho: &Rat,
    interval: &RatInterval,
    x: &Rat,
) -> Result<Rat, PerturbError> {
    let width = interval.width();
    if !rho.is_positive() || !width.is_positive() {
        return Err(PerturbError::BumpDomain(rho.clone(), width));
    }
    let scale = rho * &width;
    let left = spec.eval_rat(&(&(x - &interval.lo) / &scale));
    let right = spec.eval_rat(&(&(&interval.hi - x) / &scale));
    Ok(&(&left + &right) - &Rat::one())
}

// ---------------------------------------------------------------------------
// Perturbation schedule
// ---------------------------------------------------------------------------

/// One strip: the cs-interval of a chain level, the shift applied there, and
/// the collared support of its bump.
#[derive(Clone, Debug, Serialize)]
pub struct Strip {
    /// Level index: the strip carries the fold landing on bridge k.
    pub level: usize,
    pub j_cs: RatInterval,
    pub t: Rat,
    pub support: RatInterval,
}

#[derive(Clone, Debug, Serialize)]
pub struct PerturbationSchedule {
    pub strips: Vec<Strip>,
    /// collar fraction 1/(3 tau_cs)
    pub rho_cs: Rat,
}

/// tau_cs = lambda_u^-1 / (1 - 2 lambda_u^-1), the gap-to-bridge ratio.
pub fn tau_cs(p: &ModelParams) -> Rat {
    let lui = p.lambda_u_inv();
    &lui / &(&Rat::one() - &(&Rat::from_int(2) * &lui))
}

impl PerturbationSchedule {
    /// Strips for levels 2..=max_k+1 from the chain records.
    pub fn from_chain(p: &ModelParams, chain: &ChainData) -> Result<Self, PerturbError> {
        let rho_cs = (&Rat::from_int(3) * &tau_cs(p)).recip().expect("tau_cs > 0");
        let mut strips = Vec::new();
        for rec in &chain.records {
            let level = rec.k + 1;
            let j_cs = chain.strip_cs(p, level)?;
            let collar = &rho_cs * &j_cs.width();
            let support = RatInterval::closed(&j_cs.lo - &collar, &j_cs.hi + &collar);
            strips.push(Strip { level, j_cs, t: rec.t_next.clone(), support });
        }
        Ok(PerturbationSchedule { strips, rho_cs })
    }

    pub fn find_strip(&self, z: &Rat) -> Option<&Strip> {
        self.strips.iter().find(|s| s.j_cs.contains_point(z))
    }

    pub fn find_support(&self, z: &Rat) -> Option<&Strip> {
        self.strips.iter().find(|s| s.support.contains_point(z))
    }

    /// Pairwise disjointness of the collared supports: guarantees the shear
    /// sum has at most one live term.
    pub fn supports_disjoint(&self) -> bool {
        for i in 0..self.strips.len() {
            for j in (i + 1)..self.strips.len() {
                if self.strips[i].support.intersects(&self.strips[j].support) {
                    return false;
                }
            }
        }
        true
    }
}

// ---------------------------------------------------------------------------
// h and g
// ---------------------------------------------------------------------------

/// Smooth evaluation of the shear h: z moves by
/// a2^-1 b_u(x) sum_k t_{k+1} b_ss(y) b_cs,k+1(z).
pub fn h_eval(
    p: &ModelParams,
    spec: &BumpSpec,
    sched: &PerturbationSchedule,
    pt: &[BigFloat; 3],
) -> Result<[BigFloat; 3], PerturbError> {
    let prec = pt[0].precision();
    let half = Rat::of(1, 2);
    let bu_interval = RatInterval::closed(&half - &p.delta, &half + &p.delta);
    let quarter = Rat::of(1, 4);
    let bu = bump_interval_eval(spec, &quarter, &bu_interval, &pt[0])?;
    let bss = bump_interval_eval(spec, &quarter, &RatInterval::unit(), &pt[1])?;
    let mut sum = BigFloat::zero(prec);
    for strip in &sched.strips {
        let bcs = bump_interval_eval(spec, &sched.rho_cs, &strip.j_cs, &pt[2])?;
        if !bcs.is_zero() {
            sum = sum.add(&BigFloat::from_rat(&strip.t, prec).mul(&bcs));
        }
    }
    let a2inv = BigFloat::from_rat(&p.a2.recip().expect("a2 > 0"), prec);
    let shift = a2inv.mul(&bu).mul(&bss.mul(&sum));
    Ok([pt[0].clone(), pt[1].clone(), pt[2].add(&shift)])
}

/// One exact step of g on the slabs, where g = f.
pub fn g_apply_exact(
    p: &ModelParams,
    sched: &PerturbationSchedule,
    pt: &Point3,
) -> Result<Point3, PerturbError> {
    match classify(p, pt) {
        Region::V0 | Region::V1 => Ok(apply_f(p, pt)?),
        Region::TangencyStrip if sched.find_strip(&pt.z).is_some() => {
            Err(PerturbError::NeedsDoubleStep(pt.clone()))
        }
        r => Err(PerturbError::Undefined(pt.clone(), r)),
    }
}

/// The exact two-step rule on a strip: translate the fold image by (t, 0, 0).
pub fn g2_apply_exact(
    p: &ModelParams,
    sched: &PerturbationSchedule,
    pt: &Point3,
) -> Result<Point3, PerturbError> {
    let half = Rat::of(1, 2);
    let in_x = (&pt.x - &half).abs() <= p.delta;
    if !in_x || !RatInterval::unit().contains_point(&pt.y) {
        return Err(PerturbError::Undefined(pt.clone(), classify(p, pt)));
    }
    match sched.find_strip(&pt.z) {
        Some(strip) => {
            let base = apply_f2_strip(p, pt)?;
            Ok(Point3::new(&strip.t + &base.x, base.y, base.z))
        }
        None => {
            if sched.find_support(&pt.z).is_some() {
                Err(PerturbError::Exactness(pt.clone()))
            } else {
                Err(PerturbError::Undefined(pt.clone(), classify(p, pt)))
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Norm bounds
// ---------------------------------------------------------------------------

/// The closed-form value of sum_k |t_{k+1}| / |J_{k+1}|^r:
/// |a2^r| lambda_u^{(n0+1)(r-1)+r} / (lambda_u^L (lambda_u^{1+L} - lambda_u^r)).
pub fn norm_series(p: &ModelParams, depth: usize, r: u32) -> Result<Rat, PerturbError> {
    if depth < r as usize {
        return Err(PerturbError::DivergentSeries(depth, r));
    }
    let lu = &p.lambda_u;
    let num = pow_rat(&p.a2.abs(), r as i64).unwrap()
        * pow_rat(lu, (p.n0 as i64 + 1) * (r as i64 - 1) + r as i64).unwrap();
    let den = pow_rat(lu, depth as i64).unwrap()
        * (pow_rat(lu, 1 + depth as i64).unwrap() - pow_rat(lu, r as i64).unwrap());
    Ok(&num / &den)
}

/// Rigorous upper bound for the C^r size of h - id: the series times the
/// product-rule prefactor from the three bump norms,
/// |a2|^-1 ((2/delta)^r ||b||) (4^r ||b||) ((3 tau_cs)^r ||b||).
pub fn norm_bound(
    p: &ModelParams,
    spec: &BumpSpec,
    depth: usize,
    r: u32,
) -> Result<Rat, PerturbError> {
    let series = norm_series(p, depth, r)?;
    let b = &spec.cr_norm_bound;
    let fu = &pow_rat(&(&Rat::from_int(2) / &p.delta), r as i64).unwrap() * b;
    let fss = &pow_rat(&Rat::from_int(4), r as i64).unwrap() * b;
    let fcs = &pow_rat(&(&Rat::from_int(3) * &tau_cs(p)), r as i64).unwrap() * b;
    let prefactor = &(&p.a2.abs().recip().unwrap() * &fu) * &(&fss * &fcs);
    Ok(&prefactor * &series)
}

/// Smallest depth L with norm_bound(L, r) strictly below eps.
pub fn choose_depth(p: &ModelParams, spec: &BumpSpec, r: u32, eps: &Rat) -> usize {
    assert!(eps.is_positive());
    let mut depth = r as usize;
    loop {
        if let Ok(b) = norm_bound(p, spec, depth, r) {
            if &b < eps {
                return depth;
            }
        }
        depth += 1;
    }
}
