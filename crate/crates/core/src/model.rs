//! The explicit 3-dimensional model: parameter set with validity checks, the
//! piecewise-affine skew product f on the two vertical slabs, the quadratic
//! fold f^2 on the central strip, region classification and projections.

use crate::bridges::{bridge_interval, Code};
use crate::numerics::{Rat, RatInterval};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("map not defined on region {0:?} at point {1}")]
    Region(Region, Point3),
    #[error("orbit left all defined regions at step {0}")]
    Escape(usize),
}

/// All model constants. `seed_code` is the itinerary of the outermost bridge
/// used by the chain construction; `sub_bridge_depth` is the extra descent
/// depth L; `bump_order` the smoothness order r of the perturbation bumps.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelParams {
    pub lambda_ss: Rat,
    pub lambda_cs0: Rat,
    pub lambda_cs1: Rat,
    pub lambda_u: Rat,
    pub a1: Rat,
    pub a2: Rat,
    pub a3: Rat,
    pub a4: Rat,
    pub delta: Rat,
    pub n0: usize,
    pub seed_code: Code,
    pub sub_bridge_depth: usize,
    pub bump_order: u32,
}

impl ModelParams {
    /// The reference parameter set shipped as the default configuration.
    pub fn reference() -> Self {
        ModelParams {
            lambda_ss: Rat::of(1, 20),
            lambda_cs0: Rat::of(11, 100),
            lambda_cs1: Rat::of(9, 10),
            lambda_u: Rat::from_int(3),
            a1: Rat::from_int(4),
            a2: Rat::one(),
            a3: Rat::of(1, 2),
            a4: Rat::one(),
            delta: Rat::of(1, 10),
            n0: 2,
            seed_code: Code::parse("01").unwrap(),
            sub_bridge_depth: 5,
            bump_order: 1,
        }
    }

    /// 1 - lambda_cs1, the translation part of the second contraction.
    pub fn beta(&self) -> Rat {
        Rat::one() - self.lambda_cs1.clone()
    }

    pub fn lambda_u_inv(&self) -> Rat {
        self.lambda_u.recip().expect("lambda_u > 0")
    }

    /// Saddle fixed point at the origin.
    pub fn fixed_point_p(&self) -> Point3 {
        Point3::new(Rat::zero(), Rat::zero(), Rat::zero())
    }

    /// The other saddle fixed point (lambda_u/(1+lambda_u), 1/(1+lambda_ss), 1).
    pub fn fixed_point_q(&self) -> Point3 {
        let one = Rat::one();
        Point3::new(
            &self.lambda_u / &(&one + &self.lambda_u),
            (&one + &self.lambda_ss).recip().unwrap(),
            one,
        )
    }
}

#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Point3 {
    pub x: Rat,
    pub y: Rat,
    pub z: Rat,
}

impl Point3 {
    pub fn new(x: Rat, y: Rat, z: Rat) -> Self {
        Point3 { x, y, z }
    }
}

impl fmt::Display for Point3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

impl fmt::Debug for Point3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

/// Phase-space regions. Boundary points resolve with priority
/// V0/V1, then the tangency strip, then the remaining gap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    V0,
    V1,
    TangencyStrip,
    GapOther,
    Outside,
}

pub fn classify(p: &ModelParams, pt: &Point3) -> Region {
    let unit = RatInterval::unit();
    if !unit.contains_point(&pt.y) || !unit.contains_point(&pt.z) || !unit.contains_point(&pt.x) {
        return Region::Outside;
    }
    let lui = p.lambda_u_inv();
    if pt.x <= lui {
        return Region::V0;
    }
    if pt.x >= &Rat::one() - &lui {
        return Region::V1;
    }
    let half = Rat::of(1, 2);
    if (&pt.x - &half).abs() <= p.delta {
        return Region::TangencyStrip;
    }
    Region::GapOther
}

/// One step of the unperturbed skew product; defined on the two slabs only.
pub fn apply_f(p: &ModelParams, pt: &Point3) -> Result<Point3, ModelError> {
    match classify(p, pt) {
        Region::V0 => Ok(Point3::new(
            &p.lambda_u * &pt.x,
            &p.lambda_ss * &pt.y,
            &p.lambda_cs0 * &pt.z,
        )),
        Region::V1 => Ok(Point3::new(
            &p.lambda_u * &(&Rat::one() - &pt.x),
            &Rat::one() - &(&p.lambda_ss * &pt.y),
            &p.lambda_cs1 * &pt.z + p.beta(),
        )),
        r => Err(ModelError::Region(r, pt.clone())),
    }
}

/// Whether a point lies in the delta-strip where the fold is defined.
pub fn in_tangency_strip(p: &ModelParams, pt: &Point3) -> bool {
    let half = Rat::of(1, 2);
    let unit = RatInterval::unit();
    (&pt.x - &half).abs() <= p.delta && unit.contains_point(&pt.y) && unit.contains_point(&pt.z)
}

/// The double step through the fold:
/// (x,y,z) -> (-a1 (x-1/2)^2 + a2 z, a3 (y-1/2) + 1/2, a4 (x-1/2) + 1/2).
pub fn apply_f2_strip(p: &ModelParams, pt: &Point3) -> Result<Point3, ModelError> {
    if !in_tangency_strip(p, pt) {
        return Err(ModelError::Region(classify(p, pt), pt.clone()));
    }
    let half = Rat::of(1, 2);
    let dx = &pt.x - &half;
    Ok(Point3::new(
        -(&p.a1 * &(&dx * &dx)) + &p.a2 * &pt.z,
        &p.a3 * &(&pt.y - &half) + half.clone(),
        &p.a4 * &dx + half,
    ))
}

/// Projected (x,z)-dynamics over n steps: slab steps advance one at a time,
/// the strip consumes two. Errors out (with the step index) if the orbit
/// reaches a point where neither applies.
pub fn project_phi_n(
    p: &ModelParams,
    x: &Rat,
    z: &Rat,
    n: usize,
) -> Result<(Rat, Rat), ModelError> {
    let mut x = x.clone();
    let mut z = z.clone();
    let half = Rat::of(1, 2);
    let lui = p.lambda_u_inv();
    let mut i = 0;
    while i < n {
        let unit = RatInterval::unit();
        if !unit.contains_point(&x) || !unit.contains_point(&z) {
            return Err(ModelError::Escape(i));
        }
        if x <= lui {
            x = &p.lambda_u * &x;
            z = &p.lambda_cs0 * &z;
            i += 1;
        } else if x >= &Rat::one() - &lui {
            x = &p.lambda_u * &(&Rat::one() - &x);
            z = &p.lambda_cs1 * &z + p.beta();
            i += 1;
        } else if (&x - &half).abs() <= p.delta && n - i >= 2 {
            let dx = &x - &half;
            let nx = -(&p.a1 * &(&dx * &dx)) + &p.a2 * &z;
            z = &p.a4 * &dx + half.clone();
            x = nx;
            i += 2;
        } else {
            return Err(ModelError::Escape(i));
        }
    }
    Ok((x, z))
}

/// Constraint check with both evaluated sides, as data.
#[derive(Clone, Debug, Serialize)]
pub struct ConstraintCheck {
    pub name: String,
    pub passed: bool,
    pub lhs: String,
    pub rhs: String,
}

impl ConstraintCheck {
    fn cmp(name: &str, lhs: &Rat, rhs: &Rat, passed: bool) -> Self {
        ConstraintCheck {
            name: name.to_string(),
            passed,
            lhs: lhs.to_string(),
            rhs: rhs.to_string(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<ConstraintCheck>,
    pub all_passed: bool,
}

/// Evaluates every parameter constraint; failures are data, not errors.
pub fn validate_params(p: &ModelParams) -> ValidationReport {
    let mut checks = Vec::new();
    let one = Rat::one();
    let half = Rat::of(1, 2);
    let two = Rat::from_int(2);

    let lt = |n: &str, a: &Rat, b: &Rat| ConstraintCheck::cmp(n, a, b, a < b);
    let gt = |n: &str, a: &Rat, b: &Rat| ConstraintCheck::cmp(n, a, b, a > b);

    checks.push(lt("lambda_ss < lambda_cs0", &p.lambda_ss, &p.lambda_cs0));
    checks.push(lt("lambda_cs0 < 1/2", &p.lambda_cs0, &half));
    checks.push(lt("1/2 < lambda_cs1", &half, &p.lambda_cs1));
    checks.push(lt("lambda_cs1 < 1", &p.lambda_cs1, &one));
    let cs_sum = &p.lambda_cs0 + &p.lambda_cs1;
    checks.push(gt("lambda_cs0 + lambda_cs1 > 1", &cs_sum, &one));
    checks.push(gt("lambda_u > 2", &p.lambda_u, &two));
    checks.push(gt("lambda_ss > 0", &p.lambda_ss, &Rat::zero()));

    let pdc = &(&p.lambda_cs0 * &p.lambda_cs1) * &(&p.lambda_u * &p.lambda_u);
    checks.push(lt(
        "partial dissipativity: lambda_cs0*lambda_cs1*lambda_u^2 < 1",
        &pdc,
        &one,
    ));

    let fold_floor = (&one - &(&two * &p.lambda_u_inv())).recip();
    match fold_floor {
        Ok(ff) => checks.push(gt("a1 > (1 - 2/lambda_u)^-1", &p.a1, &ff)),
        Err(_) => checks.push(ConstraintCheck {
            name: "a1 > (1 - 2/lambda_u)^-1".into(),
            passed: false,
            lhs: p.a1.to_string(),
            rhs: "undefined (lambda_u = 2)".into(),
        }),
    }
    checks.push(gt("a2 > 0", &p.a2, &Rat::zero()));
    checks.push(gt("a4 > 0", &p.a4, &Rat::zero()));
    checks.push(ConstraintCheck {
        name: "a3 != 0".into(),
        passed: !p.a3.is_zero(),
        lhs: p.a3.to_string(),
        rhs: "0".into(),
    });
    let ss_room = &one - &(&two * &p.lambda_ss);
    checks.push(lt("|a3| < 1 - 2*lambda_ss", &p.a3.abs(), &ss_room));

    let beta = p.beta();
    checks.push(lt(
        "superposition: beta = 1 - lambda_cs1 < lambda_cs0",
        &beta,
        &p.lambda_cs0,
    ));

    checks.push(gt("delta > 0", &p.delta, &Rat::zero()));
    let delta_cap = &Rat::of(1, 3) * &(&one - &(&two * &p.lambda_u_inv()));
    checks.push(lt("delta < (1/3)(1 - 2/lambda_u)", &p.delta, &delta_cap));

    checks.push(ConstraintCheck {
        name: "a1 is a perfect rational square".into(),
        passed: p.a1.sqrt_exact().is_some(),
        lhs: p.a1.to_string(),
        rhs: "square of a rational".into(),
    });

    checks.push(ConstraintCheck {
        name: "seed code length equals n0".into(),
        passed: p.seed_code.len() == p.n0,
        lhs: p.seed_code.len().to_string(),
        rhs: p.n0.to_string(),
    });
    checks.push(ConstraintCheck {
        name: "sub-bridge depth L >= 1".into(),
        passed: p.sub_bridge_depth >= 1,
        lhs: p.sub_bridge_depth.to_string(),
        rhs: "1".into(),
    });
    checks.push(ConstraintCheck {
        name: "bump order r >= 1".into(),
        passed: p.bump_order >= 1,
        lhs: p.bump_order.to_string(),
        rhs: "1".into(),
    });

    let seed = bridge_interval(p, &p.seed_code);
    let seed_ok = seed.lo > Rat::zero() && seed.hi < p.a2;
    checks.push(ConstraintCheck {
        name: "seed bridge inside (0, a2)".into(),
        passed: seed_ok,
        lhs: seed.to_string(),
        rhs: format!("(0, {})", p.a2),
    });

    let all_passed = checks.iter().all(|c| c.passed);
    ValidationReport { checks, all_passed }
}

/// Periodic orbit of the unperturbed skew product with the given itinerary:
/// the maps are affine in each coordinate, so the cycle is the fixed point of
/// an affine composition. Returns the orbit points in itinerary order.
pub fn periodic_orbit(p: &ModelParams, code: &Code) -> Vec<Point3> {
    assert!(!code.is_empty());
    // compose (a, b) meaning t -> a t + b, per coordinate
    let mut ax = Rat::one();
    let mut bx = Rat::zero();
    let mut ay = Rat::one();
    let mut by = Rat::zero();
    let mut az = Rat::one();
    let mut bz = Rat::zero();
    for s in code.symbols() {
        if s == 0 {
            // x -> lu x; y -> lss y; z -> lcs0 z
            ax = &p.lambda_u * &ax;
            bx = &p.lambda_u * &bx;
            ay = &p.lambda_ss * &ay;
            by = &p.lambda_ss * &by;
            az = &p.lambda_cs0 * &az;
            bz = &p.lambda_cs0 * &bz;
        } else {
            // x -> lu (1 - x); y -> 1 - lss y; z -> lcs1 z + beta
            ax = -(&p.lambda_u * &ax);
            bx = &p.lambda_u * &(&Rat::one() - &bx);
            ay = -(&p.lambda_ss * &ay);
            by = &Rat::one() - &(&p.lambda_ss * &by);
            az = &p.lambda_cs1 * &az;
            bz = &p.lambda_cs1 * &bz + p.beta();
        }
    }
    let solve = |a: &Rat, b: &Rat| -> Rat { b / &(&Rat::one() - a) };
    let mut pt = Point3::new(solve(&ax, &bx), solve(&ay, &by), solve(&az, &bz));
    let mut orbit = vec![pt.clone()];
    for _ in 1..code.len() {
        pt = apply_f(p, &pt).expect("periodic orbit stays in the slabs");
        orbit.push(pt.clone());
    }
    orbit
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rat {
        Rat::of(n, d)
    }

    #[test]
    fn reference_params_all_pass() {
        let rep = validate_params(&ModelParams::reference());
        for c in &rep.checks {
            assert!(c.passed, "failed: {} ({} vs {})", c.name, c.lhs, c.rhs);
        }
        assert!(rep.all_passed);
    }

    #[test]
    fn pdc_failure_detected() {
        let mut p = ModelParams::reference();
        p.lambda_cs0 = r(1, 5);
        let rep = validate_params(&p);
        let c = rep
            .checks
            .iter()
            .find(|c| c.name.starts_with("partial dissipativity"))
            .unwrap();
        assert!(!c.passed);
        assert_eq!(c.lhs, "81/50");
    }

    #[test]
    fn strict_ordering_failure_detected() {
        let mut p = ModelParams::reference();
        p.lambda_ss = r(11, 100);
        let rep = validate_params(&p);
        let c = rep.checks.iter().find(|c| c.name.starts_with("lambda_ss <")).unwrap();
        assert!(!c.passed);
    }

    #[test]
    fn classify_examples() {
        let p = ModelParams::reference();
        let origin = Point3::new(Rat::zero(), Rat::zero(), Rat::zero());
        assert_eq!(classify(&p, &origin), Region::V0);
        let mid = Point3::new(r(1, 2), Rat::zero(), Rat::zero());
        assert_eq!(classify(&p, &mid), Region::TangencyStrip);
        let out = Point3::new(Rat::from_int(2), Rat::zero(), Rat::zero());
        assert_eq!(classify(&p, &out), Region::Outside);
        let gap = Point3::new(r(2, 5) - r(1, 100), Rat::zero(), Rat::zero());
        assert_eq!(classify(&p, &gap), Region::GapOther);
    }

    #[test]
    fn fixed_points_are_fixed() {
        let p = ModelParams::reference();
        let pp = p.fixed_point_p();
        assert_eq!(apply_f(&p, &pp).unwrap(), pp);
        let q = p.fixed_point_q();
        assert_eq!(q, Point3::new(r(3, 4), r(20, 21), Rat::one()));
        assert_eq!(apply_f(&p, &q).unwrap(), q);
    }

    #[test]
    fn apply_f_v0_branch() {
        let p = ModelParams::reference();
        let pt = Point3::new(r(1, 3), Rat::one(), Rat::one());
        let img = apply_f(&p, &pt).unwrap();
        assert_eq!(img, Point3::new(Rat::one(), r(1, 20), r(11, 100)));
    }

    #[test]
    fn apply_f_gap_is_error() {
        let p = ModelParams::reference();
        let pt = Point3::new(r(1, 2), Rat::zero(), Rat::zero());
        assert!(apply_f(&p, &pt).is_err());
    }

    #[test]
    fn f2_strip_examples() {
        let p = ModelParams::reference();
        let x = apply_f2_strip(&p, &Point3::new(r(1, 2), Rat::zero(), Rat::zero())).unwrap();
        assert_eq!(x, Point3::new(Rat::zero(), r(1, 4), r(1, 2)));
        // x-image depends on z only along the fold line
        for y in [Rat::zero(), r(1, 3), Rat::one()] {
            let img = apply_f2_strip(&p, &Point3::new(r(1, 2), y, r(2, 7))).unwrap();
            assert_eq!(img.x, r(2, 7));
        }
        let img =
            apply_f2_strip(&p, &Point3::new(r(1, 2) + r(1, 10), r(1, 2), Rat::zero())).unwrap();
        assert_eq!(img, Point3::new(r(-4, 100), r(1, 2), r(1, 2) + r(1, 10)));
    }

    #[test]
    fn phi_projection_examples() {
        let p = ModelParams::reference();
        // the fold sends (1/2, z) to (a2 z, 1/2) in two steps
        let (x, z) = project_phi_n(&p, &r(1, 2), &r(3, 7), 2).unwrap();
        assert_eq!((x, z), (r(3, 7), r(1, 2)));
        let (x, z) = project_phi_n(&p, &Rat::zero(), &Rat::zero(), 17).unwrap();
        assert_eq!((x, z), (Rat::zero(), Rat::zero()));
        let (x, z) = project_phi_n(&p, &r(1, 9), &Rat::one(), 2).unwrap();
        assert_eq!((x, z), (Rat::one(), r(121, 10000)));
    }

    #[test]
    fn skew_product_structure() {
        let p = ModelParams::reference();
        // y-image never depends on x or z; (x,z)-images never depend on y
        let samples = [
            (r(1, 5), r(1, 3), r(2, 5)),
            (r(1, 7), r(9, 10), r(1, 2)),
            (r(8, 9), r(1, 4), r(3, 4)),
        ];
        for (x, y, z) in samples {
            let a = apply_f(&p, &Point3::new(x.clone(), y.clone(), z.clone())).unwrap();
            let b = apply_f(&p, &Point3::new(x.clone(), r(17, 19), z.clone())).unwrap();
            assert_eq!(a.x, b.x);
            assert_eq!(a.z, b.z);
            let c = apply_f(&p, &Point3::new(x, y, r(5, 11))).unwrap();
            assert_eq!(a.y, c.y);
        }
    }

    #[test]
    fn slab_images_avoid_fold_image_in_y() {
        let p = ModelParams::reference();
        // f(V0) and f(V1) have y in [0, lss] u [1-lss, 1]; the fold image keeps
        // y strictly inside (lss, 1-lss) when |a3| < 1 - 2 lss.
        let corners = [Rat::zero(), Rat::one()];
        for y in &corners {
            let img = apply_f2_strip(&p, &Point3::new(r(1, 2), y.clone(), r(1, 2))).unwrap();
            assert!(img.y > p.lambda_ss && img.y < &Rat::one() - &p.lambda_ss);
        }
    }

    #[test]
    fn periodic_orbit_01() {
        let p = ModelParams::reference();
        let orbit = periodic_orbit(&p, &Code::parse("01").unwrap());
        assert_eq!(orbit[0], Point3::new(r(3, 10), r(400, 401), r(100, 901)));
        assert_eq!(orbit[1], Point3::new(r(9, 10), r(20, 401), r(11, 901)));
        let back = apply_f(&p, &orbit[1]).unwrap();
        assert_eq!(back, orbit[0]);
    }
}
