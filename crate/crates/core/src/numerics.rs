//! Exact rational arithmetic, closed intervals, axis-aligned boxes, and a
//! mantissa-precision-configurable binary float for long orbit runs.
//!
//! Every structural check in this crate is done in `Rat`; `BigFloat` exists
//! only for orbit statistics where exact denominators would grow without bound.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum NumericsError {
    #[error("zero base with negative exponent")]
    ZeroToNegativePower,
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("invalid rational literal: {0}")]
    BadLiteral(String),
    #[error("interval endpoints out of order: {0} > {1}")]
    BadInterval(Rat, Rat),
}

/// Arbitrary-precision rational, always in lowest terms with positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rat(BigRational);

impl Rat {
    pub fn new(num: i64, den: i64) -> Result<Self, NumericsError> {
        if den == 0 {
            return Err(NumericsError::ZeroDenominator);
        }
        Ok(Rat(BigRational::new(BigInt::from(num), BigInt::from(den))))
    }

    /// Panicking constructor for literals known to be valid.
    pub fn of(num: i64, den: i64) -> Self {
        Self::new(num, den).expect("nonzero denominator")
    }

    pub fn from_int(n: i64) -> Self {
        Rat(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Rat(BigRational::from_integer(n))
    }

    pub fn from_ratio(num: BigInt, den: BigInt) -> Result<Self, NumericsError> {
        if den.is_zero() {
            return Err(NumericsError::ZeroDenominator);
        }
        Ok(Rat(BigRational::new(num, den)))
    }

    pub fn zero() -> Self {
        Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        Rat(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn abs(&self) -> Self {
        Rat(self.0.abs())
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn recip(&self) -> Result<Self, NumericsError> {
        if self.is_zero() {
            return Err(NumericsError::ZeroDenominator);
        }
        Ok(Rat(self.0.recip()))
    }

    /// Exact integer power; negative exponents require a nonzero base.
    pub fn pow_int(&self, exp: i64) -> Result<Self, NumericsError> {
        if self.is_zero() && exp < 0 {
            return Err(NumericsError::ZeroToNegativePower);
        }
        let e32 = i32::try_from(exp.unsigned_abs().min(i32::MAX as u64)).unwrap();
        let p = self.0.pow(e32);
        Ok(if exp < 0 { Rat(p.recip()) } else { Rat(p) })
    }

    /// Exact square root when self is a perfect square of a rational.
    pub fn sqrt_exact(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let (num, den) = (self.0.numer().magnitude(), self.0.denom().magnitude());
        let sn = num.sqrt();
        let sd = den.sqrt();
        if &sn * &sn == *num && &sd * &sd == *den {
            Some(Rat(BigRational::new(
                BigInt::from_biguint(Sign::Plus, sn),
                BigInt::from_biguint(Sign::Plus, sd),
            )))
        } else {
            None
        }
    }

    pub fn to_f64(&self) -> f64 {
        // BigRational::to_f64 handles over/underflow by ±inf/0.
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// log2 estimate accurate to ~1e-9, usable far outside f64 range.
    pub fn log2_approx(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        let n = self.0.numer().magnitude();
        let d = self.0.denom().magnitude();
        fn l2(x: &BigUint) -> f64 {
            let bits = x.bits();
            if bits <= 64 {
                (x.to_u64().unwrap() as f64).log2()
            } else {
                let shift = bits - 64;
                let top = (x >> shift).to_u64().unwrap();
                (top as f64).log2() + shift as f64
            }
        }
        l2(n) - l2(d)
    }

    pub fn floor_bigint(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    pub fn ceil_bigint(&self) -> BigInt {
        self.0.ceil().to_integer()
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl FromStr for Rat {
    type Err = NumericsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || NumericsError::BadLiteral(s.to_string());
        match s.split_once('/') {
            Some((n, d)) => {
                let num = BigInt::from_str(n.trim()).map_err(|_| bad())?;
                let den = BigInt::from_str(d.trim()).map_err(|_| bad())?;
                if den.is_zero() {
                    return Err(NumericsError::ZeroDenominator);
                }
                Ok(Rat(BigRational::new(num, den)))
            }
            None => {
                let num = BigInt::from_str(s.trim()).map_err(|_| bad())?;
                Ok(Rat(BigRational::from_integer(num)))
            }
        }
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Rat::from_str(&s).map_err(serde::de::Error::custom)
    }
}

macro_rules! rat_binop {
    ($trait:ident, $m:ident, $op:tt) => {
        impl $trait for Rat {
            type Output = Rat;
            fn $m(self, rhs: Rat) -> Rat { Rat(self.0 $op rhs.0) }
        }
        impl<'a> $trait<&'a Rat> for &'a Rat {
            type Output = Rat;
            fn $m(self, rhs: &'a Rat) -> Rat { Rat(&self.0 $op &rhs.0) }
        }
        impl<'a> $trait<&'a Rat> for Rat {
            type Output = Rat;
            fn $m(self, rhs: &'a Rat) -> Rat { Rat(self.0 $op &rhs.0) }
        }
        impl<'a> $trait<Rat> for &'a Rat {
            type Output = Rat;
            fn $m(self, rhs: Rat) -> Rat { Rat(&self.0 $op rhs.0) }
        }
    };
}
rat_binop!(Add, add, +);
rat_binop!(Sub, sub, -);
rat_binop!(Mul, mul, *);

impl Div for Rat {
    type Output = Rat;
    fn div(self, rhs: Rat) -> Rat {
        assert!(!rhs.is_zero(), "division by zero rational");
        Rat(self.0 / rhs.0)
    }
}
impl<'a> Div<&'a Rat> for &'a Rat {
    type Output = Rat;
    fn div(self, rhs: &'a Rat) -> Rat {
        assert!(!rhs.is_zero(), "division by zero rational");
        Rat(&self.0 / &rhs.0)
    }
}
impl<'a> Div<&'a Rat> for Rat {
    type Output = Rat;
    fn div(self, rhs: &'a Rat) -> Rat {
        assert!(!rhs.is_zero(), "division by zero rational");
        Rat(self.0 / &rhs.0)
    }
}
impl<'a> Div<Rat> for &'a Rat {
    type Output = Rat;
    fn div(self, rhs: Rat) -> Rat {
        assert!(!rhs.is_zero(), "division by zero rational");
        Rat(&self.0 / rhs.0)
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}
impl<'a> Neg for &'a Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-&self.0)
    }
}

/// Exact power of a rational. Negative exponent on a zero base is a domain error.
pub fn pow_rat(base: &Rat, exp: i64) -> Result<Rat, NumericsError> {
    base.pow_int(exp)
}

/// Closed rational interval; `open` marks intervals whose interior is meant
/// (u-gaps), consulted only by the strict containment checks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatInterval {
    pub lo: Rat,
    pub hi: Rat,
    #[serde(default, skip_serializing_if = "is_false")]
    pub open: bool,
}

fn is_false(b: &bool) -> bool {
    !b
}

impl RatInterval {
    pub fn new(lo: Rat, hi: Rat) -> Result<Self, NumericsError> {
        if lo > hi {
            return Err(NumericsError::BadInterval(lo, hi));
        }
        Ok(RatInterval { lo, hi, open: false })
    }

    pub fn closed(lo: Rat, hi: Rat) -> Self {
        Self::new(lo, hi).expect("interval endpoints in order")
    }

    pub fn open(lo: Rat, hi: Rat) -> Self {
        let mut iv = Self::closed(lo, hi);
        iv.open = true;
        iv
    }

    pub fn point(p: Rat) -> Self {
        RatInterval { lo: p.clone(), hi: p, open: false }
    }

    pub fn unit() -> Self {
        Self::closed(Rat::zero(), Rat::one())
    }

    pub fn width(&self) -> Rat {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Rat {
        (&self.lo + &self.hi) / Rat::from_int(2)
    }

    pub fn contains_point(&self, p: &Rat) -> bool {
        if self.open {
            &self.lo < p && p < &self.hi
        } else {
            &self.lo <= p && p <= &self.hi
        }
    }

    /// Closed containment: every point of `inner` lies in `self`.
    pub fn contains(&self, inner: &RatInterval) -> bool {
        self.lo <= inner.lo && inner.hi <= self.hi
    }

    /// Proper-subset containment (strict somewhere).
    pub fn contains_strictly(&self, inner: &RatInterval) -> bool {
        self.contains(inner) && (self.lo < inner.lo || inner.hi < self.hi)
    }

    /// Containment in the interior: both inequalities strict.
    pub fn contains_in_interior(&self, inner: &RatInterval) -> bool {
        self.lo < inner.lo && inner.hi < self.hi
    }

    pub fn intersects(&self, other: &RatInterval) -> bool {
        !(self.hi < other.lo || other.hi < self.lo)
    }

    pub fn intersect(&self, other: &RatInterval) -> Option<RatInterval> {
        let lo = self.lo.clone().max(other.lo.clone());
        let hi = self.hi.clone().min(other.hi.clone());
        if lo <= hi {
            Some(RatInterval::closed(lo, hi))
        } else {
            None
        }
    }

    /// Image under the affine map u -> a*u + b (exact; handles a < 0).
    pub fn affine_image(&self, a: &Rat, b: &Rat) -> RatInterval {
        let p = a * &self.lo + b.clone();
        let q = a * &self.hi + b.clone();
        if p <= q {
            RatInterval::closed(p, q)
        } else {
            RatInterval::closed(q, p)
        }
    }

    pub fn scale(&self, a: &Rat) -> RatInterval {
        self.affine_image(a, &Rat::zero())
    }
}

impl fmt::Display for RatInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (l, r) = if self.open { ("(", ")") } else { ("[", "]") };
        write!(f, "{}{}, {}{}", l, self.lo, self.hi, r)
    }
}

/// Axis-aligned box in R^3.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Box3 {
    pub x: RatInterval,
    pub y: RatInterval,
    pub z: RatInterval,
}

impl Box3 {
    pub fn new(x: RatInterval, y: RatInterval, z: RatInterval) -> Self {
        Box3 { x, y, z }
    }

    pub fn unit() -> Self {
        Box3::new(RatInterval::unit(), RatInterval::unit(), RatInterval::unit())
    }

    pub fn contains(&self, inner: &Box3) -> bool {
        self.x.contains(&inner.x) && self.y.contains(&inner.y) && self.z.contains(&inner.z)
    }

    pub fn contains_point(&self, x: &Rat, y: &Rat, z: &Rat) -> bool {
        self.x.contains_point(x) && self.y.contains_point(y) && self.z.contains_point(z)
    }

    /// max-metric diameter.
    pub fn diam(&self) -> Rat {
        self.x.width().max(self.y.width()).max(self.z.width())
    }
}

/// Containment check used by the wandering-domain verification.
pub fn box_contains(outer: &Box3, inner: &Box3) -> bool {
    outer.contains(inner)
}

/// Closed interval containment as a free function (CLI surface).
pub fn interval_contains(outer: &RatInterval, inner: &RatInterval) -> bool {
    outer.contains(inner)
}

// ---------------------------------------------------------------------------
// BigFloat
// ---------------------------------------------------------------------------

/// Sign-magnitude binary float with per-value mantissa precision.
///
/// value = sign * mant * 2^exp, with mant normalized to at most `prec` bits.
/// All operations truncate toward zero, so each op's relative error is below
/// 2^(1-prec). Comparison is exact.
#[derive(Clone, Debug)]
pub struct BigFloat {
    sign: i8, // -1, 0, +1
    mant: BigUint,
    exp: i64,
    prec: u32,
}

impl BigFloat {
    pub fn zero(prec: u32) -> Self {
        BigFloat { sign: 0, mant: BigUint::zero(), exp: 0, prec }
    }

    pub fn from_u64(v: u64, prec: u32) -> Self {
        if v == 0 {
            return Self::zero(prec);
        }
        let mut f = BigFloat { sign: 1, mant: BigUint::from(v), exp: 0, prec };
        f.normalize();
        f
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn from_rat(r: &Rat, prec: u32) -> Self {
        if r.is_zero() {
            return Self::zero(prec);
        }
        let sign = if r.is_negative() { -1 } else { 1 };
        let num = r.numer().magnitude().clone();
        let den = r.denom().magnitude().clone();
        // shift numerator so the quotient carries prec+2 significant bits
        let nb = num.bits() as i64;
        let db = den.bits() as i64;
        let shift = (prec as i64 + 2 + db - nb).max(0) as u64;
        let q = (num << shift) / den;
        let mut f = BigFloat { sign, mant: q, exp: -(shift as i64), prec };
        f.normalize();
        f
    }

    /// Exact value as a rational (the stored value, not the ideal one).
    pub fn to_rat(&self) -> Rat {
        if self.sign == 0 {
            return Rat::zero();
        }
        let m = BigInt::from_biguint(if self.sign > 0 { Sign::Plus } else { Sign::Minus }, self.mant.clone());
        if self.exp >= 0 {
            Rat::from_bigint(m << self.exp as u64)
        } else {
            Rat::from_ratio(m, BigInt::one() << (-self.exp) as u64).unwrap()
        }
    }

    fn normalize(&mut self) {
        if self.mant.is_zero() {
            self.sign = 0;
            self.exp = 0;
            return;
        }
        let bits = self.mant.bits();
        if bits > self.prec as u64 {
            let drop = bits - self.prec as u64;
            self.mant = &self.mant >> drop;
            self.exp += drop as i64;
        }
        // strip trailing zeros to keep mantissas small
        let tz = self.mant.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            self.mant = &self.mant >> tz;
            self.exp += tz as i64;
        }
    }

    /// Position of the most significant bit (floor(log2 |x|) + 1); 0 for zero.
    fn msb(&self) -> i64 {
        if self.sign == 0 {
            i64::MIN
        } else {
            self.mant.bits() as i64 + self.exp
        }
    }

    pub fn neg(&self) -> Self {
        let mut r = self.clone();
        r.sign = -r.sign;
        r
    }

    pub fn abs(&self) -> Self {
        let mut r = self.clone();
        if r.sign != 0 {
            r.sign = 1;
        }
        r
    }

    pub fn add(&self, other: &Self) -> Self {
        let prec = self.prec.max(other.prec);
        if self.sign == 0 {
            let mut r = other.clone();
            r.prec = prec;
            return r;
        }
        if other.sign == 0 {
            let mut r = self.clone();
            r.prec = prec;
            return r;
        }
        // if magnitudes are too far apart the smaller cannot affect prec bits
        let gap = self.msb() - other.msb();
        if gap > prec as i64 + 4 {
            let mut r = self.clone();
            r.prec = prec;
            return r;
        }
        if gap < -(prec as i64 + 4) {
            let mut r = other.clone();
            r.prec = prec;
            return r;
        }
        let exp = self.exp.min(other.exp);
        let ma = BigInt::from_biguint(
            if self.sign > 0 { Sign::Plus } else { Sign::Minus },
            &self.mant << (self.exp - exp) as u64,
        );
        let mb = BigInt::from_biguint(
            if other.sign > 0 { Sign::Plus } else { Sign::Minus },
            &other.mant << (other.exp - exp) as u64,
        );
        let s = ma + mb;
        let (sign, mag) = match s.sign() {
            Sign::Plus => (1, s.magnitude().clone()),
            Sign::Minus => (-1, s.magnitude().clone()),
            Sign::NoSign => (0, BigUint::zero()),
        };
        let mut r = BigFloat { sign, mant: mag, exp, prec };
        r.normalize();
        r
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let prec = self.prec.max(other.prec);
        if self.sign == 0 || other.sign == 0 {
            return Self::zero(prec);
        }
        let mut r = BigFloat {
            sign: self.sign * other.sign,
            mant: &self.mant * &other.mant,
            exp: self.exp + other.exp,
            prec,
        };
        r.normalize();
        r
    }

    pub fn div(&self, other: &Self) -> Self {
        let prec = self.prec.max(other.prec);
        assert!(other.sign != 0, "BigFloat division by zero");
        if self.sign == 0 {
            return Self::zero(prec);
        }
        let nb = self.mant.bits() as i64;
        let db = other.mant.bits() as i64;
        let shift = (prec as i64 + 2 + db - nb).max(0) as u64;
        let q = (&self.mant << shift) / &other.mant;
        let mut r = BigFloat {
            sign: self.sign * other.sign,
            mant: q,
            exp: self.exp - other.exp - shift as i64,
            prec,
        };
        r.normalize();
        r
    }

    pub fn cmp_val(&self, other: &Self) -> Ordering {
        if self.sign != other.sign {
            return self.sign.cmp(&other.sign);
        }
        if self.sign == 0 {
            return Ordering::Equal;
        }
        let mag = {
            let ma = self.msb();
            let mb = other.msb();
            if ma != mb {
                ma.cmp(&mb)
            } else {
                let exp = self.exp.min(other.exp);
                let a = &self.mant << (self.exp - exp) as u64;
                let b = &other.mant << (other.exp - exp) as u64;
                a.cmp(&b)
            }
        };
        if self.sign > 0 {
            mag
        } else {
            mag.reverse()
        }
    }

    pub fn to_f64(&self) -> f64 {
        if self.sign == 0 {
            return 0.0;
        }
        let bits = self.mant.bits();
        let take = bits.min(53);
        let top = (&self.mant >> (bits - take)).to_u64().unwrap() as f64;
        let e = self.exp as f64 + (bits - take) as f64;
        self.sign as f64 * top * e.exp2()
    }

    /// Decimal rendering with `sig` significant digits, annotated with the
    /// precision: "-1.234e-5@256".
    pub fn to_annotated_string(&self, sig: usize) -> String {
        format!("{}@{}", self.to_decimal_string(sig), self.prec)
    }

    pub fn to_decimal_string(&self, sig: usize) -> String {
        if self.sign == 0 {
            return "0".to_string();
        }
        let sig = sig.max(1);
        // e10 ~ floor(log10 |x|)
        let log10 = (self.msb() - 1) as f64 * std::f64::consts::LOG10_2;
        let mut e10 = log10.floor() as i64;
        // digits = round(|x| * 10^(sig-1-e10))
        let mut digits = self.scaled_digits(sig as i64 - 1 - e10);
        let want = BigUint::from(10u32).pow(sig as u32);
        while digits >= want {
            e10 += 1;
            digits = self.scaled_digits(sig as i64 - 1 - e10);
        }
        let low = BigUint::from(10u32).pow(sig as u32 - 1);
        while digits < low {
            e10 -= 1;
            digits = self.scaled_digits(sig as i64 - 1 - e10);
        }
        let ds = digits.to_string();
        let (head, tail) = ds.split_at(1);
        let sign = if self.sign < 0 { "-" } else { "" };
        if tail.is_empty() {
            format!("{}{}e{}", sign, head, e10)
        } else {
            format!("{}{}.{}e{}", sign, head, tail, e10)
        }
    }

    /// floor(|x| * 10^scale) as an integer (scale may be negative).
    fn scaled_digits(&self, scale: i64) -> BigUint {
        let mut num = self.mant.clone();
        let mut den = BigUint::one();
        if scale >= 0 {
            num *= BigUint::from(10u32).pow(scale as u32);
        } else {
            den *= BigUint::from(10u32).pow((-scale) as u32);
        }
        if self.exp >= 0 {
            num <<= self.exp as u64;
        } else {
            den <<= (-self.exp) as u64;
        }
        num / den
    }
}

impl PartialEq for BigFloat {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_val(other) == Ordering::Equal
    }
}
impl Eq for BigFloat {}
impl PartialOrd for BigFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp_val(other))
    }
}
impl Ord for BigFloat {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_val(other)
    }
}

impl Serialize for BigFloat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_annotated_string(24))
    }
}

/// floor(x * 2^bits) / 2^bits: dyadic lower rounding with a compact
/// representation; used to keep fitted seeds from ballooning.
pub fn dyadic_floor(x: &Rat, bits: u64) -> Rat {
    let scaled = Rat(x.0.clone() * BigRational::from_integer(BigInt::one() << bits));
    Rat::from_ratio(scaled.floor_bigint(), BigInt::one() << bits).unwrap()
}

/// Lower dyadic rounding keeping ~sig significant bits, for values of any
/// magnitude.
pub fn dyadic_floor_sig(x: &Rat, sig: u64) -> Rat {
    if x.is_zero() {
        return Rat::zero();
    }
    let mag = x.numer().magnitude().bits() as i64 - x.denom().magnitude().bits() as i64;
    let frac_bits = sig as i64 + (2 - mag).max(0);
    dyadic_floor(x, frac_bits as u64)
}

/// floor(sqrt(x * 4^bits)) / 2^bits, a lower bound for sqrt(x) on positives.
pub fn sqrt_lower(x: &Rat, bits: u64) -> Rat {
    assert!(!x.is_negative());
    if x.is_zero() {
        return Rat::zero();
    }
    // floor(x * 4^bits)
    let scaled = (x.numer().magnitude() << (2 * bits)) / x.denom().magnitude();
    let root = scaled.sqrt();
    Rat::from_ratio(
        BigInt::from_biguint(Sign::Plus, root),
        BigInt::one() << bits,
    )
    .unwrap()
}

/// gcd helper re-export used by a couple of modules.
pub fn big_gcd(a: &BigInt, b: &BigInt) -> BigInt {
    a.gcd(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rat {
        Rat::of(n, d)
    }

    #[test]
    fn pow_rat_examples() {
        assert_eq!(pow_rat(&r(1, 3), 2).unwrap(), r(1, 9));
        assert_eq!(pow_rat(&Rat::from_int(3), -2).unwrap(), r(1, 9));
        assert_eq!(
            pow_rat(&Rat::zero(), -1),
            Err(NumericsError::ZeroToNegativePower)
        );
    }

    #[test]
    fn interval_contains_examples() {
        let unit = RatInterval::unit();
        assert!(interval_contains(&unit, &RatInterval::closed(r(1, 4), r(1, 2))));
        assert!(interval_contains(&unit, &unit));
        assert!(!interval_contains(
            &RatInterval::closed(Rat::zero(), r(1, 3)),
            &RatInterval::closed(r(2, 9), r(1, 2))
        ));
    }

    #[test]
    fn box_contains_examples() {
        let unit = Box3::unit();
        assert!(box_contains(&unit, &unit));
        let tall = Box3::new(
            RatInterval::unit(),
            RatInterval::unit(),
            RatInterval::closed(Rat::zero(), Rat::from_int(2)),
        );
        assert!(!box_contains(&unit, &tall));
        let small = Box3::new(
            RatInterval::closed(r(1, 4), r(1, 2)),
            RatInterval::closed(r(1, 4), r(1, 2)),
            RatInterval::closed(r(1, 4), r(1, 2)),
        );
        assert!(box_contains(&unit, &small));
    }

    #[test]
    fn rat_display_roundtrip() {
        let x = r(-22, 8);
        assert_eq!(x.to_string(), "-11/4");
        assert_eq!("-11/4".parse::<Rat>().unwrap(), x);
        assert_eq!("7".parse::<Rat>().unwrap(), Rat::from_int(7));
        assert!("1/0".parse::<Rat>().is_err());
    }

    #[test]
    fn affine_image_flips() {
        let iv = RatInterval::closed(r(1, 4), r(1, 2));
        let img = iv.affine_image(&Rat::from_int(-2), &Rat::one());
        assert_eq!(img, RatInterval::closed(Rat::zero(), r(1, 2)));
    }

    #[test]
    fn bigfloat_roundtrip_and_ops() {
        let prec = 128;
        let x = BigFloat::from_rat(&r(1, 3), prec);
        let three = BigFloat::from_u64(3, prec);
        let y = x.mul(&three);
        // |y - 1| <= 2^-(prec-4)
        let err = y.sub(&BigFloat::from_u64(1, prec)).abs();
        let tol = BigFloat::from_rat(&pow_rat(&r(1, 2), (prec - 4) as i64).unwrap(), prec);
        assert!(err <= tol, "err {:?}", err.to_f64());
        assert!(BigFloat::from_rat(&r(-1, 2), prec) < BigFloat::zero(prec));
    }

    #[test]
    fn bigfloat_decimal() {
        let x = BigFloat::from_rat(&r(1, 8), 64);
        assert_eq!(x.to_decimal_string(3), "1.25e-1");
        let y = BigFloat::from_rat(&r(-1000, 1), 64);
        assert_eq!(y.to_decimal_string(2), "-1.0e3");
        assert_eq!(BigFloat::zero(64).to_decimal_string(5), "0");
    }

    #[test]
    fn bigfloat_tiny_magnitudes() {
        // values far below f64 range keep exponent information
        let prec = 96;
        let tiny = BigFloat::from_rat(&pow_rat(&r(1, 3), 3000).unwrap(), prec);
        assert!(tiny > BigFloat::zero(prec));
        let sq = tiny.mul(&tiny);
        assert!(sq < tiny);
        let back = sq.div(&tiny);
        let rel = back.sub(&tiny).abs().div(&tiny);
        assert!(rel < BigFloat::from_rat(&pow_rat(&r(1, 2), 90).unwrap(), prec));
    }

    #[test]
    fn sqrt_lower_is_lower_bound() {
        let x = r(2, 1);
        let s = sqrt_lower(&x, 100);
        assert!(&s * &s <= x);
        let gap = &x - &(&s * &s);
        assert!(gap < r(1, 1 << 40));
    }

    #[test]
    fn sqrt_exact_perfect_square() {
        assert_eq!(r(4, 9).sqrt_exact(), Some(r(2, 3)));
        assert_eq!(r(2, 1).sqrt_exact(), None);
    }
}
