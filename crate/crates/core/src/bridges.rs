//! Symbolic dynamics of the expanding direction: binary itineraries, the
//! nested bridge/gap intervals they label, compositions of the two
//! centre-stable contractions, and the alternating two-column bridge sequence
//! that seeds the chain construction.

use crate::model::ModelParams;
use crate::numerics::{Rat, RatInterval};
use num_bigint::BigInt;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

#[derive(Debug, thiserror::Error)]
pub enum BridgeError {
    #[error("interval {0} is not inside (0, {1}); no cs-interval")]
    CsDomain(RatInterval, Rat),
    #[error("seed bridge {0} is not inside (0, {1})")]
    SeedOutside(RatInterval, Rat),
    #[error("invalid code literal: {0}")]
    BadCode(String),
}

/// Finite binary itinerary with cached symbol counts.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Code {
    symbols: Vec<u8>,
    zeros: usize,
}

impl Code {
    pub fn empty() -> Self {
        Code { symbols: Vec::new(), zeros: 0 }
    }

    pub fn parse(s: &str) -> Result<Self, BridgeError> {
        let mut symbols = Vec::with_capacity(s.len());
        let mut zeros = 0;
        for ch in s.chars() {
            match ch {
                '0' => {
                    symbols.push(0);
                    zeros += 1;
                }
                '1' => symbols.push(1),
                _ => return Err(BridgeError::BadCode(s.to_string())),
            }
        }
        Ok(Code { symbols, zeros })
    }

    pub fn from_symbols(symbols: Vec<u8>) -> Self {
        debug_assert!(symbols.iter().all(|&s| s <= 1));
        let zeros = symbols.iter().filter(|&&s| s == 0).count();
        Code { symbols, zeros }
    }

    /// n zeros followed by m ones.
    pub fn zeros_then_ones(n: usize, m: usize) -> Self {
        let mut symbols = vec![0u8; n];
        symbols.extend(std::iter::repeat(1u8).take(m));
        Code { symbols, zeros: n }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn zero_count(&self) -> usize {
        self.zeros
    }

    pub fn one_count(&self) -> usize {
        self.symbols.len() - self.zeros
    }

    /// Zero-majority: at least as many zeros as ones.
    pub fn has_zero_majority(&self) -> bool {
        self.one_count() <= self.zero_count()
    }

    pub fn symbols(&self) -> impl Iterator<Item = u8> + '_ {
        self.symbols.iter().copied()
    }

    pub fn get(&self, i: usize) -> u8 {
        self.symbols[i]
    }

    pub fn push(&mut self, s: u8) {
        debug_assert!(s <= 1);
        if s == 0 {
            self.zeros += 1;
        }
        self.symbols.push(s);
    }

    pub fn extended(&self, s: u8) -> Self {
        let mut c = self.clone();
        c.push(s);
        c
    }

    pub fn concat(&self, other: &Code) -> Self {
        let mut symbols = self.symbols.clone();
        symbols.extend_from_slice(&other.symbols);
        Code { symbols, zeros: self.zeros + other.zeros }
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> Code {
        Code::from_symbols(self.symbols[range].to_vec())
    }

    pub fn starts_with(&self, prefix: &Code) -> bool {
        self.symbols.starts_with(&prefix.symbols)
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.symbols {
            write!(f, "{}", s)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{}\"", self)
    }
}

impl Serialize for Code {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Code {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Code::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// The bridge interval of an itinerary, by backward composition of the two
/// inverse branches: preimage under x -> lambda_u x for symbol 0, under
/// x -> lambda_u (1 - x) for symbol 1 (which reverses orientation). Width is
/// exactly lambda_u^-n.
pub fn bridge_interval(p: &ModelParams, w: &Code) -> RatInterval {
    let lui = p.lambda_u_inv();
    let mut lo = Rat::zero();
    let mut hi = Rat::one();
    for s in w.symbols.iter().rev() {
        if *s == 0 {
            lo = &lo * &lui;
            hi = &hi * &lui;
        } else {
            let nlo = &Rat::one() - &(&hi * &lui);
            hi = &Rat::one() - &(&lo * &lui);
            lo = nlo;
        }
    }
    RatInterval::closed(lo, hi)
}

/// The open middle gap of a bridge: what remains after removing both children.
pub fn gap_interval(p: &ModelParams, w: &Code) -> RatInterval {
    let b0 = bridge_interval(p, &w.extended(0));
    let b1 = bridge_interval(p, &w.extended(1));
    let (left, right) = if b0.lo < b1.lo { (b0, b1) } else { (b1, b0) };
    RatInterval::open(left.hi, right.lo)
}

/// The two children of a bridge code ordered geometrically: (left, right) by
/// exact midpoint comparison. Symbol parity decides which symbol is left, so
/// the comparison is done on the intervals, not the symbols.
pub fn children_geometric(p: &ModelParams, w: &Code) -> (Code, Code) {
    let c0 = w.extended(0);
    let c1 = w.extended(1);
    let b0 = bridge_interval(p, &c0);
    let b1 = bridge_interval(p, &c1);
    if b0.lo < b1.lo {
        (c0, c1)
    } else {
        (c1, c0)
    }
}

/// Exact composition of the centre-stable contractions along a code, first
/// symbol applied first. Runs on raw integer pairs, reducing periodically.
pub fn ifs_apply(p: &ModelParams, w: &Code, z: &Rat) -> Rat {
    let beta = p.beta();
    // z -> (p0n z) / p0d           for symbol 0
    // z -> (p1n z + beta) scaled   for symbol 1
    let l0n = p.lambda_cs0.numer().clone();
    let l0d = p.lambda_cs0.denom().clone();
    let l1n = p.lambda_cs1.numer().clone();
    let l1d = p.lambda_cs1.denom().clone();
    let bn = beta.numer().clone();
    let bd = beta.denom().clone();

    let mut num: BigInt = z.numer().clone();
    let mut den: BigInt = z.denom().clone();
    let mut since_reduce = 0usize;
    for s in w.symbols.iter() {
        if *s == 0 {
            num *= &l0n;
            den *= &l0d;
        } else {
            // (l1n/l1d) * (num/den) + bn/bd = (l1n num bd + bn l1d den) / (l1d den bd)
            num = &num * &l1n * &bd + &bn * &l1d * &den;
            den = &den * &l1d * &bd;
        }
        since_reduce += 1;
        if since_reduce == 128 {
            let g = crate::numerics::big_gcd(&num, &den);
            num /= &g;
            den /= &g;
            since_reduce = 0;
        }
    }
    Rat::from_ratio(num, den).expect("denominator stays nonzero")
}

/// cs-interval of a bridge: the bridge scaled by 1/a2. The bridge must lie in
/// (0, a2) for the fold to reach it.
pub fn cs_interval(p: &ModelParams, b: &RatInterval) -> Result<RatInterval, BridgeError> {
    if !(b.lo > Rat::zero() && b.hi < p.a2) {
        return Err(BridgeError::CsDomain(b.clone(), p.a2.clone()));
    }
    Ok(b.scale(&p.a2.recip().expect("a2 > 0")))
}

/// One level of the alternating bridge pair: `b` is the right child kept as
/// the anchor of level k, `bt` the left child descended into at level k+1.
#[derive(Clone, Debug, Serialize)]
pub struct BridgeLevel {
    pub k: usize,
    pub code_b: Code,
    pub code_bt: Code,
    pub b: RatInterval,
    pub bt: RatInterval,
}

#[derive(Clone, Debug, Serialize)]
pub struct BridgeSeq {
    pub seed_code: Code,
    pub seed_interval: RatInterval,
    pub levels: Vec<BridgeLevel>,
}

impl BridgeSeq {
    pub fn level(&self, k: usize) -> &BridgeLevel {
        &self.levels[k - 1]
    }

    pub fn max_k(&self) -> usize {
        self.levels.len()
    }
}

/// Builds the alternating sequence: at each level the two children of the
/// current left bridge, the left one continuing the descent.
pub fn build_bridge_seq(p: &ModelParams, max_k: usize) -> Result<BridgeSeq, BridgeError> {
    let seed_interval = bridge_interval(p, &p.seed_code);
    if !(seed_interval.lo > Rat::zero() && seed_interval.hi < p.a2) {
        return Err(BridgeError::SeedOutside(seed_interval, p.a2.clone()));
    }
    let mut levels = Vec::with_capacity(max_k);
    let mut current = p.seed_code.clone();
    for k in 1..=max_k {
        let (left, right) = children_geometric(p, &current);
        let b = bridge_interval(p, &right);
        let bt = bridge_interval(p, &left);
        levels.push(BridgeLevel { k, code_b: right, code_bt: left.clone(), b, bt });
        current = left;
    }
    Ok(BridgeSeq { seed_code: p.seed_code.clone(), seed_interval, levels })
}

/// Descends `levels` times, always into the geometric-left child.
pub fn left_descend(p: &ModelParams, w: &Code, levels: usize) -> Code {
    let mut c = w.clone();
    for _ in 0..levels {
        c = children_geometric(p, &c).0;
    }
    c
}
