//! Orbit statistics: era sequences, empirical (Birkhoff) averages along the
//! perturbed orbit, and the historicity / physicality verdicts.
//!
//! Orbits are driven by the symbolic itinerary from the chain, so region
//! dispatch never depends on floating-point position; in exact mode every
//! visited region is additionally verified geometrically and any mismatch is
//! a hard error. The fold consumes two steps; the intermediate point is not
//! pinned by the model, so its observable contribution holds the previous
//! value and it never counts as near a target.

use crate::chain::ChainData;
use crate::model::{classify, ModelParams, Point3, Region};
use crate::numerics::{BigFloat, Rat};
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum StatsError {
    #[error("orbit left the expected region at step {step}: expected {expected:?}, got {got:?}")]
    Escape { step: u64, expected: Region, got: Region },
    #[error("fold entry at block {k}: z = {z} outside the strip cs-interval")]
    StripEntry { k: usize, z: Rat },
    #[error("chain horizon {have} too small: run needs records to k = {need}")]
    Horizon { need: usize, have: usize },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error(transparent)]
    Chain(#[from] crate::chain::ChainError),
}

// ---------------------------------------------------------------------------
// Era sequences
// ---------------------------------------------------------------------------

/// Increasing block-index boundaries; era s (1-based) covers k in
/// [boundary[s-1], boundary[s]).
#[derive(Clone, Debug, Serialize)]
pub struct EraSeq {
    pub boundaries: Vec<usize>,
}

impl EraSeq {
    pub fn k1(&self) -> usize {
        self.boundaries[0]
    }

    pub fn num_eras(&self) -> usize {
        self.boundaries.len().saturating_sub(1)
    }

    /// 1-based era containing k, None below the first boundary. Indices at or
    /// beyond the last boundary belong to the last (open-ended) era.
    pub fn era_of(&self, k: usize) -> Option<usize> {
        if k < self.boundaries[0] {
            return None;
        }
        for s in (1..self.boundaries.len()).rev() {
            if k >= self.boundaries[s - 1] {
                return Some(s);
            }
        }
        None
    }

    pub fn era_range(&self, s: usize) -> (usize, usize) {
        (self.boundaries[s - 1], self.boundaries[s])
    }

    /// The era condition: each era's quadratic mass exceeds s times all
    /// earlier mass.
    pub fn satisfies_era_condition(&self) -> bool {
        let k1 = self.k1();
        for s in 1..self.num_eras() {
            let (ks, ks1) = self.era_range(s);
            let new: u64 = (ks..ks1).map(|k| (k * k) as u64).sum();
            let old: u64 = (k1..ks).map(|k| (k * k) as u64).sum();
            if new <= s as u64 * old {
                return false;
            }
        }
        true
    }
}

/// Greedy-minimal era sequence: each boundary is the first index making the
/// era condition strict.
pub fn era_sequence(k1: usize, s_max: usize) -> EraSeq {
    assert!(k1 >= 2, "era sequences start at k1 >= 2");
    let mut boundaries = vec![k1];
    for s in 1..=s_max {
        let last = *boundaries.last().unwrap();
        let old: u64 = (k1..last).map(|k| (k * k) as u64).sum();
        let mut total = 0u64;
        let mut k = last;
        while total == 0 || total <= s as u64 * old {
            total += (k * k) as u64;
            k += 1;
        }
        boundaries.push(k);
    }
    EraSeq { boundaries }
}

// ---------------------------------------------------------------------------
// Observables
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub enum Observable {
    CoordX,
    CoordY,
    CoordZ,
    /// c0 + cx x + cy y + cz z
    Affine { c0: Rat, cx: Rat, cy: Rat, cz: Rat },
}

impl Observable {
    pub fn name(&self) -> String {
        match self {
            Observable::CoordX => "x".into(),
            Observable::CoordY => "y".into(),
            Observable::CoordZ => "z".into(),
            Observable::Affine { .. } => "affine".into(),
        }
    }

    pub fn eval_rat(&self, pt: &Point3) -> Rat {
        match self {
            Observable::CoordX => pt.x.clone(),
            Observable::CoordY => pt.y.clone(),
            Observable::CoordZ => pt.z.clone(),
            Observable::Affine { c0, cx, cy, cz } => {
                c0 + &(&(cx * &pt.x) + &(&(cy * &pt.y) + &(cz * &pt.z)))
            }
        }
    }

    fn eval_f64(&self, x: f64, y: f64, z: f64) -> f64 {
        match self {
            Observable::CoordX => x,
            Observable::CoordY => y,
            Observable::CoordZ => z,
            Observable::Affine { c0, cx, cy, cz } => {
                c0.to_f64() + cx.to_f64() * x + cy.to_f64() * y + cz.to_f64() * z
            }
        }
    }

    /// Sup of |phi| over the unit cube (all orbit points lie there).
    pub fn sup_norm_unit(&self) -> f64 {
        match self {
            Observable::CoordX | Observable::CoordY | Observable::CoordZ => 1.0,
            Observable::Affine { c0, cx, cy, cz } => {
                let pos = |r: &Rat| r.to_f64().max(0.0);
                let neg = |r: &Rat| (-r.to_f64()).max(0.0);
                let hi = c0.to_f64() + pos(cx) + pos(cy) + pos(cz);
                let lo = c0.to_f64() - neg(cx) - neg(cy) - neg(cz);
                hi.abs().max(lo.abs())
            }
        }
    }
}

/// The two alternating limit values of the historic schedule:
/// ((3 phi(P) + phi(Q))/4, (7 phi(P) + phi(Q))/8).
pub fn historic_targets(p: &ModelParams, obs: &Observable) -> (Rat, Rat) {
    let fp = obs.eval_rat(&p.fixed_point_p());
    let fq = obs.eval_rat(&p.fixed_point_q());
    let even = (&(&Rat::from_int(3) * &fp) + &fq) / &Rat::from_int(4);
    let odd = (&(&Rat::from_int(7) * &fp) + &fq) / &Rat::from_int(8);
    (even, odd)
}

// ---------------------------------------------------------------------------
// Orbit runs
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithMode {
    Exact,
    /// Fixed mantissa precision in bits.
    Big(u32),
    /// Precision chosen from the chain: ceil(log2(lambda_u) (max n_hat + 2)) + 192.
    BigAuto,
}

/// Residence targets: points and a max-metric radius.
#[derive(Clone, Debug)]
pub struct ResidenceSpec {
    pub targets: Vec<Point3>,
    pub radius: Rat,
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockStats {
    pub k: usize,
    /// Global step index of the block start.
    pub start_step: u64,
    /// n_hat + 2.
    pub len: u64,
    /// Freedom-window offset and length (the k^2 Claim-2 window).
    pub window_start: u64,
    pub window_len: u64,
    pub block_sums: Vec<f64>,
    pub window_sums: Vec<f64>,
    pub near_count: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitRun {
    pub start_k: usize,
    pub blocks: usize,
    pub mode: String,
    pub precision_bits: Option<u32>,
    pub observables: Vec<String>,
    pub total_steps: u64,
    pub blocks_stats: Vec<BlockStats>,
    /// Exact mode: regions verified geometrically step by step.
    pub regions_verified: bool,
}

impl OrbitRun {
    pub fn block(&self, k: usize) -> &BlockStats {
        &self.blocks_stats[k - self.start_k]
    }

    pub fn block_avg(&self, k: usize, obs_idx: usize) -> f64 {
        let b = self.block(k);
        b.block_sums[obs_idx] / b.len as f64
    }

    /// Average over all steps up to and including block k.
    pub fn cumulative_avg(&self, k: usize, obs_idx: usize) -> f64 {
        let mut num = 0.0;
        let mut den = 0u64;
        for b in &self.blocks_stats {
            if b.k > k {
                break;
            }
            num += b.block_sums[obs_idx];
            den += b.len;
        }
        num / den as f64
    }
}

struct Accum<'a> {
    observables: &'a [Observable],
    blocks: Vec<BlockStats>,
    cur: Option<BlockStats>,
    step: u64,
}

impl<'a> Accum<'a> {
    fn begin_block(&mut self, k: usize, len: u64, window_start: u64, window_len: u64) {
        self.cur = Some(BlockStats {
            k,
            start_step: self.step,
            len,
            window_start,
            window_len,
            block_sums: vec![0.0; self.observables.len()],
            window_sums: vec![0.0; self.observables.len()],
            near_count: 0,
        });
    }

    fn record(&mut self, vals: &[f64], near: bool) {
        let cur = self.cur.as_mut().expect("block open");
        let local = self.step - cur.start_step;
        for (i, v) in vals.iter().enumerate() {
            cur.block_sums[i] += v;
            if local >= cur.window_start && local < cur.window_start + cur.window_len {
                cur.window_sums[i] += v;
            }
        }
        if near {
            cur.near_count += 1;
        }
        self.step += 1;
    }

    fn end_block(&mut self) {
        self.blocks.push(self.cur.take().expect("block open"));
    }
}

/// Precision needed for the x-direction to survive the longest block.
pub fn auto_precision(chain: &ChainData, start_k: usize, blocks: usize) -> u32 {
    let max_n = (start_k..start_k + blocks)
        .map(|k| chain.record(k).n_hat)
        .max()
        .unwrap_or(0);
    let lu_bits = 1.5849625007211563f64; // log2 3; exact enough as an upper bound for lambda_u=3
    (lu_bits * (max_n as f64 + 2.0)).ceil() as u32 + 192
}

/// Drives the orbit of `x0` through `blocks` consecutive chain blocks
/// starting at index `start_k`, accumulating observable sums and residence
/// counts per block.
pub fn birkhoff_run(
    p: &ModelParams,
    chain: &ChainData,
    x0: &Point3,
    start_k: usize,
    blocks: usize,
    observables: &[Observable],
    residence: Option<&ResidenceSpec>,
    mode: ArithMode,
) -> Result<OrbitRun, StatsError> {
    let need = start_k + blocks - 1;
    if need > chain.max_k {
        return Err(StatsError::Horizon { need, have: chain.max_k });
    }
    let mut acc = Accum {
        observables,
        blocks: Vec::with_capacity(blocks),
        cur: None,
        step: 0,
    };
    let (mode_name, prec, verified) = match mode {
        ArithMode::Exact => {
            run_exact(p, chain, x0, start_k, blocks, observables, residence, &mut acc)?;
            ("exact".to_string(), None, true)
        }
        ArithMode::Big(bits) => {
            run_big(p, chain, x0, start_k, blocks, observables, residence, &mut acc, bits)?;
            (format!("bigfloat:{}", bits), Some(bits), false)
        }
        ArithMode::BigAuto => {
            let bits = auto_precision(chain, start_k, blocks);
            run_big(p, chain, x0, start_k, blocks, observables, residence, &mut acc, bits)?;
            (format!("bigfloat:{}", bits), Some(bits), false)
        }
    };
    Ok(OrbitRun {
        start_k,
        blocks,
        mode: mode_name,
        precision_bits: prec,
        observables: observables.iter().map(|o| o.name()).collect(),
        total_steps: acc.step,
        blocks_stats: acc.blocks,
        regions_verified: verified,
    })
}

fn near_exact(res: &ResidenceSpec, pt: &Point3) -> bool {
    res.targets.iter().any(|t| {
        (&pt.x - &t.x).abs() <= res.radius
            && (&pt.y - &t.y).abs() <= res.radius
            && (&pt.z - &t.z).abs() <= res.radius
    })
}

#[allow(clippy::too_many_arguments)]
fn run_exact(
    p: &ModelParams,
    chain: &ChainData,
    x0: &Point3,
    start_k: usize,
    blocks: usize,
    observables: &[Observable],
    residence: Option<&ResidenceSpec>,
    acc: &mut Accum,
) -> Result<(), StatsError> {
    let mut pos = x0.clone();
    let half = Rat::of(1, 2);
    for k in start_k..start_k + blocks {
        let rec = chain.record(k);
        let window_start = rec.w_bar.len() as u64;
        acc.begin_block(k, rec.n_hat as u64 + 2, window_start, (k * k) as u64);
        for (i, s) in rec.w_hat.symbols().enumerate() {
            let expected = if s == 0 { Region::V0 } else { Region::V1 };
            let got = classify(p, &pos);
            if got != expected {
                return Err(StatsError::Escape { step: acc.step, expected, got });
            }
            let vals: Vec<f64> =
                observables.iter().map(|o| o.eval_rat(&pos).to_f64()).collect();
            let near = residence.map(|r| near_exact(r, &pos)).unwrap_or(false);
            acc.record(&vals, near);
            pos = if s == 0 {
                Point3::new(
                    &p.lambda_u * &pos.x,
                    &p.lambda_ss * &pos.y,
                    &p.lambda_cs0 * &pos.z,
                )
            } else {
                Point3::new(
                    &p.lambda_u * &(&Rat::one() - &pos.x),
                    &Rat::one() - &(&p.lambda_ss * &pos.y),
                    &p.lambda_cs1 * &pos.z + p.beta(),
                )
            };
            let _ = i;
        }
        // fold entry: strip in x, cs-interval of level k+1 in z
        let got = classify(p, &pos);
        if got != Region::TangencyStrip {
            return Err(StatsError::Escape {
                step: acc.step,
                expected: Region::TangencyStrip,
                got,
            });
        }
        let strip = chain.strip_cs(p, k + 1)?;
        if !strip.contains_point(&pos.z) {
            return Err(StatsError::StripEntry { k: k + 1, z: pos.z.clone() });
        }
        let vals: Vec<f64> = observables.iter().map(|o| o.eval_rat(&pos).to_f64()).collect();
        acc.record(&vals, false); // fold entry step
        acc.record(&vals, false); // unobservable intermediate step holds the value
        let dx = &pos.x - &half;
        pos = Point3::new(
            &rec.t_next + &(-(&p.a1 * &(&dx * &dx)) + &p.a2 * &pos.z),
            &p.a3 * &(&pos.y - &half) + half.clone(),
            &p.a4 * &dx + half.clone(),
        );
        acc.end_block();
    }
    Ok(())
}

struct BigConsts {
    lu: BigFloat,
    lss: BigFloat,
    lcs0: BigFloat,
    lcs1: BigFloat,
    beta: BigFloat,
    a1: BigFloat,
    a2: BigFloat,
    a3: BigFloat,
    a4: BigFloat,
    half: BigFloat,
    one: BigFloat,
}

impl BigConsts {
    fn new(p: &ModelParams, bits: u32) -> Self {
        let f = |r: &Rat| BigFloat::from_rat(r, bits);
        BigConsts {
            lu: f(&p.lambda_u),
            lss: f(&p.lambda_ss),
            lcs0: f(&p.lambda_cs0),
            lcs1: f(&p.lambda_cs1),
            beta: f(&p.beta()),
            a1: f(&p.a1),
            a2: f(&p.a2),
            a3: f(&p.a3),
            a4: f(&p.a4),
            half: f(&Rat::of(1, 2)),
            one: BigFloat::from_u64(1, bits),
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_big(
    p: &ModelParams,
    chain: &ChainData,
    x0: &Point3,
    start_k: usize,
    blocks: usize,
    observables: &[Observable],
    residence: Option<&ResidenceSpec>,
    acc: &mut Accum,
    bits: u32,
) -> Result<(), StatsError> {
    let c = BigConsts::new(p, bits);
    let mut x = BigFloat::from_rat(&x0.x, bits);
    let mut y = BigFloat::from_rat(&x0.y, bits);
    let mut z = BigFloat::from_rat(&x0.z, bits);
    let res_big: Option<(Vec<(BigFloat, BigFloat, BigFloat)>, BigFloat)> =
        residence.map(|r| {
            (
                r.targets
                    .iter()
                    .map(|t| {
                        (
                            BigFloat::from_rat(&t.x, bits),
                            BigFloat::from_rat(&t.y, bits),
                            BigFloat::from_rat(&t.z, bits),
                        )
                    })
                    .collect(),
                BigFloat::from_rat(&r.radius, bits),
            )
        });
    for k in start_k..start_k + blocks {
        let rec = chain.record(k);
        let window_start = rec.w_bar.len() as u64;
        acc.begin_block(k, rec.n_hat as u64 + 2, window_start, (k * k) as u64);
        let t_next = BigFloat::from_rat(&rec.t_next, bits);
        for s in rec.w_hat.symbols() {
            let (fx, fy, fz) = (x.to_f64(), y.to_f64(), z.to_f64());
            let vals: Vec<f64> =
                observables.iter().map(|o| o.eval_f64(fx, fy, fz)).collect();
            let near = res_big
                .as_ref()
                .map(|(ts, rad)| {
                    ts.iter().any(|(tx, ty, tz)| {
                        x.sub(tx).abs() <= *rad
                            && y.sub(ty).abs() <= *rad
                            && z.sub(tz).abs() <= *rad
                    })
                })
                .unwrap_or(false);
            acc.record(&vals, near);
            if s == 0 {
                x = c.lu.mul(&x);
                y = c.lss.mul(&y);
                z = c.lcs0.mul(&z);
            } else {
                x = c.lu.mul(&c.one.sub(&x));
                y = c.one.sub(&c.lss.mul(&y));
                z = c.lcs1.mul(&z).add(&c.beta);
            }
        }
        let (fx, fy, fz) = (x.to_f64(), y.to_f64(), z.to_f64());
        let vals: Vec<f64> = observables.iter().map(|o| o.eval_f64(fx, fy, fz)).collect();
        acc.record(&vals, false);
        acc.record(&vals, false);
        let dx = x.sub(&c.half);
        let nx = t_next.add(&c.a2.mul(&z).sub(&c.a1.mul(&dx.mul(&dx))));
        let ny = c.a3.mul(&y.sub(&c.half)).add(&c.half);
        let nz = c.a4.mul(&dx).add(&c.half);
        x = nx;
        y = ny;
        z = nz;
        acc.end_block();
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Historicity
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct EraAverages {
    pub era: usize,
    pub parity_even: bool,
    pub k_range: (usize, usize),
    /// Claim-2 freedom-window average over the era.
    pub window_avg: f64,
    /// Whole-block average over the era.
    pub block_avg: f64,
    /// Cumulative average from the run start to the era end.
    pub cumulative_avg: f64,
    pub target: f64,
    pub window_gap: f64,
    /// Claim-1 numeric check: |block-era avg - cumulative avg| and its bound
    /// 2 ||phi|| N_before / N_through.
    pub claim1_lhs: f64,
    pub claim1_bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct HistoricReport {
    pub observable: String,
    pub degenerate: bool,
    pub eras: Vec<EraAverages>,
    pub even_target: f64,
    pub odd_target: f64,
    /// min over even-era window averages minus max over odd-era ones.
    pub window_margin: f64,
    /// same margin on whole-block era averages (finite-range report only).
    pub block_margin: f64,
    pub cumulative_margin: f64,
    /// each parity subsequence moves monotonically toward its target
    pub even_monotone_toward_target: bool,
    pub odd_monotone_toward_target: bool,
}

/// Aggregates a historic run by era and evaluates the oscillation evidence.
/// Margins are asserted by callers on `window_margin` (the Claim-2 averages,
/// whose limits are the cited targets); whole-block and cumulative era-end
/// averages are reported as finite-range trend only.
pub fn verify_historic(
    p: &ModelParams,
    run: &OrbitRun,
    eras: &EraSeq,
    obs_idx: usize,
    obs: &Observable,
) -> Result<HistoricReport, StatsError> {
    let (even_t, odd_t) = historic_targets(p, obs);
    let (even_t, odd_t) = (even_t.to_f64(), odd_t.to_f64());
    let degenerate = (even_t - odd_t).abs() == 0.0;
    let sup = obs.sup_norm_unit();

    // group run blocks by era
    let mut groups: Vec<(usize, Vec<&BlockStats>)> = Vec::new();
    for b in &run.blocks_stats {
        let s = eras
            .era_of(b.k)
            .ok_or_else(|| StatsError::InsufficientData(format!("block {} below first era", b.k)))?;
        match groups.last_mut() {
            Some((cur, v)) if *cur == s => v.push(b),
            _ => groups.push((s, vec![b])),
        }
    }
    let complete: Vec<&(usize, Vec<&BlockStats>)> = groups
        .iter()
        .filter(|(s, v)| {
            let (ks, ks1) = eras.era_range(*s);
            v.first().map(|b| b.k) == Some(ks) && v.last().map(|b| b.k) == Some(ks1 - 1)
        })
        .collect();
    let evens: usize = complete.iter().filter(|(s, _)| s % 2 == 0).count();
    let odds: usize = complete.iter().filter(|(s, _)| s % 2 == 1).count();
    if evens < 2 || odds < 2 {
        return Err(StatsError::InsufficientData(format!(
            "need two complete eras per parity, have {} even and {} odd",
            evens, odds
        )));
    }

    let mut rows = Vec::new();
    let mut cum_sum = 0.0;
    let mut cum_len = 0u64;
    // sums over earlier complete eras for the Claim-1 comparison
    for (s, blocks_of_era) in &groups {
        let wsum: f64 = blocks_of_era.iter().map(|b| b.window_sums[obs_idx]).sum();
        let wlen: u64 = blocks_of_era.iter().map(|b| b.window_len).sum();
        let bsum: f64 = blocks_of_era.iter().map(|b| b.block_sums[obs_idx]).sum();
        let blen: u64 = blocks_of_era.iter().map(|b| b.len).sum();
        let n_before = cum_len;
        cum_sum += bsum;
        cum_len += blen;
        let parity_even = s % 2 == 0;
        let target = if parity_even { even_t } else { odd_t };
        let window_avg = wsum / wlen as f64;
        let block_avg = bsum / blen as f64;
        let cumulative_avg = cum_sum / cum_len as f64;
        rows.push(EraAverages {
            era: *s,
            parity_even,
            k_range: eras.era_range(*s),
            window_avg,
            block_avg,
            cumulative_avg,
            target,
            window_gap: (window_avg - target).abs(),
            claim1_lhs: (block_avg - cumulative_avg).abs(),
            claim1_bound: 2.0 * sup * n_before as f64 / cum_len as f64,
        });
    }

    // margins on complete eras only
    let complete_set: Vec<usize> = complete.iter().map(|(s, _)| *s).collect();
    let sel = |parity_even: bool, f: &dyn Fn(&EraAverages) -> f64| -> Vec<f64> {
        rows.iter()
            .filter(|r| r.parity_even == parity_even && complete_set.contains(&r.era))
            .map(f)
            .collect()
    };
    let margin = |f: &dyn Fn(&EraAverages) -> f64| -> f64 {
        let e = sel(true, f);
        let o = sel(false, f);
        e.iter().cloned().fold(f64::INFINITY, f64::min)
            - o.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    };
    let window_margin = margin(&|r| r.window_avg);
    let block_margin = margin(&|r| r.block_avg);
    let cumulative_margin = margin(&|r| r.cumulative_avg);

    let monotone = |parity_even: bool| -> bool {
        let gaps: Vec<f64> = rows
            .iter()
            .filter(|r| r.parity_even == parity_even && complete_set.contains(&r.era))
            .map(|r| r.window_gap)
            .collect();
        gaps.windows(2).all(|w| w[1] <= w[0])
    };
    let even_monotone_toward_target = monotone(true);
    let odd_monotone_toward_target = monotone(false);

    Ok(HistoricReport {
        observable: obs.name(),
        degenerate,
        eras: rows,
        even_target: even_t,
        odd_target: odd_t,
        window_margin,
        block_margin,
        cumulative_margin,
        even_monotone_toward_target,
        odd_monotone_toward_target,
    })
}

// ---------------------------------------------------------------------------
// Physicality
// ---------------------------------------------------------------------------

/// Minimal u with lambda_u^-u <= rho and minimal s with both contractions'
/// s-th powers <= rho: the symbolic window widths needed for a rho-ball.
pub fn residence_window_lengths(p: &ModelParams, rho: &Rat) -> (u64, u64) {
    let mut u = 0u64;
    let mut w = Rat::one();
    let lui = p.lambda_u_inv();
    while &w > rho {
        w = &w * &lui;
        u += 1;
    }
    let mut s = 0u64;
    let mut a = Rat::one();
    let mut b = Rat::one();
    while &a > rho || &b > rho {
        a = &a * &p.lambda_ss;
        b = &b * &p.lambda_cs0;
        s += 1;
    }
    (u, s)
}

#[derive(Clone, Debug, Serialize)]
pub struct PhysicalBlockRow {
    pub k: usize,
    pub fraction: f64,
    pub bound: f64,
    pub meets_bound: bool,
    pub cumulative_fraction: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PhysicalReport {
    pub rho: Rat,
    pub u_len: u64,
    pub s_len: u64,
    pub rows: Vec<PhysicalBlockRow>,
    pub all_meet_bound: bool,
    pub cumulative_increasing: bool,
    pub final_exceeds_first: bool,
}

/// Residence verdict for a physical/periodic run: every block's near-target
/// fraction must reach the chain bound 1 - (u+s+m_k+|w_bar|+2)/(n_hat+2), and
/// the cumulative fraction must increase block over block.
pub fn verify_physical(
    p: &ModelParams,
    chain: &ChainData,
    run: &OrbitRun,
    rho: &Rat,
) -> Result<PhysicalReport, StatsError> {
    if run.blocks < 3 {
        return Err(StatsError::InsufficientData(format!(
            "need at least 3 blocks, have {}",
            run.blocks
        )));
    }
    let (u, s) = residence_window_lengths(p, rho);
    let mut rows = Vec::new();
    let mut cum_near = 0u64;
    let mut cum_len = 0u64;
    let mut prev_cum = -1.0;
    let mut cumulative_increasing = true;
    for b in &run.blocks_stats {
        let rec = chain.record(b.k);
        let overhead = u + s + rec.m as u64 + rec.w_bar.len() as u64 + 2;
        let bound = 1.0 - overhead as f64 / (rec.n_hat as f64 + 2.0);
        let fraction = b.near_count as f64 / b.len as f64;
        cum_near += b.near_count;
        cum_len += b.len;
        let cumulative_fraction = cum_near as f64 / cum_len as f64;
        if cumulative_fraction <= prev_cum {
            cumulative_increasing = false;
        }
        prev_cum = cumulative_fraction;
        rows.push(PhysicalBlockRow {
            k: b.k,
            fraction,
            bound,
            meets_bound: fraction >= bound,
            cumulative_fraction,
        });
    }
    let all_meet_bound = rows.iter().all(|r| r.meets_bound);
    let final_exceeds_first =
        rows.last().map(|r| r.fraction).unwrap_or(0.0) > rows.first().map(|r| r.fraction).unwrap_or(0.0);
    Ok(PhysicalReport {
        rho: rho.clone(),
        u_len: u,
        s_len: s,
        rows,
        all_meet_bound,
        cumulative_increasing,
        final_exceeds_first,
    })
}
