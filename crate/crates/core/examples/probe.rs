use std::time::Instant;
use wander_core::chain::{build_chain, Schedule};
use wander_core::model::ModelParams;
use wander_core::wander::{build_box_seq, find_k1, verify_wandering};

fn main() {
    let p = ModelParams::reference();
    let t = Instant::now();
    let chain = build_chain(&p, &Schedule::PhysicalP, 45).unwrap();
    eprintln!("chain K=45: {:?}", t.elapsed());
    let t = Instant::now();
    let boxes = build_box_seq(&p, &chain, 21, 27, None).unwrap();
    eprintln!("boxes 21..27: {:?}", t.elapsed());
    for r in &boxes.rows {
        eprintln!("  k={} c-bits={} b log10={:.1}", r.k,
                 r.c.numer().magnitude().bits() + r.c.denom().magnitude().bits(),
                 r.b.log2_approx() * 0.30103);
    }
    let t = Instant::now();
    let rep = verify_wandering(&p, &chain, &boxes, 21, 26).unwrap();
    eprintln!("verify 21..26: {:?} k1={:?}", t.elapsed(), rep.k1);
    for r in &rep.rows {
        eprintln!("  k={} rho10={:.1} rho<1/2={} int={} gap={} zw={} ze={} y={} rdec={} ddec={}",
            r.k, r.rho_log10, r.rho_lt_half, r.image_in_interior, r.proj_in_gap,
            r.z_width_ok, r.z_entry_ok, r.y_inside_limits, r.rho_decreasing_next,
            r.diam_decreasing_next);
    }
    let t = Instant::now();
    let found = find_k1(&p, &chain, 2, 30).unwrap();
    eprintln!("find_k1 scan: {:?} -> {:?}", t.elapsed(), found.map(|f| f.0));
}
