use std::time::Instant;
use wander_core::chain::{build_chain, Schedule};
use wander_core::model::ModelParams;

fn main() {
    let p = ModelParams::reference();
    for k in [5usize, 10, 15, 20, 25, 30] {
        let t = Instant::now();
        let chain = build_chain(&p, &Schedule::PhysicalP, k).unwrap();
        println!("K={}: {:?} (n_hat max {})", k, t.elapsed(),
                 chain.records.iter().map(|r| r.n_hat).max().unwrap());
    }
}
