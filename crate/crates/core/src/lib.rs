//! Exact-arithmetic implementation of a partially dissipative
//! blender-horseshoe in the unit cube, the bridge/chain symbolic machinery
//! that steers its fold, the compactly supported perturbation built on it,
//! and desk-scale verification of contracting wandering domains, historic
//! Birkhoff averages, and Dirac-type empirical measures.
//!
//! Structural statements are checked in exact rational arithmetic throughout;
//! long orbit statistics can also run in a configurable-precision binary
//! float mode driven by the symbolic itinerary.

pub mod bridges;
pub mod chain;
pub mod folding;
pub mod model;
pub mod numerics;
pub mod perturb;
pub mod stats;
pub mod wander;

pub use bridges::{bridge_interval, cs_interval, gap_interval, ifs_apply, Code};
pub use chain::{build_chain, ChainData, ChainRecord, Schedule};
pub use model::{apply_f, apply_f2_strip, classify, validate_params, ModelParams, Point3, Region};
pub use numerics::{pow_rat, BigFloat, Box3, Rat, RatInterval};
pub use stats::{era_sequence, historic_targets, Observable};
pub use wander::{build_box_seq, closed_form_image, verify_wandering, BoxSeq};
