//! Synthesis and evaluation of learning-augmented online strategies.
//!
//! The crate covers deterministic online bidding with distributional
//! predictions ([`pareto`]), randomized bidding with a single prediction
//! ([`randomized`]), contract scheduling under a stream of predictions
//! ([`dynamic`]) and linear search on the line ([`search`]). Every strategy is
//! built on the primitives in [`bidding`] and the LP solver in [`lp`].

pub mod bidding;
pub mod dynamic;
pub mod error;
pub mod lp;
pub mod numeric;
pub mod pareto;
pub mod randomized;
pub mod search;

pub use bidding::{
    bidding_cost, consistency, is_extendable, robustness_check, tight_extension, zeta_roots, BidSequence,
    DiscretePrediction, PredictionPoint, RobustnessReq, RootPair,
};
pub use error::{Error, Result};
pub use lp::{lp_solve, LinearProgram, LpOutcome};
