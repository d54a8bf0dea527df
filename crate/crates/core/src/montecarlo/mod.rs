//! Finite-`n` simulation of `T_n` and `(W₁ₙ, W₂ₙ)/a_n`, and compound-Poisson
//! simulation of the limit pair.
//!
//! Replication `r` always draws from `seed.child(r)`, so output depends only
//! on the [`SimConfig`] and never on how rayon schedules the work.

mod sample;
mod sim;

pub use sample::{EmpiricalSample, PairSample, SimConfig};
pub use sim::{
    default_cutoff, divergence_probe, max_share_stats, simulate_limit_pair, simulate_normed_pair,
    simulate_tn, truncation_bias, DivergenceProbe, MaxShareStats,
};
