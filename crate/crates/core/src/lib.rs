//! Numerical laboratory for self-normalized sums `T_n = ΣX_iY_i / ΣY_i`
//! with heavy-tailed multipliers.
//!
//! The guide in `book/` walks through each module; its code samples are
//! compiled as doc-tests.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod class_diagnostics;
pub mod distributions;
pub mod error;
pub mod levy_calculus;
pub mod limit_laws;
pub mod montecarlo;
pub mod output;
pub mod quadrature;
pub mod rng;
pub mod runner;
pub mod special;

#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/laws.md")]
    pub mod laws {}
    #[doc = include_str!("../../../book/src/limit_law.md")]
    pub mod limit_law {}
    #[doc = include_str!("../../../book/src/levy_measure.md")]
    pub mod levy_measure {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    pub mod simulation {}
    #[doc = include_str!("../../../book/src/regimes.md")]
    pub mod regimes {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
