//! Lévy measures `Λ` and `Π`, their tail and moment integrals, and
//! numerical checks that the prelimit triangular-array quantities converge
//! to them.
//!
//! `Π(du, dv) = F(du/v) Λ(dv)` lives on `ℝ × (0, ∞)`. Integrals over `Λ`
//! run in `ln s` so that the polynomial tails of stable measures and the
//! `1/s` singularity of the gamma measure both become smooth.

mod bivariate;
mod prelimit;
mod tail;

pub use bivariate::{BivariateLevyView, FirstMoments, SecondMoments};
pub use prelimit::{
    check_levy_convergence, lambda_scan, prelimit_pi_n, prelimit_truncated_moments,
    ConvergenceGrid, ConvergenceReport, LambdaScan, LevyConvergence, McEstimate, McSettings,
    PrelimitMoments,
};
pub use tail::{alpha_h, lambda_bar, prelimit_lambda_n, AlphaSource, LevyKind, LevyTail};
