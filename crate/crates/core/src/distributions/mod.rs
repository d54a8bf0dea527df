//! Laws of the weights `X` and multipliers `Y`, and their samplers.

mod multiplier;
mod stable;
mod weight;

pub use multiplier::{
    make_finite_mean_multiplier, make_pareto_multiplier, make_slowly_varying_multiplier,
    FiniteMeanKind, MultiplierKind, MultiplierLaw, TailClass,
};
pub use stable::{
    positive_stable, positive_stable_half_cdf, positive_stable_tail_asymptotic,
    sample_positive_stable, stable_levy_scale,
};
pub use weight::{make_weight_law, Atom, WeightKind, WeightLaw};
