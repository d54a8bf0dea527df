//! Exact sampling of one-sided stable laws.
//!
//! Scale convention: `E exp(-λZ) = exp(-λ^β)`. Under this convention the
//! upper tail is `P{Z > z} ~ z^{-β} / Γ(1-β)`, and for `β = ½` the law is
//! Lévy with scale ½, `P{Z ≤ z} = erfc(1 / (2√z))`.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use statrs::function::erf::erfc;
use statrs::function::gamma::gamma;

use crate::error::{LabError, Result};
use crate::rng::SeedStream;

/// One draw via Kanter's representation
/// `Z = sin(βU) / sin(U)^{1/β} · (sin((1-β)U) / E)^{(1-β)/β}`
/// with `U ~ Uniform(0, π)` and `E ~ Exp(1)`.
pub fn positive_stable<R: Rng + ?Sized>(beta: f64, rng: &mut R) -> f64 {
    let u = loop {
        let u = rng.random::<f64>() * std::f64::consts::PI;
        if u > 0.0 {
            break u;
        }
    };
    let e: f64 = Exp1.sample(rng);
    let a = (beta * u).sin() / u.sin().powf(1.0 / beta);
    let b = (((1.0 - beta) * u).sin() / e).powf((1.0 - beta) / beta);
    a * b
}

/// `count` i.i.d. draws with Laplace transform `exp(-λ^β)`.
pub fn sample_positive_stable(beta: f64, stream: SeedStream, count: usize) -> Result<Vec<f64>> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(LabError::param("beta", format!("{beta} not in (0,1)")));
    }
    let mut rng = stream.rng();
    Ok((0..count)
        .map(|_| positive_stable(beta, &mut rng))
        .collect())
}

/// CDF of the `β = ½` law under the Laplace-exponent convention.
pub fn positive_stable_half_cdf(z: f64) -> f64 {
    if z <= 0.0 {
        0.0
    } else {
        erfc(0.5 / z.sqrt())
    }
}

/// Leading term `z^{-β}/Γ(1-β)` of the upper tail.
pub fn positive_stable_tail_asymptotic(beta: f64, z: f64) -> f64 {
    z.powf(-beta) / gamma(1.0 - beta)
}

/// Scale `Γ(1-β)^{1/β}` linking the Lévy measure `Λ̄(v) = v^{-β}` to the
/// Laplace-exponent convention: `id(0, Λ) = Γ(1-β)^{1/β} · Z`.
pub fn stable_levy_scale(beta: f64) -> f64 {
    gamma(1.0 - beta).powf(1.0 / beta)
}
