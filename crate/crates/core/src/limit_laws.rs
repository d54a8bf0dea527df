//! The limit law of `T_n` when `Y ∈ D(β)`, `0 < β < 1`, its upper-tail
//! asymptotics, and the product-tail ratio `P{XY > t} / Ḡ(t)`.
//!
//! With `I_s(x) = ∫|u−x|^β sgn(x−u) F(du)` and `I_a(x) = ∫|u−x|^β F(du)`,
//!
//! ```text
//! P{T ≤ x} = ½ + (1/(πβ)) · arctan[(I_s(x)/I_a(x)) · tan(πβ/2)].
//! ```

use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::distributions::{MultiplierKind, MultiplierLaw, WeightLaw};
use crate::error::{LabError, Result};
use crate::levy_calculus::{ConvergenceReport, McSettings};
use crate::quadrature::Quadrature;

#[derive(Debug, Clone)]
pub struct BreimanLimit {
    beta: f64,
    weight: WeightLaw,
    quad: Quadrature,
}

/// One row of a tabulated limit law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BreimanRow {
    pub x: f64,
    pub cdf: f64,
    /// Tail asymptotic at `x`; `NaN` for `x ≤ 0`.
    pub tail: f64,
    pub degenerate: bool,
}

/// `tan(πβ/2) / (πβ (1 + tan²(πβ/2)))`.
pub fn tail_prefactor(beta: f64) -> f64 {
    let t = (PI * beta / 2.0).tan();
    t / (PI * beta * (1.0 + t * t))
}

impl BreimanLimit {
    pub fn new(beta: f64, weight: WeightLaw) -> Result<Self> {
        Self::with_tolerance(beta, weight, Quadrature::default().abs_tol)
    }

    pub fn with_tolerance(beta: f64, weight: WeightLaw, quad_tol: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(LabError::param("beta", format!("{beta} not in (0,1)")));
        }
        if !(quad_tol > 0.0) {
            return Err(LabError::param("quad_tol", "must be positive"));
        }
        let eps = 1e-3;
        let m = weight.beta_moment_pos(beta + eps) + weight.beta_moment_neg(beta + eps);
        if !m.is_finite() {
            return Err(LabError::param(
                "weight",
                format!("{} has E|X|^(β+ε) = ∞ for β = {beta}", weight.name()),
            ));
        }
        Ok(Self {
            beta,
            weight,
            quad: Quadrature::with_abs_tol(quad_tol),
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn weight(&self) -> &WeightLaw {
        &self.weight
    }

    /// `∫_{lo}^{hi} g(u) F(du)` over the absolutely continuous part, `lo < hi`.
    fn integrate_density<G: Fn(f64) -> f64>(&self, g: G, lo: f64, hi: f64) -> Result<f64> {
        if self.weight.density(0.5).is_none() && self.weight.density(-0.5).is_none() {
            return Ok(0.0);
        }
        let mut pts = vec![lo, hi];
        pts.extend(
            self.weight
                .breakpoints()
                .into_iter()
                .filter(|&b| b > lo && b < hi),
        );
        let (slo, shi) = self.weight.support();
        pts.retain(|&p| p >= slo.min(hi) && p <= shi.max(lo));
        pts.push(lo.max(slo));
        pts.push(hi.min(shi));
        let a = lo.max(slo);
        let b = hi.min(shi);
        if !(b > a) {
            return Ok(0.0);
        }
        pts.retain(|&p| p >= a && p <= b);
        let w = &self.weight;
        Ok(self
            .quad
            .integrate_pieces(|u| g(u) * w.density(u).unwrap_or(0.0), &pts)?
            .value)
    }

    /// `(I_s(x), I_a(x))`; atoms exactly at `x` contribute `0` via `sgn(0) = 0`.
    pub fn integrals(&self, x: f64) -> Result<(f64, f64)> {
        let b = self.beta;
        let below = self.integrate_density(|u| (x - u).powf(b), f64::NEG_INFINITY, x)?;
        let above = self.integrate_density(|u| (u - x).powf(b), x, f64::INFINITY)?;
        let (mut is, mut ia) = (below - above, below + above);
        for a in self.weight.atoms() {
            let d = x - a.location;
            let p = d.abs().powf(b);
            is += a.mass * p * d.signum() * if d == 0.0 { 0.0 } else { 1.0 };
            ia += a.mass * p;
        }
        Ok((is, ia))
    }

    /// `P{T ≤ x}` and a flag set when `I_a(x) = 0` (point mass at `x`),
    /// in which case the value is the convention `½`.
    pub fn cdf_flagged(&self, x: f64) -> Result<(f64, bool)> {
        let (is, ia) = self.integrals(x)?;
        if ia <= 0.0 {
            return Ok((0.5, true));
        }
        let r = (is / ia).clamp(-1.0, 1.0);
        let b = self.beta;
        let v = 0.5 + (r * (PI * b / 2.0).tan()).atan() / (PI * b);
        Ok((v.clamp(0.0, 1.0), false))
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        self.cdf_flagged(x).map(|(v, _)| v)
    }

    /// `2K ∫_x^∞ (u/x − 1)^β F(du)` with `K` from [`tail_prefactor`].
    pub fn tail(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(LabError::Domain(format!(
                "tail asymptotic needs x > 0, got {x}"
            )));
        }
        let b = self.beta;
        let scale = self.weight.survival(x).max(f64::MIN_POSITIVE);
        let local = Self {
            quad: Quadrature {
                abs_tol: self.quad.abs_tol * scale,
                ..self.quad
            },
            ..self.clone()
        };
        let mut s = local.integrate_density(|u| (u / x - 1.0).powf(b), x, f64::INFINITY)?;
        for a in self.weight.atoms() {
            if a.location > x {
                s += a.mass * (a.location / x - 1.0).powf(b);
            }
        }
        Ok(2.0 * tail_prefactor(b) * s)
    }

    /// `2K (1 − F(2x))`.
    pub fn tail_lower_bound(&self, x: f64) -> f64 {
        2.0 * tail_prefactor(self.beta) * self.weight.survival(2.0 * x)
    }

    /// `2K [1 − F(x) + β x^{−β} ∫_x^∞ (1 − F(u)) u^{β−1} du]`.
    pub fn tail_upper_bound(&self, x: f64) -> Result<f64> {
        let b = self.beta;
        let w = &self.weight;
        let mut pts = vec![x, f64::INFINITY];
        pts.extend(w.breakpoints().into_iter().filter(|&p| p > x));
        let int = self
            .quad
            .integrate_pieces(|u| w.survival(u) * u.powf(b - 1.0), &pts)?
            .value;
        Ok(2.0 * tail_prefactor(b) * (w.survival(x) + b * x.powf(-b) * int))
    }

    /// Central finite difference of the CDF, step `1e-4`.
    pub fn density_fd(&self, x: f64) -> Result<f64> {
        let h = 1e-4;
        Ok((self.cdf(x + h)? - self.cdf(x - h)?) / (2.0 * h))
    }

    /// Smallest grid-free `x` with `P{T ≤ x} ≥ p`, by bisection.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(LabError::param("p", format!("{p} not in (0,1)")));
        }
        let (mut lo, mut hi) = (-1.0f64, 1.0f64);
        while self.cdf(lo)? > p {
            lo *= 2.0;
            if lo < -1e300 {
                return Err(LabError::Domain(
                    "quantile below representable range".into(),
                ));
            }
        }
        while self.cdf(hi)? < p {
            hi *= 2.0;
            if hi > 1e300 {
                return Err(LabError::Domain(
                    "quantile above representable range".into(),
                ));
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid)? < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(hi)
    }

    /// Evaluate CDF and tail on a grid, in parallel.
    pub fn tabulate(&self, grid: &[f64]) -> Result<Vec<BreimanRow>> {
        grid.par_iter()
            .map(|&x| {
                let (cdf, degenerate) = self.cdf_flagged(x)?;
                let tail = if x > 0.0 { self.tail(x)? } else { f64::NAN };
                Ok(BreimanRow {
                    x,
                    cdf,
                    tail,
                    degenerate,
                })
            })
            .collect()
    }
}

/// `lim P{T > x} / (1 − F(x))` when `1 − F` is regularly varying with
/// index `−α`: `2β B(β, α−β) K`, evaluated by quadrature.
pub fn regvar_tail_constant(beta: f64, alpha_rv: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(LabError::param("beta", format!("{beta} not in (0,1)")));
    }
    if !(alpha_rv > beta && alpha_rv.is_finite()) {
        return Err(LabError::param(
            "alpha_rv",
            format!("{alpha_rv} must exceed β = {beta}"),
        ));
    }
    // y = 1 + t^{1/β} turns ∫₁^∞ y^{−α}(y−1)^{β−1} dy into ∫₀^∞ (1+t^{1/β})^{−α} dt / β
    let q = Quadrature {
        abs_tol: 1e-13,
        rel_tol: 1e-12,
        max_intervals: 20_000,
    };
    let inner = q
        .integrate_pieces(
            |t| (1.0 + t.powf(1.0 / beta)).powf(-alpha_rv),
            &[0.0, 1.0, f64::INFINITY],
        )?
        .value
        / beta;
    Ok(2.0 * beta * inner * tail_prefactor(beta))
}

/// `P{XY > t}/Ḡ(t)` and `P{XY < −t}/Ḡ(t)` along a grid, against
/// `E[X^β; X > 0]` and `E[(−X)^β; X < 0]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductTailReport {
    pub positive: ConvergenceReport,
    pub negative: ConvergenceReport,
}

pub fn product_tail_ratio(
    x: &WeightLaw,
    y: &MultiplierLaw,
    t_grid: &[f64],
    rel_tol: f64,
    mc: &McSettings,
) -> Result<ProductTailReport> {
    let beta = match y.kind() {
        MultiplierKind::Pareto { beta } => beta,
        _ => {
            return Err(LabError::param(
                "y_law",
                "product tail ratio needs a Pareto multiplier",
            ))
        }
    };
    let xs = x.sample_batch(mc.stream, mc.draws);
    let branch = |sign: f64| -> (Vec<f64>, Vec<f64>) {
        t_grid
            .iter()
            .map(|&t| {
                let g = y.survival(t);
                let vals = xs.iter().map(|&xi| {
                    let z = sign * xi;
                    if z > 0.0 {
                        y.survival(t / z) / g
                    } else {
                        0.0
                    }
                });
                let (mut k, mut mean, mut m2) = (0.0f64, 0.0f64, 0.0f64);
                for v in vals {
                    k += 1.0;
                    let d = v - mean;
                    mean += d / k;
                    m2 += d * (v - mean);
                }
                (mean, (m2 / (k - 1.0) / k).sqrt())
            })
            .unzip()
    };
    let make = |name: &str, sign: f64, limit: f64| {
        let (vals, se) = branch(sign);
        ConvergenceReport::new(
            name,
            0,
            t_grid.iter().map(|&t| vec![t]).collect(),
            vals,
            vec![limit; t_grid.len()],
            se,
            rel_tol * limit,
        )
    };
    Ok(ProductTailReport {
        positive: make("product_tail_pos", 1.0, x.beta_moment_pos(beta)),
        negative: make("product_tail_neg", -1.0, x.beta_moment_neg(beta)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{make_pareto_multiplier, make_weight_law, WeightKind};
    use crate::rng::SeedStream;

    fn lim(kind: WeightKind, beta: f64) -> BreimanLimit {
        BreimanLimit::new(beta, make_weight_law(kind).unwrap()).unwrap()
    }

    #[test]
    fn symmetric_laws_centered() {
        for k in [WeightKind::Rademacher, WeightKind::StandardGaussian] {
            assert!((lim(k, 0.5).cdf(0.0).unwrap() - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn point_mass_step() {
        let l = lim(WeightKind::PointMass { c: 1.0 }, 0.5);
        assert_eq!(l.cdf(0.5).unwrap(), 0.0);
        assert_eq!(l.cdf(1.5).unwrap(), 1.0);
        assert_eq!(l.cdf_flagged(1.0).unwrap(), (0.5, true));
    }

    #[test]
    fn nonnegative_weights_below_zero() {
        let l = lim(WeightKind::Uniform01, 0.5);
        for &x in &[-0.1, -3.0] {
            assert_eq!(l.cdf(x).unwrap(), 0.0);
        }
        assert_eq!(l.cdf(1.0).unwrap(), 1.0);
    }

    #[test]
    fn uniform_half_closed_form() {
        // for F uniform01, β = ½: I_a(x) = (2/3)(x^{3/2} + (1−x)^{3/2})
        // and I_s(x) = (2/3)(x^{3/2} − (1−x)^{3/2})
        let l = lim(WeightKind::Uniform01, 0.5);
        for &x in &[0.1f64, 0.5, 0.8] {
            let a = x.powf(1.5);
            let b = (1.0 - x).powf(1.5);
            let want = 0.5 + ((a - b) / (a + b)).atan() * 2.0 / PI;
            assert!((l.cdf(x).unwrap() - want).abs() < 1e-10);
        }
    }

    #[test]
    fn monotone_and_symmetric_on_grid() {
        for k in [
            WeightKind::StandardGaussian,
            WeightKind::Uniform01,
            WeightKind::SymmetricPareto { gamma: 0.8 },
            WeightKind::Bernoulli {
                p: 0.3,
                x0: -1.0,
                x1: 2.0,
            },
        ] {
            let l = lim(k, 0.5);
            let grid: Vec<f64> = (0..1000).map(|i| -5.0 + 10.0 * i as f64 / 999.0).collect();
            let rows = l.tabulate(&grid).unwrap();
            for w in rows.windows(2) {
                assert!(w[1].cdf >= w[0].cdf - 1e-12, "{k:?} at {}", w[1].x);
            }
        }
        let g = lim(WeightKind::StandardGaussian, 0.3);
        for &x in &[0.3, 1.0, 2.5] {
            assert!((g.cdf(-x).unwrap() + g.cdf(x).unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn tail_matches_complement_asymptotically() {
        let l = lim(WeightKind::SymmetricPareto { gamma: 0.8 }, 0.5);
        let mut prev = f64::INFINITY;
        for k in [4, 8, 12, 16] {
            let x = 2f64.powi(k);
            let t = l.tail(x).unwrap();
            let rel = ((1.0 - l.cdf(x).unwrap()) - t).abs() / t;
            assert!(rel < prev, "k={k}: {rel}");
            prev = rel;
        }
    }

    #[test]
    fn tail_bounds_hold() {
        let l = lim(WeightKind::StandardGaussian, 0.5);
        assert!((tail_prefactor(0.5) - 1.0 / PI).abs() < 1e-15);
        for &x in &[0.5, 1.0, 2.0] {
            let t = l.tail(x).unwrap();
            assert!(l.tail_lower_bound(x) <= t);
            assert!(t <= l.tail_upper_bound(x).unwrap());
        }
    }

    #[test]
    fn regvar_constant_oracles() {
        use statrs::function::beta::beta as beta_fn;
        assert!((regvar_tail_constant(0.5, 1.0).unwrap() - 1.0).abs() < 1e-8);
        for &(b, a) in &[(0.5, 0.8), (0.3, 1.7), (0.7, 0.9)] {
            let want = 2.0 * b * beta_fn(b, a - b) * tail_prefactor(b);
            let got = regvar_tail_constant(b, a).unwrap();
            assert!(
                (got - want).abs() < 1e-8 * want.max(1.0),
                "({b},{a}): {got} vs {want}"
            );
        }
        assert!(regvar_tail_constant(0.5, 0.4).is_err());
        assert!(
            regvar_tail_constant(0.5, 200.0).unwrap() < regvar_tail_constant(0.5, 2.0).unwrap()
        );
    }

    #[test]
    fn pareto_tail_integral_is_exact() {
        // for F = symmetric Pareto(γ) the tail asymptotic equals
        // F̄(x)·2βB(β, γ−β)K for every x ≥ 1
        let l = lim(WeightKind::SymmetricPareto { gamma: 0.8 }, 0.5);
        let c = regvar_tail_constant(0.5, 0.8).unwrap();
        for &x in &[1.0, 10.0, 1e4] {
            let want = c * l.weight().survival(x);
            assert!(((l.tail(x).unwrap() - want) / want).abs() < 1e-7);
        }
    }

    #[test]
    fn product_ratio_examples() {
        let y = make_pareto_multiplier(0.5).unwrap();
        let mc = McSettings {
            draws: 100_000,
            stream: SeedStream::new(3, 1),
        };
        let u = make_weight_law(WeightKind::Uniform01).unwrap();
        let r = product_tail_ratio(&u, &y, &[1e3], 0.05, &mc).unwrap();
        assert!(r.positive.passed);
        assert!((r.positive.limit[0] - 2.0 / 3.0).abs() < 1e-15);
        let one = make_weight_law(WeightKind::PointMass { c: 1.0 }).unwrap();
        let r = product_tail_ratio(&one, &y, &[1.0, 10.0, 1e5], 1e-12, &mc).unwrap();
        assert!(r.positive.prelimit.iter().all(|&v| (v - 1.0).abs() < 1e-12));
        let rad = make_weight_law(WeightKind::Rademacher).unwrap();
        let r = product_tail_ratio(&rad, &y, &[1e4], 0.05, &mc).unwrap();
        assert_eq!(r.positive.limit[0], 0.5);
        assert_eq!(r.negative.limit[0], 0.5);
    }
}
