use serde::{Deserialize, Serialize};
use statrs::function::exponential::integral as expint;

use crate::distributions::{MultiplierKind, MultiplierLaw};
use crate::error::{LabError, Result};
use crate::quadrature::{Estimate, Quadrature};

/// Supported one-dimensional Lévy measures on `(0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LevyKind {
    /// `Λ̄(v) = v^{-β}`, density `β v^{-β-1}`; normalized so `Λ̄(1) = 1`.
    Stable { beta: f64 },
    /// `Λ(ds) = e^{-rs}/s ds`, the gamma subordinator; `Λ̄(v) = E₁(rv)`.
    Gamma { rate: f64 },
}

/// A Lévy measure `Λ` together with the drift `α ≥ 0` of `id(α, Λ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevyTail {
    kind: LevyKind,
    drift_alpha: f64,
}

impl LevyTail {
    pub fn stable(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(LabError::param(
                "beta",
                format!("{beta} not in (0,1); ∫₀¹ sΛ(ds) would diverge"),
            ));
        }
        Ok(Self {
            kind: LevyKind::Stable { beta },
            drift_alpha: 0.0,
        })
    }

    pub fn gamma(rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(LabError::param("rate", format!("{rate} must be positive")));
        }
        Ok(Self {
            kind: LevyKind::Gamma { rate },
            drift_alpha: 0.0,
        })
    }

    pub fn with_drift(self, alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(LabError::param(
                "alpha",
                format!("{alpha} must be non-negative"),
            ));
        }
        Ok(Self {
            drift_alpha: alpha,
            ..self
        })
    }

    /// Limit measure of `n Ḡ(a_n ·)` for a multiplier law in `D(β)`, `β < 1`.
    pub fn for_multiplier(y: &MultiplierLaw) -> Result<Self> {
        match y.kind() {
            MultiplierKind::Pareto { beta } if beta < 1.0 => Self::stable(beta),
            _ => Err(LabError::param(
                "y_law",
                format!(
                    "{} has no non-degenerate Lévy limit under its norming",
                    y.name()
                ),
            )),
        }
    }

    pub fn kind(&self) -> LevyKind {
        self.kind
    }

    pub fn drift_alpha(&self) -> f64 {
        self.drift_alpha
    }

    /// `Λ̄(v) = Λ((v, ∞))`.
    pub fn tail(&self, v: f64) -> f64 {
        if v <= 0.0 {
            return f64::INFINITY;
        }
        match self.kind {
            LevyKind::Stable { beta } => v.powf(-beta),
            LevyKind::Gamma { rate } => {
                let x = rate * v;
                if x > 700.0 {
                    0.0
                } else {
                    expint(x, 1).unwrap_or(0.0)
                }
            }
        }
    }

    /// Density `λ(v)` with `Λ̄(v) = ∫_v^∞ λ`.
    pub fn density(&self, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        match self.kind {
            LevyKind::Stable { beta } => beta * v.powf(-beta - 1.0),
            LevyKind::Gamma { rate } => (-rate * v).exp() / v,
        }
    }

    /// `∫₀^h s Λ(ds)`.
    pub fn first_moment_below(&self, h: f64) -> f64 {
        if h <= 0.0 {
            return 0.0;
        }
        match self.kind {
            LevyKind::Stable { beta } => beta * h.powf(1.0 - beta) / (1.0 - beta),
            LevyKind::Gamma { rate } => -(-rate * h).exp_m1() / rate,
        }
    }

    /// `∫₀¹ s Λ(ds)`.
    pub fn small_mean(&self) -> f64 {
        self.first_moment_below(1.0)
    }

    /// The `s` with `Λ̄(s) = w`.
    pub fn inverse_tail(&self, w: f64) -> f64 {
        match self.kind {
            LevyKind::Stable { beta } => w.powf(-1.0 / beta),
            LevyKind::Gamma { .. } => {
                // Λ̄ is continuous and strictly decreasing; bisect on ln s
                let (mut lo, mut hi) = (-50.0f64, 10.0f64);
                while self.tail(lo.exp()) < w {
                    lo -= 50.0;
                }
                while self.tail(hi.exp()) > w {
                    hi += 10.0;
                }
                while hi - lo > 1e-12 {
                    let mid = 0.5 * (lo + hi);
                    if self.tail(mid.exp()) > w {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                (0.5 * (lo + hi)).exp()
            }
        }
    }

    /// `∫_{(lo, hi)} g(s) Λ(ds)` evaluated in the variable `t = ln s`.
    ///
    /// `breaks` are points in `s` where `g` jumps or kinks.
    pub fn integrate<G: Fn(f64) -> f64>(
        &self,
        quad: &Quadrature,
        g: G,
        lo: f64,
        hi: f64,
        breaks: &[f64],
    ) -> Result<Estimate> {
        if !(hi > lo) {
            return Ok(Estimate::exact(0.0));
        }
        let t_lo = if lo <= 0.0 {
            f64::NEG_INFINITY
        } else {
            lo.ln()
        };
        let t_hi = hi.ln();
        let mut pts = vec![t_lo, t_hi];
        pts.extend(
            breaks
                .iter()
                .filter(|&&b| b > lo && b < hi && b.is_finite())
                .map(|b| b.ln()),
        );
        if t_lo.is_infinite() && t_hi.is_infinite() && pts.len() == 2 {
            pts.push(0.0);
        }
        quad.integrate_pieces(
            |t| {
                let s = t.exp();
                if s == 0.0 || s.is_infinite() {
                    return 0.0;
                }
                let d = self.density(s) * s;
                if d == 0.0 {
                    0.0
                } else {
                    g(s) * d
                }
            },
            &pts,
        )
    }
}

/// `Λ̄(v)`; errors for `v ≤ 0`.
pub fn lambda_bar(levy: &LevyTail, v: f64) -> Result<f64> {
    if !(v > 0.0) {
        return Err(LabError::Domain(format!("Λ̄(v) needs v > 0, got {v}")));
    }
    Ok(levy.tail(v))
}

/// `Λ̄_n(v) = n Ḡ(a_n v)`.
pub fn prelimit_lambda_n(y: &MultiplierLaw, n: u64, v: f64) -> Result<f64> {
    if n == 0 {
        return Err(LabError::param("n", "must be at least 1"));
    }
    if !(v > 0.0) {
        return Err(LabError::Domain(format!("Λ̄_n(v) needs v > 0, got {v}")));
    }
    Ok(n as f64 * y.survival_at_normed(n, v))
}

/// Source of the truncated first moment `α_h`.
#[derive(Debug, Clone, Copy)]
pub enum AlphaSource<'a> {
    /// `α + ∫₀^h zΛ(dz)`.
    Limit(&'a LevyTail),
    /// `∫₀^h v Λ_n(dv) = (n / a_n) E[Y I(Y ≤ a_n h)]`.
    Prelimit { y: &'a MultiplierLaw, n: u64 },
}

pub fn alpha_h(source: AlphaSource<'_>, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(LabError::Domain(format!("α_h needs h > 0, got {h}")));
    }
    match source {
        AlphaSource::Limit(levy) => Ok(levy.drift_alpha() + levy.first_moment_below(h)),
        AlphaSource::Prelimit { y, n } => {
            let a = y.norming(n);
            if !a.is_finite() {
                return Err(LabError::Domain(format!(
                    "norming constant of {} overflows at n = {n}",
                    y.name()
                )));
            }
            Ok(n as f64 / a * y.trunc_mean(a * h))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{make_pareto_multiplier, make_slowly_varying_multiplier};

    #[test]
    fn stable_tail_values() {
        let l = LevyTail::stable(0.5).unwrap();
        assert_eq!(lambda_bar(&l, 4.0).unwrap(), 0.5);
        assert_eq!(lambda_bar(&l, 1.0).unwrap(), 1.0);
        assert!(lambda_bar(&l, 1e30).unwrap() < 1e-14);
        assert!(lambda_bar(&l, 0.0).is_err());
        assert!(lambda_bar(&l, -1.0).is_err());
        assert!(LevyTail::stable(1.0).is_err());
    }

    #[test]
    fn pareto_prelimit_equals_limit() {
        let y = make_pareto_multiplier(0.5).unwrap();
        for &n in &[10u64, 1000, 100_000] {
            let v = prelimit_lambda_n(&y, n, 4.0).unwrap();
            assert!((v - 0.5).abs() < 1e-15);
        }
        assert!(prelimit_lambda_n(&y, 10, 1e40).unwrap() < 1e-15);
    }

    #[test]
    fn slowly_varying_prelimit_at_quantile() {
        let y = make_slowly_varying_multiplier();
        let v = prelimit_lambda_n(&y, 1_000_000, 1.0).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn alpha_h_stable_half() {
        let l = LevyTail::stable(0.5).unwrap();
        assert!((alpha_h(AlphaSource::Limit(&l), 1.0).unwrap() - 1.0).abs() < 1e-15);
        // h ↘ 0 recovers the drift α = 0
        let small = alpha_h(AlphaSource::Limit(&l), 1e-12).unwrap();
        assert!(small < 1e-5);
        // quadrature cross-check of the closed form
        let q = Quadrature::default();
        for &h in &[0.25, 1.0, 3.0] {
            let quad = l.integrate(&q, |s| s, 0.0, h, &[]).unwrap().value;
            assert!((quad - l.first_moment_below(h)).abs() < 1e-8);
        }
        // ∫₀¹ zΛ(dz) ≤ α₁ < ∞
        let drifted = l.with_drift(0.3).unwrap();
        assert!(drifted.small_mean() <= alpha_h(AlphaSource::Limit(&drifted), 1.0).unwrap());
    }

    #[test]
    fn alpha_h_prelimit_converges() {
        let y = make_pareto_multiplier(0.5).unwrap();
        let l = LevyTail::for_multiplier(&y).unwrap();
        for &h in &[0.25, 1.0] {
            let lim = alpha_h(AlphaSource::Limit(&l), h).unwrap();
            let pre = alpha_h(
                AlphaSource::Prelimit {
                    y: &y,
                    n: 1_000_000,
                },
                h,
            )
            .unwrap();
            // exact prelimit is √h − 1/n
            assert!((pre - lim + 1e-6).abs() < 1e-12, "{pre} {lim}");
        }
    }

    #[test]
    fn alpha_h_nondecreasing() {
        let l = LevyTail::gamma(2.0).unwrap().with_drift(0.1).unwrap();
        let mut prev = 0.0;
        for k in -20..5 {
            let a = alpha_h(AlphaSource::Limit(&l), 2f64.powi(k)).unwrap();
            assert!(a >= prev);
            prev = a;
        }
        assert!((alpha_h(AlphaSource::Limit(&l), 1e-15).unwrap() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn gamma_tail_quadrature_and_inverse() {
        let l = LevyTail::gamma(1.5).unwrap();
        let q = Quadrature::default();
        for &v in &[0.01, 0.3, 2.0] {
            let quad = l
                .integrate(&q, |_| 1.0, v, f64::INFINITY, &[])
                .unwrap()
                .value;
            assert!((quad - l.tail(v)).abs() < 1e-8, "v={v}");
            let s = l.inverse_tail(l.tail(v));
            assert!(((s - v) / v).abs() < 1e-9);
        }
    }
}
