use serde::Serialize;

use super::tail::LevyTail;
use crate::distributions::WeightLaw;
use crate::error::{LabError, Result};
use crate::quadrature::{Estimate, Quadrature};

/// The pair `(F, Λ)` realizing `Π(du, dv) = F(du/v) Λ(dv)` on `ℝ × (0, ∞)`.
#[derive(Debug, Clone)]
pub struct BivariateLevyView {
    pub weight: WeightLaw,
    pub levy: LevyTail,
    pub quad: Quadrature,
}

/// Limits of the truncated first moments over `B_h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FirstMoments {
    pub h: f64,
    /// `α + ∫₀^h φ(v) v Λ(dv)`.
    pub y_part: f64,
    /// `α EX + ∫₀^h ψ(v) Λ(dv)`.
    pub xy_part: f64,
    /// `α E|X| + ∫_{B_h} |u| Π(du,dv)`.
    pub abs_part: f64,
    pub abs_err: f64,
}

/// Quadratic integrals over `B_h = {u² + v² ≤ h², v > 0}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecondMoments {
    pub h: f64,
    pub uu: f64,
    pub vv: f64,
    pub uv: f64,
    pub abs_err: f64,
}

impl BivariateLevyView {
    pub fn new(weight: WeightLaw, levy: LevyTail) -> Self {
        Self {
            weight,
            levy,
            quad: Quadrature::default(),
        }
    }

    pub fn with_quadrature(mut self, quad: Quadrature) -> Self {
        self.quad = quad;
        self
    }

    /// `Π̄(u, v) = ∫_{(v,∞)} F̄(u/s) Λ(ds)` for `u, v ≥ 0`.
    pub fn pi_bar(&self, u: f64, v: f64) -> Result<Estimate> {
        check_pair(u, v, false)?;
        if u == 0.0 {
            return Ok(Estimate::exact(
                self.weight.survival(0.0) * self.levy.tail(v),
            ));
        }
        let breaks: Vec<f64> = self
            .weight
            .breakpoints()
            .into_iter()
            .filter(|&c| c > 0.0)
            .map(|c| u / c)
            .collect();
        self.levy.integrate(
            &self.quad,
            |s| self.weight.survival(u / s),
            v,
            f64::INFINITY,
            &breaks,
        )
    }

    /// `Π(−u, v) = ∫_{(v,∞)} F(−u/s) Λ(ds)` for `u > 0`, `v ≥ 0`.
    pub fn pi_neg(&self, u: f64, v: f64) -> Result<Estimate> {
        check_pair(u, v, true)?;
        let breaks: Vec<f64> = self
            .weight
            .breakpoints()
            .into_iter()
            .filter(|&c| c < 0.0)
            .map(|c| -u / c)
            .collect();
        self.levy.integrate(
            &self.quad,
            |s| self.weight.cdf(-u / s),
            v,
            f64::INFINITY,
            &breaks,
        )
    }

    /// `(φ(v), ψ(v))` on the disk of radius `h`.
    pub fn phi_psi(&self, v: f64, h: f64) -> Result<(f64, f64)> {
        if !(v > 0.0 && v <= h) {
            return Err(LabError::Domain(format!(
                "φ/ψ need 0 < v ≤ h, got v={v}, h={h}"
            )));
        }
        let c = varphi(v, h);
        Ok((
            self.weight.trunc_moment(0, c),
            v * self.weight.trunc_moment(1, c),
        ))
    }

    fn disk_breaks(&self, h: f64) -> Vec<f64> {
        let mut b: Vec<f64> = self
            .weight
            .breakpoints()
            .into_iter()
            .map(|c| h / (1.0 + c * c).sqrt())
            .filter(|&v| v < h)
            .collect();
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    fn disk_integral<G: Fn(f64, f64) -> f64>(&self, h: f64, g: G) -> Result<Estimate> {
        let breaks = self.disk_breaks(h);
        self.levy
            .integrate(&self.quad, |v| g(v, varphi(v, h)), 0.0, h, &breaks)
    }

    pub fn truncated_first_moments(&self, h: f64) -> Result<FirstMoments> {
        check_h(h)?;
        let w = &self.weight;
        let y = self.disk_integral(h, |v, c| v * w.trunc_moment(0, c))?;
        let xy = self.disk_integral(h, |v, c| v * w.trunc_moment(1, c))?;
        let ab = self.disk_integral(h, |v, c| v * w.trunc_abs_moment(c))?;
        let alpha = self.levy.drift_alpha();
        let drift = |m: f64| if alpha == 0.0 { 0.0 } else { alpha * m };
        Ok(FirstMoments {
            h,
            y_part: drift(1.0) + y.value,
            xy_part: drift(w.mean()) + xy.value,
            abs_part: drift(w.abs_mean()) + ab.value,
            abs_err: y.abs_err + xy.abs_err + ab.abs_err,
        })
    }

    pub fn truncated_second_moments(&self, h: f64) -> Result<SecondMoments> {
        check_h(h)?;
        let w = &self.weight;
        let uu = self.disk_integral(h, |v, c| v * v * w.trunc_moment(2, c))?;
        let vv = self.disk_integral(h, |v, c| v * v * w.trunc_moment(0, c))?;
        let uv = self.disk_integral(h, |v, c| v * v * w.trunc_moment(1, c))?;
        Ok(SecondMoments {
            h,
            uu: uu.value,
            vv: vv.value,
            uv: uv.value,
            abs_err: uu.abs_err + vv.abs_err + uv.abs_err,
        })
    }

    /// Second moments along `h = 2^{-k}`, `k = 0..=k_max`.
    pub fn small_h_scan(&self, k_max: u32) -> Result<Vec<SecondMoments>> {
        (0..=k_max)
            .map(|k| self.truncated_second_moments(2f64.powi(-(k as i32))))
            .collect()
    }
}

fn varphi(v: f64, h: f64) -> f64 {
    ((h * h - v * v).max(0.0)).sqrt() / v
}

fn check_h(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(LabError::Domain(format!(
            "h must be positive and finite, got {h}"
        )))
    }
}

fn check_pair(u: f64, v: f64, strict_u: bool) -> Result<()> {
    if u.is_nan() || v.is_nan() || u < 0.0 || v < 0.0 {
        return Err(LabError::Domain(format!(
            "(u, v) = ({u}, {v}) must be non-negative"
        )));
    }
    if strict_u && u == 0.0 {
        return Err(LabError::Domain("Π(−u, v) needs u > 0".into()));
    }
    if u == 0.0 && v == 0.0 {
        return Err(LabError::Domain("Π̄(0, 0) is infinite".into()));
    }
    Ok(())
}
