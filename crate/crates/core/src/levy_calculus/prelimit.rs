use serde::Serialize;

use super::bivariate::BivariateLevyView;
use super::tail::prelimit_lambda_n;
use crate::distributions::{MultiplierLaw, WeightLaw};
use crate::error::{LabError, Result};
use crate::rng::SeedStream;

/// Monte Carlo settings for prelimit quantities.
///
/// The `Y` factor is always integrated analytically; only `X` is sampled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McSettings {
    pub draws: usize,
    pub stream: SeedStream,
}

impl Default for McSettings {
    fn default() -> Self {
        Self {
            draws: 1_000_000,
            stream: SeedStream::new(0x5eed, 0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_err: f64,
}

impl McEstimate {
    fn from_values(values: impl Iterator<Item = f64>) -> Self {
        let (mut n, mut mean, mut m2) = (0.0f64, 0.0f64, 0.0f64);
        for x in values {
            n += 1.0;
            let d = x - mean;
            mean += d / n;
            m2 += d * (x - mean);
        }
        let var = if n > 1.0 { m2 / (n - 1.0) } else { 0.0 };
        Self {
            value: mean,
            std_err: (var / n).sqrt(),
        }
    }
}

fn finite_norming(y: &MultiplierLaw, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(LabError::param("n", "must be at least 1"));
    }
    let a = y.norming(n);
    if a.is_finite() && a > 0.0 {
        Ok(a)
    } else {
        Err(LabError::Domain(format!(
            "a_n for {} is not representable at n = {n}",
            y.name()
        )))
    }
}

/// `Π̄_n(u, v) = n P{XY > a_n u, Y > a_n v}` for `u ≥ 0`, and
/// `n P{XY ≤ −a_n|u|, Y > a_n v}` for `u < 0`.
pub fn prelimit_pi_n(
    x: &WeightLaw,
    y: &MultiplierLaw,
    n: u64,
    u: f64,
    v: f64,
    mc: &McSettings,
) -> Result<McEstimate> {
    if n == 0 {
        return Err(LabError::param("n", "must be at least 1"));
    }
    if !(v >= 0.0) || u.is_nan() || (u == 0.0 && v == 0.0) {
        return Err(LabError::Domain(format!("invalid (u, v) = ({u}, {v})")));
    }
    if u == 0.0 {
        return Ok(McEstimate {
            value: x.survival(0.0) * prelimit_lambda_n(y, n, v)?,
            std_err: 0.0,
        });
    }
    let nf = n as f64;
    let xs = x.sample_batch(mc.stream, mc.draws);
    let tail = |t: f64| nf * y.survival_at_normed(n, t);
    let est = if u > 0.0 {
        McEstimate::from_values(
            xs.iter()
                .map(|&xi| if xi > 0.0 { tail(v.max(u / xi)) } else { 0.0 }),
        )
    } else {
        let au = -u;
        McEstimate::from_values(
            xs.iter()
                .map(|&xi| if xi < 0.0 { tail(v.max(au / -xi)) } else { 0.0 }),
        )
    };
    Ok(est)
}

/// Prelimit truncated moments over `B_h` at sample size `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrelimitMoments {
    pub n: u64,
    pub h: f64,
    pub y_part: McEstimate,
    pub xy_part: McEstimate,
    pub uu: McEstimate,
    pub vv: McEstimate,
    pub uv: McEstimate,
}

/// `n/a_n · E[Y·I(√(X²Y²+Y²) ≤ a_n h)]` and the matching
/// `XY`, `X²Y²`, `Y²`, `XY²` moments.
pub fn prelimit_truncated_moments(
    x: &WeightLaw,
    y: &MultiplierLaw,
    n: u64,
    h: f64,
    mc: &McSettings,
) -> Result<PrelimitMoments> {
    if !(h > 0.0) {
        return Err(LabError::Domain(format!("h must be positive, got {h}")));
    }
    let a = finite_norming(y, n)?;
    let nf = n as f64;
    let xs = x.sample_batch(mc.stream, mc.draws);
    let mut parts: Vec<[f64; 5]> = Vec::with_capacity(xs.len());
    for &xi in &xs {
        let c = a * h / (1.0 + xi * xi).sqrt();
        let m1 = nf / a * y.trunc_mean(c);
        let m2 = nf / (a * a) * y.trunc_second(c);
        parts.push([m1, xi * m1, xi * xi * m2, m2, xi * m2]);
    }
    let col = |j: usize| McEstimate::from_values(parts.iter().map(|p| p[j]));
    Ok(PrelimitMoments {
        n,
        h,
        y_part: col(0),
        xy_part: col(1),
        uu: col(2),
        vv: col(3),
        uv: col(4),
    })
}

/// Prelimit against limit on a grid, with a pass/fail verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub quantity: String,
    pub n: u64,
    pub grid: Vec<Vec<f64>>,
    pub prelimit: Vec<f64>,
    pub limit: Vec<f64>,
    pub std_err: Vec<f64>,
    pub sup_abs_gap: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl ConvergenceReport {
    pub fn new(
        quantity: impl Into<String>,
        n: u64,
        grid: Vec<Vec<f64>>,
        prelimit: Vec<f64>,
        limit: Vec<f64>,
        std_err: Vec<f64>,
        tolerance: f64,
    ) -> Self {
        let sup_abs_gap = prelimit
            .iter()
            .zip(&limit)
            .map(|(p, l)| (p - l).abs())
            .fold(0.0, f64::max);
        Self {
            quantity: quantity.into(),
            n,
            grid,
            prelimit,
            limit,
            std_err,
            sup_abs_gap,
            tolerance,
            passed: sup_abs_gap <= tolerance,
        }
    }
}

/// Evaluation grid for [`check_levy_convergence`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceGrid {
    /// Points `v > 0` for `Λ̄_n(v) → Λ̄(v)`.
    pub lambda_v: Vec<f64>,
    /// Points `(u, v)`; negative `u` compares against `Π(−|u|, v)`.
    pub pi_points: Vec<(f64, f64)>,
    /// Absolute tolerance for the `Λ̄` comparison.
    pub lambda_tol: f64,
    /// Multiple of the largest MC standard error allowed for `Π`.
    pub se_multiple: f64,
}

impl Default for ConvergenceGrid {
    fn default() -> Self {
        Self {
            lambda_v: vec![0.25, 0.5, 1.0, 2.0, 4.0],
            pi_points: vec![(0.5, 0.0), (1.0, 0.0), (2.0, 0.0)],
            lambda_tol: 1e-12,
            se_multiple: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevyConvergence {
    pub lambda: Vec<ConvergenceReport>,
    pub pi: Vec<ConvergenceReport>,
    /// Sup-gaps never increase along `n_list`.
    pub lambda_monotone: bool,
    pub pi_monotone: bool,
    pub passed: bool,
}

fn nonincreasing(reports: &[ConvergenceReport]) -> bool {
    reports
        .windows(2)
        .all(|w| w[1].sup_abs_gap <= w[0].sup_abs_gap + f64::EPSILON)
}

pub fn check_levy_convergence(
    x: &WeightLaw,
    y: &MultiplierLaw,
    view: &BivariateLevyView,
    n_list: &[u64],
    grid: &ConvergenceGrid,
    mc: &McSettings,
) -> Result<LevyConvergence> {
    let lambda_limit: Vec<f64> = grid.lambda_v.iter().map(|&v| view.levy.tail(v)).collect();
    let mut pi_limit = Vec::with_capacity(grid.pi_points.len());
    let mut quad_err = 0.0f64;
    for &(u, v) in &grid.pi_points {
        let e = if u >= 0.0 {
            view.pi_bar(u, v)?
        } else {
            view.pi_neg(-u, v)?
        };
        quad_err = quad_err.max(e.abs_err);
        pi_limit.push(e.value);
    }

    let mut lambda = Vec::new();
    let mut pi = Vec::new();
    for (k, &n) in n_list.iter().enumerate() {
        let pre = grid
            .lambda_v
            .iter()
            .map(|&v| prelimit_lambda_n(y, n, v))
            .collect::<Result<Vec<_>>>()?;
        lambda.push(ConvergenceReport::new(
            "lambda_bar",
            n,
            grid.lambda_v.iter().map(|&v| vec![v]).collect(),
            pre,
            lambda_limit.clone(),
            vec![0.0; grid.lambda_v.len()],
            grid.lambda_tol,
        ));

        let mut pre = Vec::new();
        let mut se = Vec::new();
        for (j, &(u, v)) in grid.pi_points.iter().enumerate() {
            let settings = McSettings {
                draws: mc.draws,
                stream: mc.stream.child((k * grid.pi_points.len() + j) as u64),
            };
            let e = prelimit_pi_n(x, y, n, u, v, &settings)?;
            pre.push(e.value);
            se.push(e.std_err);
        }
        let max_se = se.iter().copied().fold(0.0, f64::max);
        pi.push(ConvergenceReport::new(
            "pi",
            n,
            grid.pi_points.iter().map(|&(u, v)| vec![u, v]).collect(),
            pre,
            pi_limit.clone(),
            se,
            grid.se_multiple * max_se + quad_err,
        ));
    }
    let passed = lambda.iter().chain(&pi).all(|r| r.passed);
    Ok(LevyConvergence {
        lambda_monotone: nonincreasing(&lambda),
        pi_monotone: nonincreasing(&pi),
        lambda,
        pi,
        passed,
    })
}

/// `Λ̄_n(v)` over a grid of `v` for each `n`, with a flatness verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaScan {
    pub n_list: Vec<u64>,
    pub v_grid: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    /// At the largest `n`, `max/min` over the grid is below `1 + flat_tol`:
    /// the prelimit measures do not separate jump sizes, so no
    /// non-degenerate `Λ` exists under this norming.
    pub flat: bool,
    pub flat_tol: f64,
}

pub fn lambda_scan(
    y: &MultiplierLaw,
    n_list: &[u64],
    v_grid: &[f64],
    flat_tol: f64,
) -> Result<LambdaScan> {
    let values = n_list
        .iter()
        .map(|&n| {
            v_grid
                .iter()
                .map(|&v| prelimit_lambda_n(y, n, v))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let flat = values.last().is_some_and(|row| {
        let hi = row.iter().copied().fold(f64::MIN, f64::max);
        let lo = row.iter().copied().fold(f64::MAX, f64::min);
        lo > 0.0 && hi / lo < 1.0 + flat_tol
    });
    Ok(LambdaScan {
        n_list: n_list.to_vec(),
        v_grid: v_grid.to_vec(),
        values,
        flat,
        flat_tol,
    })
}
