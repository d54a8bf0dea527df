use rand::Rng;
use rand_distr::{Distribution, Open01, Poisson};
use rayon::prelude::*;
use serde::Serialize;

use super::sample::{EmpiricalSample, PairSample, SimConfig};
use crate::distributions::{MultiplierLaw, WeightLaw};
use crate::error::{LabError, Result};
use crate::levy_calculus::{BivariateLevyView, LevyKind, LevyTail};
use crate::rng::SeedStream;

const MAX_POISSON_MEAN: f64 = 1e8;

/// Sufficient statistics of one replication.
///
/// Weights are stored relative to the largest `Y`: `w_i = exp(ln Y_i − m)`
/// with `m = max ln Y_i`, so the slowly varying law never overflows.
#[derive(Debug, Clone, Copy)]
struct RepStats {
    log_max: f64,
    sum_w: f64,
    sum_xw: f64,
    sum_w2: f64,
    x_at_max: f64,
}

impl RepStats {
    fn t_n(&self) -> f64 {
        if self.sum_w == 0.0 || self.log_max == f64::NEG_INFINITY {
            0.0
        } else {
            self.sum_xw / self.sum_w
        }
    }
}

fn draw_rep(
    x: &WeightLaw,
    y: &MultiplierLaw,
    n: usize,
    stream: SeedStream,
    xs: &mut Vec<f64>,
    ls: &mut Vec<f64>,
) -> RepStats {
    let mut rng = stream.rng();
    xs.clear();
    ls.clear();
    let mut log_max = f64::NEG_INFINITY;
    let mut arg = 0usize;
    for i in 0..n {
        xs.push(x.sample(&mut rng));
        let l = y.sample_ln(&mut rng);
        ls.push(l);
        // strict comparison keeps the smallest index among ties
        if l > log_max {
            log_max = l;
            arg = i;
        }
    }
    let (mut sum_w, mut sum_xw, mut sum_w2) = (0.0, 0.0, 0.0);
    if log_max > f64::NEG_INFINITY {
        for (&xi, &li) in xs.iter().zip(ls.iter()) {
            let w = (li - log_max).exp();
            sum_w += w;
            sum_xw += xi * w;
            sum_w2 += w * w;
        }
    }
    RepStats {
        log_max,
        sum_w,
        sum_xw,
        sum_w2,
        x_at_max: xs[arg],
    }
}

fn run_reps(
    x: &WeightLaw,
    y: &MultiplierLaw,
    n: u64,
    reps: usize,
    seed: SeedStream,
) -> Vec<RepStats> {
    let n = n as usize;
    (0..reps)
        .into_par_iter()
        .map_init(
            || (Vec::with_capacity(n), Vec::with_capacity(n)),
            |(xs, ls), r| draw_rep(x, y, n, seed.child(r as u64), xs, ls),
        )
        .collect()
}

fn law_meta(x: &WeightLaw, y: &MultiplierLaw) -> String {
    format!("X={}; Y={}", x.name(), y.name())
}

/// `reps` draws of `T_n = ΣX_iY_i / ΣY_i`.
pub fn simulate_tn(x: &WeightLaw, y: &MultiplierLaw, cfg: &SimConfig) -> Result<EmpiricalSample> {
    cfg.validate()?;
    let stats = run_reps(x, y, cfg.n, cfg.reps, cfg.seed);
    Ok(EmpiricalSample::new(
        stats.iter().map(RepStats::t_n).collect(),
        Some(cfg.n),
        law_meta(x, y),
    ))
}

/// `reps` draws of `(ΣX_iY_i / a_n, ΣY_i / a_n)`.
pub fn simulate_normed_pair(
    x: &WeightLaw,
    y: &MultiplierLaw,
    cfg: &SimConfig,
) -> Result<PairSample> {
    cfg.validate()?;
    let ln_a = y.log_norming(cfg.n);
    let stats = run_reps(x, y, cfg.n, cfg.reps, cfg.seed);
    let (w1, w2) = stats
        .iter()
        .map(|s| {
            let scale = (s.log_max - ln_a).exp();
            (scale * s.sum_xw, scale * s.sum_w)
        })
        .unzip();
    Ok(PairSample {
        w1,
        w2,
        n_meta: Some(cfg.n),
        law_meta: law_meta(x, y),
        truncation_bias: None,
    })
}

/// Mean of the dropped jumps at cutoff `ε`, for `(W₁, W₂)`.
pub fn truncation_bias(view: &BivariateLevyView, cutoff: f64) -> [f64; 2] {
    let m = view.levy.first_moment_below(cutoff);
    [m * view.weight.abs_mean(), m]
}

/// Largest cutoff whose dropped-jump bias stays below `target` in both
/// coordinates (only in `W₂` when `E|X| = ∞`).
pub fn default_cutoff(view: &BivariateLevyView, target: f64) -> f64 {
    let ax = view.weight.abs_mean();
    let factor = if ax.is_finite() { ax.max(1.0) } else { 1.0 };
    let ok = |e: f64| view.levy.first_moment_below(e) * factor < target;
    if ok(0.5) {
        return 0.5;
    }
    let (mut lo, mut hi) = (-700.0f64, 0.5f64.ln());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ok(mid.exp()) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo.exp()
}

fn draw_jump<R: Rng + ?Sized>(
    levy: &LevyTail,
    cutoff: f64,
    tail_at_cutoff: f64,
    rng: &mut R,
) -> f64 {
    let u: f64 = Open01.sample(rng);
    match levy.kind() {
        LevyKind::Stable { beta } => cutoff * u.powf(-1.0 / beta),
        LevyKind::Gamma { .. } => levy.inverse_tail(u * tail_at_cutoff),
    }
}

/// Compound-Poisson draws of the limit pair `(αEX + ΣX_js_j, α + Σs_j)`,
/// keeping only jumps `s_j > ε`.
pub fn simulate_limit_pair(view: &BivariateLevyView, cfg: &SimConfig) -> Result<PairSample> {
    cfg.validate()?;
    let eps = cfg.cutoff;
    let mean = view.levy.tail(eps);
    if !(mean.is_finite() && mean <= MAX_POISSON_MEAN) {
        return Err(LabError::param(
            "cutoff",
            format!("Λ̄({eps}) = {mean} exceeds the Poisson mean limit {MAX_POISSON_MEAN}"),
        ));
    }
    let alpha = view.levy.drift_alpha();
    let (a1, a2) = if alpha == 0.0 {
        (0.0, 0.0)
    } else {
        (alpha * view.weight.mean(), alpha)
    };
    let poisson = if mean > 0.0 {
        Some(Poisson::new(mean).map_err(|e| LabError::Simulation(e.to_string()))?)
    } else {
        None
    };
    let pairs: Vec<(f64, f64)> = (0..cfg.reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = cfg.seed.child(r as u64).rng();
            let count = poisson.as_ref().map_or(0, |p| p.sample(&mut rng) as u64);
            let (mut s1, mut s2) = (a1, a2);
            for _ in 0..count {
                let s = draw_jump(&view.levy, eps, mean, &mut rng);
                let xj = view.weight.sample(&mut rng);
                s1 += xj * s;
                s2 += s;
            }
            (s1, s2)
        })
        .collect();
    let (w1, w2) = pairs.into_iter().unzip();
    Ok(PairSample {
        w1,
        w2,
        n_meta: None,
        law_meta: format!(
            "X={}; Λ={:?}; α={alpha}",
            view.weight.name(),
            view.levy.kind()
        ),
        truncation_bias: Some(truncation_bias(view, eps)),
    })
}

/// Order-statistic functionals of one simulation batch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxShareStats {
    pub n: u64,
    pub eps_list: Vec<f64>,
    /// Empirical `P{Y_{m(n)} / ΣY_i > 1 − ε}` per entry of `eps_list`.
    pub a_n_eps_prob: Vec<f64>,
    /// `(p, q_p)` pairs of `Δ_n = |T_n − X_{m(n)}|`.
    pub delta_quantiles: Vec<[f64; 2]>,
    pub delta: EmpiricalSample,
    /// `R_n = √(ΣY_i²) / ΣY_i`.
    pub r_n: EmpiricalSample,
}

pub fn max_share_stats(
    x: &WeightLaw,
    y: &MultiplierLaw,
    cfg: &SimConfig,
    eps_list: &[f64],
) -> Result<MaxShareStats> {
    cfg.validate()?;
    if let Some(&e) = eps_list.iter().find(|&&e| !(e > 0.0 && e < 1.0)) {
        return Err(LabError::param("eps_list", format!("{e} not in (0,1)")));
    }
    let stats = run_reps(x, y, cfg.n, cfg.reps, cfg.seed);
    let shares: Vec<f64> = stats.iter().map(|s| 1.0 / s.sum_w).collect();
    let reps = stats.len() as f64;
    let a_n_eps_prob = eps_list
        .iter()
        .map(|&e| shares.iter().filter(|&&sh| sh > 1.0 - e).count() as f64 / reps)
        .collect();
    let meta = law_meta(x, y);
    let delta = EmpiricalSample::new(
        stats.iter().map(|s| (s.t_n() - s.x_at_max).abs()).collect(),
        Some(cfg.n),
        meta.clone(),
    );
    let r_n = EmpiricalSample::new(
        stats.iter().map(|s| s.sum_w2.sqrt() / s.sum_w).collect(),
        Some(cfg.n),
        meta,
    );
    let delta_quantiles = [0.1, 0.25, 0.5, 0.75, 0.9]
        .iter()
        .map(|&p| [p, delta.quantile(p)])
        .collect();
    Ok(MaxShareStats {
        n: cfg.n,
        eps_list: eps_list.to_vec(),
        a_n_eps_prob,
        delta_quantiles,
        delta,
        r_n,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceProbe {
    pub n_list: Vec<u64>,
    pub median_abs_tn: Vec<f64>,
    /// Least-squares slope of `ln median|T_n|` against `ln n`.
    pub fitted_loglog_slope: f64,
    pub intercept: f64,
}

pub fn divergence_probe(
    x: &WeightLaw,
    y: &MultiplierLaw,
    cfg: &SimConfig,
    n_list: &[u64],
) -> Result<DivergenceProbe> {
    cfg.validate()?;
    if n_list.len() < 2 || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LabError::param(
            "n_list",
            "needs at least two increasing sizes",
        ));
    }
    let mut medians = Vec::with_capacity(n_list.len());
    for (k, &n) in n_list.iter().enumerate() {
        let sub = SimConfig {
            n,
            seed: cfg.seed.child(k as u64),
            ..*cfg
        };
        let stats = run_reps(x, y, n, sub.reps, sub.seed);
        let abs = EmpiricalSample::new(stats.iter().map(|s| s.t_n().abs()).collect(), Some(n), "");
        medians.push(abs.median());
    }
    let xs: Vec<f64> = n_list.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = medians.iter().map(|m| m.ln()).collect();
    let (slope, intercept) = least_squares(&xs, &ys);
    Ok(DivergenceProbe {
        n_list: n_list.to_vec(),
        median_abs_tn: medians,
        fitted_loglog_slope: slope,
        intercept,
    })
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
