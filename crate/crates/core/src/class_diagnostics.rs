//! Regime diagnostics for the multiplier law, atom detection, and
//! Kolmogorov–Smirnov distances.
//!
//! Three ratios separate the regimes:
//!
//! | ratio | formula | bounded means |
//! |---|---|---|
//! | Feller | `x²Ḡ(x) / E[Y²; Y ≤ x]` | `Y` in the Feller class |
//! | centered | `(x²Ḡ(x) + x E[Y; Y ≤ x]) / E[Y²; Y ≤ x]` | zero centering works |
//! | Griffin | `x E[Y; Y ≤ x] / (x²Ḡ(x) + E[Y²; Y ≤ x])` | `ΣY/√ΣY²` is tight |
//!
//! `limsup` is approximated by the maximum over the top decade of a grid.

use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::{MultiplierLaw, WeightLaw};
use crate::error::{LabError, Result};
use crate::levy_calculus::McSettings;
use crate::montecarlo::EmpiricalSample;

fn ratio_parts(y: &MultiplierLaw, x: f64) -> Result<(f64, f64, f64)> {
    if !(x > y.support_lo()) {
        return Err(LabError::Domain(format!(
            "x = {x} is not above the support infimum {} of {}",
            y.support_lo(),
            y.name()
        )));
    }
    let ts = y.trunc_second(x);
    if !(ts > 0.0) {
        return Err(LabError::Domain(format!(
            "E[Y²; Y ≤ {x}] vanishes for {}",
            y.name()
        )));
    }
    Ok((x * x * y.survival(x), x * y.trunc_mean(x), ts))
}

pub fn feller_ratio(y: &MultiplierLaw, x: f64) -> Result<f64> {
    let (tail, _, ts) = ratio_parts(y, x)?;
    Ok(tail / ts)
}

pub fn centered_feller_ratio(y: &MultiplierLaw, x: f64) -> Result<f64> {
    let (tail, tm, ts) = ratio_parts(y, x)?;
    Ok((tail + tm) / ts)
}

pub fn grif_ratio(y: &MultiplierLaw, x: f64) -> Result<f64> {
    let (tail, tm, ts) = ratio_parts(y, x)?;
    Ok(tm / (tail + ts))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassLabel {
    CenteredFeller,
    FellerNotCentered,
    NotFellerGrifHolds,
    GrifFails,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassVerdict {
    pub feller_limsup_proxy: f64,
    pub centered_limsup_proxy: f64,
    pub grif_limsup_proxy: f64,
    pub feller_growing: bool,
    pub centered_growing: bool,
    pub grif_growing: bool,
    pub label: ClassLabel,
    pub x_grid: Vec<f64>,
    pub feller: Vec<f64>,
    pub centered: Vec<f64>,
    pub grif: Vec<f64>,
}

/// `x = 10^{k/4}` from `10^lo` to `10^hi`.
pub fn decade_grid(lo: i32, hi: i32) -> Vec<f64> {
    (4 * lo..=4 * hi)
        .map(|k| 10f64.powf(k as f64 / 4.0))
        .collect()
}

/// Top-decade maximum, and whether it exceeds both `4×` the first-decade
/// maximum and `50`.
fn growth(grid: &[f64], values: &[f64]) -> (f64, bool) {
    let lo = grid[0];
    let hi = grid[grid.len() - 1];
    let max_in = |pred: &dyn Fn(f64) -> bool| {
        grid.iter()
            .zip(values)
            .filter(|(&x, _)| pred(x))
            .map(|(_, &v)| v)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let top = max_in(&|x| x >= hi / 10.0);
    let first = max_in(&|x| x <= lo * 10.0);
    (top, top > 4.0 * first && top > 50.0)
}

pub fn classify(y: &MultiplierLaw, x_grid: &[f64]) -> Result<ClassVerdict> {
    if x_grid.len() < 2 || x_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LabError::param("x_grid", "must be strictly increasing"));
    }
    if x_grid[x_grid.len() - 1] / x_grid[0] < 1e6 {
        return Err(LabError::param("x_grid", "must span at least 6 decades"));
    }
    let mut feller = Vec::with_capacity(x_grid.len());
    let mut centered = Vec::with_capacity(x_grid.len());
    let mut grif = Vec::with_capacity(x_grid.len());
    for &x in x_grid {
        let (tail, tm, ts) = ratio_parts(y, x)?;
        feller.push(tail / ts);
        centered.push((tail + tm) / ts);
        grif.push(tm / (tail + ts));
    }
    let (fp, fg) = growth(x_grid, &feller);
    let (cp, cg) = growth(x_grid, &centered);
    let (gp, gg) = growth(x_grid, &grif);
    let label = if !cg {
        ClassLabel::CenteredFeller
    } else if gg {
        ClassLabel::GrifFails
    } else if !fg {
        ClassLabel::FellerNotCentered
    } else {
        ClassLabel::NotFellerGrifHolds
    };
    Ok(ClassVerdict {
        feller_limsup_proxy: fp,
        centered_limsup_proxy: cp,
        grif_limsup_proxy: gp,
        feller_growing: fg,
        centered_growing: cg,
        grif_growing: gg,
        label,
        x_grid: x_grid.to_vec(),
        feller,
        centered,
        grif,
    })
}

/// `t² P{|X| > t} / E[X²; |X| ≤ t]`.
pub fn weight_feller_ratio(x: &WeightLaw, t: f64) -> f64 {
    let tail = x.survival(t) + x.cdf_left(-t);
    t * t * tail / x.trunc_moment(2, t)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductFellerReport {
    pub t_grid: Vec<f64>,
    pub ratio: Vec<f64>,
    pub top_decade_max: f64,
    pub bounded: bool,
}

/// Monte Carlo estimate of `t² P{|XY| > t} / E[X²Y²; |XY| ≤ t]`, with the
/// `Y` factor integrated exactly given `X`.
pub fn product_feller_check(
    x: &WeightLaw,
    y: &MultiplierLaw,
    t_grid: &[f64],
    mc: &McSettings,
) -> Result<ProductFellerReport> {
    if t_grid.len() < 2 || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LabError::param("t_grid", "must be strictly increasing"));
    }
    let xr: Vec<f64> = t_grid.iter().map(|&t| weight_feller_ratio(x, t)).collect();
    let yr = t_grid
        .iter()
        .map(|&t| feller_ratio(y, t))
        .collect::<Result<Vec<_>>>()?;
    if growth(t_grid, &xr).1 || growth(t_grid, &yr).1 {
        return Err(LabError::param(
            "laws",
            "both |X| and Y must have bounded Feller ratios on the grid",
        ));
    }
    let xs = x.sample_batch(mc.stream, mc.draws);
    let ratio: Vec<f64> = t_grid
        .par_iter()
        .map(|&t| {
            let (mut tail, mut second) = (0.0, 0.0);
            for &xi in &xs {
                let a = xi.abs();
                if a == 0.0 {
                    continue;
                }
                tail += y.survival(t / a);
                second += a * a * y.trunc_second(t / a);
            }
            t * t * tail / second
        })
        .collect();
    let (top, growing) = growth(t_grid, &ratio);
    Ok(ProductFellerReport {
        t_grid: t_grid.to_vec(),
        ratio,
        top_decade_max: top,
        bounded: !growing,
    })
}

/// Thresholds for [`atom_scan`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AtomScanOptions {
    /// Outer radius of the baseline annulus, in units of `eps`.
    pub wide_factor: f64,
    /// A window is atomic when its mass exceeds `ratio ×` the baseline.
    pub ratio: f64,
    /// Windows lighter than this are never reported.
    pub min_mass: f64,
}

impl Default for AtomScanOptions {
    fn default() -> Self {
        Self {
            wide_factor: 10.0,
            ratio: 2.0,
            min_mass: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectedAtom {
    pub location: f64,
    pub mass: f64,
}

pub fn atom_scan(sample: &EmpiricalSample, eps: f64) -> Result<Vec<DetectedAtom>> {
    atom_scan_with(sample, eps, &AtomScanOptions::default())
}

/// Windows `[t − eps, t + eps]` around each draw whose mass beats the
/// continuous baseline read off the annulus `eps < |v − t| ≤ wide·eps`,
/// one side at a time.
pub fn atom_scan_with(
    sample: &EmpiricalSample,
    eps: f64,
    opts: &AtomScanOptions,
) -> Result<Vec<DetectedAtom>> {
    if !(eps > 0.0) {
        return Err(LabError::param("eps", "must be positive"));
    }
    let v = sample.values();
    let n = v.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let count_within =
        |t: f64, r: f64| v.partition_point(|&a| a <= t + r) - v.partition_point(|&a| a < t - r);
    let nf = n as f64;
    let wide = opts.wide_factor * eps;
    let mut candidates: Vec<(f64, f64)> = Vec::new();
    let mut i = 0;
    while i < n {
        let t = v[i];
        // identical draws share one window
        let mut j = i + 1;
        while j < n && v[j] == t {
            j += 1;
        }
        let inner = count_within(t, eps);
        let mass = inner as f64 / nf;
        let left = v.partition_point(|&a| a < t - eps) - v.partition_point(|&a| a < t - wide);
        let right = v.partition_point(|&a| a <= t + wide) - v.partition_point(|&a| a <= t + eps);
        // the denser side sets the baseline so support edges do not look atomic
        let baseline = 2.0 * left.max(right) as f64 / nf / (opts.wide_factor - 1.0);
        if mass >= opts.min_mass && mass > opts.ratio * baseline {
            candidates.push((t, mass));
        }
        i = j;
    }
    let mut atoms: Vec<DetectedAtom> = Vec::new();
    let mut cluster_end = f64::NEG_INFINITY;
    for (t, mass) in candidates {
        match atoms.last_mut() {
            Some(last) if t - cluster_end <= eps => {
                if mass > last.mass {
                    *last = DetectedAtom { location: t, mass };
                }
            }
            _ => atoms.push(DetectedAtom { location: t, mass }),
        }
        cluster_end = t;
    }
    Ok(atoms)
}

/// One-sample Kolmogorov–Smirnov statistic against a CDF.
pub fn ks_distance<F: Fn(f64) -> f64 + Sync>(sample: &EmpiricalSample, cdf: F) -> f64 {
    ks_distance_try(sample, |x| Ok(cdf(x))).expect("infallible")
}

/// As [`ks_distance`] for a CDF that may fail to evaluate.
pub fn ks_distance_try<F: Fn(f64) -> Result<f64> + Sync>(
    sample: &EmpiricalSample,
    cdf: F,
) -> Result<f64> {
    let v = sample.values();
    let n = v.len() as f64;
    let gaps = v
        .par_iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x)?;
            Ok(((i + 1) as f64 / n - f).max(f - i as f64 / n))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(gaps.into_iter().fold(0.0, f64::max))
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_two_sample(a: &EmpiricalSample, b: &EmpiricalSample) -> f64 {
    let (x, y) = (a.values(), b.values());
    let (nx, ny) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < x.len() && j < y.len() {
        let t = x[i].min(y[j]);
        while i < x.len() && x[i] <= t {
            i += 1;
        }
        while j < y.len() && y[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / nx - j as f64 / ny).abs());
    }
    d
}
