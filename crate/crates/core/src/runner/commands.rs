use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::ExperimentConfig;
use crate::class_diagnostics::{classify, decade_grid, ks_distance_try};
use crate::distributions::MultiplierKind;
use crate::error::{LabError, Result};
use crate::levy_calculus::{
    alpha_h, check_levy_convergence, lambda_scan, prelimit_truncated_moments, AlphaSource,
    BivariateLevyView, ConvergenceGrid, LevyTail, McSettings,
};
use crate::limit_laws::BreimanLimit;
use crate::montecarlo::{
    divergence_probe, max_share_stats, simulate_limit_pair, simulate_normed_pair, simulate_tn,
    SimConfig,
};
use crate::output::{write_csv, write_json};
use crate::quadrature::Quadrature;
use crate::rng::SeedStream;

/// Files written by one command and the checks that failed, if any.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    pub failures: Vec<String>,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// `0` success, `1` failed check or numerical error, `2` I/O, `3` configuration.
pub fn exit_code(result: &Result<RunOutcome>) -> i32 {
    match result {
        Ok(o) if o.passed() => 0,
        Ok(_) => 1,
        Err(LabError::Io(_)) => 2,
        Err(LabError::Config(_)) => 3,
        Err(_) => 1,
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    command: &'a str,
    seed: u64,
    config: &'a ExperimentConfig,
    result: T,
}

pub(crate) fn prepare_dir(out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    Ok(())
}

fn comments(command: &str, cfg: &ExperimentConfig) -> Vec<String> {
    let mut c = vec![format!("command = {command}")];
    c.extend(cfg.to_lines());
    c
}

fn json<T: Serialize>(
    path: PathBuf,
    command: &str,
    cfg: &ExperimentConfig,
    result: T,
    files: &mut Vec<PathBuf>,
) -> Result<()> {
    write_json(
        &path,
        &Envelope {
            command,
            seed: cfg.seed,
            config: cfg,
            result,
        },
    )?;
    files.push(path);
    Ok(())
}

fn sim_config(cfg: &ExperimentConfig, stream: u64) -> SimConfig {
    SimConfig::new(cfg.n, cfg.reps, SeedStream::new(cfg.seed, stream))
        .with_cutoff(cfg.tolerances.cutoff)
}

fn levy_view(cfg: &ExperimentConfig) -> Result<BivariateLevyView> {
    let y = cfg.multiplier_law()?;
    let levy = LevyTail::for_multiplier(&y)
        .and_then(|l| l.with_drift(cfg.levy.alpha))
        .map_err(|e| LabError::Config(format!("field `y_law`: {e}")))?;
    Ok(BivariateLevyView::new(cfg.weight_law()?, levy)
        .with_quadrature(Quadrature::with_abs_tol(cfg.tolerances.quad_tol)))
}

#[derive(Serialize)]
struct SampleSummary {
    rows: usize,
    mean: f64,
    median: f64,
    quantiles: Vec<[f64; 2]>,
}

fn summary(s: &crate::montecarlo::EmpiricalSample) -> SampleSummary {
    SampleSummary {
        rows: s.len(),
        mean: s.mean(),
        median: s.median(),
        quantiles: [0.01, 0.05, 0.25, 0.75, 0.95, 0.99]
            .iter()
            .map(|&p| [p, s.quantile(p)])
            .collect(),
    }
}

/// Simulate each product listed in `simulate.products`.
pub fn run_simulate(cfg: &ExperimentConfig, out: &Path) -> Result<RunOutcome> {
    let x = cfg.weight_law()?;
    let y = cfg.multiplier_law()?;
    prepare_dir(out)?;
    let mut files = Vec::new();
    let cmt = comments("simulate", cfg);
    for (k, product) in cfg.simulate.products.iter().enumerate() {
        let sc = sim_config(cfg, k as u64);
        match product.as_str() {
            "tn" => {
                let s = simulate_tn(&x, &y, &sc)?;
                let path = out.join("tn_sample.csv");
                let ks_vs_limit = match cfg.y_law {
                    MultiplierKind::Pareto { beta } if beta < 1.0 => {
                        BreimanLimit::with_tolerance(beta, x, cfg.tolerances.quad_tol)
                            .ok()
                            .map(|lim| ks_distance_try(&s, |t| lim.cdf(t)))
                            .transpose()?
                    }
                    _ => None,
                };
                #[derive(Serialize)]
                struct TnMeta {
                    #[serde(flatten)]
                    summary: SampleSummary,
                    ks_vs_limit: Option<f64>,
                    within_ks_tol: Option<bool>,
                }
                let meta = Envelope {
                    command: "simulate",
                    seed: cfg.seed,
                    config: cfg,
                    result: TnMeta {
                        summary: summary(&s),
                        ks_vs_limit,
                        within_ks_tol: ks_vs_limit.map(|d| d <= cfg.tolerances.ks_tol),
                    },
                };
                s.write_csv(&path, &cmt, &meta)?;
                files.push(path.clone());
                files.push(path.with_extension("json"));
            }
            "pair" => {
                let p = simulate_normed_pair(&x, &y, &sc)?;
                let path = out.join("normed_pair.csv");
                let meta = Envelope {
                    command: "simulate",
                    seed: cfg.seed,
                    config: cfg,
                    result: summary(&p.ratio()),
                };
                p.write_csv(&path, &cmt, &meta)?;
                files.push(path.clone());
                files.push(path.with_extension("json"));
            }
            "limit_pair" => {
                let view = levy_view(cfg)?;
                let p = simulate_limit_pair(&view, &sc)?;
                let path = out.join("limit_pair.csv");
                #[derive(Serialize)]
                struct LimitPairMeta {
                    cutoff: f64,
                    truncation_bias: Option<[f64; 2]>,
                    ratio: SampleSummary,
                }
                let meta = Envelope {
                    command: "simulate",
                    seed: cfg.seed,
                    config: cfg,
                    result: LimitPairMeta {
                        cutoff: sc.cutoff,
                        truncation_bias: p.truncation_bias,
                        ratio: summary(&p.ratio()),
                    },
                };
                p.write_csv(&path, &cmt, &meta)?;
                files.push(path.clone());
                files.push(path.with_extension("json"));
            }
            "max_share" => {
                let m = max_share_stats(&x, &y, &sc, &cfg.simulate.eps_list)?;
                let path = out.join("max_share.csv");
                write_csv(
                    &path,
                    &cmt,
                    &["delta", "r_n"],
                    &[m.delta.values(), m.r_n.values()],
                )?;
                files.push(path);
                #[derive(Serialize)]
                struct MaxShareMeta<'a> {
                    eps_list: &'a [f64],
                    a_n_eps_prob: &'a [f64],
                    delta_quantiles: &'a [[f64; 2]],
                }
                json(
                    out.join("max_share.json"),
                    "simulate",
                    cfg,
                    MaxShareMeta {
                        eps_list: &m.eps_list,
                        a_n_eps_prob: &m.a_n_eps_prob,
                        delta_quantiles: &m.delta_quantiles,
                    },
                    &mut files,
                )?;
            }
            "divergence" => {
                let d = divergence_probe(&x, &y, &sc, &cfg.simulate.n_list)?;
                json(out.join("divergence.json"), "simulate", cfg, &d, &mut files)?;
            }
            other => {
                return Err(LabError::Config(format!(
                    "field `simulate.products`: unknown product `{other}`"
                )))
            }
        }
    }
    Ok(RunOutcome {
        files,
        failures: Vec::new(),
    })
}

/// Tabulate the limit CDF of `T_n` and its tail asymptotic.
pub fn run_limit(cfg: &ExperimentConfig, out: &Path) -> Result<RunOutcome> {
    let x = cfg.weight_law()?;
    let beta = match (cfg.limit.beta, cfg.y_law) {
        (Some(b), _) => b,
        (None, MultiplierKind::Pareto { beta }) => beta,
        (None, _) => {
            return Err(LabError::Config(
                "field `limit.beta`: required unless y_law is pareto".into(),
            ))
        }
    };
    let lim = BreimanLimit::with_tolerance(beta, x, cfg.tolerances.quad_tol)
        .map_err(|e| LabError::Config(format!("field `limit.beta`: {e}")))?;
    prepare_dir(out)?;
    let m = cfg.limit.grid_points;
    let (lo, hi) = (cfg.limit.grid_lo, cfg.limit.grid_hi);
    let grid: Vec<f64> = (0..m)
        .map(|i| lo + (hi - lo) * i as f64 / (m - 1) as f64)
        .collect();
    let rows = lim.tabulate(&grid)?;
    let mut files = Vec::new();
    let path = out.join("limit_table.csv");
    let col = |f: fn(&crate::limit_laws::BreimanRow) -> f64| rows.iter().map(f).collect::<Vec<_>>();
    let (xs, cdf, tail, deg) = (
        col(|r| r.x),
        col(|r| r.cdf),
        col(|r| r.tail),
        col(|r| if r.degenerate { 1.0 } else { 0.0 }),
    );
    write_csv(
        &path,
        &comments("limit", cfg),
        &["x", "cdf", "tail_asym", "degenerate"],
        &[&xs, &cdf, &tail, &deg],
    )?;
    files.push(path);
    #[derive(Serialize)]
    struct LimitMeta {
        beta: f64,
        rows: usize,
        monotone: bool,
    }
    json(
        out.join("limit_table.json"),
        "limit",
        cfg,
        LimitMeta {
            beta,
            rows: rows.len(),
            monotone: cdf.windows(2).all(|w| w[1] >= w[0]),
        },
        &mut files,
    )?;
    Ok(RunOutcome {
        files,
        failures: Vec::new(),
    })
}

/// Classify the multiplier law from its ratio scans.
pub fn run_diagnose(cfg: &ExperimentConfig, out: &Path) -> Result<RunOutcome> {
    let y = cfg.multiplier_law()?;
    let grid = decade_grid(cfg.diagnose.decade_lo, cfg.diagnose.decade_hi);
    let v = classify(&y, &grid)?;
    prepare_dir(out)?;
    let mut files = Vec::new();
    let path = out.join("ratio_scan.csv");
    write_csv(
        &path,
        &comments("diagnose", cfg),
        &["x", "feller", "centered_feller", "grif"],
        &[&v.x_grid, &v.feller, &v.centered, &v.grif],
    )?;
    files.push(path);
    json(
        out.join("class_verdict.json"),
        "diagnose",
        cfg,
        &v,
        &mut files,
    )?;
    Ok(RunOutcome {
        files,
        failures: Vec::new(),
    })
}

#[derive(Serialize)]
struct AlphaRow {
    h: f64,
    limit: f64,
    prelimit: f64,
}

/// Levy-measure and truncated-moment convergence, or a flatness scan of
/// `Λ̄_n` when the multiplier has no stable Levy limit.
pub fn run_levy(cfg: &ExperimentConfig, out: &Path) -> Result<RunOutcome> {
    let x = cfg.weight_law()?;
    let y = cfg.multiplier_law()?;
    let mc = McSettings {
        draws: cfg.levy.draws,
        stream: SeedStream::new(cfg.seed, 0),
    };
    let mut files = Vec::new();
    let n_list = &cfg.levy.n_list;
    let n_max = n_list.iter().copied().max().unwrap_or(cfg.n);
    let view = match levy_view(cfg) {
        Ok(v) => v,
        Err(_) if !matches!(cfg.y_law, MultiplierKind::Pareto { .. }) => {
            let v_grid = [0.25, 0.5, 1.0, 2.0, 4.0];
            let scan = lambda_scan(&y, n_list, &v_grid, 1e-3)?;
            prepare_dir(out)?;
            json(out.join("levy_report.json"), "levy", cfg, &scan, &mut files)?;
            return Ok(RunOutcome {
                files,
                failures: Vec::new(),
            });
        }
        Err(e) => return Err(e),
    };
    let conv = check_levy_convergence(&x, &y, &view, n_list, &ConvergenceGrid::default(), &mc)?;
    let alpha = cfg
        .levy
        .h_list
        .iter()
        .map(|&h| {
            Ok(AlphaRow {
                h,
                limit: alpha_h(AlphaSource::Limit(&view.levy), h)?,
                prelimit: alpha_h(AlphaSource::Prelimit { y: &y, n: n_max }, h)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut first = Vec::new();
    let mut second = Vec::new();
    let mut prelimit = Vec::new();
    for (k, &h) in cfg.levy.h_list.iter().enumerate() {
        first.push(view.truncated_first_moments(h)?);
        second.push(view.truncated_second_moments(h)?);
        let settings = McSettings {
            draws: mc.draws,
            stream: mc.stream.child(1000 + k as u64),
        };
        prelimit.push(prelimit_truncated_moments(&x, &y, n_max, h, &settings)?);
    }
    let scan = view.small_h_scan(cfg.levy.k_max)?;
    prepare_dir(out)?;
    let hs: Vec<f64> = scan.iter().map(|m| m.h).collect();
    let col =
        |f: fn(&crate::levy_calculus::SecondMoments) -> f64| scan.iter().map(f).collect::<Vec<_>>();
    let path = out.join("small_h_scan.csv");
    write_csv(
        &path,
        &comments("levy", cfg),
        &["h", "uu", "vv", "uv"],
        &[&hs, &col(|m| m.uu), &col(|m| m.vv), &col(|m| m.uv)],
    )?;
    files.push(path);
    #[derive(Serialize)]
    struct LevyReport<'a, F: Serialize, S: Serialize, P: Serialize, C: Serialize> {
        convergence: C,
        alpha_h: Vec<AlphaRow>,
        prelimit_n: u64,
        first_moments: F,
        second_moments: S,
        prelimit_moments: P,
        small_h_scan: &'a [crate::levy_calculus::SecondMoments],
    }
    json(
        out.join("levy_report.json"),
        "levy",
        cfg,
        LevyReport {
            convergence: &conv,
            alpha_h: alpha,
            prelimit_n: n_max,
            first_moments: &first,
            second_moments: &second,
            prelimit_moments: &prelimit,
            small_h_scan: &scan,
        },
        &mut files,
    )?;
    Ok(RunOutcome {
        files,
        failures: Vec::new(),
    })
}
