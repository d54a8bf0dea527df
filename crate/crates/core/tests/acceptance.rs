//! Acceptance criteria 1 to 10, one PASS/FAIL line each.
//!
//! Oracles are computed here from closed forms wherever one exists, so the
//! library's quadrature is checked rather than trusted.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use selfnorm_lab::class_diagnostics::{
    atom_scan, centered_feller_ratio, classify, decade_grid, feller_ratio, ks_distance, ClassLabel,
    DetectedAtom,
};
use selfnorm_lab::distributions::{
    make_finite_mean_multiplier, make_pareto_multiplier, make_slowly_varying_multiplier,
    make_weight_law, FiniteMeanKind, WeightKind,
};
use selfnorm_lab::levy_calculus::{
    prelimit_lambda_n, prelimit_pi_n, prelimit_truncated_moments, BivariateLevyView, LevyTail,
    McSettings,
};
use selfnorm_lab::limit_laws::{regvar_tail_constant, BreimanLimit};
use selfnorm_lab::montecarlo::{
    divergence_probe, max_share_stats, simulate_limit_pair, simulate_normed_pair, simulate_tn,
    SimConfig,
};
use selfnorm_lab::rng::SeedStream;
use statrs::function::beta::beta as beta_fn;
use statrs::function::erf::erfc;

const SEED: u64 = 20_240_601;
const N: u64 = 10_000;
const REPS: usize = 20_000;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

/// Limit CDF of `T_n` for uniform(0,1) weights and β = ½:
/// `I_s = (2/3)(x^{3/2} − (1−x)^{3/2})`, `I_a = (2/3)(x^{3/2} + (1−x)^{3/2})`.
fn uniform_half_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let (a, b) = (x.powf(1.5), (1.0 - x).powf(1.5));
    0.5 + (2.0 / PI) * ((a - b) / (a + b)).atan()
}

/// `W₂` limit: Laplace transform `exp(−√(πλ))`, a Lévy law with `c = π/2`.
fn w2_cdf(w: f64) -> f64 {
    if w <= 0.0 {
        0.0
    } else {
        erfc((PI / (4.0 * w)).sqrt())
    }
}

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, m: usize) -> f64 {
    let h = (b - a) / m as f64;
    let mut s = f(a) + f(b);
    for i in 1..m {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn stream(i: u64) -> SeedStream {
    SeedStream::new(SEED, i)
}

fn criterion_1() -> Outcome {
    let x = make_weight_law(WeightKind::Uniform01).unwrap();
    let y = make_pareto_multiplier(0.5).unwrap();
    let lim = BreimanLimit::new(0.5, x).unwrap();
    let quad_gap = [0.05, 0.2, 0.5, 0.7, 0.95]
        .iter()
        .map(|&t| (lim.cdf(t).unwrap() - uniform_half_cdf(t)).abs())
        .fold(0.0, f64::max);
    let tn = simulate_tn(&x, &y, &SimConfig::new(N, REPS, stream(0))).unwrap();
    let ks_tn = ks_distance(&tn, uniform_half_cdf);
    let view = BivariateLevyView::new(x, LevyTail::stable(0.5).unwrap());
    let lp =
        simulate_limit_pair(&view, &SimConfig::new(N, REPS, stream(1)).with_cutoff(1e-4)).unwrap();
    let ks_lp = ks_distance(&lp.ratio(), uniform_half_cdf);
    outcome(
        ks_tn <= 0.02 && ks_lp <= 0.03 && quad_gap < 1e-8,
        format!("KS(T_n) = {ks_tn:.4} (<= 0.02), KS(W1/W2 limit pair) = {ks_lp:.4} (<= 0.03), quadrature vs closed form {quad_gap:.1e}"),
    )
}

fn criterion_2() -> Outcome {
    let x = make_weight_law(WeightKind::Uniform01).unwrap();
    let y = make_pareto_multiplier(0.5).unwrap();
    let pair = simulate_normed_pair(&x, &y, &SimConfig::new(N, REPS, stream(2))).unwrap();
    let ks = ks_distance(&pair.w2_sample(), w2_cdf);
    outcome(
        ks <= 0.02,
        format!("KS(W2, Levy law with c = pi/2) = {ks:.4} (<= 0.02)"),
    )
}

fn criterion_3() -> Outcome {
    let x = make_weight_law(WeightKind::Uniform01).unwrap();
    let y = make_pareto_multiplier(0.5).unwrap();
    let mut worst = 0.0f64;
    for n in [1_000u64, 10_000, 100_000] {
        for v in [0.25f64, 0.5, 1.0, 2.0, 4.0] {
            let exact = v.powf(-0.5);
            worst = worst.max((prelimit_lambda_n(&y, n, v).unwrap() - exact).abs() / exact);
        }
    }
    let mc = McSettings {
        draws: 1_000_000,
        stream: stream(3),
    };
    let pi = prelimit_pi_n(&x, &y, 100_000, 1.0, 0.0, &mc).unwrap();
    let z = (pi.value - 2.0 / 3.0).abs() / pi.std_err;
    outcome(
        worst <= 4.0 * f64::EPSILON && z <= 3.0,
        format!(
            "max rel |Lambda_n - v^-1/2| = {worst:.2e} (<= 4 ulp), Pi_n(1,0) = {:.5} +/- {:.5}, {z:.2} SE from 2/3 (<= 3)",
            pi.value, pi.std_err
        ),
    )
}

fn criterion_4() -> Outcome {
    let x = make_weight_law(WeightKind::Uniform01).unwrap();
    let y = make_pareto_multiplier(0.5).unwrap();
    let view = BivariateLevyView::new(x, LevyTail::stable(0.5).unwrap());
    let mut worst_z = 0.0f64;
    let mut oracle_gap = 0.0f64;
    for (k, h) in [0.25f64, 1.0].into_iter().enumerate() {
        let mc = McSettings {
            draws: 1_000_000,
            stream: stream(4 + k as u64),
        };
        let pre = prelimit_truncated_moments(&x, &y, 1_000_000, h, &mc).unwrap();
        let first = view.truncated_first_moments(h).unwrap();
        let second = view.truncated_second_moments(h).unwrap();
        for (limit, est) in [
            (first.y_part, pre.y_part),
            (first.xy_part, pre.xy_part),
            (second.uu, pre.uu),
            (second.vv, pre.vv),
            (second.uv, pre.uv),
        ] {
            worst_z = worst_z.max((est.value - limit).abs() / est.std_err);
        }
        // ∫ v² Π(du, dv) over B_h = E[(1/3)(h/√(1+X²))^{3/2}]
        let vv = h.powf(1.5) / 3.0 * simpson(|u| (1.0 + u * u).powf(-0.75), 0.0, 1.0, 2000);
        oracle_gap = oracle_gap.max((second.vv - vv).abs());
    }
    let scan = view.small_h_scan(10).unwrap();
    let (top, bottom) = (scan[0], scan[scan.len() - 1]);
    let ratios = [bottom.uu / top.uu, bottom.vv / top.vv, bottom.uv / top.uv];
    let worst_ratio = ratios.iter().copied().fold(0.0, f64::max);
    // each second moment scales like h^{3/2}
    let expected = 2f64.powi(-15);
    let scaling_ok = ratios
        .iter()
        .all(|r| (r - expected).abs() < 1e-3 * expected);
    outcome(
        worst_z <= 3.0 && worst_ratio < 1e-3 && oracle_gap < 1e-8 && scaling_ok,
        format!(
            "max |prelimit - limit| = {worst_z:.2} SE (<= 3), small-h ratio {worst_ratio:.3e} (< 1e-3), vv vs closed form {oracle_gap:.1e}"
        ),
    )
}

fn near(atoms: &[DetectedAtom], at: f64) -> f64 {
    atoms
        .iter()
        .filter(|a| (a.location - at).abs() <= 0.05)
        .map(|a| a.mass)
        .fold(0.0, f64::max)
}

fn criterion_5() -> Outcome {
    let u = make_weight_law(WeightKind::Uniform01).unwrap();
    let b = make_weight_law(WeightKind::Bernoulli {
        p: 0.5,
        x0: 0.0,
        x1: 1.0,
    })
    .unwrap();
    let p = make_pareto_multiplier(0.5).unwrap();
    let sv = make_slowly_varying_multiplier();
    let e = make_finite_mean_multiplier(FiniteMeanKind::Exponential { rate: 1.0 }).unwrap();
    let scan = |x, y, s| {
        let tn = simulate_tn(x, y, &SimConfig::new(N, REPS, stream(s))).unwrap();
        atom_scan(&tn, 0.01).unwrap()
    };
    let cont = scan(&u, &p, 6);
    let bern = scan(&b, &sv, 7);
    let lln = scan(&u, &e, 8);
    let (m0, m1, mh) = (near(&bern, 0.0), near(&bern, 1.0), near(&lln, 0.5));
    outcome(
        cont.is_empty() && m0 >= 0.4 && m1 >= 0.4 && lln.len() == 1 && mh >= 0.95,
        format!(
            "continuous case {} atoms (0), bernoulli masses {m0:.3} at 0 and {m1:.3} at 1 (>= 0.4), exponential {} atom of mass {mh:.3} at 1/2 (>= 0.95)",
            cont.len(),
            lln.len()
        ),
    )
}

fn criterion_6() -> Outcome {
    let x = make_weight_law(WeightKind::SymmetricPareto { gamma: 0.4 })
        .unwrap()
        .abs()
        .unwrap();
    let y = make_pareto_multiplier(0.8).unwrap();
    let d = divergence_probe(
        &x,
        &y,
        &SimConfig::new(1, 2_000, stream(9)),
        &[100, 1_000, 10_000, 100_000],
    )
    .unwrap();
    let s = d.fitted_loglog_slope;
    outcome(
        (s - 1.25).abs() <= 0.15,
        format!("log-log slope of median T_n = {s:.3} (1.25 +/- 0.15)"),
    )
}

fn criterion_7() -> Outcome {
    let x = make_weight_law(WeightKind::SymmetricPareto { gamma: 0.8 }).unwrap();
    let y = make_pareto_multiplier(0.5).unwrap();
    let lim = BreimanLimit::new(0.5, x).unwrap();
    let tn = simulate_tn(&x, &y, &SimConfig::new(N, REPS, stream(10))).unwrap();
    let ks = selfnorm_lab::class_diagnostics::ks_distance_try(&tn, |t| lim.cdf(t)).unwrap();
    // 2β B(β, γ−β) K with K = tan(π/4) / (π/2 · 2) = 1/π
    let oracle = beta_fn(0.5, 0.3) / PI;
    let konst = regvar_tail_constant(0.5, 0.8).unwrap();
    let at = lim.quantile(0.995).unwrap();
    let ratio = (1.0 - lim.cdf(at).unwrap()) / x.survival(at);
    let rel = (ratio - oracle).abs() / oracle;
    outcome(
        ks <= 0.03 && rel <= 0.10 && (konst - oracle).abs() < 1e-8 * oracle,
        format!(
            "KS(T_n) = {ks:.4} (<= 0.03), tail ratio at x = {at:.1} is {ratio:.4} vs {oracle:.4}, rel err {rel:.4} (<= 0.10)"
        ),
    )
}

fn criterion_8() -> Outcome {
    let grid = decade_grid(1, 40);
    let p = make_pareto_multiplier(0.5).unwrap();
    let sv = make_slowly_varying_multiplier();
    let e = make_finite_mean_multiplier(FiniteMeanKind::Exponential { rate: 1.0 }).unwrap();
    let labels = (
        classify(&p, &grid).unwrap().label,
        classify(&sv, &grid).unwrap().label,
        classify(&e, &grid).unwrap().label,
    );
    let x = 1e6f64;
    // x^{3/2} / ((x^{3/2} − 1)/3) and (x^{3/2} + x(√x − 1)) / ((x^{3/2} − 1)/3)
    let f_oracle = x.powf(1.5) / ((x.powf(1.5) - 1.0) / 3.0);
    let c_oracle = (x.powf(1.5) + x * (x.sqrt() - 1.0)) / ((x.powf(1.5) - 1.0) / 3.0);
    let f = feller_ratio(&p, x).unwrap();
    let c = centered_feller_ratio(&p, x).unwrap();
    let ok = labels
        == (
            ClassLabel::CenteredFeller,
            ClassLabel::NotFellerGrifHolds,
            ClassLabel::GrifFails,
        )
        && (f - 3.0).abs() <= 0.03
        && (c - 6.0).abs() <= 0.06
        && (f - f_oracle).abs() < 1e-9
        && (c - c_oracle).abs() < 1e-9;
    outcome(
        ok,
        format!(
            "labels {:?} / {:?} / {:?}, Feller ratio at 1e6 = {f:.6} (3 +/- 1%), centered = {c:.6} (6 +/- 1%)",
            labels.0, labels.1, labels.2
        ),
    )
}

fn criterion_9() -> Outcome {
    let x = make_weight_law(WeightKind::StandardGaussian).unwrap();
    let y = make_slowly_varying_multiplier();
    let m = max_share_stats(&x, &y, &SimConfig::new(N, REPS, stream(11)), &[0.1]).unwrap();
    let (pa, pd) = (m.a_n_eps_prob[0], m.delta.ecdf(0.1));
    outcome(
        pa >= 0.9 && pd >= 0.8,
        format!("P(A_n(0.1)) = {pa:.4} (>= 0.9), P(Delta_n <= 0.1) = {pd:.4} (>= 0.8)"),
    )
}

fn criterion_10() -> Outcome {
    let tmp = std::env::temp_dir().join(format!("selfnorm-acceptance-{}", std::process::id()));
    let _ = fs::remove_dir_all(&tmp);
    let bin = env!("CARGO_BIN_EXE_selfnorm-lab");
    let mut codes = Vec::new();
    for threads in ["1", "8"] {
        let out = tmp.join(format!("t{threads}"));
        let status = Command::new(bin)
            .args(["reproduce", "S1", "--threads", threads, "--out"])
            .arg(&out)
            .env_remove("SELFNORM_LAB_THREADS")
            .output()
            .expect("binary runs");
        codes.push(status.status.code());
    }
    let list = |d: &Path| {
        let mut v: Vec<_> = fs::read_dir(d)
            .map(|r| r.filter_map(|e| e.ok().map(|e| e.file_name())).collect())
            .unwrap_or_default();
        v.sort();
        v
    };
    let (a, b) = (tmp.join("t1"), tmp.join("t8"));
    let names = list(&a);
    let identical = !names.is_empty()
        && names == list(&b)
        && names
            .iter()
            .all(|n| fs::read(a.join(n)).ok() == fs::read(b.join(n)).ok());
    let _ = fs::remove_dir_all(&tmp);
    outcome(
        identical && codes == [Some(0), Some(0)],
        format!(
            "reproduce S1 exit codes {codes:?}, {} files byte-identical across 1 and 8 threads: {identical}",
            names.len()
        ),
    )
}

fn main() {
    let criteria: [(u32, fn() -> Outcome); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    let mut failed = Vec::new();
    for (id, run) in criteria {
        let t0 = Instant::now();
        let o = run();
        let tag = if o.passed { "PASS" } else { "FAIL" };
        println!(
            "criterion {id:>2}: {tag}  {}  [{:.1}s]",
            o.detail,
            t0.elapsed().as_secs_f64()
        );
        if !o.passed {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 10 criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
