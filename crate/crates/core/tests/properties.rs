use proptest::prelude::*;

use selfnorm_lab::class_diagnostics::{
    atom_scan, centered_feller_ratio, classify, decade_grid, feller_ratio, ks_distance,
    ks_two_sample,
};
use selfnorm_lab::distributions::{
    make_finite_mean_multiplier, make_pareto_multiplier, make_slowly_varying_multiplier,
    make_weight_law, FiniteMeanKind, MultiplierLaw, WeightKind, WeightLaw,
};
use selfnorm_lab::levy_calculus::{
    alpha_h, lambda_bar, prelimit_lambda_n, AlphaSource, BivariateLevyView, LevyTail,
};
use selfnorm_lab::limit_laws::BreimanLimit;
use selfnorm_lab::montecarlo::{simulate_tn, EmpiricalSample, SimConfig};
use selfnorm_lab::quadrature::Quadrature;
use selfnorm_lab::rng::SeedStream;

fn weight_kinds() -> impl Strategy<Value = WeightKind> {
    prop_oneof![
        Just(WeightKind::Uniform01),
        Just(WeightKind::StandardGaussian),
        Just(WeightKind::Rademacher),
        (0.1f64..0.9).prop_map(|p| WeightKind::Bernoulli {
            p,
            x0: -1.0,
            x1: 2.0
        }),
        (0.95f64..1.95).prop_map(|gamma| WeightKind::SymmetricPareto { gamma }),
    ]
}

fn symmetric_kinds() -> impl Strategy<Value = WeightKind> {
    prop_oneof![
        Just(WeightKind::StandardGaussian),
        Just(WeightKind::Rademacher),
        (0.95f64..1.95).prop_map(|gamma| WeightKind::SymmetricPareto { gamma }),
    ]
}

fn bounded_kinds() -> impl Strategy<Value = WeightKind> {
    prop_oneof![
        Just(WeightKind::Uniform01),
        Just(WeightKind::Rademacher),
        (-3.0f64..3.0).prop_map(|c| WeightKind::PointMass { c }),
        (0.1f64..0.9, -2.0f64..0.0, 0.0f64..2.0).prop_map(|(p, x0, x1)| WeightKind::Bernoulli {
            p,
            x0,
            x1
        }),
    ]
}

fn multipliers() -> impl Strategy<Value = MultiplierLaw> {
    prop_oneof![
        (0.1f64..1.9).prop_map(|b| make_pareto_multiplier(b).unwrap()),
        Just(make_slowly_varying_multiplier()),
        (0.2f64..5.0).prop_map(|rate| {
            make_finite_mean_multiplier(FiniteMeanKind::Exponential { rate }).unwrap()
        }),
        Just(make_finite_mean_multiplier(FiniteMeanKind::Uniform01).unwrap()),
    ]
}

fn law(kind: WeightKind) -> WeightLaw {
    make_weight_law(kind).unwrap()
}

fn view(kind: WeightKind, beta: f64) -> BivariateLevyView {
    BivariateLevyView::new(law(kind), LevyTail::stable(beta).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pareto_norming_is_exact(beta in 0.1f64..1.9, n in 1u64..10_000_000, v in 0.01f64..100.0) {
        let y = make_pareto_multiplier(beta).unwrap();
        prop_assume!(y.norming(n) * v >= 1.0);
        let exact = v.powf(-beta);
        let got = prelimit_lambda_n(&y, n, v).unwrap();
        prop_assert!((got - exact).abs() <= 8.0 * f64::EPSILON * exact, "{got} vs {exact}");
    }

    #[test]
    fn pi_bar_and_pi_neg_nonincreasing(
        kind in weight_kinds(),
        beta in 0.2f64..0.9,
        u in 0.05f64..3.0, du in 0.01f64..2.0,
        v in 0.0f64..3.0, dv in 0.01f64..2.0,
    ) {
        let w = view(kind, beta);
        let slack = |a: f64, b: f64| 1e-7 * (1.0 + a.abs() + b.abs());
        let (p0, pu, pv) = (
            w.pi_bar(u, v).unwrap().value,
            w.pi_bar(u + du, v).unwrap().value,
            w.pi_bar(u, v + dv).unwrap().value,
        );
        prop_assert!(pu <= p0 + slack(pu, p0));
        prop_assert!(pv <= p0 + slack(pv, p0));
        let (n0, nu, nv) = (
            w.pi_neg(u, v).unwrap().value,
            w.pi_neg(u + du, v).unwrap().value,
            w.pi_neg(u, v + dv).unwrap().value,
        );
        prop_assert!(nu <= n0 + slack(nu, n0));
        prop_assert!(nv <= n0 + slack(nv, n0));
    }

    #[test]
    fn pi_bar_substitution_identity(kind in weight_kinds(), beta in 0.2f64..0.75, u in 0.1f64..10.0) {
        let w = view(kind, beta);
        let x = law(kind);
        let pos = w.pi_bar(u, 0.0).unwrap().value;
        let neg = w.pi_neg(u, 0.0).unwrap().value;
        let scale = u.powf(-beta);
        prop_assert!((pos - scale * x.beta_moment_pos(beta)).abs() < 1e-6 * (1.0 + pos));
        prop_assert!((neg - scale * x.beta_moment_neg(beta)).abs() < 1e-6 * (1.0 + neg));
    }

    #[test]
    fn pi_split_at_zero_bounded_by_lambda(kind in weight_kinds(), beta in 0.2f64..0.9, v in 0.1f64..5.0) {
        let w = view(kind, beta);
        let x = law(kind);
        let tiny = 1e-12;
        let sum = w.pi_bar(tiny, v).unwrap().value + w.pi_neg(tiny, v).unwrap().value;
        let lam = lambda_bar(&w.levy, v).unwrap();
        prop_assert!(sum <= lam * (1.0 + 1e-7));
        let atom_at_zero = x.atoms().iter().any(|a| a.location == 0.0);
        if !atom_at_zero {
            prop_assert!((sum - lam).abs() < 1e-6 * lam, "{sum} vs {lam}");
        }
    }

    #[test]
    fn alpha_h_nondecreasing_to_drift(
        beta in 0.1f64..0.95, drift in 0.0f64..2.0, h in 0.01f64..5.0, dh in 0.01f64..5.0,
    ) {
        let levy = LevyTail::stable(beta).unwrap().with_drift(drift).unwrap();
        let a = alpha_h(AlphaSource::Limit(&levy), h).unwrap();
        let b = alpha_h(AlphaSource::Limit(&levy), h + dh).unwrap();
        prop_assert!(b >= a);
        let tiny = alpha_h(AlphaSource::Limit(&levy), 1e-300).unwrap();
        prop_assert!((tiny - drift).abs() < 1e-12);
    }

    #[test]
    fn halving_quadrature_tolerance_stays_within_bound(
        kind in weight_kinds(), beta in 0.2f64..0.9, u in 0.1f64..3.0, v in 0.0f64..2.0,
    ) {
        let coarse = view(kind, beta).with_quadrature(Quadrature::with_abs_tol(1e-8));
        let fine = view(kind, beta).with_quadrature(Quadrature::with_abs_tol(5e-9));
        let a = coarse.pi_bar(u, v).unwrap();
        let b = fine.pi_bar(u, v).unwrap();
        prop_assert!((a.value - b.value).abs() <= a.abs_err + b.abs_err + 4.0 * f64::EPSILON * a.value.abs());
    }

    #[test]
    fn centered_ratio_dominates_feller(y in multipliers(), k in 0.5f64..30.0) {
        let x = 10f64.powf(k).max(2.0 * y.support_lo() + 1.0);
        let f = feller_ratio(&y, x).unwrap();
        let c = centered_feller_ratio(&y, x).unwrap();
        prop_assert!(c >= f);
    }

    #[test]
    fn classify_is_scale_invariant(y in multipliers(), c in 0.1f64..10.0) {
        let grid = decade_grid(1, 40);
        let scaled_grid: Vec<f64> = grid.iter().map(|x| c * x).collect();
        let a = classify(&y, &grid).unwrap();
        let b = classify(&y.scaled(c).unwrap(), &scaled_grid).unwrap();
        prop_assert_eq!(a.label, b.label);
    }

    #[test]
    fn ecdf_and_ks_are_well_formed(values in prop::collection::vec(-100.0f64..100.0, 1..200), t in -150.0f64..150.0) {
        let s = EmpiricalSample::new(values.clone(), None, "prop");
        prop_assert!(s.values().windows(2).all(|w| w[0] <= w[1]));
        let f = s.ecdf(t);
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert!(s.ecdf(t + 1.0) >= f);
        let d = ks_distance(&s, |x| (x / 200.0 + 0.5).clamp(0.0, 1.0));
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert_eq!(ks_two_sample(&s, &s), 0.0);
        let q = s.quantile(0.5);
        prop_assert!(s.ecdf(q) >= 0.5);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn breiman_cdf_monotone_on_grid(kind in weight_kinds(), beta in 0.2f64..0.7) {
        let lim = BreimanLimit::new(beta, law(kind)).unwrap();
        let grid: Vec<f64> = (0..1000).map(|i| -10.0 + 20.0 * i as f64 / 999.0).collect();
        let rows = lim.tabulate(&grid).unwrap();
        for w in rows.windows(2) {
            prop_assert!(w[1].cdf >= w[0].cdf - 1e-9, "{:?} {:?}", w[0], w[1]);
        }
        prop_assert!(rows.iter().all(|r| (0.0..=1.0).contains(&r.cdf)));
    }

    #[test]
    fn breiman_cdf_symmetric(kind in symmetric_kinds(), beta in 0.2f64..0.7, x in 0.01f64..20.0) {
        let lim = BreimanLimit::new(beta, law(kind)).unwrap();
        let s = lim.cdf(-x).unwrap() + lim.cdf(x).unwrap();
        prop_assert!((s - 1.0).abs() < 1e-8, "{s}");
    }

    #[test]
    fn tn_bounded_by_sup_abs_x(kind in bounded_kinds(), beta in 0.2f64..1.8, n in 1u64..300, seed in any::<u64>()) {
        let x = law(kind);
        let (lo, hi) = x.support();
        let bound = lo.abs().max(hi.abs());
        let y = make_pareto_multiplier(beta).unwrap();
        let s = simulate_tn(&x, &y, &SimConfig::new(n, 50, SeedStream::new(seed, 0))).unwrap();
        prop_assert!(s.values().iter().all(|t| t.abs() <= bound * (1.0 + 1e-12)));
    }

    #[test]
    fn tn_is_scale_free_in_y(y in multipliers(), c in 0.01f64..100.0, seed in any::<u64>()) {
        let x = law(WeightKind::StandardGaussian);
        let cfg = SimConfig::new(100, 40, SeedStream::new(seed, 3));
        let a = simulate_tn(&x, &y, &cfg).unwrap();
        let b = simulate_tn(&x, &y.scaled(c).unwrap(), &cfg).unwrap();
        for (p, q) in a.values().iter().zip(b.values()) {
            prop_assert!((p - q).abs() <= 1e-12 * (1.0 + p.abs()));
        }
    }

    #[test]
    fn tn_independent_of_thread_count(seed in any::<u64>()) {
        let x = law(WeightKind::Uniform01);
        let y = make_pareto_multiplier(0.5).unwrap();
        let cfg = SimConfig::new(200, 64, SeedStream::new(seed, 0));
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| simulate_tn(&x, &y, &cfg).unwrap())
        };
        let (a, b) = (run(1), run(4));
        prop_assert_eq!(a.values(), b.values());
    }

    #[test]
    fn atom_scan_recovers_bernoulli_mass(p in 0.2f64..0.8, seed in any::<u64>()) {
        let x = law(WeightKind::Bernoulli { p, x0: 0.0, x1: 1.0 });
        let m = 4_000usize;
        let s = EmpiricalSample::new(x.sample_batch(SeedStream::new(seed, 0), m), None, "bernoulli");
        let atoms = atom_scan(&s, 0.01).unwrap();
        let at_one = atoms.iter().find(|a| (a.location - 1.0).abs() < 0.02).map_or(0.0, |a| a.mass);
        let se = (p * (1.0 - p) / m as f64).sqrt();
        prop_assert!((at_one - p).abs() <= 3.0 * se + 1e-12, "{at_one} vs {p}");
    }
}

#[test]
fn seed_children_are_distinct() {
    let root = SeedStream::new(7, 0);
    let mut seen = std::collections::HashSet::new();
    for i in 0..1000 {
        assert!(seen.insert(root.child(i)));
    }
    assert_ne!(SeedStream::new(7, 1).child(0), root.child(0));
}
