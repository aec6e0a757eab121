use closeness::cli::{groups_to_csv, parse_groups_csv};
use closeness::closeness::{
    conditional_theta_given_mu, interpret_dirichlet, order_report, remoteness, BaseMeasure, Interpretation,
    RemotenessSpec,
};
use closeness::hdm::{hdm_log_posterior, ContingencyCounts, HdmConfig};
use closeness::inference::*;
use closeness::manifold::{kl_divergence, SimplexPoint};
use closeness::numerics::sigmoid;
use closeness::quadrature::{integrate_simplex_fisher, QuadratureConfig};
use proptest::prelude::*;

fn simplex(dim: usize) -> impl Strategy<Value = SimplexPoint> {
    prop::collection::vec(0.01f64..1.0, dim).prop_map(|raw| {
        let s: f64 = raw.iter().sum();
        SimplexPoint::new(raw.iter().map(|r| r / s).collect(), 1e-9).unwrap()
    })
}

fn simplex_pair() -> impl Strategy<Value = (SimplexPoint, SimplexPoint)> {
    (2usize..=5).prop_flat_map(|d| (simplex(d), simplex(d)))
}

fn groups() -> impl Strategy<Value = Vec<(u64, u64)>> {
    prop::collection::vec((1u64..60).prop_flat_map(|n| (0..=n, Just(n))), 1..25)
}

fn base() -> impl Strategy<Value = BaseMeasure> {
    prop_oneof![Just(BaseMeasure::Fisher), Just(BaseMeasure::Lebesgue)]
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn kl_is_nonnegative_and_vanishes_on_the_diagonal((mu, theta) in simplex_pair()) {
        prop_assert!(kl_divergence(&mu, &theta).unwrap() >= 0.0);
        prop_assert!(kl_divergence(&mu, &mu).unwrap().abs() < 1e-15);
    }

    #[test]
    fn remoteness_scales_linearly((mu, theta) in simplex_pair(), gamma in 0.0f64..50.0) {
        let n = mu.dim();
        let r = remoteness(&RemotenessSpec::fisher(gamma, n).unwrap(), &mu, &theta).unwrap();
        let one = remoteness(&RemotenessSpec::fisher(1.0, n).unwrap(), &mu, &theta).unwrap();
        prop_assert!(close(r, gamma * one, 1e-12));
    }

    #[test]
    fn joint_orders_pairs_by_remoteness(
        (a, b, c, d) in (2usize..=4).prop_flat_map(|k| (simplex(k), simplex(k), simplex(k), simplex(k))),
        gamma in 0.01f64..100.0,
    ) {
        let spec = RemotenessSpec::fisher(gamma, a.dim()).unwrap();
        let report = order_report(&spec, &[((a, b), (c, d))]).unwrap();
        prop_assert_eq!(report.violations, 0);
    }

    #[test]
    fn interpretation_inverts_the_conditional(mu in (2usize..=4).prop_flat_map(simplex), gamma in 0.01f64..500.0, b in base()) {
        let spec = RemotenessSpec::new(gamma, b, mu.dim()).unwrap();
        let alpha = conditional_theta_given_mu(&spec, &mu).unwrap().concentration().to_vec();
        match interpret_dirichlet(&alpha, b).unwrap() {
            Interpretation::Centered { mu: m, gamma: g } => {
                prop_assert!(close(g, gamma, 1e-12));
                for (x, y) in m.coords().iter().zip(mu.coords()) {
                    prop_assert!((x - y).abs() < 1e-10);
                }
            }
            Interpretation::NoPreferredCenter => prop_assert!(false, "center lost"),
        }
    }

    #[test]
    fn quadrature_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, p in 0.1f64..4.0) {
        let quad = QuadratureConfig::default_for(1).with_points(201);
        let f = |t: &SimplexPoint| t.coords()[0].powf(p);
        let g = |t: &SimplexPoint| (t.coords()[1] * 3.0).cos();
        let lhs = integrate_simplex_fisher(|t| a * f(t) + b * g(t), 1, &quad).unwrap();
        let rhs = a * integrate_simplex_fisher(f, 1, &quad).unwrap() + b * integrate_simplex_fisher(g, 1, &quad).unwrap();
        prop_assert!(close(lhs, rhs, 1e-12));
    }

    #[test]
    fn closeness_chart_adds_its_jacobian(data in groups(), u in -6.0f64..6.0, v in -4.0f64..7.0) {
        let data = ObservedGroups::from_pairs(&data).unwrap();
        let cfg = ClosenessModelConfig::default();
        let (mu, gamma) = (sigmoid(u), v.exp());
        let direct = closeness_log_posterior(mu, gamma, &data, &cfg).unwrap() + (mu * (1.0 - mu)).ln() + v;
        let chart = closeness_log_posterior_transformed(u, v, &data, &cfg).unwrap();
        prop_assert!(close(chart, direct, 1e-10), "{chart} vs {direct}");
    }

    #[test]
    fn gelman_chart_adds_its_jacobian(data in groups(), u in -6.0f64..6.0, v in -4.0f64..7.0) {
        let data = ObservedGroups::from_pairs(&data).unwrap();
        let cfg = GelmanModelConfig::default();
        let (alpha, beta) = (v.exp() * sigmoid(u), v.exp() * sigmoid(-u));
        let direct = gelman_log_posterior(alpha, beta, &data, &cfg).unwrap() + alpha.ln() + beta.ln();
        let chart = gelman_log_posterior_transformed(u, v, &data, &cfg).unwrap();
        prop_assert!(close(chart, direct, 1e-10), "{chart} vs {direct}");
    }

    #[test]
    fn collapsed_posterior_ignores_group_order(
        (data, perm) in groups().prop_flat_map(|g| { let n = g.len(); (Just(g), Just((0..n).collect::<Vec<_>>()).prop_shuffle()) }),
        mu in 0.01f64..0.99,
        gamma in 0.01f64..200.0,
    ) {
        let shuffled: Vec<_> = perm.iter().map(|&i| data[i]).collect();
        let cfg = ClosenessModelConfig::default();
        let a = closeness_log_posterior(mu, gamma, &ObservedGroups::from_pairs(&data).unwrap(), &cfg).unwrap();
        let b = closeness_log_posterior(mu, gamma, &ObservedGroups::from_pairs(&shuffled).unwrap(), &cfg).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn mirrored_data_mirrors_mu(data in groups(), mu in 0.01f64..0.99, gamma in 0.01f64..200.0) {
        let data = ObservedGroups::from_pairs(&data).unwrap();
        let cfg = ClosenessModelConfig::default();
        let a = closeness_log_posterior(mu, gamma, &data, &cfg).unwrap();
        let b = closeness_log_posterior(1.0 - mu, gamma, &data.mirrored(), &cfg).unwrap();
        prop_assert!(close(a, b, 1e-10));
    }

    #[test]
    fn full_conditional_is_a_conjugate_update(
        (y, n) in (1u64..200).prop_flat_map(|n| (0..=n, Just(n))),
        mu in 0.001f64..0.999,
        gamma in 0.0f64..1000.0,
        b in base(),
    ) {
        let o = b.offset();
        match theta_full_conditional(y, n, mu, gamma, b).unwrap() {
            closeness::numerics::DistributionSpec::Beta { a, b: bb } => {
                prop_assert!(close(a, gamma * mu + o + y as f64, 1e-14));
                prop_assert!(close(a + bb, gamma + 2.0 * o + n as f64, 1e-12));
            }
            other => prop_assert!(false, "{other:?}"),
        }
    }

    #[test]
    fn hdm_is_equivariant_under_relabelling(
        (cols, perm) in (2usize..=4).prop_flat_map(|k| (
            prop::collection::vec(prop::collection::vec(0u64..20, k), 1..5),
            Just((0..k).collect::<Vec<_>>()).prop_shuffle(),
        )),
        gamma in 0.1f64..50.0,
        seed in 0.01f64..1.0,
    ) {
        prop_assume!(cols.iter().flatten().any(|&c| c > 0));
        let k = perm.len();
        let raw: Vec<f64> = (0..k).map(|i| seed + i as f64 * 0.37).collect();
        let s: f64 = raw.iter().sum();
        let mu: Vec<f64> = raw.iter().map(|r| r / s).collect();
        let counts = ContingencyCounts::from_columns(cols.clone()).unwrap();
        let permuted_cols: Vec<Vec<u64>> = cols.iter().rev().map(|c| perm.iter().map(|&i| c[i]).collect()).collect();
        let permuted = ContingencyCounts::from_columns(permuted_cols).unwrap();
        let permuted_mu: Vec<f64> = perm.iter().map(|&i| mu[i]).collect();
        let cfg = HdmConfig::default();
        let a = hdm_log_posterior(&SimplexPoint::new(mu, 1e-9).unwrap(), gamma, &counts, &cfg).unwrap();
        let b = hdm_log_posterior(&SimplexPoint::new(permuted_mu, 1e-9).unwrap(), gamma, &permuted, &cfg).unwrap();
        prop_assert!(close(a, b, 1e-12), "{a} vs {b}");
    }

    #[test]
    fn groups_csv_round_trips(data in groups()) {
        let data = ObservedGroups::from_pairs(&data).unwrap();
        prop_assert_eq!(parse_groups_csv(&groups_to_csv(&data)).unwrap(), data);
    }

    #[test]
    fn chain_csv_round_trips(draws in prop::collection::vec(prop::collection::vec(-1e6f64..1e6, 3), 2..20)) {
        let chain = |d: Vec<Vec<f64>>| Chain { draws: d, acceptance: vec![0.3, 0.3] };
        let set = ChainSet::new(
            ModelTag::Closeness,
            vec!["mu".into(), "gamma".into(), "theta_1".into()],
            vec![chain(draws.clone()), chain(draws.iter().rev().cloned().collect())],
        ).unwrap();
        let mut buf = Vec::new();
        set.write_csv(&mut buf).unwrap();
        let back = ChainSet::read_csv(ModelTag::Closeness, buf.as_slice()).unwrap();
        prop_assert_eq!(&back.param_names, &set.param_names);
        for (a, b) in back.chains.iter().zip(&set.chains) {
            prop_assert_eq!(&a.draws, &b.draws);
        }
    }

    #[test]
    fn quantiles_are_monotone(values in prop::collection::vec(-1e3f64..1e3, 1..200), p in 0.0f64..1.0, q in 0.0f64..1.0) {
        let (lo, hi) = if p <= q { (p, q) } else { (q, p) };
        prop_assert!(quantile(&values, lo).unwrap() <= quantile(&values, hi).unwrap());
    }

    #[test]
    fn total_variation_is_a_bounded_metric(p in prop::collection::vec(0.0f64..1.0, 1..30), q in prop::collection::vec(0.0f64..1.0, 1..30)) {
        let norm = |v: Vec<f64>| { let s: f64 = v.iter().sum::<f64>() + 1e-9; v.into_iter().map(|x| x / s).collect::<Vec<_>>() };
        let (p, q) = (norm(p), norm(q));
        let d = total_variation(&p, &q);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&d));
        prop_assert!((d - total_variation(&q, &p)).abs() < 1e-15);
        prop_assert!(total_variation(&p, &p) < 1e-15);
    }
}
