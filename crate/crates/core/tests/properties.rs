use matern_torus::experiments::{
    fmt_f64, min_gamma, svg_plot, verify_bracket, AxesSpec, MinGammaOptions, SchemeChoice, Table,
};
use matern_torus::sampler::{draw, draw_full, empirical_covariance};
use matern_torus::torus::{periodized_cov_on_grid, DEFAULT_PD_TOL};
use matern_torus::{
    CovarianceModel, CutoffSpec, PeriodizationScheme, RngStream, SmoothKind, SpectralFactor,
    TorusGrid,
};
use proptest::prelude::*;

fn smooth_kind() -> impl Strategy<Value = SmoothKind> {
    prop_oneof![Just(SmoothKind::BSpline), Just(SmoothKind::ExpSmooth)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn smooth_embedding_is_exact_on_box(
        d in 1usize..=2,
        lambda in 0.1f64..2.0,
        nu in 0.05f64..6.0,
        kind in smooth_kind(),
        extra in 0usize..6,
    ) {
        let model = CovarianceModel::new(lambda, nu, d).unwrap();
        let h = 0.125;
        let gamma = PeriodizationScheme::min_smooth_gamma(kind, d, 0.5);
        let base = TorusGrid::from_gamma(d, gamma, h, 0.5).unwrap();
        let grid = base.with_n(base.n() + 2 + 2 * extra).unwrap();
        let p = PeriodizationScheme::default_p(nu, d);
        let scheme = PeriodizationScheme::smooth_for_grid(&grid, kind, p).unwrap();
        let cov = periodized_cov_on_grid(&model, &grid, &scheme).unwrap();
        let m = grid.domain_half_count() as i64;
        // every difference of two box points
        for flat in 0..grid.len() {
            let c = grid.point(flat);
            if c.iter().all(|v| v.abs() <= 2 * m) {
                let x: Vec<f64> = c.iter().map(|&v| v as f64 * h).collect();
                let want = model.rho(&x);
                prop_assert!((cov[flat] - want).abs() <= 1e-14, "at {c:?}: {} vs {want}", cov[flat]);
            }
        }
    }

    #[test]
    fn exp_cutoff_even_and_monotone(kappa in 1.0f64..5.0, frac in 0.05f64..0.95) {
        let c = CutoffSpec::exp_smooth(kappa, frac * kappa).unwrap();
        let mut prev = 1.0;
        for i in 0..=1000 {
            let t = 1.1 * kappa * i as f64 / 1000.0;
            let v = c.phi(t);
            prop_assert_eq!(v.to_bits(), c.phi(-t).to_bits());
            prop_assert!(v <= prev);
            prev = v;
        }
        prop_assert_eq!(c.phi(kappa), 0.0);
        prop_assert_eq!(c.phi(frac * kappa), 1.0);
    }

    #[test]
    fn batches_are_deterministic_and_restricted(seed in any::<u64>(), stream in any::<u64>(), count in 1usize..6) {
        let model = CovarianceModel::new(0.5, 1.0, 1).unwrap();
        let grid = TorusGrid::new(1, 24, 0.125, 0.5).unwrap();
        let scheme = PeriodizationScheme::smooth_for_grid(&grid, SmoothKind::ExpSmooth, 0).unwrap();
        let factor = SpectralFactor::factorize(&model, &grid, &scheme).unwrap();
        let a = draw(&factor, &mut RngStream::new(seed, stream), count).unwrap();
        let b = draw(&factor, &mut RngStream::new(seed, stream), count).unwrap();
        prop_assert_eq!(&a, &b);
        let full = draw_full(&factor, &mut RngStream::new(seed, stream), count).unwrap();
        for (i, field) in full.iter().enumerate() {
            for (col, &idx) in a.domain_index.iter().enumerate() {
                prop_assert_eq!(a.row(i)[col].to_bits(), field[idx].to_bits());
            }
        }
    }

    #[test]
    fn covariance_estimate_is_symmetric(seed in any::<u64>(), a in 0usize..9, b in 0usize..9) {
        let model = CovarianceModel::new(0.5, 1.0, 1).unwrap();
        let grid = TorusGrid::new(1, 24, 0.125, 0.5).unwrap();
        let scheme = PeriodizationScheme::smooth_for_grid(&grid, SmoothKind::ExpSmooth, 0).unwrap();
        let factor = SpectralFactor::factorize(&model, &grid, &scheme).unwrap();
        let batch = draw(&factor, &mut RngStream::new(seed, 0), 50).unwrap();
        let e = empirical_covariance(&batch, &[(a, b), (b, a)]).unwrap();
        prop_assert!((e[0].estimate - e[1].estimate).abs() <= 1e-15 * (1.0 + e[0].estimate.abs()));
        prop_assert!((e[0].std_error - e[1].std_error).abs() <= 1e-12 * (1.0 + e[0].std_error));
    }

    #[test]
    fn tables_round_trip(values in prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 1..20)) {
        let mut t = Table::new(&["i", "x"]);
        t.set_meta("partial", "false");
        for (i, v) in values.iter().enumerate() {
            t.push(vec![i.to_string(), fmt_f64(*v)]).unwrap();
        }
        let back = Table::from_csv_str(&t.to_csv_string().unwrap()).unwrap();
        let xs = back.numeric("x").unwrap();
        for (v, x) in values.iter().zip(xs) {
            prop_assert_eq!(v.to_bits(), x.unwrap().to_bits());
        }
        prop_assert_eq!(back, t);
    }

    #[test]
    fn svg_is_byte_stable(ys in prop::collection::vec(0.01f64..100.0, 1..12)) {
        let mut t = Table::new(&["x", "y"]);
        for (i, y) in ys.iter().enumerate() {
            t.push(vec![fmt_f64((i + 1) as f64), fmt_f64(*y)]).unwrap();
        }
        let spec = AxesSpec { x: "x".into(), y: "y".into(), x_log: true, y_log: true, ..Default::default() };
        let a = svg_plot(&t, &spec).unwrap();
        prop_assert_eq!(&a, &svg_plot(&t, &spec).unwrap());
        let polylines = a.matches("class=\"series\"").count();
        prop_assert_eq!(polylines, usize::from(ys.len() > 1));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    /// Brackets are certified and every monotonicity probe is recorded.
    #[test]
    fn min_gamma_brackets_are_certified(
        nu in 0.1f64..3.0,
        k in 5i32..8,
        choice in prop_oneof![
            Just(SchemeChoice::Classical),
            Just(SchemeChoice::ExpSmooth),
            Just(SchemeChoice::BSpline { p: None }),
        ],
    ) {
        let model = CovarianceModel::new(0.5, nu, 1).unwrap();
        let h = 2f64.powi(-k);
        let opts = MinGammaOptions::default();
        let r = min_gamma(&model, h, 0.5, choice, &opts).unwrap();
        prop_assert!(verify_bracket(&r, DEFAULT_PD_TOL).unwrap());
        prop_assert_eq!(r.gamma_star, r.n_star as f64 * h / 2.0);
        for i in 1..=opts.monotonicity_probes {
            let n = r.n_star + 2 * i;
            let e = r.evaluations.iter().find(|e| e.n == n).unwrap();
            prop_assert_eq!(e.is_pd, !r.non_monotone.contains(&n));
        }
    }
}
