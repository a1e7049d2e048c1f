//! Scalar special functions: `K_ν` for real order, `ln Γ`, cardinal B-splines.

mod bessel;
mod bspline;
mod gamma;
mod oracle;

pub use bessel::{bessel_k, bessel_k_scaled, ln_bessel_k, BesselEvalConfig, MAX_ORDER};
pub use bspline::{
    cardinal_bspline, cardinal_m, cardinal_m_derivative, integrated_bspline, KnotSide,
};
pub use gamma::log_gamma;
pub(crate) use gamma::ln_gamma_pos;
pub use oracle::{bessel_k_quadrature_oracle, ln_bessel_k_quadrature_oracle};

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bspline_examples() {
        assert_eq!(cardinal_bspline(1, -0.5), 1.0);
        assert_eq!(cardinal_bspline(1, 0.0), 0.0);
        assert_eq!(cardinal_bspline(1, -1.0), 1.0);
        assert!((cardinal_bspline(2, -1.0) - 1.0).abs() < 1e-15);
        assert!((cardinal_bspline(2, -0.5) - 0.5).abs() < 1e-15);
        // cubic B-spline (order 4) at its centre is 2/3
        assert!((cardinal_bspline(4, -2.0) - 2.0 / 3.0).abs() < 1e-15);
        for &u in &[-2.5, -1.3, -0.2, -4.9] {
            let a = cardinal_bspline(5, u);
            let b = cardinal_bspline(5, -5.0 - u);
            assert!((a - b).abs() < 1e-15, "u = {u}");
        }
        assert_eq!(cardinal_bspline(5, 0.1), 0.0);
        assert_eq!(cardinal_bspline(5, -5.1), 0.0);
    }

    #[test]
    fn bspline_integrates_to_one() {
        for order in 1..=11 {
            let n = 20_000;
            let h = order as f64 / n as f64;
            let sum: f64 = (0..n)
                .map(|i| cardinal_bspline(order, -(order as f64) + (i as f64 + 0.5) * h))
                .sum::<f64>()
                * h;
            assert!((sum - 1.0).abs() < 1e-8, "order {order}: {sum}");
            assert!((integrated_bspline(order, -(order as f64) / 2.0) - 0.5).abs() < 1e-14);
            assert_eq!(integrated_bspline(order, 0.0), 1.0);
            assert_eq!(integrated_bspline(order, -(order as f64)), 0.0);
        }
    }

    #[test]
    fn integrated_bspline_matches_midpoint_quadrature() {
        let order = 5;
        for &u in &[-4.3, -3.0, -2.2, -0.7] {
            let lo = -(order as f64);
            let n = 40_000;
            let h = (u - lo) / n as f64;
            let q: f64 = (0..n)
                .map(|i| cardinal_bspline(order, lo + (i as f64 + 0.5) * h))
                .sum::<f64>()
                * h;
            assert!((integrated_bspline(order, u) - q).abs() < 1e-9, "u = {u}");
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let r = 6;
        for m in 1..r - 1 {
            for &x in &[0.3, 1.7, 2.5, 3.9, 5.2] {
                let d = 1e-6;
                let fd = (cardinal_m_derivative(r, m - 1, x + d, KnotSide::Right)
                    - cardinal_m_derivative(r, m - 1, x - d, KnotSide::Right))
                    / (2.0 * d);
                let exact = cardinal_m_derivative(r, m, x, KnotSide::Right);
                assert!((fd - exact).abs() < 1e-6, "m = {m}, x = {x}: {fd} vs {exact}");
            }
        }
    }

    #[test]
    fn one_sided_limits_agree_for_continuous_orders() {
        let r = 5;
        for knot in 0..=r {
            let x = knot as f64;
            let l = cardinal_m(r, x, KnotSide::Left);
            let rr = cardinal_m(r, x, KnotSide::Right);
            assert!((l - rr).abs() < 1e-15, "knot {knot}");
        }
    }

    proptest! {
        #[test]
        fn bspline_partition_of_unity(order in 1usize..=11, u in -50.0f64..50.0) {
            let base = u.floor();
            let frac = u - base;
            let sum: f64 = (-(order as i64) - 1..=order as i64 + 1)
                .map(|j| cardinal_bspline(order, frac - j as f64))
                .sum();
            prop_assert!((sum - 1.0).abs() < 1e-13);
        }

        #[test]
        fn bessel_monotone_in_order(t in 1e-3f64..100.0, a in 0.0f64..60.0, b in 0.0f64..60.0) {
            let cfg = BesselEvalConfig::default();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let k_lo = ln_bessel_k(lo, t, &cfg).unwrap();
            let k_hi = ln_bessel_k(hi, t, &cfg).unwrap();
            prop_assert!(k_lo <= k_hi + 1e-14 * k_hi.abs().max(1.0));
        }

        #[test]
        fn bessel_symmetry(nu in 0.0f64..60.0, t in 1e-6f64..700.0) {
            let cfg = BesselEvalConfig::default();
            let a = bessel_k(nu, t, &cfg).unwrap();
            let b = bessel_k(-nu, t, &cfg).unwrap();
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn bessel_upper_bound_holds() {
        // K_ν(t) ≤ e 2^{2ν} Γ(ν) / (2 sqrt(2t)) e^{-t} on a 50×50 log grid
        let cfg = BesselEvalConfig::default();
        for i in 0..50 {
            let nu = (1e-3f64.ln() + (20f64.ln() - 1e-3f64.ln()) * i as f64 / 49.0).exp();
            for j in 0..50 {
                let t = (0.5f64.ln() + (50f64.ln() - 0.5f64.ln()) * j as f64 / 49.0).exp();
                let lhs = ln_bessel_k(nu, t, &cfg).unwrap();
                let rhs = 1.0 + 2.0 * nu * 2f64.ln() + log_gamma(nu).unwrap()
                    - (2.0 * (2.0 * t).sqrt()).ln()
                    - t;
                assert!(lhs <= rhs, "nu = {nu}, t = {t}: {lhs} > {rhs}");
            }
        }
    }
}
