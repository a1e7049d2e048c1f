//! Matérn covariance `ρ_{λ,ν}` and its Fourier transform on `ℝ^d`.

use serde::{Deserialize, Serialize};

use crate::specfun::{self, BesselEvalConfig};
use crate::{Error, Result};

/// Isotropic Matérn model with unit marginal variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MaternParams", into = "MaternParams")]
pub struct CovarianceModel {
    lambda: f64,
    nu: f64,
    d: usize,
    ln_prefactor: f64,
}

#[derive(Serialize, Deserialize)]
struct MaternParams {
    lambda: f64,
    nu: f64,
    d: usize,
}

impl TryFrom<MaternParams> for CovarianceModel {
    type Error = Error;

    fn try_from(p: MaternParams) -> Result<Self> {
        Self::new(p.lambda, p.nu, p.d)
    }
}

impl From<CovarianceModel> for MaternParams {
    fn from(m: CovarianceModel) -> Self {
        Self {
            lambda: m.lambda,
            nu: m.nu,
            d: m.d,
        }
    }
}

impl CovarianceModel {
    pub fn new(lambda: f64, nu: f64, d: usize) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "correlation length must be positive, got {lambda}"
            )));
        }
        if !(nu > 0.0) || nu > specfun::MAX_ORDER {
            return Err(Error::InvalidParameter(format!(
                "smoothness must lie in (0, {}], got {nu}",
                specfun::MAX_ORDER
            )));
        }
        if !(1..=3).contains(&d) {
            return Err(Error::InvalidParameter(format!(
                "dimension must be 1, 2 or 3, got {d}"
            )));
        }
        Ok(Self {
            lambda,
            nu,
            d,
            ln_prefactor: (1.0 - nu) * std::f64::consts::LN_2 - specfun::ln_gamma_pos(nu),
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Same smoothness and dimension, correlation length scaled by `c`.
    pub fn rescaled(&self, c: f64) -> Result<Self> {
        Self::new(self.lambda * c, self.nu, self.d)
    }

    /// `ρ(x) = 2^{1-ν}/Γ(ν) z^ν K_ν(z)` with `z = sqrt(2ν)|x|/λ`.
    pub fn rho(&self, x: &[f64]) -> f64 {
        self.rho_radial(norm(x))
    }

    /// `ρ` as a function of `r = |x|`.
    pub fn rho_radial(&self, r: f64) -> f64 {
        let z = (2.0 * self.nu).sqrt() * r.abs() / self.lambda;
        if z == 0.0 {
            return 1.0;
        }
        // 1 - ρ = O(z^{min(2, 2ν)}); below rounding level the limit is exact.
        if z.ln() * (2.0 * self.nu).min(2.0) < -40.0 {
            return 1.0;
        }
        let cfg = BesselEvalConfig::default();
        let ln_z = z.ln();
        // z^ν K_ν(z) e^{z} is O(1) unless z is small and ν large
        if self.nu * (2.0 / z).ln() < 600.0 {
            let ks = specfun::bessel_k_scaled(self.nu, z, &cfg)
                .expect("order and argument validated at construction");
            (self.ln_prefactor + self.nu * ln_z - z).exp() * ks
        } else {
            let lk = specfun::ln_bessel_k(self.nu, z, &cfg)
                .expect("order and argument validated at construction");
            (self.ln_prefactor + self.nu * ln_z + lk).exp().min(1.0)
        }
    }

    /// `ln C_{λ,ν}` with `C = (2√π)^d Γ(ν+d/2) (2ν)^ν / (Γ(ν) λ^{2ν})`.
    pub fn ln_spectral_constant(&self) -> f64 {
        let d = self.d as f64;
        let nu = self.nu;
        d * (2.0 * std::f64::consts::PI.sqrt()).ln() + specfun::ln_gamma_pos(nu + 0.5 * d)
            + nu * (2.0 * nu).ln()
            - specfun::ln_gamma_pos(nu)
            - 2.0 * nu * self.lambda.ln()
    }

    /// `ρ̂(ω) = C_{λ,ν} (2ν/λ² + |ω|²)^{-(ν+d/2)}`.
    pub fn spectral_density(&self, omega: &[f64]) -> f64 {
        self.spectral_density_radial(norm(omega))
    }

    pub fn spectral_density_radial(&self, w: f64) -> f64 {
        let base = 2.0 * self.nu / (self.lambda * self.lambda) + w * w;
        let exponent = self.nu + 0.5 * self.d as f64;
        (self.ln_spectral_constant() - exponent * base.ln()).exp()
    }

    /// `(ρ_{λ,ν}(x), ρ_{cλ,ν}(c x))`; the two components agree.
    pub fn rho_scaling_check(&self, x: &[f64], c: f64) -> Result<(f64, f64)> {
        if !(c > 0.0) {
            return Err(Error::InvalidParameter(format!("scale must be positive, got {c}")));
        }
        let scaled = self.rescaled(c)?;
        let cx: Vec<f64> = x.iter().map(|v| v * c).collect();
        Ok((self.rho(x), scaled.rho(&cx)))
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    match x.len() {
        1 => x[0].abs(),
        2 => x[0].hypot(x[1]),
        _ => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rho_examples() {
        let m = CovarianceModel::new(1.0, 0.5, 1).unwrap();
        assert_eq!(m.rho(&[0.0]), 1.0);
        assert!((m.rho(&[1.0]) - (-1.0f64).exp()).abs() < 1e-15);
        assert!((m.rho(&[1.0]) - 0.367_879_441_2).abs() < 1e-10);
        let m = CovarianceModel::new(1.0, 1.5, 1).unwrap();
        let s3 = 3f64.sqrt();
        let expected = (1.0 + s3) * (-s3).exp();
        assert!((m.rho(&[1.0]) - expected).abs() < 1e-15);
        assert!((m.rho(&[1.0]) - 0.483_357_724_5).abs() < 1e-10);
    }

    #[test]
    fn half_integer_closed_forms_in_every_dimension() {
        // ν = 5/2: (1 + z + z²/3) e^{-z}
        for d in 1..=3 {
            let m = CovarianceModel::new(0.7, 2.5, d).unwrap();
            for &r in &[0.01, 0.3, 1.2, 4.0] {
                let z = 5f64.sqrt() * r / 0.7;
                let expected = (1.0 + z + z * z / 3.0) * (-z).exp();
                let mut x = vec![0.0; d];
                x[0] = r;
                assert!((m.rho(&x) - expected).abs() < 2e-15);
            }
        }
    }

    #[test]
    fn spectral_density_examples() {
        let m = CovarianceModel::new(1.0, 0.5, 1).unwrap();
        assert!((m.spectral_density(&[0.0]) - 2.0).abs() < 1e-14);
        let c = m.ln_spectral_constant().exp();
        for &w in &[1e2, 1e3] {
            let ratio = m.spectral_density(&[w]) / (c * w.powi(-2));
            assert!((ratio - 1.0).abs() < 1.0 / (w * w) * 1.01, "w = {w}: {ratio}");
            assert_eq!(m.spectral_density(&[w]), m.spectral_density(&[-w]));
        }
    }

    #[test]
    fn scaling_examples() {
        let m = CovarianceModel::new(0.5, 1.0, 1).unwrap();
        let (a, b) = m.rho_scaling_check(&[0.3], 2.0).unwrap();
        assert!((a - b).abs() < 1e-15);
        let m = CovarianceModel::new(1.0, 0.5, 1).unwrap();
        let (a, b) = m.rho_scaling_check(&[1.0], 3.0).unwrap();
        assert!((a - (-1.0f64).exp()).abs() < 1e-15 && (b - (-1.0f64).exp()).abs() < 1e-15);
        let m = CovarianceModel::new(2.0, 2.0, 1).unwrap();
        assert_eq!(m.rho_scaling_check(&[0.0], 7.0).unwrap(), (1.0, 1.0));
    }

    #[test]
    fn small_nu_near_origin_is_evaluated() {
        // ν = 2^-7: 1 - ρ is not negligible even at z = 1e-8
        let m = CovarianceModel::new(0.5, 2f64.powi(-7), 1).unwrap();
        let v = m.rho(&[1e-9]);
        assert!(v < 0.95 && v > 0.0, "{v}");
        let w = m.rho(&[1e-12]);
        assert!(w > v && w < 1.0);
    }

    #[test]
    fn large_nu_small_radius_uses_log_path() {
        let m = CovarianceModel::new(1.0, 60.0, 1).unwrap();
        let v = m.rho(&[1e-6]);
        assert!((v - 1.0).abs() < 1e-9);
        let w = m.rho(&[1e-3]);
        assert!(w < 1.0 && w > 0.99);
    }

    #[test]
    fn plancherel_spot_check() {
        // (1/2π) ∫ ρ̂(ω) dω = ρ(0) = 1; ν = 1 gives tail ∫_R^∞ ~ C R^{-2}/2
        let m = CovarianceModel::new(0.5, 1.0, 1).unwrap();
        let c = m.ln_spectral_constant().exp();
        let r_max: f64 = (c / (2.0 * std::f64::consts::PI * 1e-8)).sqrt();
        let n = 2_000_000usize;
        // substitution ω = sinh(u) resolves both the peak and the algebraic tail
        let u_max = r_max.asinh();
        let h = u_max / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let u = (i as f64 + 0.5) * h;
            acc += m.spectral_density(&[u.sinh()]) * u.cosh();
        }
        let integral = 2.0 * acc * h / (2.0 * std::f64::consts::PI);
        assert!((integral - 1.0).abs() < 1e-6, "{integral}");
    }

    #[test]
    fn json_round_trip_revalidates() {
        let m = CovarianceModel::new(0.5, 1.25, 2).unwrap();
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(json, r#"{"lambda":0.5,"nu":1.25,"d":2}"#);
        let back: CovarianceModel = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<CovarianceModel>(r#"{"lambda":-1,"nu":1,"d":1}"#).is_err());
    }

    #[test]
    fn rejects_invalid() {
        assert!(CovarianceModel::new(0.0, 1.0, 1).is_err());
        assert!(CovarianceModel::new(1.0, 0.0, 1).is_err());
        assert!(CovarianceModel::new(1.0, 1.0, 4).is_err());
        assert!(CovarianceModel::new(1.0, 61.0, 1).is_err());
    }

    fn rotate(x: &[f64], seed: f64) -> Vec<f64> {
        match x.len() {
            2 => {
                let (s, c) = seed.sin_cos();
                vec![c * x[0] - s * x[1], s * x[0] + c * x[1]]
            }
            3 => {
                let (s, c) = seed.sin_cos();
                let (s2, c2) = (1.7 * seed).sin_cos();
                let y = [c * x[0] - s * x[1], s * x[0] + c * x[1], x[2]];
                vec![y[0], c2 * y[1] - s2 * y[2], s2 * y[1] + c2 * y[2]]
            }
            _ => x.to_vec(),
        }
    }

    proptest! {
        #[test]
        fn radial_and_even(lambda in 0.05f64..3.0, nu in 0.01f64..10.0, d in 1usize..=3,
                           x in proptest::collection::vec(-3.0f64..3.0, 3), angle in 0.0f64..6.3) {
            let m = CovarianceModel::new(lambda, nu, d).unwrap();
            let x = &x[..d];
            let neg: Vec<f64> = x.iter().map(|v| -v).collect();
            prop_assert!((m.rho(x) - m.rho(&neg)).abs() <= 1e-14);
            let rot = rotate(x, angle);
            prop_assert!((m.rho(x) - m.rho(&rot)).abs() <= 1e-14);
            prop_assert!(m.spectral_density(x) > 0.0);
        }

        #[test]
        fn radially_decreasing(lambda in 0.05f64..3.0, nu in 0.01f64..10.0) {
            let m = CovarianceModel::new(lambda, nu, 1).unwrap();
            let mut prev = m.rho_radial(0.0);
            for i in 1..=20 {
                let r = lambda * 0.25 * i as f64;
                let cur = m.rho_radial(r);
                prop_assert!(cur < prev, "r = {}: {} !< {}", r, cur, prev);
                prev = cur;
            }
        }
    }
}
