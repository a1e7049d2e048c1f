//! Eigenvalues of the nested circulant matrix `h^d Σ^ext` and the
//! positive-definiteness predicate.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::periodize::PeriodizedKernel;
use super::{PeriodizationScheme, TorusGrid};
use crate::covariance::CovarianceModel;
use crate::fft;
use crate::{Error, Result};

/// Default relative tolerance of the PD predicate.
pub const DEFAULT_PD_TOL: f64 = 1e-13;

/// Bound on `max |Im| / max |Re|` of the transformed covariance.
const IMAG_LIMIT: f64 = 1e-10;

/// `(S_N ρ)_k = h^d Σ_n cov(x_n) e^{-i ω_k · x_n}` for every `k`, in FFT order.
///
/// `cov` must be even under `n → -n (mod N)`; the imaginary residual of the
/// transform is checked and discarded.
pub fn spectral_eigenvalues(cov: &[f64], grid: &TorusGrid) -> Result<Vec<f64>> {
    if cov.len() != grid.len() {
        return Err(Error::InvalidParameter(format!(
            "covariance array has {} entries, grid has {}",
            cov.len(),
            grid.len()
        )));
    }
    let mut data: Vec<Complex64> = cov.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft::fft_nd(&mut data, grid.n(), grid.dim(), false);
    let weight = grid.h().powi(grid.dim() as i32);
    let max_re = data.iter().fold(0.0f64, |m, z| m.max(z.re.abs()));
    let max_im = data.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
    if max_im > IMAG_LIMIT * max_re {
        return Err(Error::SymmetryViolation {
            imag: max_im * weight,
            limit: IMAG_LIMIT * max_re * weight,
        });
    }
    Ok(data.into_iter().map(|z| z.re * weight).collect())
}

/// `min λ ≥ -rel_tol · max λ`.
pub fn is_positive_semidefinite(factor: &SpectralFactor, rel_tol: f64) -> bool {
    pd_predicate(factor.min_eig, factor.max_eig, rel_tol)
}

fn pd_predicate(min: f64, max: f64, rel_tol: f64) -> bool {
    max > 0.0 && min >= -rel_tol * max
}

/// Eigenvalues of `h^d Σ^ext` together with everything needed to sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralFactor {
    /// `(S_N ρ)_k` in FFT order, as computed (not clamped).
    pub eigs: Vec<f64>,
    pub grid: TorusGrid,
    pub scheme: PeriodizationScheme,
    pub model: CovarianceModel,
    pub min_eig: f64,
    pub max_eig: f64,
    pub trace: f64,
    pub is_pd: bool,
    pub pd_tol: f64,
    /// Sum of `|λ_k|` over negative eigenvalues zeroed for sampling.
    pub clamped_mass: f64,
}

impl SpectralFactor {
    /// Periodizes, transforms and classifies with the default tolerance.
    pub fn factorize(
        model: &CovarianceModel,
        grid: &TorusGrid,
        scheme: &PeriodizationScheme,
    ) -> Result<Self> {
        let kernel = PeriodizedKernel::new(*model, *grid, *scheme)?;
        let cov = kernel.full_array();
        let eigs = spectral_eigenvalues(&cov, grid)?;
        Self::from_eigenvalues(eigs, *grid, *scheme, *model, DEFAULT_PD_TOL)
    }

    pub fn from_eigenvalues(
        eigs: Vec<f64>,
        grid: TorusGrid,
        scheme: PeriodizationScheme,
        model: CovarianceModel,
        pd_tol: f64,
    ) -> Result<Self> {
        if eigs.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "{} eigenvalues for a grid of {} points",
                eigs.len(),
                grid.len()
            )));
        }
        if !(pd_tol >= 0.0) {
            return Err(Error::InvalidParameter(format!("PD tolerance must be >= 0, got {pd_tol}")));
        }
        let min_eig = eigs.iter().copied().fold(f64::INFINITY, f64::min);
        let max_eig = eigs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let trace = eigs.iter().sum();
        let mut factor = SpectralFactor {
            eigs,
            grid,
            scheme,
            model,
            min_eig,
            max_eig,
            trace,
            is_pd: false,
            pd_tol,
            clamped_mass: 0.0,
        };
        factor.classify();
        Ok(factor)
    }

    fn classify(&mut self) {
        self.is_pd = pd_predicate(self.min_eig, self.max_eig, self.pd_tol);
        self.clamped_mass = if self.is_pd {
            self.eigs.iter().filter(|&&v| v < 0.0).fold(0.0, |acc, v| acc - v)
        } else {
            0.0
        };
    }

    /// Re-evaluates the predicate with another tolerance.
    pub fn with_pd_tolerance(mut self, pd_tol: f64) -> Self {
        self.pd_tol = pd_tol;
        self.classify();
        self
    }

    /// `min λ / max λ`.
    pub fn pd_margin(&self) -> f64 {
        self.min_eig / self.max_eig
    }

    /// `N^{-d} Λ^ext = λ_k / (2γ)^d`, negative entries zeroed. These are the
    /// variances of the Fourier coefficients of a torus sample.
    pub fn sampling_variances(&self) -> Result<Vec<f64>> {
        if !self.is_pd {
            return Err(Error::NotPositiveDefinite {
                min_eig: self.min_eig,
                max_eig: self.max_eig,
            });
        }
        let vol = (2.0 * self.grid.gamma()).powi(self.grid.dim() as i32);
        Ok(self.eigs.iter().map(|&v| v.max(0.0) / vol).collect())
    }
}

/// PD status of a configuration without the full eigenvalue array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdProbe {
    pub n: usize,
    pub gamma: f64,
    pub min_eig: f64,
    pub max_eig: f64,
    pub is_pd: bool,
}

impl PdProbe {
    pub fn margin(&self) -> f64 {
        self.min_eig / self.max_eig
    }
}

/// Extreme eigenvalues of `h^d Σ^ext` from the nonnegative quadrant only.
///
/// `ρ^ext` is even in every coordinate, hence so is its spectrum, and the
/// quadrant transform reproduces the full one at `k ≥ 0`. Memory and work
/// drop by about `2^d` (more with the permutation symmetry used in assembly).
pub fn pd_probe(
    model: &CovarianceModel,
    grid: &TorusGrid,
    scheme: &PeriodizationScheme,
    rel_tol: f64,
) -> Result<PdProbe> {
    let kernel = PeriodizedKernel::new(*model, *grid, *scheme)?;
    let mut q = kernel.quadrant_array();
    fft::even_dft_quadrant(&mut q, grid.n(), grid.dim());
    let weight = grid.h().powi(grid.dim() as i32);
    let min_eig = q.iter().copied().fold(f64::INFINITY, f64::min) * weight;
    let max_eig = q.iter().copied().fold(f64::NEG_INFINITY, f64::max) * weight;
    Ok(PdProbe {
        n: grid.n(),
        gamma: grid.gamma(),
        min_eig,
        max_eig,
        is_pd: pd_predicate(min_eig, max_eig, rel_tol),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::SmoothKind;

    #[test]
    fn constant_cov() {
        let g = TorusGrid::new(1, 8, 0.25, 0.5).unwrap();
        let eigs = spectral_eigenvalues(&[0.7; 8], &g).unwrap();
        assert!((eigs[0] - 0.7 * 2.0).abs() < 1e-15);
        assert!(eigs[1..].iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn rejects_odd_input() {
        let g = TorusGrid::new(1, 8, 0.25, 0.5).unwrap();
        let cov = [1.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        assert!(matches!(
            spectral_eigenvalues(&cov, &g),
            Err(Error::SymmetryViolation { .. })
        ));
    }

    #[test]
    fn predicate_and_clamping() {
        let g = TorusGrid::new(1, 4, 0.5, 0.5).unwrap();
        let m = CovarianceModel::new(0.5, 1.0, 1).unwrap();
        let s = PeriodizationScheme::Classical;
        let f = SpectralFactor::from_eigenvalues(vec![1.0, 0.5, 0.2, 0.5], g, s, m, 1e-13).unwrap();
        assert!(f.is_pd && f.clamped_mass == 0.0);
        let f = SpectralFactor::from_eigenvalues(vec![1.0, -1e-20, 0.2, 0.5], g, s, m, 1e-13)
            .unwrap();
        assert!(f.is_pd);
        assert_eq!(f.clamped_mass, 1e-20);
        assert_eq!(f.sampling_variances().unwrap()[1], 0.0);
        let f = SpectralFactor::from_eigenvalues(vec![1.0, -1e-3, 0.2, 0.5], g, s, m, 1e-13)
            .unwrap();
        assert!(!f.is_pd);
        assert!(f.sampling_variances().is_err());
        assert!(is_positive_semidefinite(&f, 1e-2));
        assert!(f.with_pd_tolerance(1e-2).is_pd);
    }

    #[test]
    fn classical_small_gamma_is_not_pd() {
        let m = CovarianceModel::new(0.5, 1.0, 1).unwrap();
        let h = 2f64.powi(-10);
        let g = TorusGrid::from_gamma(1, 1.0, h, 0.5).unwrap();
        let f = SpectralFactor::factorize(&m, &g, &PeriodizationScheme::Classical).unwrap();
        assert!(!f.is_pd);
        assert!(f.min_eig < 0.0);
    }

    #[test]
    fn probe_matches_full_factor() {
        for d in 1..=3 {
            let m = CovarianceModel::new(0.5, 1.3, d).unwrap();
            let g = TorusGrid::new(d, 14, 0.2, 0.25).unwrap();
            for s in [
                PeriodizationScheme::Classical,
                PeriodizationScheme::smooth_for_grid(&g, SmoothKind::ExpSmooth, 0).unwrap(),
            ] {
                let f = SpectralFactor::factorize(&m, &g, &s).unwrap();
                let p = pd_probe(&m, &g, &s, DEFAULT_PD_TOL).unwrap();
                let scale = f.max_eig;
                assert!((p.min_eig - f.min_eig).abs() < 1e-13 * scale);
                assert!((p.max_eig - f.max_eig).abs() < 1e-13 * scale);
                assert_eq!(p.is_pd, f.is_pd);
            }
        }
    }

    #[test]
    fn trace_identity() {
        let m = CovarianceModel::new(0.5, 1.0, 2).unwrap();
        let g = TorusGrid::new(2, 32, 0.125, 0.5).unwrap();
        let s = PeriodizationScheme::smooth_for_grid(&g, SmoothKind::ExpSmooth, 0).unwrap();
        let f = SpectralFactor::factorize(&m, &g, &s).unwrap();
        let expect = (2.0 * g.gamma()).powi(2) * 1.0;
        assert!(((f.trace - expect) / expect).abs() < 1e-10);
    }
}
