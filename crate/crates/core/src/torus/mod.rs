//! Torus geometry, periodized covariance, circulant eigenvalues and the
//! diagnostics built on them.
//!
//! Arrays over the torus grid are stored row-major with the last axis
//! contiguous, in FFT order: array index `i` on an axis holds the point
//! `n = i` for `i < N/2` and `n = i - N` otherwise. The same order is used for
//! frequencies `k`.

mod aliasing;
mod bounds;
mod decay;
mod periodize;
mod spectral;

use serde::{Deserialize, Serialize};

use crate::cutoff::CutoffSpec;
use crate::{Error, Result};

pub use aliasing::{aliasing_identity_residual, aliasing_residual_of, DEFAULT_REFINEMENT};
pub use bounds::{
    calibrate_classical_c1, calibrate_smooth_c1, sufficient_gamma_classical,
    sufficient_kappa_smooth, GammaBound,
};
pub use decay::{decay_fit, default_window, sorted_scaled_eigenvalues, DecayFit};
pub use periodize::{periodized_cov_on_grid, PeriodizedKernel};
pub use spectral::{
    is_positive_semidefinite, pd_probe, spectral_eigenvalues, PdProbe, SpectralFactor,
    DEFAULT_PD_TOL,
};

/// Relative slack used when snapping lengths to grid multiples.
const SNAP: f64 = 1e-9;

/// Uniform grid on the torus `[-γ, γ)^d` with `N` points per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    d: usize,
    n: usize,
    h: f64,
    e0: f64,
}

impl TorusGrid {
    pub fn new(d: usize, n: usize, h: f64, e0: f64) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(Error::InvalidParameter(format!("dimension must be 1, 2 or 3, got {d}")));
        }
        if n < 2 || n % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "points per axis must be even and at least 2, got {n}"
            )));
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidParameter(format!("spacing must be positive, got {h}")));
        }
        if !(e0 > 0.0) || !e0.is_finite() {
            return Err(Error::InvalidParameter(format!("e0 must be positive, got {e0}")));
        }
        let grid = TorusGrid { d, n, h, e0 };
        if grid.gamma() < 2.0 * e0 * (1.0 - SNAP) {
            return Err(Error::InvalidParameter(format!(
                "torus half-width {} is below 2 e0 = {}",
                grid.gamma(),
                2.0 * e0
            )));
        }
        Ok(grid)
    }

    /// Smallest even `N` with `N h / 2 ≥ γ` (up to rounding slack).
    pub fn from_gamma(d: usize, gamma: f64, h: f64, e0: f64) -> Result<Self> {
        if !(gamma > 0.0) || !(h > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need positive gamma and h, got {gamma}, {h}"
            )));
        }
        let half = (gamma / h * (1.0 - SNAP)).ceil().max(1.0);
        if half > 1e12 {
            return Err(Error::InvalidParameter(format!("gamma / h = {} is too large", gamma / h)));
        }
        Self::new(d, 2 * half as usize, h, e0)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Points per axis `N`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn e0(&self) -> f64 {
        self.e0
    }

    /// `γ = N h / 2`.
    pub fn gamma(&self) -> f64 {
        self.n as f64 * self.h / 2.0
    }

    /// Total number of torus points `N^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Signed grid coordinate for an array index on one axis.
    pub fn signed(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Array index for a signed coordinate, wrapped modulo `N`.
    pub fn wrap(&self, n: i64) -> usize {
        n.rem_euclid(self.n as i64) as usize
    }

    /// Multi-index (array indices) of a flat position.
    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.d];
        for a in (0..self.d).rev() {
            idx[a] = flat % self.n;
            flat /= self.n;
        }
        idx
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.n + i)
    }

    /// Signed coordinates of a flat position.
    pub fn point(&self, flat: usize) -> Vec<i64> {
        self.unflatten(flat).into_iter().map(|i| self.signed(i)).collect()
    }

    /// Largest `m` with `m h ≤ e0`: the sampling box holds `2m + 1` points per axis.
    pub fn domain_half_count(&self) -> usize {
        ((self.e0 / self.h) * (1.0 + SNAP)).floor() as usize
    }

    /// Points per axis inside `[-e0, e0]`.
    pub fn domain_points_per_axis(&self) -> usize {
        2 * self.domain_half_count() + 1
    }

    /// Flat torus indices of the sampling box points, ordered row-major by
    /// signed coordinate from `-m` to `m` on each axis.
    pub fn domain_index(&self) -> Vec<usize> {
        let m = self.domain_half_count() as i64;
        let per_axis = (2 * m + 1) as usize;
        let total = per_axis.pow(self.d as u32);
        (0..total)
            .map(|mut r| {
                let mut idx = vec![0usize; self.d];
                for a in (0..self.d).rev() {
                    idx[a] = self.wrap((r % per_axis) as i64 - m);
                    r /= per_axis;
                }
                self.flatten(&idx)
            })
            .collect()
    }

    /// Same spacing, different `N`.
    pub fn with_n(&self, n: usize) -> Result<Self> {
        Self::new(self.d, n, self.h, self.e0)
    }
}

/// How the covariance is extended to the torus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", content = "cutoff", rename_all = "snake_case")]
pub enum PeriodizationScheme {
    /// Restriction to `[-γ, γ)^d` and periodic repetition.
    Classical,
    /// Periodization of `ρ φ_κ` for a smooth radial cutoff.
    Smooth(CutoffSpec),
}

/// Which smooth cutoff to use when the radii are derived from the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmoothKind {
    #[serde(rename = "bspline")]
    BSpline,
    #[serde(rename = "expsmooth")]
    ExpSmooth,
}

impl PeriodizationScheme {
    /// Radius of the ball containing the difference cube `[-2e0, 2e0]^d`.
    pub fn difference_radius(d: usize, e0: f64) -> f64 {
        2.0 * e0 * (d as f64).sqrt()
    }

    /// Smooth scheme with the widest admissible cutoff on `grid`:
    /// `κ = 2γ - 2e0√d`, inner radius `2e0√d` (`κ/2` for the B-spline kind).
    pub fn smooth_for_grid(grid: &TorusGrid, kind: SmoothKind, p: u32) -> Result<Self> {
        let r = Self::difference_radius(grid.dim(), grid.e0());
        let kappa = 2.0 * grid.gamma() - r;
        let cutoff = match kind {
            SmoothKind::BSpline => CutoffSpec::bspline(kappa, p)?,
            SmoothKind::ExpSmooth => CutoffSpec::exp_smooth(kappa, r)?,
        };
        let scheme = PeriodizationScheme::Smooth(cutoff);
        scheme.validate(grid)?;
        Ok(scheme)
    }

    /// Smallest `γ` for which [`smooth_for_grid`](Self::smooth_for_grid) is admissible.
    pub fn min_smooth_gamma(kind: SmoothKind, d: usize, e0: f64) -> f64 {
        let r = Self::difference_radius(d, e0);
        match kind {
            // κ/2 ≥ r and γ ≥ (κ + r)/2
            SmoothKind::BSpline => 1.5 * r,
            // κ > r, strictly
            SmoothKind::ExpSmooth => r,
        }
    }

    /// Default B-spline smoothness `p = ⌈ν + d/2⌉`.
    pub fn default_p(nu: f64, d: usize) -> u32 {
        (nu + 0.5 * d as f64).ceil().max(1.0) as u32
    }

    /// Checks that `ρ^ext = ρ` on the difference cube of the sampling box.
    pub fn validate(&self, grid: &TorusGrid) -> Result<()> {
        let PeriodizationScheme::Smooth(cutoff) = self else {
            return Ok(());
        };
        cutoff.validate()?;
        if !cutoff.is_smooth() {
            return Err(Error::InvalidParameter(
                "smooth periodization needs a smooth cutoff".into(),
            ));
        }
        let r = Self::difference_radius(grid.dim(), grid.e0());
        let tol = SNAP * r.max(grid.gamma());
        if cutoff.inner_radius() < r - tol {
            return Err(Error::InvalidParameter(format!(
                "cutoff inner radius {} is below the difference-cube radius {r}",
                cutoff.inner_radius()
            )));
        }
        if grid.gamma() < 0.5 * (cutoff.kappa() + r) - tol {
            return Err(Error::InvalidParameter(format!(
                "gamma = {} is below (kappa + {r}) / 2 = {}",
                grid.gamma(),
                0.5 * (cutoff.kappa() + r)
            )));
        }
        Ok(())
    }

    pub fn cutoff(&self) -> Option<&CutoffSpec> {
        match self {
            PeriodizationScheme::Classical => None,
            PeriodizationScheme::Smooth(c) => Some(c),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PeriodizationScheme::Classical => "classical",
            PeriodizationScheme::Smooth(CutoffSpec::BSpline { .. }) => "bspline",
            PeriodizationScheme::Smooth(CutoffSpec::ExpSmooth { .. }) => "expsmooth",
            PeriodizationScheme::Smooth(CutoffSpec::Classical { .. }) => "invalid",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_basics() {
        let g = TorusGrid::new(1, 8, 0.25, 0.5).unwrap();
        assert_eq!(g.gamma(), 1.0);
        assert_eq!(g.signed(3), 3);
        assert_eq!(g.signed(4), -4);
        assert_eq!(g.wrap(-1), 7);
        assert_eq!(g.domain_half_count(), 2);
        assert_eq!(g.domain_index(), vec![6, 7, 0, 1, 2]);
        assert!(TorusGrid::new(1, 7, 0.25, 0.5).is_err());
        assert!(TorusGrid::new(1, 6, 0.25, 0.5).is_err());
        assert!(TorusGrid::new(4, 8, 0.25, 0.5).is_err());
        let g2 = TorusGrid::from_gamma(2, 1.1, 0.1, 0.5).unwrap();
        assert_eq!(g2.n(), 22);
        let g3 = TorusGrid::from_gamma(1, 1.05, 0.1, 0.5).unwrap();
        assert_eq!(g3.n(), 22);
    }

    #[test]
    fn domain_index_2d() {
        let g = TorusGrid::new(2, 8, 0.25, 0.25).unwrap();
        let idx = g.domain_index();
        assert_eq!(idx.len(), 9);
        assert_eq!(g.point(idx[0]), vec![-1, -1]);
        assert_eq!(g.point(idx[4]), vec![0, 0]);
        assert_eq!(g.point(idx[5]), vec![0, 1]);
    }

    #[test]
    fn scheme_validation() {
        let g = TorusGrid::new(1, 16, 0.125, 0.5).unwrap();
        assert_eq!(g.gamma(), 1.0);
        // expsmooth at γ = 1 leaves κ = r0 = 1: not admissible
        assert!(PeriodizationScheme::smooth_for_grid(&g, SmoothKind::ExpSmooth, 0).is_err());
        let g = g.with_n(18).unwrap();
        let s = PeriodizationScheme::smooth_for_grid(&g, SmoothKind::ExpSmooth, 0).unwrap();
        assert_eq!(s.cutoff().unwrap().kappa(), 2.0 * 1.125 - 1.0);
        assert!(PeriodizationScheme::smooth_for_grid(&g, SmoothKind::BSpline, 2).is_err());
        let g = g.with_n(24).unwrap();
        assert!(PeriodizationScheme::smooth_for_grid(&g, SmoothKind::BSpline, 2).is_ok());
        let too_wide = PeriodizationScheme::Smooth(CutoffSpec::exp_smooth(2.2, 1.0).unwrap());
        assert!(too_wide.validate(&g).is_err());
        assert_eq!(PeriodizationScheme::default_p(1.0, 2), 2);
        assert_eq!(PeriodizationScheme::default_p(0.01, 1), 1);
    }
}
