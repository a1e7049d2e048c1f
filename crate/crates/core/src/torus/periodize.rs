//! The periodized covariance `ρ^ext` sampled on the torus grid.

use rayon::prelude::*;

use super::{PeriodizationScheme, TorusGrid};
use crate::covariance::CovarianceModel;
use crate::cutoff::CutoffSpec;
use crate::{Error, Result};

/// `ρ^ext` for one (model, grid, scheme) triple, evaluated at integer grid
/// coordinates.
#[derive(Debug, Clone, Copy)]
pub struct PeriodizedKernel {
    model: CovarianceModel,
    grid: TorusGrid,
    scheme: PeriodizationScheme,
}

impl PeriodizedKernel {
    pub fn new(model: CovarianceModel, grid: TorusGrid, scheme: PeriodizationScheme) -> Result<Self> {
        if model.dim() != grid.dim() {
            return Err(Error::InvalidParameter(format!(
                "model dimension {} differs from grid dimension {}",
                model.dim(),
                grid.dim()
            )));
        }
        scheme.validate(&grid)?;
        Ok(PeriodizedKernel {
            model,
            grid,
            scheme,
        })
    }

    pub fn model(&self) -> &CovarianceModel {
        &self.model
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn scheme(&self) -> &PeriodizationScheme {
        &self.scheme
    }

    /// `ρ^ext(x_n)` for integer coordinates `n` (any integers; the function is
    /// `N`-periodic in each).
    pub fn at(&self, n: &[i64]) -> f64 {
        let h = self.grid.h();
        let big_n = self.grid.n() as i64;
        match &self.scheme {
            PeriodizationScheme::Classical => {
                let mut r2 = 0.0;
                for &c in n {
                    let w = (c + big_n / 2).rem_euclid(big_n) - big_n / 2;
                    r2 += (w * w) as f64;
                }
                self.model.rho_radial(h * r2.sqrt())
            }
            PeriodizationScheme::Smooth(cutoff) => self.smooth_at(cutoff, n),
        }
    }

    fn smooth_at(&self, cutoff: &CutoffSpec, n: &[i64]) -> f64 {
        let h = self.grid.h();
        let big_n = self.grid.n() as i64;
        let kappa = cutoff.kappa();
        let reach = kappa / h;
        // per-axis shift ranges with |n_j + N m_j| < κ/h
        let d = n.len();
        let mut lo = [0i64; 3];
        let mut hi = [0i64; 3];
        for j in 0..d {
            let c = n[j] as f64;
            lo[j] = ((-reach - c) / big_n as f64).ceil() as i64;
            hi[j] = ((reach - c) / big_n as f64).floor() as i64;
            if lo[j] > hi[j] {
                return 0.0;
            }
        }
        let mut m = lo;
        let mut acc = 0.0;
        loop {
            let mut s2 = 0i128;
            for j in 0..d {
                let y = (n[j] + big_n * m[j]) as i128;
                s2 += y * y;
            }
            let r = h * (s2 as f64).sqrt();
            if r < kappa {
                acc += self.model.rho_radial(r) * cutoff.phi(r);
            }
            // odometer over the shift box
            let mut j = d;
            loop {
                if j == 0 {
                    return acc;
                }
                j -= 1;
                if m[j] < hi[j] {
                    m[j] += 1;
                    break;
                }
                m[j] = lo[j];
            }
        }
    }

    /// Values on the full torus array in FFT order.
    pub fn full_array(&self) -> Vec<f64> {
        let grid = self.grid;
        (0..grid.len())
            .into_par_iter()
            .map(|flat| self.at(&grid.point(flat)))
            .collect()
    }

    /// Values at nonnegative coordinates `0..=N/2` per axis, row-major.
    /// `ρ^ext` is even in each coordinate and symmetric under permutation of
    /// axes, so only sorted index tuples are evaluated.
    pub(crate) fn quadrant_array(&self) -> Vec<f64> {
        let d = self.grid.dim();
        let len = self.grid.n() / 2 + 1;
        let total = len.pow(d as u32);
        let unflat = |mut f: usize| {
            let mut idx = [0usize; 3];
            for a in (0..d).rev() {
                idx[a] = f % len;
                f /= len;
            }
            idx
        };
        let mut q = vec![0.0; total];
        q.par_iter_mut().enumerate().for_each(|(flat, v)| {
            let idx = unflat(flat);
            if idx[..d].windows(2).all(|w| w[0] <= w[1]) {
                let n: Vec<i64> = idx[..d].iter().map(|&i| i as i64).collect();
                *v = self.at(&n);
            }
        });
        if d > 1 {
            for flat in 0..total {
                let mut idx = unflat(flat);
                if !idx[..d].windows(2).all(|w| w[0] <= w[1]) {
                    idx[..d].sort_unstable();
                    let src = idx[..d].iter().fold(0, |acc, &i| acc * len + i);
                    q[flat] = q[src];
                }
            }
        }
        q
    }
}

/// `ρ^ext` on every torus grid point, in FFT order.
pub fn periodized_cov_on_grid(
    model: &CovarianceModel,
    grid: &TorusGrid,
    scheme: &PeriodizationScheme,
) -> Result<Vec<f64>> {
    Ok(PeriodizedKernel::new(*model, *grid, *scheme)?.full_array())
}
