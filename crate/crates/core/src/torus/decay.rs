//! Power-law fit of the sorted scaled eigenvalues `N^{-d} Λ^ext_j ≈ C j^a`.

use serde::{Deserialize, Serialize};

use super::spectral::SpectralFactor;
use crate::{Error, Result};

/// Points of the logarithmic grid on which the fit is evaluated.
const FIT_POINTS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Slope of `ln λ_j` against `ln j`.
    pub exponent: f64,
    /// `ln C`.
    pub intercept: f64,
    /// Largest absolute residual in `ln λ_j`.
    pub max_residual: f64,
    pub r2: f64,
    /// 1-based index window `[lo, hi]`.
    pub window: (usize, usize),
}

/// `N^{-d} Λ^ext` sorted non-increasing; index `j - 1` holds `λ_j`.
pub fn sorted_scaled_eigenvalues(factor: &SpectralFactor) -> Vec<f64> {
    let vol = (2.0 * factor.grid.gamma()).powi(factor.grid.dim() as i32);
    let mut v: Vec<f64> = factor.eigs.iter().map(|&e| e / vol).collect();
    v.sort_unstable_by(|a, b| b.total_cmp(a));
    v
}

/// `[N^d / 64, N^d / 4]`.
pub fn default_window(total: usize) -> (usize, usize) {
    ((total / 64).max(1), total / 4)
}

/// Least-squares fit of `ln λ_j` against `ln j` over `window` (1-based,
/// inclusive, default [`default_window`]), sampled on a log-spaced index grid.
pub fn decay_fit(factor: &SpectralFactor, window: Option<(usize, usize)>) -> Result<DecayFit> {
    if !factor.is_pd {
        return Err(Error::NotPositiveDefinite {
            min_eig: factor.min_eig,
            max_eig: factor.max_eig,
        });
    }
    let total = factor.eigs.len();
    let (lo, hi) = window.unwrap_or_else(|| default_window(total));
    if lo < 1 || hi > total / 4 || lo >= hi {
        return Err(Error::InvalidParameter(format!(
            "window [{lo}, {hi}] must satisfy 1 <= lo < hi <= N^d/4 = {}",
            total / 4
        )));
    }
    if (hi as f64) < 10.0 * lo as f64 {
        return Err(Error::DegenerateFit(format!(
            "window [{lo}, {hi}] spans less than a decade"
        )));
    }
    let sorted = sorted_scaled_eigenvalues(factor);
    fit_power_law(&sorted, lo, hi)
}

pub(crate) fn fit_power_law(sorted: &[f64], lo: usize, hi: usize) -> Result<DecayFit> {
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut js: Vec<usize> = (0..FIT_POINTS)
        .map(|i| (a + (b - a) * i as f64 / (FIT_POINTS - 1) as f64).exp().round() as usize)
        .map(|j| j.clamp(lo, hi))
        .collect();
    js.dedup();
    let mut xs = Vec::with_capacity(js.len());
    let mut ys = Vec::with_capacity(js.len());
    for &j in &js {
        let v = sorted[j - 1];
        if !(v > 0.0) {
            return Err(Error::DegenerateFit(format!(
                "eigenvalue {j} in the window is not positive ({v})"
            )));
        }
        xs.push((j as f64).ln());
        ys.push(v.ln());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut max_residual: f64 = 0.0;
    let mut ss_res = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        let r = y - (intercept + slope * x);
        max_residual = max_residual.max(r.abs());
        ss_res += r * r;
    }
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(DecayFit {
        exponent: slope,
        intercept,
        max_residual,
        r2,
        window: (lo, hi),
    })
}
