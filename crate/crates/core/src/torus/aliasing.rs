//! Numerical check of the trapezoidal-rule aliasing identity
//! `(S_N f)_k = Σ_m f̂_{k + mN}`, with Fourier coefficients
//! `f̂_j = ∫_{[-γ,γ]^d} f(x) e^{-iπ j·x/γ} dx`.
//!
//! The coefficients are approximated by the trapezoidal rule on a grid
//! refined `R` times, whose own aliasing error involves only modes shifted by
//! multiples of `RN`.

use num_complex::Complex64;

use super::periodize::PeriodizedKernel;
use super::{PeriodizationScheme, TorusGrid};
use crate::covariance::CovarianceModel;
use crate::{Error, Result};

pub const DEFAULT_REFINEMENT: usize = 32;
const MIN_REFINEMENT: usize = 8;
const WORK_CAP: u128 = 1 << 32;

/// `|(S_N ρ^ext)_k - Σ_{|m|_∞ ≤ M} ρ̂^ext_{k+mN}|` for the periodized Matérn
/// covariance.
pub fn aliasing_identity_residual(
    model: &CovarianceModel,
    grid: &TorusGrid,
    scheme: &PeriodizationScheme,
    k: &[i64],
    m: usize,
    refinement: usize,
) -> Result<f64> {
    let fine = refined(grid, refinement)?;
    let kernel = PeriodizedKernel::new(*model, fine, *scheme)?;
    check_work(grid, refinement, m)?;
    residual(&kernel.full_array(), grid, &fine, refinement, k, m)
}

/// The same residual for an arbitrary `2γ`-periodic function `f(x)`.
pub fn aliasing_residual_of(
    f: impl Fn(&[f64]) -> f64,
    grid: &TorusGrid,
    k: &[i64],
    m: usize,
    refinement: usize,
) -> Result<f64> {
    let fine = refined(grid, refinement)?;
    check_work(grid, refinement, m)?;
    let values: Vec<f64> = (0..fine.len())
        .map(|flat| {
            let x: Vec<f64> = fine.point(flat).iter().map(|&c| c as f64 * fine.h()).collect();
            f(&x)
        })
        .collect();
    residual(&values, grid, &fine, refinement, k, m)
}

fn refined(grid: &TorusGrid, refinement: usize) -> Result<TorusGrid> {
    if refinement < MIN_REFINEMENT {
        return Err(Error::InvalidParameter(format!(
            "refinement factor must be at least {MIN_REFINEMENT}, got {refinement}"
        )));
    }
    TorusGrid::new(
        grid.dim(),
        grid.n() * refinement,
        grid.h() / refinement as f64,
        grid.e0(),
    )
}

fn check_work(grid: &TorusGrid, refinement: usize, m: usize) -> Result<()> {
    let d = grid.dim() as u32;
    let cells = ((grid.n() * refinement) as u128).pow(d);
    let work = cells * ((2 * m + 1) as u128).pow(d);
    if work > WORK_CAP {
        return Err(Error::ResourceLimit {
            cells: work,
            cap: WORK_CAP,
        });
    }
    Ok(())
}

fn residual(
    fine_values: &[f64],
    grid: &TorusGrid,
    fine: &TorusGrid,
    refinement: usize,
    k: &[i64],
    m: usize,
) -> Result<f64> {
    let d = grid.dim();
    if k.len() != d {
        return Err(Error::InvalidParameter(format!(
            "frequency has {} components, grid dimension is {d}",
            k.len()
        )));
    }
    let coarse_n = grid.n() as i64;
    let fine_n = fine.n() as i64;
    // e^{-2πi j/(N R)}
    let twiddle: Vec<Complex64> = (0..fine_n)
        .map(|j| Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * j as f64 / fine_n as f64))
        .collect();
    let points: Vec<Vec<i64>> = (0..fine.len()).map(|flat| fine.point(flat)).collect();

    // trapezoidal sum of f e^{-iπ j·x/γ} over the points selected by `step`
    let sum = |freq: &[i64], step: i64, weight: f64| -> Complex64 {
        let mut acc = Complex64::default();
        for (p, &v) in points.iter().zip(fine_values) {
            if p.iter().any(|&c| c.rem_euclid(step) != 0) {
                continue;
            }
            let phase: i64 = p.iter().zip(freq).map(|(a, b)| a * b).sum::<i64>();
            acc += twiddle[phase.rem_euclid(fine_n) as usize] * v;
        }
        acc * weight
    };

    let s_n = sum(k, refinement as i64, grid.h().powi(d as i32));
    let fine_weight = fine.h().powi(d as i32);
    let span = 2 * m as i64 + 1;
    let mut alias = Complex64::default();
    for flat in 0..(span as usize).pow(d as u32) {
        let mut r = flat as i64;
        let mut freq = vec![0i64; d];
        for a in (0..d).rev() {
            freq[a] = k[a] + coarse_n * (r % span - m as i64);
            r /= span;
        }
        alias += sum(&freq, 1, fine_weight);
    }
    Ok((s_n - alias).norm())
}
