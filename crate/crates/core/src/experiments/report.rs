//! Eigenvalue decay reports.

use serde::{Deserialize, Serialize};

use super::min_gamma::{min_gamma, MinGammaOptions, SchemeChoice};
use super::table::{fmt_f64, Table};
use crate::covariance::CovarianceModel;
use crate::torus::{
    decay_fit, default_window, sorted_scaled_eigenvalues, DecayFit, PeriodizationScheme,
    SpectralFactor, TorusGrid,
};
use crate::{Error, Result};

pub const DECAY_COLUMNS: &[&str] = &["j", "lambda_j", "fit"];

pub const TREND_COLUMNS: &[&str] = &[
    "h",
    "n_star",
    "gamma_star",
    "log_term",
    "exponent",
    "prefactor",
    "prefactor_over_log_term",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub d: usize,
    pub lambda: f64,
    pub nu: f64,
    pub n: usize,
    pub gamma: f64,
    pub h: f64,
    pub scheme: PeriodizationScheme,
    pub fit: DecayFit,
    /// `-(1 + 2ν/d)`.
    pub expected_exponent: f64,
    /// Sorted `N^{-d} Λ^ext_j`.
    #[serde(skip)]
    pub eigenvalues: Vec<f64>,
}

impl DecayReport {
    /// `j`, `λ_j` and, inside the window, the fitted `C j^a`.
    pub fn eigenvalue_table(&self) -> Table {
        let mut t = Table::new(DECAY_COLUMNS);
        t.set_meta("exponent", fmt_f64(self.fit.exponent));
        t.set_meta("window", format!("{}..{}", self.fit.window.0, self.fit.window.1));
        let (lo, hi) = self.fit.window;
        for (i, &v) in self.eigenvalues.iter().enumerate() {
            let j = i + 1;
            let fit = if (lo..=hi).contains(&j) {
                fmt_f64((self.fit.intercept + self.fit.exponent * (j as f64).ln()).exp())
            } else {
                String::new()
            };
            t.rows.push(vec![j.to_string(), fmt_f64(v), fit]);
        }
        t
    }
}

/// Factorizes and fits the decay of the sorted scaled eigenvalues.
pub fn eig_decay_report(
    model: &CovarianceModel,
    grid: &TorusGrid,
    scheme: &PeriodizationScheme,
    window: Option<(usize, usize)>,
) -> Result<DecayReport> {
    let factor = SpectralFactor::factorize(model, grid, scheme)?;
    decay_report_of(&factor, window)
}

pub fn decay_report_of(factor: &SpectralFactor, window: Option<(usize, usize)>) -> Result<DecayReport> {
    let fit = decay_fit(factor, window)?;
    let (d, nu) = (factor.grid.dim(), factor.model.nu());
    Ok(DecayReport {
        d,
        lambda: factor.model.lambda(),
        nu,
        n: factor.grid.n(),
        gamma: factor.grid.gamma(),
        h: factor.grid.h(),
        scheme: factor.scheme,
        fit,
        expected_exponent: -(1.0 + 2.0 * nu / d as f64),
        eigenvalues: sorted_scaled_eigenvalues(factor),
    })
}

/// For each `h`, the classical embedding at its minimal size: fitted
/// exponent and prefactor `max_j λ_j j^{1+2ν/d}` over the default window,
/// set against `(ln(λ/h))^ν`. The metadata line `trend_slope` is the slope
/// of `ln prefactor` against `ln((ln(λ/h))^ν)`.
pub fn classical_prefactor_trend(
    model: &CovarianceModel,
    e0: f64,
    h_list: &[f64],
    opts: &MinGammaOptions,
) -> Result<Table> {
    if h_list.len() < 2 {
        return Err(Error::InvalidParameter("the trend needs at least two values of h".into()));
    }
    let (d, nu, lambda) = (model.dim(), model.nu(), model.lambda());
    let rate = 1.0 + 2.0 * nu / d as f64;
    let mut t = Table::new(TREND_COLUMNS);
    let mut pts = Vec::new();
    for &h in h_list {
        if !(lambda / h > 1.0) {
            return Err(Error::InvalidParameter(format!("need h < lambda, got h = {h}")));
        }
        let r = min_gamma(model, h, e0, SchemeChoice::Classical, opts)?;
        let grid = TorusGrid::new(d, r.n_star, h, e0)?;
        let factor = SpectralFactor::factorize(model, &grid, &PeriodizationScheme::Classical)?;
        let fit = decay_fit(&factor, None)?;
        let sorted = sorted_scaled_eigenvalues(&factor);
        let (lo, hi) = default_window(sorted.len());
        let prefactor = (lo..=hi)
            .map(|j| sorted[j - 1] * (j as f64).powf(rate))
            .fold(0.0, f64::max);
        let log_term = (lambda / h).ln().powf(nu);
        pts.push((log_term.ln(), prefactor.ln()));
        t.rows.push(vec![
            fmt_f64(h),
            r.n_star.to_string(),
            fmt_f64(r.gamma_star),
            fmt_f64(log_term),
            fmt_f64(fit.exponent),
            fmt_f64(prefactor),
            fmt_f64(prefactor / log_term),
        ]);
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { f64::NAN };
    t.set_meta("lambda", fmt_f64(lambda));
    t.set_meta("nu", fmt_f64(nu));
    t.set_meta("d", d.to_string());
    t.set_meta("trend_slope", fmt_f64(slope));
    Ok(t)
}
