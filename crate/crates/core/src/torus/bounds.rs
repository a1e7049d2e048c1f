//! Sufficient torus sizes for positive definiteness, up to the unspecified
//! constants `C1`, `C2`, and their calibration against measured minima.

use serde::{Deserialize, Serialize};

use super::PeriodizationScheme;
use crate::covariance::CovarianceModel;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaBound {
    pub gamma: f64,
    /// Whether `ν ≥ 1/2`, `λ ≤ 1` and `h/λ ≤ e^{-1}` hold.
    pub in_regime: bool,
}

fn classical_growth(model: &CovarianceModel, h: f64) -> f64 {
    let s = model.nu().sqrt();
    s * (model.lambda() / h).max(s).ln()
}

fn smooth_growth(nu: f64) -> f64 {
    (nu.sqrt() * (1.0 + nu.ln().abs())).max(1.0 / nu.sqrt())
}

/// `γ = λ (C1 + C2 ν^{1/2} ln max{λ/h, ν^{1/2}})`, at least `2 e0`.
pub fn sufficient_gamma_classical(
    model: &CovarianceModel,
    h: f64,
    c1: f64,
    c2: f64,
    e0: f64,
) -> Result<GammaBound> {
    if !(h > 0.0) || !(e0 > 0.0) {
        return Err(Error::InvalidParameter(format!("need h > 0 and e0 > 0, got {h}, {e0}")));
    }
    let lambda = model.lambda();
    let gamma = (lambda * (c1 + c2 * classical_growth(model, h))).max(2.0 * e0);
    let in_regime = model.nu() >= 0.5 && lambda <= 1.0 && h / lambda <= (-1.0f64).exp();
    Ok(GammaBound { gamma, in_regime })
}

/// `κ = λ (C1 + C2 max{ν^{1/2}(1 + |ln ν|), ν^{-1/2}})`, at least
/// `max(1, 2 e0 √d)`.
pub fn sufficient_kappa_smooth(model: &CovarianceModel, c1: f64, c2: f64, e0: f64) -> f64 {
    let floor = PeriodizationScheme::difference_radius(model.dim(), e0).max(1.0);
    (model.lambda() * (c1 + c2 * smooth_growth(model.nu()))).max(floor)
}

/// Smallest `C1` for which the classical bound with the given `C2` covers
/// every observed `(model, h, γ*)`.
pub fn calibrate_classical_c1(observations: &[(CovarianceModel, f64, f64)], c2: f64) -> Result<f64> {
    if observations.is_empty() {
        return Err(Error::InvalidParameter("no observations to calibrate against".into()));
    }
    Ok(observations
        .iter()
        .map(|(m, h, g)| g / m.lambda() - c2 * classical_growth(m, *h))
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Smallest `C1` for which the smooth bound with the given `C2` covers every
/// observed `(model, κ*)`.
pub fn calibrate_smooth_c1(observations: &[(CovarianceModel, f64)], c2: f64) -> Result<f64> {
    if observations.is_empty() {
        return Err(Error::InvalidParameter("no observations to calibrate against".into()));
    }
    Ok(observations
        .iter()
        .map(|(m, k)| k / m.lambda() - c2 * smooth_growth(m.nu()))
        .fold(f64::NEG_INFINITY, f64::max))
}
