//! Truncation functions that define the periodization.
//!
//! * `Classical`: the per-axis indicator of `[-γ, γ)`.
//! * `BSpline`: even, `C^{2p}`, equal to 1 on `[-κ/2, κ/2]`; the flanks are the
//!   integrated order-`P = 2p+1` cardinal B-spline stretched onto `[κ/2, κ]`.
//! * `ExpSmooth`: the `C^∞` ratio `η(a) / (η(a) + η(b))` with `η(x) = e^{-1/x}`,
//!   equal to 1 on `[-r₀, r₀]` and 0 outside `(-κ, κ)`.
//!
//! The smooth kinds lift to `ℝ^d` radially: `φ_κ(x) = φ(|x|)`.

use serde::{Deserialize, Serialize};

use crate::covariance::norm;
use crate::specfun::{cardinal_m_derivative, integrated_bspline, KnotSide};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CutoffSpec {
    Classical { half_width: f64 },
    #[serde(rename = "bspline")]
    BSpline { kappa: f64, p: u32 },
    #[serde(rename = "expsmooth")]
    ExpSmooth { kappa: f64, inner_radius: f64 },
}

impl CutoffSpec {
    pub fn classical(half_width: f64) -> Result<Self> {
        let spec = CutoffSpec::Classical { half_width };
        spec.validate()?;
        Ok(spec)
    }

    pub fn bspline(kappa: f64, p: u32) -> Result<Self> {
        let spec = CutoffSpec::BSpline { kappa, p };
        spec.validate()?;
        Ok(spec)
    }

    pub fn exp_smooth(kappa: f64, inner_radius: f64) -> Result<Self> {
        let spec = CutoffSpec::ExpSmooth {
            kappa,
            inner_radius,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            CutoffSpec::Classical { half_width } => {
                if !(half_width > 0.0) || !half_width.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "classical half-width must be positive, got {half_width}"
                    )));
                }
            }
            CutoffSpec::BSpline { kappa, p } => {
                if !(kappa > 0.0) || !kappa.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "kappa must be positive, got {kappa}"
                    )));
                }
                if p < 1 {
                    return Err(Error::InvalidParameter("B-spline cutoff needs p >= 1".into()));
                }
            }
            CutoffSpec::ExpSmooth {
                kappa,
                inner_radius,
            } => {
                if !(inner_radius > 0.0 && inner_radius < kappa) || !kappa.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "need 0 < inner radius < kappa, got r0 = {inner_radius}, kappa = {kappa}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn is_smooth(&self) -> bool {
        !matches!(self, CutoffSpec::Classical { .. })
    }

    /// Outer radius: `φ(t) = 0` for `|t| ≥ κ`. For the classical kind this is γ.
    pub fn kappa(&self) -> f64 {
        match *self {
            CutoffSpec::Classical { half_width } => half_width,
            CutoffSpec::BSpline { kappa, .. } | CutoffSpec::ExpSmooth { kappa, .. } => kappa,
        }
    }

    /// Radius of the plateau where `φ ≡ 1`.
    pub fn inner_radius(&self) -> f64 {
        match *self {
            CutoffSpec::Classical { half_width } => half_width,
            CutoffSpec::BSpline { kappa, .. } => 0.5 * kappa,
            CutoffSpec::ExpSmooth { inner_radius, .. } => inner_radius,
        }
    }

    /// B-spline order `P = 2p + 1`.
    fn bspline_order(p: u32) -> usize {
        2 * p as usize + 1
    }

    /// Univariate cutoff `φ(t)`.
    pub fn phi(&self, t: f64) -> f64 {
        match *self {
            CutoffSpec::Classical { half_width } => {
                if (-half_width..half_width).contains(&t) {
                    1.0
                } else {
                    0.0
                }
            }
            CutoffSpec::BSpline { kappa, p } => {
                let a = t.abs();
                if a <= 0.5 * kappa {
                    return 1.0;
                }
                if a >= kappa {
                    return 0.0;
                }
                let order = Self::bspline_order(p);
                let stretch = 2.0 * order as f64 / kappa;
                integrated_bspline(order, stretch * (0.5 * kappa - a))
            }
            CutoffSpec::ExpSmooth {
                kappa,
                inner_radius,
            } => {
                let a = t.abs();
                let width = kappa - inner_radius;
                let up = eta((kappa - a) / width);
                let down = eta((a - inner_radius) / width);
                if down == 0.0 {
                    1.0
                } else {
                    up / (up + down)
                }
            }
        }
    }

    /// Radial lift `φ_κ(x) = φ(|x|)`; not defined for the classical kind.
    pub fn phi_radial(&self, x: &[f64]) -> Result<f64> {
        if !self.is_smooth() {
            return Err(Error::InvalidParameter(
                "classical truncation is per-axis, not radial".into(),
            ));
        }
        Ok(self.phi(norm(x)))
    }

    /// `α`-th derivative of the B-spline cutoff at `t`, from the exact B-spline
    /// difference recursion. `side` picks the one-sided limit at knots.
    pub fn bspline_derivative(&self, alpha: usize, t: f64, side: KnotSide) -> Result<f64> {
        let CutoffSpec::BSpline { kappa, p } = *self else {
            return Err(Error::InvalidParameter(
                "derivatives are available for the B-spline cutoff only".into(),
            ));
        };
        if alpha > 2 * p as usize {
            return Err(Error::InvalidParameter(format!(
                "derivative order {alpha} exceeds 2p = {}",
                2 * p
            )));
        }
        if alpha == 0 {
            return Ok(self.phi(t));
        }
        let order = Self::bspline_order(p);
        let stretch = 2.0 * order as f64 / kappa;
        // Work on the left flank t ≤ -κ/2; mirror with the parity of α.
        let (s, sign, side) = if t <= 0.0 {
            (t, 1.0, side)
        } else {
            let mirrored = match side {
                KnotSide::Left => KnotSide::Right,
                KnotSide::Right => KnotSide::Left,
            };
            (-t, if alpha % 2 == 0 { 1.0 } else { -1.0 }, mirrored)
        };
        // φ(s) = I_P(u), u = stretch (s + κ/2), I_P' = N_P, N_P(u) = M_P(u + P)
        let u = stretch * (s + 0.5 * kappa);
        let x = u + order as f64;
        let inner = match side {
            KnotSide::Right => x < order as f64,
            KnotSide::Left => x <= order as f64,
        };
        let val = if inner {
            cardinal_m_derivative(order, alpha - 1, x, side)
        } else {
            0.0
        };
        Ok(sign * stretch.powi(alpha as i32) * val)
    }

    /// `2^α (2P/κ)^α`.
    pub fn bspline_derivative_bound(&self, alpha: usize) -> Result<f64> {
        let CutoffSpec::BSpline { kappa, p } = *self else {
            return Err(Error::InvalidParameter(
                "derivative bound applies to the B-spline cutoff only".into(),
            ));
        };
        let stretch = 2.0 * Self::bspline_order(p) as f64 / kappa;
        Ok((2.0 * stretch).powi(alpha as i32))
    }
}

fn eta(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// Observed `sup |φ^{(α)}|` over a sample and the bound it must respect.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeBound {
    pub max_observed: f64,
    pub bound: f64,
}

impl DerivativeBound {
    pub fn holds(&self) -> bool {
        self.max_observed <= self.bound
    }
}

/// Samples `φ^{(α)}` on `[-κ, κ]` (both one-sided limits at every point) and
/// reports the largest magnitude against `2^α (2P/κ)^α`.
pub fn derivative_bound_check(
    spec: &CutoffSpec,
    alpha: usize,
    sample_count: usize,
) -> Result<DerivativeBound> {
    let bound = spec.bspline_derivative_bound(alpha)?;
    let kappa = spec.kappa();
    let n = sample_count.max(2);
    let mut max_observed: f64 = 0.0;
    for i in 0..n {
        let t = -kappa + 2.0 * kappa * i as f64 / (n - 1) as f64;
        for side in [KnotSide::Left, KnotSide::Right] {
            max_observed = max_observed.max(spec.bspline_derivative(alpha, t, side)?.abs());
        }
    }
    Ok(DerivativeBound {
        max_observed,
        bound,
    })
}
