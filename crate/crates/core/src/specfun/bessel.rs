use std::f64::consts::{FRAC_PI_2, PI};

use super::gamma::recip_gamma_1p;
use crate::{Error, Result};

/// Largest order accepted by [`bessel_k`].
pub const MAX_ORDER: f64 = 60.0;

// Rescaling threshold for the forward recurrence in order.
const RESCALE: f64 = 1e250;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselEvalConfig {
    /// Relative tolerance for series and continued-fraction termination.
    pub rel_tol: f64,
    /// Hard cap on series terms / continued-fraction iterations.
    pub max_iterations: usize,
    /// Argument below which the small-argument series is used.
    pub switchover_t: f64,
    /// Use the finite-sum closed form for half-integer orders.
    pub closed_form_half_integers: bool,
}

impl Default for BesselEvalConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            max_iterations: 4096,
            switchover_t: 2.0,
            closed_form_half_integers: true,
        }
    }
}

impl BesselEvalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "rel_tol must be positive, got {}",
                self.rel_tol
            )));
        }
        if self.max_iterations < 16 {
            return Err(Error::InvalidParameter(format!(
                "max_iterations must be at least 16, got {}",
                self.max_iterations
            )));
        }
        if !(0.5..=4.0).contains(&self.switchover_t) {
            return Err(Error::InvalidParameter(format!(
                "switchover_t must lie in [0.5, 4], got {}",
                self.switchover_t
            )));
        }
        Ok(())
    }

    // Series terms are summed to full double precision regardless of the
    // requested tolerance; rel_tol only loosens termination when coarser.
    fn eps(&self) -> f64 {
        self.rel_tol.min(1e-16)
    }
}

/// `e^t K_ν(t)` as `mantissa * exp(log_scale)`.
#[derive(Debug, Clone, Copy)]
struct ScaledK {
    mantissa: f64,
    log_scale: f64,
}

impl ScaledK {
    fn ln(self) -> f64 {
        self.mantissa.ln() + self.log_scale
    }
}

fn check_args(nu: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) || t.is_infinite() {
        return Err(Error::Domain(format!("K_nu requires t > 0, got {t}")));
    }
    let order = nu.abs();
    if !(order <= MAX_ORDER) {
        return Err(Error::Domain(format!(
            "|nu| must not exceed {MAX_ORDER}, got {nu}"
        )));
    }
    Ok(order)
}

/// Modified Bessel function of the second kind `K_ν(t)`.
///
/// Negative orders are mapped through `K_{-ν} = K_ν`. Returns `0.0` when the
/// result underflows and `+∞` when it overflows (tiny `t` with large `ν`);
/// use [`ln_bessel_k`] in those regimes.
pub fn bessel_k(nu: f64, t: f64, cfg: &BesselEvalConfig) -> Result<f64> {
    let order = check_args(nu, t)?;
    let s = scaled_k(order, t, cfg);
    Ok(s.mantissa * (s.log_scale - t).exp())
}

/// `e^t K_ν(t)`, which stays representable for large `t`.
pub fn bessel_k_scaled(nu: f64, t: f64, cfg: &BesselEvalConfig) -> Result<f64> {
    let order = check_args(nu, t)?;
    let s = scaled_k(order, t, cfg);
    Ok(s.mantissa * s.log_scale.exp())
}

/// `ln K_ν(t)`, finite over the whole supported domain.
pub fn ln_bessel_k(nu: f64, t: f64, cfg: &BesselEvalConfig) -> Result<f64> {
    let order = check_args(nu, t)?;
    Ok(scaled_k(order, t, cfg).ln() - t)
}

fn scaled_k(order: f64, t: f64, cfg: &BesselEvalConfig) -> ScaledK {
    if cfg.closed_form_half_integers && order.fract() == 0.5 {
        if let Some(v) = half_integer_scaled(order, t) {
            return ScaledK {
                mantissa: v,
                log_scale: 0.0,
            };
        }
    }
    general_scaled(order, t, cfg)
}

/// `e^t K_{l-1/2}(t) = sqrt(π/(2t)) Σ_{k<l} (l-1+k)! / (k! (l-1-k)! (2t)^k)`.
///
/// All terms are positive; returns `None` if the sum overflows.
fn half_integer_scaled(order: f64, t: f64) -> Option<f64> {
    let l = (order + 0.5) as usize;
    let mut coeffs = Vec::with_capacity(l);
    let mut a = 1.0f64;
    for k in 0..l {
        coeffs.push(a);
        let kf = k as f64;
        let lf = l as f64;
        a *= (lf + kf) * (lf - 1.0 - kf) / (kf + 1.0);
    }
    let x = 0.5 / t;
    let sum = coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c);
    let v = (FRAC_PI_2 / t).sqrt() * sum;
    v.is_finite().then_some(v)
}

/// Temme's series (small `t`) or Steed's continued fraction (large `t`) for
/// `K_μ`, `K_{μ+1}` with `|μ| ≤ 1/2`, then forward recurrence up to `ν`.
fn general_scaled(order: f64, t: f64, cfg: &BesselEvalConfig) -> ScaledK {
    let nl = (order + 0.5).floor();
    let mu = order - nl;
    let (k_mu, k_mu1) = if t < cfg.switchover_t {
        let (a, b) = temme_series(mu, t, cfg);
        let et = t.exp();
        (a * et, b * et)
    } else {
        steed_cf2(mu, t, cfg)
    };

    let mut log_scale = 0.0;
    let mut lo = k_mu;
    let mut hi = k_mu1;
    let two_over_t = 2.0 / t;
    for i in 1..=(nl as usize) {
        let next = (mu + i as f64) * two_over_t * hi + lo;
        lo = hi;
        hi = next;
        if hi > RESCALE {
            lo /= RESCALE;
            hi /= RESCALE;
            log_scale += RESCALE.ln();
        }
    }
    ScaledK {
        mantissa: lo,
        log_scale,
    }
}

/// Unscaled `(K_μ(t), K_{μ+1}(t))` for `t` up to about 2.
fn temme_series(mu: f64, t: f64, cfg: &BesselEvalConfig) -> (f64, f64) {
    let eps = cfg.eps();
    let half_t = 0.5 * t;
    let pimu = PI * mu;
    let fact = if pimu.abs() < 1e-300 {
        1.0
    } else {
        pimu / pimu.sin()
    };
    let d = -half_t.ln();
    let e = mu * d;
    let fact2 = if e.abs() < 1e-300 { 1.0 } else { e.sinh() / e };

    let gampl = recip_gamma_1p(mu);
    let gammi = recip_gamma_1p(-mu);
    let (gam1, gam2) = temme_gammas(mu);

    let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
    let mut sum = ff;
    let ee = e.exp();
    let mut p = 0.5 * ee / gampl;
    let mut q = 0.5 / (ee * gammi);
    let mut c = 1.0;
    let dd = half_t * half_t;
    let mut sum1 = p;
    let mu2 = mu * mu;
    for i in 1..=cfg.max_iterations {
        let fi = i as f64;
        ff = (fi * ff + p + q) / (fi * fi - mu2);
        c *= dd / fi;
        p /= fi - mu;
        q /= fi + mu;
        let del = c * ff;
        sum += del;
        let del1 = c * (p - fi * ff);
        sum1 += del1;
        if del.abs() < sum.abs() * eps {
            break;
        }
    }
    (sum, sum1 * 2.0 / t)
}

/// `Γ1(μ) = (1/Γ(1-μ) - 1/Γ(1+μ)) / (2μ)` and `Γ2(μ) = (1/Γ(1-μ) + 1/Γ(1+μ)) / 2`.
fn temme_gammas(mu: f64) -> (f64, f64) {
    use super::gamma::RECIP_GAMMA_1P as C;
    let mu2 = mu * mu;
    // odd coefficients: 1/Γ(1+μ) odd part is Σ c_{2j+1} μ^{2j+1}
    let odd = C
        .iter()
        .skip(1)
        .step_by(2)
        .rev()
        .fold(0.0, |acc, &c| acc * mu2 + c);
    let even = C.iter().step_by(2).rev().fold(0.0, |acc, &c| acc * mu2 + c);
    (-odd, even)
}

/// Scaled `(e^t K_μ(t), e^t K_{μ+1}(t))` by Steed's method for the
/// continued fraction of `K_{μ+1}/K_μ`, with Temme's normalization sum.
fn steed_cf2(mu: f64, t: f64, cfg: &BesselEvalConfig) -> (f64, f64) {
    let eps = cfg.eps();
    let mu2 = mu * mu;
    let mut b = 2.0 * (1.0 + t);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25 - mu2;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 1..=cfg.max_iterations {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < eps {
            break;
        }
    }
    let h = a1 * h;
    let k_mu = (FRAC_PI_2 / t).sqrt() / s;
    let k_mu1 = k_mu * (mu + t + 0.5 - h) / t;
    (k_mu, k_mu1)
}
