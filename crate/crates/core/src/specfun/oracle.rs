//! Slow reference for `K_ν` by direct quadrature of
//! `K_ν(t) = ∫_0^∞ exp(-t cosh s) cosh(ν s) ds`.
//!
//! The integrand is even and entire in `s`, so the trapezoidal rule on the
//! truncated half-line converges geometrically as the step is halved. All
//! sums run in log space relative to the integrand's peak, which keeps the
//! reference usable where `K_ν` itself over- or underflows.

use crate::{Error, Result};

// Truncate where the integrand drops below exp(-TAIL) times its peak.
const TAIL: f64 = 46.0;
const AGREEMENT: f64 = 1e-14;

fn ln_integrand(nu: f64, t: f64, s: f64) -> f64 {
    // ln cosh(ν s) = ν s + ln(1 + e^{-2ν s}) - ln 2, stable for large ν s
    let ns = nu * s;
    let ln_cosh = ns + (-2.0 * ns).exp().ln_1p() - std::f64::consts::LN_2;
    // cosh s - 1 = 2 sinh²(s/2)
    let sh = (0.5 * s).sinh();
    -t * 2.0 * sh * sh + ln_cosh
}

/// Location of the integrand peak: solves `t sinh s = ν tanh(ν s)` approximately.
fn peak(nu: f64, t: f64) -> f64 {
    if nu <= 0.0 {
        return 0.0;
    }
    let mut s = (nu / t).asinh();
    for _ in 0..50 {
        // Newton on g(s) = t sinh s - ν tanh(ν s)
        let g = t * s.sinh() - nu * (nu * s).tanh();
        let dg = t * s.cosh() - nu * nu / (nu * s).cosh().powi(2);
        if dg <= 0.0 {
            break;
        }
        let step = g / dg;
        s = (s - step).max(0.0);
        if step.abs() < 1e-15 * s.max(1.0) {
            break;
        }
    }
    s
}

/// Returns `ln K_ν(t) + t` computed by quadrature, i.e. the log of the scaled value.
fn ln_scaled_quadrature(nu: f64, t: f64, levels: usize) -> Result<f64> {
    let s_peak = peak(nu, t);
    let ln_peak = ln_integrand(nu, t, s_peak);

    // Upper truncation: walk out until the tail is negligible.
    let mut upper = s_peak.max(1e-3) * 2.0 + 1.0;
    while ln_integrand(nu, t, upper) > ln_peak - TAIL {
        upper *= 1.5;
    }

    // Characteristic width of the peak sets the starting step.
    let width = 1.0 / (t * s_peak.cosh() + nu * nu).sqrt().max(1.0);
    let mut step = (0.5 * width).min(upper / 16.0);

    let eval = |step: f64| -> f64 {
        let n = (upper / step).ceil() as usize;
        let mut acc = 0.5; // s = 0 carries weight 1/2, relative to exp(ln_peak)
        acc *= (ln_integrand(nu, t, 0.0) - ln_peak).exp();
        for i in 1..=n {
            let s = i as f64 * step;
            acc += (ln_integrand(nu, t, s) - ln_peak).exp();
        }
        ln_peak + (acc * step).ln()
    };

    let mut previous = eval(step);
    for _ in 0..levels {
        step *= 0.5;
        let current = eval(step);
        // ln-values: absolute difference is relative difference of the values
        if (current - previous).abs() <= AGREEMENT {
            return Ok(current);
        }
        previous = current;
    }
    let last = eval(step * 0.5);
    Err(Error::NoConvergence {
        levels,
        previous: (previous - t).exp(),
        last: (last - t).exp(),
    })
}

/// `K_ν(t)` by refined trapezoidal quadrature of the integral representation.
///
/// `abs_levels` bounds the number of step halvings; failure to reach
/// successive agreement within that budget is reported with the last two
/// estimates.
pub fn bessel_k_quadrature_oracle(nu: f64, t: f64, abs_levels: usize) -> Result<f64> {
    Ok(ln_bessel_k_quadrature_oracle(nu, t, abs_levels)?.exp())
}

/// `ln K_ν(t)` by the same quadrature.
pub fn ln_bessel_k_quadrature_oracle(nu: f64, t: f64, abs_levels: usize) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("oracle requires t > 0, got {t}")));
    }
    if !(nu >= 0.0) || !nu.is_finite() {
        return Err(Error::Domain(format!("oracle requires nu >= 0, got {nu}")));
    }
    Ok(ln_scaled_quadrature(nu, t, abs_levels)? - t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_order_closed_form() {
        let got = bessel_k_quadrature_oracle(0.5, 1.0, 30).unwrap();
        let expected = std::f64::consts::FRAC_PI_2.sqrt() * (-1.0f64).exp();
        assert!(((got - expected) / expected).abs() < 1e-12);
    }

    #[test]
    fn order_zero_is_positive_and_finite() {
        let v = bessel_k_quadrature_oracle(0.0, 0.5, 30).unwrap();
        assert!(v.is_finite() && v > 0.0);
    }

    #[test]
    fn reports_non_convergence() {
        match bessel_k_quadrature_oracle(0.3, 2.5, 0) {
            Err(Error::NoConvergence { levels: 0, previous, last }) => {
                assert!(previous > 0.0 && last > 0.0);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
        assert!(bessel_k_quadrature_oracle(1.0, -1.0, 10).is_err());
    }
}
