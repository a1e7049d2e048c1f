//! Gaussian samples on the torus from a [`SpectralFactor`], restricted to
//! the sampling box.
//!
//! With `v_k = λ_k / (2γ)^d` and i.i.d. complex normals `ξ_k = z_k + i z'_k`,
//! the field `Z(x_n) = Σ_k √v_k ξ_k e^{i ω_k · x_n}` (an unnormalized inverse
//! FFT) has `Re Z` and `Im Z` independent, each with covariance `ρ^ext`.

mod rng;
mod stats;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fft::NdFft;
use crate::torus::SpectralFactor;
use crate::{io, Error, Result};

pub use rng::RngStream;
pub use stats::{
    empirical_covariance, half_sample_independence_check, ks_critical_value, ks_statistic,
    validation_report, CovEstimate, LagCheck, ValidationReport,
};

/// Realizations restricted to the sampling box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    /// `count` rows of `m^d` values, row-major.
    pub values: Vec<f64>,
    pub count: usize,
    pub d: usize,
    /// Points per axis of the sampling box, `m`.
    pub m: usize,
    /// Torus flat index of each column.
    pub domain_index: Vec<usize>,
    pub seed: u64,
    pub stream: u64,
    /// SHA-256 of the factor's TGRF encoding, hex.
    pub factor_digest: String,
    pub clamped_mass: f64,
}

impl SampleBatch {
    /// Values per realization, `m^d`.
    pub fn width(&self) -> usize {
        self.domain_index.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.width();
        &self.values[i * w..(i + 1) * w]
    }

    /// Column of the box point with signed grid coordinates `c`
    /// (each in `-(m-1)/2 ..= (m-1)/2`).
    pub fn column_of(&self, c: &[i64]) -> Option<usize> {
        if c.len() != self.d {
            return None;
        }
        let half = (self.m / 2) as i64;
        let mut col = 0usize;
        for &v in c {
            if v.abs() > half {
                return None;
            }
            col = col * self.m + (v + half) as usize;
        }
        Some(col)
    }
}

/// Generates torus fields two at a time.
pub(crate) struct TorusSampler<'a> {
    factor: &'a SpectralFactor,
    amplitude: Vec<f64>,
    fft: NdFft,
    buf: Vec<Complex64>,
}

impl<'a> TorusSampler<'a> {
    pub(crate) fn new(factor: &'a SpectralFactor) -> Result<Self> {
        let amplitude = factor
            .sampling_variances()?
            .into_iter()
            .map(f64::sqrt)
            .collect();
        let g = &factor.grid;
        Ok(TorusSampler {
            factor,
            amplitude,
            fft: NdFft::new(g.n(), g.dim(), true),
            buf: vec![Complex64::default(); g.len()],
        })
    }

    /// Fills the buffer with one complex field; real and imaginary parts
    /// are the two realizations. Draws `2 N^d` normals in flat `k` order.
    pub(crate) fn next_pair(&mut self, rng: &mut RngStream) -> &[Complex64] {
        for (z, &a) in self.buf.iter_mut().zip(&self.amplitude) {
            let re = rng.next_normal();
            let im = rng.next_normal();
            *z = Complex64::new(a * re, a * im);
        }
        self.fft.process(&mut self.buf);
        &self.buf
    }

    pub(crate) fn factor(&self) -> &SpectralFactor {
        self.factor
    }
}

/// `count` realizations restricted to the sampling box.
pub fn draw(factor: &SpectralFactor, rng: &mut RngStream, count: usize) -> Result<SampleBatch> {
    let mut sampler = TorusSampler::new(factor)?;
    let domain_index = factor.grid.domain_index();
    let width = domain_index.len();
    let mut values = Vec::with_capacity(count * width);
    let mut produced = 0;
    while produced < count {
        let field = sampler.next_pair(rng);
        values.extend(domain_index.iter().map(|&i| field[i].re));
        produced += 1;
        if produced < count {
            values.extend(domain_index.iter().map(|&i| field[i].im));
            produced += 1;
        }
    }
    Ok(SampleBatch {
        values,
        count,
        d: factor.grid.dim(),
        m: factor.grid.domain_points_per_axis(),
        domain_index,
        seed: rng.seed(),
        stream: rng.stream_id(),
        factor_digest: io::factor_digest(sampler.factor()),
        clamped_mass: factor.clamped_mass,
    })
}

/// `count` full torus realizations (FFT order), consuming the stream exactly
/// as [`draw`] does.
pub fn draw_full(factor: &SpectralFactor, rng: &mut RngStream, count: usize) -> Result<Vec<Vec<f64>>> {
    let mut sampler = TorusSampler::new(factor)?;
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let field = sampler.next_pair(rng);
        out.push(field.iter().map(|z| z.re).collect());
        if out.len() < count {
            out.push(field.iter().map(|z| z.im).collect());
        }
    }
    Ok(out)
}

pub(crate) fn require_rows(count: usize, min: usize) -> Result<()> {
    if count < min {
        return Err(Error::InvalidParameter(format!(
            "need at least {min} realizations, got {count}"
        )));
    }
    Ok(())
}
