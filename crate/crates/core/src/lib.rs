//! Exact sampling of stationary Gaussian random fields with Matérn covariance
//! on uniform grids.
//!
//! The covariance is periodized on a torus `[-γ, γ)^d` either by plain
//! periodic repetition (classical circulant embedding) or after multiplying
//! by a smooth compactly supported radial cutoff. The resulting nested
//! circulant matrix is diagonalized by the FFT; when its eigenvalues are
//! nonnegative, samples drawn on the torus and restricted to the sampling
//! box `[-e0, e0]^d` are exact in law.
//!
//! Module map:
//!
//! * [`specfun`]: `K_ν`, `ln Γ`, cardinal B-splines.
//! * [`covariance`]: the Matérn kernel and its spectral density.
//! * [`cutoff`]: classical, B-spline and `C^∞` cutoff functions.
//! * [`torus`]: grids, periodization, FFT eigenvalues, diagnostics, size bounds.
//! * [`sampler`]: Gaussian sample generation and statistical checks.
//! * [`experiments`]: minimal torus-size search, sweeps, reports, SVG plots.

pub mod covariance;
pub mod cutoff;
mod error;
pub mod experiments;
pub(crate) mod fft;
pub mod io;
pub mod sampler;
pub mod specfun;
pub mod torus;

pub use error::{Error, Result};

pub use covariance::CovarianceModel;
pub use cutoff::CutoffSpec;
pub use torus::{PeriodizationScheme, SmoothKind, SpectralFactor, TorusGrid};
pub use sampler::{RngStream, SampleBatch};
