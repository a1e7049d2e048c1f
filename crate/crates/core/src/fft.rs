//! Multidimensional FFT helpers on row-major cubes (last axis contiguous).

use num_complex::Complex64;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner, FftPlannerScalar};

/// Reusable in-place unnormalized `d`-dimensional DFT of an `n^d` array.
/// Forward uses `e^{-2πi jk/n}`, inverse `e^{+2πi jk/n}`.
///
/// Plans come from the scalar planner so results do not depend on which SIMD
/// instruction sets the host offers.
pub(crate) struct NdFft {
    fft: Arc<dyn Fft<f64>>,
    n: usize,
    d: usize,
    scratch: Vec<Complex64>,
    line: Vec<Complex64>,
}

impl NdFft {
    pub(crate) fn new(n: usize, d: usize, inverse: bool) -> Self {
        let mut planner = FftPlannerScalar::new();
        let fft = if inverse {
            planner.plan_fft_inverse(n)
        } else {
            planner.plan_fft_forward(n)
        };
        let scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        NdFft {
            fft,
            n,
            d,
            scratch,
            line: vec![Complex64::default(); n],
        }
    }

    pub(crate) fn process(&mut self, data: &mut [Complex64]) {
        let (n, d) = (self.n, self.d);
        debug_assert_eq!(data.len(), n.pow(d as u32));
        // last axis: lines are contiguous
        self.fft.process_with_scratch(data, &mut self.scratch);
        for axis in 0..d.saturating_sub(1) {
            let stride = n.pow((d - 1 - axis) as u32);
            let block = stride * n;
            for start in (0..data.len()).step_by(block) {
                for offset in 0..stride {
                    let base = start + offset;
                    for (j, v) in self.line.iter_mut().enumerate() {
                        *v = data[base + j * stride];
                    }
                    self.fft.process_with_scratch(&mut self.line, &mut self.scratch);
                    for (j, v) in self.line.iter().enumerate() {
                        data[base + j * stride] = *v;
                    }
                }
            }
        }
    }
}

pub(crate) fn fft_nd(data: &mut [Complex64], n: usize, d: usize, inverse: bool) {
    NdFft::new(n, d, inverse).process(data);
}

/// DFT of an array that is even in every axis, given only its nonnegative
/// quadrant: `q` holds `(n/2 + 1)^d` values at indices `0..=n/2` per axis.
/// The spectrum is real and even, so it is returned the same way, in place.
///
/// Each axis pass packs two real lines into one complex transform of the
/// even extension; both spectra are real, so they separate as the real and
/// imaginary parts.
pub(crate) fn even_dft_quadrant(q: &mut [f64], n: usize, d: usize) {
    let half = n / 2;
    let len = half + 1;
    debug_assert_eq!(q.len(), len.pow(d as u32));
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    let mut buf = vec![Complex64::default(); n];
    for axis in 0..d {
        let stride = len.pow((d - 1 - axis) as u32);
        let block = stride * len;
        let mut starts = Vec::with_capacity(q.len() / len);
        for start in (0..q.len()).step_by(block) {
            for offset in 0..stride {
                starts.push(start + offset);
            }
        }
        for pair in starts.chunks(2) {
            let a = pair[0];
            let b = pair.get(1).copied();
            for j in 0..len {
                let re = q[a + j * stride];
                let im = b.map_or(0.0, |b| q[b + j * stride]);
                buf[j] = Complex64::new(re, im);
            }
            for j in 1..half {
                buf[n - j] = buf[j];
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for k in 0..len {
                q[a + k * stride] = buf[k].re;
                if let Some(b) = b {
                    q[b + k * stride] = buf[k].im;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(x: &[Complex64], n: usize, d: usize) -> Vec<Complex64> {
        let total = x.len();
        let idx = |mut f: usize| {
            let mut v = vec![0usize; d];
            for a in (0..d).rev() {
                v[a] = f % n;
                f /= n;
            }
            v
        };
        (0..total)
            .map(|k| {
                let kv = idx(k);
                let mut acc = Complex64::default();
                for (j, xv) in x.iter().enumerate() {
                    let jv = idx(j);
                    let phase: usize = kv.iter().zip(&jv).map(|(a, b)| a * b).sum();
                    let ang = -2.0 * std::f64::consts::PI * (phase % n) as f64 / n as f64;
                    acc += xv * Complex64::from_polar(1.0, ang);
                }
                acc
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        for (n, d) in [(8usize, 1usize), (6, 2), (4, 3)] {
            let total = n.pow(d as u32);
            let x: Vec<Complex64> = (0..total)
                .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos()))
                .collect();
            let mut y = x.clone();
            fft_nd(&mut y, n, d, false);
            let want = naive_dft(&x, n, d);
            for (a, b) in y.iter().zip(&want) {
                assert!((a - b).norm() < 1e-12);
            }
            fft_nd(&mut y, n, d, true);
            for (a, b) in y.iter().zip(&x) {
                assert!((a / total as f64 - b).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn quadrant_path_matches_full_transform() {
        for (n, d) in [(8usize, 1usize), (10, 2), (6, 3), (4, 2)] {
            let half = n / 2;
            let len = half + 1;
            let total = n.pow(d as u32);
            let f = |v: &[usize]| -> f64 {
                let s: f64 = v.iter().map(|&i| (i.min(n - i) as f64).powi(2)).sum();
                (-0.3 * s).exp() + 0.1 * v.iter().map(|&i| i.min(n - i) as f64).product::<f64>()
            };
            let mut full = Vec::with_capacity(total);
            for flat in 0..total {
                let mut v = vec![0; d];
                let mut r = flat;
                for a in (0..d).rev() {
                    v[a] = r % n;
                    r /= n;
                }
                full.push(Complex64::new(f(&v), 0.0));
            }
            fft_nd(&mut full, n, d, false);
            let mut q = Vec::with_capacity(len.pow(d as u32));
            for flat in 0..len.pow(d as u32) {
                let mut v = vec![0; d];
                let mut r = flat;
                for a in (0..d).rev() {
                    v[a] = r % len;
                    r /= len;
                }
                q.push(f(&v));
            }
            even_dft_quadrant(&mut q, n, d);
            for flat in 0..len.pow(d as u32) {
                let mut v = vec![0; d];
                let mut r = flat;
                for a in (0..d).rev() {
                    v[a] = r % len;
                    r /= len;
                }
                let full_flat = v.iter().fold(0, |acc, &i| acc * n + i);
                let want = full[full_flat];
                assert!(want.im.abs() < 1e-12);
                assert!((q[flat] - want.re).abs() < 1e-12, "n {n} d {d}");
            }
        }
    }
}
