//! Statistical checks on sample batches.

use serde::{Deserialize, Serialize};

use super::{draw, require_rows, RngStream, SampleBatch, TorusSampler};
use crate::torus::{PeriodizedKernel, SpectralFactor};
use crate::{Error, Result};

/// Probe points used by the real/imaginary independence check.
const HALF_SAMPLE_PROBES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovEstimate {
    pub estimate: f64,
    /// Jackknife standard error; NaN for fewer than three realizations.
    pub std_error: f64,
}

/// Unbiased covariance across realizations of each column pair `(a, b)`,
/// with leave-one-out jackknife standard errors.
pub fn empirical_covariance(batch: &SampleBatch, pairs: &[(usize, usize)]) -> Result<Vec<CovEstimate>> {
    require_rows(batch.count, 2)?;
    let width = batch.width();
    pairs
        .iter()
        .map(|&(a, b)| {
            if a >= width || b >= width {
                return Err(Error::InvalidParameter(format!(
                    "column pair ({a}, {b}) outside a batch of width {width}"
                )));
            }
            let xs: Vec<f64> = (0..batch.count).map(|i| batch.row(i)[a]).collect();
            let ys: Vec<f64> = (0..batch.count).map(|i| batch.row(i)[b]).collect();
            Ok(covariance_with_jackknife(&xs, &ys))
        })
        .collect()
}

fn covariance_with_jackknife(xs: &[f64], ys: &[f64]) -> CovEstimate {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    // centred sums keep the leave-one-out updates well conditioned
    let a: Vec<f64> = xs.iter().map(|x| x - mx).collect();
    let b: Vec<f64> = ys.iter().map(|y| y - my).collect();
    let sab: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
    let estimate = sab / (n - 1.0);
    if xs.len() < 3 {
        return CovEstimate {
            estimate,
            std_error: f64::NAN,
        };
    }
    // Σa = Σb = 0, so dropping i leaves sums -a_i, -b_i
    let loo: Vec<f64> = a
        .iter()
        .zip(&b)
        .map(|(ai, bi)| (sab - ai * bi - ai * bi / (n - 1.0)) / (n - 2.0))
        .collect();
    let mean = loo.iter().sum::<f64>() / n;
    let ss: f64 = loo.iter().map(|c| (c - mean).powi(2)).sum();
    CovEstimate {
        estimate,
        std_error: ((n - 1.0) / n * ss).sqrt(),
    }
}

fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx).powi(2);
        syy += (y - my).powi(2);
    }
    sxy / (sxx * syy).sqrt()
}

/// Largest `|corr(Re Z(x_p), Im Z(x_p))|` over up to 20 probe points of the
/// sampling box, from `count` complex draws.
pub fn half_sample_independence_check(
    factor: &SpectralFactor,
    rng: &mut RngStream,
    count: usize,
) -> Result<f64> {
    require_rows(count, 3)?;
    let domain = factor.grid.domain_index();
    let probes: Vec<usize> = if domain.len() <= HALF_SAMPLE_PROBES {
        domain
    } else {
        (0..HALF_SAMPLE_PROBES)
            .map(|i| domain[i * (domain.len() - 1) / (HALF_SAMPLE_PROBES - 1)])
            .collect()
    };
    let mut sampler = TorusSampler::new(factor)?;
    let mut re = vec![Vec::with_capacity(count); probes.len()];
    let mut im = vec![Vec::with_capacity(count); probes.len()];
    for _ in 0..count {
        let field = sampler.next_pair(rng);
        for (p, &idx) in probes.iter().enumerate() {
            re[p].push(field[idx].re);
            im[p].push(field[idx].im);
        }
    }
    Ok(re
        .iter()
        .zip(&im)
        .map(|(a, b)| correlation(a, b).abs())
        .fold(0.0, f64::max))
}

/// Kolmogorov–Smirnov distance between the empirical distribution of
/// `samples` and the standard normal.
pub fn ks_statistic(samples: &[f64]) -> f64 {
    let mut s = samples.to_vec();
    s.sort_unstable_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = 0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical value `sqrt(-ln(α/2) / 2) / √n`.
pub fn ks_critical_value(n: usize, alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagCheck {
    /// Lag in grid steps along the first axis.
    pub steps: usize,
    pub lag: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub target: f64,
    /// `(estimate - target) / std_error`.
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub count: usize,
    pub seed: u64,
    pub stream: u64,
    pub lags: Vec<LagCheck>,
    pub max_abs_z: f64,
    pub half_sample_max_corr: f64,
    pub half_sample_threshold: f64,
    pub ks_statistics: Vec<f64>,
    pub ks_critical_1pct: f64,
    /// Lags within 3 SE, independence below threshold, KS in at least 2 of 3.
    pub pass: bool,
}

/// Empirical covariance at a few lags along the first axis, the
/// real/imaginary independence check and KS normality at three box points.
pub fn validation_report(
    factor: &SpectralFactor,
    rng: &mut RngStream,
    count: usize,
) -> Result<ValidationReport> {
    require_rows(count, 3)?;
    let (seed, stream) = (rng.seed(), rng.stream_id());
    let batch = draw(factor, rng, count)?;
    let grid = factor.grid;
    let kernel = PeriodizedKernel::new(factor.model, grid, factor.scheme)?;
    let span = batch.m - 1;
    let mut steps = vec![0, 1, 2, 5, 10, span / 4, span / 2, span];
    steps.retain(|&s| s <= span);
    steps.sort_unstable();
    steps.dedup();
    let half = (span / 2) as i64;
    let column = |offset: i64| {
        let mut c = vec![0i64; batch.d];
        c[0] = offset;
        batch.column_of(&c).expect("offset inside the sampling box")
    };
    let pairs: Vec<(usize, usize)> = steps
        .iter()
        .map(|&s| {
            let start = -((s / 2) as i64).min(half);
            (column(start), column(start + s as i64))
        })
        .collect();
    let est = empirical_covariance(&batch, &pairs)?;
    let lags: Vec<LagCheck> = steps
        .iter()
        .zip(&est)
        .map(|(&s, e)| {
            let mut n = vec![0i64; batch.d];
            n[0] = s as i64;
            let target = kernel.at(&n);
            LagCheck {
                steps: s,
                lag: s as f64 * grid.h(),
                estimate: e.estimate,
                std_error: e.std_error,
                target,
                z: (e.estimate - target) / e.std_error,
            }
        })
        .collect();
    let max_abs_z = lags.iter().map(|l| l.z.abs()).fold(0.0, f64::max);

    let probes = [column(0), column(-half), column(half)];
    let ks_statistics: Vec<f64> = probes
        .iter()
        .map(|&c| {
            let v: Vec<f64> = (0..count).map(|i| batch.row(i)[c]).collect();
            ks_statistic(&v)
        })
        .collect();
    let ks_critical_1pct = ks_critical_value(count, 0.01);
    let ks_pass = ks_statistics.iter().filter(|&&s| s < ks_critical_1pct).count();

    let half_sample_max_corr = half_sample_independence_check(factor, rng, count)?;
    let half_sample_threshold = 4.0 / (count as f64).sqrt();
    let pass = max_abs_z <= 3.0 && half_sample_max_corr <= half_sample_threshold && ks_pass >= 2;
    Ok(ValidationReport {
        count,
        seed,
        stream,
        lags,
        max_abs_z,
        half_sample_max_corr,
        half_sample_threshold,
        ks_statistics,
        ks_critical_1pct,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn batch_from(rows: Vec<Vec<f64>>) -> SampleBatch {
        let width = rows[0].len();
        SampleBatch {
            count: rows.len(),
            values: rows.into_iter().flatten().collect(),
            d: 1,
            m: width,
            domain_index: (0..width).collect(),
            seed: 0,
            stream: 0,
            factor_digest: String::new(),
            clamped_mass: 0.0,
        }
    }

    #[test]
    fn identical_rows_have_zero_covariance() {
        let b = batch_from(vec![vec![2.5, 2.5, 2.5]; 10]);
        for e in empirical_covariance(&b, &[(0, 0), (0, 2)]).unwrap() {
            assert_eq!(e.estimate, 0.0);
            assert_eq!(e.std_error, 0.0);
        }
    }

    #[test]
    fn iid_entries_are_uncorrelated() {
        let mut rng = RngStream::new(5, 0);
        let rows: Vec<Vec<f64>> = (0..5000).map(|_| (0..3).map(|_| rng.next_normal()).collect()).collect();
        let b = batch_from(rows);
        let e = empirical_covariance(&b, &[(0, 1), (0, 0)]).unwrap();
        assert!(e[0].estimate.abs() < 3.0 * e[0].std_error);
        assert!((e[1].estimate - 1.0).abs() < 3.0 * e[1].std_error);
    }

    #[test]
    fn jackknife_matches_brute_force() {
        let xs = [0.3, -1.2, 2.0, 0.7, -0.4, 1.1];
        let ys = [1.0, 0.2, -0.5, 0.9, -1.3, 0.4];
        let fast = covariance_with_jackknife(&xs, &ys);
        let n = xs.len();
        let loo: Vec<f64> = (0..n)
            .map(|i| {
                let a: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| xs[j]).collect();
                let b: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| ys[j]).collect();
                covariance_with_jackknife(&a, &b).estimate
            })
            .collect();
        let mean = loo.iter().sum::<f64>() / n as f64;
        let se = ((n - 1) as f64 / n as f64 * loo.iter().map(|c| (c - mean).powi(2)).sum::<f64>()).sqrt();
        assert!((fast.std_error - se).abs() < 1e-14);
    }

    #[test]
    fn ks_detects_shift() {
        let mut rng = RngStream::new(9, 0);
        let z: Vec<f64> = (0..4000).map(|_| rng.next_normal()).collect();
        let crit = ks_critical_value(z.len(), 0.01);
        assert!(ks_statistic(&z) < crit);
        let shifted: Vec<f64> = z.iter().map(|v| v + 0.2).collect();
        assert!(ks_statistic(&shifted) > crit);
        assert!((ks_critical_value(1, 0.01) - 1.6276).abs() < 1e-3);
    }
}
