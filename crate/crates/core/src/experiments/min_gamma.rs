//! Smallest even `N` (hence `γ = N h / 2`) giving a positive semidefinite
//! embedding, by galloping search followed by integer bisection.

use serde::{Deserialize, Serialize};

use crate::covariance::CovarianceModel;
use crate::torus::{
    pd_probe, PdProbe, PeriodizationScheme, SmoothKind, TorusGrid, DEFAULT_PD_TOL,
};
use crate::{Error, Result};

/// Periodization family; the smooth kinds get their radii from the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SchemeChoice {
    Classical,
    /// `p` defaults to `⌈ν + d/2⌉`.
    #[serde(rename = "bspline")]
    BSpline {
        #[serde(default)]
        p: Option<u32>,
    },
    #[serde(rename = "expsmooth")]
    ExpSmooth,
}

impl SchemeChoice {
    pub fn name(&self) -> &'static str {
        match self {
            SchemeChoice::Classical => "classical",
            SchemeChoice::BSpline { .. } => "bspline",
            SchemeChoice::ExpSmooth => "expsmooth",
        }
    }

    /// B-spline `p` for a given model, if applicable.
    pub fn p_for(&self, model: &CovarianceModel) -> Option<u32> {
        match self {
            SchemeChoice::BSpline { p } => {
                Some(p.unwrap_or_else(|| PeriodizationScheme::default_p(model.nu(), model.dim())))
            }
            _ => None,
        }
    }

    /// The concrete scheme on `grid`.
    pub fn scheme_for(&self, model: &CovarianceModel, grid: &TorusGrid) -> Result<PeriodizationScheme> {
        match self {
            SchemeChoice::Classical => Ok(PeriodizationScheme::Classical),
            SchemeChoice::BSpline { .. } => PeriodizationScheme::smooth_for_grid(
                grid,
                SmoothKind::BSpline,
                self.p_for(model).expect("bspline has p"),
            ),
            SchemeChoice::ExpSmooth => PeriodizationScheme::smooth_for_grid(grid, SmoothKind::ExpSmooth, 0),
        }
    }

    /// Smallest even `N` at spacing `h` for which the scheme is admissible.
    pub fn min_feasible_n(&self, model: &CovarianceModel, h: f64, e0: f64) -> Result<usize> {
        let d = model.dim();
        let gamma = match self {
            SchemeChoice::Classical => 2.0 * e0,
            SchemeChoice::BSpline { .. } => PeriodizationScheme::min_smooth_gamma(SmoothKind::BSpline, d, e0),
            SchemeChoice::ExpSmooth => PeriodizationScheme::min_smooth_gamma(SmoothKind::ExpSmooth, d, e0),
        };
        let start = TorusGrid::from_gamma(d, gamma.max(2.0 * e0), h, e0)?;
        let mut n = start.n();
        // the strict inequalities can need one more step
        for _ in 0..4 {
            let grid = start.with_n(n)?;
            if self.scheme_for(model, &grid).is_ok() {
                return Ok(n);
            }
            n += 2;
        }
        Err(Error::InvalidParameter(format!(
            "no admissible {} grid near N = {}",
            self.name(),
            start.n()
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MinGammaOptions {
    /// Lower end of the search; raised to the smallest admissible `N`.
    pub n_min: Option<usize>,
    /// Upper end; the search fails with a no-bracket error past it.
    pub n_max: Option<usize>,
    /// Largest `N^d` the search may evaluate.
    pub cell_cap: u128,
    /// Galloping factor for the upper bracket.
    pub growth: f64,
    /// Even sizes above `N*` re-tested for monotonicity of the predicate.
    pub monotonicity_probes: usize,
    pub pd_tol: f64,
}

impl Default for MinGammaOptions {
    fn default() -> Self {
        MinGammaOptions {
            n_min: None,
            n_max: None,
            cell_cap: 1 << 28,
            growth: 1.25,
            monotonicity_probes: 3,
            pd_tol: DEFAULT_PD_TOL,
        }
    }
}

impl MinGammaOptions {
    pub fn validate(&self) -> Result<()> {
        if let (Some(lo), Some(hi)) = (self.n_min, self.n_max) {
            if lo >= hi {
                return Err(Error::Config(format!("n_min = {lo} must be below n_max = {hi}")));
            }
        }
        if !(self.growth > 1.0) {
            return Err(Error::Config(format!("growth must exceed 1, got {}", self.growth)));
        }
        if !(self.pd_tol >= 0.0) {
            return Err(Error::Config(format!("pd_tol must be >= 0, got {}", self.pd_tol)));
        }
        Ok(())
    }
}

/// One evaluation of the predicate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub n: usize,
    pub margin: f64,
    pub is_pd: bool,
}

impl From<PdProbe> for Evaluation {
    fn from(p: PdProbe) -> Self {
        Evaluation {
            n: p.n,
            margin: p.margin(),
            is_pd: p.is_pd,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinGammaResult {
    pub d: usize,
    pub lambda: f64,
    pub nu: f64,
    pub h: f64,
    pub e0: f64,
    pub scheme: SchemeChoice,
    pub p: Option<u32>,
    pub n_star: usize,
    /// `N* h / 2`.
    pub gamma_star: f64,
    /// Outer cutoff radius at `N*` for the smooth kinds.
    pub kappa_star: Option<f64>,
    /// `(N* / m)^d`, `m` the sampling-box points per axis.
    pub extension_ratio: f64,
    /// `min λ / max λ` at `N*`.
    pub margin_at_star: f64,
    /// Same at `N* - 2`; absent when `N*` is the smallest admissible size.
    pub margin_below: Option<f64>,
    /// Sizes above `N*` where the predicate was false.
    pub non_monotone: Vec<usize>,
    pub evaluations: Vec<Evaluation>,
}

/// Minimal even `N` with a PSD embedding at spacing `h`.
///
/// The upper bracket is found by galloping from the smallest admissible
/// size, then bisection over even `N` assumes the predicate is monotone;
/// sizes just above the result are re-tested and any failures recorded.
pub fn min_gamma(
    model: &CovarianceModel,
    h: f64,
    e0: f64,
    choice: SchemeChoice,
    opts: &MinGammaOptions,
) -> Result<MinGammaResult> {
    opts.validate()?;
    let d = model.dim();
    let feasible = choice.min_feasible_n(model, h, e0)?;
    let n_lo_start = opts.n_min.map_or(feasible, |n| even_up(n).max(feasible));
    let mut evaluations: Vec<Evaluation> = Vec::new();
    let mut eval = |n: usize| -> Result<Evaluation> {
        let cells = (n as u128).pow(d as u32);
        if cells > opts.cell_cap {
            return Err(Error::ResourceLimit {
                cells,
                cap: opts.cell_cap,
            });
        }
        let grid = TorusGrid::new(d, n, h, e0)?;
        let scheme = choice.scheme_for(model, &grid)?;
        let e: Evaluation = pd_probe(model, &grid, &scheme, opts.pd_tol)?.into();
        evaluations.push(e);
        Ok(e)
    };

    let first = eval(n_lo_start)?;
    let (mut lo, mut hi) = if first.is_pd {
        // expand downwards until the predicate fails or the floor is reached
        let mut hi = first;
        let mut lo = None;
        while hi.n > feasible {
            let shrunk = even_up((hi.n as f64 / opts.growth).floor() as usize);
            let e = eval(shrunk.min(hi.n - 2).max(feasible))?;
            if e.is_pd {
                hi = e;
            } else {
                lo = Some(e);
                break;
            }
        }
        (lo, hi)
    } else {
        let mut lo = first;
        loop {
            let mut next = even_up((lo.n as f64 * opts.growth).ceil() as usize).max(lo.n + 2);
            if let Some(cap) = opts.n_max {
                if lo.n >= cap {
                    return Err(Error::NoBracket { n_max: cap });
                }
                next = next.min(even_up(cap));
            }
            let e = eval(next)?;
            if e.is_pd {
                break (Some(lo), e);
            }
            lo = e;
        }
    };
    while let Some(l) = lo {
        if hi.n - l.n <= 2 {
            break;
        }
        let e = eval((l.n + hi.n) / 4 * 2)?;
        if e.is_pd {
            hi = e;
        } else {
            lo = Some(e);
        }
    }
    let (n_star, margin_at_star, margin_below) = (hi.n, hi.margin, lo.map(|l| l.margin));

    let mut non_monotone = Vec::new();
    for i in 1..=opts.monotonicity_probes {
        let n = n_star + 2 * i;
        let e = eval(n)?;
        if !e.is_pd {
            non_monotone.push(n);
        }
    }

    let grid = TorusGrid::new(d, n_star, h, e0)?;
    let kappa_star = choice.scheme_for(model, &grid)?.cutoff().map(|c| c.kappa());
    let m = grid.domain_points_per_axis();
    Ok(MinGammaResult {
        d,
        lambda: model.lambda(),
        nu: model.nu(),
        h,
        e0,
        scheme: choice,
        p: choice.p_for(model),
        n_star,
        gamma_star: grid.gamma(),
        kappa_star,
        extension_ratio: (n_star as f64 / m as f64).powi(d as i32),
        margin_at_star,
        margin_below,
        non_monotone,
        evaluations,
    })
}

/// Recomputes the predicate at `N*` and `N* - 2`; true when the bracket is
/// certified (true at `N*`, false below or `N*` minimal).
pub fn verify_bracket(result: &MinGammaResult, pd_tol: f64) -> Result<bool> {
    let model = CovarianceModel::new(result.lambda, result.nu, result.d)?;
    let probe = |n: usize| -> Result<bool> {
        let grid = TorusGrid::new(result.d, n, result.h, result.e0)?;
        let scheme = result.scheme.scheme_for(&model, &grid)?;
        Ok(pd_probe(&model, &grid, &scheme, pd_tol)?.is_pd)
    };
    if !probe(result.n_star)? {
        return Ok(false);
    }
    match result.margin_below {
        Some(_) => Ok(!probe(result.n_star - 2)?),
        None => Ok(result.n_star == result.scheme.min_feasible_n(&model, result.h, result.e0)?),
    }
}

fn even_up(n: usize) -> usize {
    n + n % 2
}
