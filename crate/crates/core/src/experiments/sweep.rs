//! Minimal-size sweeps over `(scheme, d, ν, h)` with per-row checkpoints.

use std::collections::HashMap;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::min_gamma::{min_gamma, MinGammaOptions, MinGammaResult, SchemeChoice};
use super::table::{fmt_f64, Table};
use crate::covariance::CovarianceModel;
use crate::{Error, Result};

pub const FIG2_COLUMNS: &[&str] = &[
    "scheme",
    "d",
    "nu",
    "h",
    "n_star",
    "gamma_star",
    "ratio",
    "margin_at_star",
    "margin_below",
    "non_monotone",
    "status",
];

pub const FIG3_COLUMNS: &[&str] = &[
    "kind",
    "d",
    "nu",
    "h",
    "n_star",
    "gamma_star",
    "kappa_star",
    "ref_nu_inv_sqrt",
    "ref_sqrt_nu_log_nu",
    "status",
];

const GAMMA_RESOLUTION: &str = "one grid step: gamma = N h / 2 with N even";

/// One block of the sweep: every scheme, `ν` and `h` at dimension `d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRun {
    pub d: usize,
    pub nu_list: Vec<f64>,
    pub h_list: Vec<f64>,
    pub schemes: Vec<SchemeChoice>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepOutput {
    pub csv: Option<PathBuf>,
    /// JSON lines, one per finished row.
    pub checkpoint: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "half")]
    pub lambda: f64,
    #[serde(default = "half")]
    pub e0: f64,
    pub runs: Vec<SweepRun>,
    /// Bisection bounds, memory cap and PD tolerance.
    #[serde(default)]
    pub search: MinGammaOptions,
    /// Worker threads; the rayon default when absent.
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub output: SweepOutput,
}

fn half() -> f64 {
    0.5
}

impl SweepConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let c: SweepConfig = serde_json::from_str(s)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io_at(path, e))?;
        Self::from_json(&s)
    }

    /// ν = 1, λ = 1/2 with classical and `C^∞` cutoffs:
    /// d = 1 at h = 2^-8..2^-16, d = 2 at 2^-4..2^-8, d = 3 at 2^-3..2^-4
    /// (2^-5 as well with `full_d3`).
    pub fn fig2_preset(full_d3: bool) -> Self {
        let pow2 = |a: i32, b: i32| (a..=b).map(|k| 2f64.powi(-k)).collect::<Vec<_>>();
        let schemes = vec![SchemeChoice::Classical, SchemeChoice::ExpSmooth];
        let run = |d, h_list| SweepRun {
            d,
            nu_list: vec![1.0],
            h_list,
            schemes: schemes.clone(),
        };
        SweepConfig {
            lambda: 0.5,
            e0: 0.5,
            runs: vec![
                run(1, pow2(8, 16)),
                run(2, pow2(4, 8)),
                run(3, pow2(3, if full_d3 { 5 } else { 4 })),
            ],
            search: MinGammaOptions::default(),
            workers: None,
            output: SweepOutput::default(),
        }
    }

    /// ν = 2^-7..2^3 for both smooth cutoffs at h = 1/40000, 1/800, 1/30
    /// in d = 1, 2, 3.
    pub fn fig3_preset() -> Self {
        let nu_list: Vec<f64> = (-7..=3).map(|k| 2f64.powi(k)).collect();
        let runs = [(1, 40000.0), (2, 800.0), (3, 30.0)]
            .into_iter()
            .map(|(d, inv_h)| SweepRun {
                d,
                nu_list: nu_list.clone(),
                h_list: vec![1.0 / inv_h],
                schemes: vec![SchemeChoice::BSpline { p: None }, SchemeChoice::ExpSmooth],
            })
            .collect();
        SweepConfig {
            lambda: 0.5,
            e0: 0.5,
            runs,
            search: MinGammaOptions::default(),
            workers: None,
            output: SweepOutput::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config(format!("lambda must be positive, got {}", self.lambda)));
        }
        if !(self.e0 > 0.0 && self.e0.is_finite()) {
            return Err(Error::Config(format!("e0 must be positive, got {}", self.e0)));
        }
        if self.runs.is_empty() {
            return Err(Error::Config("runs is empty".into()));
        }
        for (i, r) in self.runs.iter().enumerate() {
            if r.nu_list.is_empty() || r.h_list.is_empty() || r.schemes.is_empty() {
                return Err(Error::Config(format!(
                    "run {i}: nu_list, h_list and schemes must be nonempty"
                )));
            }
            for &nu in &r.nu_list {
                CovarianceModel::new(self.lambda, nu, r.d)
                    .map_err(|e| Error::Config(format!("run {i}: {e}")))?;
            }
            if let Some(h) = r.h_list.iter().find(|h| !(**h > 0.0 && h.is_finite())) {
                return Err(Error::Config(format!("run {i}: h must be positive, got {h}")));
            }
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        self.search.validate()
    }

    /// Rows in config order: run, scheme, ν, h.
    pub fn jobs(&self) -> Vec<JobKey> {
        let mut out = Vec::new();
        for r in &self.runs {
            for &scheme in &r.schemes {
                for &nu in &r.nu_list {
                    for &h in &r.h_list {
                        out.push(JobKey {
                            scheme,
                            d: r.d,
                            nu,
                            h,
                            lambda: self.lambda,
                            e0: self.e0,
                            search: self.search,
                        });
                    }
                }
            }
        }
        out
    }
}

/// Everything a row's result depends on; its JSON form keys the checkpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JobKey {
    pub scheme: SchemeChoice,
    pub d: usize,
    pub nu: f64,
    pub h: f64,
    pub lambda: f64,
    pub e0: f64,
    pub search: MinGammaOptions,
}

impl JobKey {
    fn id(&self) -> String {
        serde_json::to_string(self).expect("plain data serializes")
    }

    pub fn run(&self) -> Outcome {
        let result = CovarianceModel::new(self.lambda, self.nu, self.d)
            .and_then(|m| min_gamma(&m, self.h, self.e0, self.scheme, &self.search));
        match result {
            Ok(r) => Outcome::Ok(Box::new(r)),
            Err(e) => Outcome::Error(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Ok(Box<MinGammaResult>),
    Error(String),
}

#[derive(Serialize, Deserialize)]
struct CheckpointLine {
    key: JobKey,
    outcome: Outcome,
}

/// Finished rows recorded in a checkpoint. Unreadable lines (a write cut
/// short) are skipped and the row recomputed.
fn read_checkpoint(path: &Path) -> Result<HashMap<String, Outcome>> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(HashMap::new()),
        Err(e) => return Err(Error::io_at(path, e)),
    };
    Ok(text
        .lines()
        .filter_map(|l| serde_json::from_str::<CheckpointLine>(l).ok())
        .map(|c| (c.key.id(), c.outcome))
        .collect())
}

/// Runs every row not already in the checkpoint on a bounded pool and
/// returns all rows in config order.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<(JobKey, Outcome)>> {
    config.validate()?;
    let jobs = config.jobs();
    let done = match &config.output.checkpoint {
        Some(p) => read_checkpoint(p)?,
        None => HashMap::new(),
    };
    let pending: Vec<&JobKey> = jobs.iter().filter(|j| !done.contains_key(&j.id())).collect();
    let sink = match &config.output.checkpoint {
        Some(p) if !pending.is_empty() => {
            let f = OpenOptions::new()
                .create(true)
                .append(true)
                .open(p)
                .map_err(|e| Error::io_at(p, e))?;
            Some((p.clone(), Mutex::new(f)))
        }
        _ => None,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let fresh: Vec<(String, Outcome)> = pool.install(|| {
        pending
            .par_iter()
            .map(|job| {
                let outcome = job.run();
                if let Some((path, file)) = &sink {
                    let mut line = serde_json::to_string(&CheckpointLine {
                        key: **job,
                        outcome: outcome.clone(),
                    })?;
                    line.push('\n');
                    let mut f = file.lock().expect("checkpoint lock");
                    f.write_all(line.as_bytes())
                        .and_then(|_| f.flush())
                        .map_err(|e| Error::io_at(path, e))?;
                }
                Ok((job.id(), outcome))
            })
            .collect::<Result<_>>()
    })?;
    let mut all = done;
    all.extend(fresh);
    Ok(jobs
        .into_iter()
        .map(|j| {
            let o = all.remove(&j.id()).expect("every row computed");
            (j, o)
        })
        .collect())
}

fn sweep_table(columns: &[&str], config: &SweepConfig) -> Table {
    let mut t = Table::new(columns);
    t.set_meta("lambda", fmt_f64(config.lambda));
    t.set_meta("e0", fmt_f64(config.e0));
    t.set_meta("gamma_resolution", GAMMA_RESOLUTION);
    t
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn scheme_label(s: &SchemeChoice, p: Option<u32>) -> String {
    match (s, p) {
        (SchemeChoice::BSpline { p: Some(_) }, Some(p)) => format!("bspline_p{p}"),
        _ => s.name().to_string(),
    }
}

/// Minimal `γ` and extension ratio `(N*/m)^d` per `(scheme, d, ν, h)`.
/// Failed rows keep their error in `status`; the table is then flagged
/// `partial=true`.
pub fn fig2_sweep(config: &SweepConfig) -> Result<Table> {
    let rows = run_sweep(config)?;
    let mut t = sweep_table(FIG2_COLUMNS, config);
    let mut partial = false;
    for (k, o) in rows {
        let mut row = vec![
            scheme_label(&k.scheme, k.scheme.p_for(&CovarianceModel::new(k.lambda, k.nu, k.d)?)),
            k.d.to_string(),
            fmt_f64(k.nu),
            fmt_f64(k.h),
        ];
        match o {
            Outcome::Ok(r) => row.extend([
                r.n_star.to_string(),
                fmt_f64(r.gamma_star),
                fmt_f64(r.extension_ratio),
                fmt_f64(r.margin_at_star),
                opt(r.margin_below),
                r.non_monotone.len().to_string(),
                "ok".into(),
            ]),
            Outcome::Error(e) => {
                partial = true;
                row.extend(vec![String::new(); 6]);
                row.push(format!("error: {e}"));
            }
        }
        t.push(row)?;
    }
    t.set_meta("partial", partial.to_string());
    Ok(t)
}

/// Minimal `γ` against `ν` for the smooth cutoffs, with the reference
/// asymptotes `ν^{-1/2}` and `ν^{1/2} ln ν`.
pub fn fig3_sweep(config: &SweepConfig) -> Result<Table> {
    config.validate()?;
    for (i, r) in config.runs.iter().enumerate() {
        let has = |f: fn(&SchemeChoice) -> bool| r.schemes.iter().any(f);
        if has(|s| matches!(s, SchemeChoice::Classical)) {
            return Err(Error::Config(format!("run {i}: fig3 compares smooth cutoffs only")));
        }
        if !has(|s| matches!(s, SchemeChoice::BSpline { .. })) || !has(|s| matches!(s, SchemeChoice::ExpSmooth)) {
            return Err(Error::Config(format!(
                "run {i}: fig3 needs both the bspline and expsmooth cutoffs"
            )));
        }
    }
    let rows = run_sweep(config)?;
    let mut t = sweep_table(FIG3_COLUMNS, config);
    let mut partial = false;
    for (k, o) in rows {
        let mut row = vec![
            scheme_label(&k.scheme, k.scheme.p_for(&CovarianceModel::new(k.lambda, k.nu, k.d)?)),
            k.d.to_string(),
            fmt_f64(k.nu),
            fmt_f64(k.h),
        ];
        match &o {
            Outcome::Ok(r) => row.extend([
                r.n_star.to_string(),
                fmt_f64(r.gamma_star),
                opt(r.kappa_star),
            ]),
            Outcome::Error(_) => row.extend(vec![String::new(); 3]),
        }
        row.push(fmt_f64(k.nu.powf(-0.5)));
        row.push(fmt_f64(k.nu.sqrt() * k.nu.ln()));
        row.push(match o {
            Outcome::Ok(_) => "ok".into(),
            Outcome::Error(e) => {
                partial = true;
                format!("error: {e}")
            }
        });
        t.push(row)?;
    }
    t.set_meta("partial", partial.to_string());
    Ok(t)
}
