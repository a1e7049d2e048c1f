use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use matern_torus::experiments::{
    classical_prefactor_trend, decay_report_of, fig2_sweep, fig3_sweep, min_gamma, svg_plot,
    AxesSpec, MinGammaOptions, SchemeChoice, SweepConfig, Table,
};
use matern_torus::io::{self, TgrfHeader};
use matern_torus::sampler::{draw, validation_report};
use matern_torus::torus::DEFAULT_PD_TOL;
use matern_torus::{
    CovarianceModel, CutoffSpec, PeriodizationScheme, RngStream, SpectralFactor,
    TorusGrid,
};
use serde_json::json;

#[derive(Parser)]
#[command(name = "matern-torus", version, about = "Matérn random fields by periodic embedding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build and store the spectral factor of an embedding.
    Factorize {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw realizations on the sampling box from a stored factor.
    Sample {
        #[arg(long)]
        factor: PathBuf,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        stream: u64,
        #[arg(long)]
        out: PathBuf,
        /// Write one CSV row per realization instead of TGRF.
        #[arg(long)]
        csv: bool,
    },
    /// Smallest torus giving a positive semidefinite embedding (JSON).
    MinGamma {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_parser = parse_num)]
        h: f64,
        #[arg(long, value_enum)]
        scheme: SchemeKind,
        /// B-spline smoothness; defaults to ceil(nu + d/2).
        #[arg(long)]
        p: Option<u32>,
        #[arg(long, default_value_t = 0.5, value_parser = parse_num)]
        e0: f64,
        #[arg(long)]
        nmin: Option<usize>,
        /// Give up when the upper bracket would pass this N.
        #[arg(long)]
        nmax_cap: Option<usize>,
        /// Largest N^d evaluated.
        #[arg(long)]
        cell_cap: Option<u128>,
        #[arg(long, default_value_t = DEFAULT_PD_TOL)]
        pd_tol: f64,
    },
    /// Extension ratio sweep over h.
    Fig2(SweepArgs),
    /// Minimal gamma sweep over nu for both smooth cutoffs.
    Fig3(SweepArgs),
    /// Print a built-in sweep configuration.
    Preset {
        #[arg(value_parser = ["fig2", "fig3"])]
        which: String,
        /// Include d = 3 at h = 2^-5 in fig2.
        #[arg(long)]
        full_d3: bool,
    },
    /// Sorted scaled eigenvalues (CSV) and their power-law fit (JSON).
    EigDecay {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        scheme: SchemeArgs,
        /// 1-based index window `a,b`.
        #[arg(long, value_parser = parse_window)]
        window: Option<(usize, usize)>,
        #[arg(long)]
        out: PathBuf,
        /// Classical only: spacings for the prefactor trend, comma separated.
        #[arg(long, value_delimiter = ',', value_parser = parse_num)]
        trend_h: Vec<f64>,
        #[arg(long)]
        trend_out: Option<PathBuf>,
    },
    /// Statistical checks of a stored factor (JSON).
    Validate {
        #[arg(long)]
        factor: PathBuf,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        stream: u64,
    },
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long)]
    d: usize,
    #[arg(long, value_parser = parse_num)]
    lambda: f64,
    #[arg(long, value_parser = parse_num)]
    nu: f64,
}

impl ModelArgs {
    fn model(&self) -> Result<CovarianceModel> {
        Ok(CovarianceModel::new(self.lambda, self.nu, self.d)?)
    }
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, value_parser = parse_num)]
    h: f64,
    /// Torus half-width; rounded up to the next even N.
    #[arg(long, value_parser = parse_num, required_unless_present = "n", conflicts_with = "n")]
    gamma: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0.5, value_parser = parse_num)]
    e0: f64,
}

impl GridArgs {
    fn grid(&self, d: usize) -> Result<TorusGrid> {
        Ok(match (self.n, self.gamma) {
            (Some(n), _) => TorusGrid::new(d, n, self.h, self.e0)?,
            (None, Some(g)) => TorusGrid::from_gamma(d, g, self.h, self.e0)?,
            (None, None) => bail!("one of --gamma or --n is required"),
        })
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeKind {
    Classical,
    Bspline,
    Expsmooth,
}

#[derive(Args)]
struct SchemeArgs {
    #[arg(long, value_enum)]
    scheme: SchemeKind,
    /// B-spline smoothness; defaults to ceil(nu + d/2).
    #[arg(long)]
    p: Option<u32>,
    /// Outer cutoff radius; defaults to 2 gamma - 2 e0 sqrt(d).
    #[arg(long, value_parser = parse_num)]
    kappa: Option<f64>,
    /// Inner radius of the C-infinity cutoff; defaults to 2 e0 sqrt(d).
    #[arg(long, value_parser = parse_num)]
    r0: Option<f64>,
}

impl SchemeArgs {
    fn scheme(&self, model: &CovarianceModel, grid: &TorusGrid) -> Result<PeriodizationScheme> {
        let r = PeriodizationScheme::difference_radius(grid.dim(), grid.e0());
        let kappa = self.kappa.unwrap_or(2.0 * grid.gamma() - r);
        let scheme = match self.scheme {
            SchemeKind::Classical => {
                if self.kappa.is_some() || self.r0.is_some() || self.p.is_some() {
                    bail!("--p, --kappa and --r0 apply to the smooth schemes only");
                }
                PeriodizationScheme::Classical
            }
            SchemeKind::Bspline => {
                if self.r0.is_some() {
                    bail!("the B-spline cutoff has inner radius kappa/2; --r0 does not apply");
                }
                let p = self.p.unwrap_or_else(|| PeriodizationScheme::default_p(model.nu(), model.dim()));
                PeriodizationScheme::Smooth(CutoffSpec::bspline(kappa, p)?)
            }
            SchemeKind::Expsmooth => {
                if self.p.is_some() {
                    bail!("--p applies to the B-spline cutoff only");
                }
                PeriodizationScheme::Smooth(CutoffSpec::exp_smooth(kappa, self.r0.unwrap_or(r))?)
            }
        };
        scheme.validate(grid)?;
        Ok(scheme)
    }
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// CSV destination; overrides the config, stdout when neither is set.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also plot, one SVG per dimension.
    #[arg(long)]
    svg: bool,
}

/// Accepts plain decimals as well as `2^-8` and `1/800`.
fn parse_num(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let bad = || format!("not a number: {s:?}");
    if let Some((b, e)) = s.split_once('^') {
        let b: f64 = b.trim().parse().map_err(|_| bad())?;
        let e: f64 = e.trim().parse().map_err(|_| bad())?;
        return Ok(b.powf(e));
    }
    if let Some((a, b)) = s.split_once('/') {
        let a: f64 = a.trim().parse().map_err(|_| bad())?;
        let b: f64 = b.trim().parse().map_err(|_| bad())?;
        return Ok(a / b);
    }
    s.parse().map_err(|_| bad())
}

fn parse_window(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected a,b, got {s:?}"))?;
    let a = a.trim().parse().map_err(|_| format!("bad window start {a:?}"))?;
    let b = b.trim().parse().map_err(|_| format!("bad window end {b:?}"))?;
    Ok((a, b))
}

fn print_json(v: &impl serde::Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn factor_summary(f: &SpectralFactor) -> serde_json::Value {
    json!({
        "d": f.grid.dim(),
        "n": f.grid.n(),
        "h": f.grid.h(),
        "gamma": f.grid.gamma(),
        "e0": f.grid.e0(),
        "scheme": f.scheme,
        "model": f.model,
        "min_eig": f.min_eig,
        "max_eig": f.max_eig,
        "pd_margin": f.pd_margin(),
        "is_pd": f.is_pd,
        "pd_tol": f.pd_tol,
        "clamped_mass": f.clamped_mass,
        "digest": io::factor_digest(f),
    })
}

fn run_sweep(args: &SweepArgs, fig3: bool) -> Result<()> {
    let config = SweepConfig::load(&args.config)?;
    let table = if fig3 { fig3_sweep(&config)? } else { fig2_sweep(&config)? };
    let csv_path = args.out.clone().or_else(|| config.output.csv.clone());
    match &csv_path {
        Some(p) => table.save(p)?,
        None => print!("{}", table.to_csv_string()?),
    }
    if args.svg {
        let base = config
            .output
            .svg
            .clone()
            .or_else(|| csv_path.as_ref().map(|p| p.with_extension("svg")))
            .context("--svg needs output.svg in the config or a CSV path")?;
        write_svgs(&table, &base, fig3)?;
    }
    if table.meta("partial") == Some("true") {
        eprintln!("warning: some rows failed; see the status column");
    }
    Ok(())
}

/// One plot per dimension; `base` gets a `_d<k>` suffix when there are several.
fn write_svgs(table: &Table, base: &Path, fig3: bool) -> Result<()> {
    let dims: BTreeSet<usize> = table
        .text("d")?
        .iter()
        .map(|d| d.parse::<usize>())
        .collect::<Result<_, _>>()
        .context("bad d column")?;
    for &d in &dims {
        let spec = if fig3 { AxesSpec::fig3(d) } else { AxesSpec::fig2(d) };
        let path = if dims.len() == 1 {
            base.to_path_buf()
        } else {
            let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("plot");
            base.with_file_name(format!("{stem}_d{d}.svg"))
        };
        match svg_plot(table, &spec) {
            Ok(svg) => std::fs::write(&path, svg).with_context(|| format!("writing {}", path.display()))?,
            Err(e) => eprintln!("warning: no plot for d = {d}: {e}"),
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Factorize {
            model,
            grid,
            scheme,
            out,
        } => {
            let m = model.model()?;
            let g = grid.grid(m.dim())?;
            let s = scheme.scheme(&m, &g)?;
            let f = SpectralFactor::factorize(&m, &g, &s)?;
            io::save_factor(&out, &f)?;
            print_json(&factor_summary(&f))?;
            if !f.is_pd {
                eprintln!("warning: embedding is not positive semidefinite; sampling will refuse it");
            }
        }
        Command::Sample {
            factor,
            count,
            seed,
            stream,
            out,
            csv,
        } => {
            let f = io::load_factor(&factor)?;
            let batch = draw(&f, &mut RngStream::new(seed, stream), count)?;
            if csv {
                io::save_batch_csv(&out, &batch)?;
            } else {
                io::save_batch(&out, &TgrfHeader::of(&f), &batch)?;
            }
        }
        Command::MinGamma {
            model,
            h,
            scheme,
            p,
            e0,
            nmin,
            nmax_cap,
            cell_cap,
            pd_tol,
        } => {
            let m = model.model()?;
            let choice = match (scheme, p) {
                (SchemeKind::Classical, None) => SchemeChoice::Classical,
                (SchemeKind::Expsmooth, None) => SchemeChoice::ExpSmooth,
                (SchemeKind::Bspline, p) => SchemeChoice::BSpline { p },
                (_, Some(_)) => bail!("--p applies to the B-spline cutoff only"),
            };
            let defaults = MinGammaOptions::default();
            let opts = MinGammaOptions {
                n_min: nmin,
                n_max: nmax_cap,
                cell_cap: cell_cap.unwrap_or(defaults.cell_cap),
                pd_tol,
                ..defaults
            };
            print_json(&min_gamma(&m, h, e0, choice, &opts)?)?;
        }
        Command::Fig2(args) => run_sweep(&args, false)?,
        Command::Fig3(args) => run_sweep(&args, true)?,
        Command::Preset { which, full_d3 } => {
            let c = if which == "fig2" {
                SweepConfig::fig2_preset(full_d3)
            } else {
                SweepConfig::fig3_preset()
            };
            print_json(&c)?;
        }
        Command::EigDecay {
            model,
            grid,
            scheme,
            window,
            out,
            trend_h,
            trend_out,
        } => {
            let m = model.model()?;
            let g = grid.grid(m.dim())?;
            let s = scheme.scheme(&m, &g)?;
            let f = SpectralFactor::factorize(&m, &g, &s)?;
            let report = decay_report_of(&f, window)?;
            let mut w = BufWriter::new(File::create(&out).with_context(|| format!("creating {}", out.display()))?);
            w.write_all(report.eigenvalue_table().to_csv_string()?.as_bytes())?;
            w.flush()?;
            if !trend_h.is_empty() {
                if !matches!(s, PeriodizationScheme::Classical) {
                    bail!("--trend-h applies to the classical scheme");
                }
                let path = trend_out.context("--trend-h needs --trend-out")?;
                classical_prefactor_trend(&m, g.e0(), &trend_h, &MinGammaOptions::default())?.save(&path)?;
            }
            print_json(&report)?;
        }
        Command::Validate {
            factor,
            count,
            seed,
            stream,
        } => {
            let f = io::load_factor(&factor)?;
            print_json(&validation_report(&f, &mut RngStream::new(seed, stream), count)?)?;
        }
    }
    Ok(())
}
