//! Experiment harness: minimal torus sizes, parameter sweeps, eigenvalue
//! decay reports and plots.

mod min_gamma;
mod report;
mod svg;
mod sweep;
mod table;

pub use min_gamma::{
    min_gamma, verify_bracket, Evaluation, MinGammaOptions, MinGammaResult, SchemeChoice,
};
pub use table::{fmt_f64, Table};
pub use sweep::{
    fig2_sweep, fig3_sweep, run_sweep, JobKey, Outcome, SweepConfig, SweepOutput, SweepRun,
    FIG2_COLUMNS, FIG3_COLUMNS,
};
pub use report::{
    classical_prefactor_trend, decay_report_of, eig_decay_report, DecayReport, DECAY_COLUMNS,
    TREND_COLUMNS,
};
pub use svg::{svg_plot, AxesSpec};
