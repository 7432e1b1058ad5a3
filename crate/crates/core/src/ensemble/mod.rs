//! Disorder ensembles: configuration, per-realization runs, aggregation and
//! the figure presets.

mod config;
mod figures;
mod run;
mod stats;

pub use config::{parse_pairs, Couplings, ExperimentConfig, Kind, LevelRange, Solver};
pub use figures::{figure_configs, figure_driver, figure_runs, FigureRun, FIGURE_IDS};
pub use run::{
    bin_center, bin_of, run_ensemble, run_ensemble_with, run_realization, Accumulator, CloudPoint,
    Context, EnergyPoint, EnsembleSummary, Failure, OccupationSummary, Point, PointData,
    RealizationResult, Record, SigmaBin, SigmaEnergyRow, SpectrumRun, StateRecord, StateRow,
    TempBin, TempRow, AUTO_DENSE_DIM,
};
pub use stats::Stat;
