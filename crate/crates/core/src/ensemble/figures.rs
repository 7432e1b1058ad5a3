//! Presets that regenerate the data behind each figure at desk scale.

use super::config::{Couplings, ExperimentConfig, Kind, LevelRange, Solver};
use super::run::{run_ensemble, Context};
use crate::error::{Error, Result};
use crate::output::write_run;
use std::path::{Path, PathBuf};

pub const FIGURE_IDS: [u32; 9] = [1, 2, 3, 4, 5, 6, 7, 8, 9];

/// One ensemble run of a figure, written as `<name>*.csv` plus `<name>.meta`.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureRun {
    pub name: String,
    pub config: ExperimentConfig,
}

fn preset(
    kind: Kind,
    rows: usize,
    cols: usize,
    couplings: Couplings,
    realizations: usize,
) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(kind);
    c.rows = rows;
    c.cols = cols;
    c.couplings = couplings;
    c.realizations = realizations;
    c
}

fn scaled_grid() -> Couplings {
    Couplings::Scaled(vec![0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 5.0, 6.0, 8.0])
}

fn occupation_runs(
    fig: u32,
    rows: usize,
    cols: usize,
    js: &[f64],
    ranges: &[(usize, usize)],
    nd: usize,
) -> Vec<FigureRun> {
    ranges
        .iter()
        .map(|&(lo, hi)| {
            let mut c = preset(
                Kind::OccupationProfile,
                rows,
                cols,
                Couplings::Absolute(js.to_vec()),
                nd,
            );
            c.levels = Some(LevelRange { lo, hi });
            let name = if lo == hi {
                format!("fig{fig}_m{lo}")
            } else {
                format!("fig{fig}_m{lo}-{hi}")
            };
            FigureRun { name, config: c }
        })
        .collect()
}

/// Default runs of figure `id` before any override.
pub fn figure_runs(id: u32) -> Result<Vec<FigureRun>> {
    let run = |name: &str, config| FigureRun {
        name: name.into(),
        config,
    };
    let runs = match id {
        1 => vec![
            run("fig1_n9", preset(Kind::EtaScan, 3, 3, scaled_grid(), 1000)),
            run("fig1_n12", preset(Kind::EtaScan, 3, 4, scaled_grid(), 100)),
        ],
        2 => vec![run(
            "fig2",
            preset(
                Kind::PsHistogram,
                3,
                4,
                Couplings::Absolute(vec![0.05, 0.2, 0.4]),
                100,
            ),
        )],
        3 => vec![run(
            "fig3",
            preset(
                Kind::EtaVsEnergy,
                3,
                4,
                Couplings::Absolute(vec![0.05, 0.15, 0.2, 0.4]),
                15,
            ),
        )],
        4 => occupation_runs(4, 3, 4, &[0.03, 0.3], &[(5, 10), (95, 100)], 20),
        5 => occupation_runs(5, 3, 4, &[0.03, 0.3], &[(5, 5), (100, 100)], 1),
        6 => {
            let mut runs = occupation_runs(6, 4, 5, &[0.05, 0.4], &[(5, 5), (100, 100)], 1);
            for r in &mut runs {
                r.config.solver = Solver::Iterative;
            }
            runs
        }
        7 => vec![run(
            "fig7",
            preset(
                Kind::SigmaVsEnergy,
                3,
                4,
                Couplings::Absolute(vec![0.05, 0.15, 0.2, 0.4]),
                2,
            ),
        )],
        8 => vec![run(
            "fig8",
            preset(
                Kind::TemperatureComparison,
                3,
                4,
                Couplings::Absolute(vec![0.3]),
                2,
            ),
        )],
        9 => vec![
            run(
                "fig9_n9",
                preset(Kind::SigmaScan, 3, 3, scaled_grid(), 2000),
            ),
            run(
                "fig9_n12",
                preset(Kind::SigmaScan, 3, 4, scaled_grid(), 200),
            ),
        ],
        _ => {
            return Err(Error::param(
                "figure",
                format!("unknown figure {id}, expected 1-9"),
            ))
        }
    };
    Ok(runs)
}

/// Figure runs with `key=value` overrides applied to every run.
pub fn figure_configs(id: u32, overrides: &[(String, String)]) -> Result<Vec<FigureRun>> {
    let mut runs = figure_runs(id)?;
    for r in &mut runs {
        r.config
            .apply(overrides.iter().map(|(k, v)| (k.as_str(), v.as_str())))?;
        r.config.validate()?;
    }
    Ok(runs)
}

/// Runs every ensemble of figure `id` and writes its tables into `dir`.
///
/// All runs are planned before any is executed, so a size that cannot be
/// handled fails up front with a hint on how to scale down.
pub fn figure_driver(
    id: u32,
    overrides: &[(String, String)],
    dir: &Path,
    force: bool,
) -> Result<Vec<PathBuf>> {
    let runs = figure_configs(id, overrides)?;
    for r in &runs {
        Context::new(&r.config).map_err(|e| downgrade(id, &r.config, e))?;
        let meta = dir.join(format!("{}.meta", r.name));
        if !force && meta.exists() {
            return Err(Error::OutputExists(meta));
        }
    }
    let mut files = Vec::new();
    for r in runs {
        log::info!(
            "figure {id}: running {} ({} realizations)",
            r.name,
            r.config.realizations
        );
        let summary = run_ensemble(&r.config)?;
        if summary.completed == 0 {
            return Err(Error::Config(format!(
                "{}: every realization failed",
                r.name
            )));
        }
        files.extend(write_run(&summary, &r.name, dir, force)?);
    }
    Ok(files)
}

fn downgrade(id: u32, cfg: &ExperimentConfig, err: Error) -> Error {
    match err {
        Error::Capacity { .. } => Error::Config(format!(
            "figure {id} at n={} ({}x{}) is beyond this machine: {err}; \
             rerun with smaller --rows/--cols (desk default for this figure is {})",
            cfg.n_sites(),
            cfg.rows,
            cfg.cols,
            figure_runs(id)
                .ok()
                .and_then(|r| r
                    .first()
                    .map(|r| format!("{}x{}", r.config.rows, r.config.cols)))
                .unwrap_or_default(),
        )),
        e => e,
    }
}
