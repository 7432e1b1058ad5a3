//! CSV tables and `.meta` sidecars for ensemble summaries.
//!
//! Every CSV starts with a header row followed by a `# units: ...` line.
//! Floats carry 12 significant digits; infinities are written `+inf`/`-inf`.

use crate::ensemble::{EnsembleSummary, Kind, PointData};
use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// `%.12g`-style formatting, with `+inf`, `-inf` and `nan` spelled out.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 {
            "+inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{x:.11e}");
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..12).contains(&exp) {
        let mant = trim_fraction(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mant}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (11 - exp).max(0) as usize;
        trim_fraction(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Parses a value written by [`fmt_num`].
pub fn parse_num(s: &str) -> Option<f64> {
    match s {
        "+inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => s.parse().ok(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => fmt_num(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as u64)
    }
}

impl From<u64> for Cell {
    fn from(i: u64) -> Self {
        Cell::Int(i)
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    /// Unit of each column, aligned with `columns`.
    pub units: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(schema: &[(&'static str, &'static str)]) -> Self {
        Self {
            columns: schema.iter().map(|c| c.0).collect(),
            units: schema.iter().map(|c| c.1).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        let units: Vec<String> = self
            .columns
            .iter()
            .zip(&self.units)
            .map(|(c, u)| format!("{c}={u}"))
            .collect();
        let _ = writeln!(s, "# units: {}", units.join(", "));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

pub const ETA_SCAN: [(&str, &str); 5] = [
    ("J_over_delta", "1"),
    ("Jn_over_delta", "1"),
    ("eta", "1"),
    ("stderr", "1"),
    ("n_spacings", "count"),
];

pub const OCCUPATIONS: [(&str, &str); 7] = [
    ("site", "index"),
    ("delta_i", "delta"),
    ("n_i", "1"),
    ("n_i_fd", "1"),
    ("m_range", "levels"),
    ("T_fd", "delta"),
    ("sigma_fd", "1"),
];

pub const TEMPS: [(&str, &str); 5] = [
    ("E_over_B", "1"),
    ("E_prime", "delta"),
    ("T_fd", "delta"),
    ("T_can", "delta"),
    ("T_th", "delta"),
];

const SPECTRUM: [(&str, &str); 7] = [
    ("realization", "index"),
    ("seed", "-"),
    ("J_over_delta", "1"),
    ("m", "level"),
    ("E", "delta"),
    ("E_prime", "delta"),
    ("E_over_B", "1"),
];

const ETA_ENERGY: [(&str, &str); 6] = [
    ("J_over_delta", "1"),
    ("window", "index"),
    ("E_over_B", "1"),
    ("eta", "1"),
    ("stderr", "1"),
    ("n_spacings", "count"),
];

const PS_HIST: [(&str, &str); 6] = [
    ("J_over_delta", "1"),
    ("s", "mean spacing"),
    ("P", "1/mean spacing"),
    ("P_poisson", "1/mean spacing"),
    ("P_wigner", "1/mean spacing"),
    ("eta", "1"),
];

const OCC_STATES: [(&str, &str); 8] = [
    ("realization", "index"),
    ("m", "level"),
    ("E_over_B", "1"),
    ("dE", "delta"),
    ("S_q", "bits"),
    ("T_fd", "delta"),
    ("sigma_fd", "1"),
    ("E", "delta"),
];

const OCC_SUMMARY: [(&str, &str); 10] = [
    ("J_over_delta", "1"),
    ("m_range", "levels"),
    ("T_fd", "delta"),
    ("sigma_fd", "1"),
    ("S_q", "bits"),
    ("S_q_stderr", "bits"),
    ("dE", "delta"),
    ("dE_stderr", "delta"),
    ("sigma_fd_states", "1"),
    ("n_realizations", "count"),
];

const SIGMA_ENERGY: [(&str, &str); 7] = [
    ("J_over_delta", "1"),
    ("E_over_B", "1"),
    ("sigma_fd", "1"),
    ("sigma_fd_stderr", "1"),
    ("sigma_s_over_sqrt2", "1"),
    ("sigma_s_stderr", "1"),
    ("n_states", "count"),
];

const SIGMA_SCAN: [(&str, &str); 7] = [
    ("J_over_delta", "1"),
    ("Jn_over_delta", "1"),
    ("sigma_fd", "1"),
    ("stderr", "1"),
    ("sigma_s_over_sqrt2", "1"),
    ("sigma_s_stderr", "1"),
    ("n_realizations", "count"),
];

const THEORY: [(&str, &str); 12] = [
    ("J_over_delta", "1"),
    ("n", "sites"),
    ("N_B", "states"),
    ("C", "1"),
    ("J_c", "delta"),
    ("Delta_c", "delta"),
    ("Delta_n_scaling", "delta"),
    ("Delta_n_empirical", "delta"),
    ("Delta_n_moments", "delta"),
    ("Gamma_BW", "delta"),
    ("tau_chi", "1/delta"),
    ("n_eff", "1"),
];

/// Short tag for a coupling value in file names, e.g. `J0.3`.
pub fn coupling_tag(j_over_delta: f64) -> String {
    format!("J{}", fmt_num(j_over_delta))
}

/// Tables of a summary, each with the suffix appended to the run name
/// (empty for the main table).
pub fn tables(summary: &EnsembleSummary) -> Vec<(String, Table)> {
    let cfg = &summary.config;
    let n = cfg.n_sites() as f64;
    let jd = |j: f64| j / cfg.delta;
    let mut out = Vec::new();
    match cfg.kind {
        Kind::Spectrum => {
            let mut t = Table::new(&SPECTRUM);
            for p in &summary.points {
                let PointData::Spectrum(runs) = &p.data else {
                    continue;
                };
                for r in runs {
                    for &(m, e) in &r.levels {
                        t.push(vec![
                            r.realization.into(),
                            r.seed.into(),
                            jd(p.coupling).into(),
                            (m + 1).into(),
                            e.into(),
                            crate::model::shifted_energy(e, r.sum_deltas).into(),
                            ((e - r.center) / r.width).into(),
                        ]);
                    }
                }
            }
            out.push((String::new(), t));
        }
        Kind::EtaScan => {
            let mut t = Table::new(&ETA_SCAN);
            for p in &summary.points {
                if let PointData::Eta {
                    eta,
                    stderr,
                    n_spacings,
                    ..
                } = &p.data
                {
                    t.push(vec![
                        jd(p.coupling).into(),
                        (p.coupling * n / cfg.delta).into(),
                        (*eta).into(),
                        (*stderr).into(),
                        (*n_spacings).into(),
                    ]);
                }
            }
            out.push((String::new(), t));
        }
        Kind::EtaVsEnergy => {
            let mut t = Table::new(&ETA_ENERGY);
            for p in &summary.points {
                let PointData::Energy(rows) = &p.data else {
                    continue;
                };
                for r in rows {
                    t.push(vec![
                        jd(p.coupling).into(),
                        r.window.into(),
                        r.e_over_b.into(),
                        r.eta.into(),
                        r.stderr.into(),
                        r.n_spacings.into(),
                    ]);
                }
            }
            out.push((String::new(), t));
        }
        Kind::PsHistogram => {
            let mut t = Table::new(&PS_HIST);
            for p in &summary.points {
                let PointData::Eta {
                    eta,
                    histogram: Some(h),
                    ..
                } = &p.data
                else {
                    continue;
                };
                for i in 0..h.centers.len() {
                    t.push(vec![
                        jd(p.coupling).into(),
                        h.centers[i].into(),
                        h.density[i].into(),
                        h.poisson[i].into(),
                        h.wigner[i].into(),
                        (*eta).into(),
                    ]);
                }
            }
            out.push((String::new(), t));
        }
        Kind::OccupationProfile => {
            let mut summary_table = Table::new(&OCC_SUMMARY);
            for p in &summary.points {
                let PointData::Occupations(o) = &p.data else {
                    continue;
                };
                let range = o.levels.to_string();
                let mut cloud = Table::new(&OCCUPATIONS);
                for c in &o.cloud {
                    cloud.push(vec![
                        c.site.into(),
                        c.delta.into(),
                        c.n.into(),
                        c.n_fd.into(),
                        range.clone().into(),
                        o.fit.t_fd.into(),
                        o.fit.sigma_fd.into(),
                    ]);
                }
                let mut states = Table::new(&OCC_STATES);
                for s in &o.states {
                    let st = &s.state;
                    states.push(vec![
                        s.realization.into(),
                        (st.m + 1).into(),
                        st.e_over_b.into(),
                        st.excitation.into(),
                        st.s_q.into(),
                        st.t_fd.into(),
                        st.sigma_fd.into(),
                        st.energy.into(),
                    ]);
                }
                summary_table.push(vec![
                    jd(p.coupling).into(),
                    range.into(),
                    o.fit.t_fd.into(),
                    o.fit.sigma_fd.into(),
                    o.s_q.mean().into(),
                    o.s_q.stderr().into(),
                    o.excitation.mean().into(),
                    o.excitation.stderr().into(),
                    o.state_sigma_fd.mean().into(),
                    summary.completed.into(),
                ]);
                let tag = coupling_tag(jd(p.coupling));
                out.push((format!("_{tag}"), cloud));
                out.push((format!("_{tag}_states"), states));
            }
            out.insert(0, ("_summary".into(), summary_table));
        }
        Kind::SigmaVsEnergy => {
            let mut t = Table::new(&SIGMA_ENERGY);
            for p in &summary.points {
                let PointData::SigmaEnergy(rows) = &p.data else {
                    continue;
                };
                for r in rows {
                    t.push(vec![
                        jd(p.coupling).into(),
                        r.e_over_b.into(),
                        r.sigma_fd.mean().into(),
                        r.sigma_fd.stderr().into(),
                        (r.sigma_s.mean() / 2f64.sqrt()).into(),
                        (r.sigma_s.stderr() / 2f64.sqrt()).into(),
                        r.sigma_fd.count().into(),
                    ]);
                }
            }
            out.push((String::new(), t));
        }
        Kind::TemperatureComparison => {
            for p in &summary.points {
                let PointData::Temperatures(rows) = &p.data else {
                    continue;
                };
                let mut t = Table::new(&TEMPS);
                for r in rows {
                    t.push(vec![
                        r.e_over_b.into(),
                        r.e_prime.into(),
                        r.t_fd.into(),
                        r.t_can.into(),
                        r.t_th.into(),
                    ]);
                }
                let suffix = if summary.points.len() == 1 {
                    String::new()
                } else {
                    format!("_{}", coupling_tag(jd(p.coupling)))
                };
                out.push((suffix, t));
            }
        }
        Kind::SigmaScan => {
            let mut t = Table::new(&SIGMA_SCAN);
            for p in &summary.points {
                let PointData::Sigma { sigma_fd, sigma_s } = &p.data else {
                    continue;
                };
                t.push(vec![
                    jd(p.coupling).into(),
                    (p.coupling * n / cfg.delta).into(),
                    sigma_fd.mean().into(),
                    sigma_fd.stderr().into(),
                    (sigma_s.mean() / 2f64.sqrt()).into(),
                    (sigma_s.stderr() / 2f64.sqrt()).into(),
                    sigma_fd.count().into(),
                ]);
            }
            out.push((String::new(), t));
        }
        Kind::Theory => {
            let mut t = Table::new(&THEORY);
            for p in &summary.points {
                let PointData::Theory {
                    estimates: e,
                    moment_spacing,
                } = &p.data
                else {
                    continue;
                };
                t.push(vec![
                    jd(p.coupling).into(),
                    e.n.into(),
                    e.n_b.into(),
                    e.c.into(),
                    e.j_c.into(),
                    e.delta_c.into(),
                    e.delta_n_scaling.into(),
                    e.delta_n_empirical.unwrap_or(f64::NAN).into(),
                    moment_spacing.mean().into(),
                    e.gamma_bw.into(),
                    e.tau_chi.into(),
                    e.n_eff.unwrap_or(f64::NAN).into(),
                ]);
            }
            out.push((String::new(), t));
        }
    }
    out
}

/// JSON sidecar: config echo, seeds, counts, wall time and version.
pub fn meta_json(summary: &EnsembleSummary, run: &str, files: &[PathBuf]) -> String {
    let cfg = &summary.config;
    let config: serde_json::Map<String, serde_json::Value> = cfg
        .to_pairs()
        .into_iter()
        .map(|(k, v)| (k.to_string(), serde_json::Value::String(v)))
        .collect();
    let failures: Vec<serde_json::Value> = summary
        .failures
        .iter()
        .map(|f| serde_json::json!({"index": f.index, "seed": f.seed, "error": f.message}))
        .collect();
    let value = serde_json::json!({
        "run": run,
        "kind": cfg.kind.name(),
        "config": config,
        "base_seed": cfg.base_seed,
        "realizations": cfg.realizations,
        "completed": summary.completed,
        "complete": summary.is_complete(),
        "failures": failures,
        "seed_scheme": "base_seed + realization index",
        "wall_seconds": summary.wall_seconds,
        "version": VERSION,
        "files": files
            .iter()
            .map(|p| p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default())
            .collect::<Vec<_>>(),
    });
    let mut s = serde_json::to_string_pretty(&value).expect("json");
    s.push('\n');
    s
}

/// Writes `<run><suffix>.csv` for every table plus `<run>.meta` into `dir`.
/// Nothing is written if any target exists and `force` is off.
pub fn write_run(
    summary: &EnsembleSummary,
    run: &str,
    dir: &Path,
    force: bool,
) -> Result<Vec<PathBuf>> {
    let tables = tables(summary);
    let csv: Vec<(PathBuf, String)> = tables
        .iter()
        .map(|(suffix, t)| (dir.join(format!("{run}{suffix}.csv")), t.to_csv()))
        .collect();
    let meta_path = dir.join(format!("{run}.meta"));
    if !force {
        if let Some(p) = csv
            .iter()
            .map(|c| &c.0)
            .chain([&meta_path])
            .find(|p| p.exists())
        {
            return Err(Error::OutputExists(p.clone()));
        }
    }
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (path, text) in csv {
        std::fs::write(&path, text)?;
        written.push(path);
    }
    std::fs::write(&meta_path, meta_json(summary, run, &written))?;
    written.push(meta_path);
    Ok(written)
}
