//! Experiment configuration and its flat `key=value` text form.

use crate::eigensolve::DEFAULT_DENSE_CAP;
use crate::error::{Error, Result};
use crate::model::{binomial, MAX_SITES};
use crate::thermo::C_CHAOS;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Spectrum,
    EtaScan,
    EtaVsEnergy,
    PsHistogram,
    OccupationProfile,
    SigmaVsEnergy,
    TemperatureComparison,
    SigmaScan,
    Theory,
}

impl Kind {
    pub const ALL: [Kind; 9] = [
        Kind::Spectrum,
        Kind::EtaScan,
        Kind::EtaVsEnergy,
        Kind::PsHistogram,
        Kind::OccupationProfile,
        Kind::SigmaVsEnergy,
        Kind::TemperatureComparison,
        Kind::SigmaScan,
        Kind::Theory,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Spectrum => "spectrum",
            Kind::EtaScan => "eta_scan",
            Kind::EtaVsEnergy => "eta_vs_energy",
            Kind::PsHistogram => "ps_histogram",
            Kind::OccupationProfile => "occupation_profile",
            Kind::SigmaVsEnergy => "sigma_vs_energy",
            Kind::TemperatureComparison => "temperature_comparison",
            Kind::SigmaScan => "sigma_scan",
            Kind::Theory => "theory",
        }
    }

    /// Name of the matching CLI subcommand.
    pub fn command(self) -> &'static str {
        match self {
            Kind::Spectrum => "spectrum",
            Kind::EtaScan => "eta-scan",
            Kind::EtaVsEnergy => "eta-energy",
            Kind::PsHistogram => "ps-hist",
            Kind::OccupationProfile => "occupations",
            Kind::SigmaVsEnergy => "sigma-energy",
            Kind::TemperatureComparison => "temps",
            Kind::SigmaScan => "sigma-scan",
            Kind::Theory => "theory",
        }
    }

    /// Whether every eigenvalue of the band is needed.
    pub fn needs_full_spectrum(self) -> bool {
        !matches!(
            self,
            Kind::OccupationProfile | Kind::Spectrum | Kind::Theory
        )
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Kind::ALL
            .into_iter()
            .find(|k| k.name() == s || k.command() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment kind `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    /// Dense when the band fits under the dense cap and all states are
    /// wanted, Lanczos for a few edge states of a large band.
    Auto,
    Dense,
    Iterative,
}

impl FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Solver::Auto),
            "dense" => Ok(Solver::Dense),
            "iterative" | "lanczos" => Ok(Solver::Iterative),
            _ => Err(Error::Config(format!("unknown solver `{s}`"))),
        }
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Solver::Auto => "auto",
            Solver::Dense => "dense",
            Solver::Iterative => "iterative",
        })
    }
}

/// Inclusive range of eigenstate numbers, counted from 1 at the bottom of
/// the band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelRange {
    pub lo: usize,
    pub hi: usize,
}

impl LevelRange {
    pub fn new(lo: usize, hi: usize) -> Result<Self> {
        if lo == 0 || hi < lo {
            return Err(Error::param(
                "levels",
                format!("need 1 <= lo <= hi, got {lo}-{hi}"),
            ));
        }
        Ok(Self { lo, hi })
    }

    /// 0-based indices.
    pub fn indices(&self) -> std::ops::Range<usize> {
        self.lo - 1..self.hi
    }

    pub fn len(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl fmt::Display for LevelRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.lo, self.hi)
    }
}

impl FromStr for LevelRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("levels must look like `95-100`, got `{s}`"));
        let (a, b) = match s.split_once('-') {
            Some((a, b)) => (a, b),
            None => (s, s),
        };
        LevelRange::new(
            a.trim().parse().map_err(|_| bad())?,
            b.trim().parse().map_err(|_| bad())?,
        )
    }
}

/// Coupling grid, either in units of `delta` or of `delta / n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Couplings {
    Absolute(Vec<f64>),
    /// Values of `J n / delta`.
    Scaled(Vec<f64>),
}

impl Couplings {
    /// Couplings in energy units for `n` sites.
    pub fn values(&self, n: usize, delta: f64) -> Vec<f64> {
        match self {
            Couplings::Absolute(v) => v.iter().map(|j| j * delta).collect(),
            Couplings::Scaled(v) => v.iter().map(|x| x * delta / n as f64).collect(),
        }
    }

    fn raw(&self) -> &[f64] {
        match self {
            Couplings::Absolute(v) | Couplings::Scaled(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub rows: usize,
    pub cols: usize,
    pub delta: f64,
    pub couplings: Couplings,
    pub realizations: usize,
    pub base_seed: u64,
    /// Half width of the central spacing window as a fraction of the band.
    pub window: f64,
    /// Analyzed eigenstates; `None` means the kind's default.
    pub levels: Option<LevelRange>,
    pub solver: Solver,
    pub dense_cap: usize,
    /// Energy windows for `eta_vs_energy`; `None` picks as many as hold
    /// [`MIN_WINDOW_LEVELS`] levels each, at most 10.
    pub windows: Option<usize>,
    /// Histogram bin width for `ps_histogram`.
    pub bin_width: f64,
    /// Chaos-border constant used by `theory`.
    pub c: f64,
    /// Energy bins for `sigma_vs_energy` and `temperature_comparison`.
    pub energy_bins: usize,
    /// Worker threads; `None` uses all cores.
    pub threads: Option<usize>,
    pub out: PathBuf,
}

/// Levels per energy window below which the automatic window count shrinks.
pub const MIN_WINDOW_LEVELS: usize = 50;

impl ExperimentConfig {
    /// Desk-scale defaults for `kind`.
    pub fn new(kind: Kind) -> Self {
        let (rows, cols) = match kind {
            Kind::EtaScan | Kind::SigmaScan => (3, 3),
            _ => (3, 4),
        };
        let couplings = match kind {
            Kind::EtaScan | Kind::SigmaScan => {
                Couplings::Scaled(vec![0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 5.0, 6.0, 8.0])
            }
            Kind::EtaVsEnergy => Couplings::Absolute(vec![0.05, 0.15, 0.2, 0.4]),
            Kind::PsHistogram => Couplings::Absolute(vec![0.05, 0.2, 0.4]),
            Kind::OccupationProfile => Couplings::Absolute(vec![0.03, 0.3]),
            Kind::SigmaVsEnergy => Couplings::Absolute(vec![0.05, 0.15, 0.2, 0.4]),
            Kind::TemperatureComparison => Couplings::Absolute(vec![0.3]),
            Kind::Spectrum | Kind::Theory => Couplings::Absolute(vec![0.2]),
        };
        let realizations = match kind {
            Kind::EtaScan => 1000,
            Kind::SigmaScan | Kind::PsHistogram => 100,
            Kind::EtaVsEnergy => 15,
            Kind::OccupationProfile => 20,
            Kind::SigmaVsEnergy | Kind::TemperatureComparison => 2,
            Kind::Spectrum | Kind::Theory => 1,
        };
        Self {
            kind,
            rows,
            cols,
            delta: 1.0,
            couplings,
            realizations,
            base_seed: 0,
            window: 0.05,
            levels: None,
            solver: Solver::Auto,
            dense_cap: DEFAULT_DENSE_CAP,
            windows: None,
            bin_width: 0.1,
            c: C_CHAOS,
            energy_bins: 20,
            threads: None,
            out: PathBuf::from("."),
        }
    }

    pub fn n_sites(&self) -> usize {
        self.rows * self.cols
    }

    pub fn band_dim(&self) -> u64 {
        let n = self.n_sites();
        binomial(n, n / 2)
    }

    pub fn coupling_values(&self) -> Vec<f64> {
        self.couplings.values(self.n_sites(), self.delta)
    }

    /// Level range in effect: the configured one, or 5-10 (clipped to the band).
    pub fn level_range(&self) -> LevelRange {
        self.levels.unwrap_or_else(|| {
            let top = self.band_dim().min(10) as usize;
            LevelRange {
                lo: top.saturating_sub(5).max(1),
                hi: top.max(1),
            }
        })
    }

    /// Energy windows in effect for `eta_vs_energy`.
    pub fn energy_window_count(&self) -> usize {
        self.windows.unwrap_or_else(|| {
            let half = (self.band_dim() / 2) as usize;
            (half / MIN_WINDOW_LEVELS).clamp(1, 10)
        })
    }

    pub fn seed(&self, r: usize) -> u64 {
        self.base_seed.wrapping_add(r as u64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows < 2 || self.cols < 2 {
            return Err(Error::DegenerateLattice {
                rows: self.rows,
                cols: self.cols,
            });
        }
        if self.n_sites() > MAX_SITES {
            return Err(Error::param(
                "rows",
                format!("{} sites exceed the limit of {MAX_SITES}", self.n_sites()),
            ));
        }
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::param(
                "delta",
                format!("must be positive, got {}", self.delta),
            ));
        }
        let raw = self.couplings.raw();
        if raw.is_empty() {
            return Err(Error::param("J", "need at least one coupling"));
        }
        if let Some(j) = raw.iter().find(|j| !(j.is_finite() && **j >= 0.0)) {
            return Err(Error::param(
                "J",
                format!("couplings must be finite and >= 0, got {j}"),
            ));
        }
        if self.realizations == 0 {
            return Err(Error::param("realizations", "must be positive"));
        }
        if !(self.window > 0.0 && self.window <= 0.5) {
            return Err(Error::param(
                "window",
                format!("must lie in (0, 0.5], got {}", self.window),
            ));
        }
        if let Some(l) = self.levels {
            LevelRange::new(l.lo, l.hi)?;
            if l.hi as u64 > self.band_dim() {
                return Err(Error::param(
                    "levels",
                    format!("{l} exceeds the band dimension {}", self.band_dim()),
                ));
            }
        }
        if self.dense_cap == 0 {
            return Err(Error::param("dense_cap", "must be positive"));
        }
        if self.windows == Some(0) {
            return Err(Error::param("windows", "must be positive"));
        }
        if !(self.bin_width > 0.0 && self.bin_width.is_finite()) {
            return Err(Error::param("bin_width", "must be positive"));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::param("c", "must be positive"));
        }
        if self.energy_bins == 0 {
            return Err(Error::param("energy_bins", "must be positive"));
        }
        if self.threads == Some(0) {
            return Err(Error::param("threads", "must be positive"));
        }
        Ok(())
    }

    /// Sets one key from its text value. Keys are case-insensitive except
    /// `J`/`Jn`, and `-` may replace `_`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let k = key.trim().replace('-', "_");
        let lower = k.to_ascii_lowercase();
        match lower.as_str() {
            "kind" => self.kind = value.parse()?,
            "rows" => self.rows = parse(&k, value)?,
            "cols" => self.cols = parse(&k, value)?,
            "n" => {
                let n: usize = parse(&k, value)?;
                let (r, c) = crate::model::square_factorization(n).ok_or_else(|| {
                    Error::Config(format!(
                        "{n} sites do not form a lattice with both sides >= 2"
                    ))
                })?;
                self.rows = r;
                self.cols = c;
            }
            "delta" => self.delta = parse(&k, value)?,
            "j" => self.couplings = Couplings::Absolute(parse_list(&k, value)?),
            "jn" => self.couplings = Couplings::Scaled(parse_list(&k, value)?),
            "seed" | "base_seed" => self.base_seed = parse(&k, value)?,
            "realizations" => self.realizations = parse(&k, value)?,
            "window" => self.window = parse(&k, value)?,
            "levels" => self.levels = Some(value.parse()?),
            "solver" => self.solver = value.parse()?,
            "dense_cap" => self.dense_cap = parse(&k, value)?,
            "windows" if value.eq_ignore_ascii_case("auto") => self.windows = None,
            "windows" => self.windows = Some(parse(&k, value)?),
            "bin_width" => self.bin_width = parse(&k, value)?,
            "c" => self.c = parse(&k, value)?,
            "energy_bins" => self.energy_bins = parse(&k, value)?,
            "threads" => self.threads = Some(parse(&k, value)?),
            "out" => self.out = PathBuf::from(value),
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Applies `pairs` in order; later values win.
    pub fn apply<'a>(&mut self, pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<()> {
        pairs.into_iter().try_for_each(|(k, v)| self.set(k, v))
    }

    /// Config file contents layered over the defaults of the file's `kind`
    /// (or `fallback` when the file names none).
    pub fn from_text(text: &str, fallback: Kind) -> Result<Self> {
        let pairs = parse_pairs(text)?;
        let kind = match pairs.iter().rev().find(|(k, _)| k == "kind") {
            Some((_, v)) => v.parse()?,
            None => fallback,
        };
        let mut cfg = Self::new(kind);
        cfg.apply(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())))?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path, fallback: Kind) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?, fallback)
    }

    /// `key=value` lines that reproduce this config.
    pub fn to_text(&self) -> String {
        self.to_pairs()
            .into_iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }

    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        let list = |v: &[f64]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        let mut out = vec![
            ("kind", self.kind.name().to_string()),
            ("rows", self.rows.to_string()),
            ("cols", self.cols.to_string()),
            ("delta", self.delta.to_string()),
        ];
        match &self.couplings {
            Couplings::Absolute(v) => out.push(("J", list(v))),
            Couplings::Scaled(v) => out.push(("Jn", list(v))),
        }
        out.extend([
            ("seed", self.base_seed.to_string()),
            ("realizations", self.realizations.to_string()),
            ("window", self.window.to_string()),
        ]);
        if let Some(l) = self.levels {
            out.push(("levels", l.to_string()));
        }
        out.extend([
            ("solver", self.solver.to_string()),
            ("dense_cap", self.dense_cap.to_string()),
            (
                "windows",
                self.windows.map_or("auto".into(), |w| w.to_string()),
            ),
            ("bin_width", self.bin_width.to_string()),
            ("c", self.c.to_string()),
            ("energy_bins", self.energy_bins.to_string()),
        ]);
        if let Some(t) = self.threads {
            out.push(("threads", t.to_string()));
        }
        out.push(("out", self.out.display().to_string()));
        out
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse `{value}` for key `{key}`")))
}

/// Comma-separated numbers, or `start:stop:step` (inclusive of `stop`).
fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = value.split(':').collect();
    if parts.len() == 3 {
        let (a, b, h): (f64, f64, f64) = (
            parse(key, parts[0])?,
            parse(key, parts[1])?,
            parse(key, parts[2])?,
        );
        if !(h > 0.0) || b < a {
            return Err(Error::Config(format!(
                "bad range `{value}` for key `{key}`"
            )));
        }
        let steps = ((b - a) / h + 1e-9).floor() as usize;
        return Ok((0..=steps).map(|i| a + i as f64 * h).collect());
    }
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse(key, s.trim()))
        .collect()
}

/// Splits config text into `(key, value)` pairs; `#` starts a comment.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected key=value, got `{line}`", i + 1))
        })?;
        let k = k.trim();
        if k.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", i + 1)));
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}
