//! Single realizations and their ensembles.

use super::config::{ExperimentConfig, Kind, LevelRange, Solver};
use super::stats::Stat;
use crate::eigensolve::{
    dense_full_diag, iterative_extremal, LanczosOptions, Side, SpectrumResult,
};
use crate::error::{Error, Result};
use crate::model::{
    shifted_energy, BandBasis, BandHamiltonian, DisorderRealization, Lattice, ModelParams,
};
use crate::spectral::{
    central_spacings, central_window, energy_windows, eta_from_spacings, ps_histogram,
    SpacingHistogram,
};
use crate::thermo::{
    center_spacing_from_moments, dos_fit, fd_fit, occupation_numbers, rms_difference, t_canonical,
    theory_estimates, vector_entropy, FdFit, TheoryEstimates, BETA_CAN_MAX,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Largest band that `Solver::Auto` diagonalizes densely when only a few
/// edge states are wanted.
pub const AUTO_DENSE_DIM: usize = 4000;

/// One analyzed eigenstate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateRecord {
    /// 0-based eigenstate index.
    pub m: usize,
    pub energy: f64,
    pub e_over_b: f64,
    /// `E'_m - E'_0`.
    pub excitation: f64,
    pub s_q: f64,
    pub beta_fd: f64,
    pub t_fd: f64,
    pub sigma_fd: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SigmaBin {
    pub sigma_fd: Stat,
    pub sigma_s: Stat,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TempBin {
    pub e_over_b: Stat,
    pub e_prime: Stat,
    pub beta_fd: Stat,
    pub beta_can: Stat,
    pub beta_th: Stat,
}

/// What one realization contributes at one coupling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Record {
    Spectrum {
        /// `(m, E_m)` pairs, 0-based.
        levels: Vec<(usize, f64)>,
        sum_deltas: f64,
        center: f64,
        width: f64,
    },
    Spacings {
        spacings: Vec<f64>,
        eta: f64,
    },
    Windows {
        spacings: Vec<Vec<f64>>,
        e_over_b: Vec<f64>,
        eta: Vec<f64>,
    },
    Occupations {
        deltas: Vec<f64>,
        epsilons: Vec<f64>,
        /// Occupations averaged over the level range.
        mean: Vec<f64>,
        states: Vec<StateRecord>,
    },
    SigmaBins(Vec<SigmaBin>),
    TempBins(Vec<TempBin>),
    Sigma {
        sigma_fd: f64,
        sigma_s: f64,
        n_states: usize,
    },
    Theory {
        delta_n_empirical: Option<f64>,
        moment_spacing: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationResult {
    pub index: usize,
    pub seed: u64,
    /// One record per coupling, in configuration order.
    pub records: Vec<Record>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Plan {
    Dense,
    Iterative,
    /// Nothing to diagonalize.
    None,
}

/// Lattice, basis and solver plan shared by every realization of a config.
pub struct Context {
    cfg: ExperimentConfig,
    lattice: Lattice,
    basis: BandBasis,
    couplings: Vec<f64>,
    plan: Plan,
}

impl Context {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let lattice = Lattice::periodic(cfg.rows, cfg.cols)?;
        let basis = BandBasis::central(lattice.n_sites())?;
        let plan = plan(cfg, basis.dim())?;
        Ok(Self {
            couplings: cfg.coupling_values(),
            cfg: cfg.clone(),
            lattice,
            basis,
            plan,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    pub fn basis(&self) -> &BandBasis {
        &self.basis
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    /// Levels analyzed by the occupation and spectrum kinds.
    pub fn levels(&self) -> LevelRange {
        match (self.cfg.kind, self.cfg.levels, self.plan) {
            (_, Some(l), _) => l,
            (Kind::Spectrum, None, Plan::Dense) => LevelRange {
                lo: 1,
                hi: self.basis.dim(),
            },
            (Kind::Spectrum, None, _) => LevelRange {
                lo: 1,
                hi: self.basis.dim().min(10),
            },
            _ => self.cfg.level_range(),
        }
    }

    /// Realization `r`: seed `base_seed + r`, every coupling in order.
    pub fn run(&self, r: usize) -> Result<RealizationResult> {
        let seed = self.cfg.seed(r);
        let records = self
            .couplings
            .iter()
            .map(|&j| self.run_coupling(seed, j))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::Realization {
                index: r,
                source: Box::new(e),
            })?;
        Ok(RealizationResult {
            index: r,
            seed,
            records,
        })
    }

    fn run_coupling(&self, seed: u64, coupling: f64) -> Result<Record> {
        let cfg = &self.cfg;
        let params = ModelParams::new(cfg.delta, coupling);
        let real = DisorderRealization::sample(&params, &self.lattice, seed)?;
        let h = BandHamiltonian::build(&self.lattice, &real, &self.basis)?;
        let dim = h.dim();
        let center = h.trace() / dim as f64;
        match cfg.kind {
            Kind::Spectrum => {
                let levels = self.levels();
                let (eigs, width) = match self.plan {
                    Plan::Dense => {
                        let s = dense_full_diag(&h, false, cfg.dense_cap)?;
                        let w = s.eigenvalues[dim - 1] - s.eigenvalues[0];
                        (s.eigenvalues, w)
                    }
                    _ => {
                        let s = self.lowest(&h, levels.hi, false)?;
                        let top = self.highest_energy(&h)?;
                        let w = top - s.eigenvalues[0];
                        (s.eigenvalues, w)
                    }
                };
                Ok(Record::Spectrum {
                    levels: levels.indices().map(|m| (m, eigs[m])).collect(),
                    sum_deltas: real.sum_deltas(),
                    center,
                    width,
                })
            }
            Kind::EtaScan | Kind::PsHistogram => {
                let eigs = dense_full_diag(&h, false, cfg.dense_cap)?.eigenvalues;
                let sample = central_spacings(&eigs, cfg.window)?;
                let eta = eta_from_spacings(&sample.spacings)?.eta;
                Ok(Record::Spacings {
                    spacings: sample.spacings,
                    eta,
                })
            }
            Kind::EtaVsEnergy => {
                let eigs = dense_full_diag(&h, false, cfg.dense_cap)?.eigenvalues;
                let windows = energy_windows(&eigs, cfg.energy_window_count())?;
                let eta = windows
                    .iter()
                    .map(|w| eta_from_spacings(&w.spacings).map(|e| e.eta))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Record::Windows {
                    e_over_b: windows.iter().map(|w| w.e_over_b).collect(),
                    spacings: windows.into_iter().map(|w| w.spacings).collect(),
                    eta,
                })
            }
            Kind::OccupationProfile => self.occupations(&h, &real, center),
            Kind::SigmaVsEnergy => {
                let spec = dense_full_diag(&h, true, cfg.dense_cap)?;
                let eps = real.epsilons(cfg.delta);
                let width = spec.eigenvalues[dim - 1] - spec.eigenvalues[0];
                let mut bins = vec![SigmaBin::default(); cfg.energy_bins];
                let mut prev: Option<(usize, Vec<f64>)> = None;
                for m in 0..dim {
                    let occ = occupation_numbers(spec.vector(m).expect("vectors"), &self.basis)?;
                    let fit = fd_fit(&occ, &eps, self.basis.n_up(), cfg.delta)?;
                    let b = bin_of((spec.eigenvalues[m] - center) / width, cfg.energy_bins);
                    bins[b].sigma_fd.push(fit.sigma_fd);
                    if let Some((pb, p)) = prev {
                        bins[pb].sigma_s.push(rms_difference(&p, &occ)?);
                    }
                    prev = Some((b, occ));
                }
                Ok(Record::SigmaBins(bins))
            }
            Kind::TemperatureComparison => {
                let spec = dense_full_diag(&h, true, cfg.dense_cap)?;
                let eps = real.epsilons(cfg.delta);
                let eigs = &spec.eigenvalues;
                let width = eigs[dim - 1] - eigs[0];
                let sum = real.sum_deltas();
                let eprimes: Vec<f64> = eigs.iter().map(|&e| shifted_energy(e, sum)).collect();
                let dos = dos_fit(&eprimes)?;
                let mut bins = vec![TempBin::default(); cfg.energy_bins];
                for m in 0..dim {
                    let occ = occupation_numbers(spec.vector(m).expect("vectors"), &self.basis)?;
                    let fit = fd_fit(&occ, &eps, self.basis.n_up(), cfg.delta)?;
                    let can = t_canonical(eigs, &eprimes, eigs[m], cfg.delta)?;
                    let x = (eigs[m] - center) / width;
                    let bin = &mut bins[bin_of(x, cfg.energy_bins)];
                    bin.e_over_b.push(x);
                    bin.e_prime.push(eprimes[m]);
                    bin.beta_fd.push(fit.beta);
                    // band-edge states have beta = +-inf; the bin mean takes the clamp
                    let cap = BETA_CAN_MAX / cfg.delta;
                    bin.beta_can.push(can.beta.clamp(-cap, cap));
                    bin.beta_th.push(-(eprimes[m] - dos.mean) / dos.sigma2);
                }
                Ok(Record::TempBins(bins))
            }
            Kind::SigmaScan => {
                let spec = dense_full_diag(&h, true, cfg.dense_cap)?;
                let eps = real.epsilons(cfg.delta);
                let window = central_window(dim, cfg.window)?;
                let mut fd = Stat::new();
                let mut s = Stat::new();
                let mut prev: Option<Vec<f64>> = None;
                for m in window.clone() {
                    let occ = occupation_numbers(spec.vector(m).expect("vectors"), &self.basis)?;
                    fd.push(fd_fit(&occ, &eps, self.basis.n_up(), cfg.delta)?.sigma_fd);
                    if let Some(p) = prev {
                        s.push(rms_difference(&p, &occ)?);
                    }
                    prev = Some(occ);
                }
                Ok(Record::Sigma {
                    sigma_fd: fd.mean(),
                    sigma_s: s.mean(),
                    n_states: window.len(),
                })
            }
            Kind::Theory => {
                let delta_n_empirical = match self.plan {
                    Plan::Dense => {
                        let eigs = dense_full_diag(&h, false, cfg.dense_cap)?.eigenvalues;
                        theory_estimates(self.lattice.n_sites(), cfg.delta, coupling, cfg.c)
                            .with_spectrum(&eigs, cfg.window)
                            .delta_n_empirical
                    }
                    _ => None,
                };
                Ok(Record::Theory {
                    delta_n_empirical,
                    moment_spacing: center_spacing_from_moments(&h),
                })
            }
        }
    }

    fn occupations(
        &self,
        h: &BandHamiltonian,
        real: &DisorderRealization,
        center: f64,
    ) -> Result<Record> {
        let cfg = &self.cfg;
        let levels = self.levels();
        let dim = h.dim();
        let (spec, width) = match self.plan {
            Plan::Dense => {
                let s = dense_full_diag(h, true, cfg.dense_cap)?;
                let w = s.eigenvalues[dim - 1] - s.eigenvalues[0];
                (s, w)
            }
            _ => {
                let s = self.lowest(h, levels.hi, true)?;
                let w = self.highest_energy(h)? - s.eigenvalues[0];
                (s, w)
            }
        };
        let eps = real.epsilons(cfg.delta);
        let sum = real.sum_deltas();
        let ground = shifted_energy(spec.eigenvalues[0], sum);
        let n = self.basis.n_sites();
        let mut mean = vec![0.0; n];
        let mut states = Vec::with_capacity(levels.len());
        for m in levels.indices() {
            let v = spec.vector(m).ok_or(Error::LevelOutOfRange {
                index: m,
                len: spec.len(),
            })?;
            let occ = occupation_numbers(v, &self.basis)?;
            let fit: FdFit = fd_fit(&occ, &eps, self.basis.n_up(), cfg.delta)?;
            let e = spec.eigenvalues[m];
            for (a, o) in mean.iter_mut().zip(&occ) {
                *a += o / levels.len() as f64;
            }
            states.push(StateRecord {
                m,
                energy: e,
                e_over_b: (e - center) / width,
                excitation: shifted_energy(e, sum) - ground,
                s_q: vector_entropy(v)?,
                beta_fd: fit.beta,
                t_fd: fit.t_fd,
                sigma_fd: fit.sigma_fd,
            });
        }
        Ok(Record::Occupations {
            deltas: real.deltas.clone(),
            epsilons: eps,
            mean,
            states,
        })
    }

    fn lowest(&self, h: &BandHamiltonian, k: usize, vectors: bool) -> Result<SpectrumResult> {
        let opts = LanczosOptions {
            want_vectors: vectors,
            ..LanczosOptions::default()
        };
        iterative_extremal(h, k, Side::Lowest, &opts)
    }

    fn highest_energy(&self, h: &BandHamiltonian) -> Result<f64> {
        let opts = LanczosOptions {
            want_vectors: false,
            ..LanczosOptions::default()
        };
        Ok(iterative_extremal(h, 1, Side::Highest, &opts)?.eigenvalues[0])
    }
}

fn plan(cfg: &ExperimentConfig, dim: usize) -> Result<Plan> {
    let fits = dim <= cfg.dense_cap;
    let too_big = |hint: &'static str| Error::Capacity {
        what: "dense band dimension",
        requested: dim,
        limit: cfg.dense_cap,
        hint,
    };
    match cfg.kind {
        Kind::Theory => Ok(if fits && cfg.solver != Solver::Iterative {
            Plan::Dense
        } else {
            Plan::None
        }),
        k if k.needs_full_spectrum() => {
            if cfg.solver == Solver::Iterative {
                return Err(Error::param(
                    "solver",
                    format!("{k} needs the whole band; only the dense solver provides it"),
                ));
            }
            if fits {
                Ok(Plan::Dense)
            } else {
                Err(too_big("; this kind needs every eigenvalue, use a smaller lattice or raise the dense cap"))
            }
        }
        _ => match cfg.solver {
            Solver::Dense if fits => Ok(Plan::Dense),
            Solver::Dense => Err(too_big("; use the iterative solver for edge states")),
            Solver::Iterative => iterative_fits(cfg, dim),
            Solver::Auto if fits && dim <= AUTO_DENSE_DIM => Ok(Plan::Dense),
            Solver::Auto => iterative_fits(cfg, dim),
        },
    }
}

// Rough floor on the Krylov storage the edge solve needs; a run that cannot
// even hold it is refused before any work starts.
fn iterative_fits(cfg: &ExperimentConfig, dim: usize) -> Result<Plan> {
    let k = cfg.level_range().hi + 1;
    let need = (2 * k + 50).min(dim).saturating_mul(dim).saturating_mul(8);
    let limit = LanczosOptions::default().memory_budget;
    if need > limit {
        return Err(Error::Capacity {
            what: "Krylov basis bytes",
            requested: need,
            limit,
            hint: "; lower the level range or the lattice size",
        });
    }
    Ok(Plan::Iterative)
}

/// Bin of `x` among `bins` equal bins over `[-1/2, 1/2]`; outliers go to the end bins.
pub fn bin_of(x: f64, bins: usize) -> usize {
    let b = ((x + 0.5) * bins as f64).floor();
    (b.max(0.0) as usize).min(bins - 1)
}

pub fn bin_center(b: usize, bins: usize) -> f64 {
    (b as f64 + 0.5) / bins as f64 - 0.5
}

/// `r < realizations` is required.
pub fn run_realization(cfg: &ExperimentConfig, r: usize) -> Result<RealizationResult> {
    if r >= cfg.realizations {
        return Err(Error::param(
            "realization",
            format!("index {r} outside 0..{}", cfg.realizations),
        ));
    }
    Context::new(cfg)?.run(r)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub index: usize,
    pub seed: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyPoint {
    pub window: usize,
    pub e_over_b: f64,
    pub eta: f64,
    pub stderr: f64,
    pub n_spacings: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloudPoint {
    pub realization: usize,
    pub site: usize,
    pub delta: f64,
    pub n: f64,
    pub n_fd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateRow {
    pub realization: usize,
    pub state: StateRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupationSummary {
    pub levels: LevelRange,
    /// Level-averaged occupation of every site of every realization.
    pub cloud: Vec<CloudPoint>,
    /// Fermi-Dirac fit to the pooled cloud.
    pub fit: FdFit,
    pub s_q: Stat,
    pub excitation: Stat,
    /// Per-state fits.
    pub state_t_fd: Stat,
    pub state_sigma_fd: Stat,
    pub states: Vec<StateRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaEnergyRow {
    pub e_over_b: f64,
    pub sigma_fd: Stat,
    pub sigma_s: Stat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TempRow {
    pub e_over_b: f64,
    pub e_prime: f64,
    pub t_fd: f64,
    pub t_can: f64,
    pub t_th: f64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRun {
    pub realization: usize,
    pub seed: u64,
    pub levels: Vec<(usize, f64)>,
    pub sum_deltas: f64,
    pub center: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointData {
    Spectrum(Vec<SpectrumRun>),
    Eta {
        /// `eta` of the pooled spacings.
        eta: f64,
        /// Standard error of the per-realization values.
        stderr: f64,
        n_spacings: usize,
        histogram: Option<SpacingHistogram>,
    },
    Energy(Vec<EnergyPoint>),
    Occupations(Box<OccupationSummary>),
    SigmaEnergy(Vec<SigmaEnergyRow>),
    Temperatures(Vec<TempRow>),
    Sigma {
        sigma_fd: Stat,
        sigma_s: Stat,
    },
    Theory {
        estimates: TheoryEstimates,
        moment_spacing: Stat,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub coupling: f64,
    pub data: PointData,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub config: ExperimentConfig,
    pub completed: usize,
    pub failures: Vec<Failure>,
    pub points: Vec<Point>,
    /// Raw per-realization results, when requested.
    pub records: Vec<RealizationResult>,
    pub wall_seconds: f64,
}

impl EnsembleSummary {
    pub fn is_complete(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Mergeable per-coupling aggregate; merging is an ordered concatenation
/// for pooled samples and a pairwise moment update for statistics.
#[derive(Debug, Clone, PartialEq)]
pub enum Accumulator {
    Spectrum(Vec<SpectrumRun>),
    Spacings {
        pooled: Vec<f64>,
        eta: Stat,
    },
    Windows {
        pooled: Vec<Vec<f64>>,
        e_over_b: Vec<Stat>,
        eta: Vec<Stat>,
    },
    Occupations {
        cloud: Vec<(usize, usize, f64, f64, f64)>,
        states: Vec<StateRow>,
    },
    SigmaBins(Vec<SigmaBin>),
    TempBins(Vec<TempBin>),
    Sigma {
        sigma_fd: Stat,
        sigma_s: Stat,
    },
    Theory {
        empirical: Stat,
        moments: Stat,
    },
}

impl Accumulator {
    pub fn from_record(index: usize, seed: u64, rec: Record) -> Self {
        match rec {
            Record::Spectrum {
                levels,
                sum_deltas,
                center,
                width,
            } => Accumulator::Spectrum(vec![SpectrumRun {
                realization: index,
                seed,
                levels,
                sum_deltas,
                center,
                width,
            }]),
            Record::Spacings { spacings, eta } => Accumulator::Spacings {
                pooled: spacings,
                eta: Stat::of([eta]),
            },
            Record::Windows {
                spacings,
                e_over_b,
                eta,
            } => Accumulator::Windows {
                pooled: spacings,
                e_over_b: e_over_b.into_iter().map(|x| Stat::of([x])).collect(),
                eta: eta.into_iter().map(|x| Stat::of([x])).collect(),
            },
            Record::Occupations {
                deltas,
                epsilons,
                mean,
                states,
            } => Accumulator::Occupations {
                cloud: (0..deltas.len())
                    .map(|i| (index, i, deltas[i], epsilons[i], mean[i]))
                    .collect(),
                states: states
                    .into_iter()
                    .map(|state| StateRow {
                        realization: index,
                        state,
                    })
                    .collect(),
            },
            Record::SigmaBins(b) => Accumulator::SigmaBins(b),
            Record::TempBins(b) => Accumulator::TempBins(b),
            Record::Sigma {
                sigma_fd, sigma_s, ..
            } => Accumulator::Sigma {
                sigma_fd: Stat::of([sigma_fd]),
                sigma_s: Stat::of([sigma_s]),
            },
            Record::Theory {
                delta_n_empirical,
                moment_spacing,
            } => Accumulator::Theory {
                empirical: Stat::of(delta_n_empirical),
                moments: Stat::of([moment_spacing]),
            },
        }
    }

    /// Appends `other`, which must come from later realizations.
    pub fn merge(&mut self, other: Accumulator) {
        use Accumulator as A;
        match (self, other) {
            (A::Spectrum(a), A::Spectrum(b)) => a.extend(b),
            (A::Spacings { pooled, eta }, A::Spacings { pooled: p, eta: e }) => {
                pooled.extend(p);
                eta.merge(&e);
            }
            (
                A::Windows {
                    pooled,
                    e_over_b,
                    eta,
                },
                A::Windows {
                    pooled: p,
                    e_over_b: x,
                    eta: e,
                },
            ) => {
                for (a, b) in pooled.iter_mut().zip(p) {
                    a.extend(b);
                }
                e_over_b.iter_mut().zip(&x).for_each(|(a, b)| a.merge(b));
                eta.iter_mut().zip(&e).for_each(|(a, b)| a.merge(b));
            }
            (
                A::Occupations { cloud, states },
                A::Occupations {
                    cloud: c,
                    states: s,
                },
            ) => {
                cloud.extend(c);
                states.extend(s);
            }
            (A::SigmaBins(a), A::SigmaBins(b)) => {
                for (x, y) in a.iter_mut().zip(&b) {
                    x.sigma_fd.merge(&y.sigma_fd);
                    x.sigma_s.merge(&y.sigma_s);
                }
            }
            (A::TempBins(a), A::TempBins(b)) => {
                for (x, y) in a.iter_mut().zip(&b) {
                    x.e_over_b.merge(&y.e_over_b);
                    x.e_prime.merge(&y.e_prime);
                    x.beta_fd.merge(&y.beta_fd);
                    x.beta_can.merge(&y.beta_can);
                    x.beta_th.merge(&y.beta_th);
                }
            }
            (
                A::Sigma { sigma_fd, sigma_s },
                A::Sigma {
                    sigma_fd: f,
                    sigma_s: s,
                },
            ) => {
                sigma_fd.merge(&f);
                sigma_s.merge(&s);
            }
            (
                A::Theory { empirical, moments },
                A::Theory {
                    empirical: e,
                    moments: m,
                },
            ) => {
                empirical.merge(&e);
                moments.merge(&m);
            }
            (a, b) => panic!("mismatched accumulators {a:?} / {b:?}"),
        }
    }

    fn finish(self, ctx: &Context, coupling: f64, completed: usize) -> Result<PointData> {
        let cfg = ctx.config();
        Ok(match self {
            Accumulator::Spectrum(runs) => PointData::Spectrum(runs),
            Accumulator::Spacings { pooled, eta } => {
                let pooled_eta = eta_from_spacings(&pooled)?;
                PointData::Eta {
                    eta: pooled_eta.eta,
                    stderr: eta.stderr(),
                    n_spacings: pooled.len(),
                    histogram: if cfg.kind == Kind::PsHistogram {
                        Some(ps_histogram(&pooled, cfg.bin_width)?)
                    } else {
                        None
                    },
                }
            }
            Accumulator::Windows {
                pooled,
                e_over_b,
                eta,
            } => PointData::Energy(
                pooled
                    .iter()
                    .enumerate()
                    .map(|(w, sp)| {
                        Ok(EnergyPoint {
                            window: w,
                            e_over_b: e_over_b[w].mean(),
                            eta: eta_from_spacings(sp)?.eta,
                            stderr: eta[w].stderr(),
                            n_spacings: sp.len(),
                        })
                    })
                    .collect::<Result<_>>()?,
            ),
            Accumulator::Occupations { cloud, states } => {
                let occ: Vec<f64> = cloud.iter().map(|c| c.4).collect();
                let eps: Vec<f64> = cloud.iter().map(|c| c.3).collect();
                let fit = fd_fit(&occ, &eps, ctx.basis().n_up() * completed, cfg.delta)?;
                let cloud = cloud
                    .iter()
                    .zip(&fit.fitted)
                    .map(|(c, &n_fd)| CloudPoint {
                        realization: c.0,
                        site: c.1,
                        delta: c.2,
                        n: c.4,
                        n_fd,
                    })
                    .collect();
                PointData::Occupations(Box::new(OccupationSummary {
                    levels: ctx.levels(),
                    cloud,
                    fit,
                    s_q: Stat::of(states.iter().map(|s| s.state.s_q)),
                    excitation: Stat::of(states.iter().map(|s| s.state.excitation)),
                    state_t_fd: Stat::of(
                        states
                            .iter()
                            .map(|s| s.state.t_fd)
                            .filter(|t| t.is_finite()),
                    ),
                    state_sigma_fd: Stat::of(states.iter().map(|s| s.state.sigma_fd)),
                    states,
                }))
            }
            Accumulator::SigmaBins(bins) => PointData::SigmaEnergy(
                bins.into_iter()
                    .enumerate()
                    .filter(|(_, b)| b.sigma_fd.count() > 0)
                    .map(|(i, b)| SigmaEnergyRow {
                        e_over_b: bin_center(i, cfg.energy_bins),
                        sigma_fd: b.sigma_fd,
                        sigma_s: b.sigma_s,
                    })
                    .collect(),
            ),
            Accumulator::TempBins(bins) => PointData::Temperatures(
                bins.into_iter()
                    .filter(|b| b.e_over_b.count() > 0)
                    .map(|b| TempRow {
                        e_over_b: b.e_over_b.mean(),
                        e_prime: b.e_prime.mean(),
                        t_fd: inverse(b.beta_fd.mean()),
                        t_can: inverse(b.beta_can.mean()),
                        t_th: inverse(b.beta_th.mean()),
                        count: b.e_over_b.count(),
                    })
                    .collect(),
            ),
            Accumulator::Sigma { sigma_fd, sigma_s } => PointData::Sigma { sigma_fd, sigma_s },
            Accumulator::Theory { empirical, moments } => {
                let mut estimates =
                    theory_estimates(ctx.basis().n_sites(), cfg.delta, coupling, cfg.c);
                if empirical.count() > 0 {
                    estimates.delta_n_empirical = Some(empirical.mean());
                }
                PointData::Theory {
                    estimates,
                    moment_spacing: moments,
                }
            }
        })
    }
}

/// `1 / beta`, with `+inf` at `beta = 0` and `NaN` kept for empty bins.
fn inverse(beta: f64) -> f64 {
    if beta == 0.0 {
        f64::INFINITY
    } else {
        1.0 / beta
    }
}

pub fn run_ensemble(cfg: &ExperimentConfig) -> Result<EnsembleSummary> {
    run_ensemble_with(cfg, false)
}

/// Runs every realization on a worker pool of `cfg.threads` threads and
/// folds the results in realization order, so the summary does not depend
/// on the thread count. Failed realizations are counted, not fatal.
pub fn run_ensemble_with(cfg: &ExperimentConfig, keep_records: bool) -> Result<EnsembleSummary> {
    let start = Instant::now();
    let ctx = Context::new(cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let results: Vec<Result<RealizationResult>> = pool.install(|| {
        (0..cfg.realizations)
            .into_par_iter()
            .map(|r| ctx.run(r))
            .collect()
    });

    let mut accs: Vec<Option<Accumulator>> = vec![None; ctx.couplings().len()];
    let mut failures = Vec::new();
    let mut records = Vec::new();
    let mut completed = 0;
    for (r, res) in results.into_iter().enumerate() {
        match res {
            Ok(rr) => {
                completed += 1;
                if keep_records {
                    records.push(rr.clone());
                }
                for (acc, rec) in accs.iter_mut().zip(rr.records) {
                    let next = Accumulator::from_record(rr.index, rr.seed, rec);
                    match acc {
                        Some(a) => a.merge(next),
                        None => *acc = Some(next),
                    }
                }
            }
            Err(e) => {
                log::warn!("realization {r} failed: {e}");
                failures.push(Failure {
                    index: r,
                    seed: cfg.seed(r),
                    message: e.to_string(),
                });
            }
        }
    }
    let mut points = Vec::new();
    if completed > 0 {
        for (acc, &j) in accs.into_iter().zip(ctx.couplings()) {
            let acc = acc.expect("every completed realization fills every coupling");
            points.push(Point {
                coupling: j,
                data: acc.finish(&ctx, j, completed)?,
            });
        }
    }
    Ok(EnsembleSummary {
        config: cfg.clone(),
        completed,
        failures,
        points,
        records,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}
