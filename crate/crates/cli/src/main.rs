use clap::{Args, Parser, Subcommand};
use qubit_chaos::ensemble::{
    figure_driver, parse_pairs, run_ensemble, ExperimentConfig, Kind, PointData,
};
use qubit_chaos::output::{fmt_num, write_run};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] qubit_chaos::Error),

    #[error("config file asks for kind `{found}` but the subcommand runs `{expected}`")]
    KindMismatch { expected: Kind, found: String },

    #[error("{failed} of {total} realizations failed (details in {meta})")]
    Incomplete {
        failed: usize,
        total: usize,
        meta: String,
    },
}

#[derive(Parser, Debug)]
#[command(
    name = "qubit-chaos",
    version,
    about = "Disordered qubit lattice: chaos onset and Fermi-Dirac thermalization",
    after_help = "Settings are layered: kind defaults, then --config file, then flags."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Band eigenvalues of each realization (or edge levels beyond the dense cap)
    Spectrum(Common),
    /// Central-window eta against the coupling
    EtaScan(Common),
    /// Eta in energy windows across the band
    EtaEnergy(Common),
    /// Pooled spacing histogram with Poisson and Wigner-Dyson references
    PsHist(Common),
    /// Occupation numbers against detuning with Fermi-Dirac fits
    Occupations(Common),
    /// Fit deviation sigma_FD against the coupling
    SigmaScan(Common),
    /// sigma_FD and sigma_s against energy
    SigmaEnergy(Common),
    /// T_FD, T_can and T_th against energy
    Temps(Common),
    /// Chaos-border and Breit-Wigner estimates
    Theory(Common),
    /// Regenerate the data behind figure <ID> (1-9)
    Figure {
        #[arg(value_parser = clap::value_parser!(u32).range(1..=9))]
        id: u32,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Lattice rows
    #[arg(long)]
    rows: Option<usize>,
    /// Lattice columns
    #[arg(long)]
    cols: Option<usize>,
    /// Detuning spread (energy unit)
    #[arg(long)]
    delta: Option<f64>,
    /// Couplings in units of delta: list `a,b,c` or range `start:stop:step`
    #[arg(long = "J", value_name = "LIST")]
    j: Option<String>,
    /// Scaled couplings J n/delta, same syntax as --J
    #[arg(long = "Jn", value_name = "LIST")]
    jn: Option<String>,
    /// Base seed; realization r uses seed + r
    #[arg(long)]
    seed: Option<u64>,
    /// Number of disorder realizations
    #[arg(long)]
    realizations: Option<usize>,
    /// Half width of the central window as a band fraction
    #[arg(long)]
    window: Option<f64>,
    /// Level range, 1-based inclusive, e.g. 95-100
    #[arg(long)]
    levels: Option<String>,
    /// Largest band dimension handled by dense diagonalization
    #[arg(long)]
    dense_cap: Option<usize>,
    /// Worker threads (1 runs serially)
    #[arg(long)]
    threads: Option<usize>,
    /// Eigensolver: auto, dense or iterative
    #[arg(long)]
    solver: Option<String>,
    /// Energy windows for eta-energy
    #[arg(long)]
    windows: Option<usize>,
    /// Energy bins for sigma-energy and temps
    #[arg(long)]
    energy_bins: Option<usize>,
    /// Histogram bin width for ps-hist
    #[arg(long)]
    bin_width: Option<f64>,
    /// Chaos-border constant for theory
    #[arg(long = "C", value_name = "C")]
    c: Option<f64>,
    /// key=value configuration file
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Run name used for output files (default: the kind)
    #[arg(long)]
    name: Option<String>,
    /// Overwrite existing output files
    #[arg(long)]
    force: bool,
}

impl Common {
    fn flag_pairs(&self) -> Vec<(String, String)> {
        let mut p = Vec::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                p.push((k.to_string(), v));
            }
        };
        put("rows", self.rows.map(|v| v.to_string()));
        put("cols", self.cols.map(|v| v.to_string()));
        put("delta", self.delta.map(|v| v.to_string()));
        put("J", self.j.clone());
        put("Jn", self.jn.clone());
        put("seed", self.seed.map(|v| v.to_string()));
        put("realizations", self.realizations.map(|v| v.to_string()));
        put("window", self.window.map(|v| v.to_string()));
        put("levels", self.levels.clone());
        put("dense_cap", self.dense_cap.map(|v| v.to_string()));
        put("threads", self.threads.map(|v| v.to_string()));
        put("solver", self.solver.clone());
        put("windows", self.windows.map(|v| v.to_string()));
        put("energy_bins", self.energy_bins.map(|v| v.to_string()));
        put("bin_width", self.bin_width.map(|v| v.to_string()));
        put("c", self.c.map(|v| v.to_string()));
        put("out", self.out.as_ref().map(|v| v.display().to_string()));
        p
    }

    /// Config file pairs followed by flag pairs, so flags win.
    fn layered_pairs(&self) -> Result<Vec<(String, String)>, CliError> {
        let mut pairs = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(qubit_chaos::Error::from)?;
                parse_pairs(&text)?
            }
            None => Vec::new(),
        };
        pairs.extend(self.flag_pairs());
        Ok(pairs)
    }
}

fn kind_of(cmd: &Command) -> Option<Kind> {
    Some(match cmd {
        Command::Spectrum(_) => Kind::Spectrum,
        Command::EtaScan(_) => Kind::EtaScan,
        Command::EtaEnergy(_) => Kind::EtaVsEnergy,
        Command::PsHist(_) => Kind::PsHistogram,
        Command::Occupations(_) => Kind::OccupationProfile,
        Command::SigmaScan(_) => Kind::SigmaScan,
        Command::SigmaEnergy(_) => Kind::SigmaVsEnergy,
        Command::Temps(_) => Kind::TemperatureComparison,
        Command::Theory(_) => Kind::Theory,
        Command::Figure { .. } => return None,
    })
}

fn build_config(kind: Kind, common: &Common) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig::new(kind);
    for (k, v) in common.layered_pairs()? {
        if k.eq_ignore_ascii_case("kind") {
            if v.parse::<Kind>().ok() != Some(kind) {
                return Err(CliError::KindMismatch {
                    expected: kind,
                    found: v,
                });
            }
            continue;
        }
        cfg.set(&k, &v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run_kind(kind: Kind, common: &Common) -> Result<(), CliError> {
    let cfg = build_config(kind, common)?;
    let name = common
        .name
        .clone()
        .unwrap_or_else(|| kind.name().to_string());
    let out = cfg.out.clone();
    if !common.force {
        let meta = out.join(format!("{name}.meta"));
        if meta.exists() {
            return Err(qubit_chaos::Error::OutputExists(meta).into());
        }
    }
    let summary = run_ensemble(&cfg)?;
    if summary.completed == 0 {
        let first = summary
            .failures
            .first()
            .map(|f| f.message.clone())
            .unwrap_or_default();
        return Err(qubit_chaos::Error::Config(format!(
            "every realization failed; first error: {first}"
        ))
        .into());
    }
    if kind == Kind::Theory {
        print_theory(&summary);
    }
    let files = write_run(&summary, &name, &out, common.force)?;
    for f in &files {
        println!("wrote {}", f.display());
    }
    if !summary.is_complete() {
        return Err(CliError::Incomplete {
            failed: summary.failures.len(),
            total: cfg.realizations,
            meta: files
                .last()
                .map(|f| f.display().to_string())
                .unwrap_or_default(),
        });
    }
    Ok(())
}

fn print_theory(summary: &qubit_chaos::ensemble::EnsembleSummary) {
    for p in &summary.points {
        let PointData::Theory { estimates: e, .. } = &p.data else {
            continue;
        };
        println!(
            "J={} n={} N_B={} C={} J_c={} Delta_c={} Delta_n={} Gamma_BW={} tau_chi={}",
            fmt_num(p.coupling),
            e.n,
            e.n_b,
            fmt_num(e.c),
            fmt_num(e.j_c),
            fmt_num(e.delta_c),
            fmt_num(e.delta_n_empirical.unwrap_or(e.delta_n_scaling)),
            fmt_num(e.gamma_bw),
            fmt_num(e.tau_chi),
        );
    }
}

fn run_figure(id: u32, common: &Common) -> Result<(), CliError> {
    let mut overrides = common.layered_pairs()?;
    overrides.retain(|(k, _)| !k.eq_ignore_ascii_case("kind") && !k.eq_ignore_ascii_case("out"));
    let out = common.out.clone().unwrap_or_else(|| {
        common
            .layered_pairs()
            .ok()
            .and_then(|p| {
                p.into_iter()
                    .rev()
                    .find(|(k, _)| k.eq_ignore_ascii_case("out"))
            })
            .map(|(_, v)| PathBuf::from(v))
            .unwrap_or_else(|| PathBuf::from("."))
    });
    for f in figure_driver(id, &overrides, &out, common.force)? {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Figure { id, common } => run_figure(*id, common),
        Command::Spectrum(c)
        | Command::EtaScan(c)
        | Command::EtaEnergy(c)
        | Command::PsHist(c)
        | Command::Occupations(c)
        | Command::SigmaScan(c)
        | Command::SigmaEnergy(c)
        | Command::Temps(c)
        | Command::Theory(c) => run_kind(kind_of(&cli.command).expect("kind subcommand"), c),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
