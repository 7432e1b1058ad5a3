//! Python bindings: configuration, ensemble runs, single spectra and the
//! Fermi-Dirac and level-statistics helpers.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use qubit_chaos::eigensolve::dense_full_diag;
use qubit_chaos::ensemble::{self, EnsembleSummary, ExperimentConfig, Kind};
use qubit_chaos::model::{BandBasis, BandHamiltonian, DisorderRealization, Lattice, ModelParams};
use qubit_chaos::{output, spectral, thermo};
use std::collections::BTreeMap;
use std::path::Path;

fn err(e: qubit_chaos::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn value_text(v: &Bound<'_, PyAny>) -> PyResult<String> {
    if let Ok(items) = v.extract::<Vec<f64>>() {
        return Ok(items
            .iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(","));
    }
    Ok(v.str()?.to_string())
}

/// Experiment configuration; keyword arguments are `key=value` settings.
#[pyclass(name = "Config", from_py_object)]
#[derive(Clone)]
struct PyConfig {
    inner: ExperimentConfig,
}

#[pymethods]
impl PyConfig {
    #[new]
    #[pyo3(signature = (kind, **settings))]
    fn new(kind: &str, settings: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let kind: Kind = kind.parse().map_err(err)?;
        let mut c = Self {
            inner: ExperimentConfig::new(kind),
        };
        if let Some(s) = settings {
            for (k, v) in s.iter() {
                c.set(&k.extract::<String>()?, &v)?;
            }
        }
        c.inner.validate().map_err(err)?;
        Ok(c)
    }

    fn set(&mut self, key: &str, value: &Bound<'_, PyAny>) -> PyResult<()> {
        self.inner.set(key, &value_text(value)?).map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (text, kind = "eta_scan"))]
    fn from_text(text: &str, kind: &str) -> PyResult<Self> {
        let kind: Kind = kind.parse().map_err(err)?;
        Ok(Self {
            inner: ExperimentConfig::from_text(text, kind).map_err(err)?,
        })
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind.name()
    }

    #[getter]
    fn n_sites(&self) -> usize {
        self.inner.n_sites()
    }

    #[getter]
    fn band_dim(&self) -> u64 {
        self.inner.band_dim()
    }

    #[getter]
    fn realizations(&self) -> usize {
        self.inner.realizations
    }

    #[getter]
    fn base_seed(&self) -> u64 {
        self.inner.base_seed
    }

    /// Couplings in energy units.
    #[getter]
    fn couplings(&self) -> Vec<f64> {
        self.inner.coupling_values()
    }

    fn __repr__(&self) -> String {
        format!(
            "Config(kind={}, {}x{}, realizations={})",
            self.inner.kind.name(),
            self.inner.rows,
            self.inner.cols,
            self.inner.realizations
        )
    }
}

/// Result of an ensemble run.
#[pyclass(name = "Summary")]
struct PySummary {
    inner: EnsembleSummary,
}

#[pymethods]
impl PySummary {
    #[getter]
    fn completed(&self) -> usize {
        self.inner.completed
    }

    /// `(index, seed, message)` of every failed realization.
    #[getter]
    fn failures(&self) -> Vec<(usize, u64, String)> {
        self.inner
            .failures
            .iter()
            .map(|f| (f.index, f.seed, f.message.clone()))
            .collect()
    }

    #[getter]
    fn wall_seconds(&self) -> f64 {
        self.inner.wall_seconds
    }

    /// CSV text of each output table keyed by file-name suffix.
    fn tables(&self) -> BTreeMap<String, String> {
        output::tables(&self.inner)
            .into_iter()
            .map(|(suffix, t)| (suffix, t.to_csv()))
            .collect()
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[pyo3(signature = (run, out, force = false))]
    fn write(&self, run: &str, out: &str, force: bool) -> PyResult<Vec<String>> {
        let files = output::write_run(&self.inner, run, Path::new(out), force).map_err(err)?;
        Ok(files.iter().map(|p| p.display().to_string()).collect())
    }
}

#[pyfunction]
fn run_ensemble(config: &PyConfig) -> PyResult<PySummary> {
    Ok(PySummary {
        inner: ensemble::run_ensemble(&config.inner).map_err(err)?,
    })
}

/// Ascending band eigenvalues of one disorder realization.
#[pyfunction]
#[pyo3(signature = (rows, cols, coupling, delta = 1.0, seed = 0))]
fn band_spectrum(
    rows: usize,
    cols: usize,
    coupling: f64,
    delta: f64,
    seed: u64,
) -> PyResult<Vec<f64>> {
    let lattice = Lattice::periodic(rows, cols).map_err(err)?;
    let real = DisorderRealization::sample(&ModelParams::new(delta, coupling), &lattice, seed)
        .map_err(err)?;
    let basis = BandBasis::central(lattice.n_sites()).map_err(err)?;
    let h = BandHamiltonian::build(&lattice, &real, &basis).map_err(err)?;
    let spec =
        dense_full_diag(&h, false, qubit_chaos::eigensolve::DEFAULT_DENSE_CAP).map_err(err)?;
    Ok(spec.eigenvalues)
}

/// `(eta, stderr)` of unit-mean spacings.
#[pyfunction]
fn eta(spacings: Vec<f64>) -> PyResult<(f64, f64)> {
    let r = spectral::eta_from_spacings(&spacings).map_err(err)?;
    Ok((r.eta, r.stderr))
}

/// `(mu, occupations)` of the fixed-filling Fermi-Dirac distribution.
#[pyfunction]
#[pyo3(signature = (beta, eps, n_up, delta = 1.0))]
fn fd_occupations(beta: f64, eps: Vec<f64>, n_up: usize, delta: f64) -> PyResult<(f64, Vec<f64>)> {
    thermo::fd_occupations(beta, &eps, n_up, delta).map_err(err)
}

/// Fermi-Dirac fit of measured occupations: `beta`, `mu`, `t_fd`, `sigma_fd`.
#[pyfunction]
#[pyo3(signature = (occ, eps, n_up, delta = 1.0))]
fn fd_fit(
    occ: Vec<f64>,
    eps: Vec<f64>,
    n_up: usize,
    delta: f64,
) -> PyResult<BTreeMap<&'static str, f64>> {
    let f = thermo::fd_fit(&occ, &eps, n_up, delta).map_err(err)?;
    Ok(BTreeMap::from([
        ("beta", f.beta),
        ("mu", f.mu),
        ("t_fd", f.t_fd),
        ("sigma_fd", f.sigma_fd),
    ]))
}

/// Chaos-border and Breit-Wigner estimates for `n` sites.
#[pyfunction]
#[pyo3(signature = (n, coupling, delta = 1.0, c = thermo::C_CHAOS))]
fn theory(n: usize, coupling: f64, delta: f64, c: f64) -> BTreeMap<&'static str, f64> {
    let e = thermo::theory_estimates(n, delta, coupling, c);
    BTreeMap::from([
        ("N_B", e.n_b as f64),
        ("J_c", e.j_c),
        ("Delta_c", e.delta_c),
        ("Delta_n_scaling", e.delta_n_scaling),
        ("Gamma_BW", e.gamma_bw),
        ("tau_chi", e.tau_chi),
    ])
}

/// Runs the preset ensembles of figure `id` and returns the written paths.
#[pyfunction]
#[pyo3(signature = (id, out, force = false, **overrides))]
fn figure(
    id: u32,
    out: &str,
    force: bool,
    overrides: Option<&Bound<'_, PyDict>>,
) -> PyResult<Vec<String>> {
    let mut pairs = Vec::new();
    if let Some(o) = overrides {
        for (k, v) in o.iter() {
            pairs.push((k.extract::<String>()?, value_text(&v)?));
        }
    }
    let files = ensemble::figure_driver(id, &pairs, Path::new(out), force).map_err(err)?;
    Ok(files.iter().map(|p| p.display().to_string()).collect())
}

#[pymodule]
#[pyo3(name = "qubit_chaos")]
pub fn qubit_chaos_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConfig>()?;
    m.add_class::<PySummary>()?;
    m.add_function(wrap_pyfunction!(run_ensemble, m)?)?;
    m.add_function(wrap_pyfunction!(band_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(eta, m)?)?;
    m.add_function(wrap_pyfunction!(fd_occupations, m)?)?;
    m.add_function(wrap_pyfunction!(fd_fit, m)?)?;
    m.add_function(wrap_pyfunction!(theory, m)?)?;
    m.add_function(wrap_pyfunction!(figure, m)?)?;
    m.add("__version__", output::VERSION)?;
    Ok(())
}
