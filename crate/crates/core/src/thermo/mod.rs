//! Eigenstate thermalization diagnostics: entropies, occupation numbers,
//! Fermi-Dirac fits and temperatures.

mod fermi_dirac;
mod occupation;
mod temperature;
mod theory;

pub use fermi_dirac::{
    beta_grid, fd_fit, fd_mu_solve, fd_occupations, logistic, sigma_fd, FdFit, BETA_MAX,
};
pub use occupation::{
    eigenstate_entropy, occupation_numbers, rms_difference, sigma_s, vector_entropy,
    OccupationProfile,
};
pub use temperature::{
    canonical_energy, dos_fit, t_canonical, t_thermodynamic, CanonicalTemperature, DosFit,
    TemperatureSet, BETA_CAN_MAX,
};
pub use theory::{
    center_spacing_from_moments, theory_estimates, TheoryEstimates, C_CHAOS, C_THERMALIZATION,
};
