//! Exact and variational low-energy spectra of a large Josephson junction
//! coupled to a charge qubit.
//!
//! The dimensionless Hamiltonian H = n^2 - t cos(theta) + s t' sin(theta/2)
//! is diagonalized in the half-integer charge basis ([`eigen`]), expanded
//! around its double-well minima in a harmonic approximation and refined
//! variationally with Gaussian wavepackets ([`variational`]), swept over the
//! Bloch offset ([`bands`]) and quantified against the harmonic ladder
//! ([`analysis`]). The [`cli`] module backs the `jjbus` binary.

pub mod analysis;
pub mod bands;
pub mod cli;
pub mod eigen;
pub mod error;
pub mod model;
pub mod variational;

pub use analysis::{
    compare_spectra, convergence_study, deviation_threshold, doublet_splittings, fidelity_report,
    subspace_fidelity, ConvergenceStudy, DeviationRow, DeviationTable, DeviationThreshold,
    FidelityReport,
};
pub use bands::{
    band_gap, band_sweep, bandwidth, ha_bandwidth_estimate, hf_integral, hf_integrand,
    BandStructure,
};
pub use eigen::{
    eigh, eigh_dense, hermitian_eigenvalues, residuals, residuals_dense, sector_spectrum,
    tridiag_eig, tridiagonalize, tridiagonalize_dense, DenseMatrix, ResidualReport, Spectrum,
    SpectrumMeta, TridiagonalForm,
};
pub use error::{Error, Result};
pub use model::{
    build_hamiltonian, gauge_transform, potential, reduce_circuit, well_parameters, ChargeGrid,
    CircuitParams, HermitianBandMatrix, JunctionParams, RealSymmetricBandMatrix, SpinSector,
    WellInfo,
};
pub use variational::{
    abc_elements, energy_functional, ha_parameters, ha_spectrum, hermite, laguerre,
    optimize_parameters, shift_expectation, trial_wavefunction, AbcElements, HaLevel,
    OptimizedParams, TrialWaveFunction, VariationalParams, Well,
};
