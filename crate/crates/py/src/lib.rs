//! Python bindings for the junction spectrum library. Everything is exposed
//! as plain floats, tuples and lists so the module needs no numpy at import
//! time.

use std::collections::HashMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use jjbus::model::{ChargeGrid, JunctionParams, SpinSector};

fn err(e: jjbus::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn params(t: f64, t_prime: f64) -> PyResult<JunctionParams> {
    JunctionParams::new(t, t_prime).map_err(err)
}

fn sector_from_sign(sign: i32) -> PyResult<SpinSector> {
    match sign {
        1 => Ok(SpinSector::Plus),
        -1 => Ok(SpinSector::Minus),
        other => Err(PyValueError::new_err(format!(
            "sector must be +1 or -1, got {other}"
        ))),
    }
}

/// Closed-form wavepacket parameters (alpha, beta).
#[pyfunction]
fn ha_parameters(t: f64, t_prime: f64) -> PyResult<(f64, f64)> {
    let v = jjbus::variational::ha_parameters(&params(t, t_prime)?).map_err(err)?;
    Ok((v.alpha, v.beta))
}

/// Harmonic ladder energies for m = 0 .. m_count-1.
#[pyfunction]
fn ha_spectrum(t: f64, t_prime: f64, m_count: usize) -> PyResult<Vec<f64>> {
    let levels = jjbus::variational::ha_spectrum(&params(t, t_prime)?, m_count).map_err(err)?;
    Ok(levels.into_iter().map(|l| l.energy).collect())
}

/// Double-well data: minima, depth, curvature and level spacing.
#[pyfunction]
fn well_parameters(t: f64, t_prime: f64) -> PyResult<HashMap<String, f64>> {
    let w = jjbus::model::well_parameters(&params(t, t_prime)?, SpinSector::Plus).map_err(err)?;
    let mut out = HashMap::new();
    out.insert("theta_min_0".into(), w.theta_minima[0]);
    out.insert("theta_min_1".into(), w.theta_minima[1]);
    out.insert("depth".into(), w.depth);
    out.insert("curvature_coeff".into(), w.curvature_coeff);
    out.insert("omega".into(), w.omega);
    Ok(out)
}

/// Variational energy of level m at wavepacket parameters (alpha, beta).
#[pyfunction]
fn energy_functional(t: f64, t_prime: f64, m: usize, alpha: f64, beta: f64) -> PyResult<f64> {
    Ok(jjbus::variational::energy_functional(
        &params(t, t_prime)?,
        m,
        alpha,
        beta,
    ))
}

/// Matrix element <phi_m| e^{i a theta} |phi_m> as (re, im).
#[pyfunction]
fn shift_expectation(m: usize, a: f64, alpha: f64, beta: f64) -> (f64, f64) {
    let v = jjbus::variational::shift_expectation(m, a, alpha, beta);
    (v.re, v.im)
}

/// Minimize the variational energy of level m: returns (alpha, beta, energy).
#[pyfunction]
fn optimize_parameters(t: f64, t_prime: f64, m: usize) -> PyResult<(f64, f64, f64)> {
    let o = jjbus::variational::optimize_parameters(&params(t, t_prime)?, m).map_err(err)?;
    Ok((o.alpha, o.beta, o.energy))
}

/// Lowest `count` exact eigenvalues of one spin sector at Bloch offset k.
#[pyfunction]
#[pyo3(signature = (t, t_prime, n_max, k = 0.0, count = 8, sector = 1))]
fn spectrum_eigenvalues(
    t: f64,
    t_prime: f64,
    n_max: u32,
    k: f64,
    count: usize,
    sector: i32,
) -> PyResult<Vec<f64>> {
    let p = params(t, t_prime)?;
    let grid = ChargeGrid::new(n_max, k).map_err(err)?;
    let s = jjbus::eigen::sector_spectrum(&p, &grid, sector_from_sign(sector)?).map_err(err)?;
    if s.dim() < count {
        return Err(PyValueError::new_err(format!(
            "grid yields {} levels, {count} requested",
            s.dim()
        )));
    }
    Ok(s.eigenvalues[..count].to_vec())
}

/// Tunnel splittings E_{2m+1} - E_{2m} of the lowest doublets at k = 0.
#[pyfunction]
fn doublet_splittings(
    t: f64,
    t_prime: f64,
    n_max: u32,
    pair_count: usize,
) -> PyResult<Vec<f64>> {
    let p = params(t, t_prime)?;
    let grid = ChargeGrid::new(n_max, 0.0).map_err(err)?;
    let s = jjbus::eigen::sector_spectrum(&p, &grid, SpinSector::Plus).map_err(err)?;
    jjbus::analysis::doublet_splittings(&s, pair_count).map_err(err)
}

/// Rows (m, e_num, e_ha, abs_dev) of the harmonic-ladder comparison.
#[pyfunction]
fn deviation_table(
    t: f64,
    t_prime: f64,
    n_max: u32,
    m_count: usize,
) -> PyResult<Vec<(usize, f64, f64, f64)>> {
    let p = params(t, t_prime)?;
    let grid = ChargeGrid::new(n_max, 0.0).map_err(err)?;
    let s = jjbus::eigen::sector_spectrum(&p, &grid, SpinSector::Plus).map_err(err)?;
    let table = jjbus::analysis::compare_spectra(&s, &p, m_count).map_err(err)?;
    Ok(table
        .rows
        .iter()
        .map(|r| (r.m, r.e_num, r.e_ha, r.abs_dev))
        .collect())
}

/// First level index (and its energy) whose deviation exceeds frac * omega,
/// or None when every level stays harmonic.
#[pyfunction]
fn deviation_threshold(
    t: f64,
    t_prime: f64,
    n_max: u32,
    m_count: usize,
    frac: f64,
) -> PyResult<Option<(usize, f64)>> {
    let p = params(t, t_prime)?;
    let grid = ChargeGrid::new(n_max, 0.0).map_err(err)?;
    let s = jjbus::eigen::sector_spectrum(&p, &grid, SpinSector::Plus).map_err(err)?;
    let table = jjbus::analysis::compare_spectra(&s, &p, m_count).map_err(err)?;
    Ok(jjbus::analysis::deviation_threshold(&table, frac).map(|th| (th.m, th.energy)))
}

/// Widths max_k E_m(k) - min_k E_m(k) of the lowest tracked bands.
#[pyfunction]
fn band_widths(
    t: f64,
    t_prime: f64,
    n_max: u32,
    m_count: usize,
    k_count: usize,
) -> PyResult<Vec<f64>> {
    let p = params(t, t_prime)?;
    let b = jjbus::bands::band_sweep(&p, n_max, m_count, k_count).map_err(err)?;
    (0..m_count)
        .map(|m| jjbus::bands::bandwidth(&b, m).map_err(err))
        .collect()
}

/// Closed-form harmonic estimate of the accumulated band width, exactly 1/4.
#[pyfunction]
fn ha_bandwidth_estimate() -> f64 {
    jjbus::bands::ha_bandwidth_estimate()
}

/// Subspace fidelity of each low doublet against its trial packets.
#[pyfunction]
fn fidelities(t: f64, t_prime: f64, n_max: u32, doublet_count: usize) -> PyResult<Vec<f64>> {
    let p = params(t, t_prime)?;
    let grid = ChargeGrid::new(n_max, 0.0).map_err(err)?;
    let s = jjbus::eigen::sector_spectrum(&p, &grid, SpinSector::Plus).map_err(err)?;
    let report = jjbus::analysis::fidelity_report(&s, &p, doublet_count).map_err(err)?;
    Ok(report.fidelities)
}

/// Charge-basis samples (re, im) of a trial packet on the k = 0 grid.
#[pyfunction]
#[pyo3(signature = (t, t_prime, n_max, m = 0, well = "left"))]
fn trial_amplitudes(
    t: f64,
    t_prime: f64,
    n_max: u32,
    m: usize,
    well: &str,
) -> PyResult<Vec<(f64, f64)>> {
    let which = match well {
        "left" => jjbus::variational::Well::Left,
        "right" => jjbus::variational::Well::Right,
        other => {
            return Err(PyValueError::new_err(format!(
                "well must be \"left\" or \"right\", got \"{other}\""
            )))
        }
    };
    let p = params(t, t_prime)?;
    let grid = ChargeGrid::new(n_max, 0.0).map_err(err)?;
    let w = jjbus::variational::trial_wavefunction(&p, m, which, &grid).map_err(err)?;
    Ok(w.amplitudes.iter().map(|c| (c.re, c.im)).collect())
}

#[pymodule]
fn jjbus_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(ha_parameters, m)?)?;
    m.add_function(wrap_pyfunction!(ha_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(well_parameters, m)?)?;
    m.add_function(wrap_pyfunction!(energy_functional, m)?)?;
    m.add_function(wrap_pyfunction!(shift_expectation, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_parameters, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum_eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(doublet_splittings, m)?)?;
    m.add_function(wrap_pyfunction!(deviation_table, m)?)?;
    m.add_function(wrap_pyfunction!(deviation_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(band_widths, m)?)?;
    m.add_function(wrap_pyfunction!(ha_bandwidth_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(fidelities, m)?)?;
    m.add_function(wrap_pyfunction!(trial_amplitudes, m)?)?;
    Ok(())
}
