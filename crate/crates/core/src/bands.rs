//! Band structure over the Bloch offset k in [0, 1/2).
//!
//! The spectrum is solved independently at each sampled offset and the lowest
//! bands are stitched together by eigenvector continuity, not by sorted
//! position, so individual bands stay smooth through crossings.

use std::thread;

use crate::eigen::{sector_spectrum, Spectrum};
use crate::error::{Error, Result};
use crate::model::{ChargeGrid, JunctionParams, SpinSector};

/// Tracked bands E_m(k) with the eigenvectors that define the tracking.
#[derive(Debug, Clone)]
pub struct BandStructure {
    pub params: JunctionParams,
    pub half_steps: u32,
    /// Sampled offsets k_j = j / (2 k_count), j = 0 .. k_count-1.
    pub k_grid: Vec<f64>,
    /// bands[m][j] is the energy of band m at k_grid[j].
    pub bands: Vec<Vec<f64>>,
    /// states[m][j] is the gauge-basis eigenvector backing bands[m][j].
    pub states: Vec<Vec<Vec<f64>>>,
    /// Worst overlap between consecutive tracked states, projected onto the
    /// local degenerate cluster; near 1 when tracking is trustworthy.
    pub min_tracking_overlap: f64,
}

impl BandStructure {
    pub fn band_count(&self) -> usize {
        self.bands.len()
    }

    pub fn k_count(&self) -> usize {
        self.k_grid.len()
    }

    /// Grid used at sample j (same cutoff, offset k_j).
    pub fn grid_at(&self, j: usize) -> ChargeGrid {
        ChargeGrid::with_half_steps(self.half_steps, self.k_grid[j])
            .expect("sampled offsets lie in [0, 1/2)")
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(&x, &y)| x * y).sum()
}

/// Solve the plus sector on k_j = j / (2 k_count) and track the lowest
/// `m_count` bands by maximal overlap with the previous offset. The offsets
/// are solved in parallel; the result does not depend on thread count.
pub fn band_sweep(
    p: &JunctionParams,
    n_max: u32,
    m_count: usize,
    k_count: usize,
) -> Result<BandStructure> {
    if k_count < 2 {
        return Err(Error::InvalidParameter {
            name: "k_count",
            message: format!("need at least 2 offsets, got {k_count}"),
        });
    }
    if m_count == 0 {
        return Err(Error::InvalidParameter {
            name: "m_count",
            message: "need at least one band".into(),
        });
    }
    let dim = 4 * n_max as usize + 1;
    if m_count > dim {
        return Err(Error::InvalidParameter {
            name: "m_count",
            message: format!("{m_count} bands requested from a dimension-{dim} grid"),
        });
    }

    let k_grid: Vec<f64> = (0..k_count)
        .map(|j| j as f64 / (2.0 * k_count as f64))
        .collect();

    let n_threads = thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(k_count)
        .max(1);
    let mut slots: Vec<Option<Result<Spectrum>>> = Vec::new();
    slots.resize_with(k_count, || None);

    thread::scope(|scope| {
        let mut handles = Vec::new();
        for chunk_start in 0..n_threads {
            let k_grid = &k_grid;
            handles.push(scope.spawn(move || {
                let mut out = Vec::new();
                let mut j = chunk_start;
                while j < k_count {
                    let result = ChargeGrid::new(n_max, k_grid[j])
                        .and_then(|g| sector_spectrum(p, &g, SpinSector::Plus));
                    out.push((j, result));
                    j += n_threads;
                }
                out
            }));
        }
        for h in handles {
            for (j, r) in h.join().expect("band worker panicked") {
                slots[j] = Some(r);
            }
        }
    });

    let mut spectra = Vec::with_capacity(k_count);
    for (j, slot) in slots.into_iter().enumerate() {
        match slot.expect("every offset was scheduled") {
            Ok(s) => spectra.push(s),
            Err(Error::NumericalFailure { index, message }) => {
                return Err(Error::NumericalFailure {
                    index,
                    message: format!("{message} at k = {}", k_grid[j]),
                })
            }
            Err(e) => return Err(e),
        }
    }

    let mut bands = vec![Vec::with_capacity(k_count); m_count];
    let mut states: Vec<Vec<Vec<f64>>> = vec![Vec::with_capacity(k_count); m_count];
    let mut min_overlap = 1.0f64;

    let mut current: Vec<Vec<f64>> = Vec::with_capacity(m_count);
    for m in 0..m_count {
        bands[m].push(spectra[0].eigenvalues[m]);
        states[m].push(spectra[0].eigenvectors[m].clone());
        current.push(spectra[0].eigenvectors[m].clone());
    }

    for j in 1..k_count {
        let sp = &spectra[j];
        let d = sp.dim();
        let mut taken = vec![false; d];
        let mut next: Vec<Vec<f64>> = Vec::with_capacity(m_count);
        for (m, prev) in current.iter().enumerate() {
            let mut best_i = usize::MAX;
            let mut best_ov = -1.0f64;
            for i in 0..d {
                if taken[i] {
                    continue;
                }
                let ov = dot(prev, &sp.eigenvectors[i]).abs();
                if ov > best_ov {
                    best_ov = ov;
                    best_i = i;
                }
            }
            taken[best_i] = true;

            // within an (almost) degenerate cluster the individual vectors
            // rotate freely; judge tracking by the projection on the cluster
            let lam = sp.eigenvalues[best_i];
            let cluster_tol = 1e-6 * (1.0 + lam.abs());
            let mut proj2 = 0.0;
            for i in 0..d {
                if (sp.eigenvalues[i] - lam).abs() <= cluster_tol {
                    let c = dot(prev, &sp.eigenvectors[i]);
                    proj2 += c * c;
                }
            }
            min_overlap = min_overlap.min(proj2.sqrt());

            bands[m].push(lam);
            next.push(sp.eigenvectors[best_i].clone());
        }
        for (m, v) in next.iter().enumerate() {
            states[m].push(v.clone());
        }
        current = next;
    }

    Ok(BandStructure {
        params: *p,
        half_steps: 2 * n_max,
        k_grid,
        bands,
        states,
        min_tracking_overlap: min_overlap,
    })
}

fn check_band_index(b: &BandStructure, m: usize, need_next: bool) -> Result<()> {
    let limit = if need_next {
        b.band_count().saturating_sub(1)
    } else {
        b.band_count()
    };
    if m >= limit {
        return Err(Error::InvalidParameter {
            name: "m",
            message: format!(
                "band {m} out of range for a sweep with {} tracked bands",
                b.band_count()
            ),
        });
    }
    Ok(())
}

/// Spread max - min of band m over the sampled offsets.
pub fn bandwidth(b: &BandStructure, m: usize) -> Result<f64> {
    check_band_index(b, m, false)?;
    let band = &b.bands[m];
    let max = band.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = band.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(max - min)
}

/// min_k E_{m+1}(k) - max_k E_m(k); negative when the tracked bands overlap.
pub fn band_gap(b: &BandStructure, m: usize) -> Result<f64> {
    check_band_index(b, m, true)?;
    let upper = b.bands[m + 1]
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let lower = b.bands[m].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(upper - lower)
}

/// Group velocity integrand <dH/dk> = sum_j |v_j|^2 * 2 (n_j + k), evaluated
/// on a gauge-basis eigenvector (the gauge phases drop out of the moduli).
pub fn hf_integrand(state: &[f64], grid: &ChargeGrid) -> f64 {
    assert_eq!(state.len(), grid.dim(), "state does not match grid");
    state
        .iter()
        .zip(grid.points().iter())
        .map(|(&w, &n)| w * w * 2.0 * n)
        .sum()
}

/// Closed-form width estimate of the harmonic approximation: its levels are
/// offset-independent, so the exact sum rule integral_0^{1/2} <dH/dk> dk
/// collapses to integral_0^{1/2} 2k dk = 1/4.
pub fn ha_bandwidth_estimate() -> f64 {
    0.25
}

/// Trapezoid quadrature of the group-velocity integrand over the sampled
/// offsets only; no extrapolation toward k = 1/2 is attempted, so for a flat
/// band this reports ~0 while the free rotor reports the sampled part of 1/4.
pub fn hf_integral(b: &BandStructure, m: usize) -> Result<f64> {
    check_band_index(b, m, false)?;
    let mut acc = 0.0;
    let mut prev_val = hf_integrand(&b.states[m][0], &b.grid_at(0));
    for j in 1..b.k_count() {
        let val = hf_integrand(&b.states[m][j], &b.grid_at(j));
        acc += 0.5 * (val + prev_val) * (b.k_grid[j] - b.k_grid[j - 1]);
        prev_val = val;
    }
    Ok(acc)
}
