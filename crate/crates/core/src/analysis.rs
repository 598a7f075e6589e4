//! Quantitative comparison of the exact spectrum against the harmonic
//! approximation: level deviations, tunnel splittings, wavefunction
//! fidelities and cutoff convergence.

use num_complex::Complex64;

use crate::eigen::{sector_spectrum, Spectrum};
use crate::error::{Error, Result};
use crate::model::{well_parameters, ChargeGrid, JunctionParams, SpinSector};
use crate::variational::{ha_spectrum, trial_wavefunction, TrialWaveFunction, Well};

/// One harmonic level versus its numerical counterpart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationRow {
    pub m: usize,
    /// Doublet mean when the pair is resolved, bare level otherwise.
    pub e_num: f64,
    pub e_ha: f64,
    /// |e_num - e_ha|
    pub abs_dev: f64,
    /// abs_dev / |e_ha|
    pub rel_dev: f64,
    /// Splitting of the numerical doublet, when one was paired.
    pub splitting: Option<f64>,
    /// Spectrum indices the row consumed (bookkeeping for wavefunction
    /// exports; the second one is present for doublets).
    pub levels: (usize, Option<usize>),
}

#[derive(Debug, Clone)]
pub struct DeviationTable {
    pub rows: Vec<DeviationRow>,
    pub omega: f64,
}

/// Walk the spectrum from below, greedily pairing consecutive levels into
/// doublets whenever their splitting is below omega/10, and compare each
/// doublet mean (or unpaired level) against the harmonic ladder.
pub fn compare_spectra(
    num: &Spectrum,
    p: &JunctionParams,
    m_count: usize,
) -> Result<DeviationTable> {
    if m_count == 0 {
        return Err(Error::InvalidParameter {
            name: "m_count",
            message: "need at least one level".into(),
        });
    }
    if num.dim() < 2 * m_count {
        return Err(Error::InvalidParameter {
            name: "m_count",
            message: format!(
                "spectrum holds {} levels, pairing up to {m_count} rows may need {}",
                num.dim(),
                2 * m_count
            ),
        });
    }
    let omega = well_parameters(p, SpinSector::Plus)?.omega;
    let ladder = ha_spectrum(p, m_count)?;

    let mut rows = Vec::with_capacity(m_count);
    let mut i = 0usize;
    let e = &num.eigenvalues;
    for level in ladder {
        let (e_num, splitting, levels) =
            if i + 1 < e.len() && e[i + 1] - e[i] < 0.1 * omega {
                let row = (
                    0.5 * (e[i] + e[i + 1]),
                    Some(e[i + 1] - e[i]),
                    (i, Some(i + 1)),
                );
                i += 2;
                row
            } else {
                let row = (e[i], None, (i, None));
                i += 1;
                row
            };
        let abs_dev = (e_num - level.energy).abs();
        rows.push(DeviationRow {
            m: level.m,
            e_num,
            e_ha: level.energy,
            abs_dev,
            rel_dev: abs_dev / level.energy.abs(),
            splitting,
            levels,
        });
    }
    Ok(DeviationTable { rows, omega })
}

/// First harmonic level whose deviation exceeds frac * omega.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationThreshold {
    pub m: usize,
    /// Numerical energy of the first failing level.
    pub energy: f64,
}

pub fn deviation_threshold(table: &DeviationTable, frac: f64) -> Option<DeviationThreshold> {
    table
        .rows
        .iter()
        .find(|row| row.abs_dev > frac * table.omega)
        .map(|row| DeviationThreshold {
            m: row.m,
            energy: row.e_num,
        })
}

/// E_{2m+1} - E_{2m} for the lowest `pair_count` doublets.
pub fn doublet_splittings(num: &Spectrum, pair_count: usize) -> Result<Vec<f64>> {
    if num.dim() < 2 * pair_count {
        return Err(Error::InvalidParameter {
            name: "pair_count",
            message: format!(
                "spectrum holds {} levels, need {}",
                num.dim(),
                2 * pair_count
            ),
        });
    }
    Ok((0..pair_count)
        .map(|m| num.eigenvalues[2 * m + 1] - num.eigenvalues[2 * m])
        .collect())
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter()
        .zip(b.iter())
        .map(|(&x, &y)| x.conj() * y)
        .sum()
}

/// Mean squared cosine of the principal angles between the span of two
/// numerical states and the span of the two trial packets.
///
/// The packets are first orthonormalized symmetrically; if their overlap
/// leaves no second direction (t' = 0 makes left and right coincide), the
/// packets span a single line and the projection onto it is returned
/// instead. Result is clamped to [0, 1] and symmetric in the numerical pair.
pub fn subspace_fidelity(
    num_a: &[Complex64],
    num_b: &[Complex64],
    left: &TrialWaveFunction,
    right: &TrialWaveFunction,
) -> f64 {
    let l = &left.amplitudes;
    let r = &right.amplitudes;
    assert_eq!(l.len(), num_a.len(), "state lengths differ");
    assert_eq!(r.len(), num_b.len(), "state lengths differ");

    let s = inner(l, r);
    let fidelity = if 1.0 - s.norm() < 1e-8 {
        // rank-deficient trial pair: project onto the single direction
        inner(num_a, l).norm_sqr() + inner(num_b, l).norm_sqr()
    } else {
        // symmetric (Loewdin) orthonormalization of (l, r)
        let (t1, t2) = if s.norm() == 0.0 {
            (l.clone(), r.clone())
        } else {
            let lam_p = 1.0 + s.norm();
            let lam_m = 1.0 - s.norm();
            let half_sum = 0.5 * (1.0 / lam_p.sqrt() + 1.0 / lam_m.sqrt());
            let half_diff = 0.5 * (1.0 / lam_p.sqrt() - 1.0 / lam_m.sqrt());
            let e = s / s.norm();
            // S^{-1/2} = [[half_sum, e * half_diff], [conj(e) * half_diff, half_sum]]
            let c11 = Complex64::new(half_sum, 0.0);
            let c21 = e.conj() * half_diff;
            let c12 = e * half_diff;
            let c22 = Complex64::new(half_sum, 0.0);
            let t1: Vec<Complex64> = l
                .iter()
                .zip(r.iter())
                .map(|(&a, &b)| a * c11 + b * c21)
                .collect();
            let t2: Vec<Complex64> = l
                .iter()
                .zip(r.iter())
                .map(|(&a, &b)| a * c12 + b * c22)
                .collect();
            (t1, t2)
        };
        let mut acc = 0.0;
        for n in [num_a, num_b] {
            acc += inner(n, &t1).norm_sqr() + inner(n, &t2).norm_sqr();
        }
        0.5 * acc
    };
    fidelity.clamp(0.0, 1.0)
}

/// Fidelity of each of the lowest doublets against the matching trial pair.
#[derive(Debug, Clone)]
pub struct FidelityReport {
    /// fidelities[m] compares doublet m with the level-m packets.
    pub fidelities: Vec<f64>,
}

pub fn fidelity_report(
    num: &Spectrum,
    p: &JunctionParams,
    doublet_count: usize,
) -> Result<FidelityReport> {
    let meta = num.meta.as_ref().ok_or_else(|| {
        Error::InvalidGrid("spectrum carries no grid metadata; solve with sector_spectrum".into())
    })?;
    if meta.grid.k() != 0.0 {
        return Err(Error::InvalidGrid(format!(
            "fidelities are defined at k = 0, spectrum was solved at k = {}",
            meta.grid.k()
        )));
    }
    if num.dim() < 2 * doublet_count {
        return Err(Error::InvalidParameter {
            name: "doublet_count",
            message: format!(
                "spectrum holds {} levels, need {}",
                num.dim(),
                2 * doublet_count
            ),
        });
    }
    let grid = meta.grid.clone();
    let mut fidelities = Vec::with_capacity(doublet_count);
    for m in 0..doublet_count {
        let left = trial_wavefunction(p, m, Well::Left, &grid)?;
        let right = trial_wavefunction(p, m, Well::Right, &grid)?;
        let a = num.charge_state(2 * m);
        let b = num.charge_state(2 * m + 1);
        fidelities.push(subspace_fidelity(&a, &b, &left, &right));
    }
    Ok(FidelityReport { fidelities })
}

/// Lowest levels as a function of the charge cutoff.
#[derive(Debug, Clone)]
pub struct ConvergenceStudy {
    pub n_max_list: Vec<u32>,
    /// energies[s][l] is level l at cutoff n_max_list[s].
    pub energies: Vec<Vec<f64>>,
    /// drifts[s][l] = |energies[s+1][l] - energies[s][l]|.
    pub drifts: Vec<Vec<f64>>,
}

impl ConvergenceStudy {
    /// Largest per-level drift between steps s and s+1.
    pub fn max_drift(&self, s: usize) -> f64 {
        self.drifts[s].iter().copied().fold(0.0, f64::max)
    }
}

pub fn convergence_study(
    p: &JunctionParams,
    n_max_list: &[u32],
    level_count: usize,
) -> Result<ConvergenceStudy> {
    if n_max_list.len() < 2 || n_max_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter {
            name: "n_max_list",
            message: "cutoff list must be strictly increasing with at least two entries".into(),
        });
    }
    if 4 * n_max_list[0] as usize + 1 < level_count {
        return Err(Error::InvalidParameter {
            name: "level_count",
            message: format!(
                "smallest cutoff {} yields fewer than {level_count} levels",
                n_max_list[0]
            ),
        });
    }
    let mut energies = Vec::with_capacity(n_max_list.len());
    for &n_max in n_max_list {
        let grid = ChargeGrid::new(n_max, 0.0)?;
        let s = sector_spectrum(p, &grid, SpinSector::Plus)?;
        energies.push(s.eigenvalues[..level_count].to_vec());
    }
    let drifts = energies
        .windows(2)
        .map(|w| {
            w[0].iter()
                .zip(w[1].iter())
                .map(|(&a, &b)| (b - a).abs())
                .collect()
        })
        .collect();
    Ok(ConvergenceStudy {
        n_max_list: n_max_list.to_vec(),
        energies,
        drifts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn bare_spectrum(values: &[f64]) -> Spectrum {
        Spectrum {
            eigenvalues: values.to_vec(),
            eigenvectors: values.iter().map(|_| vec![0.0]).collect(),
            meta: None,
        }
    }

    #[test]
    fn pairing_walk_handles_mixed_spectra() {
        // omega = sqrt(2 t) = 0.1, so the pairing threshold is 0.01
        let p = JunctionParams::new(0.005, 0.0).unwrap();
        let num = bare_spectrum(&[0.0, 0.005, 2.0, 3.6, 3.605, 7.0, 7.2, 9.0]);
        let table = compare_spectra(&num, &p, 4).unwrap();
        assert_eq!(table.rows.len(), 4);

        assert_eq!(table.rows[0].levels, (0, Some(1)));
        assert_abs_diff_eq!(table.rows[0].e_num, 0.0025, epsilon = 1e-15);
        assert_abs_diff_eq!(table.rows[0].splitting.unwrap(), 0.005, epsilon = 1e-15);

        assert_eq!(table.rows[1].levels, (2, None));
        assert!(table.rows[1].splitting.is_none());
        assert_abs_diff_eq!(table.rows[1].e_num, 2.0, epsilon = 1e-15);

        assert_eq!(table.rows[2].levels, (3, Some(4)));
        assert_abs_diff_eq!(table.rows[2].e_num, 3.6025, epsilon = 1e-12);

        // 7.2 - 7.0 = 0.2 > 0.01: not a doublet
        assert_eq!(table.rows[3].levels, (5, None));
    }

    #[test]
    fn pairing_requires_enough_levels() {
        let p = JunctionParams::new(0.005, 0.0).unwrap();
        let num = bare_spectrum(&[0.0, 1.0, 2.0]);
        assert!(compare_spectra(&num, &p, 2).is_err());
        assert!(compare_spectra(&num, &p, 0).is_err());
    }

    #[test]
    fn threshold_selection() {
        let rows: Vec<DeviationRow> = [0.01, 0.2, 1.7]
            .iter()
            .enumerate()
            .map(|(m, &abs_dev)| DeviationRow {
                m,
                e_num: -10.0 + m as f64,
                e_ha: 0.0,
                abs_dev,
                rel_dev: 0.0,
                splitting: None,
                levels: (m, None),
            })
            .collect();
        let table = DeviationTable { rows, omega: 1.0 };

        // 0.2 is still below 0.25 * omega, so the first flagged row is m = 2
        let th = deviation_threshold(&table, 0.25).unwrap();
        assert_eq!(th.m, 2);
        assert_abs_diff_eq!(th.energy, -8.0, epsilon = 1e-15);

        // frac = 0 flags the first row with any deviation at all
        assert_eq!(deviation_threshold(&table, 0.0).unwrap().m, 0);
        // huge frac: every level is harmonic
        assert!(deviation_threshold(&table, 1e9).is_none());
    }

    #[test]
    fn splittings_from_sorted_levels() {
        let num = bare_spectrum(&[1.0, 1.25, 3.0, 3.5]);
        let s = doublet_splittings(&num, 2).unwrap();
        assert_eq!(s, vec![0.25, 0.5]);
        assert!(doublet_splittings(&num, 3).is_err());
    }

    fn unit(d: usize, at: usize) -> Vec<Complex64> {
        let mut v = vec![Complex64::ZERO; d];
        v[at] = Complex64::ONE;
        v
    }

    fn packet_from(amplitudes: Vec<Complex64>) -> TrialWaveFunction {
        let grid = ChargeGrid::with_half_steps((amplitudes.len() as u32 - 1) / 2, 0.0).unwrap();
        TrialWaveFunction {
            grid,
            m: 0,
            well_phase: 0.0,
            alpha: 1.0,
            norm_constant: 1.0,
            raw_norm: 1.0,
            amplitudes,
        }
    }

    #[test]
    fn fidelity_of_synthetic_spans() {
        let l = packet_from(unit(5, 0));
        let r = packet_from(unit(5, 1));

        // same span: full fidelity
        assert_abs_diff_eq!(
            subspace_fidelity(&unit(5, 0), &unit(5, 1), &l, &r),
            1.0,
            epsilon = 1e-12
        );
        // half the span matches
        assert_abs_diff_eq!(
            subspace_fidelity(&unit(5, 0), &unit(5, 2), &l, &r),
            0.5,
            epsilon = 1e-12
        );
        // disjoint spans
        assert_abs_diff_eq!(
            subspace_fidelity(&unit(5, 2), &unit(5, 3), &l, &r),
            0.0,
            epsilon = 1e-12
        );
        // symmetric under swapping the numerical pair
        let f_ab = subspace_fidelity(&unit(5, 0), &unit(5, 2), &l, &r);
        let f_ba = subspace_fidelity(&unit(5, 2), &unit(5, 0), &l, &r);
        assert_abs_diff_eq!(f_ab, f_ba, epsilon = 1e-15);
    }

    #[test]
    fn fidelity_with_overlapping_packets() {
        // non-orthogonal trial pair spanning the (e0, e1) plane
        let sqrt_half = 0.5f64.sqrt();
        let mut lv = vec![Complex64::ZERO; 5];
        lv[0] = Complex64::ONE;
        let mut rv = vec![Complex64::ZERO; 5];
        rv[0] = Complex64::new(sqrt_half, 0.0);
        rv[1] = Complex64::new(sqrt_half, 0.0);
        let l = packet_from(lv);
        let r = packet_from(rv);
        let f = subspace_fidelity(&unit(5, 0), &unit(5, 1), &l, &r);
        assert_abs_diff_eq!(f, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn fidelity_rank_deficient_fallback() {
        // identical packets: only one direction to project on
        let l = packet_from(unit(5, 0));
        let r = packet_from(unit(5, 0));
        assert_abs_diff_eq!(
            subspace_fidelity(&unit(5, 0), &unit(5, 1), &l, &r),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            subspace_fidelity(&unit(5, 1), &unit(5, 2), &l, &r),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn convergence_study_validation() {
        let p = JunctionParams::new(2.0, 0.0).unwrap();
        assert!(convergence_study(&p, &[4], 2).is_err());
        assert!(convergence_study(&p, &[4, 4], 2).is_err());
        assert!(convergence_study(&p, &[6, 4], 2).is_err());
        assert!(convergence_study(&p, &[1, 2], 30).is_err());

        let s = convergence_study(&p, &[3, 5, 8], 4).unwrap();
        assert_eq!(s.energies.len(), 3);
        assert_eq!(s.drifts.len(), 2);
        assert_eq!(s.drifts[0].len(), 4);
        // a shallow well converges quickly: the last step is already small
        assert!(s.max_drift(1) < 1e-6, "drift {}", s.max_drift(1));
    }

    proptest! {
        #[test]
        fn fidelity_stays_in_unit_interval(seed_re in proptest::collection::vec(-1.0f64..1.0, 20)) {
            // build two orthonormal numerical vectors and two normalized
            // packets out of the raw samples
            let d = 5;
            let mk = |off: usize| -> Vec<Complex64> {
                (0..d).map(|j| Complex64::new(seed_re[off + j], seed_re[off + j + 10] * 0.5)).collect()
            };
            let normalize = |v: Vec<Complex64>| -> Option<Vec<Complex64>> {
                let n: f64 = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                if n <= 1e-3 { return None; }
                Some(v.into_iter().map(|c| c / n).collect())
            };
            let a = normalize(mk(0));
            prop_assume!(a.is_some());
            let a = a.unwrap();
            let mut b = mk(5);
            // Gram-Schmidt b against a
            let ov = inner(&a, &b);
            for j in 0..d { b[j] -= ov * a[j]; }
            let b = normalize(b);
            prop_assume!(b.is_some());
            let b = b.unwrap();

            let lv = normalize(mk(2));
            prop_assume!(lv.is_some());
            let lv = lv.unwrap();
            let rv = normalize(mk(4));
            prop_assume!(rv.is_some());
            let rv = rv.unwrap();
            let f = subspace_fidelity(&a, &b, &packet_from(lv.clone()), &packet_from(rv.clone()));
            prop_assert!((0.0..=1.0).contains(&f));
            let g = subspace_fidelity(&b, &a, &packet_from(lv), &packet_from(rv));
            prop_assert!((f - g).abs() <= 1e-9);
        }
    }
}
