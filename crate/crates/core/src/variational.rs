//! Harmonic approximation of the double well and its variational refinement.
//!
//! Trial states are Gaussian wavepackets in charge, H_m(alpha n) e^{-alpha^2
//! n^2 / 2} e^{i n beta}: harmonic-oscillator levels of width 1/alpha sitting
//! at phase beta. All matrix elements of the Hamiltonian in these states
//! reduce to Laguerre polynomials, so the variational energy is available in
//! closed form and can be minimized exactly.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{well_parameters, ChargeGrid, JunctionParams, SpinSector};

/// Physicists' Hermite polynomial H_m(x).
pub fn hermite(m: usize, x: f64) -> f64 {
    let mut prev = 1.0;
    if m == 0 {
        return prev;
    }
    let mut cur = 2.0 * x;
    for j in 1..m {
        let next = 2.0 * x * cur - 2.0 * j as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Laguerre polynomial L_m(x).
pub fn laguerre(m: usize, x: f64) -> f64 {
    let mut prev = 1.0;
    if m == 0 {
        return prev;
    }
    let mut cur = 1.0 - x;
    for j in 1..m {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 - x) * cur - jf * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

fn factorial(m: usize) -> f64 {
    (1..=m).map(|j| j as f64).product()
}

/// Width and displacement of the variational wavepacket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariationalParams {
    pub alpha: f64,
    pub beta: f64,
}

/// Closed-form stationary point of the small-alpha expansion:
/// sin(beta/2) = t'/(4t), alpha^4 = 32 t / (16 t^2 - t'^2).
pub fn ha_parameters(p: &JunctionParams) -> Result<VariationalParams> {
    let (t, tp) = (p.t(), p.t_prime());
    if t <= 0.0 || tp >= 4.0 * t {
        return Err(Error::NoHarmonicWell { t, t_prime: tp });
    }
    let alpha = (32.0 * t / (16.0 * t * t - tp * tp)).powf(0.25);
    let beta = 2.0 * (tp / (4.0 * t)).asin();
    Ok(VariationalParams { alpha, beta })
}

/// One oscillator level of the harmonic approximation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HaLevel {
    pub m: usize,
    pub energy: f64,
}

/// Equally spaced harmonic levels (m + 1/2) omega - t - t'^2/(8t),
/// for m = 0 .. m_count-1.
pub fn ha_spectrum(p: &JunctionParams, m_count: usize) -> Result<Vec<HaLevel>> {
    let w = well_parameters(p, SpinSector::Plus)?;
    Ok((0..m_count)
        .map(|m| HaLevel {
            m,
            energy: (m as f64 + 0.5) * w.omega + w.depth,
        })
        .collect())
}

/// <phi_m| e^{i a theta} |phi_m> for the normalized wavepacket: a phase
/// e^{-i a beta} times e^{-a^2 alpha^2 / 4} L_m(a^2 alpha^2 / 2).
pub fn shift_expectation(m: usize, a: f64, alpha: f64, beta: f64) -> Complex64 {
    let x = a * a * alpha * alpha;
    let modulus = (-0.25 * x).exp() * laguerre(m, 0.5 * x);
    Complex64::from_polar(1.0, -a * beta) * modulus
}

/// Variational energy of level m at wavepacket parameters (alpha, beta).
/// Requires alpha > 0; the kinetic term diverges as alpha -> 0.
pub fn energy_functional(p: &JunctionParams, m: usize, alpha: f64, beta: f64) -> f64 {
    let (t, tp) = (p.t(), p.t_prime());
    let a2 = alpha * alpha;
    let kinetic = (2.0 * m as f64 + 1.0) / (2.0 * a2);
    // cos(theta) shifts charge by 1, sin(theta/2) by 1/2; both expectation
    // values are shift_expectation moduli with the matching phase.
    let cos_term = t * beta.cos() * (-0.25 * a2).exp() * laguerre(m, 0.5 * a2);
    let sin_term = tp * (0.5 * beta).sin() * (-0.0625 * a2).exp() * laguerre(m, 0.125 * a2);
    kinetic - cos_term - sin_term
}

/// The quadratic-form coefficients of the energy expanded to second order in
/// the displacement away from (alpha, beta).
///
/// `a` is the energy itself; the widely circulated closed form drops a factor
/// of t in its cos(beta) term, so both the repaired value (`a`) and the
/// verbatim one (`a_uncorrected`) are reported. `c` uses the sign required by
/// stationarity, d/dbeta of the energy; `c_flipped` keeps the sign the closed
/// form is usually quoted with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbcElements {
    pub a: f64,
    pub a_uncorrected: f64,
    pub b: f64,
    pub c: f64,
    pub c_flipped: f64,
}

pub fn abc_elements(p: &JunctionParams, m: usize, alpha: f64, beta: f64) -> AbcElements {
    let (t, tp) = (p.t(), p.t_prime());
    let a2 = alpha * alpha;
    let mf = m as f64;
    let e4 = (-0.25 * a2).exp();
    let e16 = (-0.0625 * a2).exp();
    let kinetic = (2.0 * mf + 1.0) / (2.0 * a2);

    let a = kinetic
        + (mf * a2 * t / 2.0 - t * beta.cos()) * e4
        + (mf * a2 / 8.0 - 1.0) * tp * (0.5 * beta).sin() * e16;
    let a_uncorrected = kinetic
        + (mf * a2 * t / 2.0 - beta.cos()) * e4
        + (mf * a2 / 8.0 - 1.0) * tp * (0.5 * beta).sin() * e16;
    let b = 1.0 / (2.0 * a2)
        - (a2 / 16.0) * (4.0 * t * beta.cos() * e4 + tp * (0.5 * beta).sin() * e16);
    let c_magnitude_1 = t * beta.sin() * e4;
    let c_magnitude_2 = 0.5 * tp * (0.5 * beta).cos() * e16;
    AbcElements {
        a,
        a_uncorrected,
        b,
        c: c_magnitude_1 - c_magnitude_2,
        c_flipped: c_magnitude_1 + c_magnitude_2,
    }
}

/// Variational minimum for level m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizedParams {
    pub alpha: f64,
    pub beta: f64,
    pub energy: f64,
}

/// Minimize the energy functional over (alpha, beta), starting from the
/// closed-form point. Deterministic: a fixed-shape Nelder-Mead descent
/// followed by a finite-difference Newton polish.
pub fn optimize_parameters(p: &JunctionParams, m: usize) -> Result<OptimizedParams> {
    let seed = ha_parameters(p)?;
    let f = |x: [f64; 2]| -> f64 {
        if x[0] <= 0.0 {
            return f64::INFINITY;
        }
        energy_functional(p, m, x[0], x[1])
    };

    let mut simplex = [
        [seed.alpha, seed.beta],
        [seed.alpha * 1.1, seed.beta],
        [seed.alpha, seed.beta + 0.1],
    ];
    let mut values = simplex.map(f);

    let mut converged = false;
    for _ in 0..2000 {
        // order: simplex[0] best, simplex[2] worst
        let mut order = [0usize, 1, 2];
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        simplex = order.map(|i| simplex[i]);
        values = order.map(|i| values[i]);

        let spread = values[2] - values[0];
        let width = (0..2)
            .map(|d| {
                simplex
                    .iter()
                    .map(|v| (v[d] - simplex[0][d]).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if width < 1e-10 && spread < 1e-12 {
            converged = true;
            break;
        }

        let centroid = [
            0.5 * (simplex[0][0] + simplex[1][0]),
            0.5 * (simplex[0][1] + simplex[1][1]),
        ];
        let reflect = [
            2.0 * centroid[0] - simplex[2][0],
            2.0 * centroid[1] - simplex[2][1],
        ];
        let fr = f(reflect);
        if fr < values[0] {
            let expand = [
                3.0 * centroid[0] - 2.0 * simplex[2][0],
                3.0 * centroid[1] - 2.0 * simplex[2][1],
            ];
            let fe = f(expand);
            if fe < fr {
                simplex[2] = expand;
                values[2] = fe;
            } else {
                simplex[2] = reflect;
                values[2] = fr;
            }
        } else if fr < values[1] {
            simplex[2] = reflect;
            values[2] = fr;
        } else {
            let (point, limit) = if fr < values[2] {
                // outside contraction
                (
                    [
                        centroid[0] + 0.5 * (reflect[0] - centroid[0]),
                        centroid[1] + 0.5 * (reflect[1] - centroid[1]),
                    ],
                    fr,
                )
            } else {
                // inside contraction
                (
                    [
                        centroid[0] - 0.5 * (centroid[0] - simplex[2][0]),
                        centroid[1] - 0.5 * (centroid[1] - simplex[2][1]),
                    ],
                    values[2],
                )
            };
            let fc = f(point);
            if fc < limit {
                simplex[2] = point;
                values[2] = fc;
            } else {
                for i in 1..3 {
                    simplex[i] = [
                        0.5 * (simplex[0][0] + simplex[i][0]),
                        0.5 * (simplex[0][1] + simplex[i][1]),
                    ];
                    values[i] = f(simplex[i]);
                }
            }
        }
    }
    if !converged {
        return Err(Error::NumericalFailure {
            index: m,
            message: "variational simplex did not converge".into(),
        });
    }

    let mut x = simplex[0];
    let mut fx = values[0];
    // Newton polish pushes the finite-difference gradient to solver noise
    for _ in 0..12 {
        let h = 1e-5;
        let g = [
            (f([x[0] + h, x[1]]) - f([x[0] - h, x[1]])) / (2.0 * h),
            (f([x[0], x[1] + h]) - f([x[0], x[1] - h])) / (2.0 * h),
        ];
        let hh = 1e-4;
        let h11 = (f([x[0] + hh, x[1]]) - 2.0 * fx + f([x[0] - hh, x[1]])) / (hh * hh);
        let h22 = (f([x[0], x[1] + hh]) - 2.0 * fx + f([x[0], x[1] - hh])) / (hh * hh);
        let h12 = (f([x[0] + hh, x[1] + hh]) - f([x[0] + hh, x[1] - hh])
            - f([x[0] - hh, x[1] + hh])
            + f([x[0] - hh, x[1] - hh]))
            / (4.0 * hh * hh);
        let det = h11 * h22 - h12 * h12;
        if !det.is_finite() || det.abs() < 1e-12 * (h11.abs() + h22.abs() + 1.0) {
            break;
        }
        let step = [
            -(h22 * g[0] - h12 * g[1]) / det,
            -(h11 * g[1] - h12 * g[0]) / det,
        ];
        let norm = step[0].abs().max(step[1].abs());
        if norm > 0.05 {
            break;
        }
        let cand = [x[0] + step[0], x[1] + step[1]];
        let fc = f(cand);
        if fc <= fx + 1e-12 {
            x = cand;
            fx = fc;
        } else {
            break;
        }
        if norm < 1e-13 {
            break;
        }
    }

    Ok(OptimizedParams {
        alpha: x[0],
        beta: x[1],
        energy: fx,
    })
}

/// Which of the two degenerate wells the packet sits in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Well {
    Left,
    Right,
}

/// Discretized wavepacket on a k = 0 charge grid.
#[derive(Debug, Clone)]
pub struct TrialWaveFunction {
    pub grid: ChargeGrid,
    pub m: usize,
    /// Phase-space position of the packet: theta_0 for the left well,
    /// 2 pi - theta_0 for the right.
    pub well_phase: f64,
    pub alpha: f64,
    /// Continuum normalization constant sqrt(alpha / (sqrt(pi) 2^m m!)).
    pub norm_constant: f64,
    /// Riemann norm of the raw samples (half-integer spacing); close to 1
    /// when the grid resolves the packet.
    pub raw_norm: f64,
    /// Samples renormalized to unit l2 norm.
    pub amplitudes: Vec<Complex64>,
}

pub fn trial_wavefunction(
    p: &JunctionParams,
    m: usize,
    well: Well,
    grid: &ChargeGrid,
) -> Result<TrialWaveFunction> {
    if grid.k() != 0.0 {
        return Err(Error::InvalidGrid(format!(
            "trial states live on the k = 0 grid, got offset {}",
            grid.k()
        )));
    }
    if m > 60 {
        return Err(Error::InvalidParameter {
            name: "m",
            message: format!("level index {m} too large for a stable factorial"),
        });
    }
    let params = ha_parameters(p)?;
    let alpha = params.alpha;
    let theta0 = params.beta;
    let well_phase = match well {
        Well::Left => theta0,
        Well::Right => 2.0 * std::f64::consts::PI - theta0,
    };
    let norm_constant =
        (alpha / (std::f64::consts::PI.sqrt() * 2.0f64.powi(m as i32) * factorial(m))).sqrt();

    let mut amplitudes: Vec<Complex64> = grid
        .points()
        .iter()
        .map(|&n| {
            let envelope = norm_constant * (-0.5 * alpha * alpha * n * n).exp() * hermite(m, alpha * n);
            Complex64::from_polar(1.0, n * well_phase) * envelope
        })
        .collect();
    let sum_sq: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum();
    if sum_sq <= 0.0 {
        return Err(Error::InvalidGrid(
            "grid does not resolve the trial packet".into(),
        ));
    }
    let raw_norm = (0.5 * sum_sq).sqrt();
    let inv = 1.0 / sum_sq.sqrt();
    for c in &mut amplitudes {
        *c *= inv;
    }
    Ok(TrialWaveFunction {
        grid: grid.clone(),
        m,
        well_phase,
        alpha,
        norm_constant,
        raw_norm,
        amplitudes,
    })
}
