//! Dimensionless junction model, charge-basis grids and Hamiltonian assembly.
//!
//! Energies are measured in units of the charging energy, so the operator
//! that gets diagonalized is
//!
//! ```text
//!     H = n^2 - t cos(theta) + s * t' sin(theta/2)
//! ```
//!
//! with `s = +-1` the qubit spin sector. The `sin(theta/2)` coupling makes the
//! potential 4*pi periodic, which is why charge takes half-integer values.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

/// Raw circuit energies: charging energy and the two Josephson couplings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitParams {
    pub e_c: f64,
    pub e_j: f64,
    pub e_j_prime: f64,
}

impl CircuitParams {
    pub fn new(e_c: f64, e_j: f64, e_j_prime: f64) -> Result<Self> {
        for (name, v) in [("e_c", e_c), ("e_j", e_j), ("e_j_prime", e_j_prime)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidParameter {
                    name,
                    message: format!("must be finite and strictly positive, got {v}"),
                });
            }
        }
        Ok(CircuitParams { e_c, e_j, e_j_prime })
    }
}

/// Dimensionless couplings t = E_J / E_C and t' = E_J' / E_C.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JunctionParams {
    t: f64,
    t_prime: f64,
}

impl JunctionParams {
    /// `t = 0` is allowed (free rotor); negative or non-finite couplings are not.
    pub fn new(t: f64, t_prime: f64) -> Result<Self> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::InvalidParameter {
                name: "t",
                message: format!("must be finite and non-negative, got {t}"),
            });
        }
        if !t_prime.is_finite() || t_prime < 0.0 {
            return Err(Error::InvalidParameter {
                name: "t_prime",
                message: format!("must be finite and non-negative, got {t_prime}"),
            });
        }
        Ok(JunctionParams { t, t_prime })
    }

    #[inline]
    pub fn t(&self) -> f64 {
        self.t
    }

    #[inline]
    pub fn t_prime(&self) -> f64 {
        self.t_prime
    }

    /// Charge cutoff that keeps truncation error far below solver noise:
    /// the ground state occupies |n| <~ sqrt(omega)/2, and ceil(4 sqrt(t))
    /// leaves many decades of Gaussian headroom.
    pub fn default_n_max(&self) -> u32 {
        let n = (4.0 * self.t.sqrt()).ceil() as u32;
        n.max(1)
    }
}

/// Convert raw circuit energies to the dimensionless couplings.
pub fn reduce_circuit(c: &CircuitParams) -> JunctionParams {
    JunctionParams {
        t: c.e_j / c.e_c,
        t_prime: c.e_j_prime / c.e_c,
    }
}

/// Qubit spin sector: the sign in front of the t' sin(theta/2) term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinSector {
    Plus,
    Minus,
}

impl SpinSector {
    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            SpinSector::Plus => 1.0,
            SpinSector::Minus => -1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SpinSector::Plus => "+1",
            SpinSector::Minus => "-1",
        }
    }
}

/// Potential energy V(theta) = -t cos(theta) + s t' sin(theta/2).
pub fn potential(p: &JunctionParams, theta: f64, sector: SpinSector) -> f64 {
    -p.t * theta.cos() + sector.sign() * p.t_prime * (0.5 * theta).sin()
}

/// Harmonic data for the two degenerate minima of V over one 4*pi period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WellInfo {
    /// Locations of the two minima, reduced to [0, 4*pi) and sorted.
    pub theta_minima: [f64; 2],
    /// V at a minimum.
    pub depth: f64,
    /// Quadratic coefficient: V ~ depth + curvature_coeff * (theta - theta_min)^2.
    pub curvature_coeff: f64,
    /// Small-oscillation frequency sqrt((16 t^2 - t'^2) / (8 t)).
    pub omega: f64,
}

/// Expand the potential around its minima. Fails when the quartic barrier
/// degenerates, i.e. unless t > 0 and t' < 4t.
pub fn well_parameters(p: &JunctionParams, sector: SpinSector) -> Result<WellInfo> {
    if p.t <= 0.0 || p.t_prime >= 4.0 * p.t {
        return Err(Error::NoHarmonicWell {
            t: p.t,
            t_prime: p.t_prime,
        });
    }
    let q = p.t_prime / (4.0 * p.t);
    let theta0 = 2.0 * q.asin();
    // Stationary points with sin(theta/2) = -s q; the remaining ones
    // (cos(theta/2) = 0) are barrier tops.
    let (a, b) = match sector {
        SpinSector::Plus => (2.0 * std::f64::consts::PI + theta0, FOUR_PI - theta0),
        SpinSector::Minus => (theta0, 2.0 * std::f64::consts::PI - theta0),
    };
    let mut theta_minima = [a.rem_euclid(FOUR_PI), b.rem_euclid(FOUR_PI)];
    if theta_minima[0] > theta_minima[1] {
        theta_minima.swap(0, 1);
    }
    let depth = -p.t - p.t_prime * p.t_prime / (8.0 * p.t);
    let second_derivative = (16.0 * p.t * p.t - p.t_prime * p.t_prime) / (16.0 * p.t);
    Ok(WellInfo {
        theta_minima,
        depth,
        curvature_coeff: 0.5 * second_derivative,
        // kinetic term is n^2, i.e. mass 1/2, so omega^2 = 2 V''.
        omega: (2.0 * second_derivative).sqrt(),
    })
}

/// Half-integer charge grid n_j = j/2 + k, j = -half_steps ..= half_steps.
#[derive(Debug, Clone, PartialEq)]
pub struct ChargeGrid {
    half_steps: u32,
    k: f64,
    points: Vec<f64>,
}

impl ChargeGrid {
    /// Symmetric cutoff at |n| <= n_max with the Bloch offset k in [0, 1/2).
    /// Dimension is 4 n_max + 1.
    pub fn new(n_max: u32, k: f64) -> Result<Self> {
        if !k.is_finite() || !(0.0..0.5).contains(&k) {
            return Err(Error::InvalidGrid(format!(
                "offset k must lie in [0, 1/2), got {k}"
            )));
        }
        Self::build(2 * n_max, k)
    }

    /// Same grid addressed by the number of half-steps on each side; accepts
    /// any offset in [0, 1), which permits recentred sweeps.
    pub fn with_half_steps(half_steps: u32, k: f64) -> Result<Self> {
        if !k.is_finite() || !(0.0..1.0).contains(&k) {
            return Err(Error::InvalidGrid(format!(
                "offset k must lie in [0, 1), got {k}"
            )));
        }
        Self::build(half_steps, k)
    }

    fn build(half_steps: u32, k: f64) -> Result<Self> {
        let m = half_steps as i64;
        let points = (-m..=m).map(|j| 0.5 * j as f64 + k).collect();
        Ok(ChargeGrid {
            half_steps,
            k,
            points,
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        2 * self.half_steps as usize + 1
    }

    #[inline]
    pub fn k(&self) -> f64 {
        self.k
    }

    #[inline]
    pub fn half_steps(&self) -> u32 {
        self.half_steps
    }

    #[inline]
    pub fn points(&self) -> &[f64] {
        &self.points
    }
}

/// Hermitian pentadiagonal matrix in the charge basis. `band1[j]` holds the
/// first subdiagonal entry H[j+1][j], `band2[j]` holds H[j+2][j]; upper
/// bands follow by conjugation.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianBandMatrix {
    pub diag: Vec<f64>,
    pub band1: Vec<Complex64>,
    pub band2: Vec<f64>,
}

impl HermitianBandMatrix {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Dense copy, for diagnostics and small cross-checks.
    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        let d = self.dim();
        let mut m = vec![vec![Complex64::ZERO; d]; d];
        for i in 0..d {
            m[i][i] = Complex64::new(self.diag[i], 0.0);
        }
        for (j, &v) in self.band1.iter().enumerate() {
            m[j + 1][j] = v;
            m[j][j + 1] = v.conj();
        }
        for (j, &v) in self.band2.iter().enumerate() {
            m[j + 2][j] = Complex64::new(v, 0.0);
            m[j][j + 2] = Complex64::new(v, 0.0);
        }
        m
    }
}

/// Real symmetric pentadiagonal matrix obtained from the Hermitian one by a
/// diagonal gauge rotation. `gauge_phases[j]` maps solutions back to the
/// charge basis: v_j = gauge_phases[j] * w_j.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSymmetricBandMatrix {
    pub diag: Vec<f64>,
    pub band1: Vec<f64>,
    pub band2: Vec<f64>,
    pub gauge_phases: Vec<Complex64>,
}

impl RealSymmetricBandMatrix {
    /// Assemble from bands with trivial gauge, validating band lengths.
    pub fn from_bands(diag: Vec<f64>, band1: Vec<f64>, band2: Vec<f64>) -> Result<Self> {
        let d = diag.len();
        if d == 0 {
            return Err(Error::InvalidParameter {
                name: "diag",
                message: "matrix must have at least one row".into(),
            });
        }
        if band1.len() != d.saturating_sub(1) || band2.len() != d.saturating_sub(2) {
            return Err(Error::InvalidParameter {
                name: "band1",
                message: format!(
                    "band lengths {}/{} incompatible with dimension {}",
                    band1.len(),
                    band2.len(),
                    d
                ),
            });
        }
        let gauge_phases = vec![Complex64::ONE; d];
        Ok(RealSymmetricBandMatrix {
            diag,
            band1,
            band2,
            gauge_phases,
        })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Row-sum norm, used to scale residual tolerances.
    pub fn inf_norm(&self) -> f64 {
        let d = self.dim();
        let mut best = 0.0f64;
        for i in 0..d {
            let mut row = self.diag[i].abs();
            if i >= 1 {
                row += self.band1[i - 1].abs();
            }
            if i + 1 < d {
                row += self.band1[i].abs();
            }
            if i >= 2 {
                row += self.band2[i - 2].abs();
            }
            if i + 2 < d {
                row += self.band2[i].abs();
            }
            best = best.max(row);
        }
        best
    }

    /// y = M x using only the stored bands.
    pub fn multiply(&self, x: &[f64], y: &mut [f64]) {
        let d = self.dim();
        assert_eq!(x.len(), d);
        assert_eq!(y.len(), d);
        for i in 0..d {
            let mut acc = self.diag[i] * x[i];
            if i >= 1 {
                acc += self.band1[i - 1] * x[i - 1];
            }
            if i + 1 < d {
                acc += self.band1[i] * x[i + 1];
            }
            if i >= 2 {
                acc += self.band2[i - 2] * x[i - 2];
            }
            if i + 2 < d {
                acc += self.band2[i] * x[i + 2];
            }
            y[i] = acc;
        }
    }
}

/// Matrix elements of H on the grid: diagonal n^2, first band from the
/// sin(theta/2) coupling, second band from cos(theta).
pub fn build_hamiltonian(
    p: &JunctionParams,
    grid: &ChargeGrid,
    sector: SpinSector,
) -> HermitianBandMatrix {
    let d = grid.dim();
    let diag = grid.points().iter().map(|&n| n * n).collect();
    // sin(theta/2) = (e^{i theta/2} - e^{-i theta/2}) / 2i raises/lowers the
    // charge by one half-step.
    let b1 = Complex64::new(0.0, -0.5 * sector.sign() * p.t_prime);
    let band1 = vec![b1; d.saturating_sub(1)];
    let band2 = vec![-0.5 * p.t; d.saturating_sub(2)];
    HermitianBandMatrix { diag, band1, band2 }
}

/// Rotate the Hermitian matrix to a real symmetric one with the diagonal
/// unitary u_j = e^{-i j pi / 2}. Both off-diagonal bands come out real
/// (positive for the physical sign conventions).
pub fn gauge_transform(h: &HermitianBandMatrix) -> RealSymmetricBandMatrix {
    let d = h.dim();
    // conj(u_{j+1}) u_j = i and conj(u_{j+2}) u_j = -1 for every j.
    let gauge_phases: Vec<Complex64> = (0..d)
        .map(|j| match j % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, -1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, 1.0),
        })
        .collect();
    let band1 = h
        .band1
        .iter()
        .map(|&v| {
            let r = v * Complex64::new(0.0, 1.0);
            debug_assert!(r.im.abs() <= 1e-12 * (1.0 + r.re.abs()));
            r.re
        })
        .collect();
    let band2 = h.band2.iter().map(|&v| -v).collect();
    RealSymmetricBandMatrix {
        diag: h.diag.clone(),
        band1,
        band2,
        gauge_phases,
    }
}
