//! Dense symmetric eigensolver: Householder tridiagonalization followed by
//! implicit-shift QL iteration, with an orthogonal accumulator throughout.
//!
//! The solver is self-contained and deterministic. Eigenvalues come out
//! ascending; ties keep their pre-sort order.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{
    build_hamiltonian, gauge_transform, ChargeGrid, HermitianBandMatrix, JunctionParams,
    RealSymmetricBandMatrix, SpinSector,
};

const EPS: f64 = 2.220446049250313e-16; // 2^-52
const SWEEP_BUDGET_PER_ROW: usize = 50;

/// Row-major square matrix of f64.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidParameter {
                name: "rows",
                message: "matrix must be square and non-empty".into(),
            });
        }
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        Ok(m)
    }

    pub fn from_band_matrix(b: &RealSymmetricBandMatrix) -> Self {
        let n = b.dim();
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, b.diag[i]);
        }
        for (j, &v) in b.band1.iter().enumerate() {
            m.set(j + 1, j, v);
            m.set(j, j + 1, v);
        }
        for (j, &v) in b.band2.iter().enumerate() {
            m.set(j + 2, j, v);
            m.set(j, j + 2, v);
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn inf_norm(&self) -> f64 {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    fn is_tridiagonal(&self) -> bool {
        for i in 0..self.n {
            for j in 0..self.n {
                if i.abs_diff(j) > 1 && self.get(i, j) != 0.0 {
                    return false;
                }
            }
        }
        true
    }
}

/// Result of the Householder stage: `accumulator` is orthogonal and satisfies
/// M = accumulator * T * accumulator^T with T = tridiag(diag, offdiag).
#[derive(Debug, Clone)]
pub struct TridiagonalForm {
    pub diag: Vec<f64>,
    /// offdiag[j] = T[j+1][j], length dim - 1.
    pub offdiag: Vec<f64>,
    pub accumulator: DenseMatrix,
}

impl TridiagonalForm {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }
}

/// Tridiagonalize a banded matrix. A matrix whose second band vanishes is
/// already tridiagonal and passes through untouched with an identity
/// accumulator.
pub fn tridiagonalize(m: &RealSymmetricBandMatrix) -> TridiagonalForm {
    if m.band2.iter().all(|&x| x == 0.0) {
        return TridiagonalForm {
            diag: m.diag.clone(),
            offdiag: m.band1.clone(),
            accumulator: DenseMatrix::identity(m.dim()),
        };
    }
    tridiagonalize_dense(&DenseMatrix::from_band_matrix(m)).expect("band matrix is symmetric")
}

/// Householder reduction of a dense symmetric matrix.
pub fn tridiagonalize_dense(m: &DenseMatrix) -> Result<TridiagonalForm> {
    if m.max_asymmetry() > 1e-12 * (1.0 + m.inf_norm()) {
        return Err(Error::InvalidParameter {
            name: "matrix",
            message: "input is not symmetric".into(),
        });
    }
    let n = m.dim();
    if m.is_tridiagonal() {
        let diag = (0..n).map(|i| m.get(i, i)).collect();
        let offdiag = (0..n.saturating_sub(1)).map(|j| m.get(j + 1, j)).collect();
        return Ok(TridiagonalForm {
            diag,
            offdiag,
            accumulator: DenseMatrix::identity(n),
        });
    }

    let mut v = m.clone();
    let mut d = vec![0.0f64; n];
    let mut e = vec![0.0f64; n];
    for j in 0..n {
        d[j] = v.get(n - 1, j);
    }

    for i in (1..n).rev() {
        // scale guards against under/overflow in the reflector norm
        let mut scale = 0.0f64;
        let mut h = 0.0f64;
        for item in d.iter().take(i) {
            scale += item.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v.get(i - 1, j);
                v.set(i, j, 0.0);
                v.set(j, i, 0.0);
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for item in e.iter_mut().take(i) {
                *item = 0.0;
            }

            for j in 0..i {
                let f = d[j];
                v.set(j, i, f);
                let mut g = e[j] + v.get(j, j) * f;
                for k in (j + 1)..i {
                    g += v.get(k, j) * d[k];
                    e[k] += v.get(k, j) * f;
                }
                e[j] = g;
            }
            let mut f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let f = d[j];
                let g = e[j];
                for k in j..i {
                    let val = v.get(k, j) - (f * e[k] + g * d[k]);
                    v.set(k, j, val);
                }
                d[j] = v.get(i - 1, j);
                v.set(i, j, 0.0);
            }
        }
        d[i] = h;
    }

    // accumulate the Householder reflectors into an explicit orthogonal matrix
    for i in 0..n.saturating_sub(1) {
        v.set(n - 1, i, v.get(i, i));
        v.set(i, i, 1.0);
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v.get(k, i + 1) / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v.get(k, i + 1) * v.get(k, j);
                }
                for k in 0..=i {
                    let val = v.get(k, j) - g * d[k];
                    v.set(k, j, val);
                }
            }
        }
        for k in 0..=i {
            v.set(k, i + 1, 0.0);
        }
    }
    for j in 0..n {
        d[j] = v.get(n - 1, j);
        v.set(n - 1, j, 0.0);
    }
    v.set(n - 1, n - 1, 1.0);

    let offdiag = e[1..].to_vec();
    Ok(TridiagonalForm {
        diag: d,
        offdiag,
        accumulator: v,
    })
}

/// Spectrum in ascending order. `eigenvectors[i]` is the vector belonging to
/// `eigenvalues[i]`, expressed in the (real) basis the matrix was given in.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
    pub meta: Option<SpectrumMeta>,
}

/// Provenance of a spectrum produced by `sector_spectrum`.
#[derive(Debug, Clone)]
pub struct SpectrumMeta {
    pub params: JunctionParams,
    pub sector: SpinSector,
    pub grid: ChargeGrid,
    pub gauge_phases: Vec<Complex64>,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenvector i mapped back to the charge basis. Without metadata the
    /// gauge is trivial and the components are real.
    pub fn charge_state(&self, i: usize) -> Vec<Complex64> {
        let w = &self.eigenvectors[i];
        match &self.meta {
            Some(meta) => w
                .iter()
                .zip(meta.gauge_phases.iter())
                .map(|(&x, &u)| u * x)
                .collect(),
            None => w.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }
}

/// QL iteration with implicit shifts on a tridiagonal form. Fails with the
/// offending row index if an eigenvalue does not deflate within the sweep
/// budget.
pub fn tridiag_eig(t: &TridiagonalForm) -> Result<Spectrum> {
    tridiag_eig_budgeted(t, SWEEP_BUDGET_PER_ROW * t.dim())
}

fn tridiag_eig_budgeted(t: &TridiagonalForm, budget: usize) -> Result<Spectrum> {
    let n = t.dim();
    assert_eq!(t.offdiag.len(), n.saturating_sub(1), "band length mismatch");
    let mut d = t.diag.clone();
    let mut e = vec![0.0f64; n];
    e[..n - 1].copy_from_slice(&t.offdiag);
    let mut v = t.accumulator.clone();

    let mut sweeps_left = budget;
    let mut f = 0.0f64;
    let mut tst1 = 0.0f64;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        loop {
            // locate the first negligible subdiagonal at or after l
            let mut m = l;
            while m < n {
                if e[m].abs() <= EPS * tst1 {
                    break;
                }
                m += 1;
            }
            if m <= l {
                break;
            }
            if sweeps_left == 0 {
                return Err(Error::NumericalFailure {
                    index: l,
                    message: "QL sweep budget exhausted".into(),
                });
            }
            sweeps_left -= 1;

            // Wilkinson-style implicit shift
            let g = d[l];
            let mut p = (d[l + 1] - g) / (2.0 * e[l]);
            let mut r = p.hypot(1.0);
            if p < 0.0 {
                r = -r;
            }
            d[l] = e[l] / (p + r);
            d[l + 1] = e[l] * (p + r);
            let dl1 = d[l + 1];
            let mut h = g - d[l];
            for item in d.iter_mut().take(n).skip(l + 2) {
                *item -= h;
            }
            f += h;

            // chase the bulge from m-1 down to l
            p = d[m];
            let mut c = 1.0f64;
            let mut c2 = c;
            let mut c3 = c;
            let el1 = e[l + 1];
            let mut s = 0.0f64;
            let mut s2 = 0.0f64;
            for i in (l..m).rev() {
                c3 = c2;
                c2 = c;
                s2 = s;
                let g = c * e[i];
                h = c * p;
                r = p.hypot(e[i]);
                e[i + 1] = s * r;
                s = e[i] / r;
                c = p / r;
                p = c * d[i] - s * g;
                d[i + 1] = h + s * (c * g + s * d[i]);

                for k in 0..n {
                    let h = v.get(k, i + 1);
                    v.set(k, i + 1, s * v.get(k, i) + c * h);
                    v.set(k, i, c * v.get(k, i) - s * h);
                }
            }
            p = -s * s2 * c3 * el1 * e[l] / dl1;
            e[l] = s * p;
            d[l] = c * p;

            if e[l].abs() <= EPS * tst1 {
                break;
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    // ascending stable sort; keep each eigenvector with its value
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| d[a].total_cmp(&d[b]).then(a.cmp(&b)));
    let eigenvalues: Vec<f64> = idx.iter().map(|&i| d[i]).collect();
    let eigenvectors: Vec<Vec<f64>> = idx
        .iter()
        .map(|&j| (0..n).map(|k| v.get(k, j)).collect())
        .collect();
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
        meta: None,
    })
}

/// Full solve of a real symmetric banded matrix.
pub fn eigh(m: &RealSymmetricBandMatrix) -> Result<Spectrum> {
    tridiag_eig(&tridiagonalize(m))
}

/// Full solve of a dense symmetric matrix.
pub fn eigh_dense(m: &DenseMatrix) -> Result<Spectrum> {
    tridiag_eig(&tridiagonalize_dense(m)?)
}

/// Worst-case diagnostics of a computed spectrum against its matrix.
#[derive(Debug, Clone, Copy)]
pub struct ResidualReport {
    /// max_i || M v_i - lambda_i v_i ||_2
    pub max_residual: f64,
    /// max_ij | <v_i, v_j> - delta_ij |
    pub max_orthonormality_defect: f64,
    /// Row-sum norm of M, the natural scale for the residual.
    pub matrix_norm: f64,
}

pub fn residuals(m: &RealSymmetricBandMatrix, s: &Spectrum) -> ResidualReport {
    let n = m.dim();
    let mut work = vec![0.0f64; n];
    let mut max_residual = 0.0f64;
    for (i, vec_i) in s.eigenvectors.iter().enumerate() {
        m.multiply(vec_i, &mut work);
        let lam = s.eigenvalues[i];
        let r2: f64 = work
            .iter()
            .zip(vec_i.iter())
            .map(|(&y, &x)| (y - lam * x) * (y - lam * x))
            .sum();
        max_residual = max_residual.max(r2.sqrt());
    }
    ResidualReport {
        max_residual,
        max_orthonormality_defect: orthonormality_defect(&s.eigenvectors),
        matrix_norm: m.inf_norm(),
    }
}

pub fn residuals_dense(m: &DenseMatrix, s: &Spectrum) -> ResidualReport {
    let n = m.dim();
    let mut max_residual = 0.0f64;
    for (i, vec_i) in s.eigenvectors.iter().enumerate() {
        let lam = s.eigenvalues[i];
        let mut r2 = 0.0;
        for r in 0..n {
            let mut acc = 0.0;
            for c in 0..n {
                acc += m.get(r, c) * vec_i[c];
            }
            let diff = acc - lam * vec_i[r];
            r2 += diff * diff;
        }
        max_residual = max_residual.max(r2.sqrt());
    }
    ResidualReport {
        max_residual,
        max_orthonormality_defect: orthonormality_defect(&s.eigenvectors),
        matrix_norm: m.inf_norm(),
    }
}

fn orthonormality_defect(vectors: &[Vec<f64>]) -> f64 {
    let mut worst = 0.0f64;
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate().skip(i) {
            let dot: f64 = a.iter().zip(b.iter()).map(|(&x, &y)| x * y).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).abs());
        }
    }
    worst
}

/// Exact spectrum of one spin sector on the given grid, with metadata so
/// eigenvectors can be mapped back to the charge basis.
pub fn sector_spectrum(
    p: &JunctionParams,
    grid: &ChargeGrid,
    sector: SpinSector,
) -> Result<Spectrum> {
    let h = build_hamiltonian(p, grid, sector);
    let real = gauge_transform(&h);
    let mut s = eigh(&real)?;
    s.meta = Some(SpectrumMeta {
        params: *p,
        sector,
        grid: grid.clone(),
        gauge_phases: real.gauge_phases,
    });
    Ok(s)
}

/// Eigenvalues of a Hermitian banded matrix via the real 2d x 2d embedding
/// [[A, -B], [B, A]]; each eigenvalue appears twice, so every second one of
/// the sorted list is returned. Used as an independent cross-check on the
/// gauge rotation.
pub fn hermitian_eigenvalues(h: &HermitianBandMatrix) -> Result<Vec<f64>> {
    let n = h.dim();
    let dense = h.to_dense();
    let mut m = DenseMatrix::zeros(2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = dense[i][j];
            m.set(i, j, z.re);
            m.set(n + i, n + j, z.re);
            m.set(i, n + j, -z.im);
            m.set(n + i, j, z.im);
        }
    }
    let s = eigh_dense(&m)?;
    Ok(s.eigenvalues.iter().step_by(2).copied().collect())
}
