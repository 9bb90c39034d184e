//! Square complex matrices for operator strategies.
//!
//! Carries the Pauli constructors, tensor products, and the two operations
//! the strategy verifier needs beyond arithmetic: observable validation
//! (Hermitian with unit square) and spectral sign repair, which maps a
//! Hermitian matrix with nonzero spectrum to the observable sharing its
//! eigenvectors.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::jacobi_eigen;

/// Hermiticity tolerance accepted by `spectral_sign`.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Eigenvalues below this magnitude make a spectral sign ambiguous.
pub const DEGENERACY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    data: Array2<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { data: Array2::from_elem((dim, dim), Complex64::ZERO) }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[[i, i]] = Complex64::ONE;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::Dimension("matrix must be nonempty".into()));
        }
        let mut data = Array2::from_elem((dim, dim), Complex64::ZERO);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Dimension(format!(
                    "row {i} has {} entries in a {dim}x{dim} matrix",
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.re.is_finite() || !v.im.is_finite() {
                    return Err(Error::Domain(format!("non-finite entry at ({i},{j})")));
                }
                data[[i, j]] = v;
            }
        }
        Ok(Self { data })
    }

    pub fn pauli_x() -> Self {
        Self::from_rows(&[
            vec![Complex64::ZERO, Complex64::ONE],
            vec![Complex64::ONE, Complex64::ZERO],
        ])
        .expect("fixed 2x2 table")
    }

    pub fn pauli_y() -> Self {
        Self::from_rows(&[
            vec![Complex64::ZERO, Complex64::new(0.0, -1.0)],
            vec![Complex64::new(0.0, 1.0), Complex64::ZERO],
        ])
        .expect("fixed 2x2 table")
    }

    pub fn pauli_z() -> Self {
        Self::from_rows(&[
            vec![Complex64::ONE, Complex64::ZERO],
            vec![Complex64::ZERO, Complex64::new(-1.0, 0.0)],
        ])
        .expect("fixed 2x2 table")
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[[i, j]]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[[i, j]] = v;
    }

    pub fn data(&self) -> &Array2<Complex64> {
        &self.data
    }

    fn check_same_dim(&self, other: &Self) -> Result<usize> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension(format!(
                "matrices of dimension {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(self.dim())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self { data: &self.data + &other.data })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self { data: &self.data - &other.data })
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self { data: self.data.mapv(|v| v * factor) }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        let d = self.check_same_dim(other)?;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.data[[i, k]];
                if a != Complex64::ZERO {
                    for j in 0..d {
                        out.data[[i, j]] += a * other.data[[k, j]];
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (d1, d2) = (self.dim(), other.dim());
        let mut out = Self::zeros(d1 * d2);
        for i1 in 0..d1 {
            for j1 in 0..d1 {
                let a = self.data[[i1, j1]];
                if a == Complex64::ZERO {
                    continue;
                }
                for i2 in 0..d2 {
                    for j2 in 0..d2 {
                        out.data[[i1 * d2 + i2, j1 * d2 + j2]] = a * other.data[[i2, j2]];
                    }
                }
            }
        }
        out
    }

    /// Entry-wise complex conjugate (no transpose).
    pub fn conj(&self) -> Self {
        Self { data: self.data.mapv(|v| v.conj()) }
    }

    pub fn transpose(&self) -> Self {
        Self { data: self.data.t().to_owned() }
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self { data: self.data.t().mapv(|v| v.conj()) }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.data[[i, i]]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// (A + A^dagger) / 2.
    pub fn hermitian_part(&self) -> Self {
        let mut out = self.clone();
        let d = self.dim();
        for i in 0..d {
            for j in 0..d {
                out.data[[i, j]] = 0.5 * (self.data[[i, j]] + self.data[[j, i]].conj());
            }
        }
        out
    }

    /// Real-weighted sum of matrices of one dimension.
    pub fn linear_combination(terms: &[(f64, &ComplexMatrix)]) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::Dimension("empty linear combination".into()))?;
        let mut out = Self::zeros(first.1.dim());
        for &(w, mat) in terms {
            out.check_same_dim(mat)?;
            out.data.zip_mut_with(mat.data(), |o, &v| *o += w * v);
        }
        Ok(out)
    }
}

/// Defect report for a would-be observable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObservableReport {
    /// max |O - O^dagger| entry.
    pub hermitian_defect: f64,
    /// max |O^2 - I| entry.
    pub involution_defect: f64,
    pub pass: bool,
}

/// Measures how far `o` is from a Hermitian matrix squaring to the identity.
pub fn validate_observable(o: &ComplexMatrix, tol: f64) -> ObservableReport {
    let hermitian_defect = o.sub(&o.dagger()).expect("same dimension").max_abs();
    let square = o.matmul(o).expect("same dimension");
    let involution_defect = square.sub(&ComplexMatrix::identity(o.dim())).expect("same dimension").max_abs();
    ObservableReport {
        hermitian_defect,
        involution_defect,
        pass: hermitian_defect <= tol && involution_defect <= tol,
    }
}

/// Eigendecomposition of a Hermitian matrix through the real embedding
/// H = A + iB -> [[A, -B], [B, A]].
///
/// Returns all 2d real eigenpairs; each eigenvalue of H appears twice, and
/// summing z(w) z(w)^dagger over the doubled pairs reproduces twice the
/// complex eigenprojectors regardless of the basis chosen inside degenerate
/// eigenspaces.
fn hermitian_eigen_doubled(h: &ComplexMatrix) -> Result<(Vec<f64>, Array2<f64>)> {
    let d = h.dim();
    let mut real = Array2::zeros((2 * d, 2 * d));
    for i in 0..d {
        for j in 0..d {
            let v = h.get(i, j);
            real[[i, j]] = v.re;
            real[[d + i, d + j]] = v.re;
            real[[i, d + j]] = -v.im;
            real[[d + i, j]] = v.im;
        }
    }
    jacobi_eigen(&real)
}

/// Replaces each eigenvalue of a Hermitian matrix by its sign, keeping the
/// eigenvectors: the canonical repair taking a weighted operator combination
/// to the observable it points at.
pub fn spectral_sign(o: &ComplexMatrix) -> Result<ComplexMatrix> {
    let report = validate_observable(o, f64::INFINITY);
    if report.hermitian_defect > HERMITIAN_TOL {
        return Err(Error::Domain(format!(
            "spectral sign needs a Hermitian input; defect {}",
            report.hermitian_defect
        )));
    }
    let h = o.hermitian_part();
    let d = h.dim();
    let (values, vectors) = hermitian_eigen_doubled(&h)?;
    for &v in &values {
        if v.abs() < DEGENERACY_TOL {
            return Err(Error::Degenerate(format!(
                "eigenvalue {v} too close to zero to carry a sign"
            )));
        }
    }
    let mut sign = ComplexMatrix::zeros(d);
    for (k, &value) in values.iter().enumerate() {
        let s = 0.5 * value.signum();
        for i in 0..d {
            let zi = Complex64::new(vectors[[i, k]], vectors[[d + i, k]]);
            for j in 0..d {
                let zj = Complex64::new(vectors[[j, k]], vectors[[d + j, k]]);
                let delta = s * zi * zj.conj();
                let cur = sign.get(i, j);
                sign.set(i, j, cur + delta);
            }
        }
    }
    // The sum is Hermitian up to rounding; symmetrize exactly.
    Ok(sign.hermitian_part())
}
