//! Dense symmetric eigensolver via cyclic Jacobi rotations.
//!
//! Sized for the matrices this library actually produces (certificate
//! matrices up to a few dozen rows, real embeddings of small complex
//! observables), where Jacobi's simplicity and near-machine accuracy beat
//! anything fancier.

use ndarray::Array2;

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Tolerance for accepting a matrix as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;

fn check_square_symmetric(a: &Array2<f64>, tol: f64) -> Result<usize> {
    let (r, c) = a.dim();
    if r != c {
        return Err(Error::Dimension(format!("matrix is {r}x{c}, expected square")));
    }
    for i in 0..r {
        for j in i + 1..r {
            if (a[[i, j]] - a[[j, i]]).abs() > tol {
                return Err(Error::Domain(format!(
                    "matrix is not symmetric: entry ({i},{j}) differs from ({j},{i}) by {}",
                    (a[[i, j]] - a[[j, i]]).abs()
                )));
            }
        }
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("matrix contains a non-finite entry".into()));
    }
    Ok(r)
}

/// Full eigendecomposition of a symmetric matrix.
///
/// Returns eigenvalues in ascending order and the matching orthonormal
/// eigenvectors as columns. Input asymmetry beyond `SYMMETRY_TOL` is
/// rejected; the strictly upper triangle drives the rotations.
pub fn jacobi_eigen(a: &Array2<f64>) -> Result<(Vec<f64>, Array2<f64>)> {
    let n = check_square_symmetric(a, SYMMETRY_TOL)?;
    let mut m = a.clone();
    // Symmetrize exactly so rotations preserve symmetry bit for bit.
    for i in 0..n {
        for j in i + 1..n {
            let avg = 0.5 * (m[[i, j]] + m[[j, i]]);
            m[[i, j]] = avg;
            m[[j, i]] = avg;
        }
    }
    let mut v = Array2::eye(n);
    let frob: f64 = m.iter().map(|x| x * x).sum::<f64>().sqrt();
    let threshold = (frob * 1e-15).max(f64::MIN_POSITIVE);

    for _ in 0..MAX_SWEEPS {
        let off: f64 = {
            let mut s = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    s += m[[i, j]] * m[[i, j]];
                }
            }
            s.sqrt()
        };
        if off <= threshold {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[[p, q]];
                if apq.abs() <= threshold / (n * n) as f64 {
                    continue;
                }
                let theta = (m[[q, q]] - m[[p, p]]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // Rotate rows/columns p and q of m.
                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, q]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[q, k]] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[[i, i]].partial_cmp(&m[[j, j]]).expect("finite eigenvalues"));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| m[[i, i]]).collect();
    let mut vectors = Array2::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            vectors[[k, dst]] = v[[k, src]];
        }
    }
    Ok((eigenvalues, vectors))
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(sym: &Array2<f64>) -> Result<f64> {
    let (values, _) = jacobi_eigen(sym)?;
    Ok(values[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} beyond {tol}");
    }

    #[test]
    fn identity_and_diagonal() {
        assert_close(min_eigenvalue(&Array2::eye(2)).unwrap(), 1.0, 1e-14);
        let d = Array2::from_diag(&ndarray::arr1(&[3.0, -2.0, 5.0]));
        assert_close(min_eigenvalue(&d).unwrap(), -2.0, 1e-14);
    }

    #[test]
    fn off_diagonal_pair() {
        let a = array![[0.0, 0.5], [0.5, 0.0]];
        assert_close(min_eigenvalue(&a).unwrap(), -0.5, 1e-14);
    }

    #[test]
    fn rejects_asymmetric_and_rectangular() {
        let a = array![[0.0, 1.0], [0.0, 0.0]];
        assert!(min_eigenvalue(&a).is_err());
        let r = Array2::<f64>::zeros((2, 3));
        assert!(min_eigenvalue(&r).is_err());
    }

    #[test]
    fn reconstructs_matrix_from_eigenpairs() {
        // Deterministic full matrix with known structure.
        let n = 8;
        let mut a = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                a[[i, j]] = 1.0 / (1.0 + (i as f64 - j as f64).abs()) + if i == j { i as f64 } else { 0.0 };
            }
        }
        let (vals, vecs) = jacobi_eigen(&a).unwrap();
        // Ascending order.
        for w in vals.windows(2) {
            assert!(w[0] <= w[1]);
        }
        // V diag(vals) V^T == a.
        let mut recon = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += vecs[[i, k]] * vals[k] * vecs[[j, k]];
                }
                recon[[i, j]] = s;
            }
        }
        for i in 0..n {
            for j in 0..n {
                assert_close(recon[[i, j]], a[[i, j]], 1e-12);
            }
        }
        // Orthonormal columns.
        for i in 0..n {
            for j in 0..n {
                let mut dot = 0.0;
                for k in 0..n {
                    dot += vecs[[k, i]] * vecs[[k, j]];
                }
                assert_close(dot, if i == j { 1.0 } else { 0.0 }, 1e-13);
            }
        }
    }

    #[test]
    fn known_spectrum_of_tridiagonal() {
        // Second-difference matrix on 5 points: eigenvalues 2 - 2 cos(k pi / 6).
        let n = 5;
        let mut a = Array2::zeros((n, n));
        for i in 0..n {
            a[[i, i]] = 2.0;
            if i + 1 < n {
                a[[i, i + 1]] = -1.0;
                a[[i + 1, i]] = -1.0;
            }
        }
        let (vals, _) = jacobi_eigen(&a).unwrap();
        for (k, &v) in vals.iter().enumerate() {
            let expected = 2.0 - 2.0 * (std::f64::consts::PI * (k + 1) as f64 / 6.0).cos();
            assert_close(v, expected, 1e-12);
        }
    }
}
