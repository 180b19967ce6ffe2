use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{param, Result};

/// Default lower clip for eigenvalues in [`psd_repair`].
pub const DEFAULT_EIGEN_FLOOR: f64 = 1e-6;

/// A square matrix whose entries are exactly symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    /// Builds from row vectors; rejects ragged or asymmetric input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return param("matrix must have at least one row");
        }
        if rows.iter().any(|r| r.len() != dim) {
            return param("matrix must be square");
        }
        Self::new(DMatrix::from_fn(dim, dim, |i, j| rows[i][j]))
    }

    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return param(format!(
                "matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            ));
        }
        for i in 0..m.nrows() {
            for j in 0..i {
                if m[(i, j)] != m[(j, i)] {
                    return param(format!(
                        "matrix is not symmetric at ({i},{j}): {} vs {}",
                        m[(i, j)],
                        m[(j, i)]
                    ));
                }
            }
        }
        if m.iter().any(|x| !x.is_finite()) {
            return param("matrix has non-finite entries");
        }
        Ok(SymMatrix(m))
    }

    pub fn identity(dim: usize) -> Self {
        SymMatrix(DMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.0[(i, j)]).collect())
            .collect()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.0.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// Outcome of [`psd_repair`].
#[derive(Debug, Clone, PartialEq)]
pub struct PsdRepair {
    pub matrix: SymMatrix,
    /// True when at least one eigenvalue was raised to the floor.
    pub clipped: bool,
    pub min_eigenvalue_before: f64,
}

/// Clips the spectrum of `m` from below at `eigen_floor`.
///
/// Matrices whose smallest eigenvalue already reaches the floor are returned
/// unchanged.
pub fn psd_repair(m: &SymMatrix, eigen_floor: f64) -> Result<PsdRepair> {
    if !(eigen_floor > 0.0) || !eigen_floor.is_finite() {
        return param(format!("eigen_floor must be positive, got {eigen_floor}"));
    }
    let eig = SymmetricEigen::new(m.0.clone());
    let min_before = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min_before >= eigen_floor {
        return Ok(PsdRepair {
            matrix: m.clone(),
            clipped: false,
            min_eigenvalue_before: min_before,
        });
    }
    let clipped_vals = eig.eigenvalues.map(|l| l.max(eigen_floor));
    let v = &eig.eigenvectors;
    let rebuilt = v * DMatrix::from_diagonal(&clipped_vals) * v.transpose();
    let sym = DMatrix::from_fn(rebuilt.nrows(), rebuilt.ncols(), |i, j| {
        0.5 * (rebuilt[(i, j)] + rebuilt[(j, i)])
    });
    Ok(PsdRepair {
        matrix: SymMatrix(sym),
        clipped: true,
        min_eigenvalue_before: min_before,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_asymmetric() {
        let err = SymMatrix::from_rows(&[vec![1.0, 0.5], vec![0.4, 1.0]]);
        assert!(err.is_err());
        assert!(SymMatrix::from_rows(&[vec![1.0, 0.5]]).is_err());
    }

    #[test]
    fn identity_is_untouched() {
        let id = SymMatrix::identity(3);
        let r = psd_repair(&id, DEFAULT_EIGEN_FLOOR).unwrap();
        assert!(!r.clipped);
        assert_eq!(r.matrix, id);
    }

    #[test]
    fn indefinite_matrix_gets_clipped() {
        let m = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        let r = psd_repair(&m, 1e-6).unwrap();
        assert!(r.clipped);
        assert!((r.min_eigenvalue_before + 1.0).abs() < 1e-12);
        let ev = r.matrix.eigenvalues();
        assert!(ev[0] >= 1e-6 - 1e-12);
        assert!((ev[1] - 3.0).abs() < 1e-12);
    }
}
