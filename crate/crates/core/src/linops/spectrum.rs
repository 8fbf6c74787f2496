use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{Matrix, Vector};
use crate::error::Result;

/// Eigenvalues (symmetric input only) and operator 2-norm of a square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Ascending; `None` unless the matrix is flagged symmetric.
    pub eigenvalues: Option<Vec<f64>>,
    pub operator_norm: f64,
}

pub fn spectrum(m: &Matrix) -> Result<Spectrum> {
    m.require_square()?;
    let operator_norm = top_singular(m).0;
    let eigenvalues = if m.is_symmetric() {
        Some(symmetric_eigen(m)?.values)
    } else {
        None
    };
    Ok(Spectrum {
        eigenvalues,
        operator_norm,
    })
}

/// Eigendecomposition of a symmetric matrix with eigenvalues sorted ascending.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    /// Column `k` is the unit eigenvector for `values[k]`.
    pub vectors: DMatrix<f64>,
}

impl EigenDecomposition {
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn vector(&self, k: usize) -> Vector {
        Vector::from_dvector(self.vectors.column(k).into_owned())
    }

    /// `V diag(values) V^T`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let d = DMatrix::from_diagonal(&DVector::from_column_slice(&self.values));
        &self.vectors * d * self.vectors.transpose()
    }
}

pub fn symmetric_eigen(m: &Matrix) -> Result<EigenDecomposition> {
    m.require_symmetric()?;
    let n = m.nrows();
    let eig = SymmetricEigen::new(m.as_dmatrix().clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(EigenDecomposition { values, vectors })
}

/// Largest singular value and a corresponding unit right singular vector.
///
/// Taken from the top eigenpair of the Gram matrix `M^T M`. nalgebra's SVD with
/// singular vectors requested can overstate the largest singular value when it
/// is repeated, which would turn a norm-one reflection into a false violation.
pub fn top_singular(m: &Matrix) -> (f64, Vector) {
    let a = m.as_dmatrix();
    let eig = SymmetricEigen::new(a.transpose() * a);
    let k = eig.eigenvalues.imax();
    let sigma = eig.eigenvalues[k].max(0.0).sqrt();
    let v = eig.eigenvectors.column(k).into_owned();
    (sigma, Vector::from_dvector(v))
}
