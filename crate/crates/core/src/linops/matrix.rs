use nalgebra::{DMatrix, DVector};

use super::Vector;
use crate::error::{Error, Result};

/// Absolute tolerance for the cached symmetry flag.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Condition-number guard for direct inversion.
pub const CONDITION_LIMIT: f64 = 1e14;

/// Dense real matrix with a cached symmetry flag.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    data: DMatrix<f64>,
    symmetric: bool,
}

impl Matrix {
    /// Builds a matrix from row-major rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let nrows = rows.len();
        if nrows == 0 {
            return Err(Error::InvalidArgument("matrix must have at least one row".into()));
        }
        let ncols = rows[0].len();
        if ncols == 0 {
            return Err(Error::InvalidArgument("matrix must have at least one column".into()));
        }
        for row in rows {
            if row.len() != ncols {
                return Err(Error::DimensionMismatch {
                    expected: ncols,
                    found: row.len(),
                });
            }
        }
        let data = DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]);
        Self::from_dmatrix(data)
    }

    pub fn from_dmatrix(data: DMatrix<f64>) -> Result<Self> {
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        let symmetric = data.is_square() && asymmetry(&data) <= SYMMETRY_TOL;
        Ok(Matrix { data, symmetric })
    }

    /// Builds the symmetric part `(M + M^T) / 2`, which is symmetric by construction.
    pub fn symmetrized(data: &DMatrix<f64>) -> Result<Self> {
        if !data.is_square() {
            return Err(Error::NonSquare {
                rows: data.nrows(),
                cols: data.ncols(),
            });
        }
        Self::from_dmatrix((data + data.transpose()) * 0.5)
    }

    pub fn identity(n: usize) -> Self {
        Matrix {
            data: DMatrix::identity(n, n),
            symmetric: true,
        }
    }

    pub fn zeros(n: usize) -> Self {
        Matrix {
            data: DMatrix::zeros(n, n),
            symmetric: true,
        }
    }

    pub fn diag(entries: &[f64]) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidArgument("diag needs at least one entry".into()));
        }
        Self::from_dmatrix(DMatrix::from_diagonal(&DVector::from_column_slice(entries)))
    }

    /// Counterclockwise rotator by `theta` on R^2.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        let data = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
        let symmetric = asymmetry(&data) <= SYMMETRY_TOL;
        Matrix { data, symmetric }
    }

    pub fn nrows(&self) -> usize {
        self.data.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.data.is_square()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn as_dmatrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[(i, j)]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.nrows())
            .map(|i| (0..self.ncols()).map(|j| self.data[(i, j)]).collect())
            .collect()
    }

    pub fn mul_vec(&self, x: &Vector) -> Result<Vector> {
        crate::error::check_dim(self.ncols(), x.dim())?;
        Ok(Vector::from_dvector(&self.data * x.as_dvector()))
    }

    pub fn transpose(&self) -> Matrix {
        Matrix {
            data: self.data.transpose(),
            symmetric: self.symmetric,
        }
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.same_shape(other)?;
        Self::from_dmatrix(&self.data + &other.data)
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.same_shape(other)?;
        Self::from_dmatrix(&self.data - &other.data)
    }

    pub fn scale(&self, alpha: f64) -> Result<Matrix> {
        Self::from_dmatrix(&self.data * alpha)
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        crate::error::check_dim(self.ncols(), other.nrows())?;
        Self::from_dmatrix(&self.data * &other.data)
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Matrix) -> Result<f64> {
        self.same_shape(other)?;
        Ok((&self.data - &other.data).amax())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.norm()
    }

    /// `(M + M^T) / 2` as a matrix flagged symmetric.
    pub fn symmetric_part(&self) -> Result<Matrix> {
        Self::symmetrized(&self.data)
    }

    /// Inverse via LU with a condition-number guard.
    pub fn inverse(&self) -> Result<Matrix> {
        self.require_square()?;
        let sv = self.data.singular_values();
        let smax = sv.max();
        let smin = sv.min();
        let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        // negated so a NaN condition number is rejected
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(condition <= CONDITION_LIMIT) {
            return Err(Error::NumericalSingularity { condition });
        }
        let inv = self
            .data
            .clone()
            .lu()
            .try_inverse()
            .ok_or(Error::NumericalSingularity { condition })?;
        let mut m = Self::from_dmatrix(inv)?;
        if self.symmetric {
            // inverse of a symmetric matrix is symmetric; remove LU roundoff
            m = Self::symmetrized(&m.data)?;
        }
        Ok(m)
    }

    /// Solves `self * y = rhs` by LU.
    pub fn solve(&self, rhs: &Vector) -> Result<Vector> {
        self.require_square()?;
        crate::error::check_dim(self.nrows(), rhs.dim())?;
        self.data
            .clone()
            .lu()
            .solve(rhs.as_dvector())
            .map(Vector::from_dvector)
            .ok_or(Error::SingularMatrix {
                min_singular_value: 0.0,
            })
    }

    pub(crate) fn require_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::NonSquare {
                rows: self.nrows(),
                cols: self.ncols(),
            })
        }
    }

    pub(crate) fn require_symmetric(&self) -> Result<()> {
        self.require_square()?;
        if self.symmetric {
            Ok(())
        } else {
            Err(Error::NotSymmetric {
                asymmetry: asymmetry(&self.data),
            })
        }
    }

    fn same_shape(&self, other: &Matrix) -> Result<()> {
        crate::error::check_dim(self.nrows(), other.nrows())?;
        crate::error::check_dim(self.ncols(), other.ncols())
    }
}

fn asymmetry(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).amax()
}
