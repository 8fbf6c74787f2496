use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::linops::{symmetric_eigen, Matrix, Vector};

/// Orthonormality tolerance for subspace bases.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

/// Relative tolerance for deciding the second-order-cone boundary case.
pub const SOC_BOUNDARY_TOL: f64 = 1e-12;

/// A linear subspace of R^dim given by an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    dim: usize,
    basis: Vec<Vector>,
}

impl Subspace {
    pub fn new(dim: usize, basis: Vec<Vector>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("subspace ambient dim must be >= 1".into()));
        }
        for b in &basis {
            check_dim(dim, b.dim())?;
        }
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                if (a.dot(b) - expected).abs() > ORTHONORMAL_TOL {
                    return Err(Error::InvalidArgument(format!(
                        "subspace basis is not orthonormal (<b{i}, b{j}> = {})",
                        a.dot(b)
                    )));
                }
            }
        }
        Ok(Subspace { dim, basis })
    }

    /// Span of arbitrary vectors, orthonormalized by modified Gram-Schmidt.
    pub fn span(dim: usize, vectors: &[Vector]) -> Result<Self> {
        let mut basis: Vec<DVector<f64>> = Vec::new();
        for v in vectors {
            check_dim(dim, v.dim())?;
            let mut w = v.as_dvector().clone();
            for b in &basis {
                let p = b.dot(&w);
                w.axpy(-p, b, 1.0);
            }
            let n = w.norm();
            if n > 1e-12 * (1.0 + v.norm()) {
                basis.push(w / n);
            }
        }
        Self::new(dim, basis.into_iter().map(Vector::from_dvector).collect())
    }

    /// Span of the listed standard basis vectors.
    pub fn coordinate(dim: usize, axes: &[usize]) -> Result<Self> {
        if let Some(&bad) = axes.iter().find(|&&i| i >= dim) {
            return Err(Error::InvalidArgument(format!("axis {bad} out of range for dim {dim}")));
        }
        Self::span(dim, &axes.iter().map(|&i| Vector::basis(dim, i)).collect::<Vec<_>>())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vector] {
        &self.basis
    }

    /// Orthogonal projector `B B^T`.
    pub fn projector_matrix(&self) -> DMatrix<f64> {
        let mut p = DMatrix::zeros(self.dim, self.dim);
        for b in &self.basis {
            let b = b.as_dvector();
            p += b * b.transpose();
        }
        p
    }

    fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim);
        for b in &self.basis {
            let b = b.as_dvector();
            out.axpy(b.dot(x), b, 1.0);
        }
        out
    }

    pub fn orthogonal_complement(&self) -> Result<Subspace> {
        let complement = DMatrix::identity(self.dim, self.dim) - self.projector_matrix();
        let eig = symmetric_eigen(&Matrix::symmetrized(&complement)?)?;
        let basis = eig
            .values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0.5)
            .map(|(k, _)| eig.vector(k))
            .collect();
        Subspace::new(self.dim, basis)
    }
}

/// Nonempty closed convex cones with closed-form projectors.
#[derive(Debug, Clone, PartialEq)]
pub enum Cone {
    /// {0}
    Zero { dim: usize },
    /// R^dim
    Full { dim: usize },
    Subspace(Subspace),
    NonnegOrthant { dim: usize },
    NonposOrthant { dim: usize },
    /// {(t, z) : ||z|| <= t}
    SecondOrder { dim: usize },
    /// {(t, z) : ||z|| <= -t}
    NegSecondOrder { dim: usize },
    /// {s d : s >= 0} for a unit `d`.
    Ray(Vector),
    /// {x : <d, x> <= 0} for a unit `d`.
    Halfspace(Vector),
}

fn unit(d: &Vector) -> Result<Vector> {
    let n = d.norm();
    if n <= 1e-12 {
        return Err(Error::InvalidArgument("direction must be nonzero".into()));
    }
    if n == 1.0 {
        return Ok(d.clone());
    }
    Ok(d * (1.0 / n))
}

fn require_positive_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        Err(Error::InvalidArgument("cone dim must be >= 1".into()))
    } else {
        Ok(())
    }
}

impl Cone {
    pub fn zero(dim: usize) -> Result<Self> {
        require_positive_dim(dim)?;
        Ok(Cone::Zero { dim })
    }

    pub fn full(dim: usize) -> Result<Self> {
        require_positive_dim(dim)?;
        Ok(Cone::Full { dim })
    }

    pub fn nonneg_orthant(dim: usize) -> Result<Self> {
        require_positive_dim(dim)?;
        Ok(Cone::NonnegOrthant { dim })
    }

    pub fn nonpos_orthant(dim: usize) -> Result<Self> {
        require_positive_dim(dim)?;
        Ok(Cone::NonposOrthant { dim })
    }

    pub fn second_order(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidArgument("second-order cone needs dim >= 2".into()));
        }
        Ok(Cone::SecondOrder { dim })
    }

    pub fn neg_second_order(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidArgument("second-order cone needs dim >= 2".into()));
        }
        Ok(Cone::NegSecondOrder { dim })
    }

    /// Ray spanned by `d` (normalized).
    pub fn ray(d: &Vector) -> Result<Self> {
        Ok(Cone::Ray(unit(d)?))
    }

    /// Halfspace cone with outward normal `d` (normalized).
    pub fn halfspace(d: &Vector) -> Result<Self> {
        Ok(Cone::Halfspace(unit(d)?))
    }

    pub fn subspace(s: Subspace) -> Self {
        Cone::Subspace(s)
    }

    pub fn dim(&self) -> usize {
        match self {
            Cone::Zero { dim }
            | Cone::Full { dim }
            | Cone::NonnegOrthant { dim }
            | Cone::NonposOrthant { dim }
            | Cone::SecondOrder { dim }
            | Cone::NegSecondOrder { dim } => *dim,
            Cone::Subspace(s) => s.dim(),
            Cone::Ray(d) | Cone::Halfspace(d) => d.dim(),
        }
    }

    pub fn project(&self, x: &Vector) -> Result<Vector> {
        check_dim(self.dim(), x.dim())?;
        Ok(Vector::from_dvector(self.project_raw(x.as_dvector())))
    }

    pub(crate) fn project_raw(&self, x: &DVector<f64>) -> DVector<f64> {
        match self {
            Cone::Zero { dim } => DVector::zeros(*dim),
            Cone::Full { .. } => x.clone(),
            Cone::Subspace(s) => s.project(x),
            Cone::NonnegOrthant { .. } => x.map(|v| v.max(0.0)),
            Cone::NonposOrthant { .. } => x.map(|v| v.min(0.0)),
            Cone::SecondOrder { .. } => project_soc(x),
            Cone::NegSecondOrder { .. } => -project_soc(&-x),
            Cone::Ray(d) => {
                let d = d.as_dvector();
                d * d.dot(x).max(0.0)
            }
            Cone::Halfspace(d) => {
                let d = d.as_dvector();
                x - d * d.dot(x).max(0.0)
            }
        }
    }

    /// Membership up to absolute tolerance `tol`.
    pub fn contains(&self, x: &Vector, tol: f64) -> Result<bool> {
        check_dim(self.dim(), x.dim())?;
        let v = x.as_dvector();
        Ok(match self {
            Cone::Zero { .. } => v.norm() <= tol,
            Cone::Full { .. } => true,
            Cone::NonnegOrthant { .. } => v.iter().all(|&c| c >= -tol),
            Cone::NonposOrthant { .. } => v.iter().all(|&c| c <= tol),
            Cone::SecondOrder { .. } => v.rows(1, v.len() - 1).norm() <= v[0] + tol,
            Cone::NegSecondOrder { .. } => v.rows(1, v.len() - 1).norm() <= -v[0] + tol,
            Cone::Halfspace(d) => d.as_dvector().dot(v) <= tol,
            Cone::Subspace(_) | Cone::Ray(_) => (v - self.project_raw(v)).norm() <= tol,
        })
    }

    /// The polar cone {y : <x, y> <= 0 for all x in the cone}.
    pub fn polar(&self) -> Result<Cone> {
        Ok(match self {
            Cone::Zero { dim } => Cone::Full { dim: *dim },
            Cone::Full { dim } => Cone::Zero { dim: *dim },
            Cone::Subspace(s) => {
                if s.rank() == 0 {
                    Cone::Full { dim: s.dim() }
                } else if s.rank() == s.dim() {
                    Cone::Zero { dim: s.dim() }
                } else {
                    Cone::Subspace(s.orthogonal_complement()?)
                }
            }
            Cone::NonnegOrthant { dim } => Cone::NonposOrthant { dim: *dim },
            Cone::NonposOrthant { dim } => Cone::NonnegOrthant { dim: *dim },
            Cone::SecondOrder { dim } => Cone::NegSecondOrder { dim: *dim },
            Cone::NegSecondOrder { dim } => Cone::SecondOrder { dim: *dim },
            Cone::Ray(d) => Cone::Halfspace(d.clone()),
            Cone::Halfspace(d) => Cone::Ray(d.clone()),
        })
    }

    /// Projector matrix when the cone is a subspace (including {0} and R^n).
    pub fn linear_projector(&self) -> Option<DMatrix<f64>> {
        match self {
            Cone::Zero { dim } => Some(DMatrix::zeros(*dim, *dim)),
            Cone::Full { dim } => Some(DMatrix::identity(*dim, *dim)),
            Cone::Subspace(s) => Some(s.projector_matrix()),
            _ => None,
        }
    }

    pub fn is_subspace(&self) -> bool {
        self.linear_projector().is_some()
    }

    pub fn describe(&self) -> String {
        match self {
            Cone::Zero { dim } => format!("{{0}} in R^{dim}"),
            Cone::Full { dim } => format!("R^{dim}"),
            Cone::Subspace(s) => format!("subspace of rank {} in R^{}", s.rank(), s.dim()),
            Cone::NonnegOrthant { dim } => format!("nonnegative orthant in R^{dim}"),
            Cone::NonposOrthant { dim } => format!("nonpositive orthant in R^{dim}"),
            Cone::SecondOrder { dim } => format!("second-order cone in R^{dim}"),
            Cone::NegSecondOrder { dim } => format!("negated second-order cone in R^{dim}"),
            Cone::Ray(d) => format!("ray along {:?}", d.as_slice()),
            Cone::Halfspace(d) => format!("halfspace cone with normal {:?}", d.as_slice()),
        }
    }
}

/// Projection onto {(t, z) : ||z|| <= t}.
fn project_soc(x: &DVector<f64>) -> DVector<f64> {
    let t = x[0];
    let z = x.rows(1, x.len() - 1);
    let nz = z.norm();
    let slack = SOC_BOUNDARY_TOL * (nz + t.abs());
    if nz <= t + slack {
        x.clone()
    } else if nz <= -t + slack {
        DVector::zeros(x.len())
    } else {
        let s = 0.5 * (t + nz);
        let mut out = DVector::zeros(x.len());
        out[0] = s;
        let scale = s / nz;
        for i in 1..x.len() {
            out[i] = scale * x[i];
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> Vector {
        Vector::from_slice(c).unwrap()
    }

    #[test]
    fn soc_three_cases() {
        let soc = Cone::second_order(3).unwrap();
        // inside
        assert_eq!(soc.project(&v(&[2.0, 1.0, 0.0])).unwrap(), v(&[2.0, 1.0, 0.0]));
        // polar region
        assert_eq!(soc.project(&v(&[-2.0, 1.0, 0.0])).unwrap(), v(&[0.0, 0.0, 0.0]));
        // (0, 1, 0) -> (1/2, 1/2, 0)
        let p = soc.project(&v(&[0.0, 1.0, 0.0])).unwrap();
        assert!(p.max_abs_diff(&v(&[0.5, 0.5, 0.0])) < 1e-15);
    }

    #[test]
    fn soc_boundary_is_fixed() {
        let soc = Cone::second_order(3).unwrap();
        let x = v(&[0.3, 0.7, -1.1]);
        let p = soc.project(&x).unwrap();
        assert_eq!(soc.project(&p).unwrap(), p);
    }

    #[test]
    fn polar_subspace_is_complement() {
        let line = Subspace::coordinate(2, &[0]).unwrap();
        let polar = Cone::Subspace(line).polar().unwrap();
        let Cone::Subspace(c) = polar else { panic!("expected subspace") };
        assert_eq!(c.rank(), 1);
        let b = &c.basis()[0];
        assert!(b[0].abs() < 1e-12 && (b[1].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn polar_of_trivial_cones() {
        assert_eq!(Cone::zero(3).unwrap().polar().unwrap(), Cone::Full { dim: 3 });
        assert_eq!(Cone::full(3).unwrap().polar().unwrap(), Cone::Zero { dim: 3 });
    }

    #[test]
    fn polar_of_orthant_is_nonpositive() {
        let polar = Cone::nonneg_orthant(3).unwrap().polar().unwrap();
        assert_eq!(polar, Cone::NonposOrthant { dim: 3 });
        // every sampled orthant element has nonpositive inner product with the polar
        let pts = [[1.0, 2.0, 0.0], [0.5, 0.0, 3.0], [0.0, 0.0, 0.0]];
        let pol = [[-1.0, -0.2, -4.0], [0.0, -1.0, 0.0]];
        for c in pts {
            for q in pol {
                assert!(v(&c).dot(&v(&q)) <= 0.0);
                assert!(polar.contains(&v(&q), 1e-12).unwrap());
            }
        }
    }

    #[test]
    fn ray_and_halfspace_are_polar() {
        let ray = Cone::ray(&v(&[2.0, 0.0])).unwrap();
        let h = ray.polar().unwrap();
        assert!(h.contains(&v(&[-1.0, 5.0]), 0.0).unwrap());
        assert!(!h.contains(&v(&[1.0, 5.0]), 0.0).unwrap());
        assert_eq!(h.polar().unwrap(), ray);
    }

    #[test]
    fn non_orthonormal_basis_rejected() {
        let r = Subspace::new(2, vec![v(&[1.0, 0.0]), v(&[1.0, 1.0])]);
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn gram_schmidt_span() {
        let s = Subspace::span(3, &[v(&[1.0, 1.0, 0.0]), v(&[2.0, 2.0, 0.0]), v(&[0.0, 1.0, 0.0])])
            .unwrap();
        assert_eq!(s.rank(), 2);
    }
}
