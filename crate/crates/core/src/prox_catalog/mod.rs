//! Closed-form proximal mappings, function values, Moreau envelopes and
//! Moreau-decomposition partners for a fixed catalog of convex atoms.
//!
//! `prox_f(x) = argmin_y f(y) + ½‖x − y‖²`. The conjugate prox is never formed
//! symbolically; it is always `x − prox_f(x)`.

mod cone;

pub use cone::{Cone, Subspace, ORTHONORMAL_TOL, SOC_BOUNDARY_TOL};

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::linops::{symmetric_eigen, Matrix, Vector};

/// Membership tolerance used by [`ConvexAtom::fn_value`] for indicator sets.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Quadratic atoms accept symmetric matrices with min eigenvalue above this.
pub const PSD_TOL: f64 = 1e-10;

/// `x ↦ ½⟨x, Ax⟩` with `A` symmetric PSD; caches `(I + A)^{-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    a: Matrix,
    resolvent: Matrix,
}

impl QuadraticForm {
    pub fn new(a: Matrix) -> Result<Self> {
        a.require_symmetric()?;
        let min = symmetric_eigen(&a)?.min();
        if min < -PSD_TOL {
            return Err(Error::NonPsdQuadratic { min_eigenvalue: min });
        }
        let resolvent = Matrix::identity(a.nrows()).add(&a)?.inverse()?;
        Ok(QuadraticForm { a, resolvent })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.a
    }

    /// `(I + A)^{-1}`, the prox of this form.
    pub fn resolvent(&self) -> &Matrix {
        &self.resolvent
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AtomKind {
    ZeroFunction { dim: usize },
    IndicatorPoint(Vector),
    IndicatorBall { center: Vector, radius: f64 },
    /// Indicator of a closed convex cone (subspace, orthant, SOC, ray and their polars).
    Indicator(Cone),
    Quadratic(QuadraticForm),
    L1Norm { dim: usize, lambda: f64 },
    L2Norm { dim: usize, lambda: f64 },
    LinearFunc(Vector),
    /// `x ↦ base(x − c) − ⟨c, x⟩ + gamma`
    Shifted {
        base: Box<ConvexAtom>,
        c: Vector,
        gamma: f64,
    },
}

/// A convex, lsc, proper function on R^n with closed-form prox.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexAtom {
    kind: AtomKind,
}

fn positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive and finite, got {value}")))
    }
}

impl ConvexAtom {
    pub fn zero_function(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dim must be >= 1".into()));
        }
        Ok(Self::from_kind(AtomKind::ZeroFunction { dim }))
    }

    pub fn indicator_point(p: Vector) -> Self {
        Self::from_kind(AtomKind::IndicatorPoint(p))
    }

    pub fn indicator_ball(center: Vector, radius: f64) -> Result<Self> {
        positive("radius", radius)?;
        Ok(Self::from_kind(AtomKind::IndicatorBall { center, radius }))
    }

    pub fn indicator_cone(cone: Cone) -> Self {
        Self::from_kind(AtomKind::Indicator(cone))
    }

    pub fn indicator_subspace(subspace: Subspace) -> Self {
        Self::indicator_cone(Cone::Subspace(subspace))
    }

    pub fn indicator_orthant(dim: usize) -> Result<Self> {
        Ok(Self::indicator_cone(Cone::nonneg_orthant(dim)?))
    }

    pub fn indicator_soc(dim: usize) -> Result<Self> {
        Ok(Self::indicator_cone(Cone::second_order(dim)?))
    }

    pub fn indicator_ray(direction: &Vector) -> Result<Self> {
        Ok(Self::indicator_cone(Cone::ray(direction)?))
    }

    pub fn quadratic(a: Matrix) -> Result<Self> {
        Ok(Self::from_kind(AtomKind::Quadratic(QuadraticForm::new(a)?)))
    }

    pub fn l1_norm(dim: usize, lambda: f64) -> Result<Self> {
        positive("lambda", lambda)?;
        if dim == 0 {
            return Err(Error::InvalidArgument("dim must be >= 1".into()));
        }
        Ok(Self::from_kind(AtomKind::L1Norm { dim, lambda }))
    }

    pub fn l2_norm(dim: usize, lambda: f64) -> Result<Self> {
        positive("lambda", lambda)?;
        if dim == 0 {
            return Err(Error::InvalidArgument("dim must be >= 1".into()));
        }
        Ok(Self::from_kind(AtomKind::L2Norm { dim, lambda }))
    }

    pub fn linear_func(a: Vector) -> Self {
        Self::from_kind(AtomKind::LinearFunc(a))
    }

    /// `x ↦ base(x − c) − ⟨c, x⟩ + gamma`.
    pub fn shifted(base: ConvexAtom, c: Vector, gamma: f64) -> Result<Self> {
        check_dim(base.dim(), c.dim())?;
        if !gamma.is_finite() {
            return Err(Error::NonFiniteInput);
        }
        Ok(Self::from_kind(AtomKind::Shifted {
            base: Box::new(base),
            c,
            gamma,
        }))
    }

    fn from_kind(kind: AtomKind) -> Self {
        ConvexAtom { kind }
    }

    pub fn kind(&self) -> &AtomKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            AtomKind::ZeroFunction { dim } | AtomKind::L1Norm { dim, .. } | AtomKind::L2Norm { dim, .. } => *dim,
            AtomKind::IndicatorPoint(p) | AtomKind::LinearFunc(p) => p.dim(),
            AtomKind::IndicatorBall { center, .. } => center.dim(),
            AtomKind::Indicator(cone) => cone.dim(),
            AtomKind::Quadratic(q) => q.matrix().nrows(),
            AtomKind::Shifted { base, .. } => base.dim(),
        }
    }

    pub fn is_indicator(&self) -> bool {
        matches!(
            self.kind,
            AtomKind::IndicatorPoint(_) | AtomKind::IndicatorBall { .. } | AtomKind::Indicator(_)
        )
    }

    /// The cone whose indicator this atom is, if any.
    pub fn as_cone(&self) -> Result<Cone> {
        match &self.kind {
            AtomKind::Indicator(c) => Ok(c.clone()),
            AtomKind::ZeroFunction { dim } => Cone::full(*dim),
            AtomKind::IndicatorPoint(p) if p.norm() == 0.0 => Cone::zero(p.dim()),
            other => Err(Error::UnsupportedCone(format!("{other:?} is not a cone indicator"))),
        }
    }

    pub fn prox(&self, x: &Vector) -> Result<Vector> {
        check_dim(self.dim(), x.dim())?;
        if !x.is_finite() {
            return Err(Error::NonFiniteInput);
        }
        Ok(Vector::from_dvector(self.prox_raw(x.as_dvector())))
    }

    pub(crate) fn prox_raw(&self, x: &DVector<f64>) -> DVector<f64> {
        match &self.kind {
            AtomKind::ZeroFunction { .. } => x.clone(),
            AtomKind::IndicatorPoint(p) => p.as_dvector().clone(),
            AtomKind::IndicatorBall { center, radius } => {
                let c = center.as_dvector();
                let d = x - c;
                let n = d.norm();
                if n <= *radius {
                    x.clone()
                } else {
                    c + d * (*radius / n)
                }
            }
            AtomKind::Indicator(cone) => cone.project_raw(x),
            AtomKind::Quadratic(q) => q.resolvent().as_dmatrix() * x,
            AtomKind::L1Norm { lambda, .. } => x.map(|v| v.signum() * (v.abs() - lambda).max(0.0)),
            AtomKind::L2Norm { lambda, .. } => {
                let n = x.norm();
                if n <= *lambda {
                    DVector::zeros(x.len())
                } else {
                    x * (1.0 - lambda / n)
                }
            }
            AtomKind::LinearFunc(a) => x - a.as_dvector(),
            // argmin_y base(y − c) − ⟨c, y⟩ + ½‖x − y‖²; with z = y − c the tilt
            // cancels the translation and z = prox_base(x)
            AtomKind::Shifted { base, c, .. } => c.as_dvector() + base.prox_raw(x),
        }
    }

    /// `f(x)`, `+∞` outside the domain of an indicator.
    pub fn fn_value(&self, x: &Vector) -> Result<f64> {
        check_dim(self.dim(), x.dim())?;
        Ok(self.value_raw(x.as_dvector()))
    }

    fn value_raw(&self, x: &DVector<f64>) -> f64 {
        let indicator = |inside: bool| if inside { 0.0 } else { f64::INFINITY };
        match &self.kind {
            AtomKind::ZeroFunction { .. } => 0.0,
            AtomKind::IndicatorPoint(p) => indicator((x - p.as_dvector()).norm() <= MEMBERSHIP_TOL),
            AtomKind::IndicatorBall { center, radius } => {
                indicator((x - center.as_dvector()).norm() <= radius + MEMBERSHIP_TOL)
            }
            AtomKind::Indicator(cone) => {
                let v = Vector::from_dvector(x.clone());
                indicator(cone.contains(&v, MEMBERSHIP_TOL).unwrap_or(false))
            }
            AtomKind::Quadratic(q) => 0.5 * x.dot(&(q.matrix().as_dmatrix() * x)),
            AtomKind::L1Norm { lambda, .. } => lambda * x.iter().map(|v| v.abs()).sum::<f64>(),
            AtomKind::L2Norm { lambda, .. } => lambda * x.norm(),
            AtomKind::LinearFunc(a) => a.as_dvector().dot(x),
            AtomKind::Shifted { base, c, gamma } => {
                let c = c.as_dvector();
                base.value_raw(&(x - c)) - c.dot(x) + gamma
            }
        }
    }

    /// `(prox_f(x), f(prox_f(x)))`, with indicator values taken as exactly 0 at
    /// the projection.
    fn prox_with_value(&self, x: &DVector<f64>) -> (DVector<f64>, f64) {
        match &self.kind {
            AtomKind::IndicatorPoint(_) | AtomKind::IndicatorBall { .. } | AtomKind::Indicator(_) => {
                (self.prox_raw(x), 0.0)
            }
            AtomKind::Shifted { base, c, gamma } => {
                let (pb, vb) = base.prox_with_value(x);
                let c = c.as_dvector();
                let p = c + pb;
                let v = vb - c.dot(&p) + gamma;
                (p, v)
            }
            _ => {
                let p = self.prox_raw(x);
                let v = self.value_raw(&p);
                (p, v)
            }
        }
    }

    /// Moreau envelope `min_y f(y) + ½‖x − y‖²`.
    pub fn envelope(&self, x: &Vector) -> Result<f64> {
        check_dim(self.dim(), x.dim())?;
        let x = x.as_dvector();
        let (p, v) = self.prox_with_value(x);
        Ok(v + 0.5 * (x - p).norm_squared())
    }

    /// `prox_{f*}(x) = x − prox_f(x)`.
    pub fn conjugate_prox(&self, x: &Vector) -> Result<Vector> {
        let p = self.prox(x)?;
        Ok(x - &p)
    }

    /// Affine form `(M, b, linear)` of the prox when it is affine; `linear` is
    /// false when the atom contributes a translation.
    pub(crate) fn prox_affine(&self) -> Option<(DMatrix<f64>, DVector<f64>, bool)> {
        let n = self.dim();
        match &self.kind {
            AtomKind::ZeroFunction { .. } => Some((DMatrix::identity(n, n), DVector::zeros(n), true)),
            AtomKind::Quadratic(q) => Some((q.resolvent().as_dmatrix().clone(), DVector::zeros(n), true)),
            AtomKind::Indicator(cone) => cone.linear_projector().map(|m| (m, DVector::zeros(n), true)),
            AtomKind::IndicatorPoint(p) => Some((DMatrix::zeros(n, n), p.as_dvector().clone(), false)),
            AtomKind::LinearFunc(a) => Some((DMatrix::identity(n, n), -a.as_dvector(), false)),
            AtomKind::Shifted { base, c, .. } => {
                base.prox_affine().map(|(m, b, _)| (m, b + c.as_dvector(), false))
            }
            _ => None,
        }
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            AtomKind::ZeroFunction { dim } => format!("zero function on R^{dim}"),
            AtomKind::IndicatorPoint(p) => format!("indicator of {{{:?}}}", p.as_slice()),
            AtomKind::IndicatorBall { center, radius } => {
                format!("indicator of ball(center {:?}, radius {radius})", center.as_slice())
            }
            AtomKind::Indicator(c) => format!("indicator of {}", c.describe()),
            AtomKind::Quadratic(q) => format!("quadratic form on R^{}", q.matrix().nrows()),
            AtomKind::L1Norm { lambda, .. } => format!("{lambda}·l1 norm"),
            AtomKind::L2Norm { lambda, .. } => format!("{lambda}·l2 norm"),
            AtomKind::LinearFunc(a) => format!("linear function <{:?}, x>", a.as_slice()),
            AtomKind::Shifted { base, c, gamma } => {
                format!("shift of ({}) by c = {:?}, gamma = {gamma}", base.describe(), c.as_slice())
            }
        }
    }
}

/// Free-function forms of the atom methods.
pub fn prox(f: &ConvexAtom, x: &Vector) -> Result<Vector> {
    f.prox(x)
}

pub fn fn_value(f: &ConvexAtom, x: &Vector) -> Result<f64> {
    f.fn_value(x)
}

pub fn envelope(f: &ConvexAtom, x: &Vector) -> Result<f64> {
    f.envelope(x)
}

pub fn conjugate_prox(f: &ConvexAtom, x: &Vector) -> Result<Vector> {
    f.conjugate_prox(x)
}

/// Polar of the cone underlying a cone-indicator atom.
pub fn polar(f: &ConvexAtom) -> Result<Cone> {
    f.as_cone()?.polar()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> Vector {
        Vector::from_slice(c).unwrap()
    }

    #[test]
    fn ball_projection() {
        let ball = ConvexAtom::indicator_ball(Vector::zeros(2), 1.0).unwrap();
        let p = ball.prox(&v(&[3.0, 4.0])).unwrap();
        assert!(p.max_abs_diff(&v(&[0.6, 0.8])) < 1e-15);
        assert!((ball.envelope(&v(&[3.0, 4.0])).unwrap() - 8.0).abs() < 1e-12);
        let q = ball.conjugate_prox(&v(&[3.0, 4.0])).unwrap();
        assert!(q.max_abs_diff(&v(&[2.4, 3.2])) < 1e-15);
    }

    #[test]
    fn l1_soft_threshold() {
        let f = ConvexAtom::l1_norm(1, 1.0).unwrap();
        assert_eq!(f.prox(&v(&[2.0])).unwrap(), v(&[1.0]));
        assert_eq!(f.prox(&v(&[-0.5])).unwrap(), v(&[0.0]));
        assert_eq!(ConvexAtom::l1_norm(2, 2.0).unwrap().fn_value(&v(&[1.0, -3.0])).unwrap(), 8.0);
    }

    #[test]
    fn zero_function_prox_is_identity() {
        let f = ConvexAtom::zero_function(3).unwrap();
        let x = v(&[1.0, -2.0, 0.5]);
        assert_eq!(f.prox(&x).unwrap(), x);
        assert_eq!(f.envelope(&x).unwrap(), 0.0);
        assert_eq!(f.conjugate_prox(&x).unwrap(), Vector::zeros(3));
    }

    #[test]
    fn quadratic_prox_solves_linear_system() {
        let f = ConvexAtom::quadratic(Matrix::diag(&[1.0, 3.0]).unwrap()).unwrap();
        let p = f.prox(&v(&[1.0, 1.0])).unwrap();
        assert!(p.max_abs_diff(&v(&[0.5, 0.25])) < 1e-15);
        let id = ConvexAtom::quadratic(Matrix::identity(2)).unwrap();
        assert_eq!(id.fn_value(&v(&[1.0, 1.0])).unwrap(), 1.0);
        assert!(id.conjugate_prox(&v(&[2.0, 0.0])).unwrap().max_abs_diff(&v(&[1.0, 0.0])) < 1e-15);
    }

    #[test]
    fn non_psd_quadratic_rejected() {
        let r = ConvexAtom::quadratic(Matrix::diag(&[1.0, -0.5]).unwrap());
        assert!(matches!(r, Err(Error::NonPsdQuadratic { .. })));
        let r = ConvexAtom::quadratic(Matrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap());
        assert!(matches!(r, Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn indicator_values() {
        let ball = ConvexAtom::indicator_ball(Vector::zeros(2), 1.0).unwrap();
        assert_eq!(ball.fn_value(&v(&[2.0, 0.0])).unwrap(), f64::INFINITY);
        assert_eq!(ball.fn_value(&v(&[1.0 + 1e-10, 0.0])).unwrap(), 0.0);
    }

    #[test]
    fn envelope_of_origin_indicator_is_half_norm_squared() {
        let f = ConvexAtom::indicator_point(Vector::zeros(2));
        assert_eq!(f.envelope(&v(&[3.0, 4.0])).unwrap(), 12.5);
    }

    #[test]
    fn shifted_prox_translates_by_c() {
        let f = ConvexAtom::indicator_point(Vector::zeros(2));
        let g = ConvexAtom::shifted(f, v(&[1.0, 0.0]), 0.0).unwrap();
        assert_eq!(g.prox(&v(&[7.0, -3.0])).unwrap(), v(&[1.0, 0.0]));
    }

    #[test]
    fn dimension_mismatch() {
        let f = ConvexAtom::l2_norm(3, 1.0).unwrap();
        assert_eq!(
            f.prox(&v(&[1.0, 2.0])),
            Err(Error::DimensionMismatch { expected: 3, found: 2 })
        );
        assert!(f.envelope(&v(&[1.0])).is_err());
    }

    #[test]
    fn polar_requires_cone() {
        let ball = ConvexAtom::indicator_ball(Vector::zeros(2), 1.0).unwrap();
        assert!(matches!(polar(&ball), Err(Error::UnsupportedCone(_))));
        let zero = ConvexAtom::indicator_point(Vector::zeros(2));
        assert_eq!(polar(&zero).unwrap(), Cone::Full { dim: 2 });
    }
}
