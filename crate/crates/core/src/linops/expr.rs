use nalgebra::{DMatrix, DVector};

use super::{Matrix, Vector};
use crate::error::{check_dim, Error, Result};
use crate::prox_catalog::ConvexAtom;

/// Node of an operator expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Identity,
    Zero,
    Constant(Vector),
    Linear(Matrix),
    /// Counterclockwise rotator by `theta` radians on R^2.
    Rotation(f64),
    ProxOf(ConvexAtom),
    /// Resolvent `(I + A)^{-1}` of a monotone matrix `A`; the inverse is cached.
    ResolventOf { a: Matrix, resolvent: Matrix },
    Scale(f64, Box<OperatorExpr>),
    Sum(Vec<OperatorExpr>),
    Difference(Box<OperatorExpr>, Box<OperatorExpr>),
    /// `outer ∘ inner`
    Compose(Box<OperatorExpr>, Box<OperatorExpr>),
}

/// A map R^n → R^n built from identity, constants, matrices, rotations,
/// prox atoms and resolvents under scaling, sums, differences and composition.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorExpr {
    node: Node,
    dim: usize,
}

/// Result of [`linearize`].
#[derive(Debug, Clone, PartialEq)]
pub enum Linearization {
    Linear(Matrix),
    NotLinear,
}

/// `x ↦ matrix·x + offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineParts {
    pub matrix: Matrix,
    pub offset: Vector,
}

/// Symmetric part min eigenvalue below this rejects a resolvent operand.
pub const MONOTONE_TOL: f64 = 1e-10;

impl OperatorExpr {
    pub fn identity(dim: usize) -> Result<Self> {
        Self::leaf(Node::Identity, dim)
    }

    pub fn zero(dim: usize) -> Result<Self> {
        Self::leaf(Node::Zero, dim)
    }

    pub fn constant(c: Vector) -> Self {
        let dim = c.dim();
        OperatorExpr {
            node: Node::Constant(c),
            dim,
        }
    }

    pub fn linear(m: Matrix) -> Result<Self> {
        m.require_square()?;
        let dim = m.nrows();
        Ok(OperatorExpr {
            node: Node::Linear(m),
            dim,
        })
    }

    pub fn rotation(theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::NonFiniteInput);
        }
        Ok(OperatorExpr {
            node: Node::Rotation(theta),
            dim: 2,
        })
    }

    pub fn prox(atom: ConvexAtom) -> Self {
        let dim = atom.dim();
        OperatorExpr {
            node: Node::ProxOf(atom),
            dim,
        }
    }

    /// Resolvent of a matrix whose symmetric part is PSD.
    pub fn resolvent_of(a: Matrix) -> Result<Self> {
        a.require_square()?;
        let min = super::symmetric_eigen(&a.symmetric_part()?)?.min();
        if min < -MONOTONE_TOL {
            return Err(Error::NotMonotone { min_eigenvalue: min });
        }
        let resolvent = Matrix::identity(a.nrows()).add(&a)?.inverse()?;
        let dim = a.nrows();
        Ok(OperatorExpr {
            node: Node::ResolventOf { a, resolvent },
            dim,
        })
    }

    pub fn scale(alpha: f64, child: OperatorExpr) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::NonFiniteInput);
        }
        let dim = child.dim;
        Ok(OperatorExpr {
            node: Node::Scale(alpha, Box::new(child)),
            dim,
        })
    }

    pub fn sum(children: Vec<OperatorExpr>) -> Result<Self> {
        let dim = children
            .first()
            .ok_or_else(|| Error::InvalidArgument("sum needs at least one operand".into()))?
            .dim;
        for c in &children {
            check_dim(dim, c.dim)?;
        }
        Ok(OperatorExpr {
            node: Node::Sum(children),
            dim,
        })
    }

    pub fn difference(left: OperatorExpr, right: OperatorExpr) -> Result<Self> {
        check_dim(left.dim, right.dim)?;
        let dim = left.dim;
        Ok(OperatorExpr {
            node: Node::Difference(Box::new(left), Box::new(right)),
            dim,
        })
    }

    pub fn compose(outer: OperatorExpr, inner: OperatorExpr) -> Result<Self> {
        check_dim(outer.dim, inner.dim)?;
        let dim = outer.dim;
        Ok(OperatorExpr {
            node: Node::Compose(Box::new(outer), Box::new(inner)),
            dim,
        })
    }

    /// `Id − self`.
    pub fn complement(&self) -> Self {
        OperatorExpr {
            node: Node::Difference(
                Box::new(OperatorExpr {
                    node: Node::Identity,
                    dim: self.dim,
                }),
                Box::new(self.clone()),
            ),
            dim: self.dim,
        }
    }

    /// `self ∘ self ∘ … ∘ self` (`n` times; `n = 0` is the identity).
    pub fn power(&self, n: usize) -> Self {
        let mut out = OperatorExpr {
            node: Node::Identity,
            dim: self.dim,
        };
        for k in 0..n {
            out = if k == 0 {
                self.clone()
            } else {
                OperatorExpr {
                    node: Node::Compose(Box::new(self.clone()), Box::new(out)),
                    dim: self.dim,
                }
            };
        }
        out
    }

    fn leaf(node: Node, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("operator dim must be >= 1".into()));
        }
        Ok(OperatorExpr { node, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node(&self) -> &Node {
        &self.node
    }

    pub fn eval(&self, x: &Vector) -> Result<Vector> {
        check_dim(self.dim, x.dim())?;
        if !x.is_finite() {
            return Err(Error::NonFiniteInput);
        }
        Ok(Vector::from_dvector(self.apply(x.as_dvector())))
    }

    /// Evaluation without input checks; callers guarantee dim and finiteness.
    pub(crate) fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        match &self.node {
            Node::Identity => x.clone(),
            Node::Zero => DVector::zeros(self.dim),
            Node::Constant(c) => c.as_dvector().clone(),
            Node::Linear(m) => m.as_dmatrix() * x,
            Node::Rotation(theta) => {
                let (s, c) = theta.sin_cos();
                DVector::from_vec(vec![c * x[0] - s * x[1], s * x[0] + c * x[1]])
            }
            Node::ProxOf(atom) => atom.prox_raw(x),
            Node::ResolventOf { resolvent, .. } => resolvent.as_dmatrix() * x,
            Node::Scale(alpha, child) => child.apply(x) * *alpha,
            Node::Sum(children) => {
                let mut acc = DVector::zeros(self.dim);
                for c in children {
                    acc += c.apply(x);
                }
                acc
            }
            Node::Difference(l, r) => l.apply(x) - r.apply(x),
            Node::Compose(outer, inner) => outer.apply(&inner.apply(x)),
        }
    }

    /// `(M, b, linear)` with `self(x) = M x + b`; `linear` is false once any
    /// translation-bearing node (constant or affine prox) appears.
    fn affine(&self) -> Option<(DMatrix<f64>, DVector<f64>, bool)> {
        let n = self.dim;
        match &self.node {
            Node::Identity => Some((DMatrix::identity(n, n), DVector::zeros(n), true)),
            Node::Zero => Some((DMatrix::zeros(n, n), DVector::zeros(n), true)),
            Node::Constant(c) => Some((DMatrix::zeros(n, n), c.as_dvector().clone(), false)),
            Node::Linear(m) => Some((m.as_dmatrix().clone(), DVector::zeros(n), true)),
            Node::Rotation(theta) => Some((Matrix::rotation(*theta).as_dmatrix().clone(), DVector::zeros(n), true)),
            Node::ProxOf(atom) => atom.prox_affine(),
            Node::ResolventOf { resolvent, .. } => Some((resolvent.as_dmatrix().clone(), DVector::zeros(n), true)),
            Node::Scale(alpha, child) => child.affine().map(|(m, b, l)| (m * *alpha, b * *alpha, l)),
            Node::Sum(children) => {
                let mut m = DMatrix::zeros(n, n);
                let mut b = DVector::zeros(n);
                let mut linear = true;
                for c in children {
                    let (cm, cb, cl) = c.affine()?;
                    m += cm;
                    b += cb;
                    linear &= cl;
                }
                Some((m, b, linear))
            }
            Node::Difference(l, r) => {
                let (lm, lb, ll) = l.affine()?;
                let (rm, rb, rl) = r.affine()?;
                Some((lm - rm, lb - rb, ll && rl))
            }
            Node::Compose(outer, inner) => {
                let (om, ob, ol) = outer.affine()?;
                let (im, ib, il) = inner.affine()?;
                Some((&om * im, &om * ib + ob, ol && il))
            }
        }
    }
}

/// Exact matrix of a purely linear tree; `NotLinear` when a constant or a
/// nonlinear (or translation-bearing) prox atom appears.
pub fn linearize(op: &OperatorExpr) -> Linearization {
    match op.affine() {
        Some((m, _, true)) => match Matrix::from_dmatrix(m) {
            Ok(m) => Linearization::Linear(m),
            Err(_) => Linearization::NotLinear,
        },
        _ => Linearization::NotLinear,
    }
}

/// Affine decomposition `x ↦ M x + b` whenever the tree is affine.
pub fn affine_parts(op: &OperatorExpr) -> Option<AffineParts> {
    let (m, b, _) = op.affine()?;
    Some(AffineParts {
        matrix: Matrix::from_dmatrix(m).ok()?,
        offset: Vector::new(b.as_slice().to_vec()).ok()?,
    })
}

pub fn eval(op: &OperatorExpr, x: &Vector) -> Result<Vector> {
    op.eval(x)
}
