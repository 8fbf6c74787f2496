//! Resolvents of monotone matrices, the Minty inverse identity, and the
//! Loewner/resolvent compatibility chains.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::certify::{
    certify_monotone, resolvent_leq, sampled_certificate, Certificate, Property,
};
use crate::error::{check_dim, Error, Result};
use crate::linops::{symmetric_eigen, top_singular, Matrix, OperatorExpr, MONOTONE_TOL};
use crate::prox_catalog::ConvexAtom;
use crate::sampling::{self, SamplerConfig};

/// Relative Frobenius tolerance for `J_A + J_{A^{-1}} = I`.
pub const MINTY_TOL: f64 = 1e-9;

/// Smallest singular value accepted for an invertible operand.
pub const INVERTIBLE_TOL: f64 = 1e-10;

/// A square matrix whose symmetric part is PSD.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneMatrix {
    a: Matrix,
    symmetric_part_min_eig: f64,
}

impl MonotoneMatrix {
    pub fn new(a: Matrix) -> Result<Self> {
        a.require_square()?;
        let min = symmetric_eigen(&a.symmetric_part()?)?.min();
        if min < -MONOTONE_TOL {
            return Err(Error::NotMonotone { min_eigenvalue: min });
        }
        Ok(MonotoneMatrix {
            a,
            symmetric_part_min_eig: min,
        })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.a
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn symmetric_part_min_eig(&self) -> f64 {
        self.symmetric_part_min_eig
    }

    /// The resolvent as an operator expression node.
    pub fn resolvent_expr(&self) -> Result<OperatorExpr> {
        OperatorExpr::resolvent_of(self.a.clone())
    }
}

/// `(I + A)^{-1}`.
pub fn resolvent(a: &MonotoneMatrix) -> Result<Matrix> {
    Matrix::identity(a.dim()).add(&a.a)?.inverse()
}

/// Verifies `J_A + J_{A^{-1}} = I` for invertible monotone `A`.
pub fn minty_inverse_identity_check(a: &MonotoneMatrix, cfg: &SamplerConfig) -> Result<Certificate> {
    let smin = a.a.as_dmatrix().singular_values().min();
    if smin <= INVERTIBLE_TOL {
        return Err(Error::SingularMatrix {
            min_singular_value: smin,
        });
    }
    let inverse = MonotoneMatrix::new(a.a.inverse()?)?;
    let sum = resolvent(a)?.add(&resolvent(&inverse)?)?;
    let n = a.dim();
    let residual = sum.sub(&Matrix::identity(n))?;
    let relative = residual.frobenius_norm() / (n as f64).sqrt();
    let cert = Certificate::exact_bound(Property::ConstantMap, relative, MINTY_TOL);
    let cert = if cert.holds() {
        cert
    } else {
        // falsify with a witness for the residual map
        let op = OperatorExpr::linear(residual)?;
        crate::certify::certify_constant(&op, cfg)
    };
    Ok(cert.with_note("J_A + J_{A^-1} - Id"))
}

/// `B ⪯_L A`, i.e. `A − B` is PSD.
pub fn loewner_leq(a: &Matrix, b: &Matrix) -> Result<Certificate> {
    a.require_symmetric()?;
    b.require_symmetric()?;
    check_dim(a.nrows(), b.nrows())?;
    let diff = OperatorExpr::linear(a.sub(b)?)?;
    Ok(certify_monotone(&diff, &SamplerConfig::default()))
}

/// Verdicts of `B ⪯_L A`, `J_A ⪯_L J_B` and `J_A ⪯ J_B`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoewnerChain {
    pub loewner: Certificate,
    pub resolvent_loewner: Certificate,
    pub resolvent_order: Certificate,
}

impl LoewnerChain {
    pub fn verdicts(&self) -> [bool; 3] {
        [
            self.loewner.holds(),
            self.resolvent_loewner.holds(),
            self.resolvent_order.holds(),
        ]
    }

    pub fn agree(&self) -> bool {
        let v = self.verdicts();
        v.iter().all(|&b| b == v[0])
    }
}

fn require_symmetric_psd(m: &MonotoneMatrix) -> Result<()> {
    m.matrix().require_symmetric()
}

pub fn loewner_chain_check(a: &MonotoneMatrix, b: &MonotoneMatrix, cfg: &SamplerConfig) -> Result<LoewnerChain> {
    require_symmetric_psd(a)?;
    require_symmetric_psd(b)?;
    check_dim(a.dim(), b.dim())?;
    let ja = resolvent(a)?;
    let jb = resolvent(b)?;
    Ok(LoewnerChain {
        loewner: loewner_leq(a.matrix(), b.matrix())?,
        resolvent_loewner: loewner_leq(&jb, &ja)?,
        resolvent_order: resolvent_leq(&a.resolvent_expr()?, &b.resolvent_expr()?, cfg)?,
    })
}

/// Verdicts of the quadratic-form ring: `q_B ≤ q_A` pointwise, `B ⪯_L A`,
/// `prox_{q_A} ⪯ prox_{q_B}` and `env q_B ⪯_M env q_A`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadraticChain {
    pub pointwise: Certificate,
    pub loewner: Certificate,
    pub prox_order: Certificate,
    pub moreau: Certificate,
}

impl QuadraticChain {
    pub fn verdicts(&self) -> [bool; 4] {
        [
            self.pointwise.holds(),
            self.loewner.holds(),
            self.prox_order.holds(),
            self.moreau.holds(),
        ]
    }

    pub fn agree(&self) -> bool {
        let v = self.verdicts();
        v.iter().all(|&b| b == v[0])
    }
}

pub fn quadratic_order_chain(a: &Matrix, b: &Matrix, cfg: &SamplerConfig) -> Result<QuadraticChain> {
    a.require_symmetric()?;
    b.require_symmetric()?;
    check_dim(a.nrows(), b.nrows())?;
    let qa = ConvexAtom::quadratic(a.clone())?;
    let qb = ConvexAtom::quadratic(b.clone())?;
    let dim = a.nrows();

    let am = a.as_dmatrix();
    let bm = b.as_dmatrix();
    let pointwise = sampled_certificate(
        Property::InnerProductDominance,
        cfg,
        |i| {
            let x = sampling::sample_point(cfg, dim, i);
            (x.clone(), x)
        },
        |x, _| {
            let nn = x.norm_squared();
            if nn == 0.0 {
                0.0
            } else {
                0.5 * (x.dot(&(am * x)) - x.dot(&(bm * x))) / nn
            }
        },
    );

    let prox_order = resolvent_leq(&OperatorExpr::prox(qa.clone()), &OperatorExpr::prox(qb.clone()), cfg)?;
    let moreau = certify_midpoint_convex(dim, cfg, |x| {
        let x = crate::linops::Vector::from_dvector(x.clone());
        qa.envelope(&x).unwrap_or(f64::NAN) - qb.envelope(&x).unwrap_or(f64::NAN)
    });

    Ok(QuadraticChain {
        pointwise,
        loewner: loewner_leq(a, b)?,
        prox_order,
        moreau,
    })
}

/// Midpoint convexity `h((x+y)/2) ≤ (h(x) + h(y))/2` on seeded pairs, with the
/// gap normalized by `‖x − y‖²`.
pub fn certify_midpoint_convex<H>(dim: usize, cfg: &SamplerConfig, h: H) -> Certificate
where
    H: Fn(&DVector<f64>) -> f64 + Sync + Send,
{
    sampled_certificate(
        Property::MidpointConvex,
        cfg,
        |i| sampling::sample_pair(cfg, dim, i),
        |x, y| {
            let dd = (x - y).norm_squared();
            if dd == 0.0 {
                return 0.0;
            }
            let mid = (x + y) * 0.5;
            (0.5 * (h(x) + h(y)) - h(&mid)) / dd
        },
    )
}

/// Random symmetric PSD matrix `G Gᵀ / n` with `G` of shape `n × rank`.
pub fn random_psd<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> Matrix {
    let g = DMatrix::from_fn(n, rank, |_, _| rng.sample::<f64, _>(StandardNormal));
    let m = &g * g.transpose() / n as f64;
    Matrix::symmetrized(&m).expect("square and finite")
}

/// Comparable pair `(A, B)` with `B ⪯_L A`: `B` random PSD, `A = B + D` for a
/// random PSD increment `D` of random rank.
pub fn comparable_psd_pair<R: Rng + ?Sized>(rng: &mut R, n: usize) -> (Matrix, Matrix) {
    let b = random_psd(rng, n, n);
    let rank = rng.random_range(1..=n);
    let d = random_psd(rng, n, rank);
    let a = b.add(&d).expect("same shape");
    (a, b)
}

/// Operator norm of `M`, exposed for report margins.
pub fn operator_norm(m: &Matrix) -> f64 {
    top_singular(m).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::{linearize, Linearization, Vector};

    fn mm(entries: &[f64]) -> MonotoneMatrix {
        MonotoneMatrix::new(Matrix::diag(entries).unwrap()).unwrap()
    }

    fn cfg() -> SamplerConfig {
        SamplerConfig::default()
    }

    #[test]
    fn resolvent_examples() {
        let half = resolvent(&MonotoneMatrix::new(Matrix::identity(3)).unwrap()).unwrap();
        assert!(half.max_abs_diff(&Matrix::identity(3).scale(0.5).unwrap()).unwrap() < 1e-15);
        let j = resolvent(&mm(&[1.0, 3.0])).unwrap();
        assert!(j.max_abs_diff(&Matrix::diag(&[0.5, 0.25]).unwrap()).unwrap() < 1e-15);
        let id = resolvent(&MonotoneMatrix::new(Matrix::zeros(2)).unwrap()).unwrap();
        assert!(id.max_abs_diff(&Matrix::identity(2)).unwrap() < 1e-15);
    }

    #[test]
    fn resolvent_expr_linearizes_to_inverse() {
        let a = mm(&[2.0, 4.0]);
        let Linearization::Linear(m) = linearize(&a.resolvent_expr().unwrap()) else { panic!() };
        assert_eq!(m, resolvent(&a).unwrap());
    }

    #[test]
    fn non_monotone_rejected() {
        let r = MonotoneMatrix::new(Matrix::diag(&[1.0, -1.0]).unwrap());
        assert!(matches!(r, Err(Error::NotMonotone { .. })));
    }

    #[test]
    fn minty_identity() {
        assert!(minty_inverse_identity_check(&mm(&[1.0, 1.0]), &cfg()).unwrap().holds());
        // 1/(1+a) + 1/(1+1/a) = 1 elementwise
        assert!(minty_inverse_identity_check(&mm(&[2.0, 4.0]), &cfg()).unwrap().holds());
        let singular = minty_inverse_identity_check(&mm(&[1.0, 0.0]), &cfg());
        assert!(matches!(singular, Err(Error::SingularMatrix { .. })));
        // skew part is fine: A = I + rotation generator
        let a = MonotoneMatrix::new(Matrix::from_rows(&[vec![1.0, -2.0], vec![2.0, 1.0]]).unwrap()).unwrap();
        assert!(minty_inverse_identity_check(&a, &cfg()).unwrap().holds());
    }

    #[test]
    fn loewner_examples() {
        let a = Matrix::diag(&[2.0, 3.0]).unwrap();
        let b = Matrix::diag(&[1.0, 3.0]).unwrap();
        assert!(loewner_leq(&a, &b).unwrap().holds());
        assert!(!loewner_leq(&b, &a).unwrap().holds());
        let p = Matrix::diag(&[1.0, 0.0]).unwrap();
        let q = Matrix::diag(&[0.0, 1.0]).unwrap();
        assert!(!loewner_leq(&p, &q).unwrap().holds());
        assert!(!loewner_leq(&q, &p).unwrap().holds());
        assert!(loewner_leq(&a, &a).unwrap().holds());
        let rot = Matrix::rotation(0.3);
        assert!(matches!(loewner_leq(&rot, &rot), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn loewner_falsification_witness_is_eigenvector() {
        let c = loewner_leq(&Matrix::diag(&[1.0, 0.0]).unwrap(), &Matrix::diag(&[0.0, 1.0]).unwrap()).unwrap();
        let (x, _) = c.witness().unwrap();
        assert!((x[1].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn loewner_chain_examples() {
        let chain = loewner_chain_check(&mm(&[2.0, 3.0]), &mm(&[1.0, 3.0]), &cfg()).unwrap();
        assert_eq!(chain.verdicts(), [true, true, true]);
        let chain = loewner_chain_check(&mm(&[2.0, 3.0]), &mm(&[2.0, 3.0]), &cfg()).unwrap();
        assert_eq!(chain.verdicts(), [true, true, true]);
        let chain = loewner_chain_check(&mm(&[1.0, 0.0]), &mm(&[0.0, 1.0]), &cfg()).unwrap();
        assert_eq!(chain.verdicts(), [false, false, false]);
    }

    #[test]
    fn quadratic_chain_examples() {
        let two = Matrix::identity(2).scale(2.0).unwrap();
        let one = Matrix::identity(2);
        let chain = quadratic_order_chain(&two, &one, &cfg()).unwrap();
        assert_eq!(chain.verdicts(), [true; 4]);
        let chain = quadratic_order_chain(&one, &one, &cfg()).unwrap();
        assert_eq!(chain.verdicts(), [true; 4]);
        let chain = quadratic_order_chain(
            &Matrix::diag(&[1.0, 2.0]).unwrap(),
            &Matrix::diag(&[2.0, 1.0]).unwrap(),
            &cfg(),
        )
        .unwrap();
        assert_eq!(chain.verdicts(), [false; 4]);
    }

    #[test]
    fn resolvent_spectrum_in_unit_interval() {
        let mut rng = cfg().rng(7);
        for _ in 0..10 {
            let a = random_psd(&mut rng, 6, 4);
            let j = resolvent(&MonotoneMatrix::new(a).unwrap()).unwrap();
            let eig = symmetric_eigen(&j).unwrap();
            assert!(eig.min() > 0.0 && eig.max() <= 1.0 + 1e-12);
            let c = crate::certify::certify_fne(&OperatorExpr::linear(j).unwrap(), &cfg());
            assert!(c.holds() && c.is_exact());
        }
    }

    #[test]
    fn resolvent_matches_quadratic_prox() {
        let mut rng = cfg().rng(11);
        let a = random_psd(&mut rng, 5, 5);
        let j = resolvent(&MonotoneMatrix::new(a.clone()).unwrap()).unwrap();
        let q = ConvexAtom::quadratic(a).unwrap();
        for i in 0..100 {
            let x = Vector::from_dvector(sampling::sample_point(&cfg(), 5, i));
            let d = j.mul_vec(&x).unwrap().max_abs_diff(&q.prox(&x).unwrap());
            assert!(d <= 1e-10 * (1.0 + x.norm()));
        }
    }
}
