//! Independent oracles shared by the integration tests.
//!
//! Conjugates, feasible-set repairs and closed forms are written out here from
//! first principles so the library is never used to check itself.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use resolvent_order::linops::{Matrix, Vector};
use resolvent_order::prox_catalog::{Cone, ConvexAtom, Subspace};

pub fn v(xs: &[f64]) -> Vector {
    Vector::from_slice(xs).unwrap()
}

pub fn m(rows: &[&[f64]]) -> Matrix {
    Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

pub fn dv(x: &Vector) -> DVector<f64> {
    x.as_dvector().clone()
}

pub fn vec_of(x: DVector<f64>) -> Vector {
    Vector::from_slice(x.as_slice()).unwrap()
}

pub fn uniform_in_ball<R: Rng + ?Sized>(rng: &mut R, dim: usize, radius: f64) -> DVector<f64> {
    let g = DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    let n = g.norm().max(1e-300);
    let r = radius * rng.random::<f64>().powf(1.0 / dim as f64);
    g * (r / n)
}

type PointMap = Box<dyn Fn(&DVector<f64>) -> DVector<f64>>;
type ValueMap = Box<dyn Fn(&DVector<f64>) -> f64>;

/// Prox of a conjugate together with the conjugate's value at that prox.
pub struct ConjugateOracle {
    pub prox: PointMap,
    pub value_at: ValueMap,
}

impl ConjugateOracle {
    pub fn envelope(&self, x: &DVector<f64>) -> f64 {
        let p = (self.prox)(x);
        (self.value_at)(&p) + 0.5 * (x - &p).norm_squared()
    }
}

fn indicator_oracle(prox: impl Fn(&DVector<f64>) -> DVector<f64> + 'static) -> ConjugateOracle {
    ConjugateOracle {
        prox: Box::new(prox),
        value_at: Box::new(|_| 0.0),
    }
}

fn l2_shrink(x: &DVector<f64>, lambda: f64) -> DVector<f64> {
    let n = x.norm();
    if n <= lambda {
        DVector::zeros(x.len())
    } else {
        x * (1.0 - lambda / n)
    }
}

fn orthonormal_basis(dim: usize, vectors: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for w in vectors {
        let mut u = w.clone();
        for b in &basis {
            u -= b * b.dot(&u);
        }
        if u.norm() > 1e-12 {
            basis.push(u.normalize());
        }
    }
    assert!(basis.iter().all(|b| b.len() == dim));
    basis
}

fn subspace_projector(dim: usize, vectors: &[DVector<f64>]) -> DMatrix<f64> {
    let mut p = DMatrix::zeros(dim, dim);
    for b in orthonormal_basis(dim, vectors) {
        p += &b * b.transpose();
    }
    p
}

/// Projector onto a cone's polar, by closed form per cone shape.
fn polar_projector(cone: &Cone) -> PointMap {
    match cone.clone() {
        Cone::Zero { .. } => Box::new(|x| x.clone()),
        Cone::Full { dim } => Box::new(move |_| DVector::zeros(dim)),
        Cone::Subspace(s) => {
            let p = subspace_projector(s.dim(), &s.basis().iter().map(dv).collect::<Vec<_>>());
            let q = DMatrix::identity(s.dim(), s.dim()) - p;
            Box::new(move |x| &q * x)
        }
        Cone::NonnegOrthant { .. } => Box::new(|x| x.map(|t| t.min(0.0))),
        Cone::NonposOrthant { .. } => Box::new(|x| x.map(|t| t.max(0.0))),
        Cone::SecondOrder { .. } => Box::new(|x| soc_project(&(-x)) * -1.0),
        Cone::NegSecondOrder { .. } => Box::new(soc_project),
        Cone::Ray(d) => {
            // polar of a ray is the halfspace {⟨d, ·⟩ ≤ 0}
            let d = dv(&d).normalize();
            Box::new(move |x| x - &d * d.dot(x).max(0.0))
        }
        Cone::Halfspace(d) => {
            let d = dv(&d).normalize();
            Box::new(move |x| &d * d.dot(x).max(0.0))
        }
    }
}

/// Projection onto `{(t, z) : ‖z‖ ≤ t}` from the spectral formula.
pub fn soc_project(x: &DVector<f64>) -> DVector<f64> {
    let t = x[0];
    let z = x.rows(1, x.len() - 1).into_owned();
    let nz = z.norm();
    if nz <= t {
        return x.clone();
    }
    if nz <= -t {
        return DVector::zeros(x.len());
    }
    let s = 0.5 * (t + nz);
    let mut out = DVector::zeros(x.len());
    out[0] = s;
    out.rows_mut(1, x.len() - 1).copy_from(&(z * (s / nz)));
    out
}

/// Conjugate of a quadratic form `½⟨x, A x⟩` with `A` PSD: quadratic with the
/// pseudo-inverse on `range A`, indicator of `range A`.
fn quadratic_conjugate(a: &Matrix) -> ConjugateOracle {
    let eig = a.as_dmatrix().clone().symmetric_eigen();
    let q = eig.eigenvectors.clone();
    let lam = eig.eigenvalues.clone();
    let q2 = q.clone();
    let lam2 = lam.clone();
    ConjugateOracle {
        prox: Box::new(move |x| {
            let z = q.transpose() * x;
            let w = DVector::from_fn(z.len(), |i, _| {
                if lam[i] > 1e-12 {
                    z[i] * lam[i] / (1.0 + lam[i])
                } else {
                    0.0
                }
            });
            &q * w
        }),
        value_at: Box::new(move |y| {
            let z = q2.transpose() * y;
            (0..z.len())
                .map(|i| if lam2[i] > 1e-12 { 0.5 * z[i] * z[i] / lam2[i] } else { 0.0 })
                .sum()
        }),
    }
}

/// Test-only conjugate table.
pub fn conjugate(f: &ConvexAtom) -> ConjugateOracle {
    use resolvent_order::prox_catalog::AtomKind;
    match f.kind().clone() {
        AtomKind::ZeroFunction { dim } => indicator_oracle(move |_| DVector::zeros(dim)),
        AtomKind::IndicatorPoint(p) => {
            let p = dv(&p);
            let p2 = p.clone();
            ConjugateOracle {
                prox: Box::new(move |x| x - &p),
                value_at: Box::new(move |y| p2.dot(y)),
            }
        }
        AtomKind::IndicatorBall { center, radius } => {
            let c = dv(&center);
            let c2 = c.clone();
            ConjugateOracle {
                prox: Box::new(move |x| l2_shrink(&(x - &c), radius)),
                value_at: Box::new(move |y| c2.dot(y) + radius * y.norm()),
            }
        }
        AtomKind::Indicator(cone) => {
            let p = polar_projector(&cone);
            indicator_oracle(move |x| p(x))
        }
        AtomKind::Quadratic(q) => quadratic_conjugate(q.matrix()),
        AtomKind::L1Norm { lambda, .. } => indicator_oracle(move |x| x.map(|t| t.clamp(-lambda, lambda))),
        AtomKind::L2Norm { lambda, .. } => indicator_oracle(move |x| {
            let n = x.norm();
            if n <= lambda {
                x.clone()
            } else {
                x * (lambda / n)
            }
        }),
        AtomKind::LinearFunc(a) => {
            let a = dv(&a);
            indicator_oracle(move |_| a.clone())
        }
        AtomKind::Shifted { base, c, gamma } => {
            // (base(· − c) − ⟨c, ·⟩ + γ)* = base*(· + c) + ⟨c, ·⟩ + ‖c‖² − γ
            let b = conjugate(&base);
            let c = dv(&c);
            let shift = c.norm_squared() - gamma;
            let b = std::rc::Rc::new(b);
            let b2 = b.clone();
            let c2 = c.clone();
            ConjugateOracle {
                prox: Box::new(move |x| (b.prox)(x) - &c),
                value_at: Box::new(move |y| (b2.value_at)(&(y + &c2)) + c2.dot(y) + shift),
            }
        }
    }
}

/// Maps an arbitrary point into `dom f` by explicit formulas; `None` when the
/// domain is the whole space.
pub fn repair(f: &ConvexAtom, q: &DVector<f64>) -> Option<DVector<f64>> {
    use resolvent_order::prox_catalog::AtomKind;
    match f.kind() {
        AtomKind::IndicatorPoint(p) => Some(dv(p)),
        AtomKind::IndicatorBall { center, radius } => {
            let c = dv(center);
            let d = q - &c;
            let n = d.norm();
            Some(if n <= *radius { q.clone() } else { c + d * (radius / n) })
        }
        AtomKind::Indicator(cone) => Some(match cone {
            Cone::Zero { dim } => DVector::zeros(*dim),
            Cone::Full { .. } => q.clone(),
            Cone::Subspace(s) => subspace_projector(s.dim(), &s.basis().iter().map(dv).collect::<Vec<_>>()) * q,
            Cone::NonnegOrthant { .. } => q.abs(),
            Cone::NonposOrthant { .. } => -q.abs(),
            Cone::SecondOrder { .. } => {
                let mut r = q.clone();
                r[0] = r[0].max(q.rows(1, q.len() - 1).norm());
                r
            }
            Cone::NegSecondOrder { .. } => {
                let mut r = q.clone();
                r[0] = r[0].min(-q.rows(1, q.len() - 1).norm());
                r
            }
            Cone::Ray(d) => {
                let d = dv(d).normalize();
                &d * d.dot(q).max(0.0)
            }
            Cone::Halfspace(d) => {
                let d = dv(d).normalize();
                q - &d * d.dot(q).max(0.0)
            }
        }),
        AtomKind::Shifted { base, c, .. } => {
            let c = dv(c);
            repair(base, &(q - &c)).map(|r| r + c)
        }
        _ => None,
    }
}

/// Atoms of dimension at most 3 covering every catalog kind.
pub fn catalog() -> Vec<(&'static str, ConvexAtom)> {
    let pd = m(&[&[2.0, 0.5, 0.0], &[0.5, 1.0, 0.0], &[0.0, 0.0, 3.0]]);
    let psd = m(&[&[1.0, 1.0, 0.0], &[1.0, 1.0, 0.0], &[0.0, 0.0, 0.5]]);
    let plane = Subspace::span(3, &[v(&[1.0, 1.0, 0.0]), v(&[0.0, 0.0, 1.0])]).unwrap();
    vec![
        ("zero_function", ConvexAtom::zero_function(3).unwrap()),
        ("indicator_point", ConvexAtom::indicator_point(v(&[1.0, -2.0, 0.5]))),
        ("centered_ball", ConvexAtom::indicator_ball(Vector::zeros(3), 2.0).unwrap()),
        ("offset_ball", ConvexAtom::indicator_ball(v(&[1.0, 0.0, -1.0]), 1.5).unwrap()),
        ("zero_cone", ConvexAtom::indicator_cone(Cone::zero(3).unwrap())),
        ("full_cone", ConvexAtom::indicator_cone(Cone::full(3).unwrap())),
        ("plane", ConvexAtom::indicator_subspace(plane)),
        ("orthant", ConvexAtom::indicator_orthant(3).unwrap()),
        ("nonpos_orthant", ConvexAtom::indicator_cone(Cone::nonpos_orthant(3).unwrap())),
        ("soc3", ConvexAtom::indicator_soc(3).unwrap()),
        ("soc2", ConvexAtom::indicator_soc(2).unwrap()),
        ("neg_soc", ConvexAtom::indicator_cone(Cone::neg_second_order(3).unwrap())),
        ("ray", ConvexAtom::indicator_ray(&v(&[1.0, 2.0, 2.0])).unwrap()),
        ("halfspace", ConvexAtom::indicator_cone(Cone::halfspace(&v(&[1.0, -1.0, 0.0])).unwrap())),
        ("quadratic_pd", ConvexAtom::quadratic(pd.clone()).unwrap()),
        ("quadratic_psd", ConvexAtom::quadratic(psd).unwrap()),
        ("l1_norm", ConvexAtom::l1_norm(3, 0.7).unwrap()),
        ("l2_norm", ConvexAtom::l2_norm(3, 1.3).unwrap()),
        ("linear_func", ConvexAtom::linear_func(v(&[0.3, -1.0, 2.0]))),
        (
            "shifted_l1",
            ConvexAtom::shifted(ConvexAtom::l1_norm(3, 0.5).unwrap(), v(&[1.0, -1.0, 0.25]), 0.75).unwrap(),
        ),
        (
            "shifted_ball",
            ConvexAtom::shifted(ConvexAtom::indicator_ball(Vector::zeros(3), 1.0).unwrap(), v(&[0.5, 2.0, 0.0]), -1.0)
                .unwrap(),
        ),
        (
            "shifted_quadratic",
            ConvexAtom::shifted(ConvexAtom::quadratic(pd).unwrap(), v(&[-1.0, 0.0, 3.0]), 2.0).unwrap(),
        ),
    ]
}

/// Full-domain atoms used as bases of shifted families.
pub fn shift_bases() -> Vec<ConvexAtom> {
    vec![
        ConvexAtom::l1_norm(3, 0.5).unwrap(),
        ConvexAtom::l2_norm(3, 1.0).unwrap(),
        ConvexAtom::quadratic(m(&[&[2.0, 0.5, 0.0], &[0.5, 1.0, 0.0], &[0.0, 0.0, 3.0]])).unwrap(),
        ConvexAtom::indicator_ball(Vector::zeros(3), 1.5).unwrap(),
        ConvexAtom::indicator_orthant(3).unwrap(),
    ]
}

/// `min φ(q) − φ(p)` over `n_candidates` random points, `φ(y) = f(y) + ½‖x − y‖²`
/// and `p = prox_f(x)`. Nonnegative means no candidate beat the prox.
pub fn brute_force_margin<R: Rng + ?Sized>(f: &ConvexAtom, x: &Vector, n_candidates: usize, rng: &mut R) -> f64 {
    let xd = dv(x);
    let p = dv(&f.prox(x).unwrap());
    let phi = |y: &DVector<f64>| -> f64 {
        let val = f.fn_value(&vec_of(y.clone())).unwrap();
        val + 0.5 * (&xd - y).norm_squared()
    };
    let phi_p = phi(&p);
    assert!(phi_p.is_finite(), "prox left the domain");
    let gap = (&xd - &p).norm();
    let local = 0.5 * gap + 0.05;
    let broad = xd.norm() + gap + 1.0;
    let dim = x.dim();
    let mut best = f64::INFINITY;
    for k in 0..n_candidates {
        let q = if k % 2 == 0 {
            &p + uniform_in_ball(rng, dim, local)
        } else {
            uniform_in_ball(rng, dim, broad)
        };
        let q = repair(f, &q).unwrap_or(q);
        let val = phi(&q);
        if val < best {
            best = val;
        }
    }
    best - phi_p
}

/// Closed form `‖2αR_θ − I‖` for a planar rotation.
pub fn scaled_rotation_fne_norm(alpha: f64, cos_theta: f64) -> f64 {
    (4.0 * alpha * alpha - 4.0 * alpha * cos_theta + 1.0).sqrt()
}
