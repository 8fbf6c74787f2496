//! Equivalence up to constant shifts: `T1 ∼ T2` when `T2 − T1` is constant,
//! the matching graph shift of monotone matrices, and the tilt shift of convex
//! functions. On classes of proximal mappings the resolvent order is a partial
//! order; the checks here verify supplied witnesses rather than fit them.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::certify::{resolvent_leq, sampled_certificate, Certificate, Property};
use crate::error::{check_dim, Result};
use crate::linops::{affine_parts, top_singular, Matrix, OperatorExpr, Vector};
use crate::orders::function_leq;
use crate::prox_catalog::ConvexAtom;
use crate::resolvent_calculus::MonotoneMatrix;
use crate::sampling::{self, map_indexed, SamplerConfig};

/// Entrywise tolerance for equal linear parts on the exact path.
pub const LINEAR_EQ_TOL: f64 = 1e-10;

/// Per-point tolerance for shifted resolvents, graphs and function values.
pub const SHIFT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShiftKind {
    ConstantShift { c: Vector },
    GraphShift { c: Vector },
    FunctionShift { c: Vector, gamma: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceWitness {
    pub kind: ShiftKind,
    /// Worst deviation from the witnessed shift; at most `tolerance`.
    pub residual: f64,
    pub tolerance: f64,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Equivalence {
    Equivalent(EquivalenceWitness),
    NotEquivalent {
        residual: f64,
        tolerance: f64,
        exact: bool,
        /// Sample where `T2 − T1` departs furthest from the probe value.
        witness: Option<Vector>,
    },
}

impl Equivalence {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Equivalence::Equivalent(_))
    }

    /// The constant `c` with `T2 = T1 + c`, when accepted.
    pub fn shift(&self) -> Option<&Vector> {
        match self {
            Equivalence::Equivalent(EquivalenceWitness {
                kind: ShiftKind::ConstantShift { c },
                ..
            }) => Some(c),
            _ => None,
        }
    }
}

/// `T1 ∼ T2`. Affine operands are decided by comparing linear parts; otherwise
/// `c = T2(0) − T1(0)` is verified on `cfg.n_pairs` seeded points.
pub fn equivalent_fne(t1: &OperatorExpr, t2: &OperatorExpr, cfg: &SamplerConfig) -> Result<Equivalence> {
    check_dim(t1.dim(), t2.dim())?;
    let dim = t1.dim();
    if let (Some(a1), Some(a2)) = (affine_parts(t1), affine_parts(t2)) {
        let residual = a1.matrix.max_abs_diff(&a2.matrix)?;
        return Ok(if residual <= LINEAR_EQ_TOL {
            Equivalence::Equivalent(EquivalenceWitness {
                kind: ShiftKind::ConstantShift {
                    c: &a2.offset - &a1.offset,
                },
                residual,
                tolerance: LINEAR_EQ_TOL,
                exact: true,
            })
        } else {
            // (T2 − T1)(v) − (T2 − T1)(0) = (M2 − M1) v is largest along v
            let (_, v) = top_singular(&a2.matrix.sub(&a1.matrix)?);
            Equivalence::NotEquivalent {
                residual,
                tolerance: LINEAR_EQ_TOL,
                exact: true,
                witness: Some(v),
            }
        });
    }
    let probe = DVector::zeros(dim);
    let c = t2.apply(&probe) - t1.apply(&probe);
    let deviations = map_indexed(cfg.execution, cfg.n_pairs, |i| {
        let x = sampling::sample_point(cfg, dim, i as u64);
        (t2.apply(&x) - t1.apply(&x) - &c).norm()
    });
    let (worst_index, residual) = deviations
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0), |best, (i, d)| if d > best.1 { (i, d) } else { best });
    Ok(if residual <= cfg.tolerance {
        Equivalence::Equivalent(EquivalenceWitness {
            kind: ShiftKind::ConstantShift {
                c: Vector::from_dvector(c),
            },
            residual,
            tolerance: cfg.tolerance,
            exact: false,
        })
    } else {
        Equivalence::NotEquivalent {
            residual,
            tolerance: cfg.tolerance,
            exact: false,
            witness: Some(Vector::from_dvector(sampling::sample_point(cfg, dim, worst_index as u64))),
        }
    })
}

/// Antisymmetry of the order on classes: mutual order forces equivalence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuotientAntisymmetry {
    pub forward: Certificate,
    pub backward: Certificate,
    pub equivalence: Equivalence,
    /// At least one direction of the order fails, so nothing is asserted.
    pub vacuous: bool,
    pub passed: bool,
}

pub fn antisymmetry_in_quotient(t1: &OperatorExpr, t2: &OperatorExpr, cfg: &SamplerConfig) -> Result<QuotientAntisymmetry> {
    let forward = resolvent_leq(t1, t2, cfg)?;
    let backward = resolvent_leq(t2, t1, cfg)?;
    let equivalence = equivalent_fne(t1, t2, cfg)?;
    let vacuous = !(forward.holds() && backward.holds());
    let passed = vacuous || equivalence.is_equivalent();
    Ok(QuotientAntisymmetry {
        forward,
        backward,
        equivalence,
        vacuous,
        passed,
    })
}

/// Verifies `J_{B'} = c + J_A` and `gr B' = (c, −c) + gr A` for the affine map
/// `B' x = B x − c − A c`; both hold exactly when `B = A`.
pub fn graph_shift_check(a: &MonotoneMatrix, b: &MonotoneMatrix, c: &Vector, cfg: &SamplerConfig) -> Result<Certificate> {
    check_dim(a.dim(), b.dim())?;
    check_dim(a.dim(), c.dim())?;
    let n = a.dim();
    let am = a.matrix().as_dmatrix();
    let bm = b.matrix().as_dmatrix();
    let cv = c.as_dvector();
    let offset = -(cv + am * cv);
    let lu = (DMatrix::identity(n, n) + bm).lu();
    let ja = crate::resolvent_calculus::resolvent(a)?;
    let jam = ja.as_dmatrix();
    let tol_cfg = SamplerConfig {
        tolerance: SHIFT_TOL,
        ..cfg.clone()
    };
    let cert = sampled_certificate(
        Property::Equality,
        &tol_cfg,
        |i| {
            let x = sampling::sample_point(&tol_cfg, n, i);
            (x.clone(), x)
        },
        |x, _| {
            // y + B y + offset = x
            let Some(y) = lu.solve(&(x - &offset)) else {
                return f64::NEG_INFINITY;
            };
            let resolvent_gap = (&y - (cv + jam * x)).norm();
            let bx = bm * x + &offset;
            let graph_gap = (am * (x - cv) - (bx + cv)).norm();
            -resolvent_gap.max(graph_gap)
        },
    );
    Ok(cert.with_note("J_B' = c + J_A and gr B' = (c, -c) + gr A"))
}

/// Closed-form resolvent `c + J_A x` of `x ↦ −c + A(x − c)`.
pub fn shifted_resolvent(a: &MonotoneMatrix, c: &Vector, x: &Vector) -> Result<Vector> {
    let ja: Matrix = crate::resolvent_calculus::resolvent(a)?;
    Ok(c + &ja.mul_vec(x)?)
}

/// For `g = f(· − c) − ⟨c, ·⟩ + γ`: the value formula holds where finite,
/// `prox_g − prox_f ≡ c`, and `f` and `g` are mutually ordered.
pub fn function_shift_verify(f: &ConvexAtom, c: &Vector, gamma: f64, cfg: &SamplerConfig) -> Result<Certificate> {
    check_dim(f.dim(), c.dim())?;
    let g = ConvexAtom::shifted(f.clone(), c.clone(), gamma)?;
    let dim = f.dim();
    let cv = c.as_dvector();
    let tol_cfg = SamplerConfig {
        tolerance: SHIFT_TOL,
        ..cfg.clone()
    };
    let pointwise = sampled_certificate(
        Property::Equality,
        &tol_cfg,
        |i| {
            let x = sampling::sample_point(&tol_cfg, dim, i);
            (x.clone(), x)
        },
        |x, _| {
            let xv = Vector::from_dvector(x.clone());
            let shifted = Vector::from_dvector(x - cv);
            let (Ok(gx), Ok(fx)) = (g.fn_value(&xv), f.fn_value(&shifted)) else {
                return f64::NEG_INFINITY;
            };
            let formula = fx - cv.dot(x) + gamma;
            let value_gap = if gx.is_finite() || formula.is_finite() {
                (gx - formula).abs() / (1.0 + formula.abs())
            } else {
                0.0
            };
            let prox_gap = (g.prox_raw(x) - f.prox_raw(x) - cv).norm();
            -value_gap.max(prox_gap)
        },
    );
    if !pointwise.holds() {
        return Ok(pointwise.with_note("value formula or constant prox shift"));
    }
    let forward = function_leq(&g, f, cfg)?;
    if !forward.holds() {
        return Ok(forward.with_note("g <= f"));
    }
    let backward = function_leq(f, &g, cfg)?;
    if !backward.holds() {
        return Ok(backward.with_note("f <= g"));
    }
    Ok(pointwise.with_note("value formula, prox_g = c + prox_f, f <= g and g <= f"))
}
