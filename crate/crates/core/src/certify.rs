//! Certification and falsification of firm nonexpansiveness, nonexpansiveness,
//! monotonicity and constancy, and the resolvent order built on them.
//!
//! Affine operators are decided exactly from spectral quantities of their
//! linear part (the translation never affects these properties). Everything
//! else is tested on seeded sample pairs; a [`Verdict::SampledPass`] is
//! evidence, not a proof.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{check_dim, Result};
use crate::linops::{affine_parts, symmetric_eigen, top_singular, Matrix, OperatorExpr, Vector};
use crate::sampling::{self, map_indexed, SamplerConfig};

/// Slack on spectral quantities for the exact path.
pub const EXACT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    FirmlyNonexpansive,
    Nonexpansive,
    Monotone,
    ConstantMap,
    /// Two maps agree pointwise.
    Equality,
    Idempotent,
    InnerProductDominance,
    MidpointConvex,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    CertifiedExact {
        margin: f64,
    },
    NotCertifiedExact {
        margin: f64,
    },
    SampledPass {
        pairs: usize,
        worst_margin: f64,
    },
    Falsified {
        witness_x: Vector,
        witness_y: Vector,
        violation: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    ExactSpectral,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub property: Property,
    pub verdict: Verdict,
    pub tolerance: f64,
    /// Absent on exact paths.
    pub seed: Option<u64>,
    pub route: Route,
    /// Spectral quantity that decided an exact path (e.g. `‖2M − I‖`).
    pub statistic: Option<f64>,
    pub note: Option<String>,
}

impl Certificate {
    pub fn holds(&self) -> bool {
        matches!(
            self.verdict,
            Verdict::CertifiedExact { .. } | Verdict::SampledPass { .. }
        )
    }

    pub fn is_exact(&self) -> bool {
        self.route == Route::ExactSpectral
    }

    pub fn is_falsified(&self) -> bool {
        matches!(self.verdict, Verdict::Falsified { .. })
    }

    /// Margin of the deciding test; negative values are violations.
    pub fn margin(&self) -> f64 {
        match &self.verdict {
            Verdict::CertifiedExact { margin } | Verdict::NotCertifiedExact { margin } => *margin,
            Verdict::SampledPass { worst_margin, .. } => *worst_margin,
            Verdict::Falsified { violation, .. } => -violation,
        }
    }

    pub fn witness(&self) -> Option<(&Vector, &Vector)> {
        match &self.verdict {
            Verdict::Falsified {
                witness_x, witness_y, ..
            } => Some((witness_x, witness_y)),
            _ => None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Re-evaluates the defining inequality of an operator property at the
    /// recorded witness and returns the violation.
    pub fn recheck(&self, op: &OperatorExpr) -> Option<f64> {
        let (x, y) = self.witness()?;
        let x = x.as_dvector();
        let y = y.as_dvector();
        let margin = pair_margin(self.property, &op.apply(x), &op.apply(y), x, y)?;
        Some(-margin)
    }

    /// Exact verdict for a scalar deviation that must not exceed `tol`.
    pub(crate) fn exact_bound(property: Property, deviation: f64, tol: f64) -> Self {
        let margin = tol - deviation;
        let verdict = if deviation <= tol {
            Verdict::CertifiedExact { margin }
        } else {
            Verdict::NotCertifiedExact { margin }
        };
        Certificate {
            property,
            verdict,
            tolerance: tol,
            seed: None,
            route: Route::ExactSpectral,
            statistic: Some(deviation),
            note: None,
        }
    }
}

/// Scale-free margin of an operator property at `(x, y)`; `None` for properties
/// not defined by a two-point inequality on a single operator.
pub(crate) fn pair_margin(
    property: Property,
    tx: &DVector<f64>,
    ty: &DVector<f64>,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Option<f64> {
    let delta = x - y;
    let d = tx - ty;
    let dd = delta.norm_squared();
    Some(match property {
        Property::FirmlyNonexpansive => {
            if dd == 0.0 {
                -d.norm_squared()
            } else {
                (d.dot(&delta) - d.norm_squared()) / dd
            }
        }
        Property::Nonexpansive => {
            if dd == 0.0 {
                -d.norm()
            } else {
                1.0 - d.norm() / dd.sqrt()
            }
        }
        Property::Monotone => {
            if dd == 0.0 {
                0.0
            } else {
                d.dot(&delta) / dd
            }
        }
        Property::ConstantMap => -d.norm(),
        _ => return None,
    })
}

/// Runs `margin` on `cfg.n_pairs` indexed samples and condenses the result.
pub(crate) fn sampled_certificate<S, M>(property: Property, cfg: &SamplerConfig, sampler: S, margin: M) -> Certificate
where
    S: Fn(u64) -> (DVector<f64>, DVector<f64>) + Sync + Send,
    M: Fn(&DVector<f64>, &DVector<f64>) -> f64 + Sync + Send,
{
    let margins = map_indexed(cfg.execution, cfg.n_pairs, |i| {
        let (x, y) = sampler(i as u64);
        margin(&x, &y)
    });
    let (worst_index, worst) = sampling::argmin(&margins).unwrap_or((0, 0.0));
    let verdict = if worst >= -cfg.tolerance {
        Verdict::SampledPass {
            pairs: cfg.n_pairs,
            worst_margin: worst,
        }
    } else {
        let (x, y) = sampler(worst_index as u64);
        Verdict::Falsified {
            witness_x: Vector::from_dvector(x),
            witness_y: Vector::from_dvector(y),
            violation: -worst,
        }
    };
    Certificate {
        property,
        verdict,
        tolerance: cfg.tolerance,
        seed: Some(cfg.seed),
        route: Route::Sampled,
        statistic: None,
        note: None,
    }
}

/// Sampled test of an operator property regardless of linearity.
pub fn certify_sampled(property: Property, op: &OperatorExpr, cfg: &SamplerConfig) -> Certificate {
    let dim = op.dim();
    sampled_certificate(
        property,
        cfg,
        |i| sampling::sample_pair(cfg, dim, i),
        |x, y| pair_margin(property, &op.apply(x), &op.apply(y), x, y).unwrap_or(f64::NAN),
    )
}

/// Exact spectral decision for an affine operator with linear part `m`.
fn certify_exact(property: Property, op: &OperatorExpr, m: &Matrix) -> Certificate {
    let n = m.nrows();
    let (statistic, passes, margin, witness) = match property {
        Property::FirmlyNonexpansive => {
            let reflected = m.scale(2.0).and_then(|a| a.sub(&Matrix::identity(n))).expect("finite");
            let (sigma, v) = top_singular(&reflected);
            (sigma, sigma <= 1.0 + EXACT_TOL, 1.0 - sigma, v)
        }
        Property::Nonexpansive => {
            let (sigma, v) = top_singular(m);
            (sigma, sigma <= 1.0 + EXACT_TOL, 1.0 - sigma, v)
        }
        Property::Monotone => {
            let sym = m.symmetric_part().expect("square");
            let eig = symmetric_eigen(&sym).expect("symmetric by construction");
            let min = eig.min();
            (min, min >= -EXACT_TOL, min, eig.vector(0))
        }
        Property::ConstantMap => {
            let (sigma, v) = top_singular(m);
            (sigma, sigma <= EXACT_TOL, -sigma, v)
        }
        other => unreachable!("{other:?} has no exact operator path"),
    };
    let verdict = if passes {
        Verdict::CertifiedExact { margin }
    } else {
        let x = witness.as_dvector().clone();
        let y = DVector::zeros(n);
        let violation = -pair_margin(property, &op.apply(&x), &op.apply(&y), &x, &y).expect("operator property");
        // a witness that does not itself violate the property proves nothing
        if violation > 0.0 {
            Verdict::Falsified {
                witness_x: witness,
                witness_y: Vector::zeros(n),
                violation,
            }
        } else {
            Verdict::NotCertifiedExact { margin }
        }
    };
    Certificate {
        property,
        verdict,
        tolerance: EXACT_TOL,
        seed: None,
        route: crate::certify::Route::ExactSpectral,
        statistic: Some(statistic),
        note: None,
    }
}

/// Exact when `op` is affine, sampled otherwise.
pub fn certify(property: Property, op: &OperatorExpr, cfg: &SamplerConfig) -> Certificate {
    match affine_parts(op) {
        Some(parts) => certify_exact(property, op, &parts.matrix),
        None => certify_sampled(property, op, cfg),
    }
}

/// Firm nonexpansiveness; the exact path tests `‖2M − I‖ ≤ 1`.
pub fn certify_fne(op: &OperatorExpr, cfg: &SamplerConfig) -> Certificate {
    certify(Property::FirmlyNonexpansive, op, cfg)
}

pub fn certify_nonexpansive(op: &OperatorExpr, cfg: &SamplerConfig) -> Certificate {
    certify(Property::Nonexpansive, op, cfg)
}

pub fn certify_monotone(op: &OperatorExpr, cfg: &SamplerConfig) -> Certificate {
    certify(Property::Monotone, op, cfg)
}

pub fn certify_constant(op: &OperatorExpr, cfg: &SamplerConfig) -> Certificate {
    certify(Property::ConstantMap, op, cfg)
}

/// `t1 ⪯ t2`, i.e. `t2 − t1` is firmly nonexpansive.
///
/// The relation carries its intended meaning only when both operands are
/// themselves firmly nonexpansive; only the difference is tested here.
pub fn resolvent_leq(t1: &OperatorExpr, t2: &OperatorExpr, cfg: &SamplerConfig) -> Result<Certificate> {
    check_dim(t1.dim(), t2.dim())?;
    let diff = OperatorExpr::difference(t2.clone(), t1.clone())?;
    Ok(certify_fne(&diff, cfg))
}

/// `p1 ⪯ p2` for proximal operands, decided by monotonicity of `p2 − p1`.
///
/// For proximal mappings a monotone difference is automatically firmly
/// nonexpansive, so this is equivalent to [`resolvent_leq`] on that class.
pub fn resolvent_leq_proximal(p1: &OperatorExpr, p2: &OperatorExpr, cfg: &SamplerConfig) -> Result<Certificate> {
    check_dim(p1.dim(), p2.dim())?;
    let diff = OperatorExpr::difference(p2.clone(), p1.clone())?;
    Ok(certify_monotone(&diff, cfg).with_note("decided by monotonicity of the difference of proximal operands"))
}

/// `t0 ⪯ t1` and `Id − t1 ⪯ Id − t0` reach the same verdict class.
pub fn order_reversal_check(t0: &OperatorExpr, t1: &OperatorExpr, cfg: &SamplerConfig) -> Result<bool> {
    let forward = resolvent_leq(t0, t1, cfg)?;
    let backward = resolvent_leq(&t1.complement(), &t0.complement(), cfg)?;
    Ok(forward.holds() == backward.holds())
}
