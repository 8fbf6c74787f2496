//! Zarantonello's order on cone projectors, Moreau's order on envelopes, and
//! the orders induced on monotone matrices and convex atoms by the resolvent
//! order.
//!
//! Zarantonello's relation `P_C ⪯_Z P_D` is `P_C P_D = P_C`. Alongside the
//! defining composition test three equivalent characterizations are sampled:
//! `P_D − P_C` is a projector, and the pair (commutation, inner-product
//! dominance). They are cross-checks; the overall verdict is the composition.

use nalgebra::DVector;
use serde::Serialize;

use crate::certify::{certify_fne, certify_monotone, resolvent_leq, sampled_certificate, Certificate, Property};
use crate::error::{check_dim, Result};
use crate::linops::OperatorExpr;
use crate::prox_catalog::{Cone, ConvexAtom};
use crate::resolvent_calculus::MonotoneMatrix;
use crate::sampling::{self, SamplerConfig};

/// Per-point tolerance for operator equalities between cone projectors.
pub const POINTWISE_TOL: f64 = 1e-9;

/// Distance tolerance for the `C ⊆ D` consequence.
pub const CONTAINMENT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZarantonelloVerdict {
    pub composition_holds: Certificate,
    pub difference_is_projector: Certificate,
    pub commutation_holds: Certificate,
    pub inner_product_dominance: Certificate,
}

impl ZarantonelloVerdict {
    pub fn holds(&self) -> bool {
        self.composition_holds.holds()
    }

    /// Commutation together with inner-product dominance.
    pub fn fact_ii_holds(&self) -> bool {
        self.commutation_holds.holds() && self.inner_product_dominance.holds()
    }

    /// The three equivalent characterizations reach the same verdict.
    pub fn consistent(&self) -> bool {
        let z = self.holds();
        self.difference_is_projector.holds() == z && self.fact_ii_holds() == z
    }
}

fn pointwise_cfg(cfg: &SamplerConfig, tol: f64) -> SamplerConfig {
    SamplerConfig {
        tolerance: tol,
        ..cfg.clone()
    }
}

/// Odd indices are pushed through `P_D`, so half the points lie in `D`.
fn mixed_point(cfg: &SamplerConfig, d: &Cone, index: u64) -> DVector<f64> {
    let x = sampling::sample_point(cfg, d.dim(), index);
    if index % 2 == 1 {
        d.project_raw(&x)
    } else {
        x
    }
}

fn equality_certificate<F>(cfg: &SamplerConfig, d: &Cone, residual: F) -> Certificate
where
    F: Fn(&DVector<f64>) -> f64 + Sync + Send,
{
    let eq = pointwise_cfg(cfg, POINTWISE_TOL);
    sampled_certificate(
        Property::Equality,
        &eq,
        |i| {
            let x = mixed_point(&eq, d, i);
            (x.clone(), x)
        },
        |x, _| -residual(x),
    )
}

pub fn zarantonello_leq(c: &Cone, d: &Cone, cfg: &SamplerConfig) -> Result<ZarantonelloVerdict> {
    check_dim(c.dim(), d.dim())?;
    let composition_holds = equality_certificate(cfg, d, |x| {
        let pc = c.project_raw(x);
        (c.project_raw(&d.project_raw(x)) - pc).norm()
    })
    .with_note("P_C P_D = P_C");

    let diff = |x: &DVector<f64>| d.project_raw(x) - c.project_raw(x);
    let idempotent = equality_certificate(cfg, d, |x| {
        let m = diff(x);
        (diff(&m) - m).norm()
    });
    let difference_is_projector = if idempotent.holds() {
        let op = OperatorExpr::difference(
            OperatorExpr::prox(ConvexAtom::indicator_cone(d.clone())),
            OperatorExpr::prox(ConvexAtom::indicator_cone(c.clone())),
        )?;
        certify_fne(&op, cfg)
    } else {
        Certificate {
            property: Property::Idempotent,
            ..idempotent
        }
    }
    .with_note("P_D - P_C idempotent and firmly nonexpansive");

    let commutation_holds = equality_certificate(cfg, d, |x| {
        (c.project_raw(&d.project_raw(x)) - d.project_raw(&c.project_raw(x))).norm()
    })
    .with_note("P_C P_D = P_D P_C");

    let dominance_cfg = pointwise_cfg(cfg, POINTWISE_TOL);
    let inner_product_dominance = sampled_certificate(
        Property::InnerProductDominance,
        &dominance_cfg,
        |i| {
            let x = mixed_point(&dominance_cfg, d, i);
            (x.clone(), x)
        },
        |x, _| {
            let nn = x.norm_squared();
            if nn == 0.0 {
                0.0
            } else {
                (x.dot(&d.project_raw(x)) - x.dot(&c.project_raw(x))) / nn
            }
        },
    )
    .with_note("<x, P_C x> <= <x, P_D x>");

    Ok(ZarantonelloVerdict {
        composition_holds,
        difference_is_projector,
        commutation_holds,
        inner_product_dominance,
    })
}

/// Sampled points of `C` lie in `D`, i.e. `P_D P_C = P_C`.
pub fn cone_containment(c: &Cone, d: &Cone, cfg: &SamplerConfig) -> Result<Certificate> {
    check_dim(c.dim(), d.dim())?;
    let cc = pointwise_cfg(cfg, CONTAINMENT_TOL);
    Ok(sampled_certificate(
        Property::Equality,
        &cc,
        |i| {
            let x = c.project_raw(&sampling::sample_point(&cc, c.dim(), i));
            (x.clone(), x)
        },
        |x, _| -(d.project_raw(x) - x).norm(),
    )
    .with_note("C subset of D"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZarantonelloResolventReport {
    pub zarantonello: ZarantonelloVerdict,
    pub resolvent: Certificate,
}

impl ZarantonelloResolventReport {
    pub fn verdicts(&self) -> (bool, bool) {
        (self.zarantonello.holds(), self.resolvent.holds())
    }

    pub fn agree(&self) -> bool {
        let (z, r) = self.verdicts();
        z == r
    }
}

pub fn zarantonello_vs_resolvent(c: &Cone, d: &Cone, cfg: &SamplerConfig) -> Result<ZarantonelloResolventReport> {
    let zarantonello = zarantonello_leq(c, d, cfg)?;
    let resolvent = resolvent_leq(
        &OperatorExpr::prox(ConvexAtom::indicator_cone(c.clone())),
        &OperatorExpr::prox(ConvexAtom::indicator_cone(d.clone())),
        cfg,
    )?;
    Ok(ZarantonelloResolventReport { zarantonello, resolvent })
}

/// `env g ⪯_M env f`, decided by monotonicity of `P_g − P_f`.
pub fn moreau_leq_envelopes(f: &ConvexAtom, g: &ConvexAtom, cfg: &SamplerConfig) -> Result<Certificate> {
    check_dim(f.dim(), g.dim())?;
    let diff = OperatorExpr::difference(OperatorExpr::prox(g.clone()), OperatorExpr::prox(f.clone()))?;
    Ok(certify_monotone(&diff, cfg).with_note("tested leg: P_g - P_f monotone"))
}

/// `B ⪯ A` on monotone matrices, i.e. `J_A ⪯ J_B`.
pub fn monotone_operator_leq(b: &MonotoneMatrix, a: &MonotoneMatrix, cfg: &SamplerConfig) -> Result<Certificate> {
    resolvent_leq(&a.resolvent_expr()?, &b.resolvent_expr()?, cfg)
}

/// `g ⪯ f` on convex atoms, i.e. `P_f ⪯ P_g`.
pub fn function_leq(g: &ConvexAtom, f: &ConvexAtom, cfg: &SamplerConfig) -> Result<Certificate> {
    resolvent_leq(&OperatorExpr::prox(f.clone()), &OperatorExpr::prox(g.clone()), cfg)
}
