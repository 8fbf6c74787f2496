//! Executable constructions and counterexamples for the resolvent order, each
//! producing a [`GalleryResult`] of expected-versus-observed claims.

use serde::Serialize;

use crate::certify::{certify_fne, resolvent_leq, sampled_certificate, Certificate, Property};
use crate::error::{Error, Result};
use crate::linops::{linearize, symmetric_eigen, Linearization, Matrix, OperatorExpr, Vector};
use crate::prox_catalog::{Cone, ConvexAtom};
use crate::sampling::{self, map_indexed, SamplerConfig};

/// Entrywise tolerance for matrix identities between linear expressions.
pub const MATRIX_EQ_TOL: f64 = 1e-12;

/// Per-point tolerance for sampled operator identities.
pub const POINTWISE_TOL: f64 = 1e-9;

/// Tolerance on partition inputs (sum to identity, spectrum in `[0, 1]`).
pub const PARTITION_TOL: f64 = 1e-10;

/// `cos θ` used wherever a default rotation is needed (with `n = 2`).
pub const DEFAULT_COS_THETA: f64 = 0.6;
pub const DEFAULT_N: usize = 2;
pub const DEFAULT_BALL_CHAIN_N: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Claim {
    pub description: String,
    pub expected: bool,
    pub observed: Certificate,
}

impl Claim {
    pub fn new(description: impl Into<String>, expected: bool, observed: Certificate) -> Self {
        Claim {
            description: description.into(),
            expected,
            observed,
        }
    }

    pub fn matches(&self) -> bool {
        self.observed.holds() == self.expected
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GalleryResult {
    pub name: String,
    pub claims: Vec<Claim>,
    /// Every claim's observed verdict class matches its expectation.
    pub passed: bool,
    pub note: Option<String>,
}

impl GalleryResult {
    pub fn new(name: impl Into<String>, claims: Vec<Claim>) -> Self {
        let passed = claims.iter().all(Claim::matches);
        GalleryResult {
            name: name.into(),
            claims,
            passed,
            note: None,
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// Admissible `cos θ` interval `[1/√(2n), 1/√2)`; empty for `n = 1`.
pub fn rotation_window(n: usize) -> (f64, f64) {
    (1.0 / (2.0 * n as f64).sqrt(), std::f64::consts::FRAC_1_SQRT_2)
}

fn check_window(n: usize, cos_theta: f64) -> Result<()> {
    let (lower, upper) = rotation_window(n);
    if n == 0 || !(cos_theta >= lower && cos_theta < upper) {
        return Err(Error::ThetaOutsideWindow {
            n,
            cos_theta,
            lower,
            upper,
        });
    }
    Ok(())
}

/// The pair `(αR_θ, αR_{−θ})` with `α = 1/(2n cos θ)`.
pub fn scaled_rotations(n: usize, cos_theta: f64) -> Result<(f64, OperatorExpr, OperatorExpr)> {
    check_window(n, cos_theta)?;
    let theta = cos_theta.acos();
    let alpha = 1.0 / (2.0 * n as f64 * cos_theta);
    let r = OperatorExpr::scale(alpha, OperatorExpr::rotation(theta)?)?;
    let s = OperatorExpr::scale(alpha, OperatorExpr::rotation(-theta)?)?;
    Ok((alpha, r, s))
}

/// Exact equality of a linear expression with `target`, entrywise to `tol`.
fn linear_equality(op: &OperatorExpr, target: &Matrix, tol: f64) -> Certificate {
    let deviation = match linearize(op) {
        Linearization::Linear(m) => m.max_abs_diff(target).unwrap_or(f64::INFINITY),
        Linearization::NotLinear => f64::INFINITY,
    };
    Certificate::exact_bound(Property::Equality, deviation, tol)
}

/// Sampled pointwise equality `a(x) = b(x)` to [`POINTWISE_TOL`].
fn sampled_equality(a: &OperatorExpr, b: &OperatorExpr, cfg: &SamplerConfig) -> Certificate {
    let eq = SamplerConfig {
        tolerance: POINTWISE_TOL,
        ..cfg.clone()
    };
    let dim = a.dim();
    sampled_certificate(
        Property::Equality,
        &eq,
        |i| {
            let x = sampling::sample_point(&eq, dim, i);
            (x.clone(), x)
        },
        |x, _| -(a.apply(x) - b.apply(x)).norm(),
    )
}

fn prefix_label(symbol: &str, m: usize) -> String {
    match m {
        1 => format!("{symbol}_1"),
        2 => format!("{symbol}_1 + {symbol}_2"),
        _ => format!("{symbol}_1 + ... + {symbol}_{m}"),
    }
}

fn repeat_sum(op: &OperatorExpr, n: usize) -> Result<OperatorExpr> {
    OperatorExpr::sum(vec![op.clone(); n])
}

pub fn rotation_construction(n: usize, cos_theta: f64) -> Result<GalleryResult> {
    let (alpha, r, s) = scaled_rotations(n, cos_theta)?;
    let cfg = SamplerConfig::default();
    let nr = repeat_sum(&r, n)?;
    let ns = repeat_sum(&s, n)?;
    let total = OperatorExpr::sum(vec![nr.clone(), ns.clone()])?;
    let claims = vec![
        Claim::new("alpha R_theta is firmly nonexpansive", true, certify_fne(&r, &cfg)),
        Claim::new("alpha R_-theta is firmly nonexpansive", true, certify_fne(&s, &cfg)),
        Claim::new("n alpha R_theta is firmly nonexpansive", false, certify_fne(&nr, &cfg)),
        Claim::new("n alpha R_-theta is firmly nonexpansive", false, certify_fne(&ns, &cfg)),
        Claim::new(
            "n alpha R_theta + n alpha R_-theta = Id",
            true,
            linear_equality(&total, &Matrix::identity(2), MATRIX_EQ_TOL),
        ),
    ];
    Ok(GalleryResult::new("rotation_construction", claims).with_note(format!("n = {n}, cos theta = {cos_theta}, alpha = {alpha}")))
}

pub fn partial_sum_failure(n: usize, cos_theta: f64) -> Result<GalleryResult> {
    let (_, r, s) = scaled_rotations(n, cos_theta)?;
    let cfg = SamplerConfig::default();
    let mut terms = vec![r.clone(); n];
    terms.extend(std::iter::repeat_n(s.clone(), n));
    let total = OperatorExpr::sum(terms.clone())?;
    let first_half = OperatorExpr::sum(terms[..n].to_vec())?;
    let claims = vec![
        Claim::new("T_1 = ... = T_n = alpha R_theta is firmly nonexpansive", true, certify_fne(&r, &cfg)),
        Claim::new("T_n+1 = ... = T_2n = alpha R_-theta is firmly nonexpansive", true, certify_fne(&s, &cfg)),
        Claim::new(
            "T_1 + ... + T_2n = Id",
            true,
            linear_equality(&total, &Matrix::identity(2), MATRIX_EQ_TOL),
        ),
        Claim::new("T_1 + ... + T_n is firmly nonexpansive", false, certify_fne(&first_half, &cfg)),
    ];
    Ok(GalleryResult::new("partial_sum_failure", claims).with_note(format!("n = {n}, cos theta = {cos_theta}")))
}

pub fn transitivity_failure() -> Result<GalleryResult> {
    let cfg = SamplerConfig::default();
    let (_, r, s) = scaled_rotations(DEFAULT_N, DEFAULT_COS_THETA)?;
    let two_r = OperatorExpr::scale(2.0, r.clone())?;
    let t1 = s.clone();
    let t2 = OperatorExpr::sum(vec![r.clone(), s.clone()])?;
    let t3 = OperatorExpr::sum(vec![two_r.clone(), s.clone()])?;
    let two_r_two_s = OperatorExpr::sum(vec![two_r, OperatorExpr::scale(2.0, s)?])?;
    let midpoint = OperatorExpr::scale(0.5, OperatorExpr::sum(vec![t1.clone(), t3.clone()])?)?;
    let t2_matrix = match linearize(&t2) {
        Linearization::Linear(m) => m,
        Linearization::NotLinear => unreachable!("sum of scaled rotations is linear"),
    };
    let claims = vec![
        Claim::new("T1 = S is firmly nonexpansive", true, certify_fne(&t1, &cfg)),
        Claim::new("T2 = R + S is firmly nonexpansive", true, certify_fne(&t2, &cfg)),
        Claim::new("T3 = 2R + S is firmly nonexpansive", true, certify_fne(&t3, &cfg)),
        Claim::new("T1 <= T2", true, resolvent_leq(&t1, &t2, &cfg)?),
        Claim::new("T2 <= T3", true, resolvent_leq(&t2, &t3, &cfg)?),
        Claim::new("T1 <= T3", false, resolvent_leq(&t1, &t3, &cfg)?),
        Claim::new(
            "2R + 2S = Id",
            true,
            linear_equality(&two_r_two_s, &Matrix::identity(2), MATRIX_EQ_TOL),
        ),
        Claim::new(
            "T2 = (T1 + T3) / 2",
            true,
            linear_equality(&midpoint, &t2_matrix, MATRIX_EQ_TOL),
        ),
    ];
    Ok(GalleryResult::new("transitivity_failure", claims))
}

/// `Id − P_{rC}` for the centered ball of radius `r` in R², with `0C = {0}`.
fn ball_complement(r: usize) -> Result<OperatorExpr> {
    let atom = if r == 0 {
        ConvexAtom::indicator_point(Vector::zeros(2))
    } else {
        ConvexAtom::indicator_ball(Vector::zeros(2), r as f64)?
    };
    Ok(OperatorExpr::prox(atom).complement())
}

pub fn ball_chain(n_max: usize, cfg: &SamplerConfig) -> Result<GalleryResult> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be >= 1".into()));
    }
    let t = ball_complement(1)?;
    let powers: Vec<OperatorExpr> = (0..=n_max).map(|n| t.power(n)).collect();
    let mut claims = Vec::new();
    for (n, tn) in powers.iter().enumerate() {
        claims.push(Claim::new(
            format!("T^{n} = Id - P_({n}C)"),
            true,
            sampled_equality(tn, &ball_complement(n)?, cfg),
        ));
    }
    for n in 0..n_max {
        claims.push(Claim::new(
            format!("T^{} <= T^{n}", n + 1),
            true,
            resolvent_leq(&powers[n + 1], &powers[n], cfg)?,
        ));
    }
    claims.push(Claim::new(
        format!("0 <= T^{n_max}"),
        true,
        resolvent_leq(&OperatorExpr::zero(2)?, &powers[n_max], cfg)?,
    ));
    Ok(GalleryResult::new("ball_chain", claims).with_note("C is the closed unit ball of R^2"))
}

fn validate_partition(ms: &[Matrix]) -> Result<usize> {
    let first = ms.first().ok_or_else(|| Error::PartitionInvalid("empty partition".into()))?;
    let n = first.nrows();
    let mut total = Matrix::zeros(n);
    for (i, m) in ms.iter().enumerate() {
        if !m.is_square() || m.nrows() != n {
            return Err(Error::PartitionInvalid(format!("term {i} is not {n}x{n}")));
        }
        if !m.is_symmetric() {
            return Err(Error::PartitionInvalid(format!("term {i} is not symmetric")));
        }
        let eig = symmetric_eigen(m)?;
        if eig.min() < -PARTITION_TOL || eig.max() > 1.0 + PARTITION_TOL {
            return Err(Error::PartitionInvalid(format!(
                "term {i} has spectrum [{}, {}] outside [0, 1]",
                eig.min(),
                eig.max()
            )));
        }
        total = total.add(m)?;
    }
    let deviation = total.max_abs_diff(&Matrix::identity(n))?;
    if deviation > PARTITION_TOL {
        return Err(Error::PartitionInvalid(format!("terms sum to identity only within {deviation}")));
    }
    Ok(n)
}

/// Symmetric PSD partition of the identity: every term and every prefix sum is
/// firmly nonexpansive.
pub fn prox_partition_partial_sums(ms: &[Matrix]) -> Result<GalleryResult> {
    validate_partition(ms)?;
    let cfg = SamplerConfig::default();
    let ops = ms
        .iter()
        .map(|m| OperatorExpr::linear(m.clone()))
        .collect::<Result<Vec<_>>>()?;
    let mut claims = Vec::new();
    for (i, op) in ops.iter().enumerate() {
        claims.push(Claim::new(format!("M_{} is firmly nonexpansive", i + 1), true, certify_fne(op, &cfg)));
    }
    for m in 1..=ops.len() {
        let prefix = OperatorExpr::sum(ops[..m].to_vec())?;
        claims.push(Claim::new(
            format!("{} is firmly nonexpansive", prefix_label("M", m)),
            true,
            certify_fne(&prefix, &cfg),
        ));
    }
    Ok(GalleryResult::new("prox_partition_partial_sums", claims))
}

/// Partition of the identity by arbitrary operators: each term is firmly
/// nonexpansive, the terms sum to `Id`, and each prefix is tested.
pub fn operator_partition(name: &str, ops: &[OperatorExpr], cfg: &SamplerConfig) -> Result<GalleryResult> {
    let first = ops.first().ok_or_else(|| Error::PartitionInvalid("empty partition".into()))?;
    let dim = first.dim();
    let total = OperatorExpr::sum(ops.to_vec())?;
    let mut claims = vec![Claim::new(
        "terms sum to Id",
        true,
        sampled_equality(&total, &OperatorExpr::identity(dim)?, cfg),
    )];
    for (i, op) in ops.iter().enumerate() {
        claims.push(Claim::new(format!("T_{} is firmly nonexpansive", i + 1), true, certify_fne(op, cfg)));
    }
    for m in 1..=ops.len() {
        let prefix = OperatorExpr::sum(ops[..m].to_vec())?;
        claims.push(Claim::new(
            format!("{} is firmly nonexpansive", prefix_label("T", m)),
            true,
            certify_fne(&prefix, cfg),
        ));
    }
    Ok(GalleryResult::new(name, claims))
}

/// `(P_f, Id − P_f)` for the l1 norm on R³.
pub fn moreau_partition(cfg: &SamplerConfig) -> Result<GalleryResult> {
    let p = OperatorExpr::prox(ConvexAtom::l1_norm(3, 1.0)?);
    operator_partition("moreau_partition", &[p.clone(), p.complement()], cfg)
}

/// With `T1`, `T2` and `T3 = Id − T1 − T2` all firmly nonexpansive, so is
/// `T1 + T2`.
pub fn three_operator_partition(t1: &OperatorExpr, t2: &OperatorExpr, cfg: &SamplerConfig) -> Result<GalleryResult> {
    let t3 = OperatorExpr::difference(
        OperatorExpr::identity(t1.dim())?,
        OperatorExpr::sum(vec![t1.clone(), t2.clone()])?,
    )?;
    let claims = vec![
        Claim::new("T1 is firmly nonexpansive", true, certify_fne(t1, cfg)),
        Claim::new("T2 is firmly nonexpansive", true, certify_fne(t2, cfg)),
        Claim::new("T3 = Id - T1 - T2 is firmly nonexpansive", true, certify_fne(&t3, cfg)),
        Claim::new(
            "T1 + T2 is firmly nonexpansive",
            true,
            certify_fne(&OperatorExpr::sum(vec![t1.clone(), t2.clone()])?, cfg),
        ),
    ];
    Ok(GalleryResult::new("three_operator_partition", claims))
}

/// Default nonlinear instance: halves of the unit-ball and orthant projectors.
pub fn three_operator_default(cfg: &SamplerConfig) -> Result<GalleryResult> {
    let ball = OperatorExpr::prox(ConvexAtom::indicator_ball(Vector::zeros(2), 1.0)?);
    let orthant = OperatorExpr::prox(ConvexAtom::indicator_cone(Cone::nonneg_orthant(2)?));
    three_operator_partition(&OperatorExpr::scale(0.5, ball)?, &OperatorExpr::scale(0.5, orthant)?, cfg)
}

pub fn antisymmetry_failure(x1: &Vector, x2: &Vector) -> Result<GalleryResult> {
    crate::error::check_dim(x1.dim(), x2.dim())?;
    let cfg = SamplerConfig::default();
    let t1 = OperatorExpr::constant(x1.clone());
    let t2 = OperatorExpr::constant(x2.clone());
    let gap = x1.max_abs_diff(x2);
    let claims = vec![
        Claim::new("T1 <= T2", true, resolvent_leq(&t1, &t2, &cfg)?),
        Claim::new("T2 <= T1", true, resolvent_leq(&t2, &t1, &cfg)?),
        Claim::new(
            "T2 - T1 is firmly nonexpansive",
            true,
            certify_fne(&OperatorExpr::difference(t2, t1)?, &cfg),
        ),
        Claim::new("T1 = T2", false, Certificate::exact_bound(Property::Equality, gap, 0.0)),
    ];
    let result = GalleryResult::new("antisymmetry_failure", claims);
    Ok(if gap == 0.0 {
        result.with_note("degenerate: x1 = x2 is not a counterexample")
    } else {
        result
    })
}

pub fn symmetry_failure(dim: usize) -> Result<GalleryResult> {
    let cfg = SamplerConfig::default();
    let zero = OperatorExpr::zero(dim)?;
    let id = OperatorExpr::identity(dim)?;
    let claims = vec![
        Claim::new("0 <= Id", true, resolvent_leq(&zero, &id, &cfg)?),
        Claim::new("Id <= 0", false, resolvent_leq(&id, &zero, &cfg)?),
    ];
    Ok(GalleryResult::new("symmetry_failure", claims))
}

/// Registered items, in run order.
pub const ITEMS: &[&str] = &[
    "symmetry_failure",
    "antisymmetry_failure",
    "ball_chain",
    "prox_partition_partial_sums",
    "moreau_partition",
    "three_operator_partition",
    "rotation_construction",
    "partial_sum_failure",
    "transitivity_failure",
];

pub fn default_partition() -> Vec<Matrix> {
    [[0.5, 0.2], [0.3, 0.3], [0.2, 0.5]]
        .iter()
        .map(|d| Matrix::diag(d).expect("finite"))
        .collect()
}

/// Runs a registered item with its default parameters.
pub fn run_item(name: &str, cfg: &SamplerConfig) -> Result<GalleryResult> {
    match name {
        "symmetry_failure" => symmetry_failure(2),
        "antisymmetry_failure" => antisymmetry_failure(&Vector::zeros(2), &Vector::basis(2, 0)),
        "ball_chain" => ball_chain(DEFAULT_BALL_CHAIN_N, cfg),
        "prox_partition_partial_sums" => prox_partition_partial_sums(&default_partition()),
        "moreau_partition" => moreau_partition(cfg),
        "three_operator_partition" => three_operator_default(cfg),
        "rotation_construction" => rotation_construction(DEFAULT_N, DEFAULT_COS_THETA),
        "partial_sum_failure" => partial_sum_failure(DEFAULT_N, DEFAULT_COS_THETA),
        "transitivity_failure" => transitivity_failure(),
        other => Err(Error::UnknownGalleryItem(other.to_string())),
    }
}

/// Every registered item, in [`ITEMS`] order.
pub fn run_all(cfg: &SamplerConfig) -> Result<Vec<GalleryResult>> {
    map_indexed(cfg.execution, ITEMS.len(), |i| run_item(ITEMS[i], cfg))
        .into_iter()
        .collect()
}

/// `T^n` applied to `x` for the unit-ball complement in R².
pub fn ball_chain_eval(n: usize, x: &Vector) -> Result<Vector> {
    ball_complement(1)?.power(n).eval(x)
}
