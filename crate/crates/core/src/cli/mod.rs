//! `resolvent-order check | certify | reproduce`.
//!
//! JSON goes to stdout (or `--out`), a table to stderr. Exit codes: 0 when the
//! relation or property holds, 1 when it is falsified, 2 on any error.

pub mod report;
pub mod spec_file;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::certify::{self, resolvent_leq, Certificate, Property};
use crate::error::{Error, Result};
use crate::gallery::{self, GalleryResult};
use crate::linops::{affine_parts, Matrix, Node, OperatorExpr, Vector};
use crate::orders;
use crate::prox_catalog::Cone;
use crate::quotient::{equivalent_fne, Equivalence};
use crate::resolvent_calculus::{loewner_leq, MonotoneMatrix};
use crate::sampling::{SamplerConfig, DEFAULT_PAIRS, DEFAULT_SEED, DEFAULT_TOLERANCE};

pub use report::{CertifyReport, OrderReport, Query, Relation, ReproduceReport, VerdictLabel, TOOL_VERSION};
pub use spec_file::OperatorSpecFile;

pub const SEED_ENV: &str = "RESOLVENT_ORDER_SEED";

#[derive(Debug, Parser)]
#[command(name = "resolvent-order", version, about = "Certify or falsify the resolvent order and its classical relatives")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide `lhs ⪯ rhs` under a relation between named entries of a spec file
    Check(CheckArgs),
    /// Certify a single operator property
    Certify(CertifyArgs),
    /// Run a registered construction, or `all`
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Args)]
pub struct SamplingArgs {
    #[arg(long, env = SEED_ENV, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_PAIRS)]
    pub pairs: usize,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tol: f64,
    /// Write the JSON report here instead of stdout
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

impl SamplingArgs {
    fn config(&self) -> Result<SamplerConfig> {
        let cfg = SamplerConfig {
            seed: self.seed,
            n_pairs: self.pairs,
            tolerance: self.tol,
            ..SamplerConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long, value_name = "PATH")]
    pub spec: PathBuf,
    #[arg(long, value_enum)]
    pub relation: Relation,
    #[arg(long)]
    pub lhs: String,
    #[arg(long)]
    pub rhs: String,
    #[command(flatten)]
    pub sampling: SamplingArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PropertyArg {
    Fne,
    Nonexpansive,
    Monotone,
    Constant,
}

impl From<PropertyArg> for Property {
    fn from(p: PropertyArg) -> Self {
        match p {
            PropertyArg::Fne => Property::FirmlyNonexpansive,
            PropertyArg::Nonexpansive => Property::Nonexpansive,
            PropertyArg::Monotone => Property::Monotone,
            PropertyArg::Constant => Property::ConstantMap,
        }
    }
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[arg(long, value_name = "PATH")]
    pub spec: PathBuf,
    pub operator: String,
    #[arg(value_enum)]
    pub property: PropertyArg,
    #[command(flatten)]
    pub sampling: SamplingArgs,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    /// Item name or `all`
    pub item: String,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long = "cos-theta", allow_negative_numbers = true)]
    pub cos_theta: Option<f64>,
    #[arg(long = "n-max")]
    pub n_max: Option<usize>,
    #[command(flatten)]
    pub sampling: SamplingArgs,
}

/// Captured result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn error(e: impl std::fmt::Display) -> Self {
        Outcome {
            code: 2,
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: 2,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    let result = match &cli.command {
        Command::Check(a) => cmd_check(a).map(|r| (r.verdict.exit_code(), json_of(&r), r.table(), &a.sampling.out)),
        Command::Certify(a) => cmd_certify(a).map(|r| (r.verdict.exit_code(), json_of(&r), r.table(), &a.sampling.out)),
        Command::Reproduce(a) => cmd_reproduce(a).map(|r| (if r.passed { 0 } else { 1 }, json_of(&r), r.table(), &a.sampling.out)),
    };
    match result {
        Ok((code, json, table, out)) => match out {
            Some(path) => match write_file(path, &json) {
                Ok(()) => Outcome {
                    code,
                    stdout: String::new(),
                    stderr: table,
                },
                Err(e) => Outcome::error(e),
            },
            None => Outcome {
                code,
                stdout: json,
                stderr: table,
            },
        },
        Err(e) => Outcome::error(e),
    }
}

fn json_of<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Operators by name; a function name stands for its prox.
fn operator_operand(spec: &OperatorSpecFile, name: &str) -> Result<OperatorExpr> {
    match spec.operator(name) {
        Ok(op) => Ok(op.clone()),
        Err(e) => spec.function(name).map(|f| OperatorExpr::prox(f.clone())).map_err(|_| e),
    }
}

/// The matrix of a `linear` or `resolvent` operator entry (for the latter, `A`).
fn matrix_operand(spec: &OperatorSpecFile, name: &str) -> Result<Matrix> {
    match spec.operator(name)?.node() {
        Node::Linear(m) => Ok(m.clone()),
        Node::ResolventOf { a, .. } => Ok(a.clone()),
        _ => match affine_parts(spec.operator(name)?) {
            Some(parts) if parts.offset.norm() == 0.0 => Ok(parts.matrix),
            _ => Err(Error::InvalidArgument(format!("operator `{name}` is not a matrix"))),
        },
    }
}

fn cone_operand(spec: &OperatorSpecFile, name: &str) -> Result<Cone> {
    spec.function(name)?.as_cone()
}

fn verdict_json(c: &Certificate) -> serde_json::Value {
    json!({ "verdict": VerdictLabel::of(c).as_str(), "margin": report::unsigned_zero(c.margin()) })
}

pub fn cmd_check(a: &CheckArgs) -> Result<OrderReport> {
    let cfg = a.sampling.config()?;
    let spec = OperatorSpecFile::load(&a.spec)?;
    check(&spec, a.relation, &a.lhs, &a.rhs, &cfg)
}

/// Decides `lhs ⪯ rhs` (or `lhs ∼ rhs` for equivalence).
pub fn check(spec: &OperatorSpecFile, relation: Relation, lhs: &str, rhs: &str, cfg: &SamplerConfig) -> Result<OrderReport> {
    let query = Query {
        relation,
        lhs: lhs.to_string(),
        rhs: rhs.to_string(),
    };
    let from = |c: Certificate| OrderReport::from_certificate(query.clone(), &c, cfg.seed);
    Ok(match relation {
        Relation::Resolvent => from(resolvent_leq(&operator_operand(spec, lhs)?, &operator_operand(spec, rhs)?, cfg)?),
        Relation::Loewner => from(loewner_leq(&matrix_operand(spec, rhs)?, &matrix_operand(spec, lhs)?)?),
        Relation::Zarantonello => {
            let v = orders::zarantonello_leq(&cone_operand(spec, lhs)?, &cone_operand(spec, rhs)?, cfg)?;
            let mut checks = json!({
                "composition": verdict_json(&v.composition_holds),
                "difference_is_projector": verdict_json(&v.difference_is_projector),
                "commutation": verdict_json(&v.commutation_holds),
                "inner_product_dominance": verdict_json(&v.inner_product_dominance),
                "consistent": v.consistent(),
            });
            if !v.consistent() {
                checks["error"] = json!("characterizations disagree; composition verdict reported");
            }
            from(v.composition_holds).with_checks(checks)
        }
        Relation::Moreau => from(orders::moreau_leq_envelopes(spec.function(rhs)?, spec.function(lhs)?, cfg)?),
        Relation::MonotoneOp => {
            let b = MonotoneMatrix::new(matrix_operand(spec, lhs)?)?;
            let a = MonotoneMatrix::new(matrix_operand(spec, rhs)?)?;
            from(orders::monotone_operator_leq(&b, &a, cfg)?)
        }
        Relation::Function => from(orders::function_leq(spec.function(lhs)?, spec.function(rhs)?, cfg)?),
        Relation::Equivalence => equivalence_report(query, &operator_operand(spec, lhs)?, &operator_operand(spec, rhs)?, cfg)?,
    })
}

fn equivalence_report(query: Query, t1: &OperatorExpr, t2: &OperatorExpr, cfg: &SamplerConfig) -> Result<OrderReport> {
    let eq = equivalent_fne(t1, t2, cfg)?;
    let (verdict, margin, witness, checks) = match &eq {
        Equivalence::Equivalent(w) => (
            if w.exact {
                VerdictLabel::CertifiedExact
            } else {
                VerdictLabel::SampledPass
            },
            report::unsigned_zero(w.tolerance - w.residual),
            None,
            json!({ "shift": eq.shift(), "residual": w.residual }),
        ),
        Equivalence::NotEquivalent {
            residual,
            tolerance,
            witness,
            ..
        } => (
            VerdictLabel::Falsified,
            tolerance - residual,
            witness.clone().map(|x| {
                let zero = Vector::zeros(x.dim());
                [x, zero]
            }),
            json!({ "residual": residual }),
        ),
    };
    Ok(OrderReport {
        query,
        verdict,
        margin,
        witness,
        seed: cfg.seed,
        tool_version: TOOL_VERSION.to_string(),
        checks: Some(checks),
    })
}

pub fn cmd_certify(a: &CertifyArgs) -> Result<CertifyReport> {
    let cfg = a.sampling.config()?;
    let spec = OperatorSpecFile::load(&a.spec)?;
    let op = operator_operand(&spec, &a.operator)?;
    let cert = certify::certify(a.property.into(), &op, &cfg);
    Ok(CertifyReport::new(&a.operator, &cert, cfg.seed))
}

fn reproduce_item(name: &str, a: &ReproduceArgs, cfg: &SamplerConfig) -> Result<GalleryResult> {
    let n = a.n.unwrap_or(gallery::DEFAULT_N);
    let cos_theta = a.cos_theta.unwrap_or(gallery::DEFAULT_COS_THETA);
    match name {
        "rotation_construction" => gallery::rotation_construction(n, cos_theta),
        "partial_sum_failure" => gallery::partial_sum_failure(n, cos_theta),
        "ball_chain" => gallery::ball_chain(a.n_max.unwrap_or(gallery::DEFAULT_BALL_CHAIN_N), cfg),
        other => gallery::run_item(other, cfg),
    }
}

pub fn cmd_reproduce(a: &ReproduceArgs) -> Result<ReproduceReport> {
    let cfg = a.sampling.config()?;
    let results = if a.item == "all" {
        gallery::ITEMS
            .iter()
            .map(|name| reproduce_item(name, a, &cfg))
            .collect::<Result<Vec<_>>>()?
    } else {
        vec![reproduce_item(&a.item, a, &cfg)?]
    };
    Ok(ReproduceReport::new(&results, cfg.seed))
}
