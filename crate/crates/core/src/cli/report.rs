//! Machine-readable reports written to stdout and the matching stderr tables.

use serde::Serialize;
use serde_json::Value;

use crate::certify::{Certificate, Property, Route, Verdict};
use crate::gallery::GalleryResult;
use crate::linops::Vector;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Maps `-0.0` to `0.0` so reports never print a signed zero.
pub(crate) fn unsigned_zero(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Resolvent,
    Loewner,
    Zarantonello,
    Moreau,
    #[value(name = "monotone_op")]
    MonotoneOp,
    Function,
    Equivalence,
}

impl Relation {
    pub fn as_str(self) -> &'static str {
        match self {
            Relation::Resolvent => "resolvent",
            Relation::Loewner => "loewner",
            Relation::Zarantonello => "zarantonello",
            Relation::Moreau => "moreau",
            Relation::MonotoneOp => "monotone_op",
            Relation::Function => "function",
            Relation::Equivalence => "equivalence",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictLabel {
    CertifiedExact,
    SampledPass,
    Falsified,
    NotApplicable,
}

impl VerdictLabel {
    pub fn of(cert: &Certificate) -> Self {
        match cert.verdict {
            Verdict::CertifiedExact { .. } => VerdictLabel::CertifiedExact,
            Verdict::SampledPass { .. } => VerdictLabel::SampledPass,
            Verdict::Falsified { .. } => VerdictLabel::Falsified,
            Verdict::NotCertifiedExact { .. } => VerdictLabel::NotApplicable,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            VerdictLabel::CertifiedExact => "certified_exact",
            VerdictLabel::SampledPass => "sampled_pass",
            VerdictLabel::Falsified => "falsified",
            VerdictLabel::NotApplicable => "not_applicable",
        }
    }

    pub fn passes(self) -> bool {
        matches!(self, VerdictLabel::CertifiedExact | VerdictLabel::SampledPass)
    }

    /// 0 on a pass, 1 otherwise.
    pub fn exit_code(self) -> i32 {
        if self.passes() {
            0
        } else {
            1
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Query {
    pub relation: Relation,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderReport {
    pub query: Query,
    pub verdict: VerdictLabel,
    pub margin: f64,
    /// Present whenever `verdict` is `falsified`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<[Vector; 2]>,
    pub seed: u64,
    pub tool_version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checks: Option<Value>,
}

impl OrderReport {
    pub fn from_certificate(query: Query, cert: &Certificate, seed: u64) -> Self {
        OrderReport {
            query,
            verdict: VerdictLabel::of(cert),
            margin: unsigned_zero(cert.margin()),
            witness: cert.witness().map(|(x, y)| [x.clone(), y.clone()]),
            seed,
            tool_version: TOOL_VERSION.to_string(),
            checks: None,
        }
    }

    pub fn with_checks(mut self, checks: Value) -> Self {
        self.checks = Some(checks);
        self
    }

    pub fn table(&self) -> String {
        let mut out = format!("{:<14} {:<16} {:<16} {:<16} {:>14}\n", "relation", "lhs", "rhs", "verdict", "margin");
        out += &format!(
            "{:<14} {:<16} {:<16} {:<16} {:>14.6e}\n",
            self.query.relation.as_str(),
            self.query.lhs,
            self.query.rhs,
            self.verdict.as_str(),
            self.margin
        );
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertifyReport {
    pub operator: String,
    pub property: Property,
    pub verdict: VerdictLabel,
    pub margin: f64,
    pub route: Route,
    /// Spectral quantity behind an exact verdict (`‖2M − I‖` for fne).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub statistic: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<[Vector; 2]>,
    pub seed: u64,
    pub tool_version: String,
}

impl CertifyReport {
    pub fn new(operator: &str, cert: &Certificate, seed: u64) -> Self {
        CertifyReport {
            operator: operator.to_string(),
            property: cert.property,
            verdict: VerdictLabel::of(cert),
            margin: unsigned_zero(cert.margin()),
            route: cert.route,
            statistic: cert.statistic,
            witness: cert.witness().map(|(x, y)| [x.clone(), y.clone()]),
            seed,
            tool_version: TOOL_VERSION.to_string(),
        }
    }

    pub fn table(&self) -> String {
        format!(
            "{:<16} {:<22} {:<16} {:>14}\n{:<16} {:<22} {:<16} {:>14.6e}\n",
            "operator",
            "property",
            "verdict",
            "margin",
            self.operator,
            format!("{:?}", self.property),
            self.verdict.as_str(),
            self.margin
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimReport {
    pub description: String,
    pub expected: bool,
    pub observed: bool,
    pub matches: bool,
    pub verdict: VerdictLabel,
    pub margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub statistic: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<[Vector; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ItemReport {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub claims: Vec<ClaimReport>,
}

impl From<&GalleryResult> for ItemReport {
    fn from(r: &GalleryResult) -> Self {
        ItemReport {
            name: r.name.clone(),
            passed: r.passed,
            note: r.note.clone(),
            claims: r
                .claims
                .iter()
                .map(|c| ClaimReport {
                    description: c.description.clone(),
                    expected: c.expected,
                    observed: c.observed.holds(),
                    matches: c.matches(),
                    verdict: VerdictLabel::of(&c.observed),
                    margin: unsigned_zero(c.observed.margin()),
                    statistic: c.observed.statistic,
                    witness: c.observed.witness().map(|(x, y)| [x.clone(), y.clone()]),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReproduceReport {
    pub passed: bool,
    pub seed: u64,
    pub tool_version: String,
    pub items: Vec<ItemReport>,
}

impl ReproduceReport {
    pub fn new(results: &[GalleryResult], seed: u64) -> Self {
        ReproduceReport {
            passed: results.iter().all(|r| r.passed),
            seed,
            tool_version: TOOL_VERSION.to_string(),
            items: results.iter().map(ItemReport::from).collect(),
        }
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        for item in &self.items {
            out += &format!("{} [{}]\n", item.name, if item.passed { "pass" } else { "FAIL" });
            for c in &item.claims {
                out += &format!(
                    "  {:<4} {:<58} expected {:<5} {:<16} margin {:.6e}\n",
                    if c.matches { "ok" } else { "FAIL" },
                    c.description,
                    c.expected,
                    c.verdict.as_str(),
                    c.margin
                );
            }
            if let Some(note) = &item.note {
                out += &format!("  note: {note}\n");
            }
        }
        out
    }
}
