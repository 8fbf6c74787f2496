//! JSON documents naming operators and convex atoms.
//!
//! ```json
//! {
//!   "dim": 2,
//!   "functions": { "ball": { "kind": "indicator_ball", "center": [0, 0], "radius": 1 } },
//!   "operators": {
//!     "P": { "kind": "prox", "atom": "ball" },
//!     "T": { "kind": "difference", "left": { "kind": "identity" }, "right": { "kind": "ref", "name": "P" } }
//!   }
//! }
//! ```
//!
//! Atoms may be given inline or as the name of an entry in `functions`;
//! `{"kind": "ref"}` expressions name entries in `operators`. Every parse error
//! carries the document path of the offending value.

use std::collections::BTreeMap;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::linops::{Matrix, Node, OperatorExpr, Vector};
use crate::prox_catalog::{AtomKind, Cone, ConvexAtom, Subspace};

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpecFile {
    pub dim: usize,
    pub operators: BTreeMap<String, OperatorExpr>,
    pub functions: BTreeMap<String, ConvexAtom>,
}

fn parse_err(path: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_string(),
        message: message.into(),
    }
}

/// Attaches `path` to errors raised by validated constructors.
fn at<T>(path: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        e @ Error::Parse { .. } => e,
        other => parse_err(path, other.to_string()),
    })
}

fn object<'v>(v: &'v Value, path: &str) -> Result<&'v Map<String, Value>> {
    v.as_object().ok_or_else(|| parse_err(path, "expected an object"))
}

fn field<'v>(obj: &'v Map<String, Value>, key: &str, path: &str) -> Result<(&'v Value, String)> {
    let p = format!("{path}.{key}");
    obj.get(key)
        .map(|v| (v, p.clone()))
        .ok_or_else(|| parse_err(&p, "missing field"))
}

fn number(v: &Value, path: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| parse_err(path, "expected a number"))
}

fn string<'v>(v: &'v Value, path: &str) -> Result<&'v str> {
    v.as_str().ok_or_else(|| parse_err(path, "expected a string"))
}

fn array<'v>(v: &'v Value, path: &str) -> Result<&'v Vec<Value>> {
    v.as_array().ok_or_else(|| parse_err(path, "expected an array"))
}

fn numbers(v: &Value, path: &str) -> Result<Vec<f64>> {
    array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, x)| number(x, &format!("{path}[{i}]")))
        .collect()
}

fn float_field(obj: &Map<String, Value>, key: &str, path: &str) -> Result<f64> {
    let (v, p) = field(obj, key, path)?;
    number(v, &p)
}

fn vector_of_dim(v: &Value, dim: usize, path: &str) -> Result<Vector> {
    let xs = numbers(v, path)?;
    if xs.len() != dim {
        return Err(parse_err(path, format!("expected {dim} entries, found {}", xs.len())));
    }
    at(path, Vector::new(xs))
}

fn matrix_of_dim(v: &Value, dim: usize, path: &str) -> Result<Matrix> {
    let rows = array(v, path)?;
    if rows.len() != dim {
        return Err(parse_err(path, format!("expected {dim} rows, found {}", rows.len())));
    }
    let rows = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let p = format!("{path}[{i}]");
            let xs = numbers(r, &p)?;
            if xs.len() != dim {
                return Err(parse_err(&p, format!("expected {dim} entries, found {}", xs.len())));
            }
            Ok(xs)
        })
        .collect::<Result<Vec<_>>>()?;
    at(path, Matrix::from_rows(&rows))
}

struct Parser<'a> {
    dim: usize,
    raw_operators: &'a Map<String, Value>,
    raw_functions: &'a Map<String, Value>,
    operators: BTreeMap<String, OperatorExpr>,
    functions: BTreeMap<String, ConvexAtom>,
    /// Names under resolution, for cycle detection.
    stack: Vec<String>,
}

impl Parser<'_> {
    fn enter(&mut self, key: String, path: &str) -> Result<()> {
        if self.stack.contains(&key) {
            return Err(parse_err(path, format!("cyclic reference through `{key}`")));
        }
        self.stack.push(key);
        Ok(())
    }

    fn function(&mut self, name: &str, path: &str) -> Result<ConvexAtom> {
        if let Some(f) = self.functions.get(name) {
            return Ok(f.clone());
        }
        let raw = self
            .raw_functions
            .get(name)
            .ok_or_else(|| parse_err(path, format!("unknown function `{name}`")))?;
        self.enter(format!("functions.{name}"), path)?;
        let atom = self.atom(raw, &format!("$.functions.{name}"))?;
        self.stack.pop();
        self.functions.insert(name.to_string(), atom.clone());
        Ok(atom)
    }

    fn operator(&mut self, name: &str, path: &str) -> Result<OperatorExpr> {
        if let Some(op) = self.operators.get(name) {
            return Ok(op.clone());
        }
        let raw = self
            .raw_operators
            .get(name)
            .ok_or_else(|| parse_err(path, format!("unknown operator `{name}`")))?;
        self.enter(format!("operators.{name}"), path)?;
        let op = self.expr(raw, &format!("$.operators.{name}"))?;
        self.stack.pop();
        self.operators.insert(name.to_string(), op.clone());
        Ok(op)
    }

    fn atom(&mut self, v: &Value, path: &str) -> Result<ConvexAtom> {
        if let Some(name) = v.as_str() {
            return self.function(name, path);
        }
        let obj = object(v, path)?;
        let (kind, kind_path) = field(obj, "kind", path)?;
        let kind = string(kind, &kind_path)?;
        let n = self.dim;
        let cone = |c: Result<Cone>| at(path, c).map(ConvexAtom::indicator_cone);
        match kind {
            "zero_function" => at(path, ConvexAtom::zero_function(n)),
            "indicator_point" => {
                let (p, pp) = field(obj, "p", path)?;
                Ok(ConvexAtom::indicator_point(vector_of_dim(p, n, &pp)?))
            }
            "indicator_ball" => {
                let (c, cp) = field(obj, "center", path)?;
                let center = vector_of_dim(c, n, &cp)?;
                at(path, ConvexAtom::indicator_ball(center, float_field(obj, "radius", path)?))
            }
            "indicator_zero_cone" => cone(Cone::zero(n)),
            "indicator_full_cone" => cone(Cone::full(n)),
            "indicator_subspace" => {
                let (b, bp) = field(obj, "basis", path)?;
                let basis = array(b, &bp)?
                    .iter()
                    .enumerate()
                    .map(|(i, x)| vector_of_dim(x, n, &format!("{bp}[{i}]")))
                    .collect::<Result<Vec<_>>>()?;
                let subspace = Subspace::new(n, basis.clone()).or_else(|_| Subspace::span(n, &basis));
                cone(subspace.map(Cone::subspace))
            }
            "indicator_orthant" => cone(Cone::nonneg_orthant(n)),
            "indicator_nonpos_orthant" => cone(Cone::nonpos_orthant(n)),
            "indicator_soc" => cone(Cone::second_order(n)),
            "indicator_neg_soc" => cone(Cone::neg_second_order(n)),
            "indicator_ray" => {
                let (d, dp) = field(obj, "direction", path)?;
                cone(Cone::ray(&vector_of_dim(d, n, &dp)?))
            }
            "indicator_halfspace" => {
                let (d, dp) = field(obj, "normal", path)?;
                cone(Cone::halfspace(&vector_of_dim(d, n, &dp)?))
            }
            "quadratic" => {
                let (m, mp) = field(obj, "matrix", path)?;
                at(path, ConvexAtom::quadratic(matrix_of_dim(m, n, &mp)?))
            }
            "l1_norm" => at(path, ConvexAtom::l1_norm(n, float_field(obj, "lambda", path)?)),
            "l2_norm" => at(path, ConvexAtom::l2_norm(n, float_field(obj, "lambda", path)?)),
            "linear_func" => {
                let (a, ap) = field(obj, "a", path)?;
                Ok(ConvexAtom::linear_func(vector_of_dim(a, n, &ap)?))
            }
            "shifted" => {
                let (b, bp) = field(obj, "base", path)?;
                let base = self.atom(b, &bp)?;
                let (c, cp) = field(obj, "c", path)?;
                let c = vector_of_dim(c, n, &cp)?;
                at(path, ConvexAtom::shifted(base, c, float_field(obj, "gamma", path)?))
            }
            other => Err(parse_err(&kind_path, format!("unknown atom kind `{other}`"))),
        }
    }

    fn child(&mut self, obj: &Map<String, Value>, key: &str, path: &str) -> Result<OperatorExpr> {
        let (v, p) = field(obj, key, path)?;
        self.expr(v, &p)
    }

    fn expr(&mut self, v: &Value, path: &str) -> Result<OperatorExpr> {
        let obj = object(v, path)?;
        let (kind, kind_path) = field(obj, "kind", path)?;
        let kind = string(kind, &kind_path)?;
        let n = self.dim;
        let op = match kind {
            "identity" => at(path, OperatorExpr::identity(n))?,
            "zero" => at(path, OperatorExpr::zero(n))?,
            "constant" => {
                let (c, cp) = field(obj, "c", path)?;
                OperatorExpr::constant(vector_of_dim(c, n, &cp)?)
            }
            "linear" => {
                let (m, mp) = field(obj, "matrix", path)?;
                at(path, OperatorExpr::linear(matrix_of_dim(m, n, &mp)?))?
            }
            "rotation" => at(path, OperatorExpr::rotation(float_field(obj, "theta", path)?))?,
            "prox" => {
                let (a, ap) = field(obj, "atom", path)?;
                OperatorExpr::prox(self.atom(a, &ap)?)
            }
            "resolvent" => {
                let (m, mp) = field(obj, "matrix", path)?;
                at(path, OperatorExpr::resolvent_of(matrix_of_dim(m, n, &mp)?))?
            }
            "scale" => {
                let alpha = float_field(obj, "alpha", path)?;
                let child = self.child(obj, "child", path)?;
                at(path, OperatorExpr::scale(alpha, child))?
            }
            "sum" => {
                let (cs, csp) = field(obj, "children", path)?;
                let children = array(cs, &csp)?
                    .iter()
                    .enumerate()
                    .map(|(i, c)| self.expr(c, &format!("{csp}[{i}]")))
                    .collect::<Result<Vec<_>>>()?;
                at(path, OperatorExpr::sum(children))?
            }
            "difference" => {
                let left = self.child(obj, "left", path)?;
                let right = self.child(obj, "right", path)?;
                at(path, OperatorExpr::difference(left, right))?
            }
            "compose" => {
                let outer = self.child(obj, "outer", path)?;
                let inner = self.child(obj, "inner", path)?;
                at(path, OperatorExpr::compose(outer, inner))?
            }
            "ref" => {
                let (name, np) = field(obj, "name", path)?;
                self.operator(string(name, &np)?, &np)?
            }
            other => return Err(parse_err(&kind_path, format!("unknown expression kind `{other}`"))),
        };
        if op.dim() != n {
            return Err(parse_err(path, format!("operator has dim {}, document dim is {n}", op.dim())));
        }
        Ok(op)
    }
}

impl OperatorSpecFile {
    pub fn new(dim: usize) -> Self {
        OperatorSpecFile {
            dim,
            operators: BTreeMap::new(),
            functions: BTreeMap::new(),
        }
    }

    pub fn with_operator(mut self, name: impl Into<String>, op: OperatorExpr) -> Self {
        self.operators.insert(name.into(), op);
        self
    }

    pub fn with_function(mut self, name: impl Into<String>, f: ConvexAtom) -> Self {
        self.functions.insert(name.into(), f);
        self
    }

    pub fn from_value(doc: &Value) -> Result<Self> {
        let root = object(doc, "$")?;
        let (d, dp) = field(root, "dim", "$")?;
        let dim = d
            .as_u64()
            .filter(|&d| d >= 1)
            .ok_or_else(|| parse_err(&dp, "expected a positive integer"))? as usize;
        let empty = Map::new();
        let section = |key: &str| -> Result<&Map<String, Value>> {
            match root.get(key) {
                Some(v) => object(v, &format!("$.{key}")),
                None => Ok(&empty),
            }
        };
        let mut parser = Parser {
            dim,
            raw_operators: section("operators")?,
            raw_functions: section("functions")?,
            operators: BTreeMap::new(),
            functions: BTreeMap::new(),
            stack: Vec::new(),
        };
        for name in parser.raw_functions.keys() {
            parser.function(name, &format!("$.functions.{name}"))?;
        }
        for name in parser.raw_operators.keys() {
            parser.operator(name, &format!("$.operators.{name}"))?;
        }
        Ok(OperatorSpecFile {
            dim,
            operators: parser.operators,
            functions: parser.functions,
        })
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let doc: Value = serde_json::from_str(text).map_err(|e| parse_err("$", e.to_string()))?;
        Self::from_value(&doc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text).map_err(|e| match e {
            Error::Parse { path: p, message } => Error::Parse {
                path: p,
                message: format!("{message} (in {})", path.display()),
            },
            other => other,
        })
    }

    pub fn operator(&self, name: &str) -> Result<&OperatorExpr> {
        self.operators
            .get(name)
            .ok_or_else(|| Error::UnknownName(name.to_string()))
    }

    pub fn function(&self, name: &str) -> Result<&ConvexAtom> {
        self.functions
            .get(name)
            .ok_or_else(|| Error::UnknownName(name.to_string()))
    }

    /// Inline form: every operator and function is written out in full.
    pub fn to_value(&self) -> Value {
        let operators: Map<String, Value> = self.operators.iter().map(|(k, v)| (k.clone(), expr_to_json(v))).collect();
        let functions: Map<String, Value> = self.functions.iter().map(|(k, v)| (k.clone(), atom_to_json(v))).collect();
        json!({ "dim": self.dim, "operators": operators, "functions": functions })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_value()).expect("finite values serialize")
    }
}

fn vec_json(v: &Vector) -> Value {
    json!(v.as_slice())
}

fn matrix_json(m: &Matrix) -> Value {
    json!(m.to_rows())
}

pub fn expr_to_json(op: &OperatorExpr) -> Value {
    match op.node() {
        Node::Identity => json!({ "kind": "identity" }),
        Node::Zero => json!({ "kind": "zero" }),
        Node::Constant(c) => json!({ "kind": "constant", "c": vec_json(c) }),
        Node::Linear(m) => json!({ "kind": "linear", "matrix": matrix_json(m) }),
        Node::Rotation(theta) => json!({ "kind": "rotation", "theta": theta }),
        Node::ProxOf(atom) => json!({ "kind": "prox", "atom": atom_to_json(atom) }),
        Node::ResolventOf { a, .. } => json!({ "kind": "resolvent", "matrix": matrix_json(a) }),
        Node::Scale(alpha, child) => json!({ "kind": "scale", "alpha": alpha, "child": expr_to_json(child) }),
        Node::Sum(children) => json!({
            "kind": "sum",
            "children": children.iter().map(expr_to_json).collect::<Vec<_>>()
        }),
        Node::Difference(l, r) => json!({ "kind": "difference", "left": expr_to_json(l), "right": expr_to_json(r) }),
        Node::Compose(o, i) => json!({ "kind": "compose", "outer": expr_to_json(o), "inner": expr_to_json(i) }),
    }
}

fn cone_to_json(cone: &Cone) -> Value {
    match cone {
        Cone::Zero { .. } => json!({ "kind": "indicator_zero_cone" }),
        Cone::Full { .. } => json!({ "kind": "indicator_full_cone" }),
        Cone::Subspace(s) => json!({
            "kind": "indicator_subspace",
            "basis": s.basis().iter().map(vec_json).collect::<Vec<_>>()
        }),
        Cone::NonnegOrthant { .. } => json!({ "kind": "indicator_orthant" }),
        Cone::NonposOrthant { .. } => json!({ "kind": "indicator_nonpos_orthant" }),
        Cone::SecondOrder { .. } => json!({ "kind": "indicator_soc" }),
        Cone::NegSecondOrder { .. } => json!({ "kind": "indicator_neg_soc" }),
        Cone::Ray(d) => json!({ "kind": "indicator_ray", "direction": vec_json(d) }),
        Cone::Halfspace(d) => json!({ "kind": "indicator_halfspace", "normal": vec_json(d) }),
    }
}

pub fn atom_to_json(atom: &ConvexAtom) -> Value {
    match atom.kind() {
        AtomKind::ZeroFunction { .. } => json!({ "kind": "zero_function" }),
        AtomKind::IndicatorPoint(p) => json!({ "kind": "indicator_point", "p": vec_json(p) }),
        AtomKind::IndicatorBall { center, radius } => {
            json!({ "kind": "indicator_ball", "center": vec_json(center), "radius": radius })
        }
        AtomKind::Indicator(cone) => cone_to_json(cone),
        AtomKind::Quadratic(q) => json!({ "kind": "quadratic", "matrix": matrix_json(q.matrix()) }),
        AtomKind::L1Norm { lambda, .. } => json!({ "kind": "l1_norm", "lambda": lambda }),
        AtomKind::L2Norm { lambda, .. } => json!({ "kind": "l2_norm", "lambda": lambda }),
        AtomKind::LinearFunc(a) => json!({ "kind": "linear_func", "a": vec_json(a) }),
        AtomKind::Shifted { base, c, gamma } => json!({
            "kind": "shifted",
            "base": atom_to_json(base),
            "c": vec_json(c),
            "gamma": gamma
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = r#"{
        "dim": 2,
        "functions": {
            "ball": { "kind": "indicator_ball", "center": [0, 0], "radius": 1 },
            "tilted": { "kind": "shifted", "base": "ball", "c": [1, 0], "gamma": 0.5 }
        },
        "operators": {
            "P": { "kind": "prox", "atom": "ball" },
            "T": { "kind": "difference", "left": { "kind": "identity" }, "right": { "kind": "ref", "name": "P" } },
            "R": { "kind": "scale", "alpha": 0.5, "child": { "kind": "rotation", "theta": 0.3 } },
            "J": { "kind": "resolvent", "matrix": [[1, 0], [0, 3]] }
        }
    }"#;

    #[test]
    fn parses_references() {
        let spec = OperatorSpecFile::from_json_str(DOC).unwrap();
        assert_eq!(spec.operators.len(), 4);
        let x = Vector::from_slice(&[3.0, 4.0]).unwrap();
        let t = spec.operator("T").unwrap().eval(&x).unwrap();
        assert!(t.max_abs_diff(&Vector::from_slice(&[2.4, 3.2]).unwrap()) < 1e-12);
        assert!(spec.function("tilted").is_ok());
        assert!(matches!(spec.operator("nope"), Err(Error::UnknownName(_))));
    }

    #[test]
    fn round_trip_is_identity() {
        let spec = OperatorSpecFile::from_json_str(DOC).unwrap();
        let again = OperatorSpecFile::from_json_str(&spec.to_json_string()).unwrap();
        assert_eq!(spec, again);
    }

    #[test]
    fn unknown_kind_is_located() {
        let doc = r#"{"dim": 2, "operators": {"A": {"kind": "sum", "children": [{"kind": "identity"}, {"kind": "bogus"}]}}}"#;
        let Err(Error::Parse { path, message }) = OperatorSpecFile::from_json_str(doc) else { panic!() };
        assert_eq!(path, "$.operators.A.children[1].kind");
        assert!(message.contains("bogus"));
    }

    #[test]
    fn nonconforming_shapes_are_located() {
        let doc = r#"{"dim": 2, "operators": {"L": {"kind": "linear", "matrix": [[1, 0, 0], [0, 1, 0]]}}}"#;
        let Err(Error::Parse { path, .. }) = OperatorSpecFile::from_json_str(doc) else { panic!() };
        assert_eq!(path, "$.operators.L.matrix[0]");
        let doc = r#"{"dim": 3, "operators": {"R": {"kind": "rotation", "theta": 1}}}"#;
        assert!(matches!(OperatorSpecFile::from_json_str(doc), Err(Error::Parse { .. })));
        let doc = r#"{"dim": 2, "functions": {"q": {"kind": "quadratic", "matrix": [[1, 2], [0, 1]]}}}"#;
        let Err(Error::Parse { path, .. }) = OperatorSpecFile::from_json_str(doc) else { panic!() };
        assert_eq!(path, "$.functions.q");
    }

    #[test]
    fn cycles_are_rejected() {
        let doc = r#"{"dim": 1, "operators": {"a": {"kind": "ref", "name": "b"}, "b": {"kind": "ref", "name": "a"}}}"#;
        let Err(Error::Parse { message, .. }) = OperatorSpecFile::from_json_str(doc) else { panic!() };
        assert!(message.contains("cyclic"));
    }

    #[test]
    fn missing_dim() {
        let Err(Error::Parse { path, .. }) = OperatorSpecFile::from_json_str("{}") else { panic!() };
        assert_eq!(path, "$.dim");
    }
}
