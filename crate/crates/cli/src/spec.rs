//! Problem files.
//!
//! ```json
//! {
//!   "dim": 2,
//!   "conjugation": {"kind": "entrywise"},
//!   "operator": {"images": [[[1, 0], [0, 1]], [[0, 1], [0, 0]]]}
//! }
//! ```
//!
//! Complex numbers are `[re, im]` pairs (a bare number is read as real).
//! `operator.domain_basis` lists domain vectors and may be omitted for the
//! full space. `operator.images` lists the image of each domain vector;
//! alternatively `operator.matrix` gives an `n x n` matrix, row by row, that
//! is restricted to the domain.

use std::path::Path;

use csym_core::antilinear::Conjugation;
use csym_core::fixtures::{self, Problem};
use csym_core::linalg::{gram_residual, rank};
use csym_core::relations::DomainOperator;
use csym_core::{CMat, Subspace, Tolerance, C64};
use serde_json::{json, Map, Value};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum ConjugationSpec {
    Entrywise,
    Flip,
    Matrix(CMat),
}

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorSpec {
    /// Columns are images of the domain vectors.
    Images(CMat),
    Matrix(CMat),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub dim: usize,
    pub conjugation: ConjugationSpec,
    /// Columns are domain vectors; `None` is the full space.
    pub domain_basis: Option<CMat>,
    pub operator: OperatorSpec,
    pub tol: Option<f64>,
    pub label: Option<String>,
}

pub fn parse_spec(path: &Path) -> Result<ProblemSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_spec_str(&text)
}

pub fn parse_spec_str(text: &str) -> Result<ProblemSpec> {
    let v: Value = serde_json::from_str(text).map_err(|e| CliError::schema("", format!("invalid JSON: {e}")))?;
    parse_spec_value(&v)
}

fn field<'a>(obj: &'a Map<String, Value>, ptr: &str, key: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| CliError::schema(ptr, format!("missing field \"{key}\"")))
}

fn object<'a>(v: &'a Value, ptr: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| CliError::schema(ptr, "expected an object"))
}

fn array<'a>(v: &'a Value, ptr: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| CliError::schema(ptr, "expected an array"))
}

fn complex(v: &Value, ptr: &str) -> Result<C64> {
    if let Some(x) = v.as_f64() {
        return Ok(C64::new(x, 0.0));
    }
    let pair = array(v, ptr)?;
    if pair.len() != 2 {
        return Err(CliError::schema(ptr, "complex numbers are [re, im] pairs"));
    }
    let re = pair[0].as_f64().ok_or_else(|| CliError::schema(format!("{ptr}/0"), "expected a number"))?;
    let im = pair[1].as_f64().ok_or_else(|| CliError::schema(format!("{ptr}/1"), "expected a number"))?;
    if !(re.is_finite() && im.is_finite()) {
        return Err(CliError::schema(ptr, "non-finite entry"));
    }
    Ok(C64::new(re, im))
}

fn vector(v: &Value, ptr: &str, n: usize) -> Result<Vec<C64>> {
    let items = array(v, ptr)?;
    if items.len() != n {
        return Err(CliError::schema(ptr, format!("expected {n} entries, got {}", items.len())));
    }
    items
        .iter()
        .enumerate()
        .map(|(i, x)| complex(x, &format!("{ptr}/{i}")))
        .collect()
}

/// A list of length-`n` vectors, returned as the columns of a matrix.
fn columns(v: &Value, ptr: &str, n: usize) -> Result<CMat> {
    let items = array(v, ptr)?;
    let mut m = CMat::zeros(n, items.len());
    for (j, item) in items.iter().enumerate() {
        let col = vector(item, &format!("{ptr}/{j}"), n)?;
        for (i, z) in col.into_iter().enumerate() {
            m[(i, j)] = z;
        }
    }
    Ok(m)
}

/// Row-major list of rows.
pub fn parse_matrix(v: &Value, ptr: &str, rows: usize, cols: usize) -> Result<CMat> {
    let items = array(v, ptr)?;
    if items.len() != rows {
        return Err(CliError::schema(ptr, format!("expected {rows} rows, got {}", items.len())));
    }
    let mut m = CMat::zeros(rows, cols);
    for (i, row) in items.iter().enumerate() {
        let r = vector(row, &format!("{ptr}/{i}"), cols)?;
        for (j, z) in r.into_iter().enumerate() {
            m[(i, j)] = z;
        }
    }
    Ok(m)
}

/// Row-major matrix of unknown shape.
pub fn parse_any_matrix(v: &Value, ptr: &str) -> Result<CMat> {
    let items = array(v, ptr)?;
    let cols = match items.first() {
        Some(r) => array(r, &format!("{ptr}/0"))?.len(),
        None => 0,
    };
    parse_matrix(v, ptr, items.len(), cols)
}

pub fn parse_spec_value(v: &Value) -> Result<ProblemSpec> {
    let root = object(v, "")?;
    let dim_v = field(root, "", "dim")?;
    let dim = dim_v
        .as_u64()
        .filter(|&d| d >= 1)
        .ok_or_else(|| CliError::schema("/dim", "expected a positive integer"))? as usize;

    let tol = match root.get("tol") {
        None | Some(Value::Null) => None,
        Some(t) => {
            let x = t.as_f64().ok_or_else(|| CliError::schema("/tol", "expected a number"))?;
            Tolerance::new(x).map_err(|e| CliError::schema("/tol", e.to_string()))?;
            Some(x)
        }
    };
    let label = match root.get("label") {
        None | Some(Value::Null) => None,
        Some(l) => Some(
            l.as_str()
                .ok_or_else(|| CliError::schema("/label", "expected a string"))?
                .to_string(),
        ),
    };

    let conj = object(field(root, "", "conjugation")?, "/conjugation")?;
    let kind = field(conj, "/conjugation", "kind")?
        .as_str()
        .ok_or_else(|| CliError::schema("/conjugation/kind", "expected a string"))?;
    let conjugation = match kind {
        "entrywise" => ConjugationSpec::Entrywise,
        "flip" => ConjugationSpec::Flip,
        "matrix" => {
            let m = parse_matrix(
                field(conj, "/conjugation", "matrix")?,
                "/conjugation/matrix",
                dim,
                dim,
            )?;
            Conjugation::new(m.clone(), Tolerance::new(tol.unwrap_or(1e-10)).expect("validated"))
                .map_err(|e| CliError::schema("/conjugation/matrix", e.to_string()))?;
            ConjugationSpec::Matrix(m)
        }
        other => {
            return Err(CliError::schema(
                "/conjugation/kind",
                format!("unknown kind \"{other}\" (expected entrywise, flip or matrix)"),
            ))
        }
    };

    let op = object(field(root, "", "operator")?, "/operator")?;
    let domain_basis = match op.get("domain_basis") {
        None | Some(Value::Null) => None,
        Some(b) => {
            let m = columns(b, "/operator/domain_basis", dim)?;
            if m.ncols() > dim {
                return Err(CliError::schema("/operator/domain_basis", "more vectors than the dimension"));
            }
            if m.ncols() > 0 && rank(&m, Tolerance::default()) < m.ncols() {
                return Err(CliError::schema("/operator/domain_basis", "vectors are linearly dependent"));
            }
            Some(m)
        }
    };
    let k = domain_basis.as_ref().map_or(dim, |b| b.ncols());
    let operator = match (op.get("images"), op.get("matrix")) {
        (Some(_), Some(_)) => {
            return Err(CliError::schema("/operator", "give either \"images\" or \"matrix\", not both"))
        }
        (Some(im), None) => {
            let m = columns(im, "/operator/images", dim)?;
            if m.ncols() != k {
                return Err(CliError::schema(
                    "/operator/images",
                    format!("expected {k} image vectors (one per domain vector), got {}", m.ncols()),
                ));
            }
            OperatorSpec::Images(m)
        }
        (None, Some(mv)) => OperatorSpec::Matrix(parse_matrix(mv, "/operator/matrix", dim, dim)?),
        (None, None) => return Err(CliError::schema("/operator", "missing field \"images\" or \"matrix\"")),
    };
    Ok(ProblemSpec {
        dim,
        conjugation,
        domain_basis,
        operator,
        tol,
        label,
    })
}

/// Pretty JSON with numeric arrays and `[re, im]` rows kept on one line.
pub fn pretty_json(v: &Value) -> String {
    let mut out = String::new();
    write_pretty(v, 0, &mut out);
    out
}

fn is_flat(v: &Value) -> bool {
    match v {
        Value::Array(items) => items.iter().all(|x| match x {
            Value::Array(inner) => inner.iter().all(|y| !y.is_array() && !y.is_object()),
            Value::Object(_) => false,
            _ => true,
        }),
        _ => false,
    }
}

fn write_pretty(v: &Value, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth + 1);
    match v {
        Value::Array(items) if !items.is_empty() && !is_flat(v) => {
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                out.push_str(&pad);
                write_pretty(x, depth + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&"  ".repeat(depth));
            out.push(']');
        }
        Value::Object(m) if !m.is_empty() && m.values().any(|x| x.is_array() || x.is_object()) => {
            out.push_str("{\n");
            for (i, (k, x)) in m.iter().enumerate() {
                out.push_str(&pad);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_pretty(x, depth + 1, out);
                out.push_str(if i + 1 < m.len() { ",\n" } else { "\n" });
            }
            out.push_str(&"  ".repeat(depth));
            out.push('}');
        }
        Value::Object(m) => {
            let fields: Vec<String> = m
                .iter()
                .map(|(k, x)| format!("{}: {}", Value::String(k.clone()), x))
                .collect();
            out.push('{');
            out.push_str(&fields.join(", "));
            out.push('}');
        }
        other => out.push_str(&other.to_string()),
    }
}

pub fn complex_json(z: C64) -> Value {
    json!([z.re, z.im])
}

/// Row-major JSON matrix.
pub fn matrix_json(m: &CMat) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| complex_json(m[(i, j)])).collect()))
            .collect(),
    )
}

fn columns_json(m: &CMat) -> Value {
    Value::Array(
        (0..m.ncols())
            .map(|j| Value::Array((0..m.nrows()).map(|i| complex_json(m[(i, j)])).collect()))
            .collect(),
    )
}

impl ProblemSpec {
    pub fn tolerance(&self, flag: Option<f64>) -> Result<Tolerance> {
        let eps = flag.or(self.tol).unwrap_or(Tolerance::default().eps);
        Tolerance::new(eps).map_err(|e| CliError::schema("/tol", e.to_string()))
    }

    pub fn to_json(&self) -> Value {
        let conjugation = match &self.conjugation {
            ConjugationSpec::Entrywise => json!({"kind": "entrywise"}),
            ConjugationSpec::Flip => json!({"kind": "flip"}),
            ConjugationSpec::Matrix(m) => json!({"kind": "matrix", "matrix": matrix_json(m)}),
        };
        let mut op = Map::new();
        if let Some(b) = &self.domain_basis {
            op.insert("domain_basis".into(), columns_json(b));
        }
        match &self.operator {
            OperatorSpec::Images(m) => op.insert("images".into(), columns_json(m)),
            OperatorSpec::Matrix(m) => op.insert("matrix".into(), matrix_json(m)),
        };
        let mut root = Map::new();
        root.insert("dim".into(), json!(self.dim));
        if let Some(l) = &self.label {
            root.insert("label".into(), json!(l));
        }
        root.insert("conjugation".into(), conjugation);
        root.insert("operator".into(), Value::Object(op));
        if let Some(t) = self.tol {
            root.insert("tol".into(), json!(t));
        }
        Value::Object(root)
    }

    /// The problem with an orthonormal domain basis; the warnings record any
    /// re-orthonormalization.
    pub fn build(&self, tol: Tolerance) -> Result<(Problem, Vec<String>)> {
        let n = self.dim;
        let mut warnings = Vec::new();
        let conjugation = match &self.conjugation {
            ConjugationSpec::Entrywise => Conjugation::entrywise(n),
            ConjugationSpec::Flip => Conjugation::flip(n),
            ConjugationSpec::Matrix(m) => Conjugation::new(m.clone(), tol)
                .map_err(|e| CliError::schema("/conjugation/matrix", e.to_string()))?,
        };
        let basis = self.domain_basis.clone().unwrap_or_else(|| CMat::identity(n, n));
        let images = match &self.operator {
            OperatorSpec::Images(m) => m.clone(),
            OperatorSpec::Matrix(m) => m * &basis,
        };
        let g = gram_residual(&basis);
        if g > tol.eps {
            warnings.push(format!("domain_basis orthonormalized (Gram residual {g:.3e})"));
        }
        let domain = Subspace::span_columns(&basis, tol);
        // Images of the orthonormal basis Q = B X.
        let x = (basis.adjoint() * &basis)
            .try_inverse()
            .ok_or_else(|| CliError::schema("/operator/domain_basis", "vectors are linearly dependent"))?
            * basis.adjoint()
            * domain.basis();
        let op = DomainOperator::new(domain, images * x)?;
        let name = self.label.clone().unwrap_or_else(|| "problem".into());
        Ok((Problem::new(name, op, conjugation)?, warnings))
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ExampleParams {
    pub n: Option<usize>,
    pub h: Option<f64>,
    pub seed: Option<u64>,
}

pub const EXAMPLE_NAMES: [&str; 4] = ["race_schrodinger", "fd_derivative_minimal", "random_csym", "zero_on_subspace"];

pub fn build_example(name: &str, params: ExampleParams) -> Result<ProblemSpec> {
    let tol = Tolerance::default();
    let n = params.n.unwrap_or(match name {
        "race_schrodinger" => 16,
        "fd_derivative_minimal" => 8,
        "random_csym" => 6,
        _ => 4,
    });
    if n < 4 {
        return Err(CliError::schema("/n", format!("grid size must be at least 4, got {n}")));
    }
    let h = params.h.unwrap_or(0.25);
    let seed = params.seed.unwrap_or(7);
    let (problem, kind, label) = match name {
        "race_schrodinger" => (
            fixtures::race_schrodinger(n, h, tol)?,
            ConjugationSpec::Entrywise,
            format!("discretized model of d^2/dx^2 - 2i exp(2(1+i)x), n = {n}, h = {h}"),
        ),
        "fd_derivative_minimal" => (
            fixtures::fd_derivative_minimal(n, h, tol)?,
            ConjugationSpec::Flip,
            format!("minimal central-difference i d/dx, n = {n}, h = {h}"),
        ),
        "random_csym" => {
            let p = fixtures::random_csym(n, seed, tol)?;
            let k = ConjugationSpec::Matrix(p.conjugation.matrix().clone());
            (p, k, format!("random C-self-adjoint matrix, n = {n}, seed = {seed}"))
        }
        "zero_on_subspace" => (
            fixtures::zero_on_subspace(n, tol)?,
            ConjugationSpec::Entrywise,
            format!("zero operator on span(e_2..e_{}), n = {n}", n - 1),
        ),
        other => {
            return Err(CliError::schema(
                "/name",
                format!("unknown example \"{other}\" (expected one of {})", EXAMPLE_NAMES.join(", ")),
            ))
        }
    };
    let full = problem.operator.domain().dim() == n;
    Ok(ProblemSpec {
        dim: n,
        conjugation: kind,
        domain_basis: if full { None } else { Some(snap(problem.operator.domain().basis())) },
        operator: if full {
            OperatorSpec::Matrix(problem.relation.to_matrix()?)
        } else {
            OperatorSpec::Images(snap(problem.operator.images()))
        },
        tol: None,
        label: Some(label),
    })
}

/// Rounds parts within `1e-14` of an integer.
fn snap(m: &CMat) -> CMat {
    let r = |x: f64| if (x - x.round()).abs() <= 1e-14 { x.round() + 0.0 } else { x };
    m.map(|z| C64::new(r(z.re), r(z.im)))
}
