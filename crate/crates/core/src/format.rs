//! Text format for states, observables, operations and reports.
//!
//! Documents are JSON objects. States and operators look like
//!
//! ```json
//! {"dims": [2, 2], "kind": "pure", "data": [[0.7071, 0], [0, 0], [0, 0], [0.7071, 0]]}
//! ```
//!
//! with `kind` one of `pure`, `density`, `observable`. Pure data is a list of
//! `[re, im]` pairs in composite order `i·d2 + j`; matrix data is a list of
//! rows of such pairs. Operations are `{"class": "LI", "pairs": [{"A": m, "B": m}]}`
//! with matrices encoded as plain rows of pairs.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::hilbert::{BipartiteDims, BipartitePureState, DensityOperator, Observable};
use crate::linalg::{c, CMat, CVec};
use crate::locc::{LocalOperatorPair, OpClass, SeparableOperation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Pure,
    Density,
    Observable,
}

#[derive(Debug, Deserialize)]
struct RawDocument {
    dims: [usize; 2],
    kind: Kind,
    data: Value,
}

#[derive(Debug, Clone)]
pub enum Document {
    Pure(BipartitePureState),
    Density(DensityOperator),
    Observable(Observable),
}

fn pair(v: &Value, at: &str) -> Result<num_complex::Complex64> {
    let arr = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| Error::Parse(format!("{at}: expected [re, im] pair")))?;
    let re = arr[0].as_f64().ok_or_else(|| Error::Parse(format!("{at}: real part is not a number")))?;
    let im = arr[1].as_f64().ok_or_else(|| Error::Parse(format!("{at}: imaginary part is not a number")))?;
    Ok(c(re, im))
}

pub fn parse_vector(v: &Value, len: usize) -> Result<CVec> {
    let arr = v.as_array().ok_or_else(|| Error::Parse("data: expected a list of pairs".into()))?;
    if arr.len() != len {
        return Err(Error::dims(len, arr.len()));
    }
    let entries = arr
        .iter()
        .enumerate()
        .map(|(k, x)| pair(x, &format!("data[{k}]")))
        .collect::<Result<Vec<_>>>()?;
    Ok(CVec::from_vec(entries))
}

pub fn parse_matrix(v: &Value, n: usize) -> Result<CMat> {
    let rows = v.as_array().ok_or_else(|| Error::Parse("expected a list of rows".into()))?;
    if rows.len() != n {
        return Err(Error::dims(format!("{n} rows"), format!("{} rows", rows.len())));
    }
    let mut m = CMat::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        let row = row.as_array().ok_or_else(|| Error::Parse(format!("row {i}: expected a list")))?;
        if row.len() != n {
            return Err(Error::dims(format!("{n} columns"), format!("{} in row {i}", row.len())));
        }
        for (j, x) in row.iter().enumerate() {
            m[(i, j)] = pair(x, &format!("[{i}][{j}]"))?;
        }
    }
    Ok(m)
}

pub fn parse_document(text: &str) -> Result<Document> {
    let raw: RawDocument = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let dims = BipartiteDims::new(raw.dims[0], raw.dims[1])?;
    match raw.kind {
        Kind::Pure => Ok(Document::Pure(BipartitePureState::new(dims, parse_vector(&raw.data, dims.total())?)?)),
        Kind::Density => Ok(Document::Density(DensityOperator::new(dims, parse_matrix(&raw.data, dims.total())?)?)),
        Kind::Observable => Ok(Document::Observable(Observable::new(dims, parse_matrix(&raw.data, dims.total())?)?)),
    }
}

/// A pure state, or a density operator of rank one.
pub fn parse_pure(text: &str) -> Result<BipartitePureState> {
    match parse_document(text)? {
        Document::Pure(p) => Ok(p),
        Document::Density(d) => d
            .as_pure()
            .ok_or_else(|| Error::invalid("rank-one density for a pure-state input", d.purity())),
        Document::Observable(_) => Err(Error::Parse("expected kind \"pure\", found \"observable\"".into())),
    }
}

/// A density operator; pure states are promoted to projectors.
pub fn parse_density(text: &str) -> Result<DensityOperator> {
    match parse_document(text)? {
        Document::Pure(p) => Ok(p.density()),
        Document::Density(d) => Ok(d),
        Document::Observable(_) => Err(Error::Parse("expected kind \"density\" or \"pure\", found \"observable\"".into())),
    }
}

/// An observable; states are read as their projector or density matrix.
pub fn parse_observable(text: &str) -> Result<Observable> {
    match parse_document(text)? {
        Document::Pure(p) => Ok(Observable::projector(&p)),
        Document::Density(d) => Ok(Observable::from_density(&d)),
        Document::Observable(o) => Ok(o),
    }
}

pub fn parse_operation(text: &str, dims: BipartiteDims) -> Result<SeparableOperation> {
    #[derive(Deserialize)]
    struct RawPair {
        #[serde(rename = "A")]
        a: Value,
        #[serde(rename = "B")]
        b: Value,
    }
    #[derive(Deserialize)]
    struct RawOp {
        class: OpClass,
        pairs: Vec<RawPair>,
    }
    let raw: RawOp = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let pairs = raw
        .pairs
        .iter()
        .map(|p| Ok(LocalOperatorPair::new(parse_matrix(&p.a, dims.d1)?, parse_matrix(&p.b, dims.d2)?)))
        .collect::<Result<Vec<_>>>()?;
    SeparableOperation::new(dims, pairs, raw.class)
}

fn num(x: f64) -> Value {
    // -0.0 and 0.0 print the same
    json!(if x == 0.0 { 0.0 } else { x })
}

pub fn vector_value(v: &CVec) -> Value {
    Value::Array(v.iter().map(|z| json!([num(z.re), num(z.im)])).collect())
}

pub fn matrix_value(m: &CMat) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| json!([num(m[(i, j)].re), num(m[(i, j)].im)])).collect()))
            .collect(),
    )
}

fn dims_value(d: BipartiteDims) -> Value {
    json!([d.d1, d.d2])
}

pub fn pure_value(s: &BipartitePureState) -> Value {
    json!({"dims": dims_value(s.dims()), "kind": Kind::Pure, "data": vector_value(s.amplitudes())})
}

pub fn density_value(d: &DensityOperator) -> Value {
    json!({"dims": dims_value(d.dims()), "kind": Kind::Density, "data": matrix_value(d.matrix())})
}

pub fn observable_value(o: &Observable) -> Value {
    json!({"dims": dims_value(o.dims()), "kind": Kind::Observable, "data": matrix_value(o.matrix())})
}

pub fn operation_value(op: &SeparableOperation) -> Value {
    json!({
        "class": op.class(),
        "pairs": op.pairs().iter().map(|p| json!({"A": matrix_value(&p.a), "B": matrix_value(&p.b)})).collect::<Vec<_>>(),
    })
}

/// Pretty JSON with a trailing newline.
pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values are serializable");
    s.push('\n');
    s
}
