//! JSON formats for states, decompositions and dimension certificates.
//!
//! Scalars are written as `[re_num, re_den, im_num, im_den]` decimal
//! strings in the exact kind and as `[re, im]` numbers in the float kind.
//! Objects are emitted with sorted keys, so output is byte-stable.

use num_complex::Complex64;
use serde_json::{json, Map, Value};

use crate::decomp::{Decomposition, Term};
use crate::dim::{DimCertificate, ProductPoint};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{GaussRat, Kind, Scalar};
use crate::tensor::{HermitianOp, ProductVector, SystemShape};

/// JSON encoding of one scalar.
pub trait JsonScalar: Scalar {
    fn to_json(&self) -> Value;
    fn from_json(v: &Value, loc: &str) -> Result<Self>;
}

impl JsonScalar for GaussRat {
    fn to_json(&self) -> Value {
        json!(self.to_parts())
    }

    fn from_json(v: &Value, loc: &str) -> Result<Self> {
        let arr = v
            .as_array()
            .filter(|a| a.len() == 4)
            .ok_or_else(|| Error::parse(loc, "expected four decimal strings"))?;
        let mut parts: [String; 4] = Default::default();
        for (slot, x) in parts.iter_mut().zip(arr) {
            *slot = x
                .as_str()
                .ok_or_else(|| Error::parse(loc, "expected a decimal string"))?
                .to_owned();
        }
        GaussRat::from_parts(&parts).map_err(|m| Error::parse(loc, m))
    }
}

impl JsonScalar for Complex64 {
    fn to_json(&self) -> Value {
        json!([self.re, self.im])
    }

    fn from_json(v: &Value, loc: &str) -> Result<Self> {
        let arr = v
            .as_array()
            .filter(|a| a.len() == 2)
            .ok_or_else(|| Error::parse(loc, "expected [re, im]"))?;
        let re = arr[0]
            .as_f64()
            .ok_or_else(|| Error::parse(loc, "expected a number"))?;
        let im = arr[1]
            .as_f64()
            .ok_or_else(|| Error::parse(loc, "expected a number"))?;
        Ok(Complex64::new(re, im))
    }
}

/// A state of either kind.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyState {
    Exact(HermitianOp<GaussRat>),
    Float(HermitianOp<Complex64>),
}

impl AnyState {
    pub fn kind(&self) -> Kind {
        match self {
            AnyState::Exact(_) => Kind::Exact,
            AnyState::Float(_) => Kind::Float,
        }
    }

    pub fn shape(&self) -> &SystemShape {
        match self {
            AnyState::Exact(r) => r.shape(),
            AnyState::Float(r) => r.shape(),
        }
    }
}

/// A decomposition of either kind.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyDecomposition {
    Exact(Decomposition<GaussRat>),
    Float(Decomposition<Complex64>),
}

fn parse_value(text: &str) -> Result<Value> {
    serde_json::from_str(text)
        .map_err(|e| Error::parse(format!("line {} column {}", e.line(), e.column()), e.to_string()))
}

fn object<'a>(v: &'a Value, loc: &str) -> Result<&'a Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| Error::parse(loc, "expected an object"))
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, loc: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| Error::parse(loc, format!("missing field {key:?}")))
}

fn array<'a>(v: &'a Value, loc: &str) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| Error::parse(loc, "expected an array"))
}

fn parse_kind(v: &Value, loc: &str) -> Result<Kind> {
    match v.as_str() {
        Some("exact") => Ok(Kind::Exact),
        Some("float") => Ok(Kind::Float),
        _ => Err(Error::parse(loc, "kind must be \"exact\" or \"float\"")),
    }
}

fn usize_of(v: &Value, loc: &str) -> Result<usize> {
    v.as_u64()
        .and_then(|x| usize::try_from(x).ok())
        .ok_or_else(|| Error::parse(loc, "expected a nonnegative integer"))
}

fn parse_dims(v: &Value, loc: &str) -> Result<SystemShape> {
    let dims = array(v, loc)?
        .iter()
        .enumerate()
        .map(|(i, x)| usize_of(x, &format!("{loc}[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    SystemShape::new(dims).map_err(|e| Error::parse(loc, e.to_string()))
}

/// Parses a shape written as `3,4` or `3x4`.
pub fn parse_shape(text: &str) -> Result<SystemShape> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(Error::parse("shape", "empty shape"));
    }
    let dims = trimmed
        .split([',', 'x', 'X'])
        .enumerate()
        .map(|(i, part)| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| Error::parse(format!("shape[{i}]"), format!("invalid dimension {part:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    SystemShape::new(dims).map_err(|e| Error::parse("shape", e.to_string()))
}

fn vector<S: JsonScalar>(v: &Value, len: usize, loc: &str) -> Result<Vec<S>> {
    let arr = array(v, loc)?;
    if arr.len() != len {
        return Err(Error::parse(loc, format!("expected {len} entries, got {}", arr.len())));
    }
    arr.iter()
        .enumerate()
        .map(|(i, x)| S::from_json(x, &format!("{loc}[{i}]")))
        .collect()
}

fn entries<S: JsonScalar>(v: &Value, d: usize) -> Result<Matrix<S>> {
    let rows = array(v, "entries")?;
    if rows.len() != d {
        return Err(Error::parse("entries", format!("expected {d} rows, got {}", rows.len())));
    }
    let mut data = Vec::with_capacity(d * d);
    for (r, row) in rows.iter().enumerate() {
        data.extend(vector::<S>(row, d, &format!("entries[{r}]"))?);
    }
    Ok(Matrix::from_vec(d, d, data))
}

/// Parses a state file. Hermiticity is checked.
pub fn parse_state(text: &str) -> Result<AnyState> {
    let v = parse_value(text)?;
    let obj = object(&v, "$")?;
    let shape = parse_dims(field(obj, "dims", "$")?, "dims")?;
    let kind = parse_kind(field(obj, "kind", "$")?, "kind")?;
    let ents = field(obj, "entries", "$")?;
    let d = shape.d();
    let wrap = |e: Error| match e {
        Error::Parse { .. } => e,
        other => Error::parse("entries", other.to_string()),
    };
    Ok(match kind {
        Kind::Exact => AnyState::Exact(HermitianOp::new(shape, entries(ents, d)?).map_err(wrap)?),
        Kind::Float => AnyState::Float(HermitianOp::new(shape, entries(ents, d)?).map_err(wrap)?),
    })
}

pub fn state_to_value<S: JsonScalar>(rho: &HermitianOp<S>) -> Value {
    let m = rho.matrix();
    let rows: Vec<Value> = (0..m.rows())
        .map(|r| Value::Array(m.row(r).iter().map(JsonScalar::to_json).collect()))
        .collect();
    json!({
        "dims": rho.shape().dims(),
        "kind": S::KIND,
        "entries": rows,
    })
}

pub fn any_state_to_value(rho: &AnyState) -> Value {
    match rho {
        AnyState::Exact(r) => state_to_value(r),
        AnyState::Float(r) => state_to_value(r),
    }
}

pub fn decomposition_to_value<S: JsonScalar>(dec: &Decomposition<S>) -> Value {
    let terms: Vec<Value> = dec
        .terms()
        .iter()
        .map(|t| {
            json!({
                "weight": t.weight.to_json(),
                "factors": t.vector.factors().iter()
                    .map(|f| Value::Array(f.iter().map(JsonScalar::to_json).collect()))
                    .collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({
        "shape": dec.shape().dims(),
        "kind": S::KIND,
        "terms": terms,
    })
}

pub fn any_decomposition_to_value(dec: &AnyDecomposition) -> Value {
    match dec {
        AnyDecomposition::Exact(d) => decomposition_to_value(d),
        AnyDecomposition::Float(d) => decomposition_to_value(d),
    }
}

fn terms<S: JsonScalar>(v: &Value, shape: &SystemShape) -> Result<Decomposition<S>> {
    let arr = array(v, "terms")?;
    let mut out = Vec::with_capacity(arr.len());
    for (k, t) in arr.iter().enumerate() {
        let loc = format!("terms[{k}]");
        let obj = object(t, &loc)?;
        let weight = S::from_json(field(obj, "weight", &loc)?, &format!("{loc}.weight"))?;
        let floc = format!("{loc}.factors");
        let fs = array(field(obj, "factors", &loc)?, &floc)?;
        if fs.len() != shape.n() {
            return Err(Error::parse(&floc, format!("expected {} factors, got {}", shape.n(), fs.len())));
        }
        let factors = fs
            .iter()
            .zip(shape.dims())
            .enumerate()
            .map(|(j, (f, &dk))| vector::<S>(f, dk, &format!("{floc}[{j}]")))
            .collect::<Result<Vec<_>>>()?;
        let vector = ProductVector::new(shape.clone(), factors).map_err(|e| Error::parse(&floc, e.to_string()))?;
        out.push(Term { weight, vector });
    }
    Decomposition::new(shape.clone(), out).map_err(|e| Error::parse("terms", e.to_string()))
}

/// Parses a decomposition file.
pub fn parse_decomposition(text: &str) -> Result<AnyDecomposition> {
    let v = parse_value(text)?;
    let obj = object(&v, "$")?;
    let shape = parse_dims(field(obj, "shape", "$")?, "shape")?;
    let kind = parse_kind(field(obj, "kind", "$")?, "kind")?;
    let t = field(obj, "terms", "$")?;
    Ok(match kind {
        Kind::Exact => AnyDecomposition::Exact(terms(t, &shape)?),
        Kind::Float => AnyDecomposition::Float(terms(t, &shape)?),
    })
}

pub fn point_to_value(p: &ProductPoint<GaussRat>) -> Value {
    Value::Array(
        p.terms()
            .iter()
            .map(|t| {
                Value::Array(
                    t.iter()
                        .map(|f| Value::Array(f.iter().map(JsonScalar::to_json).collect()))
                        .collect(),
                )
            })
            .collect(),
    )
}

pub fn certificate_to_value(c: &DimCertificate) -> Value {
    json!({
        "shape": c.shape.dims(),
        "r": c.r,
        "mode": if c.real_restricted { "real" } else { "complex" },
        "jacobian_rank": c.jacobian_rank,
        "dim": c.dim(),
        "upper_bound": c.upper_bound,
        "saturated": c.saturated,
        "seed": c.seed,
        "box": c.box_bound,
        "trials": c.trials,
        "trials_run": c.trials_run,
        "point": point_to_value(&c.point),
    })
}

/// Parses a certificate. The stored rank is not trusted; call
/// [`DimCertificate::verify`] to recompute it.
pub fn parse_certificate(text: &str) -> Result<DimCertificate> {
    let v = parse_value(text)?;
    let obj = object(&v, "$")?;
    let shape = parse_dims(field(obj, "shape", "$")?, "shape")?;
    let r = usize_of(field(obj, "r", "$")?, "r")?;
    let real_restricted = match field(obj, "mode", "$")?.as_str() {
        Some("real") => true,
        Some("complex") => false,
        _ => return Err(Error::parse("mode", "mode must be \"real\" or \"complex\"")),
    };
    let jacobian_rank = usize_of(field(obj, "jacobian_rank", "$")?, "jacobian_rank")?;
    let upper_bound = usize_of(field(obj, "upper_bound", "$")?, "upper_bound")?;
    let saturated = field(obj, "saturated", "$")?
        .as_bool()
        .ok_or_else(|| Error::parse("saturated", "expected a boolean"))?;
    let seed = field(obj, "seed", "$")?
        .as_u64()
        .ok_or_else(|| Error::parse("seed", "expected an unsigned integer"))?;
    let box_bound = field(obj, "box", "$")?
        .as_i64()
        .ok_or_else(|| Error::parse("box", "expected an integer"))?;
    let trials = usize_of(field(obj, "trials", "$")?, "trials")?;
    let trials_run = usize_of(field(obj, "trials_run", "$")?, "trials_run")?;
    let pts = array(field(obj, "point", "$")?, "point")?;
    if pts.len() != r {
        return Err(Error::parse("point", format!("expected {r} terms, got {}", pts.len())));
    }
    let mut terms = Vec::with_capacity(r);
    for (k, t) in pts.iter().enumerate() {
        let loc = format!("point[{k}]");
        let fs = array(t, &loc)?;
        if fs.len() != shape.n() {
            return Err(Error::parse(&loc, format!("expected {} factors", shape.n())));
        }
        terms.push(
            fs.iter()
                .zip(shape.dims())
                .enumerate()
                .map(|(j, (f, &dk))| vector::<GaussRat>(f, dk, &format!("{loc}[{j}]")))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    let point = ProductPoint::new(shape.clone(), terms).map_err(|e| Error::parse("point", e.to_string()))?;
    Ok(DimCertificate {
        shape,
        r,
        real_restricted,
        jacobian_rank,
        point,
        upper_bound,
        saturated,
        seed,
        box_bound,
        trials,
        trials_run,
    })
}

/// Pretty JSON with a trailing newline.
pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}
