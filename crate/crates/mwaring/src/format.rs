//! JSON documents for matrices, certificates, census reports and constants.
//!
//! A matrix document is `{"field": "p^m", "modulus": [...], "n": n, "rows": [...]}`.
//! Elements of prime fields are integers; elements of `F_{p^m}`, `m > 1`, are
//! little-endian coefficient arrays of length `m`. Struct field order is the
//! output key order.

use anyhow::{anyhow, bail, ensure, Context, Result};
use mwaring_core::diageq::{CensusReport, Constants, Threshold};
use mwaring_core::gf::prime_power;
use mwaring_core::waring::{Decomposition, Method};
use mwaring_core::{Elem, FieldCtx, Matrix};
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Parses `"p^m"`, `"p"` or `"q"` (a prime power) with an optional modulus
/// (little-endian, monic) for `m > 1`.
pub fn parse_field(spec: &str, modulus: Option<&[u64]>) -> Result<FieldCtx> {
    let spec = spec.trim();
    let (p, m) = match spec.split_once('^') {
        Some((p, m)) => (
            p.trim().parse::<u64>().with_context(|| format!("bad characteristic in field {spec:?}"))?,
            m.trim().parse::<u32>().with_context(|| format!("bad degree in field {spec:?}"))?,
        ),
        None => {
            let q: u64 = spec.parse().with_context(|| format!("bad field {spec:?}"))?;
            prime_power(q).ok_or_else(|| anyhow!("{q} is not a prime power"))?
        }
    };
    let ctx = match modulus {
        Some(coeffs) if m > 1 => FieldCtx::with_modulus(p, coeffs)?,
        _ => FieldCtx::new(p, m)?,
    };
    ensure!(ctx.m() == m, "modulus degree does not match field {spec:?}");
    Ok(ctx)
}

pub fn elem_to_json(ctx: &FieldCtx, e: Elem) -> Value {
    if ctx.m() == 1 {
        Value::from(e.index())
    } else {
        Value::from(ctx.coeffs(e))
    }
}

pub fn elem_from_json(ctx: &FieldCtx, v: &Value) -> Result<Elem> {
    match v {
        Value::Number(_) if ctx.m() == 1 => {
            let x = v.as_i64().ok_or_else(|| anyhow!("element {v} is not an integer"))?;
            Ok(ctx.from_int(x))
        }
        Value::Array(items) if ctx.m() > 1 => {
            ensure!(items.len() == ctx.m() as usize, "element {v} needs {} coefficients", ctx.m());
            let coeffs = items
                .iter()
                .map(|c| c.as_u64().and_then(|c| u32::try_from(c).ok()).ok_or_else(|| anyhow!("bad coefficient in {v}")))
                .collect::<Result<Vec<u32>>>()?;
            Ok(ctx.from_coeffs(&coeffs)?)
        }
        Value::String(s) => Ok(ctx.parse_elem(s)?),
        _ => bail!("element {v} has the wrong shape for F_{}", ctx.q()),
    }
}

pub fn rows_to_json(m: &Matrix) -> Vec<Vec<Value>> {
    let ctx = m.ctx();
    (0..m.rows()).map(|i| m.row(i).iter().map(|&e| elem_to_json(ctx, e)).collect()).collect()
}

pub fn rows_from_json(ctx: &FieldCtx, rows: &[Vec<Value>]) -> Result<Matrix> {
    let n = rows.len();
    let parsed = rows
        .iter()
        .map(|r| {
            ensure!(r.len() == n, "matrix must be square: row of length {} in a {n}-row matrix", r.len());
            r.iter().map(|v| elem_from_json(ctx, v)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Matrix::from_rows(ctx, parsed)?)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixDoc {
    /// Empty when the document omits it.
    #[serde(default)]
    pub field: String,
    #[serde(default)]
    pub modulus: Option<Vec<u64>>,
    #[serde(default)]
    pub n: Option<usize>,
    pub rows: Vec<Vec<Value>>,
}

impl MatrixDoc {
    pub fn from_matrix(m: &Matrix) -> Self {
        let ctx = m.ctx();
        MatrixDoc {
            field: ctx.spec_string(),
            modulus: Some(ctx.modulus().iter().map(|&c| u64::from(c)).collect()),
            n: Some(m.rows()),
            rows: rows_to_json(m),
        }
    }

    pub fn to_matrix(&self) -> Result<Matrix> {
        let ctx = parse_field(&self.field, self.modulus.as_deref())?;
        let m = rows_from_json(&ctx, &self.rows)?;
        if let Some(n) = self.n {
            ensure!(n == m.rows(), "declared n = {n} but {} rows given", m.rows());
        }
        Ok(m)
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).context("matrix JSON")
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PartDoc {
    /// Little-endian coefficients of the block polynomial.
    pub f: Vec<Value>,
    pub r: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrailDoc {
    pub blocks: Vec<usize>,
    pub parts: Vec<PartDoc>,
    pub offset: usize,
    pub method: String,
    #[serde(rename = "A")]
    pub a: Vec<Vec<Value>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<Value>>,
}

/// Output of `decompose`; `verify` reads `field`, `modulus`, `k`, `A`, `B`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertificateDoc {
    pub field: String,
    #[serde(default)]
    pub modulus: Option<Vec<u64>>,
    #[serde(default)]
    pub n: Option<usize>,
    pub k: u64,
    #[serde(default)]
    pub method: Option<String>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<Value>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<Value>>,
    /// Conjugator to the generalized Jordan form.
    #[serde(rename = "P", default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<Vec<Value>>>,
    #[serde(default)]
    pub trail: Vec<TrailDoc>,
    #[serde(default)]
    pub verified: bool,
}

impl CertificateDoc {
    pub fn from_decomposition(d: &Decomposition, verified: bool) -> Self {
        let ctx = d.a.ctx();
        CertificateDoc {
            field: ctx.spec_string(),
            modulus: Some(ctx.modulus().iter().map(|&c| u64::from(c)).collect()),
            n: Some(d.a.rows()),
            k: d.k,
            method: Some(d.method.tag().to_string()),
            a: rows_to_json(&d.a),
            b: rows_to_json(&d.b),
            p: Some(rows_to_json(&d.conj.p)),
            trail: d
                .trail
                .iter()
                .map(|t| TrailDoc {
                    blocks: t.blocks.clone(),
                    parts: t
                        .parts
                        .iter()
                        .map(|b| PartDoc { f: b.f.coeffs().iter().map(|&c| elem_to_json(ctx, c)).collect(), r: b.r })
                        .collect(),
                    offset: t.offset,
                    method: t.method.tag().to_string(),
                    a: rows_to_json(&t.a),
                    b: rows_to_json(&t.b),
                })
                .collect(),
            verified,
        }
    }

    /// The two summands over the certificate's field.
    pub fn summands(&self) -> Result<(Matrix, Matrix)> {
        let ctx = parse_field(&self.field, self.modulus.as_deref())?;
        if let Some(m) = &self.method {
            ensure!(Method::from_tag(m).is_some(), "unknown method tag {m:?}");
        }
        Ok((rows_from_json(&ctx, &self.a)?, rows_from_json(&ctx, &self.b)?))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CensusDoc {
    pub field: String,
    pub k: u64,
    pub n: usize,
    pub lambda: Value,
    #[serde(rename = "N")]
    pub solutions: u128,
    #[serde(rename = "N1")]
    pub with_collision: Option<u128>,
    #[serde(rename = "N2")]
    pub with_zero: Option<u128>,
    pub weil_gap: u128,
    pub weil_bound_squared: Option<u128>,
    pub weil_holds: bool,
    pub special_lower: Option<i128>,
}

impl CensusDoc {
    pub fn new(ctx: &FieldCtx, r: &CensusReport) -> Self {
        CensusDoc {
            field: ctx.spec_string(),
            k: r.k,
            n: r.n,
            lambda: elem_to_json(ctx, r.lambda),
            solutions: r.solutions,
            with_collision: r.with_collision,
            with_zero: r.with_zero,
            weil_gap: r.weil_gap,
            weil_bound_squared: r.weil_bound_squared,
            weil_holds: r.weil_holds,
            special_lower: r.special_lower,
        }
    }
}

fn threshold_json(t: Threshold) -> Value {
    match t {
        Threshold::Value(v) => serde_json::to_value(v).expect("integer"),
        Threshold::Overflow => Value::from("overflow"),
        Threshold::Undefined => Value::from("undefined"),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstantsDoc {
    pub k: u64,
    pub n: usize,
    #[serde(rename = "C_small")]
    pub c_small: Value,
    #[serde(rename = "C_two_var")]
    pub c_two_var: Value,
    #[serde(rename = "C_kn")]
    pub c_kn: Value,
    #[serde(rename = "C_nilpotent_free")]
    pub c_nilpotent_free: Value,
}

impl ConstantsDoc {
    pub fn new(k: u64, n: usize, c: &Constants) -> Self {
        ConstantsDoc {
            k,
            n,
            c_small: threshold_json(c.c_small),
            c_two_var: threshold_json(c.c_two_var),
            c_kn: threshold_json(c.c_kn),
            c_nilpotent_free: threshold_json(c.c_nilpotent_free),
        }
    }
}

/// JSON text with the given indent width; zero gives compact output.
pub fn to_json<T: Serialize>(value: &T, indent: usize) -> String {
    if indent == 0 {
        return serde_json::to_string(value).expect("serializable");
    }
    let pad = vec![b' '; indent];
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, serde_json::ser::PrettyFormatter::with_indent(&pad));
    value.serialize(&mut ser).expect("serializable");
    String::from_utf8(out).expect("utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_specs() {
        assert_eq!(parse_field("7", None).unwrap().q(), 7);
        assert_eq!(parse_field("3^2", None).unwrap().q(), 9);
        assert_eq!(parse_field("9", None).unwrap().m(), 2);
        assert_eq!(parse_field("3^2", Some(&[2, 2, 1])).unwrap().modulus(), [2, 2, 1]);
        assert!(parse_field("6", None).is_err());
        assert!(parse_field("3^2", Some(&[2, 0, 1])).is_err());
    }

    #[test]
    fn matrix_round_trip() {
        let ctx = parse_field("3^2", None).unwrap();
        let m = Matrix::from_rows(&ctx, vec![vec![ctx.elem(5), ctx.elem(0)], vec![ctx.elem(8), ctx.elem(1)]]).unwrap();
        let doc = MatrixDoc::from_matrix(&m);
        let text = to_json(&doc, 0);
        assert_eq!(text, r#"{"field":"3^2","modulus":[1,0,1],"n":2,"rows":[[[2,1],[0,0]],[[2,2],[1,0]]]}"#);
        assert_eq!(MatrixDoc::parse(&text).unwrap().to_matrix().unwrap(), m);
    }

    #[test]
    fn matrix_input_errors() {
        assert!(MatrixDoc::parse(r#"{"field":"7","rows":[[1,2],[3]]}"#).unwrap().to_matrix().is_err());
        assert!(MatrixDoc::parse(r#"{"field":"7","n":3,"rows":[[1]]}"#).unwrap().to_matrix().is_err());
        assert!(MatrixDoc::parse(r#"{"field":"9","rows":[[1]]}"#).unwrap().to_matrix().is_err());
        let m = MatrixDoc::parse(r#"{"field":"7","rows":[[-1]]}"#).unwrap().to_matrix().unwrap();
        assert_eq!(m[(0, 0)].index(), 6);
    }
}
