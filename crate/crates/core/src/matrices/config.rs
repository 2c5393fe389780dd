//! JSON ingestion and emission for subspaces, matrices and approximation
//! functions.

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::{json, Map, Value};

use super::{ApproxFunction, Entry, EntrySource, PsiKind, RealMatrix, SubspaceMatrix};
use crate::error::{Error, Result};
use crate::numerics::Surd;

fn malformed(msg: impl Into<String>) -> Error {
    Error::MalformedEntry(msg.into())
}

/// Parses `"-12.5e-3"`, `"7"` or `"3/4"` exactly.
pub fn parse_decimal(text: &str) -> Result<BigRational> {
    let t = text.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| malformed(format!("bad rational {t:?}")))?;
        let d = BigInt::from_str(d.trim()).map_err(|_| malformed(format!("bad rational {t:?}")))?;
        if d.is_zero() {
            return Err(malformed(format!("zero denominator in {t:?}")));
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => {
            let e: i64 = t[i + 1..]
                .parse()
                .map_err(|_| malformed(format!("bad exponent in {t:?}")))?;
            (&t[..i], e)
        }
        None => (t, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty()
        || !int_part
            .bytes()
            .chain(frac_part.bytes())
            .all(|b| b.is_ascii_digit())
    {
        return Err(malformed(format!("bad decimal {t:?}")));
    }
    let digits = format!("{int_part}{frac_part}");
    let mut n = BigInt::from_str(if digits.is_empty() { "0" } else { &digits })
        .map_err(|_| malformed(format!("bad decimal {t:?}")))?;
    if neg {
        n = -n;
    }
    let shift = exp - frac_part.len() as i64;
    if shift.unsigned_abs() > 100_000 {
        return Err(malformed(format!("exponent out of range in {t:?}")));
    }
    let ten = BigInt::from(10u8);
    let p = num_traits::pow(ten, shift.unsigned_abs() as usize);
    Ok(if shift >= 0 {
        BigRational::from_integer(n * p)
    } else {
        BigRational::new(n, p)
    })
}

fn value_text(v: &Value) -> Result<String> {
    match v {
        Value::Number(n) => Ok(n.to_string()),
        Value::String(s) => Ok(s.clone()),
        other => Err(malformed(format!("expected a number, got {other}"))),
    }
}

fn value_int(v: &Value) -> Result<BigInt> {
    let t = value_text(v)?;
    BigInt::from_str(t.trim()).map_err(|_| malformed(format!("expected an integer, got {t}")))
}

fn value_ratio(v: &Value) -> Result<BigRational> {
    parse_decimal(&value_text(v)?)
}

fn value_usize(v: Option<&Value>, field: &str) -> Result<usize> {
    let v = v.ok_or_else(|| malformed(format!("missing field {field:?}")))?;
    value_int(v)?
        .to_usize()
        .ok_or_else(|| malformed(format!("{field} must be a nonnegative integer")))
}

fn int_value(n: &BigInt) -> Value {
    match n.to_i64() {
        Some(x) => json!(x),
        None => json!(n.to_string()),
    }
}

fn ratio_value(x: &BigRational) -> Value {
    if x.is_integer() {
        int_value(x.numer())
    } else {
        json!(format!("{}/{}", x.numer(), x.denom()))
    }
}

fn parse_entry(v: &Value) -> Result<Entry> {
    let obj = v
        .as_object()
        .ok_or_else(|| malformed(format!("entry must be an object, got {v}")))?;
    if let Some(s) = obj.get("surd") {
        let parts = s
            .as_array()
            .filter(|a| a.len() == 4)
            .ok_or_else(|| malformed("surd entry needs [p, q, d, r]"))?;
        let [p, q, d, r] = [0, 1, 2, 3].map(|i| value_int(&parts[i]));
        return Ok(Surd::new(p?, q?, d?, r?)?.into());
    }
    if let Some(text) = obj.get("dec") {
        let text = text
            .as_str()
            .ok_or_else(|| malformed("dec entry must be a string"))?;
        let bits = match obj.get("bits") {
            Some(b) => value_int(b)?
                .to_u32()
                .ok_or_else(|| malformed("bits out of range"))?,
            None => 0,
        };
        return Entry::dec(text, bits);
    }
    Err(malformed(format!("entry needs \"surd\" or \"dec\": {v}")))
}

fn entry_value(e: &Entry) -> Value {
    match e.source() {
        EntrySource::Surd => {
            let s = e.value();
            json!({ "surd": [int_value(s.p()), int_value(s.q()), int_value(s.d()), int_value(s.r())] })
        }
        EntrySource::Dec { text, bits } => json!({ "dec": text, "bits": bits }),
    }
}

fn parse_row(v: &Value, what: &str) -> Result<Vec<Entry>> {
    v.as_array()
        .ok_or_else(|| malformed(format!("{what} must be an array")))?
        .iter()
        .map(parse_entry)
        .collect()
}

fn parse_rows(v: &Value, what: &str) -> Result<Vec<Vec<Entry>>> {
    v.as_array()
        .ok_or_else(|| malformed(format!("{what} must be an array of arrays")))?
        .iter()
        .map(|r| parse_row(r, what))
        .collect()
}

fn parse_json(text: &str) -> Result<Map<String, Value>> {
    match serde_json::from_str::<Value>(text) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => Err(malformed("config must be a JSON object")),
        Err(e) => Err(malformed(format!("invalid JSON: {e}"))),
    }
}

/// Reads `{"n", "d", "alpha0", "A"}`. A missing `alpha0` means zero.
pub fn parse_subspace(text: &str) -> Result<SubspaceMatrix> {
    let obj = parse_json(text)?;
    subspace_from_object(&obj)
}

pub(crate) fn subspace_from_object(obj: &Map<String, Value>) -> Result<SubspaceMatrix> {
    let n = value_usize(obj.get("n"), "n")?;
    let d = value_usize(obj.get("d"), "d")?;
    if d == 0 || d >= n {
        return Err(Error::DimensionMismatch(format!(
            "need 1 ≤ d < n, got n = {n}, d = {d}"
        )));
    }
    let a = parse_rows(
        obj.get("A")
            .ok_or_else(|| malformed("missing field \"A\""))?,
        "A",
    )?;
    let alpha0 = match obj.get("alpha0") {
        Some(v) => parse_row(v, "alpha0")?,
        None => vec![Surd::from_int(0).into(); n - d],
    };
    SubspaceMatrix::new(n, d, alpha0, a)
}

pub fn serialize_subspace(s: &SubspaceMatrix) -> String {
    let a: Vec<Value> = (0..s.a().rows())
        .map(|u| Value::Array(s.a().row(u).iter().map(entry_value).collect()))
        .collect();
    let v = json!({
        "n": s.n(),
        "d": s.d(),
        "alpha0": s.alpha0().iter().map(entry_value).collect::<Vec<_>>(),
        "A": a,
    });
    serde_json::to_string_pretty(&v).expect("serializable")
}

/// Reads `{"M": [[entry, …], …]}`.
pub fn parse_matrix(text: &str) -> Result<RealMatrix> {
    let obj = parse_json(text)?;
    let m = obj
        .get("M")
        .ok_or_else(|| malformed("missing field \"M\""))?;
    RealMatrix::from_rows(parse_rows(m, "M")?)
}

pub fn serialize_matrix(m: &RealMatrix) -> String {
    let rows: Vec<Value> = (0..m.rows())
        .map(|u| Value::Array(m.row(u).iter().map(entry_value).collect()))
        .collect();
    serde_json::to_string_pretty(&json!({ "M": rows })).expect("serializable")
}

/// Reads a ψ config: `{"kind": "power", "nu", "c"}`,
/// `{"kind": "table", "values"}` or `{"kind": "truncated", "inner", "eta"}`,
/// each with an optional `"monotone"` flag.
pub fn parse_psi(text: &str) -> Result<ApproxFunction> {
    let v: Value =
        serde_json::from_str(text).map_err(|e| malformed(format!("invalid JSON: {e}")))?;
    psi_from_value(&v)
}

fn psi_from_value(v: &Value) -> Result<ApproxFunction> {
    let obj = v
        .as_object()
        .ok_or_else(|| malformed("psi config must be an object"))?;
    let kind = obj
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| malformed("psi config needs a \"kind\""))?;
    let monotone = match obj.get("monotone") {
        None => None,
        Some(Value::Bool(b)) => Some(*b),
        Some(_) => return Err(malformed("\"monotone\" must be a boolean")),
    };
    let field = |name: &str| {
        obj.get(name)
            .ok_or_else(|| malformed(format!("psi {kind} needs {name:?}")))
    };
    let psi = match kind {
        "power" => {
            let c = match obj.get("c") {
                Some(c) => value_ratio(c)?,
                None => BigRational::one(),
            };
            ApproxFunction::power(value_ratio(field("nu")?)?, c)?
        }
        "table" => {
            let values = field("values")?
                .as_array()
                .ok_or_else(|| malformed("table values must be an array"))?
                .iter()
                .map(value_ratio)
                .collect::<Result<Vec<_>>>()?;
            ApproxFunction::table(values, false)?
        }
        "truncated" => ApproxFunction::truncated(
            psi_from_value(field("inner")?)?,
            value_ratio(field("eta")?)?,
        )?,
        other => return Err(malformed(format!("unknown psi kind {other:?}"))),
    };
    Ok(match monotone {
        Some(flag) => psi.with_monotone(flag),
        None => psi,
    })
}

fn psi_value(psi: &ApproxFunction) -> Value {
    let mut v = match &psi.kind {
        PsiKind::PowerLaw { nu, c } => json!({
            "kind": "power", "nu": ratio_value(nu), "c": ratio_value(c)
        }),
        PsiKind::Table(values) => json!({
            "kind": "table", "values": values.iter().map(ratio_value).collect::<Vec<_>>()
        }),
        PsiKind::TruncatedMax { inner, eta } => json!({
            "kind": "truncated", "inner": psi_value(inner), "eta": ratio_value(eta)
        }),
    };
    v["monotone"] = json!(psi.monotone_nonincreasing);
    v
}

pub fn serialize_psi(psi: &ApproxFunction) -> String {
    serde_json::to_string_pretty(&psi_value(psi)).expect("serializable")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals() {
        let r = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        assert_eq!(parse_decimal("-0.25").unwrap(), r(-1, 4));
        assert_eq!(parse_decimal("1.5e2").unwrap(), r(150, 1));
        assert_eq!(parse_decimal("3/6").unwrap(), r(1, 2));
        assert_eq!(parse_decimal(".5").unwrap(), r(1, 2));
        assert_eq!(parse_decimal("2E-3").unwrap(), r(1, 500));
        for bad in ["", "-", "1/0", "abc", "1.2.3", "1e"] {
            assert!(parse_decimal(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn line_through_sqrt2() {
        let s = parse_subspace(
            r#"{"n":2,"d":1,"alpha0":[{"surd":[0,0,0,1]}],"A":[[{"surd":[0,1,2,1]}]]}"#,
        )
        .unwrap();
        assert_eq!((s.n(), s.d()), (2, 1));
        assert_eq!(s.a().get(0, 0).value(), &Surd::sqrt(2).unwrap());
    }

    #[test]
    fn plane_with_two_columns() {
        let s = parse_subspace(
            r#"{"n":3,"d":1,"alpha0":[{"dec":"0","bits":64},{"dec":"0.5","bits":64}],
                "A":[[{"surd":[0,1,2,1]},{"surd":["0","1","3","1"]}]]}"#,
        )
        .unwrap();
        assert_eq!((s.atilde().rows(), s.atilde().cols()), (2, 2));
        assert_eq!(s.bits_hint(), 64);
    }

    #[test]
    fn rejects_bad_input() {
        let e = parse_subspace(r#"{"n":2,"d":2,"A":[]}"#).unwrap_err();
        assert!(matches!(e, Error::DimensionMismatch(_)));
        let e = parse_subspace(r#"{"n":2,"d":1,"A":[[{"surd":[0,1,4,1]}]]}"#).unwrap_err();
        assert!(matches!(e, Error::PerfectSquareRadicand(_)));
        let e = parse_subspace(r#"{"n":2,"d":1,"A":[[{"surd":[0,1,2]}]]}"#).unwrap_err();
        assert!(matches!(e, Error::MalformedEntry(_)));
        let e = parse_subspace(r#"{"n":2,"d":1,"A":[[1.5]]}"#).unwrap_err();
        assert!(matches!(e, Error::MalformedEntry(_)));
    }

    #[test]
    fn round_trips() {
        let text = r#"{"n":3,"d":2,"alpha0":[{"dec":"-0.125","bits":256}],
            "A":[[{"surd":[2,4,8,6]}],[{"surd":["123456789012345678901234567890",1,5,7]}]]}"#;
        let s = parse_subspace(text).unwrap();
        // 2 + 4√8 over 6 canonicalizes to (1 + 4√2)/3.
        assert_eq!(
            s.a().get(0, 0).value().to_string(),
            Surd::new(1.into(), 4.into(), 2.into(), 3.into())
                .unwrap()
                .to_string()
        );
        let again = parse_subspace(&serialize_subspace(&s)).unwrap();
        assert_eq!(s, again);

        let m = parse_matrix(r#"{"M":[[{"surd":[0,1,2,1]}],[{"surd":[0,1,3,1]}]]}"#).unwrap();
        assert_eq!(parse_matrix(&serialize_matrix(&m)).unwrap(), m);

        let psi = parse_psi(
            r#"{"kind":"truncated","eta":"1/2","inner":{"kind":"table","values":[0.5,"0.3"],"monotone":true}}"#,
        )
        .unwrap();
        assert!(psi.monotone_nonincreasing);
        assert_eq!(parse_psi(&serialize_psi(&psi)).unwrap(), psi);
        let p = parse_psi(r#"{"kind":"power","nu":1.5}"#).unwrap();
        assert_eq!(parse_psi(&serialize_psi(&p)).unwrap(), p);
    }
}
