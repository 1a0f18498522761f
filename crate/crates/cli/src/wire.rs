//! JSON encodings of the library values.
//!
//! Rationals travel as `"num/den"` strings. Decoders return a message naming
//! the expected shape so the caller can report it as a usage error.

use std::collections::BTreeMap;

use adelic::adeles::{Adele, ElementaryFunction, RealFactor, RealPart, Tail};
use adelic::arith::{parse_rational, rational_string, Prime};
use adelic::characters::{CharValue, EighthRoot, UnitPhase};
use adelic::integrate::StepFunction;
use adelic::padic::{PAdicExpansion, PAdicRational};
use adelic::quantum::{Modulus, PropagatorValue};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde_json::{json, Map, Value};

pub const STEP_SCHEMA: &str =
    r#"{"p": int, "d": int, "M": int, "N": int, "values": [{"rep": ["num/den", ...], "re": float, "im": float}]}"#;
pub const ADELE_SCHEMA: &str =
    r#"{"real": float or "num/den", "finite": [{"p": int, "num": str, "den": str}], "tail": "integer"|"unit", "tail_value": "num/den"}"#;
pub const ELEMENTARY_SCHEMA: &str =
    r#"{"real": "hermite:n" descriptor, "finite": [step function objects, one per prime]}"#;

pub type Decoded<T> = std::result::Result<T, String>;

pub fn rational(q: &BigRational) -> Value {
    Value::String(rational_string(q))
}

pub fn parse_rational_value(v: &Value) -> Decoded<BigRational> {
    match v {
        Value::String(s) => parse_rational(s).map_err(|e| e.to_string()),
        Value::Number(n) if n.is_i64() => Ok(BigRational::from_integer(BigInt::from(n.as_i64().unwrap_or(0)))),
        other => Err(format!("expected a \"num/den\" string, got {other}")),
    }
}

fn integer(n: &BigInt) -> Value {
    match n.to_i64() {
        Some(k) => json!(k),
        None => Value::String(n.to_string()),
    }
}

pub fn complex(z: Complex64) -> Value {
    json!({"re": z.re, "im": z.im})
}

pub fn phase(u: &UnitPhase) -> Value {
    let f = u.fraction();
    json!({"num": integer(f.numer()), "den": integer(f.denom())})
}

pub fn char_value(c: &CharValue) -> Value {
    match c {
        CharValue::Phase(u) => phase(u),
        CharValue::Complex(z) => complex(*z),
    }
}

pub fn eighth_root(e: EighthRoot) -> Value {
    let z = e.to_complex();
    json!({"re": z.re, "im": z.im, "eighth_root": e.index()})
}

pub fn padic(x: &PAdicRational) -> Value {
    json!({"p": x.prime().get(), "num": x.value().numer().to_string(), "den": x.value().denom().to_string()})
}

pub fn expansion(e: &PAdicExpansion) -> Value {
    json!({"p": e.p.get(), "m": e.m, "digits": e.digits})
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, schema: &str) -> Decoded<&'a Value> {
    obj.get(key).ok_or_else(|| format!("missing field {key:?}; expected {schema}"))
}

fn as_object<'a>(v: &'a Value, schema: &str) -> Decoded<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| format!("expected an object {schema}"))
}

fn as_i64(v: &Value, what: &str) -> Decoded<i64> {
    v.as_i64().ok_or_else(|| format!("{what} must be an integer"))
}

fn as_prime(v: &Value) -> Decoded<Prime> {
    let n = v.as_u64().ok_or_else(|| "p must be a positive integer".to_string())?;
    Prime::new(n).map_err(|e| e.to_string())
}

pub fn step_function(f: &StepFunction) -> Value {
    let values: Vec<Value> = f
        .entries()
        .into_iter()
        .map(|(rep, z)| json!({"rep": rep.iter().map(rational).collect::<Vec<_>>(), "re": z.re, "im": z.im}))
        .collect();
    json!({
        "p": f.prime().get(),
        "d": f.dim(),
        "M": f.support_exponent(),
        "N": f.level(),
        "values": values,
    })
}

pub fn parse_step_function(v: &Value) -> Decoded<StepFunction> {
    let obj = as_object(v, STEP_SCHEMA)?;
    let p = as_prime(field(obj, "p", STEP_SCHEMA)?)?;
    let d = as_i64(field(obj, "d", STEP_SCHEMA)?, "d")?;
    let m = as_i64(field(obj, "M", STEP_SCHEMA)?, "M")?;
    let n = as_i64(field(obj, "N", STEP_SCHEMA)?, "N")?;
    let d = usize::try_from(d).map_err(|_| "d must be positive".to_string())?;
    let values = field(obj, "values", STEP_SCHEMA)?
        .as_array()
        .ok_or_else(|| format!("values must be an array; expected {STEP_SCHEMA}"))?;
    let entries = values
        .iter()
        .map(|e| {
            let e = as_object(e, STEP_SCHEMA)?;
            let rep = field(e, "rep", STEP_SCHEMA)?
                .as_array()
                .ok_or_else(|| "rep must be an array of rationals".to_string())?
                .iter()
                .map(parse_rational_value)
                .collect::<Decoded<Vec<_>>>()?;
            let re = e.get("re").and_then(Value::as_f64).unwrap_or(0.0);
            let im = e.get("im").and_then(Value::as_f64).unwrap_or(0.0);
            Ok((rep, Complex64::new(re, im)))
        })
        .collect::<Decoded<Vec<_>>>()?;
    StepFunction::from_entries(p, d, m, n, &entries).map_err(|e| e.to_string())
}

pub fn adele(x: &Adele) -> Value {
    let real = match x.real() {
        RealPart::Exact(q) => rational(q),
        RealPart::Approx(r) => json!(r),
    };
    let finite: Vec<Value> = x
        .finite()
        .iter()
        .map(|(p, q)| json!({"p": p.get(), "num": q.numer().to_string(), "den": q.denom().to_string()}))
        .collect();
    let tail = match x.tail() {
        Tail::Integer => "integer",
        Tail::Unit => "unit",
    };
    json!({"real": real, "finite": finite, "tail": tail, "tail_value": rational(x.tail_value())})
}

pub fn parse_adele(v: &Value) -> Decoded<Adele> {
    let obj = as_object(v, ADELE_SCHEMA)?;
    let real = match field(obj, "real", ADELE_SCHEMA)? {
        Value::String(s) => RealPart::Exact(parse_rational(s).map_err(|e| e.to_string())?),
        Value::Number(n) => RealPart::Approx(n.as_f64().unwrap_or(f64::NAN)),
        other => return Err(format!("real must be a number or \"num/den\", got {other}")),
    };
    let mut finite = BTreeMap::new();
    let list = field(obj, "finite", ADELE_SCHEMA)?
        .as_array()
        .ok_or_else(|| format!("finite must be an array; expected {ADELE_SCHEMA}"))?;
    for item in list {
        let item = as_object(item, ADELE_SCHEMA)?;
        let p = as_prime(field(item, "p", ADELE_SCHEMA)?)?;
        let num = field(item, "num", ADELE_SCHEMA)?;
        let den = field(item, "den", ADELE_SCHEMA)?;
        let text = format!(
            "{}/{}",
            num.as_str().map(str::to_string).unwrap_or_else(|| num.to_string()),
            den.as_str().map(str::to_string).unwrap_or_else(|| den.to_string())
        );
        let q = parse_rational(&text).map_err(|e| e.to_string())?;
        if finite.insert(p, q).is_some() {
            return Err(format!("prime {p} listed twice"));
        }
    }
    let tail = match obj.get("tail").and_then(Value::as_str).unwrap_or("integer") {
        "integer" => Tail::Integer,
        "unit" => Tail::Unit,
        other => return Err(format!("tail must be \"integer\" or \"unit\", got {other:?}")),
    };
    let tail_value = match obj.get("tail_value") {
        Some(v) => parse_rational_value(v)?,
        None => BigRational::from_integer(BigInt::from(if tail == Tail::Unit { 1 } else { 0 })),
    };
    Adele::new(real, finite, tail, tail_value).map_err(|e| e.to_string())
}

pub fn elementary(f: &ElementaryFunction) -> Value {
    let finite: Vec<Value> = f.finite().values().map(step_function).collect();
    json!({"real": f.real().to_string(), "finite": finite})
}

pub fn parse_elementary(v: &Value) -> Decoded<ElementaryFunction> {
    let obj = as_object(v, ELEMENTARY_SCHEMA)?;
    let descriptor = field(obj, "real", ELEMENTARY_SCHEMA)?
        .as_str()
        .ok_or_else(|| format!("real must be a descriptor string; expected {ELEMENTARY_SCHEMA}"))?;
    let real = RealFactor::parse(descriptor).map_err(|e| e.to_string())?;
    let mut finite = BTreeMap::new();
    if let Some(list) = obj.get("finite") {
        let list = list.as_array().ok_or_else(|| "finite must be an array".to_string())?;
        for item in list {
            let f = parse_step_function(item)?;
            finite.insert(f.prime(), f);
        }
    }
    ElementaryFunction::new(real, finite).map_err(|e| e.to_string())
}

pub fn modulus(m: &Modulus) -> Value {
    match m {
        Modulus::PPower { p, half_exponent } => {
            json!({"p_power": {"p": p.get(), "half_exponent": half_exponent}, "display": m.to_string(), "value": m.to_f64()})
        }
        Modulus::Real(r) => json!({"real": r}),
    }
}

pub fn propagator(k: &PropagatorValue) -> Value {
    json!({
        "place": k.place.to_string(),
        "modulus": modulus(&k.modulus),
        "phase": char_value(&k.phase),
        "lambda": eighth_root(k.lambda),
        "value": complex(k.value()),
        "exact": k.exact,
    })
}
