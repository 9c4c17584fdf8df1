//! JSON building blocks.  Objects have sorted keys and floats carry 17
//! significant digits, so reports are byte-stable.

use ibl_core::linalg::exact::Q;
use ibl_core::linalg::Mat;
use serde_json::{Map, Number, Value};
use std::str::FromStr;

/// Finite floats as numbers with 17 significant digits; `inf`, `-inf` and
/// `nan` as strings.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        let s = format!("{x:.16e}");
        Value::Number(Number::from_str(&s).expect("formatted float"))
    } else if x.is_nan() {
        Value::String("nan".into())
    } else if x > 0.0 {
        Value::String("inf".into())
    } else {
        Value::String("-inf".into())
    }
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

/// Row-major list of rows.
pub fn mat(m: &Mat) -> Value {
    Value::Array((0..m.nrows()).map(|i| Value::Array(m.row(i).iter().map(|&x| num(x)).collect())).collect())
}

pub fn rational(q: &Q) -> Value {
    Value::String(q.to_string())
}

/// Object from `(key, value)` pairs.
pub fn obj<const N: usize>(pairs: [(&str, Value); N]) -> Value {
    Value::Object(pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect::<Map<_, _>>())
}

pub fn insert(v: &mut Value, key: &str, value: Value) {
    if let Value::Object(m) = v {
        m.insert(key.to_string(), value);
    }
}

pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialisable report");
    s.push('\n');
    s
}
