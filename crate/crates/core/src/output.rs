//! JSON helpers shared by walker and oracle results.

use std::collections::BTreeMap;

use serde_json::{Map, Value};

/// Rounds to 12 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

pub fn distribution_json(d: &BTreeMap<String, f64>) -> Value {
    Value::Object(
        d.iter()
            .map(|(k, v)| (k.clone(), Value::from(round_sig(*v))))
            .collect::<Map<_, _>>(),
    )
}

/// Reads the `"normalized"` object of a result document.
pub fn read_distribution(text: &str) -> Result<BTreeMap<String, f64>, String> {
    let doc: Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let obj = doc
        .get("normalized")
        .and_then(Value::as_object)
        .ok_or("missing \"normalized\" object")?;
    obj.iter()
        .map(|(k, v)| {
            v.as_f64()
                .map(|x| (k.clone(), x))
                .ok_or_else(|| format!("non-numeric value for {k}"))
        })
        .collect()
}

/// Pretty JSON with a trailing newline.
pub fn to_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}
