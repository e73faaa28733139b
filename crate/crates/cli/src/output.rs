//! Number formatting and output sinks.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

/// Rounds to 12 significant digits and folds `-0` into `0`.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    let r: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Text form of a real for CSV cells and tables.
pub fn real(x: f64) -> String {
    let r = round_sig(x);
    if r == 0.0 {
        "0".to_string()
    } else if (1e-4..1e15).contains(&r.abs()) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().expect("f64 number"));
            *v = serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number);
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Pretty JSON with every real rounded to 12 significant digits.
pub fn json<T: Serialize>(value: &T) -> String {
    let mut v = serde_json::to_value(value).expect("serializable output");
    round_value(&mut v);
    let mut s = serde_json::to_string_pretty(&v).expect("JSON value prints");
    s.push('\n');
    s
}

/// CSV text with a fixed header.
pub fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("CSV is UTF-8")
}

/// Writes to `path`, or to standard output when absent.
pub fn emit(path: Option<&Path>, text: &str) -> io::Result<()> {
    match path {
        Some(p) => fs::write(p, text),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(real(-0.0625), "-0.0625");
        assert_eq!(real(1.0 / 3.0), "0.333333333333");
        assert_eq!(real(-0.0), "0");
        assert_eq!(real(-1e-30), "-1e-30");
        assert_eq!(real(0.018156022575283), "0.0181560225753");
        assert_eq!(real(5.0), "5");
    }

    #[test]
    fn json_rounds_nested_reals() {
        let text = json(&serde_json::json!({"a": [1.0 / 3.0, -0.0], "b": {"c": 2}}));
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["a"][0].as_f64().unwrap(), 0.333333333333);
        assert_eq!(v["a"][1].as_f64().unwrap().to_bits(), 0.0f64.to_bits());
        assert_eq!(v["b"]["c"], 2);
    }

    #[test]
    fn csv_has_header_first() {
        let t = csv_text(&["x", "y"], [vec!["1".into(), "a,b".into()]]);
        assert_eq!(t, "x,y\n1,\"a,b\"\n");
    }
}
