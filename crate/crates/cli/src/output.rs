//! Canonical JSON and the CSV view.

use std::fmt::Write as _;

use anyhow::Result;
use serde_json::Value;

/// Pretty JSON with sorted keys, two-space indent and every float written
/// with 17 significant digits, so equal values always print identically.
pub fn canonical_json(value: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, value, 0);
    out.push('\n');
    out
}

fn write_value(out: &mut String, value: &Value, depth: usize) {
    match value {
        Value::Null | Value::Bool(_) | Value::String(_) => out.push_str(&value.to_string()),
        Value::Number(n) => {
            if n.is_f64() {
                let f = n.as_f64().unwrap_or(f64::NAN);
                let _ = write!(out, "{f:.16e}");
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            // short arrays of scalars stay on one line
            if items.iter().all(|v| !v.is_array() && !v.is_object()) && items.len() <= 64 {
                out.push('[');
                for (idx, v) in items.iter().enumerate() {
                    if idx > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, v, depth + 1);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (idx, v) in items.iter().enumerate() {
                indent(out, depth + 1);
                write_value(out, v, depth + 1);
                if idx + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            indent(out, depth);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (idx, key) in keys.iter().enumerate() {
                indent(out, depth + 1);
                out.push_str(&Value::String((*key).clone()).to_string());
                out.push_str(": ");
                write_value(out, &map[*key], depth + 1);
                if idx + 1 < keys.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            indent(out, depth);
            out.push('}');
        }
    }
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn scalar_text(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        Value::Number(n) if n.is_f64() => format!("{:.16e}", n.as_f64().unwrap_or(f64::NAN)),
        Value::Array(items) => items.iter().map(scalar_text).collect::<Vec<_>>().join(" "),
        Value::Object(_) => canonical_json(value).split_whitespace().collect::<Vec<_>>().join(" "),
        other => other.to_string(),
    }
}

/// CSV view of a result. Tables (`rows` arrays of flat objects) become one
/// line per row; anything else becomes `path,value` lines over its leaves.
pub fn csv_view(result: &Value) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    if let Some(rows) = result.get("rows").and_then(Value::as_array) {
        let mut header: Vec<String> = Vec::new();
        for row in rows {
            if let Some(obj) = row.as_object() {
                for key in obj.keys() {
                    if !header.contains(key) {
                        header.push(key.clone());
                    }
                }
            }
        }
        header.sort();
        writer.write_record(&header)?;
        for row in rows {
            let record: Vec<String> = header.iter().map(|k| row.get(k).map(scalar_text).unwrap_or_default()).collect();
            writer.write_record(&record)?;
        }
    } else {
        writer.write_record(["path", "value"])?;
        let mut leaves = Vec::new();
        flatten("", result, &mut leaves);
        for (path, value) in leaves {
            writer.write_record([path, value])?;
        }
    }
    Ok(String::from_utf8(writer.into_inner()?)?)
}

fn flatten(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
    match value {
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            for key in keys {
                let path = if prefix.is_empty() { key.clone() } else { format!("{prefix}.{key}") };
                flatten(&path, &map[key], out);
            }
        }
        Value::Array(items) if items.iter().any(|v| v.is_object() || v.is_array()) => {
            for (idx, v) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{idx}]"), v, out);
            }
        }
        other => out.push((prefix.to_string(), scalar_text(other))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn keys_sorted_and_floats_fixed_width() {
        let v = json!({"b": 0.1, "a": [1, 2.5], "c": {"z": null, "y": "s"}});
        let text = canonical_json(&v);
        let a = text.find("\"a\"").unwrap();
        let b = text.find("\"b\"").unwrap();
        assert!(a < b);
        assert!(text.contains("1.0000000000000001e-1"));
        assert!(text.contains("[1, 2.5000000000000000e0]"));
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["b"].as_f64(), Some(0.1));
        assert_eq!(back["a"][1].as_f64(), Some(2.5));
    }

    #[test]
    fn round_trip_is_exact() {
        for x in [1.0 / 3.0, 3.0 / 32.0, 1e-300, 123456.789, -2.0f64.sqrt()] {
            let text = canonical_json(&json!({ "x": x }));
            let back: Value = serde_json::from_str(&text).unwrap();
            assert_eq!(back["x"].as_f64(), Some(x));
        }
    }

    #[test]
    fn csv_tables_and_leaves() {
        let table = json!({"rows": [{"r": 4, "gap": 0.5}, {"r": 5, "gap": 0.25}]});
        let text = csv_view(&table).unwrap();
        assert_eq!(text.lines().next(), Some("gap,r"));
        assert_eq!(text.lines().count(), 3);
        let other = json!({"value": 1.5, "witness": {"weights": [0.5, 0.5]}});
        let text = csv_view(&other).unwrap();
        assert!(text.contains("witness.weights,"));
    }
}
