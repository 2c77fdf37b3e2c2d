//! Output records and their plain/CSV/JSON renderings.

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Plain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_us: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub command: String,
    pub parameters: Value,
    pub result: Value,
    pub timing: Timing,
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some(String::new()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

/// Dotted-key pairs. Arrays of scalars become one space-separated value.
pub fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                flatten(&key(k), x, out);
            }
        }
        Value::Array(items) => match items.iter().map(scalar).collect::<Option<Vec<_>>>() {
            Some(parts) => out.push((prefix.to_string(), parts.join(" "))),
            None => {
                for (i, x) in items.iter().enumerate() {
                    flatten(&key(&i.to_string()), x, out);
                }
            }
        },
        _ => out.push((prefix.to_string(), scalar(v).unwrap_or_default())),
    }
}

fn pairs(v: &Value) -> Vec<(String, String)> {
    let mut out = Vec::new();
    flatten("", v, &mut out);
    out
}

pub fn plain(result: &Value) -> String {
    match result {
        Value::Array(items) if items.iter().all(|x| scalar(x).is_some()) => {
            items.iter().filter_map(scalar).collect::<Vec<_>>().join(" ") + "\n"
        }
        Value::Array(items) => items
            .iter()
            .map(|x| pairs(x).into_iter().map(|(k, v)| format!("{k}: {v}\n")).collect::<String>())
            .collect::<Vec<_>>()
            .join("\n"),
        _ => pairs(result)
            .into_iter()
            .map(|(k, v)| if k.is_empty() { format!("{v}\n") } else { format!("{k}: {v}\n") })
            .collect(),
    }
}

pub fn csv(result: &Value) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    match result {
        Value::Array(items) if items.iter().all(|x| scalar(x).is_some()) => {
            w.write_record(["value"])?;
            for x in items {
                w.write_record([scalar(x).unwrap_or_default()])?;
            }
        }
        Value::Array(items) => {
            let rows: Vec<Vec<(String, String)>> = items.iter().map(pairs).collect();
            let mut columns: Vec<String> = Vec::new();
            for (k, _) in rows.iter().flatten() {
                if !columns.contains(k) {
                    columns.push(k.clone());
                }
            }
            w.write_record(&columns)?;
            for row in &rows {
                w.write_record(
                    columns.iter().map(|c| row.iter().find(|(k, _)| k == c).map_or("", |(_, v)| v.as_str())),
                )?;
            }
        }
        _ => {
            w.write_record(["key", "value"])?;
            for (k, v) in pairs(result) {
                w.write_record([k, v])?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
