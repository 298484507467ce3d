use serde_json::{Map, Value};

use super::{path_str, read_json};
use crate::io::{ensure_distinct, write_json};
use crate::{CliError, ReportArgs};

/// Merges JSON documents under their file stems, in argument order.
pub fn run(a: ReportArgs) -> Result<String, CliError> {
    let inputs: Vec<&std::path::Path> = a.input.iter().map(|p| p.as_path()).collect();
    ensure_distinct(&[&a.out], &inputs)?;
    let mut reports = Map::new();
    for path in &a.input {
        let key = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| path_str(path));
        if reports.contains_key(&key) {
            return Err(CliError::Usage(format!("two inputs share the name `{key}`")));
        }
        let value: Value = read_json(path)?;
        reports.insert(key, value);
    }
    let sources: Vec<String> = a.input.iter().map(|p| path_str(p)).collect();
    let n = reports.len();
    let mut doc = Map::new();
    doc.insert("config".into(), serde_json::json!({ "inputs": sources }));
    doc.insert("reports".into(), Value::Object(reports));
    write_json(&a.out, &Value::Object(doc))?;
    Ok(format!("report: merged {n} reports into {}", a.out.display()))
}
