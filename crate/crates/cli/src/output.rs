//! Report rendering. Every subcommand produces one JSON object; `--format
//! csv` flattens it into a header row and a value row (nested fields use
//! dotted paths, array elements are indexed). Errors are emitted as a
//! single-line JSON error record and force a nonzero exit status.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(kind: &'static str, message: impl fmt::Display) -> Self {
        Self {
            kind,
            message: message.to_string(),
        }
    }

    pub fn record(&self) -> String {
        serde_json::json!({
            "error": { "kind": self.kind, "message": self.message }
        })
        .to_string()
    }
}

pub fn render(report: &serde_json::Value, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => {
            let mut text = serde_json::to_string_pretty(report).expect("report serializes");
            text.push('\n');
            text
        }
        OutputFormat::Csv => {
            let mut fields = Vec::new();
            flatten("", report, &mut fields);
            let header: Vec<&str> = fields.iter().map(|(k, _)| k.as_str()).collect();
            let values: Vec<String> = fields.iter().map(|(_, v)| v.clone()).collect();
            format!("{}\n{}\n", header.join(","), values.join(","))
        }
    }
}

fn flatten(prefix: &str, value: &serde_json::Value, out: &mut Vec<(String, String)>) {
    match value {
        serde_json::Value::Object(map) => {
            for (key, nested) in map {
                let path = if prefix.is_empty() {
                    key.clone()
                } else {
                    format!("{prefix}.{key}")
                };
                flatten(&path, nested, out);
            }
        }
        serde_json::Value::Array(items) => {
            for (index, nested) in items.iter().enumerate() {
                flatten(&format!("{prefix}.{index}"), nested, out);
            }
        }
        serde_json::Value::String(s) => out.push((prefix.to_string(), csv_quote(s))),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

fn csv_quote(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}
