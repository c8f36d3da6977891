use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use crate::args::{Cli, Format};
use crate::CliError;

/// The envelope every subcommand writes.
#[derive(Debug, Clone, Serialize)]
pub struct Report<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: &'a Cli,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp_unix: Option<u64>,
    pub pass: Option<bool>,
    pub result: Value,
}

impl<'a> Report<'a> {
    pub fn new(cli: &'a Cli, pass: Option<bool>, result: Value) -> Self {
        let timestamp_unix = if cli.global.no_timestamp {
            None
        } else {
            SystemTime::now().duration_since(UNIX_EPOCH).ok().map(|d| d.as_secs())
        };
        Self {
            tool: "qgeo",
            version: env!("CARGO_PKG_VERSION"),
            command: cli.command.name(),
            config: cli,
            timestamp_unix,
            pass,
            result,
        }
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>, CliError> {
        let value = serde_json::to_value(self).map_err(|e| CliError::Config(format!("cannot serialize report: {e}")))?;
        match format {
            Format::Json => {
                let mut out = serde_json::to_vec_pretty(&value)
                    .map_err(|e| CliError::Config(format!("cannot serialize report: {e}")))?;
                out.push(b'\n');
                Ok(out)
            }
            Format::Csv => flatten_csv(&value),
        }
    }
}

/// One `path,value` row per JSON leaf, paths joined with `.`.
fn flatten_csv(value: &Value) -> Result<Vec<u8>, CliError> {
    let mut rows = Vec::new();
    flatten("", value, &mut rows);
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Config(format!("cannot write csv: {e}"));
    w.write_record(["path", "value"]).map_err(err)?;
    for (path, leaf) in rows {
        w.write_record([path, leaf]).map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::Config(format!("cannot write csv: {e}")))
}

fn flatten(prefix: &str, value: &Value, rows: &mut Vec<(String, String)>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match value {
        Value::Object(map) => map.iter().for_each(|(k, v)| flatten(&join(k), v, rows)),
        Value::Array(items) => items.iter().enumerate().for_each(|(i, v)| flatten(&join(&i.to_string()), v, rows)),
        Value::Null => rows.push((prefix.to_string(), String::new())),
        Value::String(s) => rows.push((prefix.to_string(), s.clone())),
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}
