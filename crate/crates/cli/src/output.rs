use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{Map, Value};
use survcred::datagen::format_real;

use crate::args::{Cli, Format};

/// Replay information attached to every JSON output. Contains no clock
/// readings, so repeated runs produce identical bytes.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub config: Value,
}

impl Manifest {
    pub fn new(cli: &Cli) -> Self {
        let config = serde_json::to_value(cli).unwrap_or(Value::Null);
        Self {
            tool: "survcred",
            version: env!("CARGO_PKG_VERSION"),
            command: cli.command.name(),
            seed: cli.seed,
            config,
        }
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("manifest serializes")
    }
}

/// `{"manifest": ..., <fields of body>}`.
pub fn with_manifest(manifest: &Manifest, body: impl Serialize) -> Result<Value> {
    let mut map = Map::new();
    map.insert("manifest".into(), manifest.to_value());
    match serde_json::to_value(body)? {
        Value::Object(fields) => map.extend(fields),
        other => {
            map.insert("result".into(), other);
        }
    }
    Ok(Value::Object(map))
}

pub fn write_json_file(path: &Path, value: &Value) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(m) => {
            for (k, v) in m {
                flatten(&key(k), v, out);
            }
        }
        Value::Array(a) => {
            for (i, v) in a.iter().enumerate() {
                flatten(&key(&i.to_string()), v, out);
            }
        }
        Value::Number(n) => {
            let text = match n.as_f64() {
                Some(f) if !n.is_i64() && !n.is_u64() => format_real(f),
                _ => n.to_string(),
            };
            out.push((prefix.to_string(), text));
        }
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        Value::Bool(b) => out.push((prefix.to_string(), b.to_string())),
        Value::Null => out.push((prefix.to_string(), String::new())),
    }
}

fn render(value: &Value, format: Format) -> Result<String> {
    Ok(match format {
        Format::Json => serde_json::to_string_pretty(value)? + "\n",
        Format::Csv => {
            let mut pairs = Vec::new();
            flatten("", value, &mut pairs);
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["key", "value"])?;
            for (k, v) in pairs {
                w.write_record([k, v])?;
            }
            String::from_utf8(w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?)?
        }
    })
}

/// Writes the command's primary result to `--output`, or stdout when no
/// output file was given (and `--quiet` is off).
pub fn emit(cli: &Cli, value: &Value) -> Result<()> {
    let text = render(value, cli.format)?;
    match &cli.output {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
        }
        None if !cli.quiet => {
            std::io::stdout().write_all(text.as_bytes())?;
        }
        None => {}
    }
    Ok(())
}

/// Prints a short JSON summary on stdout unless `--quiet`.
pub fn summary(cli: &Cli, value: &Value) -> Result<()> {
    if !cli.quiet {
        std::io::stdout().write_all(render(value, Format::Json)?.as_bytes())?;
    }
    Ok(())
}
