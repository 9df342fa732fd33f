//! `--config` support: JSON keys become flags placed ahead of the
//! command-line flags, so anything given explicitly wins.

use std::ffi::OsString;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::Value;

/// Global flags that take a value.
const GLOBAL_VALUED: [&str; 4] = ["--seed", "--output", "--format", "--config"];

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Some(v.into());
        }
    }
    None
}

/// Position of the subcommand name in `args`.
fn subcommand_index(args: &[OsString]) -> Option<usize> {
    let mut i = 1;
    while i < args.len() {
        let s = args[i].to_string_lossy();
        if s == "--" {
            return None;
        }
        if s.starts_with('-') {
            if !s.contains('=') && GLOBAL_VALUED.contains(&s.as_ref()) {
                i += 1;
            }
            i += 1;
            continue;
        }
        return Some(i);
    }
    None
}

/// Translates a JSON object into flags.
pub fn config_flags(json: &Value) -> Result<Vec<OsString>> {
    let obj = json.as_object().context("config file must hold a JSON object")?;
    let mut out = Vec::new();
    for (key, value) in obj {
        if key == "config" {
            bail!("config files cannot include other config files");
        }
        let flag = format!("--{}", key.replace('_', "-"));
        match value {
            Value::Null | Value::Bool(false) => {}
            Value::Bool(true) => out.push(flag.into()),
            Value::Number(n) => out.push(format!("{flag}={n}").into()),
            Value::String(s) => out.push(format!("{flag}={s}").into()),
            Value::Array(items) => {
                let parts: Vec<String> = items
                    .iter()
                    .map(|v| match v {
                        Value::String(s) => Ok(s.clone()),
                        Value::Number(n) => Ok(n.to_string()),
                        other => bail!("unsupported list element {other} for `{key}`"),
                    })
                    .collect::<Result<_>>()?;
                out.push(format!("{flag}={}", parts.join(",")).into());
            }
            Value::Object(_) => bail!("nested objects are not supported (key `{key}`)"),
        }
    }
    Ok(out)
}

/// Returns `args` with the config file's flags spliced in right after the
/// subcommand name; the user's own flags follow and therefore take precedence.
pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(Path::new(&path))
        .with_context(|| format!("reading config file {}", Path::new(&path).display()))?;
    let json: Value = serde_json::from_str(&text).context("parsing config file")?;
    let flags = config_flags(&json)?;
    let Some(sub) = subcommand_index(&args) else {
        return Ok(args);
    };
    let mut out = Vec::with_capacity(args.len() + flags.len());
    out.push(args[0].clone());
    out.push(args[sub].clone());
    out.extend(flags);
    out.extend(args[1..sub].iter().cloned());
    out.extend(args[sub + 1..].iter().cloned());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(|s| OsString::from(*s)).collect()
    }

    #[test]
    fn finds_subcommand_after_valued_globals() {
        assert_eq!(subcommand_index(&os(&["bin", "--seed", "3", "fit", "--x"])), Some(3));
        assert_eq!(subcommand_index(&os(&["bin", "--seed=3", "--quiet", "fit"])), Some(3));
        assert_eq!(subcommand_index(&os(&["bin", "--quiet"])), None);
    }

    #[test]
    fn json_keys_become_flags() {
        let json: Value =
            serde_json::json!({"max_iter": 5, "mode": "lagrangian", "quiet": true, "m_grid": [1, 2], "x": null});
        let flags: Vec<String> = config_flags(&json)
            .unwrap()
            .into_iter()
            .map(|s| s.into_string().unwrap())
            .collect();
        assert_eq!(
            flags,
            vec!["--m-grid=1,2", "--max-iter=5", "--mode=lagrangian", "--quiet"]
        );
    }
}
