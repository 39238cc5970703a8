//! `--config file.json` support: keys of a JSON object become flags unless
//! the same flag was given on the command line.

use std::ffi::OsString;

use anyhow::{bail, Context, Result};
use serde_json::Value;

fn flag_present(args: &[OsString], flag: &str) -> bool {
    let with_eq = format!("{flag}=");
    args.iter().any(|a| {
        let a = a.to_string_lossy();
        a == flag || a.starts_with(&with_eq)
    })
}

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(rest) = s.strip_prefix("--config=") {
            return Some(rest.into());
        }
    }
    None
}

fn scalar(v: &Value) -> Result<String> {
    Ok(match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        other => bail!("unsupported config value {other}"),
    })
}

/// Returns `argv` with config-supplied flags appended after the explicit ones.
pub fn merge(argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(&path)
        .with_context(|| format!("reading config {}", path.to_string_lossy()))?;
    let json: Value = serde_json::from_str(&text)
        .with_context(|| format!("parsing config {}", path.to_string_lossy()))?;
    let Value::Object(map) = json else {
        bail!("config must be a JSON object");
    };
    let mut out = argv.clone();
    for (key, value) in &map {
        let flag = format!("--{}", key.replace('_', "-"));
        if flag == "--config" || flag_present(&argv, &flag) {
            continue;
        }
        match value {
            Value::Bool(true) => out.push(flag.into()),
            Value::Bool(false) | Value::Null => {}
            Value::Array(items) => {
                for item in items {
                    out.push(flag.clone().into());
                    out.push(scalar(item)?.into());
                }
            }
            v => {
                out.push(flag.into());
                out.push(scalar(v)?.into());
            }
        }
    }
    Ok(out)
}
