//! `--config FILE`: a JSON object of flag values spliced in front of the
//! explicit flags, so explicit flags win.

use std::ffi::OsString;

use anyhow::{bail, Context, Result};
use serde_json::Value;

const SUBCOMMANDS: [&str; 7] = ["solve", "prox", "certify", "table", "trace", "bounds", "instance"];

pub fn expand(argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut path = None;
    for (i, a) in argv.iter().enumerate() {
        let s = a.to_string_lossy();
        if s == "--config" {
            path = Some(
                argv.get(i + 1)
                    .context("--config needs a file path")?
                    .to_string_lossy()
                    .into_owned(),
            );
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else { return Ok(argv) };
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading config {path}"))?;
    let flags = config_flags(&text).with_context(|| format!("parsing config {path}"))?;

    // Insert right after the subcommand name.
    let at = argv
        .iter()
        .skip(1)
        .position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref()))
        .map_or(argv.len(), |p| p + 2);
    let mut out: Vec<OsString> = argv[..at].to_vec();
    out.extend(flags.into_iter().map(OsString::from));
    out.extend_from_slice(&argv[at..]);
    Ok(out)
}

fn config_flags(text: &str) -> Result<Vec<String>> {
    let Value::Object(map) = serde_json::from_str::<Value>(text)? else {
        bail!("config must be a JSON object of flag names to values");
    };
    let mut out = Vec::new();
    for (key, value) in map {
        let flag = format!("--{}", key.replace('_', "-"));
        match value {
            Value::Bool(true) => out.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::Number(n) => out.extend([flag, n.to_string()]),
            Value::String(s) => out.extend([flag, s]),
            Value::Array(items) => {
                let parts: Vec<String> = items
                    .iter()
                    .map(|v| match v {
                        Value::String(s) => Ok(s.clone()),
                        Value::Number(n) => Ok(n.to_string()),
                        _ => bail!("`{key}`: list entries must be numbers or strings"),
                    })
                    .collect::<Result<_>>()?;
                out.extend([flag, parts.join(",")]);
            }
            Value::Object(_) => bail!("`{key}`: nested objects are not flag values"),
        }
    }
    Ok(out)
}
