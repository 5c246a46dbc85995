//! TOML defaults for command-line flags.
//!
//! A table per subcommand path holds values keyed by long flag name:
//!
//! ```toml
//! [grid]
//! a = 2.79
//! target-n = 4096
//!
//! [baselines.anisotropy]
//! kind = "warped"
//! r = [0.5, 0.9]
//! ```
//!
//! Values are spliced into the argument list only for flags the user did not
//! pass, so explicit flags always win.

use std::ffi::OsString;
use std::path::Path;

use anyhow::{bail, Context};
use toml::{Table, Value};

use crate::UsageError;

/// Subcommand names that take a nested subcommand.
const NESTED: [&str; 2] = ["baselines", "analyze"];

fn scalar(v: &Value) -> anyhow::Result<String> {
    Ok(match v {
        Value::String(s) => s.clone(),
        Value::Integer(i) => i.to_string(),
        Value::Float(f) => f.to_string(),
        other => bail!(UsageError(format!("unsupported config value {other}"))),
    })
}

/// Pull `--config <path>` out of `args` and merge the file's defaults.
pub fn apply(args: Vec<OsString>) -> anyhow::Result<Vec<OsString>> {
    let strs: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let Some(pos) = strs.iter().position(|a| a == "--config" || a.starts_with("--config=")) else {
        return Ok(args);
    };
    let (path, drop) = match strs[pos].strip_prefix("--config=") {
        Some(p) => (p.to_string(), 1),
        None => match strs.get(pos + 1) {
            Some(p) => (p.clone(), 2),
            None => bail!(UsageError("--config needs a file path".into())),
        },
    };
    let mut rest: Vec<String> = strs[..pos].to_vec();
    rest.extend_from_slice(&strs[pos + drop..]);
    let text = std::fs::read_to_string(Path::new(&path)).with_context(|| format!("reading config {path}"))?;
    let table: Table = text
        .parse()
        .map_err(|e| UsageError(format!("config {path}: {e}")))?;
    Ok(merge(rest, &table)?.into_iter().map(OsString::from).collect())
}

fn merge(args: Vec<String>, table: &Table) -> anyhow::Result<Vec<String>> {
    // locate the subcommand path: the first one or two positional words
    let mut path = Vec::new();
    let mut insert_at = args.len();
    for (i, a) in args.iter().enumerate().skip(1) {
        if a.starts_with('-') {
            continue;
        }
        path.push(a.clone());
        insert_at = i + 1;
        if !(path.len() == 1 && NESTED.contains(&a.as_str())) {
            break;
        }
    }
    let mut section = Some(table);
    for p in &path {
        section = section.and_then(|t| t.get(p)).and_then(Value::as_table);
    }
    let Some(section) = section else {
        return Ok(args);
    };
    let given = |flag: &str| {
        args.iter()
            .any(|a| a == &format!("--{flag}") || a.starts_with(&format!("--{flag}=")))
    };
    let mut extra = Vec::new();
    for (key, value) in section {
        if value.is_table() || given(key) {
            continue;
        }
        match value {
            Value::Boolean(true) => extra.push(format!("--{key}")),
            Value::Boolean(false) => {}
            Value::Array(items) => {
                for item in items {
                    extra.push(format!("--{key}"));
                    extra.push(scalar(item)?);
                }
            }
            v => {
                extra.push(format!("--{key}"));
                extra.push(scalar(v)?);
            }
        }
    }
    let mut out = args;
    out.splice(insert_at..insert_at, extra);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn flags_override_config() {
        let t: Table = "[grid]\na = 0.5\ntarget-n = 100\nstagger = true\n".parse().unwrap();
        let out = merge(args("fk --json grid --a 2.79"), &t).unwrap();
        assert_eq!(out, args("fk --json grid --stagger --target-n 100 --a 2.79"));
    }

    #[test]
    fn nested_sections_and_arrays() {
        let t: Table = "[baselines.anisotropy]\nr = [0.5, 0.9]\n".parse().unwrap();
        let out = merge(args("fk baselines anisotropy --kind warped"), &t).unwrap();
        assert_eq!(out, args("fk baselines anisotropy --r 0.5 --r 0.9 --kind warped"));
        let out = merge(args("fk flops --tokens 64"), &t).unwrap();
        assert_eq!(out, args("fk flops --tokens 64"));
    }
}
