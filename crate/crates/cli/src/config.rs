//! Flag values from a TOML file.
//!
//! Top-level keys apply to every subcommand that has a flag of that name;
//! keys in a `[subcommand]` table must all be flags of that subcommand.
//! The values become command-line tokens placed before the user's own, so
//! flags given on the command line win.

use std::path::Path;

use anyhow::{Context, Result};
use clap::Command;
use toml::{Table, Value};

use crate::BadFlag;

fn scalar(key: &str, v: &Value) -> Result<String> {
    Ok(match v {
        Value::String(s) => s.clone(),
        Value::Integer(i) => i.to_string(),
        Value::Float(f) => f.to_string(),
        Value::Boolean(b) => b.to_string(),
        _ => return Err(BadFlag(format!("config key `{key}` must be a string, number or boolean")).into()),
    })
}

fn push(cmd: &Command, key: &str, v: &Value, strict: bool, out: &mut Vec<String>) -> Result<()> {
    let long = key.replace('_', "-");
    let Some(arg) = cmd.get_arguments().find(|a| a.get_long() == Some(long.as_str())) else {
        if strict {
            return Err(BadFlag(format!("config key `{key}` is not a flag of `{}`", cmd.get_name())).into());
        }
        return Ok(());
    };
    let flag = format!("--{long}");
    let takes_value = arg.get_action().takes_values();
    match v {
        Value::Boolean(b) if !takes_value => {
            if *b {
                out.push(flag);
            }
        }
        Value::Array(items) => {
            for item in items {
                out.push(flag.clone());
                out.push(scalar(key, item)?);
            }
        }
        _ => {
            out.push(flag);
            out.push(scalar(key, v)?);
        }
    }
    Ok(())
}

/// Tokens for subcommand `cmd` from the file at `path`.
pub fn tokens(path: &Path, cmd: &Command) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
    let table: Table = text.parse().with_context(|| format!("invalid config {}", path.display()))?;
    let mut out = Vec::new();
    for (key, v) in &table {
        if !matches!(v, Value::Table(_)) {
            push(cmd, key, v, false, &mut out)?;
        }
    }
    if let Some(Value::Table(section)) = table.get(cmd.get_name()) {
        for (key, v) in section {
            push(cmd, key, v, true, &mut out)?;
        }
    }
    Ok(out)
}
