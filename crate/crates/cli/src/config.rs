//! Flat `key = value` config files. Keys are long flag names without the
//! leading dashes; the file's values are spliced in front of the command
//! line so explicit flags win.

use std::collections::HashSet;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

pub const SNAPSHOT_NAME: &str = "run.cfg";

pub fn parse(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key = value", i + 1))?;
        let key = k.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() {
            return Err(format!("config line {}: empty key", i + 1));
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter().skip(2);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

/// Inserts the values of the `--config` file, if any, right after the
/// subcommand name. Keys also given on the command line are dropped so that
/// list-valued flags are replaced rather than extended.
pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let pairs = parse(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let explicit: HashSet<String> = args[2..]
        .iter()
        .filter_map(|a| {
            let s = a.to_string_lossy();
            let flag = s.strip_prefix("--")?;
            Some(flag.split_once('=').map_or(flag, |(k, _)| k).to_string())
        })
        .collect();
    let mut out: Vec<OsString> = args[..2].to_vec();
    out.extend(
        pairs
            .into_iter()
            .filter(|(k, _)| !explicit.contains(k))
            .map(|(k, v)| OsString::from(format!("--{k}={v}"))),
    );
    out.extend(args[2..].iter().cloned());
    Ok(out)
}

fn render(v: &Value) -> Option<String> {
    match v {
        Value::Null => None,
        Value::String(s) => Some(s.clone()),
        Value::Array(items) => Some(
            items
                .iter()
                .filter_map(render)
                .collect::<Vec<_>>()
                .join(","),
        ),
        other => Some(other.to_string()),
    }
}

/// Serializes resolved arguments in the config-file format.
pub fn render_snapshot<T: Serialize>(command: &str, args: &T) -> Result<String, String> {
    let value = serde_json::to_value(args).map_err(|e| e.to_string())?;
    let Value::Object(map) = value else {
        return Err("arguments did not serialize to an object".into());
    };
    let mut out = format!("# repdetect {command}\n");
    for (k, v) in &map {
        if k == "config" {
            continue;
        }
        if let Some(s) = render(v) {
            out.push_str(&format!("{} = {s}\n", k.replace('_', "-")));
        }
    }
    Ok(out)
}

pub fn write_snapshot<T: Serialize>(command: &str, args: &T, path: &Path) -> Result<(), String> {
    let text = render_snapshot(command, args)?;
    let mut f = fs::File::create(path).map_err(|e| format!("{}: {e}", path.display()))?;
    f.write_all(text.as_bytes())
        .map_err(|e| format!("{}: {e}", path.display()))
}

/// Snapshot path for a command whose output is a single file.
pub fn snapshot_beside(output: &Path) -> PathBuf {
    let mut name = output
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(".run.cfg");
    output.with_file_name(name)
}
