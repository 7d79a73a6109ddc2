//! `--config FILE`: a JSON object whose keys are flag names. Values are
//! appended as flags unless the same flag already appears on the command line.

use std::ffi::OsString;

use crate::CliError;

fn flag_present(argv: &[OsString], flag: &str) -> bool {
    let eq = format!("{flag}=");
    argv.iter().any(|a| {
        let a = a.to_string_lossy();
        a == flag || a.starts_with(&eq)
    })
}

fn config_path(argv: &[OsString]) -> Option<OsString> {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.to_str().and_then(|s| s.strip_prefix("--config=")) {
            return Some(p.into());
        }
    }
    None
}

fn scalar(v: &serde_json::Value) -> Option<String> {
    match v {
        serde_json::Value::String(s) => Some(s.clone()),
        serde_json::Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

pub fn merge_config(mut argv: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(&path).map_err(|source| CliError::Io {
        path: path.clone().into(),
        source,
    })?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("config file: {e}")))?;
    let obj = value
        .as_object()
        .ok_or_else(|| CliError::Validation("config file must hold a JSON object".into()))?;
    for (key, v) in obj {
        let flag = format!("--{}", key.replace('_', "-"));
        if flag == "--config" || flag_present(&argv, &flag) {
            continue;
        }
        let value = match v {
            serde_json::Value::Bool(true) => {
                argv.push(flag.into());
                continue;
            }
            serde_json::Value::Bool(false) | serde_json::Value::Null => continue,
            serde_json::Value::Array(items) => {
                let parts: Option<Vec<String>> = items.iter().map(scalar).collect();
                parts
                    .ok_or_else(|| {
                        CliError::Validation(format!(
                            "config key {key:?}: list of scalars expected"
                        ))
                    })?
                    .join(",")
            }
            other => scalar(other).ok_or_else(|| {
                CliError::Validation(format!("config key {key:?}: unsupported value"))
            })?,
        };
        argv.push(flag.into());
        argv.push(value.into());
    }
    Ok(argv)
}
