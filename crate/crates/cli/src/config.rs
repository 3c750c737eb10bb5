//! `key=value` configuration files with `#` comments. Keys are flag names
//! without the leading dashes.

use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("config line {line}: expected key=value")]
    Syntax { line: usize },
}

pub fn parse(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
        let k = k.trim();
        if k.is_empty() {
            return Err(ConfigError::Syntax { line: i + 1 });
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

pub fn load(path: &Path) -> Result<Vec<(String, String)>, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    parse(&text)
}

/// Rewrites `argv` so that the entries of any `--config FILE` become flags
/// placed right after the subcommand, ahead of the explicit flags (which
/// therefore take precedence).
pub fn expand_args(argv: Vec<String>) -> Result<Vec<String>, ConfigError> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut files = Vec::new();
    let mut it = argv.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            if let Some(path) = it.next() {
                files.push(path);
                continue;
            }
            rest.push(a);
        } else if let Some(path) = a.strip_prefix("--config=") {
            files.push(path.to_string());
        } else {
            rest.push(a);
        }
    }
    if files.is_empty() {
        return Ok(rest);
    }
    let mut injected = Vec::new();
    for f in files {
        for (k, v) in load(Path::new(&f))? {
            if v.eq_ignore_ascii_case("true") {
                injected.push(format!("--{k}"));
            } else {
                injected.push(format!("--{k}={v}"));
            }
        }
    }
    // argv[0] is the program, argv[1] the subcommand
    let split = rest.len().min(2);
    let mut out: Vec<String> = rest[..split].to_vec();
    out.extend(injected);
    out.extend_from_slice(&rest[split..]);
    Ok(out)
}
