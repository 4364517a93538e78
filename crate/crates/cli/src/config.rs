use std::fmt;
use std::path::Path;

use hocbf::sim::{fuzz_scenario, ScenarioConfig, SCENARIOS};
use hocbf::{Error, Mode};

/// A configuration problem, reported with exit code 1.
#[derive(Debug)]
pub struct ConfigError {
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for ConfigError {}

fn config_error(message: impl Into<String>) -> ConfigError {
    ConfigError { message: message.into() }
}

/// Where a scenario comes from and what overrides apply to it.
#[derive(Clone, Debug, Default)]
pub struct ScenarioSource {
    pub scenario: Option<String>,
    pub config: Option<std::path::PathBuf>,
    pub mode: Option<Mode>,
    pub seed: Option<u64>,
}

/// Builds the scenario. `fuzz` draws a randomized scenario from the seed.
pub fn resolve(source: &ScenarioSource) -> Result<ScenarioConfig, ConfigError> {
    let mut config = match (&source.config, source.scenario.as_deref()) {
        (Some(path), _) => load_file(path)?,
        (None, Some("fuzz")) => fuzz_scenario(
            source.seed.unwrap_or(0),
            source.mode.unwrap_or_default(),
        ),
        (None, Some(name)) => ScenarioConfig::named(name).ok_or_else(|| {
            config_error(format!(
                "unknown scenario `{name}`; known: {}, fuzz",
                SCENARIOS.join(", ")
            ))
        })?,
        (None, None) => ScenarioConfig::paper_sec4(),
    };
    if let Some(mode) = source.mode {
        config.mode = mode;
    }
    if let Some(seed) = source.seed {
        config.seed = seed;
    }
    config.validate().map_err(|e| config_error(e.to_string()))?;
    Ok(config)
}

pub fn load_file(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_error(format!("{}: {e}", path.display())))?;
    parse(&text).map_err(|e| config_error(format!("{}: {}", path.display(), e.message)))
}

/// Parses and validates a TOML scenario. Schema errors carry the line and
/// column from the parser; validation errors are located by key.
pub fn parse(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let config: ScenarioConfig = toml::from_str(text).map_err(|e| {
        let at = e
            .span()
            .map(|s| {
                let (line, col) = line_col(text, s.start);
                format!("line {line}, column {col}: ")
            })
            .unwrap_or_default();
        config_error(format!("{at}{}", e.message().trim_end()))
    })?;
    config.validate().map_err(|e| {
        let at = match &e {
            Error::InvalidParameter { name, .. } => locate(text, name)
                .map(|line| format!("line {line}: "))
                .unwrap_or_default(),
            _ => String::new(),
        };
        config_error(format!("{at}{e}"))
    })?;
    Ok(config)
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, col)
}

/// 1-based line of the key behind a dotted field name such as `limits.v`,
/// which also matches `v_min` and `v_max`.
fn locate(text: &str, field: &str) -> Option<usize> {
    let (section, key) = field.rsplit_once('.').unwrap_or(("", field));
    let mut current = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim().to_string();
            continue;
        }
        let Some((lhs, _)) = line.split_once('=') else { continue };
        let lhs = lhs.trim();
        let (sec, name) = match lhs.rsplit_once('.') {
            Some((s, n)) if current.is_empty() => (s.trim().to_string(), n.trim()),
            _ => (current.clone(), lhs),
        };
        let matches = name == key || name.strip_prefix(key).is_some_and(|r| r.starts_with('_'));
        if sec == section && matches {
            return Some(i + 1);
        }
    }
    None
}
