//! Optional key=value run configuration and the default-seed chain.
//!
//! Precedence is always flag, then config file, then `HSSMLAB_SEED`, then
//! the built-in default of 42; non-seed keys fall back to per-command
//! defaults instead of the environment.

use std::env;
use std::fs;
use std::path::Path;

use crate::Failure;

pub const DEFAULT_SEED: u64 = 42;

/// Values a config file may pin. Every field stays `None` unless the file
/// names it, so commands can tell an explicit setting from a default.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Config {
    pub seed: Option<u64>,
    pub depth: Option<u32>,
    pub repeats: Option<u32>,
    pub budget: Option<u64>,
    pub lambda: Option<f64>,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Config, Failure> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let text = fs::read_to_string(path).map_err(|err| {
            if err.kind() == std::io::ErrorKind::NotFound {
                Failure::MissingInput(format!("config file {}: not found", path.display()))
            } else {
                Failure::Runtime(format!("config file {}: {err}", path.display()))
            }
        })?;
        Config::parse(&text)
            .map_err(|msg| Failure::Usage(format!("config file {}: {msg}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Config, String> {
        let mut cfg = Config::default();
        for (index, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let lineno = index + 1;
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {lineno}: expected key = value, got `{line}`"))?;
            let value = value.trim();
            match key.trim() {
                "seed" => cfg.seed = Some(parse_value(lineno, "seed", value)?),
                "depth" => cfg.depth = Some(parse_value(lineno, "depth", value)?),
                "repeats" => cfg.repeats = Some(parse_value(lineno, "repeats", value)?),
                "budget" => cfg.budget = Some(parse_value(lineno, "budget", value)?),
                "lambda" => cfg.lambda = Some(parse_value(lineno, "lambda", value)?),
                other => return Err(format!("line {lineno}: unknown key `{other}`")),
            }
        }
        Ok(cfg)
    }

    /// Resolves the run seed from the flag, this config, and the
    /// environment, in that order.
    pub fn seed(&self, flag: Option<u64>) -> Result<u64, Failure> {
        let env_value = match env::var("HSSMLAB_SEED") {
            Ok(text) => Some(text),
            Err(env::VarError::NotPresent) => None,
            Err(env::VarError::NotUnicode(_)) => {
                return Err(Failure::Usage(
                    "HSSMLAB_SEED is not valid unicode".to_string(),
                ))
            }
        };
        resolve_seed(flag, self.seed, env_value.as_deref()).map_err(Failure::Usage)
    }
}

fn parse_value<T: std::str::FromStr>(lineno: usize, key: &str, value: &str) -> Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("line {lineno}: invalid {key} value `{value}`"))
}

fn resolve_seed(
    flag: Option<u64>,
    config: Option<u64>,
    env_value: Option<&str>,
) -> Result<u64, String> {
    if let Some(seed) = flag.or(config) {
        return Ok(seed);
    }
    match env_value {
        Some(text) => text
            .trim()
            .parse()
            .map_err(|_| format!("HSSMLAB_SEED must be an unsigned integer, got `{text}`")),
        None => Ok(DEFAULT_SEED),
    }
}
