//! Flat `key=value` run configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{HnsError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    QuadCheck,
    Solve,
    Inverse,
    Fdm,
    Table,
    Kernels,
}

const OUTPUT_KEYS: &[&str] = &["out_dir", "out_csv", "threads"];
const TRAINING_KEYS: &[&str] = &["seed", "iters", "grad_tol", "test_points"];

impl Command {
    pub const ALL: [Command; 6] =
        [Command::QuadCheck, Command::Solve, Command::Inverse, Command::Fdm, Command::Table, Command::Kernels];

    pub fn name(self) -> &'static str {
        match self {
            Command::QuadCheck => "quad-check",
            Command::Solve => "solve",
            Command::Inverse => "inverse",
            Command::Fdm => "fdm",
            Command::Table => "table",
            Command::Kernels => "kernels",
        }
    }

    fn own_keys(self) -> &'static [&'static str] {
        match self {
            Command::QuadCheck => &["alphas", "ps", "n_list"],
            Command::Solve => &["problem", "alpha", "p", "mt", "mx", "nb", "trace_csv", "checkpoint"],
            Command::Inverse => &["problem", "alpha", "p", "mt", "mx", "nb", "trace_csv", "unknowns", "init"],
            Command::Fdm => &["alpha", "mt_list"],
            Command::Table => &["table", "scale"],
            Command::Kernels => &["alphas", "ps", "lags"],
        }
    }

    fn trains(self) -> bool {
        matches!(self, Command::Solve | Command::Inverse | Command::Table)
    }

    pub fn required_keys(self) -> &'static [&'static str] {
        match self {
            Command::Solve | Command::Inverse => &["problem"],
            Command::Table => &["table"],
            _ => &[],
        }
    }

    fn accepts(self, key: &str) -> bool {
        self.own_keys().contains(&key) || OUTPUT_KEYS.contains(&key) || (self.trains() && TRAINING_KEYS.contains(&key))
    }

    /// Every key this command understands.
    pub fn keys(self) -> Vec<&'static str> {
        let mut keys: Vec<&str> = self.own_keys().to_vec();
        if self.trains() {
            keys.extend_from_slice(TRAINING_KEYS);
        }
        keys.extend_from_slice(OUTPUT_KEYS);
        keys
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = HnsError;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| HnsError::Config(format!("unknown command {s:?}")))
    }
}

/// Validated key/value settings for one command.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    values: BTreeMap<String, String>,
}

impl RunConfig {
    /// Merge a config file body (one `key=value` per line, `#` comments)
    /// with command-line pairs; later settings win.
    pub fn parse(command: Command, file: Option<&str>, pairs: &[String]) -> Result<Self> {
        let mut values = BTreeMap::new();
        let file_lines = file.into_iter().flat_map(str::lines).enumerate().map(|(i, l)| (Some(i + 1), l));
        let arg_lines = pairs.iter().map(|p| (None, p.as_str()));
        for (line_no, raw) in file_lines.chain(arg_lines) {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                let at = line_no.map(|n| format!(" on line {n}")).unwrap_or_default();
                HnsError::Config(format!("expected key=value{at}, got {line:?}"))
            })?;
            let key = key.trim();
            if !command.accepts(key) {
                return Err(HnsError::Config(format!(
                    "unknown key `{key}` for `{command}` (accepted: {})",
                    command.keys().join(", ")
                )));
            }
            values.insert(key.to_string(), value.trim().to_string());
        }
        for key in command.required_keys() {
            if !values.contains_key(*key) {
                return Err(HnsError::Config(format!("missing required key `{key}` for `{command}`")));
            }
        }
        Ok(Self { command, values })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        self.raw(key)
            .map(|v| v.parse::<T>().map_err(|e| HnsError::Config(format!("key `{key}`: cannot parse {v:?}: {e}"))))
            .transpose()
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        self.get(key)?.ok_or_else(|| HnsError::Config(format!("missing required key `{key}`")))
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: fmt::Display,
    {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<T>().map_err(|e| HnsError::Config(format!("key `{key}`: cannot parse {s:?}: {e}"))))
                    .collect()
            })
            .transpose()
    }
}
