use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::CliError;

pub const SEED_ENV: &str = "SENTOPIC_SEED";

/// Resolves options as command line, then config file, then default, and
/// records every resolved value for artifact headers.
#[derive(Debug, Default)]
pub struct Settings {
    file: BTreeMap<String, String>,
    resolved: BTreeMap<String, String>,
}

/// Parses a flat `key=value` file; blank lines and `#` comments are ignored.
pub fn parse_config(text: &str, path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("{}:{}: expected key=value", path.display(), i + 1))
        })?;
        out.insert(k.trim().replace('_', "-"), v.trim().to_string());
    }
    Ok(out)
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let file = match path {
            None => BTreeMap::new(),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?;
                parse_config(&text, p)?
            }
        };
        Ok(Settings {
            file,
            resolved: BTreeMap::new(),
        })
    }

    fn from_file<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: Display,
    {
        match self.file.get(key) {
            None => Ok(None),
            Some(s) => s
                .parse()
                .map(Some)
                .map_err(|e| CliError::Usage(format!("config key {key}: {e}"))),
        }
    }

    pub fn record(&mut self, key: &str, value: impl Display) {
        self.resolved.insert(key.to_string(), value.to_string());
    }

    pub fn opt<T: FromStr + Display>(&mut self, key: &str, cli: Option<T>) -> Result<Option<T>, CliError>
    where
        T::Err: Display,
    {
        let v = match cli {
            Some(v) => Some(v),
            None => self.from_file(key)?,
        };
        if let Some(v) = &v {
            self.record(key, v);
        }
        Ok(v)
    }

    pub fn value<T: FromStr + Display>(&mut self, key: &str, cli: Option<T>, default: T) -> Result<T, CliError>
    where
        T::Err: Display,
    {
        let v = self.opt(key, cli)?.unwrap_or(default);
        self.record(key, &v);
        Ok(v)
    }

    pub fn required<T: FromStr + Display>(&mut self, key: &str, cli: Option<T>) -> Result<T, CliError>
    where
        T::Err: Display,
    {
        self.opt(key, cli)?
            .ok_or_else(|| CliError::Usage(format!("missing required option --{key}")))
    }

    /// A path that must already exist.
    pub fn input(&mut self, key: &str, cli: Option<PathBuf>) -> Result<PathBuf, CliError> {
        let p = self.path(key, cli)?;
        if !p.exists() {
            return Err(CliError::Usage(format!("--{key}: {} does not exist", p.display())));
        }
        Ok(p)
    }

    pub fn path(&mut self, key: &str, cli: Option<PathBuf>) -> Result<PathBuf, CliError> {
        let p = cli.or_else(|| self.file.get(key).map(PathBuf::from));
        let p = p.ok_or_else(|| CliError::Usage(format!("missing required option --{key}")))?;
        self.record(key, p.display());
        Ok(p)
    }

    pub fn opt_path(&mut self, key: &str, cli: Option<PathBuf>) -> Option<PathBuf> {
        let p = cli.or_else(|| self.file.get(key).map(PathBuf::from));
        if let Some(p) = &p {
            self.record(key, p.display());
        }
        p
    }

    /// Command line, then config file, then `SENTOPIC_SEED`, then 0.
    pub fn seed(&mut self, cli: Option<u64>) -> Result<u64, CliError> {
        let seed = match cli {
            Some(s) => s,
            None => match self.from_file("seed")? {
                Some(s) => s,
                None => match std::env::var(SEED_ENV) {
                    Ok(s) => s
                        .trim()
                        .parse()
                        .map_err(|e| CliError::Usage(format!("{SEED_ENV}: {e}")))?,
                    Err(_) => 0,
                },
            },
        };
        self.record("seed", seed);
        Ok(seed)
    }

    /// `key=value` lines of every resolved option.
    pub fn render(&self) -> String {
        self.resolved.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    /// The resolved options as `# key=value` comment lines.
    pub fn header(&self) -> String {
        self.resolved.iter().map(|(k, v)| format!("# {k}={v}\n")).collect()
    }
}
