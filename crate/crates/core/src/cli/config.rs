//! Run configuration: flat `key=value` files merged with command-line flags.
//!
//! Keys are exactly the long flag names. Every value remembers where it came
//! from so `--show-config` style diagnostics can explain a run.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::dynamics::Dynamics;
use crate::experiments::Metric;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("line {line}: unknown key '{key}'")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key '{key}'")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: expected key=value, got '{text}'")]
    Malformed { line: usize, text: String },
    #[error("line {line}: {message}")]
    BadValue { line: usize, message: String },
    #[error("--{key}: {message}")]
    BadFlag { key: String, message: String },
    #[error("missing required parameter --{0}")]
    Missing(&'static str),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Real,
    Count,
    Text,
    Mode,
    Metric,
    Format,
    Method,
    Engine,
    CountList,
}

/// Every recognized key with its value kind and default.
const KEYS: &[(&str, Kind, Option<&str>)] = &[
    ("omega", Kind::Real, Some("2")),
    ("alpha1", Kind::Real, Some("0")),
    ("alpha2", Kind::Real, Some("0")),
    ("bath-size", Kind::Count, None),
    ("theta", Kind::Real, Some("1.5707963267948966")),
    ("phi", Kind::Real, Some("0")),
    ("t-start", Kind::Real, Some("0")),
    ("t-end", Kind::Real, Some("50")),
    ("steps", Kind::Count, None),
    ("sampling", Kind::Real, Some("100")),
    ("mode", Kind::Mode, Some("physical")),
    ("engine", Kind::Engine, Some("analytic")),
    ("method", Kind::Method, Some("closed-form")),
    ("n-theta", Kind::Count, Some("61")),
    ("n-phi", Kind::Count, Some("61")),
    ("theta-min", Kind::Real, Some("0.05")),
    ("theta-max", Kind::Real, Some("3.0915926535897933")),
    ("metric", Kind::Metric, Some("mean-dist-to-unitary")),
    ("bath-sizes", Kind::CountList, None),
    ("format", Kind::Format, Some("csv")),
    ("output", Kind::Text, None),
    ("oracle-cap", Kind::Count, Some("4")),
];

fn kind_of(key: &str) -> Option<Kind> {
    KEYS.iter().find(|(k, _, _)| *k == key).map(|(_, kind, _)| *kind)
}

fn check_value(kind: Kind, value: &str) -> Result<(), String> {
    match kind {
        Kind::Real => value
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(|_| ())
            .ok_or_else(|| format!("'{value}' is not a finite number")),
        Kind::Count => value.parse::<u32>().map(|_| ()).map_err(|_| format!("'{value}' is not a non-negative integer")),
        Kind::CountList => value
            .split(',')
            .try_for_each(|v| v.trim().parse::<u32>().map(|_| ()))
            .map_err(|_| format!("'{value}' is not a comma-separated list of integers")),
        Kind::Mode => value.parse::<Dynamics>().map(|_| ()),
        Kind::Metric => value.parse::<Metric>().map(|_| ()),
        Kind::Format => match value {
            "csv" | "json" => Ok(()),
            _ => Err(format!("unknown format '{value}' (expected csv or json)")),
        },
        Kind::Method => match value {
            "all" => Ok(()),
            other => other.parse::<crate::phase::GpMethod>().map(|_| ()),
        },
        Kind::Engine => match value {
            "analytic" | "oracle" => Ok(()),
            _ => Err(format!("unknown engine '{value}' (expected analytic or oracle)")),
        },
        Kind::Text => Ok(()),
    }
}

/// Where a setting came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Default,
    File,
    Flag,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Default => "default",
            Source::File => "file",
            Source::Flag => "flag",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Setting {
    pub value: String,
    pub source: Source,
}

/// Resolved settings keyed by flag name; values are stored validated but
/// unparsed so they serialize back exactly.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RunConfig {
    settings: BTreeMap<&'static str, Setting>,
}

impl RunConfig {
    pub fn defaults() -> Self {
        let settings = KEYS
            .iter()
            .filter_map(|(k, _, d)| d.map(|d| (*k, Setting { value: d.to_string(), source: Source::Default })))
            .collect();
        RunConfig { settings }
    }

    fn static_key(key: &str) -> Option<&'static str> {
        KEYS.iter().find(|(k, _, _)| *k == key).map(|(k, _, _)| *k)
    }

    /// Sets a value given on the command line.
    pub fn set_flag(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let bad = |message: String| ConfigError::BadFlag { key: key.to_string(), message };
        let k = Self::static_key(key).ok_or_else(|| bad("unknown flag".into()))?;
        check_value(kind_of(k).expect("known key"), value).map_err(bad)?;
        self.settings.insert(k, Setting { value: value.to_string(), source: Source::Flag });
        Ok(())
    }

    /// Parses `key=value` lines on top of the current settings.
    pub fn merge_text(&mut self, text: &str) -> Result<(), ConfigError> {
        let mut seen = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::Malformed { line, text: raw.to_string() });
            };
            let (key, value) = (key.trim(), value.trim());
            let k = Self::static_key(key).ok_or_else(|| ConfigError::UnknownKey { line, key: key.to_string() })?;
            if seen.contains(&k) {
                return Err(ConfigError::DuplicateKey { line, key: key.to_string() });
            }
            seen.push(k);
            check_value(kind_of(k).expect("known key"), value)
                .map_err(|message| ConfigError::BadValue { line, message: format!("{key}: {message}") })?;
            self.settings.insert(k, Setting { value: value.to_string(), source: Source::File });
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::defaults();
        cfg.merge_text(text)?;
        Ok(cfg)
    }

    /// One `key=value` line per setting, in key order.
    pub fn serialize(&self) -> String {
        self.settings.iter().map(|(k, s)| format!("{k}={}\n", s.value)).collect()
    }

    /// The values without their provenance.
    pub fn values(&self) -> BTreeMap<&'static str, &str> {
        self.settings.iter().map(|(k, s)| (*k, s.value.as_str())).collect()
    }

    pub fn setting(&self, key: &str) -> Option<&Setting> {
        self.settings.get(key)
    }

    pub fn text(&self, key: &'static str) -> Option<&str> {
        self.settings.get(key).map(|s| s.value.as_str())
    }

    pub fn real(&self, key: &'static str) -> Result<f64, ConfigError> {
        let v = self.text(key).ok_or(ConfigError::Missing(key))?;
        Ok(v.parse().expect("validated on insert"))
    }

    pub fn count(&self, key: &'static str) -> Result<u32, ConfigError> {
        let v = self.text(key).ok_or(ConfigError::Missing(key))?;
        Ok(v.parse().expect("validated on insert"))
    }

    pub fn optional_count(&self, key: &'static str) -> Option<u32> {
        self.text(key).map(|v| v.parse().expect("validated on insert"))
    }

    pub fn count_list(&self, key: &'static str) -> Option<Vec<u32>> {
        self.text(key).map(|v| v.split(',').map(|x| x.trim().parse().expect("validated on insert")).collect())
    }

    pub fn mode(&self) -> Dynamics {
        self.text("mode").and_then(|m| m.parse().ok()).unwrap_or(Dynamics::Physical)
    }

    pub fn metric(&self) -> Metric {
        self.text("metric").and_then(|m| m.parse().ok()).unwrap_or(Metric::MeanDistToUnitary)
    }
}

/// Reads a configuration file over the defaults.
pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Io { path: path.display().to_string(), message: e.to_string() })?;
    RunConfig::from_text(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_matches_equivalent_flags() {
        let file = RunConfig::from_text("omega=2\nalpha1=0.25\nalpha2=0.25\nbath-size=4").unwrap();
        let mut flags = RunConfig::defaults();
        for (k, v) in [("omega", "2"), ("alpha1", "0.25"), ("alpha2", "0.25"), ("bath-size", "4")] {
            flags.set_flag(k, v).unwrap();
        }
        assert_eq!(file.values(), flags.values());
        assert_eq!(file.setting("alpha1").unwrap().source, Source::File);
        assert_eq!(file.setting("phi").unwrap().source, Source::Default);
    }

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(RunConfig::from_text("").unwrap(), RunConfig::defaults());
        assert_eq!(RunConfig::from_text("# only a comment\n\n").unwrap(), RunConfig::defaults());
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert!(matches!(RunConfig::from_text("omega=abc"), Err(ConfigError::BadValue { line: 1, .. })));
        assert_eq!(
            RunConfig::from_text("omega=1\nspeed=3"),
            Err(ConfigError::UnknownKey { line: 2, key: "speed".into() })
        );
        assert_eq!(
            RunConfig::from_text("omega=1\n# c\nomega=2"),
            Err(ConfigError::DuplicateKey { line: 3, key: "omega".into() })
        );
        assert!(matches!(RunConfig::from_text("\nomega 2"), Err(ConfigError::Malformed { line: 2, .. })));
    }

    #[test]
    fn flags_override_file() {
        let mut cfg = RunConfig::from_text("omega=3 # inline comment").unwrap();
        assert_eq!(cfg.real("omega").unwrap(), 3.0);
        cfg.set_flag("omega", "1.5").unwrap();
        assert_eq!(cfg.real("omega").unwrap(), 1.5);
        assert_eq!(cfg.setting("omega").unwrap().source, Source::Flag);
        assert!(cfg.set_flag("omega", "fast").is_err());
        assert!(cfg.set_flag("warp", "1").is_err());
    }

    #[test]
    fn missing_bath_size_is_reported() {
        assert_eq!(RunConfig::defaults().count("bath-size"), Err(ConfigError::Missing("bath-size")));
    }
}
