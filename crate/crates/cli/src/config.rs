//! Campaign configuration: flags override a flat `key = value` file, which
//! overrides built-in defaults.
//!
//! The file format is one `key = value` pair per line; blank lines and lines
//! starting with `#` are ignored, and dashes in keys are read as underscores.
//! A JSON result record is also accepted, in which case its `config` echo is
//! used, so any record can be re-run from its own output.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde_json::{Map, Value};

use crate::CliError;

/// Seed used when neither a flag, the config file nor `HOLE_LAB_SEED` sets one.
pub const DEFAULT_SEED: u64 = 0;
pub const SEED_ENV: &str = "HOLE_LAB_SEED";

const KNOWN_KEYS: &[&str] = &[
    "command",
    "scope",
    "m",
    "n",
    "r",
    "k",
    "alpha",
    "lattice_n",
    "rho",
    "samples",
    "limit",
    "trials",
    "seed",
    "workers",
    "trial_start",
    "grid_res",
    "inject",
    "files",
];

#[derive(Debug, Default, Clone)]
pub struct FileConfig {
    values: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let values = if text.trim_start().starts_with('{') {
            from_record(&text)?
        } else {
            from_flat(&text)?
        };
        for key in values.keys() {
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::Usage(format!("unknown config key `{key}`")));
            }
        }
        Ok(FileConfig { values })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Rejects a file written for a different command.
    pub fn check_command(&self, command: &str) -> Result<(), CliError> {
        match self.raw("command") {
            Some(c) if c != command => Err(CliError::Usage(format!(
                "config was written for `{c}`, not `{command}`"
            ))),
            _ => Ok(()),
        }
    }

    /// `flag`, else the file value for `key` parsed by `parse`.
    pub fn pick<T>(
        &self,
        flag: Option<T>,
        key: &str,
        parse: fn(&str) -> Result<T, String>,
    ) -> Result<Option<T>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.raw(key) {
            Some(v) => parse(v)
                .map(Some)
                .map_err(|e| CliError::Usage(format!("config key `{key}`: {e}"))),
            None => Ok(None),
        }
    }

    pub fn require<T>(
        &self,
        flag: Option<T>,
        key: &str,
        parse: fn(&str) -> Result<T, String>,
    ) -> Result<T, CliError> {
        self.pick(flag, key, parse)?.ok_or_else(|| {
            CliError::Usage(format!(
                "missing required value `--{}`",
                key.replace('_', "-")
            ))
        })
    }

    /// Seed precedence: flag, config file, `HOLE_LAB_SEED`, then [`DEFAULT_SEED`].
    pub fn seed(&self, flag: Option<u64>) -> Result<u64, CliError> {
        if let Some(s) = self.pick(flag, "seed", parse_u64)? {
            return Ok(s);
        }
        match std::env::var(SEED_ENV) {
            Ok(v) => parse_u64(&v).map_err(|e| CliError::Usage(format!("{SEED_ENV}: {e}"))),
            Err(_) => Ok(DEFAULT_SEED),
        }
    }
}

fn from_flat(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("config line {}: expected `key = value`", no + 1))
        })?;
        let key = k.trim().replace('-', "_");
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(CliError::Usage(format!("config key `{key}` given twice")));
        }
    }
    Ok(out)
}

fn from_record(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let v: Value = serde_json::from_str(text)
        .map_err(|e| CliError::Usage(format!("config is not valid JSON: {e}")))?;
    let echo = v
        .get("config")
        .and_then(Value::as_object)
        .ok_or_else(|| CliError::Usage("JSON config needs a `config` object".into()))?;
    let mut out = BTreeMap::new();
    for (k, v) in echo {
        let s = match v {
            Value::String(s) => s.clone(),
            Value::Number(n) => n.to_string(),
            Value::Bool(b) => b.to_string(),
            Value::Array(items) => items
                .iter()
                .map(|i| match i {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect::<Vec<_>>()
                .join(","),
            Value::Null => continue,
            Value::Object(_) => {
                return Err(CliError::Usage(format!(
                    "config key `{k}` must be a scalar"
                )))
            }
        };
        out.insert(k.replace('-', "_"), s);
    }
    Ok(out)
}

/// Resolved settings echoed into every record.
#[derive(Debug, Default, Clone)]
pub struct Echo(Map<String, Value>);

impl Echo {
    pub fn new(command: &str) -> Self {
        let mut m = Map::new();
        m.insert("command".into(), Value::from(command));
        Echo(m)
    }

    pub fn set(&mut self, key: &str, v: impl Into<Value>) -> &mut Self {
        self.0.insert(key.into(), v.into());
        self
    }

    pub fn into_value(self) -> Value {
        Value::Object(self.0)
    }
}

pub fn parse_u64(s: &str) -> Result<u64, String> {
    s.trim().parse::<u64>().map_err(|e| format!("`{s}`: {e}"))
}

pub fn parse_usize(s: &str) -> Result<usize, String> {
    s.trim().parse::<usize>().map_err(|e| format!("`{s}`: {e}"))
}

pub fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|e| format!("`{s}`: {e}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

/// A count written as an integer or in exact scientific notation (`1e6`).
pub fn parse_count(s: &str) -> Result<u64, String> {
    let s = s.trim().replace('_', "");
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let (mant, exp) = s
        .split_once(['e', 'E'])
        .ok_or_else(|| format!("`{s}` is not a count"))?;
    let exp: u32 = exp
        .parse()
        .map_err(|_| format!("`{s}` has a bad exponent"))?;
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    let frac = frac.trim_end_matches('0');
    if frac.len() as u32 > exp {
        return Err(format!("`{s}` is not an integer"));
    }
    let digits = format!("{int}{frac}");
    let base: u64 = digits
        .parse()
        .map_err(|_| format!("`{s}` is not a count"))?;
    10u64
        .checked_pow(exp - frac.len() as u32)
        .and_then(|p| base.checked_mul(p))
        .ok_or_else(|| format!("`{s}` overflows"))
}

/// Comma-separated degrees; `a..b` and `a..=b` ranges are expanded.
pub fn parse_n_list(s: &str) -> Result<Vec<u64>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let (b, inclusive) = match b.strip_prefix('=') {
                Some(b) => (b, true),
                None => (b, false),
            };
            let a = parse_u64(a)?;
            let b = parse_u64(b)?;
            let end = if inclusive { b } else { b.saturating_sub(1) };
            if end < a {
                return Err(format!("empty range `{part}`"));
            }
            out.extend(a..=end);
        } else {
            out.push(parse_u64(part)?);
        }
    }
    if out.is_empty() {
        return Err("empty degree list".into());
    }
    Ok(out)
}

pub fn parse_f64_list(s: &str) -> Result<Vec<f64>, String> {
    let out: Vec<f64> = s
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(parse_f64)
        .collect::<Result<_, _>>()?;
    if out.is_empty() {
        return Err("empty list".into());
    }
    Ok(out)
}

pub fn parse_string(s: &str) -> Result<String, String> {
    Ok(s.trim().to_string())
}

/// Planted law `exp(-C*N^P)` for synthetic sweeps; returns `(C, P)`.
pub fn parse_inject(s: &str) -> Result<(f64, i32), String> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let body = compact
        .strip_prefix("exp(-")
        .and_then(|b| b.strip_suffix(')'))
        .ok_or_else(|| format!("`{s}`: expected exp(-C*N^P)"))?;
    let (c, p) = match body.split_once("*N") {
        Some((c, rest)) => match rest.strip_prefix('^') {
            Some(p) => (
                c,
                p.parse::<i32>().map_err(|_| format!("`{s}`: bad power"))?,
            ),
            None if rest.is_empty() => (c, 1),
            None => return Err(format!("`{s}`: expected exp(-C*N^P)")),
        },
        None => return Err(format!("`{s}`: expected exp(-C*N^P)")),
    };
    let c = parse_f64(c)?;
    if c <= 0.0 || p < 1 {
        return Err(format!("`{s}`: need C > 0 and P ≥ 1"));
    }
    Ok((c, p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(parse_count("1e6"), Ok(1_000_000));
        assert_eq!(parse_count("2.5e3"), Ok(2500));
        assert_eq!(parse_count("10_000"), Ok(10_000));
        assert!(parse_count("1.5e0").is_err());
        assert!(parse_count("1e30").is_err());
        assert!(parse_count("-3").is_err());
    }

    #[test]
    fn degree_lists() {
        assert_eq!(parse_n_list("2,3,4,5"), Ok(vec![2, 3, 4, 5]));
        assert_eq!(parse_n_list("2..=6"), Ok(vec![2, 3, 4, 5, 6]));
        assert_eq!(parse_n_list("2..4, 9"), Ok(vec![2, 3, 9]));
        assert!(parse_n_list("").is_err());
    }

    #[test]
    fn inject_forms() {
        assert_eq!(parse_inject("exp(-0.37*N^2)"), Ok((0.37, 2)));
        assert_eq!(parse_inject("exp(- 1.5 * N)"), Ok((1.5, 1)));
        assert!(parse_inject("exp(0.37*N^2)").is_err());
        assert!(parse_inject("0.37*N^2").is_err());
    }

    #[test]
    fn flat_file() {
        let c = from_flat("# campaign\nm = 1\nlattice-n=40\n\nr = 0.5\n").unwrap();
        assert_eq!(c.get("lattice_n").map(String::as_str), Some("40"));
        assert_eq!(c.get("r").map(String::as_str), Some("0.5"));
        assert!(from_flat("m 1").is_err());
        assert!(from_flat("m=1\nm=2").is_err());
    }

    #[test]
    fn record_echo() {
        let c =
            from_record(r#"{"config":{"command":"simulate","m":1,"r":0.75,"n":[2,3]}}"#).unwrap();
        assert_eq!(c.get("r").map(String::as_str), Some("0.75"));
        assert_eq!(c.get("n").map(String::as_str), Some("2,3"));
    }
}
