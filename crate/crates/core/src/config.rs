//! Flat `key = value` configuration files.

use std::str::FromStr;

use crate::error::{Error, Result};

/// One `key = value` line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Setting {
    pub key: String,
    pub value: String,
    /// 1-based line in the source text.
    pub line: usize,
}

/// Parses `key = value` lines. Blank lines and lines starting with `#` are
/// skipped. A key may appear only once.
pub fn parse_settings(text: &str, source: &str) -> Result<Vec<Setting>> {
    let mut out: Vec<Setting> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "{source}:{}: expected `key = value`",
                i + 1
            )));
        };
        let key = key.trim().to_string();
        if key.is_empty() {
            return Err(Error::Config(format!("{source}:{}: empty key", i + 1)));
        }
        if let Some(prev) = out.iter().find(|s| s.key == key) {
            return Err(Error::Config(format!(
                "{source}:{}: `{key}` already set on line {}",
                i + 1,
                prev.line
            )));
        }
        out.push(Setting {
            key,
            value: value.trim().to_string(),
            line: i + 1,
        });
    }
    Ok(out)
}

/// Parses one value, naming the key on failure.
pub fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{value}`")))
}

/// Parses `true`/`false` (also `1`/`0`, `yes`/`no`, `on`/`off`).
pub fn parse_flag(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(Error::Config(format!(
            "`{key}`: expected true or false, got `{value}`"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_skips_comments() {
        let s = parse_settings("# header\n\nseed = 7\n n_months=48 \n", "cfg").unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(
            (s[1].key.as_str(), s[1].value.as_str(), s[1].line),
            ("n_months", "48", 4)
        );
    }

    #[test]
    fn rejects_duplicates_and_garbage() {
        assert!(parse_settings("a=1\na=2\n", "cfg").is_err());
        let err = parse_settings("just words\n", "cfg")
            .unwrap_err()
            .to_string();
        assert!(err.contains("cfg:1"), "{err}");
    }

    #[test]
    fn values() {
        assert_eq!(parse_value::<u32>("k", " 12 ").unwrap(), 12);
        assert!(parse_value::<u32>("k", "x").is_err());
        assert!(parse_flag("k", "on").unwrap());
    }
}
