//! The summary line printed last by every run:
//!
//! ```text
//! RESULT <subcommand> <pass|fail> [<tag>] [<key>=<value> ...]
//! ```
//!
//! Fields are separated by single spaces. The tag, when present, names the failure
//! (`divergent-volume`, `budget-infeasible`, `error`, ...) and contains no `=`. Keys are
//! lowercase ASCII words with underscores; values are non-empty and contain no whitespace.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::config::Command;

#[derive(Debug, Clone, PartialEq)]
pub struct ResultLine {
    pub command: Command,
    pub pass: bool,
    pub tag: Option<String>,
    pub metrics: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed RESULT line: {0}")]
pub struct ResultParseError(String);

impl ResultLine {
    pub fn pass(command: Command) -> Self {
        Self {
            command,
            pass: true,
            tag: None,
            metrics: Vec::new(),
        }
    }

    pub fn fail(command: Command, tag: &str) -> Self {
        Self {
            command,
            pass: false,
            tag: Some(tag.to_string()),
            metrics: Vec::new(),
        }
    }

    pub fn metric(mut self, key: &str, value: impl MetricValue) -> Self {
        debug_assert!(valid_key(key), "bad metric key {key}");
        let v = value.render().replace(char::is_whitespace, "_");
        self.metrics.push((key.to_string(), v));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.metrics.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

/// Rendering of metric values. Floats use the shortest text that parses back to the same
/// number, in exponent form when very small or large.
pub trait MetricValue {
    fn render(&self) -> String;
}

impl MetricValue for f64 {
    fn render(&self) -> String {
        let a = self.abs();
        if a != 0.0 && a.is_finite() && !(1e-4..1e9).contains(&a) {
            format!("{self:e}")
        } else {
            self.to_string()
        }
    }
}

macro_rules! display_metric {
    ($($t:ty),+) => {
        $(impl MetricValue for $t {
            fn render(&self) -> String {
                self.to_string()
            }
        })+
    };
}

display_metric!(usize, u64, u32, bool, &str, String);

fn valid_key(k: &str) -> bool {
    !k.is_empty() && k.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

fn valid_tag(t: &str) -> bool {
    !t.is_empty() && t.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-')
}

impl fmt::Display for ResultLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RESULT {} {}", self.command, if self.pass { "pass" } else { "fail" })?;
        if let Some(t) = &self.tag {
            write!(f, " {t}")?;
        }
        for (k, v) in &self.metrics {
            write!(f, " {k}={v}")?;
        }
        Ok(())
    }
}

impl FromStr for ResultLine {
    type Err = ResultParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |m: String| ResultParseError(m);
        let mut fields = s.split(' ');
        if fields.next() != Some("RESULT") {
            return Err(bad("does not start with `RESULT`".into()));
        }
        let command: Command = fields
            .next()
            .ok_or_else(|| bad("missing subcommand".into()))?
            .parse()
            .map_err(bad)?;
        let pass = match fields.next() {
            Some("pass") => true,
            Some("fail") => false,
            other => return Err(bad(format!("expected pass or fail, found {other:?}"))),
        };
        let mut line = Self {
            command,
            pass,
            tag: None,
            metrics: Vec::new(),
        };
        for (i, field) in fields.enumerate() {
            match field.split_once('=') {
                Some((k, v)) => {
                    if !valid_key(k) || v.is_empty() || v.contains(char::is_whitespace) {
                        return Err(bad(format!("bad metric `{field}`")));
                    }
                    line.metrics.push((k.to_string(), v.to_string()));
                }
                None if i == 0 && valid_tag(field) => line.tag = Some(field.to_string()),
                None => return Err(bad(format!("unexpected field `{field}`"))),
            }
        }
        Ok(line)
    }
}
