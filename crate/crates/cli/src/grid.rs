//! Parameter grids written as `start:stop:steps` or a single value.

use std::fmt;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context};
use serde::{Deserialize, Deserializer};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Grid {
    pub fn single(value: f64) -> Self {
        Self {
            start: value,
            stop: value,
            steps: 1,
        }
    }

    pub fn linspace(start: f64, stop: f64, steps: usize) -> Self {
        Self { start, stop, steps }
    }

    /// Evenly spaced points including both ends.
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| {
                if k + 1 == self.steps {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * k as f64 / last
                }
            })
            .collect()
    }

    pub fn validate(&self, name: &str) -> anyhow::Result<()> {
        if self.steps == 0 {
            bail!("{name} grid must have at least one step");
        }
        if !self.start.is_finite() || !self.stop.is_finite() {
            bail!("{name} grid bounds must be finite");
        }
        Ok(())
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.steps == 1 {
            write!(f, "{}", self.start)
        } else {
            write!(f, "{}:{}:{}", self.start, self.stop, self.steps)
        }
    }
}

/// A number, optionally written with `pi`: `0.5`, `pi`, `pi/4`, `2pi`,
/// `3*pi/8`, `-pi/2`.
pub fn parse_value(s: &str) -> anyhow::Result<f64> {
    let t = s.trim();
    let Some(at) = t.find("pi") else {
        return t.parse::<f64>().with_context(|| format!("invalid number `{s}`"));
    };
    let coeff = t[..at].trim_end_matches('*').trim();
    let coeff = match coeff {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().with_context(|| format!("invalid coefficient in `{s}`"))?,
    };
    let rest = t[at + 2..].trim();
    let div = if rest.is_empty() {
        1.0
    } else {
        let d = rest
            .strip_prefix('/')
            .ok_or_else(|| anyhow!("invalid angle `{s}`"))?;
        d.trim().parse::<f64>().with_context(|| format!("invalid divisor in `{s}`"))?
    };
    Ok(coeff * std::f64::consts::PI / div)
}

impl FromStr for Grid {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let grid = match parts.as_slice() {
            [v] => Grid::single(parse_value(v)?),
            [a, b, n] => Grid {
                start: parse_value(a)?,
                stop: parse_value(b)?,
                steps: n.trim().parse().with_context(|| format!("invalid step count in `{s}`"))?,
            },
            _ => bail!("expected `start:stop:steps` or a single value, got `{s}`"),
        };
        grid.validate("parameter")?;
        Ok(grid)
    }
}

impl<'de> Deserialize<'de> for Grid {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
            Range { start: f64, stop: f64, steps: usize },
        }
        let grid = match Raw::deserialize(deserializer)? {
            Raw::Number(v) => Grid::single(v),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom)?,
            Raw::Range { start, stop, steps } => Grid { start, stop, steps },
        };
        grid.validate("parameter").map_err(serde::de::Error::custom)?;
        Ok(grid)
    }
}
