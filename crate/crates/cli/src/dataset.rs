//! Single-column observation files.

use std::path::Path;

use anyhow::{bail, Context, Result};
use xlindley::CensoredSample;

/// Bundled bearing fatigue lives, in hours.
pub const FATIGUE_CSV: &str = include_str!("../../../data/fatigue.csv");

/// Observations parsed from one column, in file order. A non-numeric first
/// line is taken as a header; blank lines and `#` comments are skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub label: Option<String>,
    pub values: Vec<f64>,
}

impl Dataset {
    pub fn parse(text: &str) -> Result<Self> {
        let mut label = None;
        let mut values = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line.contains(',') {
                bail!("line {}: expected a single column, found '{line}'", i + 1);
            }
            match line.parse::<f64>() {
                Ok(x) if x.is_finite() => values.push(x),
                Ok(_) => bail!("line {}: non-finite value '{line}'", i + 1),
                Err(_) if values.is_empty() && label.is_none() => label = Some(line.trim_matches('"').to_string()),
                Err(_) => bail!("line {}: cannot parse '{line}' as a number", i + 1),
            }
        }
        if values.is_empty() {
            bail!("no observations found");
        }
        Ok(Self { label, values })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn fatigue() -> Self {
        Self::parse(FATIGUE_CSV).expect("bundled data parses")
    }

    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => Self::read(p),
            None => Ok(Self::fatigue()),
        }
    }

    /// Sorted sample of the smallest `n − m` order statistics. With `n`
    /// omitted the file holds every observed value and `n = len + m`.
    pub fn sample(&self, n: Option<usize>, m: usize) -> Result<CensoredSample> {
        let n = n.unwrap_or(self.values.len() + m);
        let observed = n.checked_sub(m).filter(|&k| k >= 1).with_context(|| format!("m={m} exceeds n={n}"))?;
        if self.values.len() < observed {
            bail!("file has {} observations, but n={n}, m={m} needs {observed}", self.values.len());
        }
        let mut values = self.values.clone();
        let (sample, resorted) = if values.len() == observed {
            CensoredSample::from_unsorted(values, n, m)?
        } else {
            // Keep the smallest n − m values when the file holds a complete sample.
            let sorted = values.windows(2).all(|w| w[0] <= w[1]);
            values.sort_by(f64::total_cmp);
            values.truncate(observed);
            (CensoredSample::new(values, n, m)?, !sorted)
        };
        if resorted {
            eprintln!("warning: observations were not in ascending order and have been sorted");
        }
        Ok(sample)
    }
}
