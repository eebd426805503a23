//! Seeded, thread-count independent Monte Carlo: pivotal quantile tables and
//! the estimator/predictor simulation study.

mod pivotal;
mod quantile;
mod rng;
mod study;
mod table;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use pivotal::{simulate_pivotal_draws, simulate_pivotal_quantiles, PivotalConfig, PivotalDraws, PivotalSeries};
pub use quantile::{bootstrap_quantile_se, empirical_quantile};
pub use rng::StreamFactory;
pub use study::{run_simulation_study, IntervalSummary, PredictionSummary, SimulationReport, StudyConfig};
pub use table::{QuantileEntry, QuantileTable, QUANTILE_FORMAT_VERSION};

use crate::distribution::{sample_standard, XlParams};
use crate::error::{Error, Result};
use crate::estimation::CensoredSample;

/// Quantile levels tabulated by default.
pub const DEFAULT_TAUS: [f64; 4] = [0.025, 0.05, 0.95, 0.975];

/// Smallest replication count accepted for quantile tables.
pub const MIN_REPLICATIONS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PivotalKind {
    /// `(φ̂ − φ) / (σ̂ √V1)`
    #[serde(rename = "T1")]
    LocationBlue,
    /// `(σ̂ − σ) / (σ √V2)`
    #[serde(rename = "T2")]
    ScaleBlue,
    /// `(φ̃ − φ) / (σ̃ √(V1 − V3²(2+V2)/(1+V2)²))`
    #[serde(rename = "T3")]
    LocationBlie,
    /// `(σ̃ − σ)(1 + V2) / (σ √V2)`
    #[serde(rename = "T4")]
    ScaleBlie,
    /// `(X_q − X_{n−m}) / σ̂`
    #[serde(rename = "T1*")]
    PredictionBlue,
    /// `(X_q − X_{n−m}) / σ̃`
    #[serde(rename = "T2*")]
    PredictionBlie,
}

impl PivotalKind {
    pub const ALL: [PivotalKind; 6] = [
        PivotalKind::LocationBlue,
        PivotalKind::ScaleBlue,
        PivotalKind::LocationBlie,
        PivotalKind::ScaleBlie,
        PivotalKind::PredictionBlue,
        PivotalKind::PredictionBlie,
    ];

    pub fn label(self) -> &'static str {
        match self {
            PivotalKind::LocationBlue => "T1",
            PivotalKind::ScaleBlue => "T2",
            PivotalKind::LocationBlie => "T3",
            PivotalKind::ScaleBlie => "T4",
            PivotalKind::PredictionBlue => "T1*",
            PivotalKind::PredictionBlie => "T2*",
        }
    }

    pub fn is_prediction(self) -> bool {
        matches!(self, PivotalKind::PredictionBlue | PivotalKind::PredictionBlie)
    }
}

impl std::fmt::Display for PivotalKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for PivotalKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        PivotalKind::ALL
            .into_iter()
            .find(|k| k.label().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parse(format!("unknown pivotal kind '{s}'")))
    }
}

/// Draw `n` variates, sort, keep the smallest `n - m`.
pub fn sample_censored<R: Rng + ?Sized>(n: usize, m: usize, params: &XlParams, rng: &mut R) -> Result<CensoredSample> {
    let full = sample_ordered(n, params.shape(), rng);
    let values = full[..n.saturating_sub(m)]
        .iter()
        .map(|z| params.location() + params.scale() * z)
        .collect();
    CensoredSample::new(values, n, m)
}

/// A complete sorted standardized sample of size `n`.
pub(crate) fn sample_ordered<R: Rng + ?Sized>(n: usize, shape: f64, rng: &mut R) -> Vec<f64> {
    let mut z: Vec<f64> = (0..n).map(|_| sample_standard(shape, rng)).collect();
    z.sort_by(f64::total_cmp);
    z
}
