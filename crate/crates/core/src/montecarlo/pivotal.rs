use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::quantile::sorted_quantile;
use super::{sample_ordered, PivotalKind, QuantileEntry, QuantileTable, StreamFactory, MIN_REPLICATIONS};
use crate::error::{Error, Result};
use crate::estimation::linear_model;

/// One simulation of all pivotal quantities for a censoring scheme. The
/// location and scale of the generating law do not enter the substream key,
/// so changing them reuses the same standardized samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PivotalConfig {
    pub psi: f64,
    pub n: usize,
    pub m: usize,
    pub reps: usize,
    pub seed: u64,
    #[serde(default)]
    pub location: f64,
    #[serde(default = "unit")]
    pub scale: f64,
}

fn unit() -> f64 {
    1.0
}

impl PivotalConfig {
    pub fn new(psi: f64, n: usize, m: usize, reps: usize, seed: u64) -> Self {
        Self { psi, n, m, reps, seed, location: 0.0, scale: 1.0 }
    }

    pub fn with_location_scale(mut self, location: f64, scale: f64) -> Self {
        self.location = location;
        self.scale = scale;
        self
    }

    pub(crate) fn stream_label(&self) -> String {
        format!("pivotal|psi={:016x}|n={}|m={}", self.psi.to_bits(), self.n, self.m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PivotalSeries {
    pub kind: PivotalKind,
    pub q: Option<usize>,
    /// Realizations in replication order.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PivotalDraws {
    pub config: PivotalConfig,
    pub series: Vec<PivotalSeries>,
}

impl PivotalDraws {
    pub fn values(&self, kind: PivotalKind, q: Option<usize>) -> Option<&[f64]> {
        self.series.iter().find(|s| s.kind == kind && s.q == q).map(|s| s.values.as_slice())
    }

    pub fn quantiles(&self, kind: PivotalKind, q: Option<usize>, taus: &[f64]) -> Result<Vec<QuantileEntry>> {
        let values = self.values(kind, q).ok_or_else(|| {
            Error::invalid(format!("no {kind} series for q={q:?} in this simulation"))
        })?;
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let c = &self.config;
        taus.iter()
            .map(|&tau| {
                Ok(QuantileEntry {
                    kind,
                    psi: c.psi,
                    n: c.n,
                    m: c.m,
                    q,
                    tau,
                    value: sorted_quantile(&sorted, tau)?,
                    reps: c.reps,
                    seed: c.seed,
                })
            })
            .collect()
    }

    /// Quantiles of every simulated series.
    pub fn table(&self, taus: &[f64]) -> Result<QuantileTable> {
        let mut t = QuantileTable::new();
        for s in &self.series {
            t.extend(self.quantiles(s.kind, s.q, taus)?);
        }
        Ok(t)
    }
}

/// Simulate T1–T4 and, for every unobserved rank, T1* and T2*.
pub fn simulate_pivotal_draws(config: &PivotalConfig) -> Result<PivotalDraws> {
    let PivotalConfig { psi, n, m, reps, seed, location, scale } = *config;
    if reps < MIN_REPLICATIONS {
        return Err(Error::invalid(format!("need at least {MIN_REPLICATIONS} replications, got {reps}")));
    }
    if !(scale > 0.0) || !location.is_finite() {
        return Err(Error::invalid("generating law needs finite location and positive scale"));
    }
    let model = linear_model(n, m, psi)?;
    let coef = model.coefficients();
    let f1 = coef.pivot_factor(PivotalKind::LocationBlue).expect("estimation pivot");
    let f2 = coef.pivot_factor(PivotalKind::ScaleBlue).expect("estimation pivot");
    let f3 = coef.pivot_factor(PivotalKind::LocationBlie).expect("estimation pivot");
    let f4 = coef.pivot_factor(PivotalKind::ScaleBlie).expect("estimation pivot");
    let k = n - m;
    let factory = StreamFactory::new(seed, &config.stream_label());

    let rows: Vec<Vec<f64>> = (0..reps as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = factory.stream(i);
            let x: Vec<f64> = sample_ordered(n, psi, &mut rng)
                .into_iter()
                .map(|z| location + scale * z)
                .collect();
            let e = model.estimates(&x[..k]).expect("length matches model");
            let mut row = Vec::with_capacity(4 + 2 * m);
            row.push((e.blue_location - location) / (e.blue_scale * f1));
            row.push((e.blue_scale - scale) / (scale * f2));
            row.push((e.blie_location - location) / (e.blie_scale * f3));
            row.push((e.blie_scale - scale) / (scale * f4));
            let last = x[k - 1];
            row.extend(x[k..].iter().map(|xq| (xq - last) / e.blue_scale));
            row.extend(x[k..].iter().map(|xq| (xq - last) / e.blie_scale));
            row
        })
        .collect();

    let mut series = Vec::with_capacity(4 + 2 * m);
    let column = |j: usize| rows.iter().map(|r| r[j]).collect::<Vec<f64>>();
    for (j, kind) in PivotalKind::ALL[..4].iter().enumerate() {
        series.push(PivotalSeries { kind: *kind, q: None, values: column(j) });
    }
    for (block, kind) in [PivotalKind::PredictionBlue, PivotalKind::PredictionBlie].into_iter().enumerate() {
        for (off, q) in (k + 1..=n).enumerate() {
            series.push(PivotalSeries { kind, q: Some(q), values: column(4 + block * m + off) });
        }
    }
    Ok(PivotalDraws { config: config.clone(), series })
}

/// Empirical quantiles of one pivotal quantity under `XL(0, 1, ψ)`.
#[allow(clippy::too_many_arguments)]
pub fn simulate_pivotal_quantiles(
    kind: PivotalKind,
    psi: f64,
    n: usize,
    m: usize,
    q: Option<usize>,
    reps: usize,
    seed: u64,
    taus: &[f64],
) -> Result<Vec<QuantileEntry>> {
    match (kind.is_prediction(), q) {
        (true, None) => return Err(Error::invalid(format!("{kind} needs a target rank q"))),
        (true, Some(q)) if q <= n.saturating_sub(m) || q > n => {
            return Err(Error::rank(format!("target rank {q} outside {}..={n}", n.saturating_sub(m) + 1)))
        }
        (false, Some(_)) => return Err(Error::invalid(format!("{kind} takes no target rank"))),
        _ => {}
    }
    let draws = simulate_pivotal_draws(&PivotalConfig::new(psi, n, m, reps, seed))?;
    draws.quantiles(kind, q, taus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::DEFAULT_TAUS;

    #[test]
    fn argument_checks() {
        assert!(simulate_pivotal_quantiles(PivotalKind::LocationBlue, 1.0, 6, 0, None, 999, 1, &DEFAULT_TAUS).is_err());
        assert!(simulate_pivotal_quantiles(PivotalKind::PredictionBlue, 1.0, 6, 1, None, 1000, 1, &DEFAULT_TAUS).is_err());
        assert!(simulate_pivotal_quantiles(PivotalKind::PredictionBlue, 1.0, 6, 1, Some(5), 1000, 1, &DEFAULT_TAUS).is_err());
        assert!(simulate_pivotal_quantiles(PivotalKind::ScaleBlue, 1.0, 6, 1, Some(6), 1000, 1, &DEFAULT_TAUS).is_err());
    }

    #[test]
    fn draws_cover_every_series() {
        let d = simulate_pivotal_draws(&PivotalConfig::new(2.0, 6, 2, 1000, 5)).unwrap();
        assert_eq!(d.series.len(), 8);
        assert!(d.values(PivotalKind::PredictionBlie, Some(5)).is_some());
        assert!(d.values(PivotalKind::PredictionBlie, Some(4)).is_none());
        let t = d.table(&DEFAULT_TAUS).unwrap();
        assert_eq!(t.len(), 32);
        t.validate().unwrap();
        // Prediction pivots are positive: future order statistics exceed the last observed one.
        for s in d.series.iter().filter(|s| s.kind.is_prediction()) {
            assert!(s.values.iter().all(|v| *v >= 0.0));
        }
    }
}
