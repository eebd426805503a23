use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{sample_ordered, PivotalKind, QuantileTable, StreamFactory};
use crate::error::{Error, Result};
use crate::estimation::{linear_model, location_interval, scale_interval, tail_levels, Interval};
use crate::prediction::{prediction_interval_from, PredictionProblem};

/// Repeated sampling from `XL(0, 1, ψ)` under one censoring scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub psi: f64,
    pub n: usize,
    pub m: usize,
    /// Target ranks; every unobserved rank when empty.
    #[serde(default)]
    pub qs: Vec<usize>,
    #[serde(default = "default_reps")]
    pub reps: usize,
    pub seed: u64,
    #[serde(default = "default_level")]
    pub level: f64,
}

fn default_reps() -> usize {
    1000
}

fn default_level() -> f64 {
    0.95
}

impl StudyConfig {
    pub fn new(psi: f64, n: usize, m: usize, reps: usize, seed: u64) -> Self {
        Self { psi, n, m, qs: Vec::new(), reps, seed, level: 0.95 }
    }

    fn targets(&self) -> Vec<usize> {
        if self.qs.is_empty() {
            (self.n - self.m + 1..=self.n).collect()
        } else {
            self.qs.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalSummary {
    pub kind: PivotalKind,
    pub average_width: f64,
    pub coverage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionSummary {
    pub q: usize,
    pub mean_blup: f64,
    pub mean_blip: f64,
    pub bias_blup: f64,
    pub bias_blip: f64,
    pub emspe_blup: f64,
    pub emspe_blip: f64,
    pub intervals: Vec<IntervalSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub psi: f64,
    pub n: usize,
    pub m: usize,
    pub reps: usize,
    pub seed: u64,
    pub level: f64,
    pub mean_blue_location: f64,
    pub mean_blie_location: f64,
    pub mean_blue_scale: f64,
    pub mean_blie_scale: f64,
    pub mse_blue_location: f64,
    pub mse_blie_location: f64,
    pub mse_blue_scale: f64,
    pub mse_blie_scale: f64,
    /// T1 to T4 confidence intervals.
    pub intervals: Vec<IntervalSummary>,
    pub predictions: Vec<PredictionSummary>,
}

impl SimulationReport {
    pub fn interval(&self, kind: PivotalKind) -> Option<&IntervalSummary> {
        self.intervals.iter().find(|s| s.kind == kind)
    }

    pub fn prediction(&self, q: usize) -> Option<&PredictionSummary> {
        self.predictions.iter().find(|p| p.q == q)
    }
}

struct Outcome {
    est: [f64; 4],
    ci: [Interval; 4],
    /// Per target: realized value, BLUP, BLIP, T1* interval, T2* interval.
    pred: Vec<(f64, f64, f64, Interval, Interval)>,
}

pub fn run_simulation_study(config: &StudyConfig, quantiles: &QuantileTable) -> Result<SimulationReport> {
    let StudyConfig { psi, n, m, reps, seed, level, .. } = *config;
    if reps == 0 {
        return Err(Error::invalid("simulation study needs at least one replication"));
    }
    let model = linear_model(n, m, psi)?;
    let coef = model.coefficients();
    let k = n - m;
    let targets = config.targets();
    let problems: Vec<PredictionProblem> =
        targets.iter().map(|&q| PredictionProblem::new(n, m, q, psi)).collect::<Result<_>>()?;

    let (lo_tau, hi_tau) = tail_levels(level)?;
    let pair = |kind: PivotalKind, q: Option<usize>| -> Result<(f64, f64)> {
        Ok((quantiles.lookup(kind, psi, n, m, q, lo_tau)?, quantiles.lookup(kind, psi, n, m, q, hi_tau)?))
    };
    let ci_quantiles: Vec<(f64, f64)> =
        PivotalKind::ALL[..4].iter().map(|&kind| pair(kind, None)).collect::<Result<_>>()?;
    let pi_quantiles: Vec<[(f64, f64); 2]> = targets
        .iter()
        .map(|&q| Ok([pair(PivotalKind::PredictionBlue, Some(q))?, pair(PivotalKind::PredictionBlie, Some(q))?]))
        .collect::<Result<_>>()?;
    let factors: Vec<f64> =
        PivotalKind::ALL[..4].iter().map(|&kind| coef.pivot_factor(kind).expect("estimation pivot")).collect();

    let factory = StreamFactory::new(seed, &format!("study|psi={:016x}|n={n}|m={m}", psi.to_bits()));
    let outcomes: Vec<Outcome> = (0..reps as u64)
        .into_par_iter()
        .map(|i| {
            let x = sample_ordered(n, psi, &mut factory.stream(i));
            let obs = &x[..k];
            let e = model.estimates(obs).expect("length matches model");
            let ci = [
                location_interval(e.blue_location, e.blue_scale, factors[0], ci_quantiles[0].0, ci_quantiles[0].1),
                scale_interval(e.blue_scale, factors[1], ci_quantiles[1].0, ci_quantiles[1].1),
                location_interval(e.blie_location, e.blie_scale, factors[2], ci_quantiles[2].0, ci_quantiles[2].1),
                scale_interval(e.blie_scale, factors[3], ci_quantiles[3].0, ci_quantiles[3].1),
            ];
            let last = obs[k - 1];
            let pred = problems
                .iter()
                .zip(&pi_quantiles)
                .map(|(p, [t1, t2])| {
                    let blup = p.blup_from(obs, e.blue_location, e.blue_scale);
                    let blip = p.blip_from(blup, e.blue_scale);
                    (
                        x[p.q() - 1],
                        blup,
                        blip,
                        prediction_interval_from(last, e.blue_scale, t1.0, t1.1),
                        prediction_interval_from(last, e.blie_scale, t2.0, t2.1),
                    )
                })
                .collect();
            Outcome { est: [e.blue_location, e.blie_location, e.blue_scale, e.blie_scale], ci, pred }
        })
        .collect();

    let nf = reps as f64;
    let mean = |f: &dyn Fn(&Outcome) -> f64| outcomes.iter().map(f).sum::<f64>() / nf;
    let summarize = |kind: PivotalKind, get: &dyn Fn(&Outcome) -> (Interval, f64)| {
        let (mut width, mut hits) = (0.0, 0usize);
        for o in &outcomes {
            let (iv, truth) = get(o);
            width += iv.width();
            hits += iv.contains(truth) as usize;
        }
        IntervalSummary { kind, average_width: width / nf, coverage: hits as f64 / nf }
    };
    let truths = [0.0, 1.0, 0.0, 1.0];
    let intervals = PivotalKind::ALL[..4]
        .iter()
        .enumerate()
        .map(|(j, &kind)| summarize(kind, &|o: &Outcome| (o.ci[j], truths[j])))
        .collect();
    let predictions = targets
        .iter()
        .enumerate()
        .map(|(j, &q)| PredictionSummary {
            q,
            mean_blup: mean(&|o| o.pred[j].1),
            mean_blip: mean(&|o| o.pred[j].2),
            bias_blup: mean(&|o| o.pred[j].1 - o.pred[j].0),
            bias_blip: mean(&|o| o.pred[j].2 - o.pred[j].0),
            emspe_blup: mean(&|o| (o.pred[j].1 - o.pred[j].0).powi(2)),
            emspe_blip: mean(&|o| (o.pred[j].2 - o.pred[j].0).powi(2)),
            intervals: vec![
                summarize(PivotalKind::PredictionBlue, &|o: &Outcome| (o.pred[j].3, o.pred[j].0)),
                summarize(PivotalKind::PredictionBlie, &|o: &Outcome| (o.pred[j].4, o.pred[j].0)),
            ],
        })
        .collect();

    Ok(SimulationReport {
        psi,
        n,
        m,
        reps,
        seed,
        level,
        mean_blue_location: mean(&|o| o.est[0]),
        mean_blie_location: mean(&|o| o.est[1]),
        mean_blue_scale: mean(&|o| o.est[2]),
        mean_blie_scale: mean(&|o| o.est[3]),
        mse_blue_location: mean(&|o| o.est[0].powi(2)),
        mse_blie_location: mean(&|o| o.est[1].powi(2)),
        mse_blue_scale: mean(&|o| (o.est[2] - 1.0).powi(2)),
        mse_blie_scale: mean(&|o| (o.est[3] - 1.0).powi(2)),
        intervals,
        predictions,
    })
}
