//! Best linear unbiased (BLUP) and best linear invariant (BLIP) prediction
//! of a censored order statistic.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{linear_model, tail_levels, CensoredSample, Estimator, Interval, LinearModel};
use crate::montecarlo::{PivotalKind, QuantileTable};
use crate::numeric::dot;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Predictor {
    Blup,
    Blip,
}

impl std::str::FromStr for Predictor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "blup" => Ok(Predictor::Blup),
            "blip" => Ok(Predictor::Blip),
            other => Err(Error::Parse(format!("unknown predictor '{other}'"))),
        }
    }
}

/// Design quantities for predicting `X_{q:n}` from the first `n - m` order
/// statistics. Independent of any particular sample.
#[derive(Debug, Clone)]
pub struct PredictionProblem {
    model: Arc<LinearModel>,
    q: usize,
    /// `Cov(Z_{i:n}, Z_{q:n})` for the observed ranks.
    pub omega: Vec<f64>,
    pub mu_q: f64,
    pub var_q: f64,
    /// `Σ⁻¹ω`
    pub weights: Vec<f64>,
    /// `1 − ωᵀΣ⁻¹1`
    pub location_gap: f64,
    /// `μ_q − ωᵀΣ⁻¹μ`
    pub scale_gap: f64,
    /// `ωᵀΣ⁻¹ω`
    pub explained: f64,
    pub v4: f64,
}

impl PredictionProblem {
    pub fn new(n: usize, m: usize, q: usize, shape: f64) -> Result<Self> {
        let model = linear_model(n, m, shape)?;
        let k = n - m;
        if q <= k || q > n {
            return Err(Error::rank(format!(
                "target rank {q} must lie in {}..={n} for n={n}, m={m}",
                k + 1
            )));
        }
        let ms = model.moments();
        let omega: Vec<f64> = (0..k).map(|i| ms.cov.get(i, q - 1)).collect();
        let mu_q = ms.means[q - 1];
        let var_q = ms.variance(q);
        let weights = model.solve(&omega);
        let location_gap = 1.0 - weights.iter().sum::<f64>();
        let scale_gap = mu_q - dot(&weights, model.observed_means());
        let explained = dot(&weights, &omega);
        let c = model.coefficients();
        let v4 = location_gap * c.v3 + scale_gap * c.v2;
        Ok(Self {
            model,
            q,
            omega,
            mu_q,
            var_q,
            weights,
            location_gap,
            scale_gap,
            explained,
            v4,
        })
    }

    pub fn n(&self) -> usize {
        self.model.n()
    }

    pub fn m(&self) -> usize {
        self.model.m()
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn shape(&self) -> f64 {
        self.model.shape()
    }

    pub fn model(&self) -> &LinearModel {
        &self.model
    }

    /// `X̂_q = φ̂ + σ̂μ_q + ωᵀΣ⁻¹(X − φ̂1 − σ̂μ)`
    pub fn blup(&self, values: &[f64]) -> Result<f64> {
        let est = self.model.estimates(values)?;
        Ok(self.blup_from(values, est.blue_location, est.blue_scale))
    }

    /// `X̃_q = X̂_q − V4/(1+V2) σ̂`
    pub fn blip(&self, values: &[f64]) -> Result<f64> {
        let est = self.model.estimates(values)?;
        let blup = self.blup_from(values, est.blue_location, est.blue_scale);
        Ok(self.blip_from(blup, est.blue_scale))
    }

    pub fn predict(&self, sample: &CensoredSample, method: Predictor) -> Result<f64> {
        self.check_sample(sample)?;
        match method {
            Predictor::Blup => self.blup(sample.values()),
            Predictor::Blip => self.blip(sample.values()),
        }
    }

    pub(crate) fn blup_from(&self, values: &[f64], location: f64, scale: f64) -> f64 {
        let resid: f64 = values
            .iter()
            .zip(self.model.observed_means())
            .zip(&self.weights)
            .map(|((x, mu), w)| w * (x - location - scale * mu))
            .sum();
        location + scale * self.mu_q + resid
    }

    pub(crate) fn blip_from(&self, blup: f64, blue_scale: f64) -> f64 {
        blup - self.v4 / (1.0 + self.model.coefficients().v2) * blue_scale
    }

    /// Closed-form MSPE in units of `σ²`.
    pub fn mspe(&self, method: Predictor) -> f64 {
        let c = self.model.coefficients();
        let (g1, g2) = (self.location_gap, self.scale_gap);
        match method {
            Predictor::Blup => {
                g1 * g1 * c.v1 + g2 * g2 * c.v2 - self.explained + 2.0 * g1 * g2 * c.v3 + self.var_q
            }
            Predictor::Blip => {
                let s = 1.0 + c.v2;
                g1 * g1 * (c.v1 / s + 1.0 / self.model.delta()) + g2 * g2 * c.v2 / s
                    - self.explained
                    + 2.0 * g1 * g2 * c.v3 / s
                    + self.var_q
            }
        }
    }

    /// `MSPE(BLUP) / MSPE(BLIP)`
    pub fn rec(&self) -> f64 {
        self.mspe(Predictor::Blup) / self.mspe(Predictor::Blip)
    }

    /// Pivotal prediction interval anchored at the largest observation.
    /// `Blue` pairs `σ̂` with `T1*`; `Blie` pairs `σ̃` with `T2*`.
    pub fn prediction_interval(
        &self,
        sample: &CensoredSample,
        scale: Estimator,
        level: f64,
        quantiles: &QuantileTable,
    ) -> Result<Interval> {
        self.check_sample(sample)?;
        let (lo_tau, hi_tau) = tail_levels(level)?;
        let est = self.model.estimates(sample.values())?.get(scale);
        let kind = match scale {
            Estimator::Blue => PivotalKind::PredictionBlue,
            Estimator::Blie => PivotalKind::PredictionBlie,
        };
        let (n, m, q, shape) = (self.n(), self.m(), self.q, self.shape());
        let t_low = quantiles.lookup(kind, shape, n, m, Some(q), lo_tau)?;
        let t_high = quantiles.lookup(kind, shape, n, m, Some(q), hi_tau)?;
        Ok(prediction_interval_from(sample.last(), est.scale, t_low, t_high))
    }

    fn check_sample(&self, sample: &CensoredSample) -> Result<()> {
        if sample.n() != self.n() || sample.m() != self.m() {
            return Err(Error::invalid(format!(
                "sample scheme (n={}, m={}) does not match problem (n={}, m={})",
                sample.n(),
                sample.m(),
                self.n(),
                self.m()
            )));
        }
        Ok(())
    }
}

/// `[x_last + s T*(α/2), x_last + s T*(1−α/2)]`
pub fn prediction_interval_from(last: f64, scale: f64, t_low: f64, t_high: f64) -> Interval {
    Interval { lower: last + scale * t_low, upper: last + scale * t_high }
}
