//! Best linear unbiased (BLUE) and best linear invariant (BLIE) estimation
//! of location and scale from Type-II right-censored samples.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Cholesky;
use crate::moments::{moment_set, MomentSet, MAX_SAMPLE_SIZE};
use crate::montecarlo::{PivotalKind, QuantileTable};
use crate::numeric::dot;

/// The first `n - m` order statistics of a sample of size `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensoredSample {
    values: Vec<f64>,
    n: usize,
    m: usize,
}

impl CensoredSample {
    pub fn new(values: Vec<f64>, n: usize, m: usize) -> Result<Self> {
        if n > MAX_SAMPLE_SIZE {
            return Err(Error::invalid(format!("sample size {n} exceeds {MAX_SAMPLE_SIZE}")));
        }
        if m + 2 > n {
            return Err(Error::invalid(format!(
                "need at least two observed values: n={n}, m={m}"
            )));
        }
        if values.len() != n - m {
            return Err(Error::LengthMismatch { expected: n - m, actual: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("sample contains non-finite values"));
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::invalid("sample values must be sorted ascending"));
        }
        Ok(Self { values, n, m })
    }

    /// Sorts first. The flag reports whether the input was out of order.
    pub fn from_unsorted(mut values: Vec<f64>, n: usize, m: usize) -> Result<(Self, bool)> {
        let was_sorted = values.windows(2).all(|w| w[0] <= w[1]);
        values.sort_by(f64::total_cmp);
        Ok((Self::new(values, n, m)?, !was_sorted))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Largest observed value, `X_{n-m:n}`.
    pub fn last(&self) -> f64 {
        *self.values.last().expect("at least two observations")
    }

    /// Apply `y = c x + d` with `c > 0`.
    pub fn affine(&self, c: f64, d: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::invalid("affine scale must be positive"));
        }
        Self::new(self.values.iter().map(|x| c * x + d).collect(), self.n, self.m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Blue,
    Blie,
}

impl std::str::FromStr for Estimator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "blue" => Ok(Estimator::Blue),
            "blie" => Ok(Estimator::Blie),
            other => Err(Error::Parse(format!("unknown estimator '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parameter {
    Location,
    Scale,
}

/// Weight vectors of the linear estimators and the variance factors of the
/// BLUEs in units of `σ²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearCoefficients {
    pub shape: f64,
    pub n: usize,
    pub m: usize,
    /// BLUE weights for location.
    pub a: Vec<f64>,
    /// BLUE weights for scale.
    pub b: Vec<f64>,
    /// BLIE weights for location.
    pub a_inv: Vec<f64>,
    /// BLIE weights for scale.
    pub b_inv: Vec<f64>,
    /// `Var(φ̂)/σ²`
    pub v1: f64,
    /// `Var(σ̂)/σ²`
    pub v2: f64,
    /// `Cov(φ̂, σ̂)/σ²`
    pub v3: f64,
}

impl LinearCoefficients {
    /// Multiplier of the estimated scale in the denominator of a pivotal
    /// quantity. Only defined for the four estimation pivots.
    pub fn pivot_factor(&self, kind: PivotalKind) -> Option<f64> {
        let (v1, v2, v3) = (self.v1, self.v2, self.v3);
        match kind {
            PivotalKind::LocationBlue => Some(v1.sqrt()),
            PivotalKind::ScaleBlue => Some(v2.sqrt()),
            PivotalKind::LocationBlie => {
                Some((v1 - v3 * v3 * (2.0 + v2) / ((1.0 + v2) * (1.0 + v2))).sqrt())
            }
            PivotalKind::ScaleBlie => Some(v2.sqrt() / (1.0 + v2)),
            PivotalKind::PredictionBlue | PivotalKind::PredictionBlie => None,
        }
    }
}

/// Mean squared errors in units of `σ²` and relative efficiencies of the
/// BLIEs with respect to the BLUEs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Efficiency {
    pub mse_blue_location: f64,
    pub mse_blie_location: f64,
    pub mse_blue_scale: f64,
    pub mse_blie_scale: f64,
    pub rec_location: f64,
    pub rec_scale: f64,
}

pub fn mse_and_rec(c: &LinearCoefficients) -> Efficiency {
    let mse_blie_location = c.v1 - c.v3 * c.v3 / (1.0 + c.v2);
    let mse_blie_scale = c.v2 / (1.0 + c.v2);
    Efficiency {
        mse_blue_location: c.v1,
        mse_blie_location,
        mse_blue_scale: c.v2,
        mse_blie_scale,
        rec_location: c.v1 / mse_blie_location,
        rec_scale: 1.0 + c.v2,
    }
}

/// Everything the estimators and predictors need for one `(n, m, ψ)`:
/// the restricted moments, the Cholesky factor of their covariance, and
/// the generalized least-squares quadratic forms.
#[derive(Debug, Clone)]
pub struct LinearModel {
    moments: Arc<MomentSet>,
    m: usize,
    factor: Cholesky,
    mean: Vec<f64>,
    inv_one: Vec<f64>,
    inv_mean: Vec<f64>,
    /// `μᵀΣ⁻¹μ`
    quad_mean: f64,
    /// `1ᵀΣ⁻¹1`
    quad_one: f64,
    /// `μᵀΣ⁻¹1`
    quad_cross: f64,
    coefficients: LinearCoefficients,
}

impl LinearModel {
    pub fn build(n: usize, m: usize, shape: f64) -> Result<Self> {
        if n > MAX_SAMPLE_SIZE {
            return Err(Error::invalid(format!("sample size {n} exceeds {MAX_SAMPLE_SIZE}")));
        }
        if m + 2 > n {
            return Err(Error::invalid(format!("need n - m >= 2, got n={n}, m={m}")));
        }
        let moments = moment_set(n, shape)?;
        let k = n - m;
        let cov = moments.cov.leading(k);
        let factor = Cholesky::factor(&cov)?;
        let mean = moments.means[..k].to_vec();
        let ones = vec![1.0; k];
        let inv_one = factor.solve(&ones);
        let inv_mean = factor.solve(&mean);
        let quad_mean = dot(&mean, &inv_mean);
        let quad_one = dot(&ones, &inv_one);
        let quad_cross = dot(&mean, &inv_one);
        let det = quad_mean * quad_one - quad_cross * quad_cross;

        let a: Vec<f64> = (0..k)
            .map(|i| (quad_mean * inv_one[i] - quad_cross * inv_mean[i]) / det)
            .collect();
        let b: Vec<f64> = (0..k)
            .map(|i| (quad_one * inv_mean[i] - quad_cross * inv_one[i]) / det)
            .collect();
        let v1 = quad_mean / det;
        let v2 = quad_one / det;
        let v3 = -quad_cross / det;
        let shrink = v3 / (1.0 + v2);
        let a_inv = a.iter().zip(&b).map(|(ai, bi)| ai - shrink * bi).collect();
        let b_inv = b.iter().map(|bi| bi / (1.0 + v2)).collect();

        let coefficients = LinearCoefficients { shape, n, m, a, b, a_inv, b_inv, v1, v2, v3 };
        Ok(Self {
            moments,
            m,
            factor,
            mean,
            inv_one,
            inv_mean,
            quad_mean,
            quad_one,
            quad_cross,
            coefficients,
        })
    }

    pub fn shape(&self) -> f64 {
        self.moments.shape
    }

    pub fn n(&self) -> usize {
        self.moments.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn observed(&self) -> usize {
        self.moments.n - self.m
    }

    pub fn moments(&self) -> &MomentSet {
        &self.moments
    }

    pub fn coefficients(&self) -> &LinearCoefficients {
        &self.coefficients
    }

    /// Means of the observed standardized order statistics.
    pub fn observed_means(&self) -> &[f64] {
        &self.mean
    }

    /// Solve `Σ x = rhs` with the observed-block covariance.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        self.factor.solve(rhs)
    }

    /// `(μᵀΣ⁻¹μ)(1ᵀΣ⁻¹1) − (μᵀΣ⁻¹1)² + 1ᵀΣ⁻¹1`
    pub fn delta(&self) -> f64 {
        self.quad_mean * self.quad_one - self.quad_cross * self.quad_cross + self.quad_one
    }

    /// BLIE weights computed straight from the quadratic forms rather than
    /// by shrinking the BLUE weights.
    pub fn blie_weights_direct(&self) -> (Vec<f64>, Vec<f64>) {
        let delta = self.delta();
        let k = self.observed();
        let a = (0..k)
            .map(|i| ((self.quad_mean + 1.0) * self.inv_one[i] - self.quad_cross * self.inv_mean[i]) / delta)
            .collect();
        let b = (0..k)
            .map(|i| (self.quad_one * self.inv_mean[i] - self.quad_cross * self.inv_one[i]) / delta)
            .collect();
        (a, b)
    }

    /// All four point estimates from one set of observed values.
    pub fn estimates(&self, values: &[f64]) -> Result<Estimates> {
        let c = &self.coefficients;
        if values.len() != c.a.len() {
            return Err(Error::LengthMismatch { expected: c.a.len(), actual: values.len() });
        }
        Ok(Estimates {
            blue_location: dot(&c.a, values),
            blue_scale: dot(&c.b, values),
            blie_location: dot(&c.a_inv, values),
            blie_scale: dot(&c.b_inv, values),
        })
    }
}

/// Point estimates of location and scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimates {
    pub blue_location: f64,
    pub blue_scale: f64,
    pub blie_location: f64,
    pub blie_scale: f64,
}

impl Estimates {
    pub fn get(&self, method: Estimator) -> PointEstimate {
        match method {
            Estimator::Blue => PointEstimate { location: self.blue_location, scale: self.blue_scale },
            Estimator::Blie => PointEstimate { location: self.blie_location, scale: self.blie_scale },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointEstimate {
    pub location: f64,
    pub scale: f64,
}

type ModelKey = (usize, usize, u64);

fn model_cache() -> &'static RwLock<HashMap<ModelKey, Arc<LinearModel>>> {
    static CACHE: OnceLock<RwLock<HashMap<ModelKey, Arc<LinearModel>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Memoized [`LinearModel::build`].
pub fn linear_model(n: usize, m: usize, shape: f64) -> Result<Arc<LinearModel>> {
    let key = (n, m, shape.to_bits());
    if let Some(hit) = model_cache().read().expect("model cache poisoned").get(&key) {
        return Ok(Arc::clone(hit));
    }
    let fresh = Arc::new(LinearModel::build(n, m, shape)?);
    let mut guard = model_cache().write().expect("model cache poisoned");
    Ok(Arc::clone(guard.entry(key).or_insert(fresh)))
}

pub fn blue_coefficients(n: usize, m: usize, shape: f64) -> Result<LinearCoefficients> {
    Ok(linear_model(n, m, shape)?.coefficients().clone())
}

/// Same as [`blue_coefficients`] but with the BLIE weights taken from the
/// direct quadratic-form expressions.
pub fn blie_coefficients(n: usize, m: usize, shape: f64) -> Result<LinearCoefficients> {
    let model = linear_model(n, m, shape)?;
    let mut c = model.coefficients().clone();
    let (a_inv, b_inv) = model.blie_weights_direct();
    c.a_inv = a_inv;
    c.b_inv = b_inv;
    Ok(c)
}

pub fn estimate(sample: &CensoredSample, shape: f64, method: Estimator) -> Result<PointEstimate> {
    let model = linear_model(sample.n(), sample.m(), shape)?;
    Ok(model.estimates(sample.values())?.get(method))
}

/// Closed interval `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// `[φ̂ − s f T(1−α/2), φ̂ − s f T(α/2)]`
pub fn location_interval(location: f64, scale: f64, factor: f64, t_low: f64, t_high: f64) -> Interval {
    Interval { lower: location - scale * factor * t_high, upper: location - scale * factor * t_low }
}

/// `[s / (1 + f T(1−α/2)), s / (1 + f T(α/2))]`; an unbounded upper end when
/// the lower quantile drives the denominator to zero.
pub fn scale_interval(scale: f64, factor: f64, t_low: f64, t_high: f64) -> Interval {
    let upper_den = 1.0 + factor * t_low;
    let upper = if upper_den > 0.0 { scale / upper_den } else { f64::INFINITY };
    Interval { lower: scale / (1.0 + factor * t_high), upper }
}

pub(crate) fn tail_levels(level: f64) -> Result<(f64, f64)> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid(format!("confidence level must lie in (0, 1), got {level}")));
    }
    let alpha = 1.0 - level;
    Ok((alpha / 2.0, 1.0 - alpha / 2.0))
}

/// Pivotal-quantity confidence interval for location or scale.
pub fn confidence_interval(
    sample: &CensoredSample,
    shape: f64,
    param: Parameter,
    method: Estimator,
    level: f64,
    quantiles: &QuantileTable,
) -> Result<Interval> {
    let (lo_tau, hi_tau) = tail_levels(level)?;
    let model = linear_model(sample.n(), sample.m(), shape)?;
    let est = model.estimates(sample.values())?.get(method);
    let kind = match (param, method) {
        (Parameter::Location, Estimator::Blue) => PivotalKind::LocationBlue,
        (Parameter::Scale, Estimator::Blue) => PivotalKind::ScaleBlue,
        (Parameter::Location, Estimator::Blie) => PivotalKind::LocationBlie,
        (Parameter::Scale, Estimator::Blie) => PivotalKind::ScaleBlie,
    };
    let t_low = quantiles.lookup(kind, shape, sample.n(), sample.m(), None, lo_tau)?;
    let t_high = quantiles.lookup(kind, shape, sample.n(), sample.m(), None, hi_tau)?;
    let factor = model.coefficients().pivot_factor(kind).expect("estimation pivot");
    Ok(match param {
        Parameter::Location => location_interval(est.location, est.scale, factor, t_low, t_high),
        Parameter::Scale => scale_interval(est.scale, factor, t_low, t_high),
    })
}

/// Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { expected: x.len(), actual: y.len() });
    }
    if x.len() < 3 {
        return Err(Error::invalid("correlation needs at least three points"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Correlation between the observed order statistics and the means of the
/// corresponding standardized order statistics.
pub fn fit_correlation(sample: &CensoredSample, shape: f64) -> Result<f64> {
    let ms = moment_set(sample.n(), shape)?;
    pearson(sample.values(), &ms.means[..sample.values().len()])
}
