//! The XLindley lifetime law in its three-parameter (location–scale) form.
//!
//! The standard law (location 0, scale 1) has density
//! `ψ²(2 + ψ + x) e^{-ψx} / (1 + ψ)²` on `x > 0`. It is a two-component
//! mixture of an Exponential(ψ) and a Gamma(2, ψ) law, which gives an exact
//! sampler without numerical inversion.

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shape, location and scale of an XLindley law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XlParams {
    shape: f64,
    location: f64,
    scale: f64,
}

impl XlParams {
    pub fn new(shape: f64, location: f64, scale: f64) -> Result<Self> {
        if !(shape > 0.0) || !shape.is_finite() {
            return Err(Error::invalid(format!("shape must be positive and finite, got {shape}")));
        }
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::invalid(format!("scale must be positive and finite, got {scale}")));
        }
        if !location.is_finite() {
            return Err(Error::invalid(format!("location must be finite, got {location}")));
        }
        Ok(Self { shape, location, scale })
    }

    /// Standard form: location 0, scale 1.
    pub fn standard(shape: f64) -> Result<Self> {
        Self::new(shape, 0.0, 1.0)
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn location(&self) -> f64 {
        self.location
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    #[inline]
    fn standardize(&self, x: f64) -> f64 {
        (x - self.location) / self.scale
    }
}

/// Mixture weights of the Exponential(ψ) and Gamma(2, ψ) components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureDecomposition {
    pub weight_exp: f64,
    pub weight_gamma2: f64,
}

impl MixtureDecomposition {
    pub fn new(shape: f64) -> Self {
        let denom = (1.0 + shape) * (1.0 + shape);
        Self {
            weight_exp: shape * (2.0 + shape) / denom,
            weight_gamma2: 1.0 / denom,
        }
    }
}

#[inline]
pub(crate) fn standard_pdf(z: f64, shape: f64) -> f64 {
    if z < 0.0 {
        return 0.0;
    }
    let c = (1.0 + shape) * (1.0 + shape);
    shape * shape * (2.0 + shape + z) * (-shape * z).exp() / c
}

#[inline]
pub(crate) fn standard_survival(z: f64, shape: f64) -> f64 {
    if z <= 0.0 {
        return 1.0;
    }
    let c = (1.0 + shape) * (1.0 + shape);
    (1.0 + shape * z / c) * (-shape * z).exp()
}

#[inline]
pub(crate) fn standard_cdf(z: f64, shape: f64) -> f64 {
    if z <= 0.0 {
        return 0.0;
    }
    let c = (1.0 + shape) * (1.0 + shape);
    // 1 - (1 + ψz/c) e^{-ψz}, arranged to avoid cancellation near zero.
    let e = (-shape * z).exp_m1(); // e^{-ψz} - 1
    -e - shape * z / c * (e + 1.0)
}

/// Density. Zero below the location; at the location itself returns the
/// right limit.
pub fn pdf(x: f64, p: &XlParams) -> f64 {
    let z = p.standardize(x);
    standard_pdf(z, p.shape) / p.scale
}

/// Distribution function.
pub fn cdf(x: f64, p: &XlParams) -> f64 {
    standard_cdf(p.standardize(x), p.shape)
}

/// Survival function `1 - cdf`.
pub fn survival(x: f64, p: &XlParams) -> f64 {
    standard_survival(p.standardize(x), p.shape)
}

/// `E[X^k]` of the standard law, evaluated through the single-moment
/// closed form with a sample of size one.
pub fn raw_moment(k: u32, shape: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("moment order must be at least 1"));
    }
    crate::moments::single_moment(1, 1, k, shape)
}

/// Draw one variate.
pub fn sample<R: Rng + ?Sized>(p: &XlParams, rng: &mut R) -> f64 {
    p.location + p.scale * sample_standard(p.shape, rng)
}

#[inline]
pub(crate) fn sample_standard<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    let w = MixtureDecomposition::new(shape).weight_exp;
    let u: f64 = rng.random();
    let e1: f64 = rng.sample(Exp1);
    if u < w {
        e1 / shape
    } else {
        let e2: f64 = rng.sample(Exp1);
        (e1 + e2) / shape
    }
}

/// Inverse distribution function by safeguarded bisection. Diagnostic only.
pub fn quantile(u: f64, p: &XlParams) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::invalid(format!("quantile level must lie in (0, 1), got {u}")));
    }
    let shape = p.shape;
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    while standard_cdf(hi, shape) < u {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if standard_cdf(mid, shape) < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let z = if (standard_cdf(lo, shape) - u).abs() < (standard_cdf(hi, shape) - u).abs() {
        lo
    } else {
        hi
    };
    Ok(p.location + p.scale * z)
}
