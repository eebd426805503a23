//! Order statistics of the XLindley lifetime law: exact moments, best linear
//! unbiased and invariant estimation of location and scale from Type-II
//! right-censored samples, linear prediction of censored order statistics,
//! and Monte Carlo interval calibration.

pub mod distribution;
pub mod error;
pub mod estimation;
pub mod linalg;
pub mod moments;
pub mod montecarlo;
pub mod numeric;
pub mod prediction;
pub mod quadrature;
pub mod tables;

pub use distribution::{MixtureDecomposition, XlParams};
pub use error::{Error, Result};
pub use estimation::{CensoredSample, Estimator, LinearCoefficients, LinearModel};
pub use moments::{moment_set, product_moment, single_moment, MomentSet};
pub use montecarlo::{PivotalKind, QuantileTable};
pub use prediction::{PredictionProblem, Predictor};
