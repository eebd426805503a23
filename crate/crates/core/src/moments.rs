//! Exact single and product moments of XLindley order statistics, their
//! mean vectors and covariance matrices, and a numerical-integration oracle
//! for the same quantities.
//!
//! The closed forms are alternating binomial sums whose terms grow far
//! beyond the result. They are evaluated in double-double arithmetic and
//! capped at [`MAX_SAMPLE_SIZE`].

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use crate::distribution::{standard_cdf, standard_pdf, standard_survival};
use crate::error::{Error, Result};
use crate::linalg::{Cholesky, SquareMatrix};
use crate::numeric::{binomial, CompensatedSum};
use crate::quadrature::{integrate_to_infinity, Tolerance};
use rayon::prelude::*;
use twofloat::TwoFloat;

/// Largest sample size supported by the closed forms.
pub const MAX_SAMPLE_SIZE: usize = 30;

fn check_shape(shape: f64) -> Result<()> {
    if shape > 0.0 && shape.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("shape must be positive and finite, got {shape}")))
    }
}

fn check_single(r: usize, n: usize, k: u32) -> Result<()> {
    if n == 0 || n > MAX_SAMPLE_SIZE {
        return Err(Error::rank(format!("sample size {n} outside 1..={MAX_SAMPLE_SIZE}")));
    }
    if r == 0 || r > n {
        return Err(Error::rank(format!("rank {r} outside 1..={n}")));
    }
    if k == 0 {
        return Err(Error::invalid("moment order must be at least 1"));
    }
    Ok(())
}

fn check_pair(r: usize, s: usize, n: usize, k: u32, l: u32) -> Result<()> {
    check_single(r, n, k)?;
    if l == 0 {
        return Err(Error::invalid("moment order must be at least 1"));
    }
    if s <= r || s > n {
        return Err(Error::rank(format!("need 1 <= r < s <= n, got r={r}, s={s}, n={n}")));
    }
    Ok(())
}

type Dd = TwoFloat;

/// `n!` in double-double, `n <= 170`.
fn dd_factorial(n: usize) -> Dd {
    static TABLE: OnceLock<Vec<Dd>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = vec![Dd::from(1.0)];
        for i in 1..=170 {
            let next = t[i - 1] * i as f64;
            t.push(next);
        }
        t
    })[n]
}

/// Binomial coefficient, exact in f64 for the arguments used here.
fn dd_binomial(n: usize, k: usize) -> Dd {
    Dd::from(binomial(n, k))
}

/// `n! / ((r-1)! (n-r)!)`
fn single_constant(r: usize, n: usize) -> Dd {
    dd_factorial(n) / (dd_factorial(r - 1) * dd_factorial(n - r))
}

/// `n! / ((r-1)! (s-r-1)! (n-s)!)`
fn pair_constant(r: usize, s: usize, n: usize) -> Dd {
    dd_factorial(n) / (dd_factorial(r - 1) * dd_factorial(s - r - 1) * dd_factorial(n - s))
}

/// `E[X_{r:n}^k]` for the standard law with shape `shape`.
pub fn single_moment(r: usize, n: usize, k: u32, shape: f64) -> Result<f64> {
    check_single(r, n, k)?;
    check_shape(shape)?;
    let k = k as usize;
    let psi = Dd::from(shape);
    let c2 = (psi + 1.0) * (psi + 1.0);
    let mut acc = Dd::from(0.0);
    for eps in 0..r {
        let j = n - r + eps; // exponent of the survival function
        let rate = Dd::from((j + 1) as f64);
        for rho in 0..=j {
            let weight = dd_binomial(r - 1, eps) * dd_binomial(j, rho);
            let g = dd_factorial(rho + k);
            let denom = rate.powi((rho + k + 1) as i32) * c2.powi((rho + 1) as i32);
            let bracket = psi + 2.0 + Dd::from((rho + k + 1) as f64) / (psi * rate);
            let term = weight * g / denom * bracket;
            if eps % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
    }
    Ok((single_constant(r, n) * psi.powi(1 - k as i32) * acc).hi())
}

/// `[x^0, x^1, ..., x^len]`
fn dd_powers(x: Dd, len: usize) -> Vec<Dd> {
    let mut out = Vec::with_capacity(len + 1);
    out.push(Dd::from(1.0));
    for i in 1..=len {
        out.push(out[i - 1] * x);
    }
    out
}

/// `E[X_{r:n}^k X_{s:n}^l]` for the standard law, `r < s`.
pub fn product_moment(r: usize, s: usize, n: usize, k: u32, l: u32, shape: f64) -> Result<f64> {
    check_pair(r, s, n, k, l)?;
    check_shape(shape)?;
    let (k, l) = (k as usize, l as usize);
    let psi = Dd::from(shape);
    let c2 = (psi + 1.0) * (psi + 1.0);
    // largest exponent: k + η + l + γ + 2 with η < s, γ < n - r
    let span = k + l + s + n + 2;
    let psi_pow = dd_powers(psi, span);
    let inv_c2_pow = dd_powers(c2.recip(), span);
    let inv_fact: Vec<Dd> = (0..=span).map(|i| dd_factorial(i).recip()).collect();
    let mut acc = Dd::from(0.0);
    for eps in 0..r {
        // rate of the outer exponential: ψ(n - r + ε + 1)
        let outer = psi * (n - r + eps + 1) as f64;
        let inv_outer_pow = dd_powers(outer.recip(), span);
        // (ψ + 2 + e/outer) Γ(e) / outer^e
        let a: Vec<Dd> = (0..=span)
            .map(|e| {
                if e == 0 {
                    Dd::from(0.0)
                } else {
                    (psi + 2.0 + Dd::from(e as f64) / outer) * dd_factorial(e - 1) * inv_outer_pow[e]
                }
            })
            .collect();
        for rho in 0..(s - r) {
            let negative = (eps + s - r - 1 - rho) % 2 == 1;
            // rate of the inner exponential: ψ(n - r - ρ)
            let inner = psi * (n - r - rho) as f64;
            let inv_inner_pow = dd_powers(inner.recip(), span);
            let inner_count = n - r - 1 - rho;
            let w_er = dd_binomial(r - 1, eps) * dd_binomial(s - r - 1, rho) / (n - r - rho) as f64;
            for gam in 0..=inner_count {
                let lg = l + gam;
                let w_g = w_er * dd_binomial(inner_count, gam);
                let inner_bracket = psi + 2.0 + Dd::from((lg + 1) as f64) / inner;
                for eta in 0..=(eps + rho) {
                    let w = w_g * dd_binomial(eps + rho, eta);
                    let pre = psi_pow[3 + gam + eta] * inv_c2_pow[2 + eta + gam];
                    let first = a[k + eta + lg + 2];
                    let mut tail = Dd::from(0.0);
                    for delta in 0..=lg {
                        tail += a[k + eta + delta + 1] * inv_inner_pow[lg - delta] * inv_fact[delta];
                    }
                    // (l+γ)! multiplies the bracket, whose first term divides by it.
                    let term = w * pre * (first + dd_factorial(lg) * inner_bracket * tail);
                    if negative {
                        acc -= term;
                    } else {
                        acc += term;
                    }
                }
            }
        }
    }
    Ok((pair_constant(r, s, n) * acc).hi())
}

/// Means, second moments and covariances of the standardized order
/// statistics of a sample of size `n`.
#[derive(Debug, Clone)]
pub struct MomentSet {
    pub shape: f64,
    pub n: usize,
    /// `E[Z_{r:n}]`, r = 1..=n
    pub means: Vec<f64>,
    /// `E[Z_{r:n}^2]`
    pub second_moments: Vec<f64>,
    /// `Cov(Z_{r:n}, Z_{s:n})`, symmetric
    pub cov: SquareMatrix,
}

impl MomentSet {
    pub fn compute(n: usize, shape: f64) -> Result<Self> {
        check_single(1, n, 1)?;
        check_shape(shape)?;
        let means = (1..=n).map(|r| single_moment(r, n, 1, shape)).collect::<Result<Vec<_>>>()?;
        let second_moments = (1..=n).map(|r| single_moment(r, n, 2, shape)).collect::<Result<Vec<_>>>()?;
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|r| ((r + 1)..n).map(move |s| (r, s))).collect();
        let products = pairs
            .par_iter()
            .map(|&(r, s)| product_moment(r + 1, s + 1, n, 1, 1, shape))
            .collect::<Result<Vec<_>>>()?;
        let mut cov = SquareMatrix::zeros(n);
        for r in 0..n {
            cov.set(r, r, second_moments[r] - means[r] * means[r]);
        }
        for (&(r, s), p) in pairs.iter().zip(products) {
            let c = p - means[r] * means[s];
            cov.set(r, s, c);
            cov.set(s, r, c);
        }
        Ok(Self { shape, n, means, second_moments, cov })
    }

    pub fn variance(&self, r: usize) -> f64 {
        self.cov.get(r - 1, r - 1)
    }

    /// `Σ_r E[Z_{r:n}] - n E[Z]`
    pub fn mean_identity_gap(&self) -> Result<f64> {
        let ex = single_moment(1, 1, 1, self.shape)?;
        Ok(crate::numeric::sum(&self.means) - self.n as f64 * ex)
    }

    /// `Σ_r Σ_s Cov(Z_{r:n}, Z_{s:n}) - n Var(Z)`
    pub fn covariance_identity_gap(&self) -> Result<f64> {
        let ex = single_moment(1, 1, 1, self.shape)?;
        let ex2 = single_moment(1, 1, 2, self.shape)?;
        let total: CompensatedSum = (0..self.n).flat_map(|i| self.cov.row(i).iter().copied()).collect();
        Ok(total.value() - self.n as f64 * (ex2 - ex * ex))
    }

    /// Check both sum identities and positive definiteness of the covariance.
    pub fn verify(&self, tol: f64) -> Result<()> {
        let g1 = self.mean_identity_gap()?;
        if g1.abs() > tol {
            return Err(Error::IdentityViolation(format!(
                "sum of means differs from n E[X] by {g1:e} (n={}, shape={})",
                self.n, self.shape
            )));
        }
        let g2 = self.covariance_identity_gap()?;
        if g2.abs() > tol {
            return Err(Error::IdentityViolation(format!(
                "sum of covariances differs from n Var(X) by {g2:e} (n={}, shape={})",
                self.n, self.shape
            )));
        }
        Cholesky::factor(&self.cov)?;
        Ok(())
    }
}

type CacheKey = (usize, u64);

fn cache() -> &'static RwLock<HashMap<CacheKey, Arc<MomentSet>>> {
    static CACHE: OnceLock<RwLock<HashMap<CacheKey, Arc<MomentSet>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Memoized [`MomentSet::compute`].
pub fn moment_set(n: usize, shape: f64) -> Result<Arc<MomentSet>> {
    let key = (n, shape.to_bits());
    if let Some(hit) = cache().read().expect("moment cache poisoned").get(&key) {
        return Ok(Arc::clone(hit));
    }
    let fresh = Arc::new(MomentSet::compute(n, shape)?);
    let mut guard = cache().write().expect("moment cache poisoned");
    Ok(Arc::clone(guard.entry(key).or_insert(fresh)))
}

/// Tolerances for the quadrature oracle.
#[derive(Debug, Clone, Copy)]
pub struct OracleTolerance {
    pub abs: f64,
    pub rel: f64,
}

impl OracleTolerance {
    pub const SINGLE: Self = Self { abs: 1e-13, rel: 1e-12 };
    pub const PRODUCT: Self = Self { abs: 1e-11, rel: 1e-10 };
}

/// `E[X_{r:n}^k]` by adaptive quadrature of the order-statistic density.
pub fn oracle_single_moment(r: usize, n: usize, k: u32, shape: f64) -> Result<f64> {
    oracle_single_moment_with(r, n, k, shape, OracleTolerance::SINGLE)
}

pub fn oracle_single_moment_with(r: usize, n: usize, k: u32, shape: f64, tol: OracleTolerance) -> Result<f64> {
    check_single(r, n, k)?;
    check_shape(shape)?;
    let c = single_constant(r, n).hi();
    let integrand = |x: f64| {
        let f = standard_pdf(x, shape);
        if f == 0.0 {
            return 0.0;
        }
        c * x.powi(k as i32)
            * standard_cdf(x, shape).powi(r as i32 - 1)
            * standard_survival(x, shape).powi((n - r) as i32)
            * f
    };
    Ok(integrate_to_infinity(integrand, 0.0, Tolerance::new(tol.abs, tol.rel))?.value)
}

/// `E[X_{r:n}^k X_{s:n}^l]` by nested adaptive quadrature: the inner
/// integral over `y ∈ (x, ∞)` runs at a tenth of the outer tolerance.
pub fn oracle_product_moment(r: usize, s: usize, n: usize, k: u32, l: u32, shape: f64) -> Result<f64> {
    oracle_product_moment_with(r, s, n, k, l, shape, OracleTolerance::PRODUCT)
}

pub fn oracle_product_moment_with(
    r: usize,
    s: usize,
    n: usize,
    k: u32,
    l: u32,
    shape: f64,
    tol: OracleTolerance,
) -> Result<f64> {
    check_pair(r, s, n, k, l)?;
    check_shape(shape)?;
    let c = pair_constant(r, s, n).hi();
    let inner_tol = Tolerance::new(tol.abs / 10.0, tol.rel / 10.0);
    let outer_tol = Tolerance::new(tol.abs, tol.rel);
    let failure = std::cell::Cell::new(None::<(f64, f64)>);
    let outer = |x: f64| {
        let fx = standard_pdf(x, shape);
        if fx == 0.0 {
            return 0.0;
        }
        let sx = standard_survival(x, shape);
        let inner = |y: f64| {
            let sy = standard_survival(y, shape);
            y.powi(l as i32) * (sx - sy).powi((s - r - 1) as i32) * sy.powi((n - s) as i32) * standard_pdf(y, shape)
        };
        let inner_value = match integrate_to_infinity(inner, x, inner_tol) {
            Ok(est) => est.value,
            Err(Error::Quadrature { estimate, error }) => {
                failure.set(Some((estimate, error)));
                estimate
            }
            Err(_) => f64::NAN,
        };
        c * x.powi(k as i32) * standard_cdf(x, shape).powi(r as i32 - 1) * fx * inner_value
    };
    let est = integrate_to_infinity(outer, 0.0, outer_tol);
    let est = est?;
    if let Some((_, inner_error)) = failure.take() {
        return Err(Error::Quadrature { estimate: est.value, error: inner_error });
    }
    Ok(est.value)
}
