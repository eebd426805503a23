use rand::Rng;

use crate::error::{Error, Result};

/// Type-7 sample quantile: linear interpolation at position `1 + (N−1)τ`.
pub fn empirical_quantile(samples: &[f64], tau: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::invalid("empirical quantile of an empty sample"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted_quantile(&sorted, tau)
}

pub(crate) fn sorted_quantile(sorted: &[f64], tau: f64) -> Result<f64> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::invalid(format!("quantile level must lie in (0, 1), got {tau}")));
    }
    if sorted.is_empty() {
        return Err(Error::invalid("empirical quantile of an empty sample"));
    }
    let h = (sorted.len() - 1) as f64 * tau;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    let hi = (lo + 1).min(sorted.len() - 1);
    Ok(sorted[lo] + frac * (sorted[hi] - sorted[lo]))
}

/// Bootstrap standard error of the type-7 quantile of a sample of size
/// `resample_size` drawn from the empirical distribution of `samples`.
///
/// With `resample_size == samples.len()` this is the ordinary bootstrap; a
/// smaller size gives the noise level of a shorter simulation run.
pub fn bootstrap_quantile_se<R: Rng + ?Sized>(
    samples: &[f64],
    tau: f64,
    resample_size: usize,
    resamples: usize,
    rng: &mut R,
) -> Result<f64> {
    if samples.is_empty() || resample_size < 2 || resamples < 2 {
        return Err(Error::invalid("bootstrap needs a nonempty sample and at least two draws"));
    }
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::invalid(format!("quantile level must lie in (0, 1), got {tau}")));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let h = (resample_size - 1) as f64 * tau;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    let mut idx = vec![0u32; resample_size];
    let mut stats = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        for slot in idx.iter_mut() {
            *slot = rng.random_range(0..sorted.len() as u32);
        }
        let (_, &mut at_lo, rest) = idx.select_nth_unstable(lo);
        let next = rest.iter().copied().min().unwrap_or(at_lo);
        let (a, b) = (sorted[at_lo as usize], sorted[next as usize]);
        stats.push(a + frac * (b - a));
    }
    let mean = stats.iter().sum::<f64>() / resamples as f64;
    let var = stats.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (resamples - 1) as f64;
    Ok(var.sqrt())
}
