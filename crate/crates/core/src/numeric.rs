//! Small numeric helpers shared by the closed-form moment code.

use std::sync::OnceLock;

/// Largest argument held in the factorial table. `170!` is the last
/// factorial representable as a finite `f64`.
pub const FACTORIAL_TABLE_MAX: usize = 170;

fn factorial_table() -> &'static [f64; FACTORIAL_TABLE_MAX + 1] {
    static TABLE: OnceLock<[f64; FACTORIAL_TABLE_MAX + 1]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [1.0f64; FACTORIAL_TABLE_MAX + 1];
        // Exact integer products while they fit in u128 (up to 34!), then f64.
        let mut exact: u128 = 1;
        for k in 1..=FACTORIAL_TABLE_MAX {
            if k <= 34 {
                exact *= k as u128;
                t[k] = exact as f64;
            } else {
                t[k] = t[k - 1] * k as f64;
            }
        }
        t
    })
}

/// `k!` as a double. Panics past 170, where the result overflows.
#[inline]
pub fn factorial(k: usize) -> f64 {
    factorial_table()[k]
}

/// `Γ(k)` for a positive integer argument.
#[inline]
pub fn gamma_int(k: usize) -> f64 {
    debug_assert!(k >= 1);
    factorial(k - 1)
}

/// Binomial coefficient `C(n, k)` as a double, zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step.
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as f64
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Compensated sum of a slice.
pub fn sum(xs: &[f64]) -> f64 {
    xs.iter().copied().collect::<CompensatedSum>().value()
}

/// Compensated dot product.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| x * y)
        .collect::<CompensatedSum>()
        .value()
}
