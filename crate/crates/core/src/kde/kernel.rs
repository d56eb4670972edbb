use std::f64::consts::PI;

use crate::{Error, Result};

pub const MAX_KERNEL_DERIVATIVE: usize = 8;

/// Beyond this many bandwidths the Gaussian kernel is treated as zero
/// (relative tail below 1e−15).
pub(crate) const TRUNCATION: f64 = 8.0;

/// Standard normal density.
#[inline]
pub fn gaussian(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// `K^(r)(x) = (−1)^r He_r(x) K(x)` with `He_r` the probabilists' Hermite
/// polynomial.
#[inline]
pub(crate) fn kernel_deriv(r: usize, x: f64) -> f64 {
    let mut prev = 1.0;
    let mut cur = x;
    let he = match r {
        0 => 1.0,
        _ => {
            for k in 1..r {
                let next = x * cur - k as f64 * prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    };
    let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
    sign * he * gaussian(x)
}

/// r-th derivative of the standard normal density, `r ≤ 8`.
pub fn gaussian_kernel_deriv(r: usize, x: f64) -> Result<f64> {
    if r > MAX_KERNEL_DERIVATIVE {
        return Err(Error::invalid(format!(
            "kernel derivative order {r} exceeds {MAX_KERNEL_DERIVATIVE}"
        )));
    }
    Ok(kernel_deriv(r, x))
}

/// Smoothed empirical measure `(1/n) Σ K_ε(x − Xʲ)`.
pub fn kde_eval(positions: &[f64], epsilon: f64, x: f64) -> f64 {
    assert!(epsilon > 0.0, "bandwidth must be positive");
    let inv = 1.0 / epsilon;
    positions.iter().map(|&p| gaussian((x - p) * inv)).sum::<f64>() * inv / positions.len() as f64
}

/// KDE at every point of `xs` from ascending `sorted` positions, summing
/// only kernels within `8ε`.
pub fn kde_on_sorted(sorted: &[f64], epsilon: f64, xs: &[f64]) -> Vec<f64> {
    assert!(epsilon > 0.0, "bandwidth must be positive");
    debug_assert!(sorted.windows(2).all(|w| w[0] <= w[1]));
    let inv = 1.0 / epsilon;
    let reach = TRUNCATION * epsilon;
    let norm = inv / sorted.len() as f64;
    xs.iter()
        .map(|&x| {
            let lo = sorted.partition_point(|&p| p < x - reach);
            let hi = sorted.partition_point(|&p| p <= x + reach);
            sorted[lo..hi].iter().map(|&p| gaussian((x - p) * inv)).sum::<f64>() * norm
        })
        .collect()
}
