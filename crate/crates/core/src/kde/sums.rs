//! Pairwise kernel sums, either exactly over all pairs or on linearly
//! binned counts.

use std::cell::RefCell;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::kernel::{gaussian, kernel_deriv};
use crate::{Error, Result};

/// Samples up to this size use exact O(n²) sums under [`Summation::Auto`].
pub const AUTO_EXACT_LIMIT: usize = 256;
pub const DEFAULT_BINS: usize = 8192;

/// Kernel arguments beyond this many bandwidths contribute nothing in double
/// precision for the derivative orders used here.
const NEGLIGIBLE_ARGUMENT: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Summation {
    Exact,
    Binned { bins: usize },
    /// Exact up to [`AUTO_EXACT_LIMIT`] samples, binned on
    /// [`DEFAULT_BINS`] nodes above.
    Auto,
}

impl Summation {
    pub(crate) fn resolve(self, n: usize) -> Summation {
        match self {
            Summation::Auto if n <= AUTO_EXACT_LIMIT => Summation::Exact,
            Summation::Auto => Summation::Binned { bins: DEFAULT_BINS },
            other => other,
        }
    }
}

/// `((−1)ˢ / (n² h^(2s+1))) Σᵢ Σⱼ K^(2s)((Xⁱ − Xʲ)/h)`, diagonal included.
pub fn functional_norm_estimate(positions: &[f64], s: usize, h: f64) -> Result<f64> {
    if !(2..=3).contains(&s) {
        return Err(Error::invalid(format!("functional order must be 2 or 3, got {s}")));
    }
    if !(h > 0.0) {
        return Err(Error::invalid(format!("pilot bandwidth must be > 0, got {h}")));
    }
    let mut sorted = positions.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(exact_functional(&sorted, s, h))
}

fn exact_functional(sorted: &[f64], s: usize, h: f64) -> f64 {
    let n = sorted.len();
    let order = 2 * s;
    let inv = 1.0 / h;
    let mut off = 0.0;
    for i in 0..n {
        let xi = sorted[i];
        let mut row = 0.0;
        for &xj in &sorted[i + 1..] {
            row += kernel_deriv(order, (xi - xj) * inv);
        }
        off += row;
    }
    let total = n as f64 * kernel_deriv(order, 0.0) + 2.0 * off;
    sign(s) * total / ((n * n) as f64 * h.powi(2 * s as i32 + 1))
}

fn sign(s: usize) -> f64 {
    if s % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plans(len: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        (p.plan_fft_forward(len), p.plan_fft_inverse(len))
    })
}

/// Positions linearly binned onto `bins` equispaced nodes spanning the
/// sample range.
#[derive(Debug, Clone)]
pub struct BinnedCounts {
    n: usize,
    origin: f64,
    delta: f64,
    counts: Vec<f64>,
    /// FFT of the zero-padded counts.
    spectrum: Vec<Complex<f64>>,
    autocorrelation: RefCell<Option<Vec<f64>>>,
}

impl BinnedCounts {
    /// `None` when all positions coincide (no bin width) or `bins < 2`.
    pub fn new(positions: &[f64], bins: usize) -> Option<Self> {
        if bins < 2 || positions.is_empty() {
            return None;
        }
        let (lo, hi) = positions
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return None;
        }
        let delta = (hi - lo) / (bins - 1) as f64;
        let mut counts = vec![0.0; bins];
        // accumulate in ascending position order so the result does not
        // depend on how the caller ordered the particles
        let mut sorted = positions.to_vec();
        sorted.sort_by(f64::total_cmp);
        for &x in &sorted {
            let t = (x - lo) / delta;
            let a = (t.floor() as usize).min(bins - 2);
            let f = t - a as f64;
            counts[a] += 1.0 - f;
            counts[a + 1] += f;
        }
        let padded = (2 * bins).next_power_of_two();
        let mut spectrum: Vec<Complex<f64>> = counts.iter().map(|&c| Complex::new(c, 0.0)).collect();
        spectrum.resize(padded, Complex::new(0.0, 0.0));
        let (forward, _) = plans(padded);
        forward.process(&mut spectrum);
        Some(Self {
            n: positions.len(),
            origin: lo,
            delta,
            counts,
            spectrum,
            autocorrelation: RefCell::new(None),
        })
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn node(&self, a: usize) -> f64 {
        self.origin + a as f64 * self.delta
    }

    fn with_autocorrelation<T>(&self, f: impl FnOnce(&[f64]) -> T) -> T {
        let mut slot = self.autocorrelation.borrow_mut();
        let acf = slot.get_or_insert_with(|| {
            let len = self.spectrum.len();
            let mut power: Vec<Complex<f64>> = self.spectrum.iter().map(|c| Complex::new(c.norm_sqr(), 0.0)).collect();
            let (_, inverse) = plans(len);
            inverse.process(&mut power);
            power[..self.counts.len()].iter().map(|c| c.re / len as f64).collect()
        });
        f(acf)
    }

    /// Binned counterpart of [`functional_norm_estimate`].
    pub fn functional(&self, s: usize, h: f64) -> f64 {
        let order = 2 * s;
        let step = self.delta / h;
        let n = self.n as f64;
        self.with_autocorrelation(|acf| {
            let mut total = acf[0] * kernel_deriv(order, 0.0);
            for (d, &a) in acf.iter().enumerate().skip(1) {
                let arg = d as f64 * step;
                if arg > NEGLIGIBLE_ARGUMENT {
                    break;
                }
                total += 2.0 * a * kernel_deriv(order, arg);
            }
            sign(s) * total / (n * n * h.powi(2 * s as i32 + 1))
        })
    }

    /// Kernel density estimate at every bin node.
    pub fn density_on_nodes(&self, epsilon: f64) -> Vec<f64> {
        let len = self.spectrum.len();
        let bins = self.counts.len();
        let inv = 1.0 / epsilon;
        let mut kernel = vec![Complex::new(0.0, 0.0); len];
        for d in 0..bins {
            let arg = d as f64 * self.delta * inv;
            if arg > NEGLIGIBLE_ARGUMENT {
                break;
            }
            let k = gaussian(arg) * inv;
            kernel[d] = Complex::new(k, 0.0);
            if d > 0 {
                kernel[len - d] = Complex::new(k, 0.0);
            }
        }
        let (forward, inverse) = plans(len);
        forward.process(&mut kernel);
        for (k, c) in kernel.iter_mut().zip(&self.spectrum) {
            *k *= *c;
        }
        inverse.process(&mut kernel);
        let scale = 1.0 / (len as f64 * self.n as f64);
        kernel[..bins].iter().map(|c| (c.re * scale).max(0.0)).collect()
    }

    /// Linear interpolation of node values at `x` (clamped to the range).
    pub fn interpolate(&self, nodes: &[f64], x: f64) -> f64 {
        let bins = nodes.len();
        let t = ((x - self.origin) / self.delta).clamp(0.0, (bins - 1) as f64);
        let a = (t.floor() as usize).min(bins - 2);
        let f = t - a as f64;
        nodes[a] * (1.0 - f) + nodes[a + 1] * f
    }
}

/// Evaluator for the double sums of the density-functional estimator.
#[derive(Debug, Clone)]
pub enum PairSums {
    Exact { sorted: Vec<f64> },
    Binned(BinnedCounts),
}

impl PairSums {
    pub fn new(positions: &[f64], summation: Summation) -> Self {
        match summation.resolve(positions.len()) {
            Summation::Binned { bins } => match BinnedCounts::new(positions, bins) {
                Some(b) => PairSums::Binned(b),
                None => Self::exact(positions),
            },
            _ => Self::exact(positions),
        }
    }

    fn exact(positions: &[f64]) -> Self {
        let mut sorted = positions.to_vec();
        sorted.sort_by(f64::total_cmp);
        PairSums::Exact { sorted }
    }

    pub fn from_binned(binned: BinnedCounts) -> Self {
        PairSums::Binned(binned)
    }

    pub fn functional(&self, s: usize, h: f64) -> f64 {
        match self {
            PairSums::Exact { sorted } => exact_functional(sorted, s, h),
            PairSums::Binned(b) => b.functional(s, h),
        }
    }
}
