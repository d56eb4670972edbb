//! Bandwidth selection: Silverman's rule and the solve-the-equation plug-in.

use std::f64::consts::PI;

use super::kernel::kernel_deriv;
use super::sums::{PairSums, Summation};
use crate::stats;
use crate::{Error, Result};

/// ‖u″‖² of the standard normal.
pub const NORMAL_CURVATURE: f64 = 0.211_571_093_830_408_6; // 3/(8√π)
/// ‖u‴‖² of the standard normal.
pub const NORMAL_THIRD: f64 = 0.528_927_734_576_021_6; // 15/(16√π)
/// ‖u⁗‖² of the standard normal.
pub const NORMAL_FOURTH: f64 = 1.851_247_071_016_075_6; // 105/(32√π)

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpreadRule {
    /// Unbiased empirical standard deviation.
    #[default]
    StdDev,
    /// min(σ̂, IQR/1.349).
    Robust,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BandwidthMethod {
    Silverman,
    #[default]
    SolveTheEquation,
}

impl BandwidthMethod {
    pub fn name(self) -> &'static str {
        match self {
            BandwidthMethod::Silverman => "silverman",
            BandwidthMethod::SolveTheEquation => "solve-the-equation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandwidthReport {
    pub epsilon: f64,
    pub h1: f64,
    pub h2: f64,
    /// Estimate of ‖u″‖² consistent with `epsilon`.
    pub curvature_norm: f64,
    pub iterations: usize,
    /// `Silverman` either by request or as the fallback of a failed solve.
    pub method: BandwidthMethod,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandwidthOptions {
    pub method: BandwidthMethod,
    pub spread: SpreadRule,
    pub summation: Summation,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for BandwidthOptions {
    fn default() -> Self {
        Self {
            method: BandwidthMethod::SolveTheEquation,
            spread: SpreadRule::StdDev,
            summation: Summation::Auto,
            tol: 1e-6,
            max_iter: 200,
        }
    }
}

pub fn spread(positions: &[f64], rule: SpreadRule) -> Result<f64> {
    if positions.len() < 2 {
        return Err(Error::DegenerateSample(format!("need at least 2 positions, got {}", positions.len())));
    }
    if positions.iter().any(|x| !x.is_finite()) {
        return Err(Error::DegenerateSample("non-finite position".into()));
    }
    // sorted so that the result does not depend on particle order
    let mut v = positions.to_vec();
    v.sort_by(f64::total_cmp);
    let sd = stats::std_dev(&v);
    let s = match rule {
        SpreadRule::StdDev => sd,
        SpreadRule::Robust => {
            let iqr = stats::quantile_sorted(&v, 0.75) - stats::quantile_sorted(&v, 0.25);
            // a zero IQR would discard a usable σ̂
            if iqr > 0.0 {
                sd.min(iqr / 1.349)
            } else {
                sd
            }
        }
    };
    if !(s > 0.0) {
        return Err(Error::DegenerateSample("zero spread".into()));
    }
    Ok(s)
}

pub fn silverman_for(n: usize, sigma: f64) -> f64 {
    (4.0 / (3.0 * n as f64)).powf(0.2) * sigma
}

pub fn silverman_bandwidth(positions: &[f64]) -> Result<f64> {
    Ok(silverman_for(positions.len(), spread(positions, SpreadRule::StdDev)?))
}

/// Normal-reference pilot bandwidths (h1, h2) for sample size `n` and spread `sigma`.
pub fn pilot_bandwidths_for(n: usize, sigma: f64) -> (f64, f64) {
    let n = n as f64;
    let h1 = (2.0 * kernel_deriv(4, 0.0) / (n * NORMAL_THIRD * sigma.powi(-7))).powf(1.0 / 7.0);
    let h2 = (-2.0 * kernel_deriv(6, 0.0) / (n * NORMAL_FOURTH * sigma.powi(-9))).powf(1.0 / 9.0);
    (h1, h2)
}

pub fn pilot_bandwidths(positions: &[f64]) -> Result<(f64, f64)> {
    Ok(pilot_bandwidths_for(positions.len(), spread(positions, SpreadRule::StdDev)?))
}

pub fn amise(epsilon: f64, n: usize, curvature_norm: f64) -> f64 {
    0.25 * epsilon.powi(4) * curvature_norm + 1.0 / (2.0 * epsilon * n as f64 * PI.sqrt())
}

/// Minimizer of [`amise`] over ε.
pub fn optimal_bandwidth(n: usize, curvature_norm: f64) -> f64 {
    (2.0 * n as f64 * PI.sqrt() * curvature_norm).powf(-0.2)
}

/// The plug-in machinery for one sample: pilot functionals are estimated
/// once and the pair sums are reused by every evaluation of γ(ε).
#[derive(Debug, Clone)]
pub struct PlugIn {
    n: usize,
    sigma: f64,
    h1: f64,
    h2: f64,
    /// [4√π K⁽⁴⁾(0) ψ₂(h1)/ψ₃(h2)]^(1/7).
    gamma_coeff: f64,
    sums: PairSums,
}

impl PlugIn {
    pub fn new(positions: &[f64], rule: SpreadRule, summation: Summation) -> Result<Self> {
        let sigma = spread(positions, rule)?;
        Self::with_sums(positions.len(), sigma, PairSums::new(positions, summation))
    }

    pub fn with_sums(n: usize, sigma: f64, sums: PairSums) -> Result<Self> {
        let (h1, h2) = pilot_bandwidths_for(n, sigma);
        let psi2 = sums.functional(2, h1);
        let psi3 = sums.functional(3, h2);
        if !(psi2 > 0.0 && psi2.is_finite()) {
            return Err(Error::NonPositiveFunctional { value: psi2, bandwidth: h1 });
        }
        if !(psi3 > 0.0 && psi3.is_finite()) {
            return Err(Error::NonPositiveFunctional { value: psi3, bandwidth: h2 });
        }
        let gamma_coeff = (4.0 * PI.sqrt() * kernel_deriv(4, 0.0) * psi2 / psi3).powf(1.0 / 7.0);
        Ok(Self { n, sigma, h1, h2, gamma_coeff, sums })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn pilots(&self) -> (f64, f64) {
        (self.h1, self.h2)
    }

    pub fn gamma(&self, epsilon: f64) -> f64 {
        self.gamma_coeff * epsilon.powf(5.0 / 7.0)
    }

    /// ‖u″‖² estimated at the pilot bandwidth γ(ε).
    pub fn curvature_at(&self, epsilon: f64) -> f64 {
        self.sums.functional(2, self.gamma(epsilon))
    }

    /// Right-hand side of the fixed-point equation, `None` when the curvature
    /// estimate is not positive.
    fn image(&self, epsilon: f64) -> Option<(f64, f64)> {
        let c = self.curvature_at(epsilon);
        (c > 0.0 && c.is_finite()).then(|| (optimal_bandwidth(self.n, c), c))
    }

    /// Geometric bisection on g(ε) = ε/φ(ε) − 1. `None` if no bracket is found,
    /// a curvature estimate turns non-positive, or `max_iter` runs out.
    pub fn solve(&self, tol: f64, max_iter: usize) -> Option<(f64, f64, usize)> {
        let s = silverman_for(self.n, self.sigma);
        let g = |e: f64| self.image(e).map(|(phi, c)| (e / phi - 1.0, phi, c));
        let mut lo = s / 100.0;
        let mut hi = s * 100.0;
        let (mut glo, _, _) = g(lo)?;
        let (mut ghi, _, _) = g(hi)?;
        if glo * ghi > 0.0 {
            lo /= 100.0;
            hi *= 100.0;
            glo = g(lo)?.0;
            ghi = g(hi)?.0;
            if glo * ghi > 0.0 {
                return None;
            }
        }
        for it in 1..=max_iter {
            let mid = (lo * hi).sqrt();
            let (gm, phi, c) = g(mid)?;
            if (mid - phi).abs() <= tol * mid {
                return Some((mid, c, it));
            }
            if (gm < 0.0) == (glo < 0.0) {
                lo = mid;
                glo = gm;
            } else {
                hi = mid;
            }
        }
        None
    }
}

/// γ(ε) for `positions` with default spread and summation.
pub fn gamma_of_epsilon(positions: &[f64], epsilon: f64) -> Result<f64> {
    Ok(PlugIn::new(positions, SpreadRule::StdDev, Summation::Auto)?.gamma(epsilon))
}

fn silverman_report(n: usize, sigma: f64, iterations: usize) -> BandwidthReport {
    let (h1, h2) = pilot_bandwidths_for(n, sigma);
    BandwidthReport {
        epsilon: silverman_for(n, sigma),
        h1,
        h2,
        curvature_norm: NORMAL_CURVATURE * sigma.powi(-5),
        iterations,
        method: BandwidthMethod::Silverman,
    }
}

/// Solve-the-equation bandwidth; falls back to Silverman (reported in
/// `method`) when the root finder fails. Errors only on degenerate samples.
pub fn solve_the_equation_bandwidth(positions: &[f64], tol: f64, max_iter: usize) -> Result<BandwidthReport> {
    select_bandwidth(
        positions,
        &BandwidthOptions { tol, max_iter, ..BandwidthOptions::default() },
    )
}

pub fn select_bandwidth(positions: &[f64], opts: &BandwidthOptions) -> Result<BandwidthReport> {
    let sigma = spread(positions, opts.spread)?;
    let n = positions.len();
    match opts.method {
        BandwidthMethod::Silverman => Ok(silverman_report(n, sigma, 0)),
        BandwidthMethod::SolveTheEquation => {
            Ok(solve_with(n, sigma, PairSums::new(positions, opts.summation), opts))
        }
    }
}

pub(crate) fn solve_with(n: usize, sigma: f64, sums: PairSums, opts: &BandwidthOptions) -> BandwidthReport {
    let plug = match PlugIn::with_sums(n, sigma, sums) {
        Ok(p) => p,
        Err(_) => return silverman_report(n, sigma, 0),
    };
    match plug.solve(opts.tol, opts.max_iter) {
        Some((epsilon, curvature_norm, iterations)) => BandwidthReport {
            epsilon,
            h1: plug.h1,
            h2: plug.h2,
            curvature_norm,
            iterations,
            method: BandwidthMethod::SolveTheEquation,
        },
        None => silverman_report(n, sigma, opts.max_iter),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::DensitySpec;
    use crate::noise::sampling_rng;
    use proptest::prelude::*;

    fn normal(n: usize, seed: u64) -> Vec<f64> {
        DensitySpec::gaussian_mixture(&[(1.0, 0.0, 1.0)]).unwrap().sample(n, &mut sampling_rng(seed))
    }

    #[test]
    fn normal_reference_constants() {
        let sp = PI.sqrt();
        assert!((NORMAL_CURVATURE - 3.0 / (8.0 * sp)).abs() < 1e-15);
        assert!((NORMAL_THIRD - 15.0 / (16.0 * sp)).abs() < 1e-15);
        assert!((NORMAL_FOURTH - 105.0 / (32.0 * sp)).abs() < 1e-15);
    }

    #[test]
    fn pilot_values_by_independent_arithmetic() {
        let (h1, h2) = pilot_bandwidths_for(1000, 1.0);
        // (2·(3/√(2π))·(16√π/15)/1000)^(1/7) = (32/(5√2·1000))^(1/7)
        let e1 = (32.0 / (5.0 * 2f64.sqrt() * 1000.0)).powf(1.0 / 7.0);
        // (2·(15/√(2π))·(32√π/105)/1000)^(1/9) = (64/(7√2·1000))^(1/9)
        let e2 = (64.0 / (7.0 * 2f64.sqrt() * 1000.0)).powf(1.0 / 9.0);
        assert!((h1 - e1).abs() < 1e-14 && (h1 - 0.462_482).abs() < 1e-6, "{h1}");
        assert!((h2 - e2).abs() < 1e-14 && (h2 - 0.571_123).abs() < 1e-6, "{h2}");
        let (g1, g2) = pilot_bandwidths_for(1000, 3.0);
        assert!((g1 - 3.0 * h1).abs() < 1e-13 && (g2 - 3.0 * h2).abs() < 1e-13);
    }

    #[test]
    fn silverman_values() {
        assert!((silverman_for(50_000, 1.0) - 0.121_673).abs() < 1e-6);
        assert!((silverman_for(3, 2.0) - (4.0f64 / 9.0).powf(0.2) * 2.0).abs() < 1e-15);
        assert!((silverman_for(10_000, 1.0) - 0.167_876).abs() < 1e-6);
        assert!(matches!(silverman_bandwidth(&[1.0, 1.0, 1.0]), Err(Error::DegenerateSample(_))));
        assert!(matches!(silverman_bandwidth(&[1.0]), Err(Error::DegenerateSample(_))));
        let xs = [0.1, -0.4, 2.0, 0.7];
        let scaled: Vec<f64> = xs.iter().map(|x| 2.5 * x).collect();
        let a = silverman_bandwidth(&xs).unwrap();
        assert!((silverman_bandwidth(&scaled).unwrap() - 2.5 * a).abs() < 1e-14);
    }

    #[test]
    fn robust_spread_never_exceeds_std() {
        let xs = DensitySpec::trimodal().sample(500, &mut sampling_rng(5));
        let r = spread(&xs, SpreadRule::Robust).unwrap();
        assert!(r <= spread(&xs, SpreadRule::StdDev).unwrap());
        assert!(r > 0.0);
    }

    #[test]
    fn amise_example_and_minimizer() {
        assert!((amise(1.0, 1, 4.0) - (1.0 + 1.0 / (2.0 * PI.sqrt()))).abs() < 1e-15);
        assert!((amise(1.0, 1, 4.0) - 1.282_095).abs() < 1e-6);
        for (n, norm) in [(1usize, 4.0), (1000, 0.2), (50_000, 3.7)] {
            let f = |e: f64| amise(e, n, norm);
            let (mut a, mut b) = (1e-4, 10.0);
            let r = (5f64.sqrt() - 1.0) / 2.0;
            while b - a > 1e-10 {
                let c = b - r * (b - a);
                let d = a + r * (b - a);
                if f(c) < f(d) {
                    b = d;
                } else {
                    a = c;
                }
            }
            let opt = optimal_bandwidth(n, norm);
            assert!(((a + b) / 2.0 - opt).abs() < 1e-6, "{n}");
            assert!(f(opt) <= f(2.0 * opt));
        }
    }

    #[test]
    fn gamma_power_law() {
        let xs = normal(300, 7);
        let plug = PlugIn::new(&xs, SpreadRule::StdDev, Summation::Exact).unwrap();
        assert_eq!(plug.gamma(0.0), 0.0);
        let r = plug.gamma(0.4) / plug.gamma(0.2);
        assert!((r - 2f64.powf(5.0 / 7.0)).abs() < 1e-12, "{r}");
        assert!((r - 1.640_671).abs() < 1e-6, "{r}");
        let xs = normal(10_000, 8);
        let g = gamma_of_epsilon(&xs, silverman_bandwidth(&xs).unwrap()).unwrap();
        assert!(g.is_finite() && g > 0.0);
    }

    #[test]
    fn brute_force_agreement_small_samples() {
        let xs = DensitySpec::trimodal().sample(180, &mut sampling_rng(9));
        let n = xs.len() as f64;
        let psi = |s: usize, h: f64| {
            let mut acc = 0.0;
            for &a in &xs {
                for &b in &xs {
                    acc += kernel_deriv(2 * s, (a - b) / h);
                }
            }
            let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
            sign * acc / (n * n * h.powi(2 * s as i32 + 1))
        };
        let (h1, h2) = pilot_bandwidths(&xs).unwrap();
        let eps = 0.3_f64;
        let want = (4.0 * PI.sqrt() * kernel_deriv(4, 0.0) * psi(2, h1) / psi(3, h2)).powf(1.0 / 7.0)
            * eps.powf(5.0 / 7.0);
        let got = gamma_of_epsilon(&xs, eps).unwrap();
        assert!((got - want).abs() <= 1e-10 * want);
        let rep = solve_the_equation_bandwidth(&xs, 1e-10, 300).unwrap();
        assert_eq!(rep.method, BandwidthMethod::SolveTheEquation);
        let c = psi(2, (4.0 * PI.sqrt() * kernel_deriv(4, 0.0) * psi(2, h1) / psi(3, h2)).powf(1.0 / 7.0)
            * rep.epsilon.powf(5.0 / 7.0));
        let phi = (2.0 * n * PI.sqrt() * c).powf(-0.2);
        assert!((rep.epsilon - phi).abs() <= 1e-10 * rep.epsilon);
    }

    #[test]
    fn gaussian_curvature_at_pilot() {
        let mut vals: Vec<f64> = (0..10)
            .map(|seed| {
                let xs = normal(10_000, 100 + seed);
                let (h1, _) = pilot_bandwidths(&xs).unwrap();
                PairSums::new(&xs, Summation::Auto).functional(2, h1)
            })
            .collect();
        let med = stats::median(&mut vals);
        assert!((med / NORMAL_CURVATURE - 1.0).abs() < 0.15, "{med}");
    }

    #[test]
    fn solve_recovers_gaussian_optimum() {
        let target = silverman_for(10_000, 1.0);
        let mut eps: Vec<f64> = (0..10)
            .map(|seed| {
                let r = solve_the_equation_bandwidth(&normal(10_000, 200 + seed), 1e-6, 200).unwrap();
                assert_eq!(r.method, BandwidthMethod::SolveTheEquation);
                r.epsilon
            })
            .collect();
        let med = stats::median(&mut eps);
        assert!((med / target - 1.0).abs() < 0.2, "{med} vs {target}");
    }

    #[test]
    fn trimodal_is_sharper_than_silverman() {
        let xs = DensitySpec::trimodal().sample(10_000, &mut sampling_rng(11));
        let rep = solve_the_equation_bandwidth(&xs, 1e-6, 200).unwrap();
        assert_eq!(rep.method, BandwidthMethod::SolveTheEquation);
        assert!(rep.epsilon < silverman_bandwidth(&xs).unwrap());
    }

    #[test]
    fn silverman_method_report() {
        let xs = normal(400, 12);
        let opts = BandwidthOptions { method: BandwidthMethod::Silverman, ..Default::default() };
        let rep = select_bandwidth(&xs, &opts).unwrap();
        assert_eq!(rep.epsilon, silverman_bandwidth(&xs).unwrap());
        assert_eq!(rep.iterations, 0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn equivariance(seed in 0u64..1000, shift in -50.0f64..50.0, scale in 0.05f64..20.0) {
            let xs = DensitySpec::normal_uniform().sample(120, &mut sampling_rng(seed));
            let tol = 1e-9;
            let base = solve_the_equation_bandwidth(&xs, tol, 300).unwrap();
            let moved: Vec<f64> = xs.iter().map(|x| x + shift).collect();
            let m = solve_the_equation_bandwidth(&moved, tol, 300).unwrap();
            prop_assert!((m.epsilon - base.epsilon).abs() <= 1e-6 * base.epsilon);
            let scaled: Vec<f64> = xs.iter().map(|x| x * scale).collect();
            let s = solve_the_equation_bandwidth(&scaled, tol, 300).unwrap();
            prop_assert!((s.epsilon - scale * base.epsilon).abs() <= 1e-6 * scale * base.epsilon);
            let mut rev = xs.clone();
            rev.reverse();
            let r = solve_the_equation_bandwidth(&rev, tol, 300).unwrap();
            prop_assert_eq!(r.epsilon.to_bits(), base.epsilon.to_bits());
        }
    }
}
