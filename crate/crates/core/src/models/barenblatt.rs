use std::f64::consts::{FRAC_PI_2, PI};

use crate::quad::adaptive_simpson;
use crate::{Error, Result};

/// Constants of the Barenblatt-Pattle density
/// `U(t,x) = t^(−β) (C − κ x² t^(−2β))₊^(1/(m−1))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarenblattProfile {
    pub m: f64,
    /// Self-similarity exponent `1/(m+1)`.
    pub scaling: f64,
    pub kappa: f64,
    pub c: f64,
    /// `∫_{−π/2}^{π/2} cos(θ)^((m+1)/(m−1)) dθ`.
    pub gamma_m: f64,
}

impl BarenblattProfile {
    pub fn new(m: f64) -> Result<Self> {
        if !(m > 1.0) || !m.is_finite() {
            return Err(Error::invalid(format!("Barenblatt exponent must be > 1, got {m}")));
        }
        let scaling = 1.0 / (m + 1.0);
        let kappa = (m - 1.0) / (2.0 * (m + 1.0) * m);
        let p = (m + 1.0) / (m - 1.0);
        let gamma_m = adaptive_simpson(|th: f64| th.cos().max(0.0).powf(p), -FRAC_PI_2, FRAC_PI_2, 1e-13);
        let c = (kappa.sqrt() / gamma_m).powf(2.0 * (m - 1.0) / (m + 1.0));
        Ok(Self {
            m,
            scaling,
            kappa,
            c,
            gamma_m,
        })
    }

    pub fn eval(&self, t: f64, x: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::invalid(format!("Barenblatt density needs t > 0, got {t}")));
        }
        Ok(self.eval_unchecked(t, x))
    }

    fn eval_unchecked(&self, t: f64, x: f64) -> f64 {
        let ts = t.powf(-self.scaling);
        let core = self.c - self.kappa * x * x * ts * ts;
        if core <= 0.0 {
            0.0
        } else {
            ts * core.powf(1.0 / (self.m - 1.0))
        }
    }

    /// Half-width of the support at time `t`.
    pub fn support_radius(&self, t: f64) -> f64 {
        (self.c / self.kappa).sqrt() * t.powf(self.scaling)
    }

    /// Exponent α such that `(1 + x/R)/2 ~ Beta(α, α)` under `U(t, ·)`.
    pub(crate) fn beta_shape(&self) -> f64 {
        self.m / (self.m - 1.0)
    }

    pub(crate) fn density_at_one(&self, x: f64) -> f64 {
        self.eval_unchecked(1.0, x)
    }
}

/// Barenblatt-Pattle density for exponent `m` at time `t > 0`.
pub fn barenblatt(m: f64, t: f64, x: f64) -> Result<f64> {
    BarenblattProfile::new(m)?.eval(t, x)
}

/// Closed form of `U(t+1, x)` for `m = 3`:
/// `(t+1)^(−1/4) √(1/(π√3) − x²/(12√(t+1)))` where the radicand is positive,
/// zero elsewhere. Requires `t ≥ 0`.
pub fn barenblatt_translated(t: f64, x: f64) -> f64 {
    debug_assert!(t >= 0.0, "barenblatt_translated needs t >= 0");
    let s = t + 1.0;
    let radicand = 1.0 / (PI * 3f64.sqrt()) - x * x / (12.0 * s.sqrt());
    if radicand <= 0.0 {
        0.0
    } else {
        s.powf(-0.25) * radicand.sqrt()
    }
}

/// Exact solution of `∂ₜu = ½∂²ₓₓ(u³)` started from `U(1, ·)`.
///
/// The Barenblatt constants above solve `∂ₜu = ∂²ₓₓ(u^m)`; halving the
/// diffusion is a halving of time, so the reference is `U(1 + t/2, x)`.
pub fn pme_reference(t: f64, x: f64) -> f64 {
    barenblatt_translated(0.5 * t, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::simpson;

    const PEAK: f64 = 0.428_691_379_052_495_9;

    #[test]
    fn gamma_three_is_half_pi() {
        let p = BarenblattProfile::new(3.0).unwrap();
        assert!((p.gamma_m - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn gamma_matches_beta_function() {
        // γ_m = B(1/2, (p+1)/2) = √π Γ((p+1)/2) / Γ(p/2 + 1)
        for m in [1.5, 2.0, 3.0, 4.5, 7.0] {
            let p = (m + 1.0) / (m - 1.0);
            let expect = PI.sqrt() * statrs::function::gamma::gamma((p + 1.0) / 2.0)
                / statrs::function::gamma::gamma(p / 2.0 + 1.0);
            let got = BarenblattProfile::new(m).unwrap().gamma_m;
            assert!((got - expect).abs() < 1e-11, "m={m}: {got} vs {expect}");
        }
    }

    #[test]
    fn peak_and_truncation() {
        assert!((barenblatt(3.0, 1.0, 0.0).unwrap() - PEAK).abs() < 1e-12);
        assert!((PEAK - (1.0 / (PI * 3f64.sqrt())).sqrt()).abs() < 1e-15);
        assert_eq!(barenblatt(3.0, 1.0, 2.0).unwrap(), 0.0);
        assert!(barenblatt(3.0, 0.0, 0.0).is_err());
        assert!(barenblatt(3.0, -1.0, 0.0).is_err());
    }

    #[test]
    fn unit_mass_for_several_exponents() {
        for m in [1.5, 2.0, 3.0, 5.0] {
            let p = BarenblattProfile::new(m).unwrap();
            for t in [0.5, 1.0, 2.5] {
                let r = p.support_radius(t);
                // substitute x = r sin θ to remove the edge singularity
                let mass = adaptive_simpson(
                    |th: f64| p.eval(t, r * th.sin()).unwrap() * r * th.cos(),
                    -FRAC_PI_2,
                    FRAC_PI_2,
                    1e-12,
                );
                assert!((mass - 1.0).abs() < 1e-8, "m={m} t={t}: mass {mass}");
            }
        }
    }

    #[test]
    fn translated_examples() {
        assert!((barenblatt_translated(0.0, 0.0) - PEAK).abs() < 1e-15);
        assert!((barenblatt_translated(1.5, 0.0) - 2.5f64.powf(-0.25) * PEAK).abs() < 1e-15);
        assert!((barenblatt_translated(1.5, 0.0) - 0.340_926).abs() < 1e-6);
        let r0 = BarenblattProfile::new(3.0).unwrap().support_radius(1.0);
        assert!((r0 - (4.0 * 3f64.sqrt() / PI).sqrt()).abs() < 1e-12);
        assert_eq!(barenblatt_translated(0.0, r0 + 0.01), 0.0);
        assert!(barenblatt_translated(0.0, r0 - 0.01) > 0.0);
    }

    #[test]
    fn translated_is_shifted_barenblatt() {
        let p = BarenblattProfile::new(3.0).unwrap();
        for t in [0.0, 0.3, 1.5, 4.0] {
            for i in 0..=200 {
                let x = -2.5 + 0.025 * i as f64;
                let a = barenblatt_translated(t, x);
                let b = p.eval(t + 1.0, x).unwrap();
                assert!((a - b).abs() < 1e-13, "t={t} x={x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn translated_has_unit_mass() {
        let r = BarenblattProfile::new(3.0).unwrap().support_radius(2.0);
        let mass = simpson(|th: f64| barenblatt_translated(1.0, r * th.sin()) * r * th.cos(), -FRAC_PI_2, FRAC_PI_2, 2000);
        assert!((mass - 1.0).abs() < 1e-10);
    }

    #[test]
    fn reference_solves_half_diffusion() {
        // finite-difference residual of ∂ₜu − ½∂²ₓₓu³ well inside the support
        let (t, h) = (0.7, 1e-3);
        for x in [-0.8, -0.3, 0.0, 0.45, 0.9] {
            let dt = (pme_reference(t + h, x) - pme_reference(t - h, x)) / (2.0 * h);
            let cube = |y: f64| pme_reference(t, y).powi(3);
            let dxx = (cube(x + h) - 2.0 * cube(x) + cube(x - h)) / (h * h);
            assert!((dt - 0.5 * dxx).abs() < 1e-5, "x={x}: {dt} vs {}", 0.5 * dxx);
        }
    }
}
