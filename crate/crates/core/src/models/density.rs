use std::f64::consts::{PI, SQRT_2};

use rand::Rng;
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::beta::{beta_reg, ln_beta};
use statrs::function::erf::erf;

use super::barenblatt::BarenblattProfile;
use crate::noise::open_unit;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Component {
    Normal { mean: f64, std: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl Component {
    fn pdf(&self, x: f64) -> f64 {
        match *self {
            Component::Normal { mean, std } => {
                let z = (x - mean) / std;
                (-0.5 * z * z).exp() / ((2.0 * PI).sqrt() * std)
            }
            Component::Uniform { lo, hi } => {
                if (lo..=hi).contains(&x) {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        match *self {
            Component::Normal { mean, std } => 0.5 * (1.0 + erf((x - mean) / (std * SQRT_2))),
            Component::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
        }
    }

    fn quantile(&self, p: f64) -> f64 {
        match *self {
            Component::Normal { mean, std } => Normal::new(mean, std)
                .expect("validated normal component")
                .inverse_cdf(p),
            Component::Uniform { lo, hi } => lo + p * (hi - lo),
        }
    }
}

/// Initial probability densities used by the test cases.
#[derive(Debug, Clone, PartialEq)]
pub enum DensitySpec {
    /// Finite mixture of normal and uniform laws. Weights are the masses
    /// carried by each component and sum to one.
    Mixture(Vec<(f64, Component)>),
    /// `(3/4)√|x|` on `[−1, 1]`.
    SqrtAbs,
    /// Barenblatt-Pattle profile `U(1, ·)`.
    Barenblatt(BarenblattProfile),
}

impl DensitySpec {
    pub fn mixture(components: Vec<(f64, Component)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid("mixture needs at least one component"));
        }
        for (w, c) in &components {
            if !(*w > 0.0) || !w.is_finite() {
                return Err(Error::invalid(format!("mixture weight must be > 0, got {w}")));
            }
            match *c {
                Component::Normal { mean, std } if !(std > 0.0) || !mean.is_finite() || !std.is_finite() => {
                    return Err(Error::invalid(format!("bad normal component ({mean}, {std})")));
                }
                Component::Uniform { lo, hi } if !(hi > lo) || !lo.is_finite() || !hi.is_finite() => {
                    return Err(Error::invalid(format!("bad uniform component [{lo}, {hi}]")));
                }
                _ => {}
            }
        }
        let total: f64 = components.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::invalid(format!("mixture weights sum to {total}, expected 1")));
        }
        Ok(DensitySpec::Mixture(components))
    }

    /// Mixture of normals given as `(weight, mean, std)`.
    pub fn gaussian_mixture(parts: &[(f64, f64, f64)]) -> Result<Self> {
        Self::mixture(
            parts
                .iter()
                .map(|&(w, mean, std)| (w, Component::Normal { mean, std }))
                .collect(),
        )
    }

    /// Sum of `height · 1_[lo, hi]` terms given as `(height, lo, hi)`.
    pub fn uniform_mixture(parts: &[(f64, f64, f64)]) -> Result<Self> {
        Self::mixture(
            parts
                .iter()
                .map(|&(h, lo, hi)| (h * (hi - lo), Component::Uniform { lo, hi }))
                .collect(),
        )
    }

    /// Equal-weight trimodal normal mixture with modes at −4, 0, 4.
    pub fn trimodal() -> Self {
        Self::gaussian_mixture(&[(1.0 / 3.0, -4.0, 0.1), (1.0 / 3.0, 0.0, 0.2), (1.0 / 3.0, 4.0, 0.3)])
            .expect("static parameters")
    }

    /// `½ (p(x, −1, 0.2) + 1_[0,1](x))`.
    pub fn normal_uniform() -> Self {
        Self::mixture(vec![
            (0.5, Component::Normal { mean: -1.0, std: 0.2 }),
            (0.5, Component::Uniform { lo: 0.0, hi: 1.0 }),
        ])
        .expect("static parameters")
    }

    /// `(1/5)1_[0,1] + (3/4)1_[−1/5,1/5] + (5/8)1_[6/5,2]`.
    pub fn uniform_steps() -> Self {
        Self::uniform_mixture(&[(0.2, 0.0, 1.0), (0.75, -0.2, 0.2), (0.625, 1.2, 2.0)]).expect("static parameters")
    }

    pub fn barenblatt(m: f64) -> Result<Self> {
        Ok(DensitySpec::Barenblatt(BarenblattProfile::new(m)?))
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            DensitySpec::Mixture(parts) => parts.iter().map(|(w, c)| w * c.pdf(x)).sum(),
            DensitySpec::SqrtAbs => {
                if x.abs() <= 1.0 {
                    0.75 * x.abs().sqrt()
                } else {
                    0.0
                }
            }
            DensitySpec::Barenblatt(p) => p.density_at_one(x),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            DensitySpec::Mixture(parts) => parts.iter().map(|(w, c)| w * c.cdf(x)).sum::<f64>().min(1.0),
            DensitySpec::SqrtAbs => {
                let y = x.clamp(-1.0, 1.0);
                0.5 + 0.5 * y.signum() * y.abs().powf(1.5)
            }
            DensitySpec::Barenblatt(p) => {
                let r = p.support_radius(1.0);
                let a = p.beta_shape();
                beta_reg(a, a, (0.5 * (1.0 + x / r)).clamp(0.0, 1.0))
            }
        }
    }

    /// Interval holding all but a negligible amount of mass, together with the
    /// points where the density is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts = match self {
            DensitySpec::Mixture(parts) => parts
                .iter()
                .flat_map(|(_, c)| match *c {
                    Component::Normal { mean, std } => [mean - 12.0 * std, mean + 12.0 * std],
                    Component::Uniform { lo, hi } => [lo, hi],
                })
                .collect(),
            DensitySpec::SqrtAbs => vec![-1.0, 0.0, 1.0],
            DensitySpec::Barenblatt(p) => {
                let r = p.support_radius(1.0);
                vec![-r, r]
            }
        };
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// `n` independent draws, by inverse CDF after a categorical component
    /// draw for mixtures.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n).map(|_| self.draw(rng)).collect()
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            DensitySpec::Mixture(parts) => {
                let pick = open_unit(rng);
                let mut acc = 0.0;
                let mut chosen = &parts[parts.len() - 1].1;
                for (w, c) in parts {
                    acc += w;
                    if pick < acc {
                        chosen = c;
                        break;
                    }
                }
                chosen.quantile(open_unit(rng))
            }
            DensitySpec::SqrtAbs => {
                let u = open_unit(rng);
                if u >= 0.5 {
                    (2.0 * u - 1.0).powf(2.0 / 3.0)
                } else {
                    -(1.0 - 2.0 * u).powf(2.0 / 3.0)
                }
            }
            DensitySpec::Barenblatt(p) => {
                let u = open_unit(rng);
                let y = symmetric_beta_quantile(p.beta_shape(), u);
                p.support_radius(1.0) * (2.0 * y - 1.0)
            }
        }
    }
}

/// Quantile of `Beta(a, a)` by safeguarded Newton on the regularized
/// incomplete beta function.
fn symmetric_beta_quantile(a: f64, u: f64) -> f64 {
    let log_norm = ln_beta(a, a);
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut y = 0.5;
    for _ in 0..100 {
        let f = beta_reg(a, a, y) - u;
        if f.abs() < 1e-15 {
            break;
        }
        if f > 0.0 {
            hi = y;
        } else {
            lo = y;
        }
        let dens = ((a - 1.0) * (y.ln() + (1.0 - y).ln()) - log_norm).exp();
        let newton = y - f / dens;
        y = if newton > lo && newton < hi && dens.is_finite() {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo < 1e-16 {
            break;
        }
    }
    y
}
