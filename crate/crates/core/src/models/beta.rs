use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum BetaKind {
    /// `β(u) = u·|u|^(m−1)`, the classical porous medium nonlinearity.
    PowerLaw { m: f64 },
    /// `β(u) = H(u − u_c)·u`.
    Heaviside { u_c: f64 },
    /// Piecewise-linear β through `(u, β(u))` nodes starting at `(0, 0)`,
    /// extended linearly past the last node and oddly for `u < 0`.
    Tabulated { nodes: Vec<(f64, f64)> },
}

/// The nonlinearity β together with the graph selections needed to turn
/// `Φ(u) = √(β(u)/u)` into a single-valued function.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaSpec {
    pub kind: BetaKind,
    /// Value of Φ at `u = 0`.
    pub phi_at_zero: f64,
    /// Value of Φ exactly at `u = u_c` (Heaviside only). β(u_c) follows as
    /// `phi_at_jump² · u_c` so the pair stays consistent.
    pub phi_at_jump: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degeneracy {
    Degenerate,
    NonDegenerate,
    Neither,
}

impl BetaSpec {
    pub fn power_law(m: f64) -> Result<Self> {
        if !(m > 1.0) || !m.is_finite() {
            return Err(Error::invalid(format!("power-law exponent must be > 1, got {m}")));
        }
        Ok(Self {
            kind: BetaKind::PowerLaw { m },
            phi_at_zero: 0.0,
            phi_at_jump: 1.0,
        })
    }

    pub fn heaviside(u_c: f64) -> Result<Self> {
        if !(u_c > 0.0) || !u_c.is_finite() {
            return Err(Error::invalid(format!("critical threshold must be > 0, got {u_c}")));
        }
        Ok(Self {
            kind: BetaKind::Heaviside { u_c },
            phi_at_zero: 0.0,
            phi_at_jump: 1.0,
        })
    }

    pub fn tabulated(nodes: Vec<(f64, f64)>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::invalid("tabulated beta needs at least two nodes"));
        }
        if nodes[0] != (0.0, 0.0) {
            return Err(Error::invalid("tabulated beta must start at (0, 0)"));
        }
        for w in nodes.windows(2) {
            if !(w[1].0 > w[0].0) || w[1].1 < w[0].1 {
                return Err(Error::invalid(
                    "tabulated beta nodes must have increasing u and nondecreasing beta",
                ));
            }
        }
        if nodes.iter().any(|(u, b)| !u.is_finite() || !b.is_finite()) {
            return Err(Error::invalid("tabulated beta nodes must be finite"));
        }
        let slope = nodes[1].1 / nodes[1].0;
        Ok(Self {
            kind: BetaKind::Tabulated { nodes },
            phi_at_zero: slope.sqrt(),
            phi_at_jump: 1.0,
        })
    }

    pub fn with_phi_at_zero(mut self, c: f64) -> Result<Self> {
        if !(c >= 0.0) || !c.is_finite() {
            return Err(Error::invalid(format!("phi_at_zero must be finite and >= 0, got {c}")));
        }
        self.phi_at_zero = c;
        Ok(self)
    }

    pub fn with_phi_at_jump(mut self, v: f64) -> Result<Self> {
        // β(u_c) = v²·u_c must stay within [0, u_c] for β to be monotone.
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::invalid(format!("phi_at_jump must lie in [0, 1], got {v}")));
        }
        self.phi_at_jump = v;
        Ok(self)
    }

    pub fn critical_threshold(&self) -> Option<f64> {
        match self.kind {
            BetaKind::Heaviside { u_c } => Some(u_c),
            _ => None,
        }
    }

    /// β(u). Negative arguments are handled by odd extension for the power
    /// law and tables, and literally (`H(u − u_c)·u = 0`) for Heaviside.
    pub fn beta(&self, u: f64) -> f64 {
        match &self.kind {
            BetaKind::PowerLaw { m } => u * u.abs().powf(m - 1.0),
            BetaKind::Heaviside { u_c } => {
                if u > *u_c {
                    u
                } else if u == *u_c {
                    self.phi_at_jump * self.phi_at_jump * u
                } else {
                    0.0
                }
            }
            BetaKind::Tabulated { nodes } => u.signum() * table_lookup(nodes, u.abs()),
        }
    }

    /// Φ(u) for `u ≥ 0`.
    pub fn phi(&self, u: f64) -> Result<f64> {
        if !(u >= 0.0) {
            return Err(Error::invalid(format!("phi is defined for u >= 0, got {u}")));
        }
        Ok(self.phi_nonneg(u))
    }

    /// Φ(u) without the sign check; callers guarantee `u ≥ 0`.
    #[inline]
    pub fn phi_nonneg(&self, u: f64) -> f64 {
        if u == 0.0 {
            return self.phi_at_zero;
        }
        match &self.kind {
            BetaKind::PowerLaw { m } => u.powf(0.5 * (m - 1.0)),
            BetaKind::Heaviside { u_c } => {
                if u > *u_c {
                    1.0
                } else if u == *u_c {
                    self.phi_at_jump
                } else {
                    0.0
                }
            }
            BetaKind::Tabulated { nodes } => (table_lookup(nodes, u) / u).sqrt(),
        }
    }

    /// Classification from the behaviour of Φ as `u → 0⁺`.
    pub fn classify(&self) -> Degeneracy {
        match &self.kind {
            BetaKind::PowerLaw { .. } | BetaKind::Heaviside { .. } => Degeneracy::Degenerate,
            // On the first segment β(u)/u is the constant slope, so Φ has a
            // limit at 0⁺ and "Neither" cannot occur for a table.
            BetaKind::Tabulated { nodes } => {
                if nodes[1].1 == 0.0 {
                    Degeneracy::Degenerate
                } else {
                    Degeneracy::NonDegenerate
                }
            }
        }
    }

    /// Upper bound of Φ on `[0, u_max]`.
    pub fn phi_max(&self, u_max: f64) -> f64 {
        match &self.kind {
            BetaKind::PowerLaw { m } => u_max.max(0.0).powf(0.5 * (m - 1.0)),
            BetaKind::Heaviside { .. } => 1.0_f64.max(self.phi_at_zero),
            BetaKind::Tabulated { nodes } => {
                let mut best = self.phi_at_zero;
                for &(u, _) in nodes.iter().skip(1).filter(|(u, _)| *u <= u_max) {
                    best = best.max(self.phi_nonneg(u));
                }
                best.max(self.phi_nonneg(u_max.max(0.0)))
            }
        }
    }
}

fn table_lookup(nodes: &[(f64, f64)], u: f64) -> f64 {
    let idx = nodes.partition_point(|(x, _)| *x <= u);
    let seg = idx.clamp(1, nodes.len() - 1);
    let (x0, y0) = nodes[seg - 1];
    let (x1, y1) = nodes[seg];
    y0 + (y1 - y0) * (u - x0) / (x1 - x0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn beta_examples() {
        let pl = BetaSpec::power_law(3.0).unwrap();
        assert_eq!(pl.beta(2.0), 8.0);
        assert_eq!(pl.beta(-2.0), -8.0);
        let h = BetaSpec::heaviside(0.15).unwrap();
        assert_eq!(h.beta(0.1), 0.0);
        assert_eq!(h.beta(0.2), 0.2);
        assert_eq!(h.beta(0.15), 0.15);
        assert_eq!(h.beta(0.0), 0.0);
    }

    #[test]
    fn phi_examples() {
        let pl = BetaSpec::power_law(3.0).unwrap();
        assert_eq!(pl.phi(4.0).unwrap(), 4.0);
        assert_eq!(pl.phi(0.0).unwrap(), pl.phi_at_zero);
        let h = BetaSpec::heaviside(0.3).unwrap();
        assert_eq!(h.phi(0.5).unwrap(), 1.0);
        assert_eq!(h.phi(0.2).unwrap(), 0.0);
        assert_eq!(h.phi(0.3).unwrap(), 1.0);
        let h = h.with_phi_at_jump(0.0).unwrap();
        assert_eq!(h.phi(0.3).unwrap(), 0.0);
        assert_eq!(h.beta(0.3), 0.0);
        assert!(pl.phi(-1.0).is_err());
    }

    #[test]
    fn classification() {
        assert_eq!(BetaSpec::power_law(3.0).unwrap().classify(), Degeneracy::Degenerate);
        assert_eq!(BetaSpec::heaviside(0.4).unwrap().classify(), Degeneracy::Degenerate);
        let lin = BetaSpec::tabulated(vec![(0.0, 0.0), (1.0, 1.0)]).unwrap();
        assert_eq!(lin.classify(), Degeneracy::NonDegenerate);
        assert_eq!(lin.phi(7.5).unwrap(), 1.0);
        assert_eq!(lin.phi(0.0).unwrap(), 1.0);
        let dead = BetaSpec::tabulated(vec![(0.0, 0.0), (0.5, 0.0), (1.0, 0.5)]).unwrap();
        assert_eq!(dead.classify(), Degeneracy::Degenerate);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(BetaSpec::power_law(1.0).is_err());
        assert!(BetaSpec::heaviside(0.0).is_err());
        assert!(BetaSpec::tabulated(vec![(0.1, 0.0), (1.0, 1.0)]).is_err());
        assert!(BetaSpec::tabulated(vec![(0.0, 0.0), (1.0, 1.0), (2.0, 0.5)]).is_err());
        assert!(BetaSpec::heaviside(0.2).unwrap().with_phi_at_jump(1.5).is_err());
    }

    fn any_beta() -> impl Strategy<Value = BetaSpec> {
        prop_oneof![
            (1.1f64..5.0).prop_map(|m| BetaSpec::power_law(m).unwrap()),
            (0.01f64..2.0).prop_map(|u| BetaSpec::heaviside(u).unwrap()),
            (0.1f64..3.0, 0.0f64..2.0).prop_map(|(s1, s2)| {
                BetaSpec::tabulated(vec![(0.0, 0.0), (0.5, 0.5 * s1), (1.0, 0.5 * s1 + 0.5 * s2)]).unwrap()
            }),
        ]
    }

    proptest! {
        #[test]
        fn beta_is_monotone_on_nonnegatives(b in any_beta(), u1 in 0.0f64..5.0, du in 0.0f64..5.0) {
            prop_assert!(b.beta(u1) <= b.beta(u1 + du));
            prop_assert_eq!(b.beta(0.0), 0.0);
        }

        #[test]
        fn phi_squared_times_u_is_beta(b in any_beta(), u in 1e-6f64..10.0) {
            prop_assume!(b.critical_threshold() != Some(u));
            let phi = b.phi(u).unwrap();
            let lhs = phi * phi * u;
            let rhs = b.beta(u);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(f64::MIN_POSITIVE));
        }
    }
}
