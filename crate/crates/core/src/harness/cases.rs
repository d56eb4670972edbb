//! Registry of the benchmark problems at full and reduced scale.

use std::fmt;
use std::str::FromStr;

use crate::kde::BandwidthOptions;
use crate::models::{BetaSpec, DensitySpec};
use crate::particle::Interaction;
use crate::relaxation::{cfl_dt, Grid1D, RkTableau, DEFAULT_C_STAB, DEFAULT_ORDER, DEFAULT_PHI};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestCaseId {
    Barenblatt,
    Tc1,
    Tc2,
    Tc3,
    Tc4,
    Tc5,
}

impl TestCaseId {
    pub const ALL: [TestCaseId; 6] =
        [TestCaseId::Barenblatt, TestCaseId::Tc1, TestCaseId::Tc2, TestCaseId::Tc3, TestCaseId::Tc4, TestCaseId::Tc5];

    pub fn name(self) -> &'static str {
        match self {
            TestCaseId::Barenblatt => "barenblatt",
            TestCaseId::Tc1 => "tc1",
            TestCaseId::Tc2 => "tc2",
            TestCaseId::Tc3 => "tc3",
            TestCaseId::Tc4 => "tc4",
            TestCaseId::Tc5 => "tc5",
        }
    }
}

impl fmt::Display for TestCaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TestCaseId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        TestCaseId::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown case '{s}' (barenblatt, tc1..tc5)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Paper,
    Desk,
}

impl Scale {
    pub fn name(self) -> &'static str {
        match self {
            Scale::Paper => "paper",
            Scale::Desk => "desk",
        }
    }
}

impl FromStr for Scale {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "paper" => Ok(Scale::Paper),
            "desk" => Ok(Scale::Desk),
            other => Err(Error::Config(format!("unknown scale '{other}' (paper, desk)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Particle,
    Relaxation,
    Exact,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Particle => "particle",
            Method::Relaxation => "relaxation",
            Method::Exact => "exact",
        }
    }

    /// Comma-separated list, deduplicated and in canonical order.
    pub fn parse_list(s: &str) -> Result<Vec<Method>> {
        let mut out: Vec<Method> = s.split(',').filter(|p| !p.trim().is_empty()).map(str::parse).collect::<Result<_>>()?;
        out.sort();
        out.dedup();
        if out.is_empty() {
            return Err(Error::Config("no methods given".into()));
        }
        Ok(out)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "particle" | "particles" => Ok(Method::Particle),
            "relaxation" => Ok(Method::Relaxation),
            "exact" => Ok(Method::Exact),
            other => Err(Error::Config(format!("unknown method '{other}' (particle, relaxation, exact)"))),
        }
    }
}

pub const PAPER_DX: f64 = 0.02;
pub const PAPER_DT_DET: f64 = 4e-6;
pub const PAPER_PARTICLES: usize = 50_000;
pub const PAPER_DT_PROB: f64 = 2e-4;
pub const DESK_PARTICLES: usize = 5_000;
pub const DESK_DT_PROB: f64 = 1e-3;
pub const DESK_DX: f64 = 0.05;

/// (u_c or none, a, b, T, snapshot times) per case.
fn layout(id: TestCaseId) -> (Option<f64>, f64, f64, f64, &'static [f64]) {
    match id {
        TestCaseId::Barenblatt => (None, -2.5, 2.5, 1.5, &[0.0, 0.5, 1.0, 1.5]),
        TestCaseId::Tc1 => (Some(0.15), -7.0, 7.0, 0.6, &[0.0, 0.3, 0.6]),
        TestCaseId::Tc2 => (Some(0.08), -8.5, 8.5, 4.0, &[0.0, 2.0, 4.0]),
        TestCaseId::Tc3 => (Some(0.3), -2.5, 2.0, 0.5, &[0.0, 0.1, 0.5]),
        TestCaseId::Tc4 => (Some(0.3), -1.5, 3.5, 0.6, &[0.0, 0.1, 0.6]),
        TestCaseId::Tc5 => (Some(0.35), -2.0, 2.0, 0.45, &[0.0, 0.04, 0.45]),
    }
}

#[derive(Debug, Clone)]
pub struct TestCase {
    pub id: TestCaseId,
    pub scale: Scale,
    pub beta: BetaSpec,
    pub init: DensitySpec,
    pub grid: Grid1D,
    pub horizon: f64,
    pub dt_prob: f64,
    pub dt_det: f64,
    pub n_particles: usize,
    pub snapshot_times: Vec<f64>,
    pub k: usize,
    pub phi: f64,
    pub tableau: RkTableau,
    pub bandwidth: BandwidthOptions,
    pub bandwidth_stride: usize,
    pub interaction: Interaction,
}

impl TestCase {
    pub fn new(id: TestCaseId, scale: Scale) -> Self {
        let (u_c, a, b, horizon, snaps) = layout(id);
        let beta = match u_c {
            Some(u_c) => BetaSpec::heaviside(u_c).expect("registry threshold is positive"),
            None => BetaSpec::power_law(3.0).expect("registry exponent exceeds one"),
        };
        let init = match id {
            TestCaseId::Barenblatt => DensitySpec::barenblatt(3.0).expect("registry exponent exceeds one"),
            TestCaseId::Tc1 | TestCaseId::Tc2 => DensitySpec::trimodal(),
            TestCaseId::Tc3 => DensitySpec::normal_uniform(),
            TestCaseId::Tc4 => DensitySpec::uniform_steps(),
            TestCaseId::Tc5 => DensitySpec::SqrtAbs,
        };
        let (dx, dt_prob, dt_det, n) = match scale {
            Scale::Paper => (PAPER_DX, PAPER_DT_PROB, PAPER_DT_DET, PAPER_PARTICLES),
            Scale::Desk => (DESK_DX, DESK_DT_PROB, cfl_dt(DESK_DX, DEFAULT_C_STAB), DESK_PARTICLES),
        };
        Self {
            id,
            scale,
            beta,
            init,
            grid: Grid1D::with_spacing(a, b, dx).expect("registry spacing divides the domain"),
            horizon,
            dt_prob,
            dt_det,
            n_particles: n,
            snapshot_times: snaps.to_vec(),
            k: DEFAULT_ORDER,
            phi: DEFAULT_PHI,
            tableau: RkTableau::default(),
            bandwidth: BandwidthOptions::default(),
            bandwidth_stride: 1,
            interaction: Interaction::Auto,
        }
    }

    pub fn critical_threshold(&self) -> Option<f64> {
        self.beta.critical_threshold()
    }

    /// Replaces the grid spacing, keeping the domain.
    pub fn set_dx(&mut self, dx: f64) -> Result<()> {
        self.grid = Grid1D::with_spacing(self.grid.a, self.grid.b, dx)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_parameters_verbatim() {
        // (case, u_c, a, b, T)
        let table = [
            (TestCaseId::Tc1, 0.15, -7.0, 7.0, 0.6),
            (TestCaseId::Tc2, 0.08, -8.5, 8.5, 4.0),
            (TestCaseId::Tc3, 0.3, -2.5, 2.0, 0.5),
            (TestCaseId::Tc4, 0.3, -1.5, 3.5, 0.6),
            (TestCaseId::Tc5, 0.35, -2.0, 2.0, 0.45),
        ];
        for (id, u_c, a, b, t) in table {
            let tc = TestCase::new(id, Scale::Paper);
            assert_eq!(tc.critical_threshold(), Some(u_c), "{id}");
            assert_eq!((tc.grid.a, tc.grid.b, tc.horizon), (a, b, t), "{id}");
            assert!((tc.grid.dx() - 0.02).abs() < 1e-14);
            assert_eq!((tc.dt_det, tc.dt_prob, tc.n_particles), (4e-6, 2e-4, 50_000));
        }
        assert_eq!(TestCase::new(TestCaseId::Tc1, Scale::Paper).snapshot_times, vec![0.0, 0.3, 0.6]);
    }

    #[test]
    fn desk_parameters() {
        for id in TestCaseId::ALL {
            let tc = TestCase::new(id, Scale::Desk);
            assert_eq!((tc.n_particles, tc.dt_prob), (5000, 1e-3));
            assert!((tc.grid.dx() - 0.05).abs() < 1e-14 && (tc.dt_det - 2.5e-5).abs() < 1e-18);
        }
    }

    #[test]
    fn parsing() {
        assert_eq!("TC3".parse::<TestCaseId>().unwrap(), TestCaseId::Tc3);
        assert!("tc9".parse::<TestCaseId>().is_err());
        assert_eq!(Method::parse_list("exact,relaxation,exact").unwrap(), vec![Method::Relaxation, Method::Exact]);
        assert!(Method::parse_list("spectral").is_err());
        assert_eq!("desk".parse::<Scale>().unwrap(), Scale::Desk);
    }
}
