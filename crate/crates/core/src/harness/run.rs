//! Runs a test case with several methods in lockstep and collects errors.

use super::cases::{Method, TestCase, TestCaseId};
use super::metrics::{attracting_set_check, lp_error, AttractingSetCheck, Norm};
use crate::kde::BandwidthReport;
use crate::models::pme_reference;
use crate::particle::{estimate_density_with, FreezeReport, ParticleConfig, ParticleSimulation};
use crate::relaxation::{plateau_width, GridField, RelaxationConfig, RelaxationSolver};
use crate::{Error, Result};

/// Margin below `u_c` at which particles are expected to stop moving.
pub const FREEZE_MARGIN: f64 = 0.05;
/// Tolerance of the plateau diagnostic.
pub const PLATEAU_TOL: f64 = 0.02;
pub const ATTRACTING_TOL: f64 = 0.03;

#[derive(Debug, Clone)]
pub struct MethodSnapshots {
    pub method: Method,
    pub fields: Vec<GridField>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRow {
    pub time: f64,
    /// (L1, L2) per pair, in the order of [`RunReport::pairs`].
    pub values: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct MethodDiagnostics {
    pub method: Method,
    /// Grid mass at every error time.
    pub mass: Vec<f64>,
    pub max: Vec<f64>,
    /// Longest run of cells near `u_c` at the final time (threshold cases).
    pub plateau_width: Option<usize>,
    pub attracting: Option<AttractingSetCheck>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub case: TestCaseId,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub pairs: Vec<(Method, Method)>,
    pub snapshots: Vec<MethodSnapshots>,
    pub errors: Vec<ErrorRow>,
    pub bandwidths: Vec<(f64, BandwidthReport)>,
    pub diagnostics: Vec<MethodDiagnostics>,
    pub freeze: Option<FreezeReport>,
}

impl RunReport {
    pub fn snapshots_of(&self, m: Method) -> Option<&[GridField]> {
        self.snapshots.iter().find(|s| s.method == m).map(|s| s.fields.as_slice())
    }

    pub fn diagnostics_of(&self, m: Method) -> Option<&MethodDiagnostics> {
        self.diagnostics.iter().find(|d| d.method == m)
    }

    pub fn pair_index(&self, a: Method, b: Method) -> Option<usize> {
        self.pairs.iter().position(|&p| p == (a, b))
    }

    /// (t, L1, L2) for one pair.
    pub fn error_series(&self, a: Method, b: Method) -> Option<Vec<(f64, f64, f64)>> {
        let i = self.pair_index(a, b)?;
        Some(self.errors.iter().map(|r| (r.time, r.values[i].0, r.values[i].1)).collect())
    }
}

/// Comparison pairs among `methods` in canonical order.
pub fn comparison_pairs(methods: &[Method]) -> Vec<(Method, Method)> {
    let has = |m| methods.contains(&m);
    [(Method::Particle, Method::Relaxation), (Method::Particle, Method::Exact), (Method::Relaxation, Method::Exact)]
        .into_iter()
        .filter(|&(a, b)| has(a) && has(b))
        .collect()
}

enum Solver {
    Particle(Box<ParticleSimulation>),
    Relaxation(Box<RelaxationSolver>),
    Exact,
}

/// Runs `methods` on `tc`. Errors are recorded at every probabilistic step
/// when particles take part and at the snapshot times otherwise.
pub fn run_test_case(tc: &TestCase, methods: &[Method], seed: u64) -> Result<RunReport> {
    let mut methods = methods.to_vec();
    methods.sort();
    methods.dedup();
    if methods.is_empty() {
        return Err(Error::Config("no methods requested".into()));
    }
    if methods.contains(&Method::Exact) && tc.id != TestCaseId::Barenblatt {
        return Err(Error::Config(format!("no exact solution is known for {}", tc.id)));
    }
    let pconf = ParticleConfig {
        n: tc.n_particles,
        dt: tc.dt_prob,
        horizon: tc.horizon,
        beta: tc.beta.clone(),
        init: tc.init.clone(),
        seed,
        bandwidth: tc.bandwidth,
        bandwidth_stride: tc.bandwidth_stride,
        snapshot_times: tc.snapshot_times.clone(),
        interaction: tc.interaction,
    };
    let steps = pconf.steps()?;
    let with_particles = methods.contains(&Method::Particle);
    let times: Vec<f64> = if with_particles {
        (0..=steps).map(|k| k as f64 * tc.dt_prob).collect()
    } else {
        tc.snapshot_times.clone()
    };
    // snapshot i is taken at the error time closest to it
    let snap_at: Vec<usize> = tc
        .snapshot_times
        .iter()
        .map(|&t| {
            (0..times.len())
                .min_by(|&a, &b| (times[a] - t).abs().total_cmp(&(times[b] - t).abs()))
                .unwrap_or(0)
        })
        .collect();

    let mut solvers = Vec::with_capacity(methods.len());
    for &m in &methods {
        solvers.push(match m {
            Method::Particle => {
                let mut sim = ParticleSimulation::new(pconf.clone())?;
                if let Some(u_c) = tc.critical_threshold() {
                    sim.track_freezing(u_c - FREEZE_MARGIN);
                }
                Solver::Particle(Box::new(sim))
            }
            Method::Relaxation => {
                let mut rc = RelaxationConfig::new(tc.grid, tc.beta.clone(), tc.init.clone(), tc.horizon);
                rc.k = tc.k;
                rc.phi = tc.phi;
                rc.tableau = tc.tableau.clone();
                rc.dt = Some(tc.dt_det);
                rc.snapshot_times = tc.snapshot_times.clone();
                Solver::Relaxation(Box::new(RelaxationSolver::new(rc)?))
            }
            Method::Exact => Solver::Exact,
        });
    }

    let pairs = comparison_pairs(&methods);
    let mut report = RunReport {
        case: tc.id,
        seed,
        methods: methods.clone(),
        pairs: pairs.clone(),
        snapshots: methods.iter().map(|&method| MethodSnapshots { method, fields: Vec::new() }).collect(),
        errors: Vec::with_capacity(times.len()),
        bandwidths: Vec::new(),
        diagnostics: methods
            .iter()
            .map(|&method| MethodDiagnostics { method, mass: Vec::new(), max: Vec::new(), plateau_width: None, attracting: None })
            .collect(),
        freeze: None,
    };

    let mut fields: Vec<GridField> = Vec::with_capacity(methods.len());
    for (ti, &t) in times.iter().enumerate() {
        fields.clear();
        for solver in solvers.iter_mut() {
            fields.push(match solver {
                Solver::Particle(sim) => {
                    while sim.ensemble().time < t - 0.5 * tc.dt_prob {
                        sim.step()?;
                    }
                    let ens = sim.ensemble();
                    report.bandwidths.push((ens.time, ens.report));
                    estimate_density_with(&ens.positions, ens.epsilon, t, tc.grid, tc.interaction)
                }
                Solver::Relaxation(s) => {
                    s.advance_to(t)?;
                    s.field().clone()
                }
                Solver::Exact => GridField::project(tc.grid, t, |x| pme_reference(t, x)),
            });
        }
        let mut row = ErrorRow { time: t, values: Vec::with_capacity(pairs.len()) };
        for &(a, b) in &pairs {
            let fa = &fields[methods.iter().position(|&m| m == a).expect("pair member")];
            let fb = &fields[methods.iter().position(|&m| m == b).expect("pair member")];
            row.values.push((lp_error(fa, fb, Norm::L1)?, lp_error(fa, fb, Norm::L2)?));
        }
        report.errors.push(row);
        for (d, f) in report.diagnostics.iter_mut().zip(&fields) {
            d.mass.push(f.mass());
            d.max.push(f.max());
        }
        for _ in snap_at.iter().filter(|&&i| i == ti) {
            for (s, f) in report.snapshots.iter_mut().zip(&fields) {
                s.fields.push(f.clone());
            }
        }
    }

    if let Some(u_c) = tc.critical_threshold() {
        for (d, f) in report.diagnostics.iter_mut().zip(&fields) {
            d.plateau_width = Some(plateau_width(f, u_c, PLATEAU_TOL));
            d.attracting = Some(attracting_set_check(f, u_c, ATTRACTING_TOL));
        }
    }
    for solver in &solvers {
        if let Solver::Particle(sim) = solver {
            report.freeze = sim.freeze_report().cloned();
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::cases::Scale;

    #[test]
    fn exact_needs_barenblatt() {
        let tc = TestCase::new(TestCaseId::Tc1, Scale::Desk);
        assert!(matches!(run_test_case(&tc, &[Method::Exact], 1), Err(Error::Config(_))));
    }

    #[test]
    fn deterministic_only_shape() {
        let mut tc = TestCase::new(TestCaseId::Barenblatt, Scale::Desk);
        tc.horizon = 0.1;
        tc.snapshot_times = vec![0.0, 0.05, 0.1];
        let r = run_test_case(&tc, &[Method::Exact, Method::Relaxation], 0).unwrap();
        assert_eq!(r.pairs, vec![(Method::Relaxation, Method::Exact)]);
        assert_eq!(r.errors.len(), 3);
        assert_eq!(r.snapshots_of(Method::Relaxation).unwrap().len(), 3);
        assert!(r.errors[0].values[0].1 < 1e-14);
        assert!(r.errors[2].values[0].1 < 0.02);
    }

    #[test]
    fn particle_rows_per_step() {
        let mut tc = TestCase::new(TestCaseId::Tc1, Scale::Desk);
        tc.n_particles = 500;
        tc.horizon = 0.02;
        tc.snapshot_times = vec![0.0, 0.01, 0.02];
        let r = run_test_case(&tc, &[Method::Relaxation, Method::Particle], 3).unwrap();
        assert_eq!(r.errors.len(), 21);
        assert_eq!(r.bandwidths.len(), 21);
        let snaps = r.snapshots_of(Method::Particle).unwrap();
        assert_eq!(snaps.iter().map(|f| f.time).collect::<Vec<_>>(), vec![0.0, 0.01, 0.02]);
        assert!(r.errors.iter().all(|row| row.values.iter().all(|v| v.0.is_finite() && v.1 >= 0.0)));
        assert!(r.freeze.is_some());
        assert!(r.diagnostics_of(Method::Relaxation).unwrap().plateau_width.is_some());
    }
}
