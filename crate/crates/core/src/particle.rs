//! Interacting particle approximation: Euler steps of
//! `dXⁱ = Φ(u^ε(Xⁱ)) dWⁱ` with a kernel density estimate of the law.

use crate::kde::{
    kde_eval, kde_on_sorted, select_bandwidth, BandwidthOptions, BandwidthReport, BinnedCounts, AUTO_EXACT_LIMIT,
    DEFAULT_BINS,
};
use crate::models::{BetaSpec, DensitySpec};
use crate::noise::{sampling_rng, BrownianIncrements};
use crate::relaxation::{Grid1D, GridField};
use crate::{Error, Result};

/// How the density at the particle sites is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interaction {
    /// All n² kernel terms.
    Exact,
    /// Kernel cut at 8ε on sorted positions.
    Truncated,
    /// Linear binning and FFT convolution, interpolated back to the sites.
    Binned { bins: usize },
    /// Exact for small ensembles, binned on the default grid otherwise.
    Auto,
}

impl Interaction {
    fn resolve(self, n: usize) -> Interaction {
        match self {
            Interaction::Auto if n <= AUTO_EXACT_LIMIT => Interaction::Exact,
            Interaction::Auto => Interaction::Binned { bins: DEFAULT_BINS },
            other => other,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ParticleConfig {
    pub n: usize,
    pub dt: f64,
    pub horizon: f64,
    pub beta: BetaSpec,
    pub init: DensitySpec,
    pub seed: u64,
    pub bandwidth: BandwidthOptions,
    /// Re-select the bandwidth every this many steps.
    pub bandwidth_stride: usize,
    pub snapshot_times: Vec<f64>,
    pub interaction: Interaction,
}

impl ParticleConfig {
    pub fn new(n: usize, dt: f64, horizon: f64, beta: BetaSpec, init: DensitySpec, seed: u64) -> Self {
        Self {
            n,
            dt,
            horizon,
            beta,
            init,
            seed,
            bandwidth: BandwidthOptions::default(),
            bandwidth_stride: 1,
            snapshot_times: vec![0.0, horizon],
            interaction: Interaction::Auto,
        }
    }

    /// Number of steps N with T = NΔt.
    pub fn steps(&self) -> Result<u64> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid(format!("time step must be > 0, got {}", self.dt)));
        }
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return Err(Error::invalid(format!("horizon must be >= 0, got {}", self.horizon)));
        }
        let ratio = self.horizon / self.dt;
        let n = ratio.round();
        if (ratio - n).abs() > 1e-9 * n.max(1.0) {
            return Err(Error::invalid(format!(
                "horizon {} is not a whole number of steps of {}",
                self.horizon, self.dt
            )));
        }
        Ok(n as u64)
    }

    fn validate(&self) -> Result<u64> {
        let steps = self.steps()?;
        if self.n == 0 {
            return Err(Error::invalid("need at least one particle"));
        }
        if self.bandwidth_stride == 0 {
            return Err(Error::invalid("bandwidth stride must be >= 1"));
        }
        let t_max = self.horizon * (1.0 + 1e-12);
        if self.snapshot_times.iter().any(|&t| !(0.0..=t_max).contains(&t)) {
            return Err(Error::invalid("snapshot times must lie in [0, T]"));
        }
        Ok(steps)
    }

    /// Step index closest to time `t`.
    pub fn step_of(&self, t: f64) -> u64 {
        (t / self.dt).round() as u64
    }
}

#[derive(Debug, Clone)]
pub struct ParticleEnsemble {
    pub positions: Vec<f64>,
    pub time: f64,
    pub step: u64,
    pub epsilon: f64,
    pub report: BandwidthReport,
}

/// Bandwidth for an ensemble; a single particle gets no spread estimate,
/// so it keeps the unit bandwidth.
fn bandwidth_for(positions: &[f64], opts: &BandwidthOptions) -> Result<BandwidthReport> {
    if positions.len() == 1 {
        return Ok(BandwidthReport {
            epsilon: 1.0,
            h1: 1.0,
            h2: 1.0,
            curvature_norm: f64::NAN,
            iterations: 0,
            method: opts.method,
        });
    }
    select_bandwidth(positions, opts)
}

pub fn init_ensemble(config: &ParticleConfig) -> Result<ParticleEnsemble> {
    config.validate()?;
    let positions = config.init.sample(config.n, &mut sampling_rng(config.seed));
    let report = bandwidth_for(&positions, &config.bandwidth)?;
    Ok(ParticleEnsemble { positions, time: 0.0, step: 0, epsilon: report.epsilon, report })
}

/// Kernel density estimate at every particle site.
pub fn density_at_particles(positions: &[f64], epsilon: f64, interaction: Interaction) -> Vec<f64> {
    match interaction.resolve(positions.len()) {
        Interaction::Exact => positions.iter().map(|&x| kde_eval(positions, epsilon, x)).collect(),
        Interaction::Truncated => {
            let mut sorted = positions.to_vec();
            sorted.sort_by(f64::total_cmp);
            kde_on_sorted(&sorted, epsilon, positions)
        }
        Interaction::Binned { bins } => match BinnedCounts::new(positions, bins) {
            Some(b) => {
                let nodes = b.density_on_nodes(epsilon);
                positions.iter().map(|&x| b.interpolate(&nodes, x)).collect()
            }
            // every particle at one point
            None => vec![kde_eval(&positions[..1], epsilon, positions[0]); positions.len()],
        },
        Interaction::Auto => unreachable!(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    pub max_displacement: f64,
    pub max_increment: f64,
    /// Largest density estimate over the pre-step particle sites.
    pub max_density: f64,
    /// Largest Φ applied.
    pub max_phi: f64,
}

/// Advances `ens` by one step of `config.dt`.
pub fn euler_step(ens: &mut ParticleEnsemble, config: &ParticleConfig) -> Result<StepDiagnostics> {
    let noise = BrownianIncrements::new(config.seed);
    let mut z = vec![0.0; ens.positions.len()];
    step_with(ens, config, &noise, &mut z)
}

fn step_with(
    ens: &mut ParticleEnsemble,
    config: &ParticleConfig,
    noise: &BrownianIncrements,
    z: &mut [f64],
) -> Result<StepDiagnostics> {
    // the sampling stream is reserved; steps never get near it
    let density = density_at_particles(&ens.positions, ens.epsilon, config.interaction);
    noise.fill_standard_normals(ens.step, z);
    let sqrt_dt = config.dt.sqrt();
    let time = (ens.step + 1) as f64 * config.dt;
    let mut diag = StepDiagnostics { max_displacement: 0.0, max_increment: 0.0, max_density: 0.0, max_phi: 0.0 };
    for (i, ((x, &u), &zi)) in ens.positions.iter_mut().zip(&density).zip(z.iter()).enumerate() {
        let phi = config.beta.phi_nonneg(u.max(0.0));
        let dw = sqrt_dt * zi;
        let next = *x + phi * dw;
        if !next.is_finite() {
            return Err(Error::ParticleBlowUp { index: i, time });
        }
        diag.max_displacement = diag.max_displacement.max((next - *x).abs());
        diag.max_increment = diag.max_increment.max(dw.abs());
        diag.max_density = diag.max_density.max(u);
        diag.max_phi = diag.max_phi.max(phi);
        *x = next;
    }
    ens.step += 1;
    ens.time = time;
    if ens.step % config.bandwidth_stride as u64 == 0 {
        ens.report = bandwidth_for(&ens.positions, &config.bandwidth)?;
        ens.epsilon = ens.report.epsilon;
    }
    Ok(diag)
}

/// Whether particles stayed put once the density dropped below a threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct FreezeReport {
    pub threshold: f64,
    /// Time at which the site density maximum first fell below `threshold`.
    pub triggered_at: Option<f64>,
    /// Steps after the trigger in which some particle moved.
    pub moved_after: usize,
}

impl FreezeReport {
    pub fn held(&self) -> bool {
        self.moved_after == 0
    }
}

/// Stepping driver owning the ensemble and its scratch space.
#[derive(Debug, Clone)]
pub struct ParticleSimulation {
    config: ParticleConfig,
    ens: ParticleEnsemble,
    noise: BrownianIncrements,
    total_steps: u64,
    z: Vec<f64>,
    freeze: Option<(FreezeReport, Option<Vec<f64>>)>,
}

impl ParticleSimulation {
    pub fn new(config: ParticleConfig) -> Result<Self> {
        let total_steps = config.validate()?;
        let ens = init_ensemble(&config)?;
        let noise = BrownianIncrements::new(config.seed);
        let z = vec![0.0; config.n];
        Ok(Self { config, ens, noise, total_steps, z, freeze: None })
    }

    /// Watch for the density maximum dropping below `threshold`.
    pub fn track_freezing(&mut self, threshold: f64) {
        self.freeze = Some((FreezeReport { threshold, triggered_at: None, moved_after: 0 }, None));
    }

    pub fn freeze_report(&self) -> Option<&FreezeReport> {
        self.freeze.as_ref().map(|(r, _)| r)
    }

    pub fn config(&self) -> &ParticleConfig {
        &self.config
    }

    pub fn ensemble(&self) -> &ParticleEnsemble {
        &self.ens
    }

    pub fn total_steps(&self) -> u64 {
        self.total_steps
    }

    pub fn is_done(&self) -> bool {
        self.ens.step >= self.total_steps
    }

    pub fn step(&mut self) -> Result<StepDiagnostics> {
        if self.is_done() {
            return Err(Error::invalid("simulation already reached its horizon"));
        }
        let pre_time = self.ens.time;
        let diag = step_with(&mut self.ens, &self.config, &self.noise, &mut self.z)?;
        if let Some((report, frozen)) = &mut self.freeze {
            match frozen {
                Some(p) => {
                    if *p != self.ens.positions {
                        report.moved_after += 1;
                        *p = self.ens.positions.clone();
                    }
                }
                None if diag.max_density < report.threshold => {
                    report.triggered_at = Some(pre_time);
                    *frozen = Some(self.ens.positions.clone());
                }
                None => {}
            }
        }
        Ok(diag)
    }
}

#[derive(Debug, Clone)]
pub struct ParticleSnapshot {
    pub time: f64,
    pub positions: Vec<f64>,
    pub report: BandwidthReport,
}

/// Runs all N steps, calling `observe` on the initial ensemble and after
/// every step.
pub fn run_particles_with<F>(config: ParticleConfig, mut observe: F) -> Result<ParticleSimulation>
where
    F: FnMut(&ParticleEnsemble, Option<&StepDiagnostics>) -> Result<()>,
{
    let mut sim = ParticleSimulation::new(config)?;
    observe(sim.ensemble(), None)?;
    while !sim.is_done() {
        let diag = sim.step()?;
        observe(sim.ensemble(), Some(&diag))?;
    }
    Ok(sim)
}

/// Snapshots at the steps nearest the requested times.
pub fn run_particles(config: ParticleConfig) -> Result<Vec<ParticleSnapshot>> {
    let wanted: Vec<u64> = config.snapshot_times.iter().map(|&t| config.step_of(t)).collect();
    let mut out = Vec::with_capacity(wanted.len());
    run_particles_with(config, |ens, _| {
        for _ in wanted.iter().filter(|&&s| s == ens.step) {
            out.push(ParticleSnapshot { time: ens.time, positions: ens.positions.clone(), report: ens.report });
        }
        Ok(())
    })?;
    Ok(out)
}

/// Kernel estimate at the cell centres of `grid`.
pub fn estimate_density(ens: &ParticleEnsemble, grid: Grid1D) -> GridField {
    estimate_density_with(&ens.positions, ens.epsilon, ens.time, grid, Interaction::Truncated)
}

pub fn estimate_density_with(positions: &[f64], epsilon: f64, time: f64, grid: Grid1D, how: Interaction) -> GridField {
    let centers = grid.centers();
    let values = match how.resolve(positions.len()) {
        Interaction::Exact => centers.iter().map(|&x| kde_eval(positions, epsilon, x)).collect(),
        Interaction::Binned { bins } => match BinnedCounts::new(positions, bins) {
            Some(b) => {
                let nodes = b.density_on_nodes(epsilon);
                let (lo, hi) = (b.node(0), b.node(b.bins() - 1));
                let mut sorted = Vec::new();
                centers
                    .iter()
                    .map(|&x| {
                        if x >= lo && x <= hi {
                            b.interpolate(&nodes, x)
                        } else {
                            // outside the particle range the binned grid has no nodes
                            if sorted.is_empty() {
                                sorted = positions.to_vec();
                                sorted.sort_by(f64::total_cmp);
                            }
                            kde_on_sorted(&sorted, epsilon, &[x])[0]
                        }
                    })
                    .collect()
            }
            None => centers.iter().map(|&x| kde_eval(&positions[..1], epsilon, x)).collect(),
        },
        _ => {
            let mut sorted = positions.to_vec();
            sorted.sort_by(f64::total_cmp);
            kde_on_sorted(&sorted, epsilon, &centers)
        }
    };
    GridField { grid, values, time }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kde::BandwidthMethod;
    use crate::stats;

    fn normal() -> DensitySpec {
        DensitySpec::gaussian_mixture(&[(1.0, 0.0, 1.0)]).unwrap()
    }

    fn unit_phi() -> BetaSpec {
        BetaSpec::tabulated(vec![(0.0, 0.0), (1.0, 1.0)]).unwrap()
    }

    fn silverman(mut c: ParticleConfig) -> ParticleConfig {
        c.bandwidth.method = BandwidthMethod::Silverman;
        c
    }

    #[test]
    fn init_statistics_and_determinism() {
        let cfg = silverman(ParticleConfig::new(100_000, 0.1, 0.1, unit_phi(), normal(), 3));
        let a = init_ensemble(&cfg).unwrap();
        let v = stats::variance(&a.positions);
        assert!((0.97..=1.03).contains(&v), "{v}");
        assert_eq!(a.positions, init_ensemble(&cfg).unwrap().positions);
        let b = init_ensemble(&ParticleConfig { seed: 4, ..cfg.clone() }).unwrap();
        let d = stats::ks_two_sample(&a.positions, &b.positions);
        assert!(d < stats::ks_critical_two_sample(cfg.n, cfg.n, 0.01));
    }

    #[test]
    fn step_count_contract() {
        let cfg = ParticleConfig::new(10, 2e-4, 0.6, unit_phi(), normal(), 1);
        assert_eq!(cfg.steps().unwrap(), 3000);
        assert!(ParticleConfig::new(10, 0.25, 0.6, unit_phi(), normal(), 1).steps().is_err());
        let mut bad = cfg.clone();
        bad.snapshot_times = vec![0.7];
        assert!(ParticleSimulation::new(bad).is_err());
    }

    #[test]
    fn dead_diffusion_leaves_positions() {
        let beta = BetaSpec::heaviside(100.0).unwrap();
        let cfg = ParticleConfig::new(500, 0.01, 0.05, beta, normal(), 9);
        let mut ens = init_ensemble(&cfg).unwrap();
        let before = ens.positions.clone();
        for _ in 0..5 {
            euler_step(&mut ens, &cfg).unwrap();
        }
        assert_eq!(ens.positions, before);
        assert!((ens.time - 0.05).abs() < 1e-15);
    }

    #[test]
    fn single_particle_uses_its_own_kernel_value() {
        let beta = BetaSpec::power_law(3.0).unwrap();
        let cfg = ParticleConfig::new(1, 0.01, 0.01, beta, normal(), 5);
        let mut ens = init_ensemble(&cfg).unwrap();
        let x0 = ens.positions[0];
        euler_step(&mut ens, &cfg).unwrap();
        let k0 = 1.0 / (ens.report.epsilon * (2.0 * std::f64::consts::PI).sqrt());
        let z = BrownianIncrements::new(5).standard_normal(0, 0);
        assert!((ens.positions[0] - (x0 + k0 * 0.1 * z)).abs() < 1e-15);
    }

    #[test]
    fn brownian_variance_growth() {
        let mut cfg = silverman(ParticleConfig::new(100_000, 0.01, 0.2, unit_phi(), normal(), 21));
        cfg.bandwidth_stride = 1000;
        cfg.interaction = Interaction::Binned { bins: 1024 };
        let mut sim = ParticleSimulation::new(cfg).unwrap();
        let v0 = stats::variance(&sim.ensemble().positions);
        let mut k = 0;
        while !sim.is_done() {
            let d = sim.step().unwrap();
            assert!(d.max_displacement <= d.max_phi * d.max_increment + 1e-14);
            k += 1;
        }
        let v = stats::variance(&sim.ensemble().positions);
        let want = v0 + k as f64 * 0.01;
        assert!((v / want - 1.0).abs() < 0.05, "{v} vs {want}");
    }

    #[test]
    fn displacement_bound_with_heaviside() {
        let cfg = ParticleConfig::new(2000, 1e-3, 0.02, BetaSpec::heaviside(0.15).unwrap(), DensitySpec::trimodal(), 2);
        let mut sim = ParticleSimulation::new(cfg).unwrap();
        while !sim.is_done() {
            let d = sim.step().unwrap();
            let bound = BetaSpec::heaviside(0.15).unwrap().phi_max(f64::INFINITY);
            // rounding in x + Φ·ΔW can overshoot by an ulp of x
            assert!(d.max_displacement <= bound * d.max_increment + 1e-14);
        }
    }

    #[test]
    fn runs_are_bitwise_reproducible() {
        let mut cfg = ParticleConfig::new(3000, 1e-3, 0.01, BetaSpec::heaviside(0.15).unwrap(), DensitySpec::trimodal(), 8);
        cfg.snapshot_times = vec![0.0, 0.005, 0.01];
        let a = run_particles(cfg.clone()).unwrap();
        let b = run_particles(cfg).unwrap();
        assert_eq!(a.len(), 3);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.positions, y.positions);
            assert_eq!(x.report.epsilon.to_bits(), y.report.epsilon.to_bits());
        }
    }

    #[test]
    fn zero_horizon_gives_initial_snapshot() {
        let mut cfg = ParticleConfig::new(200, 1e-3, 0.0, unit_phi(), normal(), 6);
        cfg.snapshot_times = vec![0.0];
        let snaps = run_particles(cfg.clone()).unwrap();
        assert_eq!(snaps.len(), 1);
        assert_eq!(snaps[0].positions, init_ensemble(&cfg).unwrap().positions);
    }

    #[test]
    fn interaction_variants_agree() {
        let xs = DensitySpec::trimodal().sample(2000, &mut sampling_rng(12));
        let exact = density_at_particles(&xs, 0.05, Interaction::Exact);
        for how in [Interaction::Truncated, Interaction::Binned { bins: DEFAULT_BINS }] {
            let got = density_at_particles(&xs, 0.05, how);
            for (g, e) in got.iter().zip(&exact) {
                assert!((g - e).abs() <= 1e-3 * e, "{how:?}: {g} vs {e}");
            }
        }
    }

    #[test]
    fn freezing_is_detected_and_holds() {
        // spread-out uniform density well below the threshold from the start
        let init = DensitySpec::uniform_mixture(&[(0.1, -5.0, 5.0)]).unwrap();
        let cfg = ParticleConfig::new(1000, 1e-3, 0.02, BetaSpec::heaviside(0.3).unwrap(), init, 4);
        let mut sim = ParticleSimulation::new(cfg).unwrap();
        sim.track_freezing(0.25);
        while !sim.is_done() {
            sim.step().unwrap();
        }
        let r = sim.freeze_report().unwrap();
        assert_eq!(r.triggered_at, Some(0.0));
        assert!(r.held());
    }

    #[test]
    fn density_estimate_geometry() {
        let grid = Grid1D::new(-6.0, 6.0, 240).unwrap();
        let ens = ParticleEnsemble {
            positions: vec![0.0],
            time: 0.0,
            step: 0,
            epsilon: 1.0,
            report: bandwidth_for(&[0.0], &BandwidthOptions::default()).unwrap(),
        };
        let f = estimate_density(&ens, grid);
        let peak = f.values.iter().cloned().fold(0.0, f64::max);
        assert!(f.values[119] == peak && f.values[120] == peak);
        for i in 0..120 {
            assert!((f.values[i] - f.values[239 - i]).abs() < 1e-15);
        }

        let xs = DensitySpec::trimodal().sample(3000, &mut sampling_rng(2));
        let eps = 0.08;
        let grid = Grid1D::with_spacing(-7.0, 7.0, 0.02).unwrap();
        for how in [Interaction::Truncated, Interaction::Binned { bins: DEFAULT_BINS }] {
            let f = estimate_density_with(&xs, eps, 0.0, grid, how);
            assert!((f.mass() - 1.0).abs() < 1e-4, "{how:?} {}", f.mass());
        }
        let shifted: Vec<f64> = xs.iter().map(|x| x + 0.5).collect();
        let g2 = Grid1D::with_spacing(-6.5, 7.5, 0.02).unwrap();
        let a = estimate_density_with(&xs, eps, 0.0, grid, Interaction::Truncated);
        let b = estimate_density_with(&shifted, eps, 0.0, g2, Interaction::Truncated);
        for (p, q) in a.values.iter().zip(&b.values) {
            assert!((p - q).abs() < 1e-12);
        }
    }
}
