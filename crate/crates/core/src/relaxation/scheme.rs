//! The relaxation scheme: ENO traces of u and w = β(u), a Godunov flux on
//! the characteristic variables w ± v/φ, and Runge-Kutta time stepping.

use super::eno::{derivative_into, reconstruct_into, EnoTables};
use super::grid::{Grid1D, GridField};
use super::rk::{RkTableau, RkWorkspace};
use crate::models::{BetaSpec, DensitySpec};
use crate::{Error, Result};

pub const DEFAULT_ORDER: usize = 3;
pub const DEFAULT_C_STAB: f64 = 0.01;
pub const DEFAULT_PHI: f64 = 1.0;

/// Upwind flux of `ξ ↦ φξ` with φ > 0.
pub fn godunov_flux(alpha: f64, _gamma: f64, phi: f64) -> f64 {
    phi * alpha
}

/// Parabolic stability bound `c_stab·Δx²`.
pub fn cfl_dt(dx: f64, c_stab: f64) -> f64 {
    c_stab * dx * dx
}

/// Dirichlet values imposed in the ghost cells.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Boundary {
    pub left: f64,
    pub right: f64,
}

/// Reusable buffers for the right-hand side.
#[derive(Debug, Clone)]
pub struct RhsWorkspace {
    ghost: usize,
    u: Vec<f64>,
    w: Vec<f64>,
    u_minus: Vec<f64>,
    u_plus: Vec<f64>,
    dw_minus: Vec<f64>,
    dw_plus: Vec<f64>,
    flux: Vec<f64>,
}

impl RhsWorkspace {
    pub fn new(nx: usize, k: usize) -> Self {
        let ghost = k;
        let p = nx + 2 * ghost;
        let e = nx + 1;
        Self {
            ghost,
            u: vec![0.0; p],
            w: vec![0.0; p],
            u_minus: vec![0.0; e],
            u_plus: vec![0.0; e],
            dw_minus: vec![0.0; e],
            dw_plus: vec![0.0; e],
            flux: vec![0.0; e],
        }
    }
}

/// du/dt on the cell centres.
///
/// The traces of u come from the ENO stencil of u, w± = β(u±), and
/// v = −½∂ₓw from the centred derivative of wᵢ = β(uᵢ).
pub(crate) fn rhs_into(
    u: &[f64],
    beta: &BetaSpec,
    tables: &EnoTables,
    phi: f64,
    boundary: Boundary,
    ws: &mut RhsWorkspace,
    out: &mut [f64],
) -> Result<()> {
    let g = ws.ghost;
    let nx = u.len();
    ws.u[..g].fill(boundary.left);
    ws.u[g..g + nx].copy_from_slice(u);
    ws.u[g + nx..].fill(boundary.right);
    for (w, &x) in ws.w.iter_mut().zip(&ws.u) {
        *w = beta.beta(x);
    }
    reconstruct_into(&ws.u, g, tables, &mut ws.u_minus, &mut ws.u_plus);
    derivative_into(&ws.w, g, tables, true, &mut ws.dw_minus, &mut ws.dw_plus, None);
    for j in 0..=nx {
        let wm = beta.beta(ws.u_minus[j]);
        let wp = beta.beta(ws.u_plus[j]);
        let vm = -0.5 * ws.dw_minus[j];
        let vp = -0.5 * ws.dw_plus[j];
        // right-going w + v/φ takes the left trace, left-going w − v/φ the right one
        let h = godunov_flux(wm + vm / phi, wp + vp / phi, phi) - godunov_flux(wp - vp / phi, wm - vm / phi, phi);
        if !h.is_finite() {
            return Err(Error::invalid(format!("non-finite flux at interface {j}")));
        }
        ws.flux[j] = h;
    }
    let scale = -1.0 / (2.0 * tables.dx());
    for (i, o) in out.iter_mut().enumerate() {
        *o = scale * (ws.flux[i + 1] - ws.flux[i]);
    }
    Ok(())
}

/// Semi-discrete right-hand side of `field`.
pub fn spatial_rhs(field: &GridField, beta: &BetaSpec, tables: &EnoTables, phi: f64, boundary: Boundary) -> Result<Vec<f64>> {
    if !(phi > 0.0) {
        return Err(Error::invalid(format!("relaxation speed must be > 0, got {phi}")));
    }
    let mut ws = RhsWorkspace::new(field.grid.nx, tables.k());
    let mut out = vec![0.0; field.grid.nx];
    rhs_into(&field.values, beta, tables, phi, boundary, &mut ws, &mut out)?;
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct RelaxationConfig {
    pub grid: Grid1D,
    pub beta: BetaSpec,
    pub init: DensitySpec,
    pub horizon: f64,
    pub k: usize,
    pub tableau: RkTableau,
    pub phi: f64,
    pub c_stab: f64,
    /// Replaces the CFL step when set; still shortened to land on snapshots.
    pub dt: Option<f64>,
    pub boundary: Boundary,
    pub snapshot_times: Vec<f64>,
}

impl RelaxationConfig {
    pub fn new(grid: Grid1D, beta: BetaSpec, init: DensitySpec, horizon: f64) -> Self {
        Self {
            grid,
            beta,
            init,
            horizon,
            k: DEFAULT_ORDER,
            tableau: RkTableau::default(),
            phi: DEFAULT_PHI,
            c_stab: DEFAULT_C_STAB,
            dt: None,
            boundary: Boundary::default(),
            snapshot_times: vec![0.0, horizon],
        }
    }

    pub fn max_dt(&self) -> f64 {
        self.dt.unwrap_or_else(|| cfl_dt(self.grid.dx(), self.c_stab))
    }

    fn validate(&self) -> Result<()> {
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return Err(Error::invalid(format!("horizon must be ≥ 0, got {}", self.horizon)));
        }
        if !(self.phi > 0.0) {
            return Err(Error::invalid(format!("relaxation speed must be > 0, got {}", self.phi)));
        }
        if !(self.max_dt() > 0.0) {
            return Err(Error::invalid("time step must be > 0"));
        }
        if self.snapshot_times.iter().any(|&t| !(0.0..=self.horizon * (1.0 + 1e-12)).contains(&t)) {
            return Err(Error::invalid("snapshot times must lie in [0, T]"));
        }
        if self.snapshot_times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid("snapshot times must be sorted"));
        }
        Ok(())
    }
}

/// Time-stepping state of the deterministic solver.
#[derive(Debug, Clone)]
pub struct RelaxationSolver {
    config: RelaxationConfig,
    tables: EnoTables,
    field: GridField,
    rhs_ws: RhsWorkspace,
    rk_ws: RkWorkspace,
    steps: u64,
}

impl RelaxationSolver {
    pub fn new(config: RelaxationConfig) -> Result<Self> {
        config.validate()?;
        let tables = EnoTables::new(config.k, config.grid.dx())?;
        let init = &config.init;
        let field = GridField::project(config.grid, 0.0, |x| init.eval(x));
        let rhs_ws = RhsWorkspace::new(config.grid.nx, config.k);
        Ok(Self { config, tables, field, rhs_ws, rk_ws: RkWorkspace::default(), steps: 0 })
    }

    pub fn field(&self) -> &GridField {
        &self.field
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn tables(&self) -> &EnoTables {
        &self.tables
    }

    /// One Runge-Kutta step of length `dt`.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        let Self { config, tables, field, rhs_ws, rk_ws, .. } = self;
        let last_good = field.clone();
        let res = config.tableau.step(&mut field.values, dt, rk_ws, |u, out| {
            rhs_into(u, &config.beta, tables, config.phi, config.boundary, rhs_ws, out)
        });
        let time = field.time + dt;
        if res.is_err() || field.values.iter().any(|x| !x.is_finite()) {
            *field = last_good;
            return Err(Error::RelaxationBlowUp { time, last_good: Box::new(field.clone()) });
        }
        field.time = time;
        self.steps += 1;
        Ok(())
    }

    /// Advances to `t` in equal steps no longer than the configured bound,
    /// landing on `t` exactly.
    pub fn advance_to(&mut self, t: f64) -> Result<()> {
        let span = t - self.field.time;
        if span <= 0.0 {
            return Ok(());
        }
        let sub = (span / self.config.max_dt() - 1e-9).ceil().max(1.0) as u64;
        let dt = span / sub as f64;
        let start = self.field.time;
        for s in 1..=sub {
            self.step(dt)?;
            self.field.time = start + s as f64 * dt;
        }
        self.field.time = t;
        Ok(())
    }
}

/// Runs to the horizon and returns the fields at the snapshot times.
pub fn run_relaxation(config: RelaxationConfig) -> Result<Vec<GridField>> {
    let times = config.snapshot_times.clone();
    let mut solver = RelaxationSolver::new(config)?;
    let mut out = Vec::with_capacity(times.len());
    for t in times {
        solver.advance_to(t)?;
        out.push(solver.field().clone());
    }
    Ok(out)
}

/// Length in cells of the longest run with |uᵢ − u_c| ≤ tol.
pub fn plateau_width(field: &GridField, u_c: f64, tol: f64) -> usize {
    let mut best = 0;
    let mut run = 0;
    for &u in &field.values {
        if (u - u_c).abs() <= tol {
            run += 1;
            best = best.max(run);
        } else {
            run = 0;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::barenblatt_translated;

    fn heaviside(u_c: f64) -> BetaSpec {
        BetaSpec::heaviside(u_c).unwrap()
    }

    #[test]
    fn flux_examples() {
        assert_eq!(godunov_flux(2.0, -5.0, 1.0), 2.0);
        assert_eq!(godunov_flux(0.0, 3.0, 7.0), 0.0);
        assert_eq!(godunov_flux(1.5, 1.5, 2.0), 3.0);
    }

    #[test]
    fn cfl_examples() {
        assert!((cfl_dt(0.02, 0.01) - 4e-6).abs() < 1e-18);
        assert!((cfl_dt(0.05, 0.01) - 2.5e-5).abs() < 1e-18);
        assert!((cfl_dt(0.01, 0.01) * 4.0 - cfl_dt(0.02, 0.01)).abs() < 1e-18);
    }

    #[test]
    fn constant_and_dead_fields_have_zero_rhs() {
        let grid = Grid1D::new(0.0, 1.0, 30).unwrap();
        let t = EnoTables::new(3, grid.dx()).unwrap();
        let pm = BetaSpec::power_law(3.0).unwrap();
        let c = GridField::project(grid, 0.0, |_| 0.7);
        let b = Boundary { left: 0.7, right: 0.7 };
        assert!(spatial_rhs(&c, &pm, &t, 1.0, b).unwrap().iter().all(|x| x.abs() < 1e-12));
        let low = GridField::project(grid, 0.0, |x| 0.1 * (3.0 * x).sin().abs());
        let rhs = spatial_rhs(&low, &heaviside(0.15), &t, 1.0, Boundary::default()).unwrap();
        assert!(rhs.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn rhs_matches_analytic_half_laplacian() {
        // ½∂ₓₓ(u³) for u = (A − x²/(12√1))^(1/2), A = 1/(π√3), at t = 0
        let a = 1.0 / (std::f64::consts::PI * 3f64.sqrt());
        let exact = |x: f64| {
            let q = a - x * x / 12.0;
            // u³ = q^(3/2): second derivative 3/2·(q^(1/2)·q″ + ½q^(−1/2)q′²)
            let (dq, ddq) = (-x / 6.0, -1.0 / 6.0);
            0.5 * 1.5 * (q.sqrt() * ddq + 0.5 * dq * dq / q.sqrt())
        };
        let pm = BetaSpec::power_law(3.0).unwrap();
        let radius = (12.0 * a).sqrt();
        let errs: Vec<f64> = [0.02, 0.01]
            .iter()
            .map(|&dx| {
                let grid = Grid1D::with_spacing(-2.5, 2.5, dx).unwrap();
                let t = EnoTables::new(3, dx).unwrap();
                let f = GridField::project(grid, 0.0, |x| barenblatt_translated(0.0, x));
                let rhs = spatial_rhs(&f, &pm, &t, 1.0, Boundary::default()).unwrap();
                grid.centers()
                    .iter()
                    .zip(&rhs)
                    .filter(|(x, _)| x.abs() < 0.6 * radius)
                    .map(|(&x, r)| (r - exact(x)).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        assert!(errs[1] < 0.02, "{errs:?}");
        assert!(errs[0] / errs[1] > 3.0, "{errs:?}");
    }

    #[test]
    fn dead_beta_keeps_field() {
        let grid = Grid1D::with_spacing(-2.0, 2.0, 0.05).unwrap();
        let mut cfg = RelaxationConfig::new(grid, heaviside(10.0), DensitySpec::trimodal(), 0.01);
        cfg.snapshot_times = vec![0.0, 0.01];
        let out = run_relaxation(cfg).unwrap();
        for (a, b) in out[0].values.iter().zip(&out[1].values) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!((out[1].time - 0.01).abs() < 1e-15);
    }

    #[test]
    fn zero_horizon_returns_projection() {
        let grid = Grid1D::with_spacing(-7.0, 7.0, 0.02).unwrap();
        let mut cfg = RelaxationConfig::new(grid, heaviside(0.15), DensitySpec::trimodal(), 0.0);
        cfg.snapshot_times = vec![0.0];
        let out = run_relaxation(cfg).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].values[350], DensitySpec::trimodal().eval(grid.center(350)));
    }

    #[test]
    fn mass_conserved_and_max_decreasing() {
        let grid = Grid1D::with_spacing(-2.5, 2.5, 0.05).unwrap();
        let init = DensitySpec::barenblatt(3.0).unwrap();
        let mut cfg = RelaxationConfig::new(grid, BetaSpec::power_law(3.0).unwrap(), init, 0.2);
        cfg.snapshot_times = vec![0.0, 0.1, 0.2];
        let out = run_relaxation(cfg).unwrap();
        let m0 = out[0].mass();
        for f in &out {
            assert!((f.mass() - m0).abs() <= 1e-10 * m0);
        }
        assert!(out[2].max() <= out[0].max() + 1e-3);
    }

    #[test]
    fn blow_up_reports_last_good_field() {
        let grid = Grid1D::with_spacing(-1.0, 1.0, 0.05).unwrap();
        let mut cfg = RelaxationConfig::new(grid, BetaSpec::power_law(3.0).unwrap(), DensitySpec::normal_uniform(), 100.0);
        cfg.dt = Some(0.5);
        cfg.snapshot_times = vec![100.0];
        match run_relaxation(cfg) {
            Err(Error::RelaxationBlowUp { last_good, .. }) => {
                assert!(last_good.values.iter().all(|x| x.is_finite()));
            }
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn plateau_detection() {
        let grid = Grid1D::new(0.0, 1.0, 10).unwrap();
        let f = GridField::new(grid, vec![0.0, 0.3, 0.31, 0.29, 0.3, 0.3, 0.5, 0.3, 0.3, 0.0], 0.0).unwrap();
        assert_eq!(plateau_width(&f, 0.3, 0.02), 5);
    }
}
