//! Deterministic relaxation solver on a uniform grid.

mod eno;
mod grid;
mod rk;
mod scheme;

pub use eno::{eno_stencil, reconstruct, reconstruct_derivative, DerivativeTraces, EnoTables, MAX_ORDER};
pub use grid::{Grid1D, GridField};
pub use rk::{RkTableau, RkWorkspace};
pub use scheme::{
    cfl_dt, godunov_flux, plateau_width, run_relaxation, spatial_rhs, Boundary, RelaxationConfig, RelaxationSolver,
    DEFAULT_C_STAB, DEFAULT_ORDER, DEFAULT_PHI,
};
