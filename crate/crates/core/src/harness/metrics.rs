use crate::relaxation::GridField;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    L1,
    L2,
}

/// Discrete Lᵖ distance `(Σ |a − b|ᵖ Δx)^(1/p)`.
pub fn lp_error(fa: &GridField, fb: &GridField, p: Norm) -> Result<f64> {
    if !fa.grid.same_as(&fb.grid) {
        return Err(Error::GridMismatch(format!("{:?} vs {:?}", fa.grid, fb.grid)));
    }
    let dx = fa.grid.dx();
    let diffs = fa.values.iter().zip(&fb.values).map(|(a, b)| (a - b).abs());
    Ok(match p {
        Norm::L1 => diffs.sum::<f64>() * dx,
        Norm::L2 => (diffs.map(|d| d * d).sum::<f64>() * dx).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttractingSetCheck {
    pub in_set: bool,
    pub mass: f64,
    /// How far the maximum exceeds `u_c` (0 if it does not).
    pub excess: f64,
}

/// Membership of the unit-mass densities bounded by `u_c`, up to `tol`.
pub fn attracting_set_check(field: &GridField, u_c: f64, tol: f64) -> AttractingSetCheck {
    let mass = field.mass();
    let max = field.max();
    AttractingSetCheck {
        in_set: (mass - 1.0).abs() <= tol && max <= u_c + tol,
        mass,
        excess: (max - u_c).max(0.0),
    }
}
