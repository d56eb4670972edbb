use crate::{Error, Result};

/// Uniform grid of `nx` cells on `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    pub a: f64,
    pub b: f64,
    pub nx: usize,
}

impl Grid1D {
    pub fn new(a: f64, b: f64, nx: usize) -> Result<Self> {
        if !(b > a) || !a.is_finite() || !b.is_finite() {
            return Err(Error::invalid(format!("grid needs a < b, got [{a}, {b}]")));
        }
        if nx == 0 {
            return Err(Error::invalid("grid needs at least one cell"));
        }
        Ok(Self { a, b, nx })
    }

    /// Grid on `[a, b]` with spacing `dx`, which must divide the interval.
    pub fn with_spacing(a: f64, b: f64, dx: f64) -> Result<Self> {
        if !(dx > 0.0) {
            return Err(Error::invalid(format!("grid spacing must be > 0, got {dx}")));
        }
        let cells = (b - a) / dx;
        let nx = cells.round();
        if (cells - nx).abs() > 1e-8 * nx.max(1.0) {
            return Err(Error::invalid(format!("spacing {dx} does not divide [{a}, {b}]")));
        }
        Self::new(a, b, nx as usize)
    }

    pub fn dx(&self) -> f64 {
        (self.b - self.a) / self.nx as f64
    }

    /// Center of cell `i` (0-based), `a + (i + ½)Δx`.
    pub fn center(&self, i: usize) -> f64 {
        self.a + (i as f64 + 0.5) * self.dx()
    }

    /// Interface `i ∈ 0..=nx`, `a + iΔx`.
    pub fn interface(&self, i: usize) -> f64 {
        self.a + i as f64 * self.dx()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.center(i)).collect()
    }

    pub(crate) fn same_as(&self, other: &Grid1D) -> bool {
        self.nx == other.nx
            && (self.a - other.a).abs() <= 1e-12 * (1.0 + self.a.abs())
            && (self.b - other.b).abs() <= 1e-12 * (1.0 + self.b.abs())
    }
}

/// Cell-centred values on a [`Grid1D`] at a given time.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub grid: Grid1D,
    pub values: Vec<f64>,
    pub time: f64,
}

impl GridField {
    pub fn new(grid: Grid1D, values: Vec<f64>, time: f64) -> Result<Self> {
        if values.len() != grid.nx {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} cells",
                values.len(),
                grid.nx
            )));
        }
        Ok(Self { grid, values, time })
    }

    /// Samples `f` at the cell centres.
    pub fn project<F: Fn(f64) -> f64>(grid: Grid1D, time: f64, f: F) -> Self {
        let values = (0..grid.nx).map(|i| f(grid.center(i))).collect();
        Self { grid, values, time }
    }

    /// Midpoint-rule mass `Σ uᵢ Δx`.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.dx()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}
