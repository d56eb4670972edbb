//! ENO interpolation tables and stencil selection on uniform grids.
//!
//! Arrays handed to the reconstruction routines are padded with `ghost`
//! cells on each side; interface `j ∈ 0..=nx` sits between padded cells
//! `ghost + j − 1` and `ghost + j`.

use crate::{Error, Result};

pub const MAX_ORDER: usize = 6;

/// Interpolation and derivative coefficients for stencils of `k` cells.
///
/// Row `r` of `c` holds the weights giving the value at offset `r − ½` cells
/// from the leftmost stencil centre, so a cell whose stencil starts `r`
/// cells to its left uses row `r` for its left edge and `r + 1` for its
/// right edge. `d` does the same for the derivative at centres and `dbar`
/// for the derivative at edges.
#[derive(Debug, Clone, PartialEq)]
pub struct EnoTables {
    k: usize,
    dx: f64,
    c: Vec<Vec<f64>>,
    d: Vec<Vec<f64>>,
    dbar: Vec<Vec<f64>>,
}

fn lagrange(k: usize, j: usize, s: f64) -> f64 {
    (0..k).filter(|&l| l != j).map(|l| (s - l as f64) / (j as f64 - l as f64)).product()
}

fn lagrange_slope(k: usize, j: usize, s: f64) -> f64 {
    let denom: f64 = (0..k).filter(|&l| l != j).map(|l| j as f64 - l as f64).product();
    let numer: f64 = (0..k)
        .filter(|&m| m != j)
        .map(|m| (0..k).filter(|&l| l != j && l != m).map(|l| s - l as f64).product::<f64>())
        .sum();
    numer / denom
}

impl EnoTables {
    pub fn new(k: usize, dx: f64) -> Result<Self> {
        if !(1..=MAX_ORDER).contains(&k) {
            return Err(Error::invalid(format!("ENO order must be in 1..={MAX_ORDER}, got {k}")));
        }
        if !(dx > 0.0) {
            return Err(Error::invalid(format!("grid spacing must be > 0, got {dx}")));
        }
        let table = |rows: usize, f: &dyn Fn(usize, usize) -> f64| -> Vec<Vec<f64>> {
            (0..rows).map(|r| (0..k).map(|j| f(r, j)).collect()).collect()
        };
        let c = table(k + 1, &|r, j| lagrange(k, j, r as f64 - 0.5));
        let d = table(k, &|r, j| lagrange_slope(k, j, r as f64) / dx);
        let dbar = table(k + 1, &|r, j| lagrange_slope(k, j, r as f64 - 0.5) / dx);
        Ok(Self { k, dx, c, d, dbar })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// (k+1)×k edge interpolation weights.
    pub fn c(&self) -> &[Vec<f64>] {
        &self.c
    }

    /// k×k centre derivative weights (include 1/Δx).
    pub fn d(&self) -> &[Vec<f64>] {
        &self.d
    }

    /// (k+1)×k edge derivative weights (include 1/Δx).
    pub fn dbar(&self) -> &[Vec<f64>] {
        &self.dbar
    }

    /// Offset of the centred stencil.
    pub fn centered_offset(&self) -> usize {
        (self.k - 1) / 2
    }
}

/// ENO stencil offset `r` for padded cell `i`: the stencil covers cells
/// `i − r ..= i − r + k − 1`. Grown one cell at a time towards the side with
/// the smaller undivided difference; ties go to the more centred stencil,
/// then to the left one.
pub fn eno_stencil(padded: &[f64], i: usize, k: usize) -> usize {
    let mut left = i;
    let mut buf = [0.0; MAX_ORDER + 1];
    for level in 1..k {
        let dl = undivided(padded, left - 1, level, &mut buf).abs();
        let dr = undivided(padded, left, level, &mut buf).abs();
        let go_left = if dl < dr {
            true
        } else if dr < dl {
            false
        } else {
            // offsets r + 1 (left) and r (right) against the ideal level/2
            let r = (i - left) as f64;
            let half = level as f64 / 2.0;
            (r + 1.0 - half).abs() <= (r - half).abs()
        };
        if go_left {
            left -= 1;
        }
    }
    i - left
}

/// Undivided difference of order `level` over cells `start ..= start + level`.
fn undivided(v: &[f64], start: usize, level: usize, buf: &mut [f64]) -> f64 {
    let b = &mut buf[..=level];
    b.copy_from_slice(&v[start..=start + level]);
    for l in 1..=level {
        for m in 0..=level - l {
            b[m] = b[m + 1] - b[m];
        }
    }
    b[0]
}

fn dot(v: &[f64], start: usize, w: &[f64]) -> f64 {
    v[start..start + w.len()].iter().zip(w).map(|(a, b)| a * b).sum()
}

/// Checks the padding and returns the number of real cells.
fn interior_len(padded: &[f64], ghost: usize, k: usize) -> usize {
    assert!(ghost >= k, "need at least k = {k} ghost cells, got {ghost}");
    assert!(padded.len() > 2 * ghost, "no interior cells");
    padded.len() - 2 * ghost
}

/// Interface traces `(u⁻, u⁺)` at the `nx + 1` interfaces: `u⁻` from the
/// cell on the left, `u⁺` from the cell on the right.
pub fn reconstruct(padded: &[f64], ghost: usize, tables: &EnoTables) -> (Vec<f64>, Vec<f64>) {
    let nx = interior_len(padded, ghost, tables.k);
    let mut minus = vec![0.0; nx + 1];
    let mut plus = vec![0.0; nx + 1];
    reconstruct_into(padded, ghost, tables, &mut minus, &mut plus);
    (minus, plus)
}

pub(crate) fn reconstruct_into(padded: &[f64], ghost: usize, tables: &EnoTables, minus: &mut [f64], plus: &mut [f64]) {
    let k = tables.k;
    let nx = interior_len(padded, ghost, k);
    // cells ghost-1 ..= ghost+nx each feed the interfaces on their two sides
    for cell in ghost - 1..=ghost + nx {
        let r = eno_stencil(padded, cell, k);
        let start = cell - r;
        if cell >= ghost {
            plus[cell - ghost] = dot(padded, start, &tables.c[r]);
        }
        if cell < ghost + nx {
            minus[cell + 1 - ghost] = dot(padded, start, &tables.c[r + 1]);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeTraces {
    /// From the cell left of each interface.
    pub minus: Vec<f64>,
    /// From the cell right of each interface.
    pub plus: Vec<f64>,
    /// At the `nx` cell centres.
    pub centers: Vec<f64>,
}

/// Derivative reconstruction. With `centered` every cell uses the centred
/// stencil offset `⌊(k−1)/2⌋`; otherwise the ENO stencil of `padded`.
pub fn reconstruct_derivative(padded: &[f64], ghost: usize, tables: &EnoTables, centered: bool) -> DerivativeTraces {
    let nx = interior_len(padded, ghost, tables.k);
    let mut out = DerivativeTraces { minus: vec![0.0; nx + 1], plus: vec![0.0; nx + 1], centers: vec![0.0; nx] };
    derivative_into(padded, ghost, tables, centered, &mut out.minus, &mut out.plus, Some(&mut out.centers));
    out
}

pub(crate) fn derivative_into(
    padded: &[f64],
    ghost: usize,
    tables: &EnoTables,
    centered: bool,
    minus: &mut [f64],
    plus: &mut [f64],
    mut centers: Option<&mut [f64]>,
) {
    let k = tables.k;
    let nx = interior_len(padded, ghost, k);
    for cell in ghost - 1..=ghost + nx {
        let r = if centered { tables.centered_offset() } else { eno_stencil(padded, cell, k) };
        let start = cell - r;
        if cell >= ghost {
            plus[cell - ghost] = dot(padded, start, &tables.dbar[r]);
        }
        if cell < ghost + nx {
            minus[cell + 1 - ghost] = dot(padded, start, &tables.dbar[r + 1]);
            if cell >= ghost {
                if let Some(c) = centers.as_deref_mut() {
                    c[cell - ghost] = dot(padded, start, &tables.d[r]);
                }
            }
        }
    }
}
