//! Explicit Runge-Kutta tableaux.

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RkTableau {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
}

impl RkTableau {
    /// `a` must be strictly lower triangular and `b` sum to one.
    pub fn new(a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self> {
        let s = b.len();
        if s == 0 {
            return Err(Error::invalid("tableau needs at least one stage"));
        }
        if a.len() != s || a.iter().any(|row| row.len() != s) {
            return Err(Error::invalid(format!("tableau matrix must be {s}×{s}")));
        }
        for (i, row) in a.iter().enumerate() {
            if row[i..].iter().any(|&x| x != 0.0) {
                return Err(Error::invalid("tableau is not explicit (entries on or above the diagonal)"));
            }
        }
        if (b.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("tableau weights must sum to 1"));
        }
        if a.iter().flatten().chain(&b).any(|x| !x.is_finite()) {
            return Err(Error::invalid("non-finite tableau entry"));
        }
        Ok(Self { a, b })
    }

    pub fn forward_euler() -> Self {
        Self { a: vec![vec![0.0]], b: vec![1.0] }
    }

    /// Three-stage third-order strong-stability-preserving scheme.
    pub fn ssp_rk3() -> Self {
        Self {
            a: vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.25, 0.25, 0.0]],
            b: vec![1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
        }
    }

    pub fn rk4() -> Self {
        Self {
            a: vec![
                vec![0.0, 0.0, 0.0, 0.0],
                vec![0.5, 0.0, 0.0, 0.0],
                vec![0.0, 0.5, 0.0, 0.0],
                vec![0.0, 0.0, 1.0, 0.0],
            ],
            b: vec![1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "euler" | "forward-euler" => Ok(Self::forward_euler()),
            "ssp-rk3" | "rk3" => Ok(Self::ssp_rk3()),
            "rk4" => Ok(Self::rk4()),
            other => Err(Error::Config(format!("unknown tableau '{other}' (euler, ssp-rk3, rk4)"))),
        }
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    pub fn a(&self) -> &[Vec<f64>] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// One step of `u′ = L(u)` in place; `rhs(u, out)` writes `L(u)`.
    pub fn step<F>(&self, u: &mut [f64], dt: f64, ws: &mut RkWorkspace, mut rhs: F) -> Result<()>
    where
        F: FnMut(&[f64], &mut [f64]) -> Result<()>,
    {
        let n = u.len();
        ws.ensure(self.stages(), n);
        for k in 0..self.stages() {
            ws.stage.copy_from_slice(u);
            for (l, &a) in self.a[k][..k].iter().enumerate() {
                if a != 0.0 {
                    for (s, d) in ws.stage.iter_mut().zip(&ws.derivs[l]) {
                        *s += dt * a * d;
                    }
                }
            }
            rhs(&ws.stage, &mut ws.derivs[k])?;
        }
        for (k, &b) in self.b.iter().enumerate() {
            if b != 0.0 {
                for (x, d) in u.iter_mut().zip(&ws.derivs[k]) {
                    *x += dt * b * d;
                }
            }
        }
        Ok(())
    }
}

impl Default for RkTableau {
    fn default() -> Self {
        Self::ssp_rk3()
    }
}

/// Stage buffers reused across steps.
#[derive(Debug, Clone, Default)]
pub struct RkWorkspace {
    stage: Vec<f64>,
    derivs: Vec<Vec<f64>>,
}

impl RkWorkspace {
    fn ensure(&mut self, stages: usize, n: usize) {
        self.stage.resize(n, 0.0);
        self.derivs.resize_with(stages, Vec::new);
        for d in &mut self.derivs {
            d.resize(n, 0.0);
        }
    }
}
