//! Discrete function representations on a uniform 1D mesh.

use crate::error::{invalid, Result};
use crate::mesh::Mesh1D;
use crate::quadrature::GaussRule;

/// Continuous, piecewise affine function given by its nodal values.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseAffine {
    pub mesh: Mesh1D,
    pub values: Vec<f64>,
    /// Set when the function vanishes at both extremities.
    pub vanishes_at_ends: bool,
}

impl PiecewiseAffine {
    pub fn new(mesh: Mesh1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.n_vertices() {
            return Err(invalid(format!(
                "expected {} nodal values, got {}",
                mesh.n_vertices(),
                values.len()
            )));
        }
        let vanishes_at_ends = values[0] == 0.0 && values[values.len() - 1] == 0.0;
        Ok(Self {
            mesh,
            values,
            vanishes_at_ends,
        })
    }

    /// Function with zero end values and the given interior values.
    pub fn from_interior(mesh: Mesh1D, interior: &[f64]) -> Result<Self> {
        let mut v = Vec::with_capacity(interior.len() + 2);
        v.push(0.0);
        v.extend_from_slice(interior);
        v.push(0.0);
        Self::new(mesh, v)
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(mesh: Mesh1D, f: impl Fn(f64) -> f64) -> Self {
        let values = mesh.vertices.iter().map(|&t| f(t)).collect();
        Self::new(mesh, values).expect("interpolant has one value per vertex")
    }

    pub fn interior(&self) -> &[f64] {
        &self.values[1..self.values.len() - 1]
    }

    /// Slope on cell `k`.
    pub fn slope(&self, k: usize) -> f64 {
        (self.values[k + 1] - self.values[k]) / self.mesh.step
    }

    pub fn slopes(&self) -> Vec<f64> {
        (0..self.mesh.n_cells).map(|k| self.slope(k)).collect()
    }

    /// Value at `t`; zero outside `[0, T]`.
    pub fn eval(&self, t: f64) -> f64 {
        if !(0.0..=self.mesh.length).contains(&t) {
            return 0.0;
        }
        let k = self.mesh.locate(t);
        let s = (t - self.mesh.vertices[k]) / self.mesh.step;
        self.values[k] * (1.0 - s) + self.values[k + 1] * s
    }

    /// Derivative at `t` (right-continuous at vertices); zero outside `[0, T]`.
    pub fn derivative(&self, t: f64) -> f64 {
        if !(0.0..=self.mesh.length).contains(&t) {
            return 0.0;
        }
        self.slope(self.mesh.locate(t))
    }

    pub fn l2_sq(&self) -> f64 {
        let h = self.mesh.step;
        self.values
            .windows(2)
            .map(|w| h * (w[0] * w[0] + w[0] * w[1] + w[1] * w[1]) / 3.0)
            .sum()
    }

    /// `∫|u̇|²`.
    pub fn h1_semi_sq(&self) -> f64 {
        let h = self.mesh.step;
        self.values.windows(2).map(|w| (w[1] - w[0]).powi(2) / h).sum()
    }

    /// Maximum absolute nodal value, which is the sup norm.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Cell averages.
    pub fn project(&self) -> PiecewiseConstant {
        let values = self.values.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        PiecewiseConstant {
            mesh: self.mesh.clone(),
            values,
        }
    }
}

/// Function constant on every cell of a mesh, zero outside `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstant {
    pub mesh: Mesh1D,
    pub values: Vec<f64>,
}

impl PiecewiseConstant {
    pub fn new(mesh: Mesh1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.n_cells {
            return Err(invalid(format!(
                "expected {} cell values, got {}",
                mesh.n_cells,
                values.len()
            )));
        }
        Ok(Self { mesh, values })
    }

    pub fn eval(&self, t: f64) -> f64 {
        if !(0.0..self.mesh.length).contains(&t) {
            return 0.0;
        }
        self.values[self.mesh.locate(t)]
    }

    pub fn l2_sq(&self) -> f64 {
        self.mesh.step * self.values.iter().map(|v| v * v).sum::<f64>()
    }

    /// Jump positions and heights of the zero extension to ℝ.
    pub fn jumps(&self) -> Vec<(f64, f64)> {
        let n = self.values.len();
        let mut out = Vec::with_capacity(n + 1);
        let mut prev = 0.0;
        for k in 0..=n {
            let next = if k < n { self.values[k] } else { 0.0 };
            if next != prev {
                out.push((self.mesh.vertices[k], next - prev));
            }
            prev = next;
        }
        out
    }
}

/// Cell averages of an arbitrary integrable function by Gauss quadrature.
pub fn project_piecewise_constant(mesh: &Mesh1D, f: impl Fn(f64) -> f64) -> PiecewiseConstant {
    let rule = GaussRule::get(12);
    let values = (0..mesh.n_cells)
        .map(|k| {
            let (a, b) = mesh.cell(k);
            rule.integrate(a, b, &f) / (b - a)
        })
        .collect();
    PiecewiseConstant {
        mesh: mesh.clone(),
        values,
    }
}
