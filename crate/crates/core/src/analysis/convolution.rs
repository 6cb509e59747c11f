//! Causal exponential smoothing `v = G_α ∗ u`, i.e. `α v̇ + β v = β u`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use super::functions::PiecewiseConstant;
use crate::error::{invalid, Result};
use crate::mesh::Mesh1D;
use crate::special::smoothed_log_kernel;

/// `G_α(s) = (β/α) e^{−βs/α}` for `s ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel {
    pub alpha: f64,
    pub beta: f64,
}

impl Kernel {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && beta > 0.0) {
            return Err(invalid("the kernel needs alpha > 0 and beta > 0"));
        }
        Ok(Self { alpha, beta })
    }

    /// Decay length `α/β`.
    pub fn scale(&self) -> f64 {
        self.alpha / self.beta
    }

    pub fn eval(&self, s: f64) -> f64 {
        if s < 0.0 {
            0.0
        } else {
            (self.beta / self.alpha) * (-s / self.scale()).exp()
        }
    }
}

/// `G_α ∗ u` for piecewise constant `u`, stored by its nodal values.
///
/// On cell `k`, `v(t) = u_k + (v_k − u_k) e^{−(t − t_k)/a}` with `a = α/β`;
/// after `T` it decays from `v_n`, before `0` it equals the history value.
#[derive(Debug, Clone, PartialEq)]
pub struct Smoothed {
    pub input: PiecewiseConstant,
    pub kernel: Kernel,
    /// Constant value of the input on `(−∞, 0)`.
    pub history: f64,
    /// `v(t_k)`, `k = 0..=n`.
    pub nodal: Vec<f64>,
}

/// Zero-history convolution.
pub fn convolve_g_alpha(u: &PiecewiseConstant, kernel: Kernel) -> Smoothed {
    convolve_g_alpha_with_history(u, kernel, 0.0)
}

/// Convolution of the input extended by `history` before 0 and by 0 after `T`.
pub fn convolve_g_alpha_with_history(u: &PiecewiseConstant, kernel: Kernel, history: f64) -> Smoothed {
    let e = (-u.mesh.step / kernel.scale()).exp();
    let mut nodal = Vec::with_capacity(u.values.len() + 1);
    let mut v = history;
    nodal.push(v);
    for &uk in &u.values {
        v = uk + (v - uk) * e;
        nodal.push(v);
    }
    Smoothed {
        input: u.clone(),
        kernel,
        history,
        nodal,
    }
}

impl Smoothed {
    fn decay(&self) -> f64 {
        (-self.input.mesh.step / self.kernel.scale()).exp()
    }

    pub fn eval(&self, t: f64) -> f64 {
        let mesh = &self.input.mesh;
        let a = self.kernel.scale();
        if t < 0.0 {
            return self.history;
        }
        if t >= mesh.length {
            return self.nodal[mesh.n_cells] * (-(t - mesh.length) / a).exp();
        }
        let k = mesh.locate(t);
        let uk = self.input.values[k];
        uk + (self.nodal[k] - uk) * (-(t - mesh.vertices[k]) / a).exp()
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let u = if (0.0..self.input.mesh.length).contains(&t) {
            self.input.eval(t)
        } else if t < 0.0 {
            self.history
        } else {
            0.0
        };
        (u - self.eval(t)) / self.kernel.scale()
    }

    /// `∫_0^∞ v²`, exact.
    pub fn l2_sq(&self) -> f64 {
        let a = self.kernel.scale();
        let tau = self.input.mesh.step;
        let e = self.decay();
        let mut s = 0.0;
        for (k, &uk) in self.input.values.iter().enumerate() {
            let c = self.nodal[k] - uk;
            s += uk * uk * tau + 2.0 * uk * c * a * (1.0 - e) + c * c * a * (1.0 - e * e) / 2.0;
        }
        let vn = *self.nodal.last().unwrap();
        s + vn * vn * a / 2.0
    }

    /// `∫_0^∞ |u − v|²`, exact.
    pub fn defect_l2_sq(&self) -> f64 {
        let a = self.kernel.scale();
        let e = self.decay();
        let mut s = 0.0;
        for (k, &uk) in self.input.values.iter().enumerate() {
            let c = self.nodal[k] - uk;
            s += c * c * a * (1.0 - e * e) / 2.0;
        }
        let vn = *self.nodal.last().unwrap();
        s + vn * vn * a / 2.0
    }

    /// `α ∫_0^∞ |v̇|²`, exact.
    pub fn alpha_energy(&self) -> f64 {
        let a = self.kernel.scale();
        self.kernel.alpha * self.defect_l2_sq() / (a * a)
    }

    /// `|v|²_{H^{1/2}(ℝ)}` for zero history, through the Fourier weight:
    /// `−(1/π) Σ J_j J_l K(|x_j − x_l|/a)` over the input's jumps.
    pub fn h_half_seminorm_sq(&self) -> f64 {
        let a = self.kernel.scale();
        let jumps = self.input.jumps();
        let mut s = 0.0;
        for (i, &(xi, ji)) in jumps.iter().enumerate() {
            for &(xj, jj) in &jumps[i + 1..] {
                s += 2.0 * ji * jj * smoothed_log_kernel((xi - xj).abs() / a);
            }
        }
        (-s / PI).max(0.0)
    }

    /// `α∫|v̇|²` through the Fourier weight: `(β/2) Σ J_j J_l e^{−|x_j − x_l|/a}`.
    pub fn alpha_energy_fourier(&self) -> f64 {
        let a = self.kernel.scale();
        let jumps = self.input.jumps();
        let mut s = 0.0;
        for &(xi, ji) in &jumps {
            for &(xj, jj) in &jumps {
                s += ji * jj * (-(xi - xj).abs() / a).exp();
            }
        }
        0.5 * self.kernel.beta * s
    }
}

/// Quadratic forms of `u ↦ G_α ∗ u` over the cell values of a piecewise
/// constant input (zero history, zero extension after `T`).
#[derive(Debug, Clone)]
pub struct SmoothingGrams {
    /// `∫ v²`.
    pub l2: DMatrix<f64>,
    /// `∫ |u − v|²`.
    pub defect: DMatrix<f64>,
    /// `α ∫ |v̇|²`.
    pub alpha_energy: DMatrix<f64>,
    /// `|v|²_{H^{1/2}(ℝ)}`.
    pub h_half: DMatrix<f64>,
}

/// Exact Grams of the smoothing operator on `mesh`.
pub fn smoothing_grams(mesh: &Mesh1D, kernel: Kernel) -> SmoothingGrams {
    let n = mesh.n_cells;
    let a = kernel.scale();
    let tau = mesh.step;
    let e = (-tau / a).exp();
    // Rows of the nodal map u ↦ v(t_k).
    let mut rows: Vec<DVector<f64>> = Vec::with_capacity(n + 1);
    rows.push(DVector::zeros(n));
    for k in 0..n {
        let mut r = &rows[k] * e;
        r[k] += 1.0 - e;
        rows.push(r);
    }
    let mut l2 = DMatrix::zeros(n, n);
    let mut defect = DMatrix::zeros(n, n);
    let cell_decay = a * (1.0 - e * e) / 2.0;
    for k in 0..n {
        let mut c = rows[k].clone();
        c[k] -= 1.0;
        let cc = &c * c.transpose();
        defect += &cc * cell_decay;
        l2 += cc * cell_decay;
        l2[(k, k)] += tau;
        let cross = c * (a * (1.0 - e));
        for j in 0..n {
            l2[(k, j)] += cross[j];
            l2[(j, k)] += cross[j];
        }
    }
    let tail = &rows[n] * rows[n].transpose() * (a / 2.0);
    l2 += &tail;
    defect += tail;
    let alpha_energy = &defect * (kernel.alpha / (a * a));
    // Jumps J = D u at the vertices of the zero extension.
    let d = DMatrix::from_fn(n + 1, n, |k, j| {
        if j == k {
            1.0
        } else if j + 1 == k {
            -1.0
        } else {
            0.0
        }
    });
    let kmat = DMatrix::from_fn(n + 1, n + 1, |i, j| {
        smoothed_log_kernel((mesh.vertices[i] - mesh.vertices[j]).abs() / a)
    });
    let h_half = d.transpose() * kmat * d * (-1.0 / PI);
    let sym = |m: DMatrix<f64>| (&m + m.transpose()) * 0.5;
    SmoothingGrams {
        l2: sym(l2),
        defect: sym(defect),
        alpha_energy: sym(alpha_energy),
        h_half: sym(h_half),
    }
}
