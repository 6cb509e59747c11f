//! Exact upwinded test functions and their approximation on a subgrid.

pub mod subgrid;

use crate::analysis::functions::PiecewiseAffine;
use crate::elements::{upwind_shape, upwind_shape_slope, Node, Peclet};
use crate::error::{invalid, Result};
use crate::mesh::{Mesh1D, TensorMesh2D};

pub use subgrid::{
    approx_upwind_basis, basis_relative_error, peclet_barycentric_refine_edge,
    peclet_barycentric_refine_face, peclet_point, EdgeChain, FaceSkeleton, SubgridBasis,
    SubgridCell,
};

/// Continuous function solving `αv̈ + βv̇ = 0` on every cell of a mesh.
///
/// Stored by nodal values; [`Self::coefficients`] gives the per-cell chart
/// `c₁ + c₂ exp(−β(t − t_k)/α)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UpwindFunction {
    pub mesh: Mesh1D,
    pub values: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    /// Set when `β = 0`, where every cell is affine.
    pub linear_mode: bool,
}

impl UpwindFunction {
    pub fn new(mesh: Mesh1D, values: Vec<f64>, alpha: f64, beta: f64) -> Result<Self> {
        if values.len() != mesh.n_vertices() {
            return Err(invalid("one nodal value per vertex is required"));
        }
        if !(alpha > 0.0) || beta < 0.0 {
            return Err(invalid("need α > 0 and β >= 0"));
        }
        Ok(Self {
            mesh,
            values,
            alpha,
            beta,
            linear_mode: beta == 0.0,
        })
    }

    pub fn peclet(&self) -> Peclet {
        Peclet::new(self.alpha, self.beta, self.mesh.step)
    }

    /// `(c₁, c₂)` on cell `k`; in linear mode `c₂` is the slope.
    pub fn coefficients(&self, k: usize) -> (f64, f64) {
        let d = self.values[k + 1] - self.values[k];
        if self.linear_mode {
            return (self.values[k], d / self.mesh.step);
        }
        let den = -(-self.peclet().0).exp_m1();
        (self.values[k] + d / den, -d / den)
    }

    pub fn eval(&self, t: f64) -> f64 {
        if !(0.0..=self.mesh.length).contains(&t) {
            return 0.0;
        }
        let k = self.mesh.locate(t);
        let s = (t - self.mesh.vertices[k]) / self.mesh.step;
        let p = self.peclet();
        self.values[k] * upwind_shape(p, s, Node::Left) + self.values[k + 1] * upwind_shape(p, s, Node::Right)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        if !(0.0..=self.mesh.length).contains(&t) {
            return 0.0;
        }
        let k = self.mesh.locate(t);
        let s = (t - self.mesh.vertices[k]) / self.mesh.step;
        (self.values[k + 1] - self.values[k]) * upwind_shape_slope(self.peclet(), s, Node::Right)
            / self.mesh.step
    }

    /// Residual `αv̈ + βv̇` at `t`, zero up to rounding for every member of the space.
    pub fn residual(&self, t: f64) -> f64 {
        let k = self.mesh.locate(t);
        let (_, c2) = self.coefficients(k);
        if self.linear_mode {
            return 0.0;
        }
        let r = self.beta / self.alpha;
        let e = (-r * (t - self.mesh.vertices[k])).exp();
        self.alpha * c2 * r * r * e - self.beta * c2 * r * e
    }

    /// Nodal values viewed as a piecewise affine function.
    pub fn nodal_affine(&self) -> PiecewiseAffine {
        PiecewiseAffine::new(self.mesh.clone(), self.values.clone()).expect("sizes match")
    }
}

/// Upwinded interpolant: same nodal values, exponential shape on every cell.
pub fn exact_upwind_interpolant(u: &PiecewiseAffine, alpha: f64, beta: f64) -> Result<UpwindFunction> {
    UpwindFunction::new(u.mesh.clone(), u.values.clone(), alpha, beta)
}

/// Tensor product of a flow-direction upwinded hat and a transverse hat.
#[derive(Debug, Clone)]
pub struct SeparableBasis {
    pub flow: UpwindFunction,
    pub transverse: PiecewiseAffine,
}

impl SeparableBasis {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.flow.eval(x) * self.transverse.eval(y)
    }
}

/// Exact test function attached to interior vertex `vertex`.
pub fn exact_test_basis_2d(mesh: &TensorMesh2D, vertex: usize, alpha: f64, beta: f64) -> Result<SeparableBasis> {
    let (i, j) = mesh.vertex_coords(vertex);
    if vertex >= mesh.n_vertices() || mesh.interior_index(i, j).is_none() {
        return Err(invalid(format!("vertex {vertex} is not interior")));
    }
    let mut fv = vec![0.0; mesh.flow.n_vertices()];
    fv[i] = 1.0;
    let mut tv = vec![0.0; mesh.transverse.n_vertices()];
    tv[j] = 1.0;
    Ok(SeparableBasis {
        flow: UpwindFunction::new(mesh.flow.clone(), fv, alpha, beta)?,
        transverse: PiecewiseAffine::new(mesh.transverse.clone(), tv)?,
    })
}
