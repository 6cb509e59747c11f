//! Dense pairing matrices of the discrete convection-diffusion form.

use nalgebra::DMatrix;

use crate::analysis::gram::{mass_stiffness, restrict_interior, Space};
use crate::elements::{element_matrices, Mat2};
use crate::mesh::{Mesh1D, TensorMesh2D};

fn assemble_flow(mesh: &Mesh1D, local: Mat2) -> DMatrix<f64> {
    let nv = mesh.n_vertices();
    let mut m = DMatrix::zeros(nv, nv);
    for c in 0..mesh.n_cells {
        for a in 0..2 {
            for b in 0..2 {
                m[(c + a, c + b)] += local[a][b];
            }
        }
    }
    m
}

/// Flow-direction blocks over all vertices, indexed `[test][trial]`:
/// `(∫ u̇(α v̇ + β v), ∫ u v)` with affine `u` and upwinded `v`.
pub fn flow_blocks(mesh: &Mesh1D, alpha: f64, beta: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let lm = element_matrices(alpha, beta, 0.0, mesh.step);
    (assemble_flow(mesh, lm.conv), assemble_flow(mesh, lm.mass))
}

/// Interior pairing `∫ u̇(αv̇ + βv) + γ∫uv` on a 1D mesh, test × trial.
pub fn pairing_matrix_1d(mesh: &Mesh1D, alpha: f64, beta: f64, gamma: f64) -> DMatrix<f64> {
    let (c, m) = flow_blocks(mesh, alpha, beta);
    restrict_interior(&(c + m * gamma))
}

/// Interior pairing of the 2D form with crosswind diffusion, in the grid's
/// interior numbering (flow index fastest).
pub fn pairing_matrix_2d(mesh: &TensorMesh2D, alpha: f64, beta: f64, gamma: f64) -> DMatrix<f64> {
    let (c, m) = flow_blocks(&mesh.flow, alpha, beta);
    let (c, m) = (restrict_interior(&c), restrict_interior(&m));
    let (my, ky) = mass_stiffness(&mesh.transverse, Space::Affine);
    let (my, ky) = (restrict_interior(&my), restrict_interior(&ky));
    my.kronecker(&(c + &m * gamma)) + ky.kronecker(&m) * alpha
}

/// Transverse mass and stiffness over interior vertices; `(1×1 identity, 0)`
/// stands for the scalar case.
#[derive(Debug, Clone)]
pub struct Transverse {
    pub mass: DMatrix<f64>,
    pub stiffness: DMatrix<f64>,
    /// Transverse step, 0 in the scalar case.
    pub sigma: f64,
}

impl Transverse {
    pub fn scalar() -> Self {
        Self {
            mass: DMatrix::identity(1, 1),
            stiffness: DMatrix::zeros(1, 1),
            sigma: 0.0,
        }
    }

    pub fn of(mesh: &Mesh1D) -> Self {
        let (m, k) = mass_stiffness(mesh, Space::Affine);
        Self {
            mass: restrict_interior(&m),
            stiffness: restrict_interior(&k),
            sigma: mesh.step,
        }
    }

    pub fn dim(&self) -> usize {
        self.mass.nrows()
    }

    /// `a^α = mass + α stiffness`.
    pub fn energy(&self, alpha: f64) -> DMatrix<f64> {
        &self.mass + &self.stiffness * alpha
    }
}
