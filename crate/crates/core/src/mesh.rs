//! Uniform 1D partitions and tensor-product grids.

use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};

/// Uniform partition of `[0, length]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mesh1D {
    /// Extent of the interval.
    pub length: f64,
    /// Number of cells.
    pub n_cells: usize,
    /// Cell length `length / n_cells`.
    pub step: f64,
    /// Vertex coordinates `t_k = k * step`, with the last one set to `length`.
    pub vertices: Vec<f64>,
}

/// Builds the uniform partition of `[0, extent]` into `n` cells.
pub fn uniform_partition(extent: f64, n: usize) -> Result<Mesh1D> {
    if !(extent > 0.0) || !extent.is_finite() {
        return Err(invalid(format!("extent must be positive, got {extent}")));
    }
    if n == 0 {
        return Err(invalid("a partition needs at least one cell"));
    }
    let step = extent / n as f64;
    let mut vertices: Vec<f64> = (0..=n).map(|k| k as f64 * step).collect();
    vertices[n] = extent;
    Ok(Mesh1D {
        length: extent,
        n_cells: n,
        step,
        vertices,
    })
}

impl Mesh1D {
    pub fn n_vertices(&self) -> usize {
        self.n_cells + 1
    }

    /// Endpoints of cell `k`.
    pub fn cell(&self, k: usize) -> (f64, f64) {
        (self.vertices[k], self.vertices[k + 1])
    }

    /// Cell containing `t`, clamped to the mesh.
    pub fn locate(&self, t: f64) -> usize {
        let k = (t / self.step).floor();
        if k < 0.0 {
            0
        } else {
            (k as usize).min(self.n_cells - 1)
        }
    }

    /// Number of interior vertices.
    pub fn n_interior(&self) -> usize {
        self.n_cells - 1
    }
}

/// Position of a grid vertex relative to the boundary of `]0,T[ × V`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VertexClass {
    Interior,
    /// First coordinate equal to 0.
    Inflow,
    /// First coordinate equal to T.
    Outflow,
    /// Remaining boundary vertices (transverse extremities).
    Lateral,
}

/// Tensor product of a flow-direction mesh and a transverse mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorMesh2D {
    pub flow: Mesh1D,
    pub transverse: Mesh1D,
}

pub fn tensor_mesh(flow: Mesh1D, transverse: Mesh1D) -> TensorMesh2D {
    TensorMesh2D { flow, transverse }
}

impl TensorMesh2D {
    /// Square grid `[0,T] × [0,V]` with `nf × nt` cells.
    pub fn uniform(t: f64, v: f64, nf: usize, nt: usize) -> Result<Self> {
        Ok(tensor_mesh(uniform_partition(t, nf)?, uniform_partition(v, nt)?))
    }

    pub fn n_cells(&self) -> usize {
        self.flow.n_cells * self.transverse.n_cells
    }

    pub fn n_vertices(&self) -> usize {
        self.flow.n_vertices() * self.transverse.n_vertices()
    }

    pub fn n_interior(&self) -> usize {
        self.flow.n_interior() * self.transverse.n_interior()
    }

    /// Global index of vertex `(i, j)`; the flow index runs fastest.
    pub fn vertex_index(&self, i: usize, j: usize) -> usize {
        j * self.flow.n_vertices() + i
    }

    /// Inverse of [`Self::vertex_index`].
    pub fn vertex_coords(&self, idx: usize) -> (usize, usize) {
        let nv = self.flow.n_vertices();
        (idx % nv, idx / nv)
    }

    /// Index of interior vertex `(i, j)` among interior unknowns.
    pub fn interior_index(&self, i: usize, j: usize) -> Option<usize> {
        let nf = self.flow.n_cells;
        let nt = self.transverse.n_cells;
        if i == 0 || j == 0 || i >= nf || j >= nt {
            return None;
        }
        Some((j - 1) * (nf - 1) + (i - 1))
    }

    pub fn classify(&self, i: usize, j: usize) -> VertexClass {
        if i == 0 {
            VertexClass::Inflow
        } else if i == self.flow.n_cells {
            VertexClass::Outflow
        } else if j == 0 || j == self.transverse.n_cells {
            VertexClass::Lateral
        } else {
            VertexClass::Interior
        }
    }

    pub fn point(&self, i: usize, j: usize) -> (f64, f64) {
        (self.flow.vertices[i], self.transverse.vertices[j])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_examples() {
        let m = uniform_partition(1.0, 4).unwrap();
        assert_eq!(m.vertices, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let m = uniform_partition(2.0, 80).unwrap();
        assert_eq!(m.n_vertices(), 81);
        assert!((m.step - 0.025).abs() < 1e-16);
        assert!(uniform_partition(0.0, 3).is_err());
        assert!(uniform_partition(1.0, 0).is_err());
    }

    #[test]
    fn tensor_counts() {
        let m = TensorMesh2D::uniform(1.0, 1.0, 2, 2).unwrap();
        assert_eq!((m.n_vertices(), m.n_interior()), (9, 1));
        let m = TensorMesh2D::uniform(1.0, 1.0, 80, 80).unwrap();
        assert_eq!(m.n_vertices(), 6561);
        let m = TensorMesh2D::uniform(1.0, 1.0, 1, 1).unwrap();
        assert_eq!((m.n_vertices(), m.n_interior()), (4, 0));
    }
}
