//! α-weighted energy norms of trial functions on 1D and tensor grids.

use super::gram::{mass_stiffness, Space};
use crate::error::{invalid, Result};
use crate::mesh::{Mesh1D, TensorMesh2D};
use nalgebra::DVector;

/// `‖u‖_α = (∫u² + α∫|u̇|²)^{1/2}` for a piecewise affine function given by
/// all vertex values.
pub fn alpha_norm_1d(mesh: &Mesh1D, values: &[f64], alpha: f64) -> Result<f64> {
    if values.len() != mesh.n_vertices() {
        return Err(invalid("one value per vertex is required"));
    }
    let (m, k) = mass_stiffness(mesh, Space::Affine);
    let v = DVector::from_column_slice(values);
    Ok((v.dot(&(&m * &v)) + alpha * v.dot(&(&k * &v))).max(0.0).sqrt())
}

/// `‖u‖_α = (∫u² + α∫|∇u|²)^{1/2}` for a bilinear function on a tensor grid,
/// given by all vertex values in the grid numbering `j (nf + 1) + i`.
///
/// Integrals are exact: the tensor structure reduces them to 1D mass and
/// stiffness matrices.
pub fn alpha_norm(mesh: &TensorMesh2D, values: &[f64], alpha: f64) -> Result<f64> {
    if values.len() != mesh.n_vertices() {
        return Err(invalid("one value per vertex is required"));
    }
    let (mt, kt) = mass_stiffness(&mesh.flow, Space::Affine);
    let (my, ky) = mass_stiffness(&mesh.transverse, Space::Affine);
    let nf = mesh.flow.n_vertices();
    let ny = mesh.transverse.n_vertices();
    let u = nalgebra::DMatrix::from_fn(nf, ny, |i, j| values[j * nf + i]);
    let form = |a: &nalgebra::DMatrix<f64>, b: &nalgebra::DMatrix<f64>| (a * &u * b).dot(&u);
    let l2 = form(&mt, &my);
    let grad = form(&kt, &my) + form(&mt, &ky);
    Ok((l2 + alpha * grad).max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_hat() {
        let s = 0.125;
        let mesh = TensorMesh2D::uniform(1.0, 1.0, 8, 8).unwrap();
        let mut v = vec![0.0; mesh.n_vertices()];
        v[mesh.vertex_index(3, 5)] = 1.0;
        let alpha = 0.37;
        let n = alpha_norm(&mesh, &v, alpha).unwrap();
        let expect = s * s * 4.0 / 9.0 + alpha * 8.0 / 3.0;
        assert!((n * n - expect).abs() < 1e-12);
    }
}
