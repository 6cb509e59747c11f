//! Inf-sup lower bounds certified by an explicit test-function operator.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::test_functions::{
    candidate_test_function_appendix, candidate_test_function_main, RecipeMode, TestFunctionRecipe,
};
use crate::analysis::gram::{theorem_norm_grams, NormGram, Side};
use crate::analysis::infsup::{generalized_eigen, inf_sup, max_ratio};
use crate::assembly::{assemble, Grid, Method, ProblemSpec};
use crate::error::{invalid, Result};
use crate::mesh::Mesh1D;

/// Outcome of [`measure_certified_inf_sup`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertifiedInfSup {
    /// `min_u b(u, Ru) / (‖u‖_α ‖Ru‖'_α)` over the sampled trial functions.
    pub sampled_min: f64,
    /// `λ_min(sym RᵀB, N_X) / λ_max(RᵀN_Y R, N_X)^{1/2}`, valid for every `u`.
    pub certified_bound: f64,
    /// Optimal constant from the generalized SVD.
    pub true_constant: f64,
    pub samples: usize,
}

/// Matrix of `u ↦ v(u)` on interior flow vertices for one transverse dof.
pub fn flow_test_operator(mesh: &Mesh1D, alpha: f64, beta: f64, recipe: &TestFunctionRecipe) -> Result<DMatrix<f64>> {
    let ni = mesh.n_interior();
    let mut u = DMatrix::zeros(mesh.n_vertices(), ni);
    for k in 0..ni {
        u[(k + 1, k)] = 1.0;
    }
    let nodal = match recipe.mode {
        RecipeMode::Main => candidate_test_function_main(mesh, &u, alpha, beta, recipe)?.nodal,
        RecipeMode::Appendix => {
            candidate_test_function_appendix(mesh, &u, alpha, beta, recipe.lambda(alpha))?
                .v3
                .nodal
        }
    };
    Ok(nodal.rows(1, ni).into_owned())
}

/// Test operator on the interior dofs of a grid (identity across the transverse direction).
pub fn test_operator(grid: &Grid, alpha: f64, beta: f64, recipe: &TestFunctionRecipe) -> Result<DMatrix<f64>> {
    match grid {
        Grid::OneD(m) => flow_test_operator(m, alpha, beta, recipe),
        Grid::TwoD(m) => {
            let rt = flow_test_operator(&m.flow, alpha, beta, recipe)?;
            Ok(DMatrix::identity(m.transverse.n_interior(), m.transverse.n_interior()).kronecker(&rt))
        }
    }
}

fn ratio(b: &DMatrix<f64>, r: &DMatrix<f64>, nx: &NormGram, ny: &NormGram, u: &DVector<f64>) -> f64 {
    let v = r * u;
    let num = v.dot(&(b * u));
    let du = u.dot(&(&nx.matrix * u)).sqrt();
    let dv = v.dot(&(&ny.matrix * &v)).sqrt();
    if du == 0.0 || dv == 0.0 {
        return 0.0;
    }
    num / (du * dv)
}

/// Measures how well the candidate operator certifies inf-sup stability.
///
/// Trial samples are i.i.d. normal nodal vectors plus adversaries: the
/// minimizer of the generalized SVD and the lowest generalized eigenvectors
/// of `sym(RᵀB)` against the trial norm.
pub fn measure_certified_inf_sup(
    grid: &Grid,
    spec: &ProblemSpec,
    recipe: &TestFunctionRecipe,
    samples: usize,
    seed: u64,
) -> Result<CertifiedInfSup> {
    recipe.validate()?;
    let sys = assemble(spec, grid, Method::PgExact)?;
    let d = sys.matrix.to_dense();
    let n = d.len();
    let b = DMatrix::from_fn(n, n, |i, j| d[i][j]);
    let nx = theorem_norm_grams(grid, spec.alpha, spec.beta, Side::Trial)?;
    let ny = theorem_norm_grams(grid, spec.alpha, spec.beta, Side::Test)?;
    let r = test_operator(grid, spec.alpha, spec.beta, recipe)?;
    if r.shape() != (n, n) {
        return Err(invalid("test operator does not match the discrete system"));
    }
    let truth = inf_sup(&b, &nx, &ny)?;
    let rb = r.transpose() * &b;
    let sym = (&rb + rb.transpose()) * 0.5;
    let (lo, vecs) = generalized_eigen(&sym, &nx.matrix)?;
    let (hi, _) = max_ratio(&(r.transpose() * &ny.matrix * &r), &nx.matrix)?;
    let certified = if hi > 0.0 { lo[0] / hi.sqrt() } else { 0.0 };

    let mut candidates = vec![truth.trial.clone()];
    candidates.extend((0..vecs.ncols().min(4)).map(|k| vecs.column(k).into_owned()));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    candidates.extend((0..samples).map(|_| DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng))));
    let sampled = candidates
        .iter()
        .map(|u| ratio(&b, &r, &nx, &ny, u))
        .fold(f64::INFINITY, f64::min);
    Ok(CertifiedInfSup {
        sampled_min: sampled,
        certified_bound: certified,
        true_constant: truth.value,
        samples: candidates.len(),
    })
}
