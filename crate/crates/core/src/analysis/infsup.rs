//! Generalized eigenvalues and discrete inf-sup constants.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use super::gram::NormGram;
use crate::error::{invalid, Error, Result};

/// Cholesky factor of a Gram, or an `Indefinite` error naming it.
pub fn cholesky(g: &DMatrix<f64>, tag: &str) -> Result<Cholesky<f64, Dyn>> {
    Cholesky::new(g.clone()).ok_or_else(|| Error::Indefinite { tag: tag.to_string() })
}

/// Eigenpairs of `A x = λ B x` with `B` positive definite, ascending.
pub fn generalized_eigen(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    if a.shape() != b.shape() || !a.is_square() {
        return Err(invalid("generalized eigenproblem needs square matrices of equal size"));
    }
    let ch = cholesky(b, "generalized eigenproblem")?;
    let l = ch.l();
    let linv_a = l.solve_lower_triangular(a).ok_or_else(|| invalid("singular factor"))?;
    let c = l
        .solve_lower_triangular(&linv_a.transpose())
        .ok_or_else(|| invalid("singular factor"))?;
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let lt = l.transpose();
    let mut vecs = DMatrix::zeros(a.nrows(), order.len());
    let mut vals = Vec::with_capacity(order.len());
    for (c, &i) in order.iter().enumerate() {
        vals.push(eig.eigenvalues[i]);
        let y = eig.eigenvectors.column(i).into_owned();
        let x = lt.solve_upper_triangular(&y).ok_or_else(|| invalid("singular factor"))?;
        vecs.set_column(c, &x);
    }
    Ok((vals, vecs))
}

/// Largest `λ` with `xᵀAx ≤ λ xᵀBx`, and its maximizer.
pub fn max_ratio(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<(f64, DVector<f64>)> {
    let (vals, vecs) = generalized_eigen(a, b)?;
    let k = vals.len() - 1;
    Ok((vals[k], vecs.column(k).into_owned()))
}

/// Smallest `λ` with `xᵀAx ≥ λ xᵀBx`, and its minimizer.
pub fn min_ratio(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<(f64, DVector<f64>)> {
    let (vals, vecs) = generalized_eigen(a, b)?;
    Ok((vals[0], vecs.column(0).into_owned()))
}

/// Inf-sup constant with its minimizing trial vector.
#[derive(Debug, Clone)]
pub struct InfSup {
    pub value: f64,
    pub trial: DVector<f64>,
}

/// `inf_u sup_v vᵀBu / (‖u‖_X ‖v‖_Y)` for `B` of shape test × trial.
///
/// Computed as the smallest singular value of `L_Y⁻¹ B L_X⁻ᵀ`.
pub fn inf_sup(b: &DMatrix<f64>, nx: &NormGram, ny: &NormGram) -> Result<InfSup> {
    if b.ncols() != nx.dim() || b.nrows() != ny.dim() {
        return Err(invalid(format!(
            "pairing is {}x{} but grams are {} (trial) and {} (test)",
            b.nrows(),
            b.ncols(),
            nx.dim(),
            ny.dim()
        )));
    }
    if b.nrows() < b.ncols() {
        return Ok(InfSup {
            value: 0.0,
            trial: DVector::zeros(b.ncols()),
        });
    }
    let lx = cholesky(&nx.matrix, &nx.tag.to_string())?.l();
    let ly = cholesky(&ny.matrix, &ny.tag.to_string())?.l();
    let t = ly.solve_lower_triangular(b).ok_or_else(|| invalid("singular factor"))?;
    // W = t L_X^{-T}, i.e. Wᵀ = L_X^{-1} tᵀ.
    let w = lx
        .solve_lower_triangular(&t.transpose())
        .ok_or_else(|| invalid("singular factor"))?
        .transpose();
    let svd = w.svd(false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    let (k, value) = svd
        .singular_values
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty");
    let y = vt.row(k).transpose();
    let trial = lx
        .transpose()
        .solve_upper_triangular(&y)
        .ok_or_else(|| invalid("singular factor"))?;
    Ok(InfSup { value, trial })
}

/// Smallest generalized singular value `sqrt(λ_min(NX⁻¹ Bᵀ NY⁻¹ B))`.
pub fn inf_sup_constant(b: &DMatrix<f64>, nx: &NormGram, ny: &NormGram) -> Result<f64> {
    inf_sup(b, nx, ny).map(|r| r.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::gram::NormTag;

    fn gram(m: DMatrix<f64>) -> NormGram {
        NormGram::new(NormTag::L2, m)
    }

    #[test]
    fn identity_and_diagonal() {
        let i3 = DMatrix::identity(3, 3);
        assert!((inf_sup_constant(&i3, &gram(i3.clone()), &gram(i3.clone())).unwrap() - 1.0).abs() < 1e-14);
        let b = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 0.5]));
        let i2 = DMatrix::identity(2, 2);
        assert!((inf_sup_constant(&b, &gram(i2.clone()), &gram(i2)).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn indefinite_gram_is_reported() {
        let i2 = DMatrix::identity(2, 2);
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(
            inf_sup_constant(&i2, &gram(bad), &gram(i2.clone())),
            Err(Error::Indefinite { .. })
        ));
    }

    #[test]
    fn generalized_extremes() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 8.0]);
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        let (lo, _) = min_ratio(&a, &b).unwrap();
        let (hi, x) = max_ratio(&a, &b).unwrap();
        assert!((lo - 2.0).abs() < 1e-14 && (hi - 4.0).abs() < 1e-14);
        assert!(x[0].abs() < 1e-14);
    }
}
