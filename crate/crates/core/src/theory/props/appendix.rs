//! Sup-norm and smoothing-defect estimates and the averaged-norm equivalence.

use nalgebra::DMatrix;

use super::{inverse_diagonal, point_rng, quotient, Point, Sweep, VerifyOptions, Whitener};
use crate::analysis::convolution::{smoothing_grams, Kernel};
use crate::analysis::gram::{h_half_00_gram, h_half_left_zero_gram, mass_stiffness, restrict_interior, Space};
use crate::analysis::hilbert::zlog;
use crate::analysis::infsup::generalized_eigen;
use crate::error::Result;
use crate::mesh::uniform_partition;
use crate::par;
use crate::theory::fit::ClaimedLaw;

pub(super) fn averaged_equivalence(opts: &VerifyOptions) -> Result<Sweep> {
    let mut grid = Vec::new();
    for sn in [4usize, 8, 16, 32] {
        for tn in [sn, 2 * sn] {
            for a_fac in [1.0, 0.1] {
                grid.push((sn, tn, a_fac));
            }
        }
    }
    let points = par::map_slice(&grid, |&(sn, tn, a_fac)| -> Result<Point> {
        let sigma = 1.0 / sn as f64;
        let alpha = a_fac * sigma;
        let time = uniform_partition(1.0, tn)?;
        let tau = time.step;
        let n = tn;
        let q = h_half_left_zero_gram(&time, Space::Affine).matrix;
        let (m_all, _) = mass_stiffness(&time, Space::Affine);
        let m = m_all.view((1, 1), (n, n)).into_owned();
        // ū_k = (u_k + u_{k+1})/2 with u_0 = 0, over vertices 1..=n.
        let avg = DMatrix::from_fn(n, n, |k, i| if i == k || i + 1 == k { 0.5 } else { 0.0 });
        let p = avg.transpose() * &avg * tau;
        let space = uniform_partition(1.0, sn)?;
        let (my, ky) = mass_stiffness(&space, Space::Affine);
        let (my, ky) = (restrict_interior(&my), restrict_interior(&ky));
        let (mus, _) = generalized_eigen(&(&my + &ky * alpha), &my)?;
        let mut best = 0.0f64;
        let mut rng = point_rng(opts, "L2.3", &[sigma, tau, alpha]);
        for &mu in &mus {
            let a = &q + &m * mu;
            let b = &q + &p * mu;
            let (lam, _) = Whitener::new(&b, "averaged")?.max(&a);
            best = best.max(lam);
            for _ in 0..opts.samples.min(4) {
                let x = super::normal_vector(&mut rng, n);
                best = best.max(quotient(&a, &b, &x));
            }
        }
        Ok(Point::new(
            &[("sigma", sigma), ("tau", tau), ("alpha", alpha)],
            1.0 / sigma,
            best.sqrt(),
            1.0,
        ))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(Sweep::new(ClaimedLaw::Constant, "C (τ ≤ σ, α ≤ σ)", vec![points]))
}

pub(super) fn sup_by_half_norm(_opts: &VerifyOptions) -> Result<Sweep> {
    let levels: Vec<i32> = (3..=11).collect();
    let points = par::map_slice(&levels, |&l| -> Result<Point> {
        let mesh = uniform_partition(1.0, 1usize << l)?;
        let (m, _) = mass_stiffness(&mesh, Space::Affine);
        let n = h_half_00_gram(&mesh, Space::Affine).matrix + restrict_interior(&m);
        let best = inverse_diagonal(&n, "h_half")?.into_iter().fold(0.0, f64::max);
        let tau = mesh.step;
        Ok(Point::new(&[("tau", tau)], 1.0 / tau, best.sqrt(), tau.ln().abs().sqrt()))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(Sweep::new(ClaimedLaw::Growth, "C·|log τ|^(1/2)", vec![points]))
}

/// `max_x Σ_i |Hφ_i(x)|` over interior hats of a uniform mesh of `n` cells on `[0, 1]`,
/// which is the norm of `H` from nodal sup to sup.
pub(crate) fn hilbert_sup_norm(n: usize, sub: usize) -> f64 {
    let tau = 1.0 / n as f64;
    let xs: Vec<f64> = (0..=n * sub).map(|k| k as f64 * tau / sub as f64).collect();
    let vals = par::map_slice(&xs, |&x| {
        let f: Vec<f64> = (0..=n).map(|k| zlog(x - k as f64 * tau)).collect();
        (1..n)
            .map(|i| (-f[i - 1] + 2.0 * f[i] - f[i + 1]).abs())
            .sum::<f64>()
            / (std::f64::consts::PI * tau)
    });
    vals.into_iter().fold(0.0, f64::max)
}

pub(super) fn hilbert_sup(_opts: &VerifyOptions) -> Result<Sweep> {
    let levels: Vec<i32> = (3..=11).collect();
    let points: Vec<Point> = levels
        .iter()
        .map(|&l| {
            let n = 1usize << l;
            let tau = 1.0 / n as f64;
            Point::new(&[("tau", tau)], 1.0 / tau, hilbert_sup_norm(n, 4), tau.ln().abs())
        })
        .collect();
    Ok(Sweep::new(ClaimedLaw::Growth, "C·|log τ|", vec![points]))
}

pub(super) fn smoothing_defect(_opts: &VerifyOptions) -> Result<Sweep> {
    let mesh = uniform_partition(32.0, 32)?;
    let tau = mesh.step;
    let cs = [4.0, 16.0, 64.0, 256.0];
    let l2 = DMatrix::identity(32, 32) * tau;
    let points = cs
        .iter()
        .map(|&c| -> Result<Point> {
            let g = smoothing_grams(&mesh, Kernel::new(tau / c, 1.0)?);
            let (lam, _) = generalized_eigen(&g.defect, &l2)?;
            Ok(Point::new(&[("C", c), ("tau", tau)], c, lam[lam.len() - 1].max(0.0).sqrt(), 1.0))
        })
        .collect::<Result<Vec<_>>>()?;
    let decreasing = points.windows(2).all(|w| w[1].measured < w[0].measured);
    let below_one = points.iter().all(|p| p.measured < 1.0);
    Ok(Sweep::new(ClaimedLaw::Constant, "ε(C) → 0", vec![points])
        .check("decreasing_in_C", decreasing)
        .check("below_one", below_one))
}
