//! Estimates for the upwinded interpolant of piecewise affine functions.

use nalgebra::DMatrix;

use super::{input_family, normal_vector, point_rng, quotient, shift_gram, Point, Sweep, VerifyOptions, Whitener};
use crate::analysis::besov::dyadic_shifts;
use crate::analysis::functions::PiecewiseAffine;
use crate::analysis::gram::{h_half_00_gram, mass_stiffness, restrict_interior, Space};
use crate::analysis::infsup::generalized_eigen;
use crate::elements::{element_matrices, phi_of_p, Peclet};
use crate::error::Result;
use crate::mesh::{uniform_partition, Mesh1D};
use crate::par;
use crate::quadrature::graded_rule;
use crate::theory::fit::ClaimedLaw;
use crate::upwind_basis::exact_upwind_interpolant;

const CELLS: usize = 32;

fn peclet_grid() -> Vec<f64> {
    (-2..=4).map(|k| 10f64.powi(k)).collect()
}

fn mesh() -> Result<Mesh1D> {
    uniform_partition(1.0, CELLS)
}

fn affine_interior(mesh: &Mesh1D) -> (DMatrix<f64>, DMatrix<f64>) {
    let (m, k) = mass_stiffness(mesh, Space::Affine);
    (restrict_interior(&m), restrict_interior(&k))
}

pub(super) fn interpolant_l2(_opts: &VerifyOptions) -> Result<Sweep> {
    let mesh = mesh()?;
    let (ma, _) = affine_interior(&mesh);
    let points = par::map_slice(&peclet_grid(), |&p| -> Result<Point> {
        let alpha = mesh.step / p;
        let (mu, _) = mass_stiffness(&mesh, Space::Upwind { alpha, beta: 1.0 });
        let (vals, _) = generalized_eigen(&restrict_interior(&mu), &ma)?;
        let upper = vals[vals.len() - 1];
        let lower = vals[0];
        let two_sided = upper.max(1.0 / lower);
        Ok(Point::new(
            &[("peclet", p), ("alpha", alpha), ("upper", upper), ("lower", lower)],
            p,
            two_sided.sqrt(),
            1.0,
        ))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(Sweep::new(ClaimedLaw::Constant, "1/C ≤ ‖v‖/‖u‖ ≤ C", vec![points]))
}

pub(super) fn interpolant_error(_opts: &VerifyOptions) -> Result<Sweep> {
    let mesh = mesh()?;
    let tau = mesh.step;
    let (ma, ka) = affine_interior(&mesh);
    let points = par::map_slice(&peclet_grid(), |&p| -> Result<Point> {
        let alpha = tau / p;
        let (mu, _) = mass_stiffness(&mesh, Space::Upwind { alpha, beta: 1.0 });
        // Mixed mass ∫ φ_b ψ_a assembled from the element matrices.
        let lm = element_matrices(alpha, 1.0, 0.0, tau);
        let nv = mesh.n_vertices();
        let mut mixed = DMatrix::zeros(nv, nv);
        for c in 0..mesh.n_cells {
            for a in 0..2 {
                for b in 0..2 {
                    mixed[(c + a, c + b)] += lm.mass[a][b];
                }
            }
        }
        let mixed = restrict_interior(&mixed);
        let err = &ma + restrict_interior(&mu) - &mixed - mixed.transpose();
        let (vals, _) = generalized_eigen(&err, &(&ka * (tau * tau)))?;
        Ok(Point::new(&[("peclet", p), ("alpha", alpha)], p, vals[vals.len() - 1].max(0.0).sqrt(), 1.0))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let bounded = points.iter().all(|pt| pt.measured <= 1.0 + 1e-9);
    Ok(Sweep::new(ClaimedLaw::Constant, "C·τ", vec![points]).check("maximum_principle_constant_le_1", bounded))
}

pub(super) fn interpolant_energy(opts: &VerifyOptions) -> Result<Sweep> {
    let mesh = mesh()?;
    let peclets = [0.01, 1.0, 100.0];
    let mut worst = 0.0f64;
    let mut points = Vec::new();
    for &p in &peclets {
        let alpha = mesh.step / p;
        let mut rng = point_rng(opts, "P3.7-Φ", &[p]);
        let phi = phi_of_p(Peclet(p));
        let mut ratio_max = 0.0f64;
        for _ in 0..20 {
            let x = normal_vector(&mut rng, CELLS - 1);
            let u = PiecewiseAffine::from_interior(mesh.clone(), x.as_slice())?;
            let v = exact_upwind_interpolant(&u, alpha, 1.0)?;
            let dv: f64 = (0..mesh.n_cells)
                .map(|k| {
                    let (a, b) = mesh.cell(k);
                    graded_rule(a, b, alpha, 24)
                        .into_iter()
                        .map(|(t, w)| w * v.derivative(t).powi(2))
                        .sum::<f64>()
                })
                .sum();
            let ratio = dv / u.h1_semi_sq();
            worst = worst.max((ratio - phi).abs() / phi);
            ratio_max = ratio_max.max(ratio / phi);
        }
        points.push(Point::new(&[("peclet", p), ("phi", phi)], p, ratio_max, 1.0));
    }
    Ok(Sweep::new(ClaimedLaw::Constant, "∫|v̇|² = Φ(p)∫|u̇|²", vec![points])
        .check("identity_within_1e-8", worst <= 1e-8)
        .note(format!("largest relative deviation from Φ(p): {worst:.3e}")))
}

pub(super) fn interpolant_weak(opts: &VerifyOptions) -> Result<Sweep> {
    let mesh = mesh()?;
    let tau = mesh.step;
    let q = h_half_00_gram(&mesh, Space::Affine).matrix;
    let w = Whitener::new(&q, "h_half_00")?;
    let points = par::map_slice(&peclet_grid(), |&p| -> Result<Point> {
        let alpha = tau / p;
        let floor = tau.min(alpha) / 64.0;
        let mut best = 0.0f64;
        let mut grams = Vec::new();
        for h in dyadic_shifts(1.0).into_iter().filter(|&h| h >= floor) {
            let g = shift_gram(CELLS, tau, Peclet(p), alpha, h);
            best = best.max(w.max(&g).0);
            grams.push(g);
        }
        let mut rng = point_rng(opts, "P3.8", &[p]);
        for x in input_family(&mut rng, CELLS - 1, opts.samples) {
            let weak = grams.iter().map(|g| x.dot(&(g * &x))).fold(0.0, f64::max);
            best = best.max(weak / x.dot(&(&q * &x)));
        }
        Ok(Point::new(&[("peclet", p), ("alpha", alpha)], p, best.sqrt(), 1.0))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(Sweep::new(ClaimedLaw::Constant, "C", vec![points]))
}

pub(super) fn interpolant_alpha_energy(opts: &VerifyOptions) -> Result<Sweep> {
    let mesh = mesh()?;
    let tau = mesh.step;
    let q = h_half_00_gram(&mesh, Space::Affine).matrix;
    let (_, k) = affine_interior(&mesh);
    let points = par::map_slice(&peclet_grid(), |&p| -> Result<Point> {
        let alpha = tau / p;
        let a = &k * (alpha * phi_of_p(Peclet(p)));
        let b = &q + &k * alpha;
        let (mut best, _) = Whitener::new(&b, "half_alpha")?.max(&a);
        let mut rng = point_rng(opts, "P3.10", &[p]);
        for x in input_family(&mut rng, CELLS - 1, opts.samples) {
            best = best.max(quotient(&a, &b, &x));
        }
        Ok(Point::new(&[("peclet", p), ("alpha", alpha)], p, best.sqrt(), 1.0))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(Sweep::new(ClaimedLaw::Constant, "C", vec![points]))
}

pub(super) fn interpolant_half(opts: &VerifyOptions) -> Result<Sweep> {
    let mesh = mesh()?;
    let tau = mesh.step;
    let q = h_half_00_gram(&mesh, Space::Affine).matrix;
    let (m, k) = affine_interior(&mesh);
    let alphas: Vec<f64> = (1..=8).map(|e| 10f64.powi(-e)).collect();
    let points = par::map_slice(&alphas, |&alpha| -> Result<Point> {
        let a = h_half_00_gram(&mesh, Space::Upwind { alpha, beta: 1.0 }).matrix;
        let b = &m + &q * alpha.ln().abs() + &k * alpha;
        let (mut best, _) = Whitener::new(&b, "half_split")?.max(&a);
        let mut rng = point_rng(opts, "P3.11", &[alpha]);
        for x in input_family(&mut rng, CELLS - 1, opts.samples) {
            best = best.max(quotient(&a, &b, &x));
        }
        Ok(Point::new(&[("alpha", alpha), ("tau", tau)], 1.0 / alpha, best.sqrt(), 1.0))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(Sweep::new(ClaimedLaw::Constant, "C", vec![points]))
}
