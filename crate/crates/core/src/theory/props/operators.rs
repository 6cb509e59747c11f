//! Projection, weak-space embedding and smoothing estimates.

use nalgebra::{DMatrix, DVector};

use super::{
    averaging_matrix, input_family, inverse_diagonal, jump_matrix, normal_vector, pc_shift_gram, point_rng, quotient,
    shift_gram, Point, Sweep, VerifyOptions, Whitener,
};
use crate::analysis::besov::{besov_epsilon_constant, dyadic_shifts, h_half_weak_seminorm_pc, h_sobolev_pc_sq};
use crate::analysis::convolution::{smoothing_grams, Kernel};
use crate::analysis::fourier::{smoothed_h_half_sq, sobolev_seminorm_sq, WavePacket};
use crate::analysis::functions::PiecewiseConstant;
use crate::analysis::gram::{h_half_00_gram, mass_stiffness, restrict_interior, Space};
use crate::analysis::hilbert::hilbert_gram;
use crate::elements::Peclet;
use crate::error::Result;
use crate::mesh::uniform_partition;
use crate::par;
use crate::theory::fit::{ls_slope, ClaimedLaw};

/// `‖u‖²_{H^{1/2}(ℝ)}` Gram (zero extension) of interior hats on a uniform mesh.
fn half_norm_00(n_cells: usize) -> Result<DMatrix<f64>> {
    let mesh = uniform_partition(1.0, n_cells)?;
    let (m, _) = mass_stiffness(&mesh, Space::Affine);
    Ok(h_half_00_gram(&mesh, Space::Affine).matrix + restrict_interior(&m))
}

/// Shifts probed by the weak seminorm; below one cell the piecewise constant
/// shift ratio no longer depends on `h`.
fn weak_shifts(tau: f64) -> Vec<f64> {
    dyadic_shifts(1.0).into_iter().filter(|&h| h >= 0.5 * tau).collect()
}

pub(super) fn projection_to_weak(opts: &VerifyOptions) -> Result<Sweep> {
    let levels: Vec<i32> = (3..=8).collect();
    let points = par::map_slice(&levels, |&l| -> Result<Point> {
        let tau = 0.5f64.powi(l);
        let n_coarse = 1usize << l;
        // Trial functions live on the halved mesh so that projection is not the identity.
        let n_fine = 2 * n_coarse;
        let norm = half_norm_00(n_fine)?;
        let fine_avg = averaging_matrix(n_fine);
        let p = DMatrix::from_fn(n_coarse, n_fine - 1, |k, i| 0.5 * (fine_avg[(2 * k, i)] + fine_avg[(2 * k + 1, i)]));
        let w = Whitener::new(&norm, "h_half")?;
        let mut best = 0.0f64;
        let mut cands = Vec::new();
        for h in weak_shifts(tau) {
            let a = p.transpose() * pc_shift_gram(n_coarse, tau, h) * &p;
            let (lam, x) = w.max(&a);
            best = best.max(lam);
            cands.push(x);
        }
        let mut rng = point_rng(opts, "P3.1", &[tau]);
        cands.extend(input_family(&mut rng, n_fine - 1, opts.samples));
        let mesh = uniform_partition(1.0, n_coarse)?;
        for x in &cands {
            let ubar = PiecewiseConstant::new(mesh.clone(), (&p * x).iter().copied().collect())?;
            let weak = h_half_weak_seminorm_pc(&ubar).powi(2);
            best = best.max(weak / x.dot(&(&norm * x)));
        }
        Ok(Point::new(&[("tau", tau)], 1.0 / tau, best.sqrt(), 1.0))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(Sweep::new(ClaimedLaw::Constant, "C", vec![points]))
}

pub(super) fn weak_embedding(opts: &VerifyOptions) -> Result<Sweep> {
    let eps: Vec<f64> = (0..6).map(|k| 0.1 * 0.5f64.powi(k)).collect();
    let n = 64;
    let tau = 1.0 / n as f64;
    let mesh = uniform_partition(1.0, n)?;
    let d = jump_matrix(n);
    let l2 = DMatrix::identity(n, n) * tau;
    let points = par::map_slice(&eps, |&e| -> Result<Point> {
        let c = besov_epsilon_constant(e);
        let k = DMatrix::from_fn(n + 1, n + 1, |i, j| {
            if i == j {
                0.0
            } else {
                -2.0 * c * ((i as f64 - j as f64).abs() * tau).powf(2.0 * e)
            }
        });
        let a = d.transpose() * k * &d;
        let mut cands: Vec<DVector<f64>> = Vec::new();
        for h in weak_shifts(tau) {
            let b = pc_shift_gram(n, tau, h) + &l2;
            cands.push(Whitener::new(&b, "weak")?.max(&a).1);
        }
        for i in (0..n).step_by(4) {
            for j in ((i + 4)..=n).step_by(4) {
                cands.push(DVector::from_fn(n, |k, _| if k >= i && k < j { 1.0 } else { 0.0 }));
            }
        }
        let mut rng = point_rng(opts, "P3.2", &[e]);
        cands.extend((0..opts.samples).map(|_| normal_vector(&mut rng, n)));
        let mut best = 0.0f64;
        for x in &cands {
            let u = PiecewiseConstant::new(mesh.clone(), x.iter().copied().collect())?;
            let den = h_half_weak_seminorm_pc(&u).powi(2) + u.l2_sq();
            if den > 0.0 {
                best = best.max(h_sobolev_pc_sq(&u, e) / den);
            }
        }
        Ok(Point::new(&[("epsilon", e), ("tau", tau)], 1.0 / e, best.sqrt(), e.powf(-0.5)))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(Sweep::new(ClaimedLaw::Growth, "C·ε^(-1/2)", vec![points]))
}

pub(super) fn smoothing_gain(_opts: &VerifyOptions) -> Result<Sweep> {
    let alphas: Vec<f64> = (2..=10).map(|k| 10f64.powf(-0.5 * k as f64)).collect();
    let freqs: Vec<f64> = (0..=56).map(|k| 10f64.powf(k as f64 / 8.0)).collect();
    let packets: Vec<WavePacket> = freqs.iter().map(|&f| WavePacket::at_frequency(f, 5.0)).collect();
    let mut groups = Vec::new();
    let mut sweep_checks = Vec::new();
    for eps in [0.1, 0.05] {
        let base: Vec<f64> = par::map_slice(&packets, |u| sobolev_seminorm_sq(u, 0.5 - eps) + u.energy(|_| 1.0));
        let points: Vec<Point> = par::map_slice(&alphas, |&a| {
            let best = packets
                .iter()
                .zip(&base)
                .map(|(u, b)| smoothed_h_half_sq(u, a) / b)
                .fold(0.0, f64::max);
            Point::new(&[("alpha", a), ("epsilon", eps)], 1.0 / a, best.sqrt(), a.powf(-eps))
        });
        let half = points.len() / 2;
        let lx: Vec<f64> = points[half..].iter().map(|p| p.x.ln()).collect();
        let ly: Vec<f64> = points[half..].iter().map(|p| p.measured.ln()).collect();
        let s = ls_slope(&lx, &ly);
        sweep_checks.push((eps, s));
        groups.push(points);
    }
    let mut sweep = Sweep::new(ClaimedLaw::Growth, "C·α^(-ε)", groups);
    for (eps, s) in sweep_checks {
        sweep = sweep
            .check(&format!("exponent_eps_{eps}"), s <= eps + 0.02)
            .note(format!("ε={eps}: log-log slope against 1/α is {s:.4}"));
    }
    Ok(sweep)
}

fn smoothing_sweep(opts: &VerifyOptions, tag: &str, energy_only: bool) -> Result<Vec<Point>> {
    let n = 32;
    let mesh = uniform_partition(1.0, n)?;
    let norm = half_norm_00(n)?;
    let w = Whitener::new(&norm, "h_half")?;
    let p = averaging_matrix(n);
    let alphas: Vec<f64> = (1..=14).map(|k| 10f64.powi(-k)).collect();
    par::map_slice(&alphas, |&a| -> Result<Point> {
        let g = smoothing_grams(&mesh, Kernel::new(a, 1.0)?);
        let target = if energy_only { g.alpha_energy } else { g.h_half + g.l2 };
        let q = p.transpose() * target * &p;
        let (mut best, _) = w.max(&q);
        let mut rng = point_rng(opts, tag, &[a]);
        for x in input_family(&mut rng, n - 1, opts.samples) {
            best = best.max(quotient(&q, &norm, &x));
        }
        Ok(Point::new(&[("alpha", a), ("tau", mesh.step)], 1.0 / a, best.sqrt(), a.ln().abs().sqrt()))
    })
    .into_iter()
    .collect()
}

pub(super) fn composed_smoothing(opts: &VerifyOptions) -> Result<Sweep> {
    Ok(Sweep::new(ClaimedLaw::Growth, "C·|log α|^(1/2)", vec![smoothing_sweep(opts, "C3.4", false)?]))
}

pub(super) fn smoothed_energy(opts: &VerifyOptions) -> Result<Sweep> {
    Ok(Sweep::new(ClaimedLaw::Growth, "C·|log α|^(1/2)", vec![smoothing_sweep(opts, "P3.5", true)?]))
}

/// Nodes of `[0, 1]` graded geometrically around `1/2`.
fn graded_nodes(h_min: f64, ratio: f64, h_max: f64) -> Vec<f64> {
    let mut right = Vec::new();
    let mut x = 0.5;
    let mut h = h_min;
    while x + h < 1.0 - 0.5 * h {
        x += h;
        right.push(x);
        h = (h * ratio).min(h_max);
    }
    let mut nodes: Vec<f64> = right.iter().rev().map(|r| 1.0 - r).collect();
    nodes.insert(0, 0.0);
    nodes.push(0.5);
    nodes.extend(right);
    nodes.push(1.0);
    nodes
}

/// P1 mass and stiffness over interior nodes of an arbitrary partition.
fn p1_mass_stiffness(nodes: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
    let nv = nodes.len();
    let mut m = DMatrix::zeros(nv, nv);
    let mut k = DMatrix::zeros(nv, nv);
    for c in 0..nv - 1 {
        let h = nodes[c + 1] - nodes[c];
        let lm = [[h / 3.0, h / 6.0], [h / 6.0, h / 3.0]];
        let lk = [[1.0 / h, -1.0 / h], [-1.0 / h, 1.0 / h]];
        for a in 0..2 {
            for b in 0..2 {
                m[(c + a, c + b)] += lm[a][b];
                k[(c + a, c + b)] += lk[a][b];
            }
        }
    }
    (restrict_interior(&m), restrict_interior(&k))
}

pub(super) fn sup_by_alpha_norm(_opts: &VerifyOptions) -> Result<Sweep> {
    let alphas: Vec<f64> = (1..=10).map(|k| 10f64.powi(-k)).collect();
    let points = par::map_slice(&alphas, |&a| -> Result<Point> {
        let nodes = graded_nodes(a / 4.0, 1.15, 1.0 / 32.0);
        let (m, k) = p1_mass_stiffness(&nodes);
        let n = hilbert_gram(&nodes) + m + k * a;
        let best = inverse_diagonal(&n, "alpha_half")?.into_iter().fold(0.0, f64::max);
        Ok(Point::new(
            &[("alpha", a), ("nodes", nodes.len() as f64)],
            1.0 / a,
            best.sqrt(),
            a.ln().abs().sqrt(),
        ))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(Sweep::new(ClaimedLaw::Growth, "C·|log α|^(1/2)", vec![points]))
}

pub(super) fn three_term_split(opts: &VerifyOptions) -> Result<Sweep> {
    let alphas: Vec<f64> = (1..=8).map(|k| 10f64.powi(-k)).collect();
    let mut groups = Vec::new();
    for n in [32usize, 128] {
        let mesh = uniform_partition(1.0, n)?;
        let tau = mesh.step;
        let q = h_half_00_gram(&mesh, Space::Affine).matrix;
        let (m, k) = mass_stiffness(&mesh, Space::Affine);
        let (m, k) = (restrict_interior(&m), restrict_interior(&k));
        let shifts: Vec<(f64, DMatrix<f64>)> = dyadic_shifts(1.0)
            .into_iter()
            .filter(|&h| h >= tau / 64.0)
            .map(|h| (h, shift_gram(n, tau, Peclet(0.0), 0.0, h)))
            .collect();
        let weak = |x: &DVector<f64>| shifts.iter().map(|(_, g)| x.dot(&(g * x))).fold(0.0, f64::max);
        let points = par::map_slice(&alphas, |&a| -> Result<Point> {
            let l = a.ln().abs();
            let base = &m + &k * a;
            let mut cands = Vec::new();
            for (_, g) in &shifts {
                let b = &base + g * l;
                cands.push(Whitener::new(&b, "split")?.max(&q).1);
            }
            let mut rng = point_rng(opts, "P3.9", &[a, tau]);
            cands.extend(input_family(&mut rng, n - 1, opts.samples));
            let best = cands
                .iter()
                .map(|x| x.dot(&(&q * x)) / (x.dot(&(&base * x)) + l * weak(x)))
                .fold(0.0, f64::max);
            Ok(Point::new(&[("alpha", a), ("tau", tau)], 1.0 / a, best.sqrt(), 1.0))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        groups.push(points);
    }
    Ok(Sweep::new(ClaimedLaw::Constant, "C", groups))
}
