//! Batches of randomized comparisons between the library and the oracles.
//!
//! Each batch draws its instances from a seeded stream and reports the worst
//! error against the tolerance of that operation.

use cdlab_core::analysis::convolution::{convolve_g_alpha, Kernel};
use cdlab_core::analysis::functions::PiecewiseConstant;
use cdlab_core::analysis::gram::{
    alpha_energy_gram, h_half_00_gram, h_half_left_zero_gram, h_half_seminorm_gram, l2_gram,
    theorem_norm_gram_1d, theorem_norm_gram_2d, NormGram, NormTag, Side, Space,
};
use cdlab_core::analysis::hilbert::{hilbert_gram, HilbertTransform};
use cdlab_core::analysis::infsup::inf_sup_constant;
use cdlab_core::elements::{element_matrices, upwind_gram, Peclet};
use cdlab_core::mesh::{uniform_partition, TensorMesh2D};
use cdlab_core::theory::pairing::pairing_matrix_1d;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

pub const INSTANCES: usize = 50;

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn values(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn with_ends(interior: &[f64]) -> Vec<f64> {
    let mut v = vec![0.0];
    v.extend_from_slice(interior);
    v.push(0.0);
    v
}

/// Closed-form element matrices against quadrature, `(α, β, τ) ∈ [10⁻⁶, 1]³`.
///
/// Entries of `conv = α·stiff + β·adv` cancel exactly when the shapes are
/// fitted, so their error is measured against `α|stiff| + β|adv|`.
pub fn element_matrices_vs_quadrature(seed: u64) -> Agreement {
    let mut r = rng(seed, 1);
    let mut agg = Agreement::new(1e-10);
    for _ in 0..INSTANCES {
        let (alpha, beta, tau) = (
            log_uniform(&mut r, 1e-6, 1.0),
            log_uniform(&mut r, 1e-6, 1.0),
            log_uniform(&mut r, 1e-6, 1.0),
        );
        let lm = element_matrices(alpha, beta, 0.0, tau);
        let o = element_oracle(alpha, beta, tau);
        let (tm, ts) = upwind_gram(Peclet::new(alpha, beta, tau), tau);
        for a in 0..2 {
            let case = |what: &'static str| move || format!("{what}[{a}] alpha={alpha:.3e} beta={beta:.3e} tau={tau:.3e}");
            agg.record(rel_err(lm.load[a], o.load[a]), case("load"));
            for b in 0..2 {
                let case = |what: &'static str| move || format!("{what}[{a}][{b}] alpha={alpha:.3e} beta={beta:.3e} tau={tau:.3e}");
                agg.record(rel_err(lm.mass[a][b], o.mass[a][b]), case("mass"));
                agg.record(rel_err(lm.stiff[a][b], o.stiff[a][b]), case("stiff"));
                agg.record(rel_err(lm.adv[a][b], o.adv[a][b]), case("adv"));
                agg.record(rel_err(tm[a][b], o.test_mass[a][b]), case("test mass"));
                agg.record(rel_err(ts[a][b], o.test_stiff[a][b]), case("test stiffness"));
                let scale = alpha * o.stiff[a][b].abs() + beta * o.adv[a][b].abs();
                agg.record((lm.conv[a][b] - o.conv[a][b]).abs() / scale, case("conv"));
            }
        }
        agg.instance();
    }
    agg
}

/// `vᵀBu` of the 1D pairing against quadrature of `∫ αu̇v̇ + βu̇v + γuv`.
pub fn pairing_vs_quadrature(seed: u64) -> Agreement {
    let mut r = rng(seed, 2);
    let mut agg = Agreement::new(1e-10);
    for _ in 0..INSTANCES {
        let n = 4;
        let t_end = r.random_range(0.5..2.0);
        let alpha = log_uniform(&mut r, 1e-4, 1.0);
        let beta = r.random_range(0.1..2.0);
        let gamma = r.random_range(0.0..2.0);
        let mesh = uniform_partition(t_end, n).unwrap();
        let b = pairing_matrix_1d(&mesh, alpha, beta, gamma);
        let (ui, vi) = (values(&mut r, n - 1), values(&mut r, n - 1));
        let u = Affine {
            nodes: mesh.vertices.clone(),
            values: with_ends(&ui),
        };
        let v = Upwind::new(t_end, with_ends(&vi), alpha, beta);
        let lib = DVector::from_vec(vi).dot(&(&b * DVector::from_vec(ui)));
        let form = |x: f64| alpha * u.slope(x) * v.slope(x) + beta * u.slope(x) * v.eval(x) + gamma * u.eval(x) * v.eval(x);
        let size = |x: f64| {
            (alpha * u.slope(x) * v.slope(x)).abs()
                + (beta * u.slope(x) * v.eval(x)).abs()
                + (gamma * u.eval(x) * v.eval(x)).abs()
        };
        let bp = layered_breaks(&mesh.vertices, alpha / beta);
        let exact = integrate(&form, &bp, 0.0, t_end, 1e-14);
        let scale = integrate(&size, &bp, 0.0, t_end, 1e-8);
        agg.record((lib - exact).abs() / scale, || format!("alpha={alpha:.3e} beta={beta:.3} gamma={gamma:.3}"));
        agg.instance();
    }
    agg
}

/// Vertices plus geometric breaks following the layer after each of them.
fn layered_breaks(nodes: &[f64], width: f64) -> Vec<f64> {
    nodes
        .windows(2)
        .flat_map(|w| geometric_breaks(w[0], w[1], width))
        .chain(nodes.last().copied())
        .collect()
}

fn uniform_nodes(t_end: f64, n: usize) -> Vec<f64> {
    uniform_partition(t_end, n).unwrap().vertices
}

/// Interval Slobodetski Grams, affine and upwinded, over all vertices.
pub fn interval_grams(seed: u64) -> Agreement {
    let mut r = rng(seed, 3);
    let mut agg = Agreement::new(1e-6);
    for k in 0..INSTANCES {
        let n = r.random_range(2..7);
        let t_end = r.random_range(0.5..2.0);
        let mesh = uniform_partition(t_end, n).unwrap();
        let vals = values(&mut r, n + 1);
        let (lib, oracle) = if k % 2 == 0 {
            let u = Affine {
                nodes: mesh.vertices.clone(),
                values: vals.clone(),
            };
            let g = h_half_seminorm_gram(&mesh, Space::Affine);
            (g.quad(&vals), interval_seminorm(&|x| u.eval(x), &mesh.vertices, 0.0, t_end, 1e-8))
        } else {
            let alpha = log_uniform(&mut r, 1e-3, 1.0);
            let beta = r.random_range(0.5..2.0);
            let v = Upwind::new(t_end, vals.clone(), alpha, beta);
            let g = h_half_seminorm_gram(&mesh, Space::Upwind { alpha, beta });
            let bp = layered_breaks(&mesh.vertices, alpha / beta);
            (g.quad(&vals), interval_seminorm(&|x| v.eval(x), &bp, 0.0, t_end, 1e-8))
        };
        agg.record(rel_err(lib, oracle), || format!("instance {k}, n={n}"));
        agg.instance();
    }
    agg
}

/// Zero-extension Grams: uniform `H^{1/2}_00`, one-sided, and graded Hilbert.
pub fn zero_extension_grams(seed: u64) -> Agreement {
    let mut r = rng(seed, 4);
    let mut agg = Agreement::new(1e-6);
    for k in 0..INSTANCES {
        let n = r.random_range(2..7);
        let t_end = r.random_range(0.5..2.0);
        let (lib, oracle) = match k % 3 {
            0 => {
                let mesh = uniform_partition(t_end, n).unwrap();
                let vi = values(&mut r, n - 1);
                let u = Affine {
                    nodes: mesh.vertices.clone(),
                    values: with_ends(&vi),
                };
                let g = h_half_00_gram(&mesh, Space::Affine);
                (g.quad(&vi), zero_extension_seminorm(&|x| u.eval(x), &mesh.vertices, t_end, 1e-8))
            }
            1 => {
                let mesh = uniform_partition(t_end, n).unwrap();
                let vi = values(&mut r, n);
                let mut all = vec![0.0];
                all.extend_from_slice(&vi);
                let u = Affine {
                    nodes: mesh.vertices.clone(),
                    values: all,
                };
                let g = h_half_left_zero_gram(&mesh, Space::Affine);
                (g.quad(&vi), left_zero_seminorm(&|x| u.eval(x), &mesh.vertices, t_end, 1e-8))
            }
            _ => {
                let nodes = random_nodes(&mut r, n, t_end);
                let vi = values(&mut r, n - 1);
                let u = Affine {
                    nodes: nodes.clone(),
                    values: with_ends(&vi),
                };
                let g = NormGram::new(NormTag::HHalf00, hilbert_gram(&nodes));
                (g.quad(&vi), zero_extension_seminorm(&|x| u.eval(x), &nodes, t_end, 1e-8))
            }
        };
        agg.record(rel_err(lib, oracle), || format!("instance {k} (kind {}), n={n}", k % 3));
        agg.instance();
    }
    agg
}

/// `L²` and `α`-energy Grams of both spaces against `∫u² + α∫u̇²`.
pub fn energy_grams(seed: u64) -> Agreement {
    let mut r = rng(seed, 5);
    let mut agg = Agreement::new(1e-6);
    for k in 0..INSTANCES {
        let n = r.random_range(2..10);
        let t_end = r.random_range(0.5..2.0);
        let mesh = uniform_partition(t_end, n).unwrap();
        let vals = values(&mut r, n + 1);
        let alpha = log_uniform(&mut r, 1e-5, 1.0);
        let beta = r.random_range(0.5..2.0);
        let (space, f, df): (Space, Box<dyn Fn(f64) -> f64>, Box<dyn Fn(f64) -> f64>) = if k % 2 == 0 {
            let u = Affine {
                nodes: mesh.vertices.clone(),
                values: vals.clone(),
            };
            let u2 = u.clone();
            (Space::Affine, Box::new(move |x| u.eval(x)), Box::new(move |x| u2.slope(x)))
        } else {
            let v = Upwind::new(t_end, vals.clone(), alpha, beta);
            let v2 = v.clone();
            (
                Space::Upwind { alpha, beta },
                Box::new(move |x| v.eval(x)),
                Box::new(move |x| v2.slope(x)),
            )
        };
        let bp = layered_breaks(&mesh.vertices, alpha / beta);
        let l2 = integrate(&|x| f(x).powi(2), &bp, 0.0, t_end, 1e-12);
        let h1 = integrate(&|x| df(x).powi(2), &bp, 0.0, t_end, 1e-12);
        agg.record(rel_err(l2_gram(&mesh, space).quad(&vals), l2), || format!("l2 {space:?} n={n}"));
        agg.record(
            rel_err(alpha_energy_gram(&mesh, space, alpha).quad(&vals), l2 + alpha * h1),
            || format!("energy {space:?} n={n}"),
        );
        agg.instance();
    }
    agg
}

/// Trial (`H^{1/2}_00`, affine) and test (interval, upwinded) theorem norms,
/// 1D and tensorized 2D.
pub fn theorem_grams(seed: u64) -> Agreement {
    let mut r = rng(seed, 6);
    let mut agg = Agreement::new(1e-6);
    for k in 0..INSTANCES {
        let side = if k % 2 == 0 { Side::Trial } else { Side::Test };
        let alpha = log_uniform(&mut r, 1e-3, 1.0);
        let beta = r.random_range(0.5..2.0);
        let t_end = r.random_range(0.5..2.0);
        let two_d = k % 4 >= 2;
        let nf = r.random_range(2..5);
        let flow_nodes = uniform_nodes(t_end, nf);
        // Squared flow norm of a flow-direction nodal vector (interior values).
        let flow_sq = |vi: &[f64]| -> f64 {
            let vals = with_ends(vi);
            match side {
                Side::Trial => {
                    let u = Affine {
                        nodes: flow_nodes.clone(),
                        values: vals,
                    };
                    let semi = zero_extension_seminorm(&|x| u.eval(x), &flow_nodes, t_end, 1e-8);
                    let l2 = integrate(&|x| u.eval(x).powi(2), &flow_nodes, 0.0, t_end, 1e-12);
                    let h1 = integrate(&|x| u.slope(x).powi(2), &flow_nodes, 0.0, t_end, 1e-12);
                    semi + l2 + alpha * h1
                }
                Side::Test => {
                    let v = Upwind::new(t_end, vals, alpha, beta);
                    let bp = layered_breaks(&flow_nodes, alpha / beta);
                    let semi = interval_seminorm(&|x| v.eval(x), &bp, 0.0, t_end, 1e-8);
                    let l2 = integrate(&|x| v.eval(x).powi(2), &bp, 0.0, t_end, 1e-12);
                    let h1 = integrate(&|x| v.slope(x).powi(2), &bp, 0.0, t_end, 1e-12);
                    semi + l2 + alpha * h1
                }
            }
        };
        let flow_l2 = |vi: &[f64]| -> f64 {
            let vals = with_ends(vi);
            match side {
                Side::Trial => {
                    let u = Affine {
                        nodes: flow_nodes.clone(),
                        values: vals,
                    };
                    integrate(&|x| u.eval(x).powi(2), &flow_nodes, 0.0, t_end, 1e-12)
                }
                Side::Test => {
                    let v = Upwind::new(t_end, vals, alpha, beta);
                    let bp = layered_breaks(&flow_nodes, alpha / beta);
                    integrate(&|x| v.eval(x).powi(2), &bp, 0.0, t_end, 1e-12)
                }
            }
        };
        if !two_d {
            let mesh = uniform_partition(t_end, nf).unwrap();
            let vi = values(&mut r, nf - 1);
            let lib = theorem_norm_gram_1d(&mesh, alpha, beta, side).quad(&vi);
            agg.record(rel_err(lib, flow_sq(&vi)), || format!("1D {side:?} alpha={alpha:.3e} n={nf}"));
        } else {
            let nt = r.random_range(2..4);
            let extent_v = r.random_range(0.5..2.0);
            let mesh = TensorMesh2D::uniform(t_end, extent_v, nf, nt).unwrap();
            let (fi, ti) = (nf - 1, nt - 1);
            let c = values(&mut r, fi * ti);
            // Flow slice at transverse interior node j (1-based), flow index fastest.
            let slice = |j: usize| -> Vec<f64> {
                if j == 0 || j == nt {
                    vec![0.0; fi]
                } else {
                    c[(j - 1) * fi..j * fi].to_vec()
                }
            };
            let sigma = extent_v / nt as f64;
            // Three-point Gauss is exact for the quadratic y-dependence on each cell.
            let gauss = [(-0.774_596_669_241_483_4, 5.0 / 9.0), (0.0, 8.0 / 9.0), (0.774_596_669_241_483_4, 5.0 / 9.0)];
            let mut oracle = 0.0;
            for cell in 0..nt {
                let (lo, hi) = (slice(cell), slice(cell + 1));
                for &(xi, w) in &gauss {
                    let s = 0.5 * (1.0 + xi);
                    let mix: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| a * (1.0 - s) + b * s).collect();
                    oracle += 0.5 * w * sigma * flow_sq(&mix);
                }
                let diff: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| (b - a) / sigma).collect();
                oracle += alpha * sigma * flow_l2(&diff);
            }
            let lib = theorem_norm_gram_2d(&mesh, alpha, beta, side).quad(&c);
            agg.record(rel_err(lib, oracle), || format!("2D {side:?} alpha={alpha:.3e} {nf}x{nt}"));
        }
        agg.instance();
    }
    agg
}

/// Hilbert transform values against principal-value quadrature at 100
/// off-node points, for single hats and random hat combinations on graded nodes.
pub fn hilbert_values(seed: u64) -> Agreement {
    let mut r = rng(seed, 7);
    let mut agg = Agreement::new(1e-8);
    for k in 0..INSTANCES {
        let n = r.random_range(2..9);
        let t_end = r.random_range(0.5..2.0);
        let nodes = random_nodes(&mut r, n, t_end);
        let interior = if k % 2 == 0 {
            let mut v = vec![0.0; n - 1];
            v[r.random_range(0..n - 1)] = 1.0;
            v
        } else {
            values(&mut r, n - 1)
        };
        let vals = with_ends(&interior);
        let u = Affine {
            nodes: nodes.clone(),
            values: vals.clone(),
        };
        let h = HilbertTransform::new(&nodes, &vals);
        let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut taken = 0;
        while taken < 100 {
            let x = r.random_range(-0.5 * t_end..1.5 * t_end);
            if nodes.iter().any(|&t| (x - t).abs() < 1e-6 * t_end) {
                continue;
            }
            let oracle = hilbert_pv(&|y| u.eval(y), &nodes, 0.0, t_end, x, 1e-13);
            agg.record((h.eval(x) - oracle).abs() / scale, || format!("instance {k}, x={x:.6}"));
            taken += 1;
        }
        agg.instance();
    }
    agg
}

/// `G_α ∗ u` for piecewise constant `u` against direct quadrature of the
/// convolution integral, at random points before, inside and after `[0, T]`.
pub fn convolution_values(seed: u64) -> Agreement {
    let mut r = rng(seed, 8);
    let mut agg = Agreement::new(1e-10);
    for _ in 0..INSTANCES {
        let n = r.random_range(2..13);
        let t_end = r.random_range(0.5..2.0);
        let alpha = log_uniform(&mut r, 1e-4, 1.0);
        let beta = r.random_range(0.5..2.0);
        let mesh = uniform_partition(t_end, n).unwrap();
        let vals = values(&mut r, n);
        let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let pc = PiecewiseConstant::new(mesh.clone(), vals.clone()).unwrap();
        let v = convolve_g_alpha(&pc, Kernel::new(alpha, beta).unwrap());
        let step = mesh.step;
        let u = move |s: f64| {
            if !(0.0..t_end).contains(&s) {
                return 0.0;
            }
            vals[((s / step) as usize).min(n - 1)]
        };
        let mut points: Vec<f64> = (0..40).map(|_| r.random_range(-0.1 * t_end..1.5 * t_end)).collect();
        points.extend(mesh.vertices.iter().copied());
        for t in points {
            let oracle = g_alpha_convolution(&u, &mesh.vertices, t_end, alpha, beta, t);
            agg.record((v.eval(t) - oracle).abs() / scale, || format!("alpha={alpha:.3e} beta={beta:.3} t={t:.6}"));
        }
        agg.instance();
    }
    agg
}

/// Generalized-SVD inf-sup constants on random 8×8 instances against
/// random-direction minimization over `10⁵` trial vectors.
pub fn inf_sup_vs_random_search(seed: u64) -> Agreement {
    let mut r = rng(seed, 9);
    let mut agg = Agreement::new(1e-2);
    for _ in 0..INSTANCES {
        let n = 8;
        let b = DMatrix::from_fn(n, n, |i, j| r.random_range(-1.0..1.0) + if i == j { 3.0 } else { 0.0 });
        let nx = random_spd(n, 0.5, &mut r);
        let ny = random_spd(n, 0.5, &mut r);
        let lib = inf_sup_constant(
            &b,
            &NormGram::new(NormTag::TheoremTrial, nx.clone()),
            &NormGram::new(NormTag::TheoremTest, ny.clone()),
        )
        .unwrap();
        let brute = brute_force_inf_sup(&b, &nx, &ny, 20_000, 80_000, &mut r);
        // The search can only overshoot the infimum.
        let err = if brute < lib * (1.0 - 1e-9) { f64::INFINITY } else { rel_err(brute, lib) };
        agg.record(err, || format!("svd {lib:.6} vs search {brute:.6}"));
        agg.instance();
    }
    agg
}

/// Every batch, in a fixed order, with its label.
pub fn all(seed: u64) -> Vec<(&'static str, Agreement)> {
    vec![
        ("element matrices", element_matrices_vs_quadrature(seed)),
        ("1D pairing", pairing_vs_quadrature(seed)),
        ("interval grams", interval_grams(seed)),
        ("zero-extension grams", zero_extension_grams(seed)),
        ("energy grams", energy_grams(seed)),
        ("theorem grams", theorem_grams(seed)),
        ("hilbert values", hilbert_values(seed)),
        ("G_alpha convolution", convolution_values(seed)),
        ("inf-sup", inf_sup_vs_random_search(seed)),
    ]
}
