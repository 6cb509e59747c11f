//! Solver experiments: Galerkin versus upwinded solutions, exact versus
//! approximate upwinding, and the H^{1/2}_00 growth of outflow layers.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::analysis::hilbert::hilbert_gram;
use crate::analysis::norms::alpha_norm;
use crate::assembly::{solve_convection_diffusion, total_variation, DiscreteSolution, Grid, Method, ProblemSpec};
use crate::error::{invalid, Result};
use crate::mesh::TensorMesh2D;
use crate::par;
use crate::quadrature::integrate_layer;
use crate::theory::fit::{ls_slope, r_squared};
use crate::upwind_basis::{approx_upwind_basis, basis_relative_error};

/// Upwinded and Galerkin solutions of one 2D problem, compared on the midline.
#[derive(Debug, Clone)]
pub struct Figure1 {
    pub upwinded: DiscreteSolution,
    pub galerkin: DiscreteSolution,
    pub peclet: f64,
    /// Transverse grid line used for the profiles.
    pub midline: usize,
    pub tv_upwinded: f64,
    pub tv_galerkin: f64,
    /// `max(0, −min u)` over the upwinded solution.
    pub undershoot: f64,
}

impl Figure1 {
    pub fn contrast(&self) -> f64 {
        self.tv_galerkin / self.tv_upwinded
    }
}

/// Solves the unit-square problem with `n × n` cells by both methods.
pub fn figure1(spec: &ProblemSpec, n: usize) -> Result<Figure1> {
    if spec.dim != 2 {
        return Err(invalid("figure1 is a 2D experiment"));
    }
    let mesh = TensorMesh2D::uniform(spec.extent_t, spec.extent_v, n, n)?;
    let grid = Grid::TwoD(mesh.clone());
    let (up, gal) = rayon_pair(
        || solve_convection_diffusion(spec, &grid, Method::PgExact),
        || solve_convection_diffusion(spec, &grid, Method::Galerkin),
    );
    let (upwinded, galerkin) = (up?, gal?);
    let midline = n / 2;
    let tv_upwinded = total_variation(&upwinded.line(midline));
    let tv_galerkin = total_variation(&galerkin.line(midline));
    let undershoot = upwinded.values.iter().fold(0.0f64, |m, &v| m.max(-v)) + 0.0;
    Ok(Figure1 {
        peclet: spec.beta * mesh.flow.step / spec.alpha,
        upwinded,
        galerkin,
        midline,
        tv_upwinded,
        tv_galerkin,
        undershoot,
    })
}

fn rayon_pair<A: Send, B: Send>(a: impl FnOnce() -> A + Send, b: impl FnOnce() -> B + Send) -> (A, B) {
    #[cfg(feature = "parallel")]
    {
        rayon::join(a, b)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (a(), b())
    }
}

/// Relative α-norm distance between exact and approximate upwinding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Figure2Point {
    pub alpha: f64,
    pub sigma: f64,
    pub rel_distance: f64,
}

/// `‖u_exact − u_approx‖_α / ‖u_exact‖_α` on the unit square with `f = 1`.
pub fn upwinding_distance(alpha: f64, beta: f64, n: usize, level: usize) -> Result<Figure2Point> {
    let spec = ProblemSpec::two_d(alpha, beta, 0.0, 1.0, 1.0, 1.0);
    let mesh = TensorMesh2D::uniform(1.0, 1.0, n, n)?;
    let grid = Grid::TwoD(mesh.clone());
    let exact = solve_convection_diffusion(&spec, &grid, Method::PgExact)?;
    let approx = solve_convection_diffusion(&spec, &grid, Method::PgApprox(level))?;
    let diff: Vec<f64> = exact.values.iter().zip(&approx.values).map(|(a, b)| a - b).collect();
    let num = alpha_norm(&mesh, &diff, alpha)?;
    let den = alpha_norm(&mesh, &exact.values, alpha)?;
    Ok(Figure2Point {
        alpha,
        sigma: mesh.transverse.step,
        rel_distance: num / den,
    })
}

/// `n` points log-uniform between `lo` and `hi`, inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..n).map(|k| 10f64.powf(a + (b - a) * k as f64 / (n - 1) as f64)).collect()
}

/// Sweep over `alphas × cells`, in row-major order (α outer).
pub fn figure2(alphas: &[f64], cells: &[usize], beta: f64, level: usize) -> Result<Vec<Figure2Point>> {
    let grid: Vec<(f64, usize)> = alphas.iter().flat_map(|&a| cells.iter().map(move |&n| (a, n))).collect();
    par::map_slice(&grid, |&(a, n)| upwinding_distance(a, beta, n, level))
        .into_iter()
        .collect()
}

/// Relative α-norm error of the approximate test function of the central
/// vertex of the unit square with `n × n` cells.
pub fn basis_distance(alpha: f64, beta: f64, n: usize, level: usize) -> Result<Figure2Point> {
    let mesh = TensorMesh2D::uniform(1.0, 1.0, n, n)?;
    let centre = mesh.vertex_index(n / 2, n / 2);
    let pieces = approx_upwind_basis(&mesh, centre, alpha, beta, level)?;
    Ok(Figure2Point {
        alpha,
        sigma: mesh.transverse.step,
        rel_distance: basis_relative_error(&pieces),
    })
}

/// Basis-error counterpart of [`figure2`], same ordering.
pub fn basis_sweep(alphas: &[f64], cells: &[usize], beta: f64, level: usize) -> Result<Vec<Figure2Point>> {
    let grid: Vec<(f64, usize)> = alphas.iter().flat_map(|&a| cells.iter().map(move |&n| (a, n))).collect();
    par::map_slice(&grid, |&(a, n)| basis_distance(a, beta, n, level))
        .into_iter()
        .collect()
}

/// Location of the maximal distance for every `σ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ridge {
    /// `(σ, α*)`, with `α*` refined by a parabola in `log α`.
    pub argmax: Vec<(f64, f64)>,
    /// Geometric mean of `α*/σ`.
    pub c: f64,
    /// Free log-log slope of `α*` against `σ`.
    pub slope: f64,
}

pub fn ridge(points: &[Figure2Point]) -> Ridge {
    let mut sigmas: Vec<f64> = points.iter().map(|p| p.sigma).collect();
    sigmas.sort_by(|a, b| b.total_cmp(a));
    sigmas.dedup();
    let mut argmax = Vec::new();
    for &s in &sigmas {
        let mut row: Vec<&Figure2Point> = points.iter().filter(|p| p.sigma == s).collect();
        row.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));
        let k = (0..row.len())
            .max_by(|&i, &j| row[i].rel_distance.total_cmp(&row[j].rel_distance))
            .unwrap();
        let mut best = row[k].alpha.ln();
        if k > 0 && k + 1 < row.len() {
            let (x0, x1, x2) = (row[k - 1].alpha.ln(), best, row[k + 1].alpha.ln());
            let (y0, y1, y2) = (row[k - 1].rel_distance, row[k].rel_distance, row[k + 1].rel_distance);
            let den = (x0 - x1) * (x0 - x2) * (x1 - x2);
            let a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / den;
            let b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / den;
            if a < 0.0 {
                best = (-b / (2.0 * a)).clamp(x0, x2);
            }
        }
        argmax.push((s, best.exp()));
    }
    let logs: Vec<f64> = argmax.iter().map(|(s, a)| (a / s).ln()).collect();
    let c = (logs.iter().sum::<f64>() / logs.len() as f64).exp();
    let lx: Vec<f64> = argmax.iter().map(|(s, _)| s.ln()).collect();
    let ly: Vec<f64> = argmax.iter().map(|(_, a)| a.ln()).collect();
    Ridge {
        slope: ls_slope(&lx, &ly),
        argmax,
        c,
    }
}

/// `∫_0^T |u_α|²/(T − t)` and the H^{1/2}_00 norm of an outflow layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryLayerPoint {
    pub alpha: f64,
    pub integral: f64,
    pub h12_00_norm: f64,
}

/// `u_α(t) = 1 − e^{β(t−T)/α}`.
pub fn outflow_layer(alpha: f64, beta: f64, t_end: f64, t: f64) -> f64 {
    -(beta * (t - t_end) / alpha).exp_m1()
}

/// Nodes of `[0, T]`, uniform with step `h_max` and graded geometrically
/// (ratio 1.1) down to `h_min` at `T`.
fn outflow_nodes(t_end: f64, h_min: f64, h_max: f64) -> Vec<f64> {
    let mut from_end = vec![0.0];
    let mut h = h_min;
    let mut d = 0.0;
    while d + h < t_end - 0.5 * h {
        d += h;
        from_end.push(d);
        h = (h * 1.1).min(h_max);
    }
    from_end.push(t_end);
    from_end.iter().rev().map(|d| t_end - d).collect()
}

/// P1 mass over the interior nodes of an arbitrary partition.
fn interior_mass(nodes: &[f64]) -> DMatrix<f64> {
    let m = nodes.len() - 2;
    let mut g = DMatrix::zeros(m, m);
    for c in 0..nodes.len() - 1 {
        let h = nodes[c + 1] - nodes[c];
        for (a, b, v) in [(c, c, h / 3.0), (c + 1, c + 1, h / 3.0), (c, c + 1, h / 6.0), (c + 1, c, h / 6.0)] {
            if a >= 1 && b >= 1 && a <= m && b <= m {
                g[(a - 1, b - 1)] += v;
            }
        }
    }
    g
}

pub fn boundary_layer_point(alpha: f64, beta: f64, t_end: f64) -> Result<BoundaryLayerPoint> {
    if !(alpha > 0.0 && beta > 0.0 && t_end > 0.0) {
        return Err(invalid("the boundary layer needs alpha, beta, T > 0"));
    }
    let width = alpha / beta;
    let integral = integrate_layer(0.0, t_end, width, |t| {
        outflow_layer(alpha, beta, t_end, t).powi(2) / (t_end - t)
    });
    // t/T · u_α vanishes at both ends; its H^{1/2}_00 norm carries the layer.
    let nodes = outflow_nodes(t_end, width / 16.0, t_end / 64.0);
    let values: Vec<f64> = nodes[1..nodes.len() - 1]
        .iter()
        .map(|&t| t / t_end * outflow_layer(alpha, beta, t_end, t))
        .collect();
    let u = DVector::from_vec(values);
    let g = hilbert_gram(&nodes) + interior_mass(&nodes);
    Ok(BoundaryLayerPoint {
        alpha,
        integral,
        h12_00_norm: u.dot(&(&g * &u)).sqrt(),
    })
}

/// Least-squares fit `integral ≈ a + b|log α|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogFit {
    pub a: f64,
    pub b: f64,
    pub r_squared: f64,
}

pub fn boundary_layer(alphas: &[f64], beta: f64, t_end: f64) -> Result<(Vec<BoundaryLayerPoint>, LogFit)> {
    let pts: Vec<BoundaryLayerPoint> = par::map_slice(alphas, |&a| boundary_layer_point(a, beta, t_end))
        .into_iter()
        .collect::<Result<_>>()?;
    let x: Vec<f64> = pts.iter().map(|p| p.alpha.ln().abs()).collect();
    let y: Vec<f64> = pts.iter().map(|p| p.integral).collect();
    let b = ls_slope(&x, &y);
    let n = x.len() as f64;
    let a = (y.iter().sum::<f64>() - b * x.iter().sum::<f64>()) / n;
    Ok((
        pts,
        LogFit {
            a,
            b,
            r_squared: r_squared(&x, &y),
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_error_grows_from_the_diffusive_floor() {
        let pts = basis_sweep(&[1e2, 1e-6], &[10, 20], 1.0, 0).unwrap();
        // P1 triangles cannot carry the bilinear twist, whatever the cell size.
        assert!((pts[0].rel_distance - pts[1].rel_distance).abs() < 1e-3, "{pts:?}");
        assert!(pts[2].rel_distance > pts[0].rel_distance + 0.3, "{pts:?}");
    }
}
