//! Approximate upwinding on a Péclet-weighted barycentric subgrid.
//!
//! Test functions are extended from vertex data to edges and then to faces by
//! P1 solves of `div(exp(β·x/α) grad v) = 0` on a refined subgrid of each cell.
//! All cells of a uniform grid share one subgrid, so the four local corner
//! functions are computed once and reused.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::elements::{upwind_shape, upwind_shape_slope, Node, Peclet};
use crate::error::{invalid, Error, Result};
use crate::mesh::TensorMesh2D;
use crate::quadrature::{graded_rule, GaussRule};
use crate::special::exp_moment;

/// Local coordinate of the added point on a flow edge with Péclet number `p`.
///
/// It is where the exact right upwind shape equals 1/2, clamped to
/// `[0.1, 0.9]`; for large `p` it sits at a tenth of the cell from the upwind end.
pub fn peclet_point(p: f64) -> f64 {
    let s = if p < 1e-8 {
        0.5 - p / 8.0
    } else {
        -(0.5 * (1.0 + (-p).exp())).ln() / p
    };
    s.clamp(0.1, 0.9)
}

/// Refined 1D subgrid of an edge together with the discrete upwinded
/// function equal to 1 at the upwind end and 0 at the downwind end.
#[derive(Debug, Clone)]
pub struct EdgeChain {
    pub length: f64,
    /// Subgrid node positions along the edge, increasing, from 0 to `length`.
    pub nodes: Vec<f64>,
    /// Values of the upwind-end function at the nodes.
    pub left_values: Vec<f64>,
}

impl EdgeChain {
    /// Value at `x` of the interpolated upwind-end function.
    pub fn left(&self, x: f64) -> f64 {
        let k = match self.nodes.iter().position(|&n| n >= x) {
            Some(0) => return self.left_values[0],
            Some(k) => k,
            None => return *self.left_values.last().unwrap(),
        };
        let (a, b) = (self.nodes[k - 1], self.nodes[k]);
        let s = (x - a) / (b - a);
        self.left_values[k - 1] * (1.0 - s) + self.left_values[k] * s
    }
}

/// Logarithm of `∫_a^b exp(k(x − xref)) ℓ(x) dx` for a nonnegative affine `ℓ`
/// with end values `l0`, `l1`, assuming `k >= 0` and `b <= xref`.
fn log_weighted_linear(k: f64, a: f64, b: f64, l0: f64, l1: f64, xref: f64) -> f64 {
    let h = b - a;
    if h <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let p = k * h;
    let m = l1 * (exp_moment(0, p) - exp_moment(1, p)) + l0 * exp_moment(1, p);
    if m <= 0.0 {
        return f64::NEG_INFINITY;
    }
    h.ln() + k * (b - xref) + m.ln()
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Discrete upwind-end function on a chain with the given node positions and
/// convection-to-diffusion ratio `k = β_T/α`.
fn chain_solve(nodes: &[f64], k: f64) -> Vec<f64> {
    let len = *nodes.last().unwrap();
    // Each piece is a resistor 1/W_i with W_i = ∫ w / h_i².
    let log_r: Vec<f64> = nodes
        .windows(2)
        .map(|w| {
            let h = w[1] - w[0];
            -(log_weighted_linear(k, w[0], w[1], 1.0, 1.0, len) - 2.0 * h.ln())
        })
        .collect();
    let total = log_sum_exp(&log_r);
    let mut out = Vec::with_capacity(nodes.len());
    out.push(1.0);
    for m in 1..nodes.len() {
        let partial = log_sum_exp(&log_r[..m]);
        out.push(1.0 - (partial - total).exp());
    }
    *out.last_mut().unwrap() = 0.0;
    out
}

/// Subgrid of an edge of length `length` with tangential convection `beta_t`.
pub fn peclet_barycentric_refine_edge(length: f64, alpha: f64, beta_t: f64, level: usize) -> EdgeChain {
    let p = beta_t * length / alpha;
    let s = if beta_t == 0.0 { 0.5 } else { peclet_point(p) };
    let mut nodes = vec![0.0, s * length, length];
    for _ in 0..level {
        let mut next = Vec::with_capacity(2 * nodes.len() - 1);
        for w in nodes.windows(2) {
            next.push(w[0]);
            next.push(0.5 * (w[0] + w[1]));
        }
        next.push(length);
        nodes = next;
    }
    let left_values = chain_solve(&nodes, beta_t / alpha);
    EdgeChain {
        length,
        nodes,
        left_values,
    }
}

/// Triangulated subgrid of the cell `[0, τ] × [0, σ]`.
#[derive(Debug, Clone)]
pub struct FaceSkeleton {
    pub tau: f64,
    pub sigma: f64,
    pub level: usize,
    pub nodes: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
}

impl FaceSkeleton {
    pub fn is_boundary(&self, i: usize) -> bool {
        let [x, y] = self.nodes[i];
        let tx = 1e-12 * self.tau;
        let ty = 1e-12 * self.sigma;
        x.abs() < tx || (x - self.tau).abs() < tx || y.abs() < ty || (y - self.sigma).abs() < ty
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|i| self.nodes[i]);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])).abs()
    }

    /// Gradients of the three barycentric coordinates of triangle `t`.
    pub fn gradients(&self, t: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.triangles[t].map(|i| self.nodes[i]);
        let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
        [
            [(b[1] - c[1]) / det, (c[0] - b[0]) / det],
            [(c[1] - a[1]) / det, (a[0] - c[0]) / det],
            [(a[1] - b[1]) / det, (b[0] - a[0]) / det],
        ]
    }

    /// Barycentric coordinates of `(x, y)` in triangle `t`.
    pub fn barycentric(&self, t: usize, x: f64, y: f64) -> [f64; 3] {
        let [a, b, c] = self.triangles[t].map(|i| self.nodes[i]);
        let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
        let l1 = ((x - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (y - a[1])) / det;
        let l2 = ((b[0] - a[0]) * (y - a[1]) - (x - a[0]) * (b[1] - a[1])) / det;
        [1.0 - l1 - l2, l1, l2]
    }
}

/// Level-0 subgrid: one added point per edge and one per face, eight
/// triangles fanned around the face point; then `level` red refinements.
pub fn peclet_barycentric_refine_face(tau: f64, sigma: f64, alpha: f64, beta: f64, level: usize) -> FaceSkeleton {
    let xm = if beta == 0.0 {
        0.5 * tau
    } else {
        peclet_point(beta * tau / alpha) * tau
    };
    let ym = 0.5 * sigma;
    let mut nodes = vec![
        [0.0, 0.0],
        [tau, 0.0],
        [0.0, sigma],
        [tau, sigma],
        [xm, 0.0],
        [xm, sigma],
        [0.0, ym],
        [tau, ym],
        [xm, ym],
    ];
    let ring = [0, 4, 1, 7, 3, 5, 2, 6];
    let mut triangles: Vec<[usize; 3]> = (0..8).map(|k| [8, ring[k], ring[(k + 1) % 8]]).collect();
    for _ in 0..level {
        let mut mids: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, nodes: &mut Vec<[f64; 2]>| -> usize {
            let key = (a.min(b), a.max(b));
            *mids.entry(key).or_insert_with(|| {
                let (p, q) = (nodes[a], nodes[b]);
                nodes.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
                nodes.len() - 1
            })
        };
        let mut next = Vec::with_capacity(4 * triangles.len());
        for &[a, b, c] in &triangles {
            let ab = mid(a, b, &mut nodes);
            let bc = mid(b, c, &mut nodes);
            let ca = mid(c, a, &mut nodes);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        triangles = next;
    }
    FaceSkeleton {
        tau,
        sigma,
        level,
        nodes,
        triangles,
    }
}

/// Subgrid of one cell with its four approximate corner functions.
///
/// Corner `a = ax + 2·ay` sits at `(ax·τ, ay·σ)`.
#[derive(Debug, Clone)]
pub struct SubgridCell {
    pub skeleton: FaceSkeleton,
    pub alpha: f64,
    pub beta: f64,
    pub corner_values: [Vec<f64>; 4],
}

/// `log ∫_T exp(k(x − xref)) dx dy` over triangle `t`.
fn log_triangle_weight(sk: &FaceSkeleton, t: usize, k: f64, xref: f64) -> f64 {
    let mut v = sk.triangles[t].map(|i| sk.nodes[i]);
    v.sort_by(|a, b| a[0].partial_cmp(&b[0]).unwrap());
    let len = |x: f64| {
        let (lo, hi) = y_range(&v, x);
        (hi - lo).max(0.0)
    };
    let logs: Vec<f64> = [(v[0][0], v[1][0]), (v[1][0], v[2][0])]
        .iter()
        .map(|&(a, b)| {
            if b - a <= 1e-14 * sk.tau {
                return f64::NEG_INFINITY;
            }
            log_weighted_linear(k, a, b, len(a), len(b), xref)
        })
        .collect();
    log_sum_exp(&logs)
}

/// Builds the subgrid of a `τ × σ` cell and solves for the corner functions.
pub fn subgrid_cell(tau: f64, sigma: f64, alpha: f64, beta: f64, level: usize) -> Result<SubgridCell> {
    if !(alpha > 0.0) || beta < 0.0 || !(tau > 0.0) || !(sigma > 0.0) {
        return Err(invalid("subgrid needs α, τ, σ > 0 and β >= 0"));
    }
    let sk = peclet_barycentric_refine_face(tau, sigma, alpha, beta, level);
    let flow_chain = peclet_barycentric_refine_edge(tau, alpha, beta, level);
    let k = beta / alpha;
    let n = sk.nodes.len();
    let interior: Vec<usize> = (0..n).filter(|&i| !sk.is_boundary(i)).collect();
    let mut slot = vec![usize::MAX; n];
    for (m, &i) in interior.iter().enumerate() {
        slot[i] = m;
    }

    let log_w: Vec<f64> = (0..sk.triangles.len())
        .map(|t| log_triangle_weight(&sk, t, k, tau))
        .collect();
    // Each row is scaled by the largest weight among the triangles touching its node.
    let mut row_scale = vec![f64::NEG_INFINITY; n];
    for (t, tri) in sk.triangles.iter().enumerate() {
        for &i in tri {
            row_scale[i] = row_scale[i].max(log_w[t]);
        }
    }

    let boundary_value = |corner: usize, x: f64, y: f64| -> f64 {
        let (ax, ay) = (corner % 2, corner / 2);
        let fx = if ax == 0 { flow_chain.left(x) } else { 1.0 - flow_chain.left(x) };
        let gy = if ay == 0 { 1.0 - y / sigma } else { y / sigma };
        let on_x = x.abs() < 1e-12 * tau || (x - tau).abs() < 1e-12 * tau;
        let on_y = y.abs() < 1e-12 * sigma || (y - sigma).abs() < 1e-12 * sigma;
        if on_y {
            if (y / sigma).round() as usize == ay {
                fx
            } else {
                0.0
            }
        } else if on_x {
            if (x / tau).round() as usize == ax {
                gy
            } else {
                0.0
            }
        } else {
            unreachable!("boundary node expected")
        }
    };

    let m = interior.len();
    let mut a = DMatrix::<f64>::zeros(m, m);
    let mut rhs = DMatrix::<f64>::zeros(m, 4);
    let mut bvals = vec![[0.0; 4]; n];
    for i in 0..n {
        if slot[i] == usize::MAX {
            let [x, y] = sk.nodes[i];
            for c in 0..4 {
                bvals[i][c] = boundary_value(c, x, y);
            }
        }
    }
    for (t, tri) in sk.triangles.iter().enumerate() {
        let g = sk.gradients(t);
        for (li, &i) in tri.iter().enumerate() {
            let r = slot[i];
            if r == usize::MAX {
                continue;
            }
            let scale = (log_w[t] - row_scale[i]).exp();
            if scale == 0.0 {
                continue;
            }
            for (lj, &j) in tri.iter().enumerate() {
                let kij = scale * (g[li][0] * g[lj][0] + g[li][1] * g[lj][1]);
                if slot[j] != usize::MAX {
                    a[(r, slot[j])] += kij;
                } else {
                    for c in 0..4 {
                        rhs[(r, c)] -= kij * bvals[j][c];
                    }
                }
            }
        }
    }
    let lu = a.lu();
    let sol = if m == 0 {
        DMatrix::zeros(0, 4)
    } else {
        lu.solve(&rhs).ok_or(Error::Singular {
            pivot: 0.0,
            row: 0,
        })?
    };
    let corner_values = std::array::from_fn(|c| {
        (0..n)
            .map(|i| if slot[i] == usize::MAX { bvals[i][c] } else { sol[(slot[i], c)] })
            .collect::<Vec<f64>>()
    });
    Ok(SubgridCell {
        skeleton: sk,
        alpha,
        beta,
        corner_values,
    })
}

impl SubgridCell {
    /// Value of corner function `c` at local point `(x, y)`.
    pub fn eval(&self, c: usize, x: f64, y: f64) -> f64 {
        let sk = &self.skeleton;
        for t in 0..sk.triangles.len() {
            let l = sk.barycentric(t, x, y);
            if l.iter().all(|&v| v >= -1e-12) {
                let tri = sk.triangles[t];
                return (0..3).map(|q| l[q] * self.corner_values[c][tri[q]]).sum();
            }
        }
        0.0
    }

    /// Exact separable corner function and its gradient at a local point.
    pub fn exact(&self, c: usize, x: f64, y: f64) -> (f64, [f64; 2]) {
        let sk = &self.skeleton;
        let p = Peclet::new(self.alpha, self.beta, sk.tau);
        let s = x / sk.tau;
        let node = if c % 2 == 0 { Node::Left } else { Node::Right };
        let fx = upwind_shape(p, s, node);
        let dfx = upwind_shape_slope(p, s, node) / sk.tau;
        let (gy, dgy) = if c / 2 == 0 {
            (1.0 - y / sk.sigma, -1.0 / sk.sigma)
        } else {
            (y / sk.sigma, 1.0 / sk.sigma)
        };
        (fx * gy, [dfx * gy, fx * dgy])
    }

    /// `(‖exact − approx‖²_α, ‖exact‖²_α)` for corner `c`, integrated with
    /// x-sections graded toward the exponential layer.
    pub fn corner_error_sq(&self, c: usize) -> (f64, f64) {
        let sk = &self.skeleton;
        let width = if self.beta > 0.0 { self.alpha / self.beta } else { sk.tau };
        let inner = GaussRule::get(3);
        let mut err = 0.0;
        let mut norm = 0.0;
        for t in 0..sk.triangles.len() {
            let tri = sk.triangles[t];
            let g = sk.gradients(t);
            let vals = tri.map(|i| self.corner_values[c][i]);
            let grad = [
                (0..3).map(|q| vals[q] * g[q][0]).sum::<f64>(),
                (0..3).map(|q| vals[q] * g[q][1]).sum::<f64>(),
            ];
            let mut v = tri.map(|i| sk.nodes[i]);
            v.sort_by(|a, b| a[0].partial_cmp(&b[0]).unwrap());
            for (a, b) in [(v[0][0], v[1][0]), (v[1][0], v[2][0])] {
                if b - a <= 1e-14 * sk.tau {
                    continue;
                }
                for (x, wx) in graded_rule(a, b, width, 12) {
                    let (ylo, yhi) = y_range(&v, x);
                    for (y, wy) in inner.mapped(ylo, yhi) {
                        let l = sk.barycentric(t, x, y);
                        let approx: f64 = (0..3).map(|q| l[q] * vals[q]).sum();
                        let (ex, dex) = self.exact(c, x, y);
                        let w = wx * wy;
                        err += w
                            * ((ex - approx).powi(2)
                                + self.alpha * ((dex[0] - grad[0]).powi(2) + (dex[1] - grad[1]).powi(2)));
                        norm += w * (ex * ex + self.alpha * (dex[0] * dex[0] + dex[1] * dex[1]));
                    }
                }
            }
        }
        (err, norm)
    }
}

/// Vertical extent of the triangle with x-sorted vertices `v` at abscissa `x`.
fn y_range(v: &[[f64; 2]; 3], x: f64) -> (f64, f64) {
    let lerp = |p: [f64; 2], q: [f64; 2]| p[1] + (q[1] - p[1]) * (x - p[0]) / (q[0] - p[0]);
    let long = lerp(v[0], v[2]);
    let short = if x <= v[1][0] {
        if v[1][0] > v[0][0] { lerp(v[0], v[1]) } else { v[1][1] }
    } else if v[2][0] > v[1][0] {
        lerp(v[1], v[2])
    } else {
        v[1][1]
    };
    (long.min(short), long.max(short))
}

/// Approximate test function of one interior vertex, restricted to one of its cells.
#[derive(Debug, Clone)]
pub struct SubgridBasis {
    /// Cell indices `(flow, transverse)`.
    pub cell: (usize, usize),
    /// Which corner of the cell the vertex is.
    pub corner: usize,
    pub local: Arc<SubgridCell>,
}

impl SubgridBasis {
    pub fn values(&self) -> &[f64] {
        &self.local.corner_values[self.corner]
    }
}

/// Approximate test function attached to an interior vertex, as four cell pieces.
pub fn approx_upwind_basis(
    mesh: &TensorMesh2D,
    vertex: usize,
    alpha: f64,
    beta: f64,
    level: usize,
) -> Result<Vec<SubgridBasis>> {
    let (i, j) = mesh.vertex_coords(vertex);
    if vertex >= mesh.n_vertices() || mesh.interior_index(i, j).is_none() {
        return Err(invalid(format!("vertex {vertex} is not interior")));
    }
    let local = Arc::new(subgrid_cell(mesh.flow.step, mesh.transverse.step, alpha, beta, level)?);
    let mut out = Vec::with_capacity(4);
    for (ci, ax) in [(i - 1, 1), (i, 0)] {
        for (cj, ay) in [(j - 1, 1), (j, 0)] {
            out.push(SubgridBasis {
                cell: (ci, cj),
                corner: ax + 2 * ay,
                local: local.clone(),
            });
        }
    }
    Ok(out)
}

/// Relative α-norm distance between the exact and approximate test function
/// of an interior vertex.
pub fn basis_relative_error(pieces: &[SubgridBasis]) -> f64 {
    let (mut e, mut n) = (0.0, 0.0);
    for piece in pieces {
        let (de, dn) = piece.local.corner_error_sq(piece.corner);
        e += de;
        n += dn;
    }
    (e / n).sqrt()
}
