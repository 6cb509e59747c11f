//! Global assembly of the Petrov–Galerkin and Galerkin systems and the
//! end-to-end convection–diffusion solve.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::banded::{solve_banded, BandMatrix};
use crate::elements::{element_matrices, upwind_shape, LocalMatrices, Mat2, Node, Peclet};
use crate::error::{invalid, Result};
use crate::mesh::{Mesh1D, TensorMesh2D};
use crate::par;
use crate::quadrature::{graded_rule, GaussRule};
use crate::upwind_basis::subgrid::{subgrid_cell, SubgridCell};

/// Reaction coefficient `γ >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Reaction {
    Constant(f64),
    /// One value per cell, cells numbered with the flow index fastest.
    PerCell(Vec<f64>),
}

impl Reaction {
    pub fn on_cell(&self, c: usize) -> f64 {
        match self {
            Reaction::Constant(g) => *g,
            Reaction::PerCell(v) => v[c],
        }
    }
}

/// Source term `f`.
#[derive(Clone)]
pub enum Source {
    Constant(f64),
    /// `f(x, y)`; in 1D only `x` is used.
    Callable(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Constant(v) => write!(f, "Constant({v})"),
            Source::Callable(_) => write!(f, "Callable(..)"),
        }
    }
}

impl Source {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            Source::Constant(v) => *v,
            Source::Callable(g) => g(x, y),
        }
    }
}

/// Data of `−αΔu + β∂ₜu + γu = f` on `]0,T[ × V` with homogeneous Dirichlet data.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: Reaction,
    pub source: Source,
    /// Extent `T` of the flow direction.
    pub extent_t: f64,
    /// Extent of the transverse interval `V` (ignored in 1D).
    pub extent_v: f64,
    pub dim: usize,
}

impl ProblemSpec {
    pub fn one_d(alpha: f64, beta: f64, gamma: f64, f: f64, t: f64) -> Self {
        Self {
            alpha,
            beta,
            gamma: Reaction::Constant(gamma),
            source: Source::Constant(f),
            extent_t: t,
            extent_v: 1.0,
            dim: 1,
        }
    }

    pub fn two_d(alpha: f64, beta: f64, gamma: f64, f: f64, t: f64, v: f64) -> Self {
        Self {
            dim: 2,
            extent_v: v,
            ..Self::one_d(alpha, beta, gamma, f, t)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) {
            return Err(invalid(format!("viscosity must be positive, got {}", self.alpha)));
        }
        if !(self.beta >= 0.0) {
            return Err(invalid("convection speed must be nonnegative"));
        }
        let bad_gamma = match &self.gamma {
            Reaction::Constant(g) => !(*g >= 0.0),
            Reaction::PerCell(v) => v.iter().any(|g| !(*g >= 0.0)),
        };
        if bad_gamma {
            return Err(invalid("reaction coefficient must be nonnegative"));
        }
        if !(self.extent_t > 0.0 && self.extent_v > 0.0) {
            return Err(invalid("domain extents must be positive"));
        }
        if self.dim != 1 && self.dim != 2 {
            return Err(invalid("dimension must be 1 or 2"));
        }
        Ok(())
    }
}

/// Discretization choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Galerkin,
    PgExact,
    /// Approximate upwinding with the given number of subgrid refinements.
    PgApprox(usize),
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::Galerkin => "galerkin",
            Method::PgExact => "pg-exact",
            Method::PgApprox(_) => "pg-approx",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "galerkin" => Ok(Method::Galerkin),
            "pg-exact" => Ok(Method::PgExact),
            "pg-approx" => Ok(Method::PgApprox(0)),
            other => match other.strip_prefix("pg-approx:") {
                Some(l) => l
                    .parse()
                    .map(Method::PgApprox)
                    .map_err(|_| invalid(format!("bad subgrid level in `{other}`"))),
                None => Err(invalid(format!(
                    "unknown method `{other}`; expected galerkin, pg-exact or pg-approx[:level]"
                ))),
            },
        }
    }
}

/// 1D or tensor-product 2D mesh.
#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    OneD(Mesh1D),
    TwoD(TensorMesh2D),
}

impl Grid {
    pub fn n_vertices(&self) -> usize {
        match self {
            Grid::OneD(m) => m.n_vertices(),
            Grid::TwoD(m) => m.n_vertices(),
        }
    }

    /// Global vertex index of every interior unknown, in unknown order.
    pub fn interior_vertices(&self) -> Vec<usize> {
        match self {
            Grid::OneD(m) => (1..m.n_cells).collect(),
            Grid::TwoD(m) => {
                let mut out = Vec::with_capacity(m.n_interior());
                for j in 1..m.transverse.n_cells {
                    for i in 1..m.flow.n_cells {
                        out.push(m.vertex_index(i, j));
                    }
                }
                out
            }
        }
    }
}

/// Interior system: rows are test functions, columns trial functions.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: BandMatrix,
    pub rhs: Vec<f64>,
    /// Global vertex index of each unknown.
    pub dofs: Vec<usize>,
}

/// Nodal solution on every vertex, zero on the boundary.
#[derive(Debug, Clone)]
pub struct DiscreteSolution {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub method: Method,
}

fn check_grid(spec: &ProblemSpec, grid: &Grid) -> Result<()> {
    spec.validate()?;
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
    match grid {
        Grid::OneD(m) if spec.dim == 1 && close(m.length, spec.extent_t) => Ok(()),
        Grid::TwoD(m)
            if spec.dim == 2 && close(m.flow.length, spec.extent_t) && close(m.transverse.length, spec.extent_v) =>
        {
            Ok(())
        }
        _ => Err(invalid("mesh does not match the problem dimension or extents")),
    }
}

/// `∫ f ψ_a` over flow cell `[a, b]` for both local test shapes.
fn cell_load_1d(spec: &ProblemSpec, lm: &LocalMatrices, a: f64, b: f64, galerkin: bool) -> [f64; 2] {
    match &spec.source {
        Source::Constant(f) => {
            let l = if galerkin { lm.galerkin_load } else { lm.load };
            [f * l[0], f * l[1]]
        }
        Source::Callable(g) => {
            let width = layer_width(spec.alpha, spec.beta, b - a);
            let mut out = [0.0; 2];
            for (x, w) in graded_rule(a, b, width, 20) {
                let s = (x - a) / (b - a);
                let (l, r) = shapes(lm.peclet, s, galerkin);
                let fx = g(x, 0.0);
                out[0] += w * fx * l;
                out[1] += w * fx * r;
            }
            out
        }
    }
}

fn shapes(p: Peclet, s: f64, galerkin: bool) -> (f64, f64) {
    if galerkin {
        (1.0 - s, s)
    } else {
        (upwind_shape(p, s, Node::Left), upwind_shape(p, s, Node::Right))
    }
}

fn layer_width(alpha: f64, beta: f64, h: f64) -> f64 {
    if beta > 0.0 {
        alpha / beta
    } else {
        h
    }
}

fn assemble_1d(spec: &ProblemSpec, m: &Mesh1D, galerkin: bool) -> LinearSystem {
    let n = m.n_cells;
    let ni = n - 1;
    let mut a = BandMatrix::zeros(ni, 1, 1);
    let mut rhs = vec![0.0; ni];
    let locals = par::map_range(n, |k| {
        let lm = element_matrices(spec.alpha, spec.beta, spec.gamma.on_cell(k), m.step);
        let mat = if galerkin { lm.galerkin_total() } else { lm.pg_total() };
        let (x0, x1) = m.cell(k);
        (mat, cell_load_1d(spec, &lm, x0, x1, galerkin))
    });
    for (k, (mat, load)) in locals.into_iter().enumerate() {
        for ra in 0..2 {
            let gi = k + ra;
            if gi == 0 || gi == n {
                continue;
            }
            rhs[gi - 1] += load[ra];
            for cb in 0..2 {
                let gj = k + cb;
                if gj == 0 || gj == n {
                    continue;
                }
                a.add(gi - 1, gj - 1, mat[ra][cb]);
            }
        }
    }
    LinearSystem {
        matrix: a,
        rhs,
        dofs: (1..n).collect(),
    }
}

/// Assembled interior tridiagonal matrix of a 1D local matrix family.
fn global_1d(n_cells: usize, local: Mat2) -> Vec<[f64; 3]> {
    // Row i (interior vertex i+1) holds coefficients of vertices i, i+1, i+2.
    (1..n_cells)
        .map(|_| [local[1][0], local[1][1] + local[0][0], local[0][1]])
        .collect()
}

/// 1D transverse P1 mass and stiffness on a cell of length `h`.
fn p1_mats(h: f64) -> (Mat2, Mat2) {
    (
        [[h / 3.0, h / 6.0], [h / 6.0, h / 3.0]],
        [[1.0 / h, -1.0 / h], [-1.0 / h, 1.0 / h]],
    )
}

/// Local 4×4 matrix of a cell in exact mode; index `a = at + 2·ay`.
fn tensor_local(lm: &LocalMatrices, sigma: f64, alpha: f64, gamma: f64, galerkin: bool) -> [[f64; 4]; 4] {
    let (my, ky) = p1_mats(sigma);
    let (conv, mass) = if galerkin {
        (lm.galerkin_conv, lm.galerkin_mass)
    } else {
        (lm.conv, lm.mass)
    };
    let mut out = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            let (at, ay, bt, by) = (a % 2, a / 2, b % 2, b / 2);
            out[a][b] = (conv[at][bt] + gamma * mass[at][bt]) * my[ay][by] + alpha * mass[at][bt] * ky[ay][by];
        }
    }
    out
}

/// Kronecker assembly for constant γ and exact or Galerkin test functions.
fn assemble_2d_kronecker(spec: &ProblemSpec, m: &TensorMesh2D, galerkin: bool) -> LinearSystem {
    let (nf, nt) = (m.flow.n_cells, m.transverse.n_cells);
    let gamma = spec.gamma.on_cell(0);
    let lm = element_matrices(spec.alpha, spec.beta, gamma, m.flow.step);
    let (conv, mass) = if galerkin {
        (lm.galerkin_conv, lm.galerkin_mass)
    } else {
        (lm.conv, lm.mass)
    };
    let mut cg = conv;
    for i in 0..2 {
        for j in 0..2 {
            cg[i][j] += gamma * mass[i][j];
        }
    }
    let cf = global_1d(nf, cg);
    let mf = global_1d(nf, mass);
    let (my_l, ky_l) = p1_mats(m.transverse.step);
    let my = global_1d(nt, my_l);
    let ky = global_1d(nt, ky_l);
    let nfi = nf - 1;
    let n = nfi * (nt - 1);
    let mut a = BandMatrix::zeros(n, nfi + 1, nfi + 1);
    let rows = par::map_range(n, |r| {
        let (i, j) = (r % nfi, r / nfi);
        let mut out = Vec::with_capacity(9);
        for dj in 0..3usize {
            let jj = j + dj;
            if jj == 0 || jj > nt - 1 {
                continue;
            }
            for di in 0..3usize {
                let ii = i + di;
                if ii == 0 || ii > nfi {
                    continue;
                }
                let v = cf[i][di] * my[j][dj] + spec.alpha * mf[i][di] * ky[j][dj];
                out.push(((jj - 1) * nfi + (ii - 1), v));
            }
        }
        out
    });
    for (r, row) in rows.into_iter().enumerate() {
        for (c, v) in row {
            a.add(r, c, v);
        }
    }
    let rhs = load_2d(spec, m, &lm, galerkin);
    LinearSystem {
        matrix: a,
        rhs,
        dofs: Grid::TwoD(m.clone()).interior_vertices(),
    }
}

/// Load vector in exact or Galerkin mode.
fn load_2d(spec: &ProblemSpec, m: &TensorMesh2D, lm: &LocalMatrices, galerkin: bool) -> Vec<f64> {
    let (nf, nt) = (m.flow.n_cells, m.transverse.n_cells);
    let nfi = nf - 1;
    let n = nfi * (nt - 1);
    match &spec.source {
        Source::Constant(f) => {
            let l = if galerkin { lm.galerkin_load } else { lm.load };
            let lf = l[0] + l[1];
            vec![f * lf * m.transverse.step; n]
        }
        Source::Callable(_) => {
            let cells = par::map_range(nf * nt, |c| cell_load_2d(spec, m, lm.peclet, c, galerkin));
            let mut rhs = vec![0.0; n];
            for (c, load) in cells.into_iter().enumerate() {
                let (ci, cj) = (c % nf, c / nf);
                for a in 0..4 {
                    if let Some(r) = m.interior_index(ci + a % 2, cj + a / 2) {
                        rhs[r] += load[a];
                    }
                }
            }
            rhs
        }
    }
}

fn cell_load_2d(spec: &ProblemSpec, m: &TensorMesh2D, p: Peclet, c: usize, galerkin: bool) -> [f64; 4] {
    let nf = m.flow.n_cells;
    let (ci, cj) = (c % nf, c / nf);
    let (x0, x1) = m.flow.cell(ci);
    let (y0, y1) = m.transverse.cell(cj);
    let width = layer_width(spec.alpha, spec.beta, x1 - x0);
    let gy = GaussRule::get(8);
    let mut out = [0.0; 4];
    for (x, wx) in graded_rule(x0, x1, width, 20) {
        let (l, r) = shapes(p, (x - x0) / (x1 - x0), galerkin);
        for (y, wy) in gy.mapped(y0, y1) {
            let t = (y - y0) / (y1 - y0);
            let f = spec.source.eval(x, y) * wx * wy;
            out[0] += f * l * (1.0 - t);
            out[1] += f * r * (1.0 - t);
            out[2] += f * l * t;
            out[3] += f * r * t;
        }
    }
    out
}

/// Local 4×4 matrices and unit load of a cell in approximate mode:
/// `(α∫∇φ_b·∇ψ_a + β∫∂ₜφ_b ψ_a, ∫φ_b ψ_a, ∫ψ_a)`.
pub fn approx_local(cell: &SubgridCell) -> ([[f64; 4]; 4], [[f64; 4]; 4], [f64; 4]) {
    let sk = &cell.skeleton;
    let (tau, sigma) = (sk.tau, sk.sigma);
    let mut conv = [[0.0; 4]; 4];
    let mut mass = [[0.0; 4]; 4];
    let mut load = [0.0; 4];
    for t in 0..sk.triangles.len() {
        let tri = sk.triangles[t];
        let g = sk.gradients(t);
        let area = sk.area(t);
        let pts = tri.map(|i| sk.nodes[i]);
        let grad_psi: [[f64; 2]; 4] = std::array::from_fn(|a| {
            let v = tri.map(|i| cell.corner_values[a][i]);
            [
                (0..3).map(|q| v[q] * g[q][0]).sum(),
                (0..3).map(|q| v[q] * g[q][1]).sum(),
            ]
        });
        for (bary, w) in TRIANGLE_RULE {
            let x: f64 = (0..3).map(|q| bary[q] * pts[q][0]).sum();
            let y: f64 = (0..3).map(|q| bary[q] * pts[q][1]).sum();
            let wt = w * area;
            let psi: [f64; 4] = std::array::from_fn(|a| (0..3).map(|q| bary[q] * cell.corner_values[a][tri[q]]).sum());
            let (xs, ys) = (x / tau, y / sigma);
            let phi = |b: usize| -> (f64, [f64; 2]) {
                let (fx, dfx) = if b % 2 == 0 { (1.0 - xs, -1.0 / tau) } else { (xs, 1.0 / tau) };
                let (fy, dfy) = if b / 2 == 0 { (1.0 - ys, -1.0 / sigma) } else { (ys, 1.0 / sigma) };
                (fx * fy, [dfx * fy, fx * dfy])
            };
            for a in 0..4 {
                load[a] += wt * psi[a];
                for b in 0..4 {
                    let (pb, gb) = phi(b);
                    conv[a][b] += wt
                        * (cell.alpha * (gb[0] * grad_psi[a][0] + gb[1] * grad_psi[a][1]) + cell.beta * gb[0] * psi[a]);
                    mass[a][b] += wt * pb * psi[a];
                }
            }
        }
    }
    (conv, mass, load)
}

/// Symmetric 6-point rule on the reference triangle, exact for degree 4.
const TRIANGLE_RULE: [([f64; 3], f64); 6] = {
    const A1: f64 = 0.445_948_490_915_965;
    const B1: f64 = 0.108_103_018_168_070;
    const W1: f64 = 0.223_381_589_678_011;
    const A2: f64 = 0.091_576_213_509_771;
    const B2: f64 = 0.816_847_572_980_459;
    const W2: f64 = 0.109_951_743_655_322;
    [
        ([A1, A1, B1], W1),
        ([A1, B1, A1], W1),
        ([B1, A1, A1], W1),
        ([A2, A2, B2], W2),
        ([A2, B2, A2], W2),
        ([B2, A2, A2], W2),
    ]
};

/// Element-loop assembly: per-cell γ, exact or approximate test functions.
fn assemble_2d_elements(spec: &ProblemSpec, m: &TensorMesh2D, method: Method) -> Result<LinearSystem> {
    let (nf, nt) = (m.flow.n_cells, m.transverse.n_cells);
    let (tau, sigma) = (m.flow.step, m.transverse.step);
    let lm = element_matrices(spec.alpha, spec.beta, 0.0, tau);
    let approx = match method {
        Method::PgApprox(level) => {
            let cell = subgrid_cell(tau, sigma, spec.alpha, spec.beta, level)?;
            Some((approx_local(&cell), cell))
        }
        _ => None,
    };
    let galerkin = method == Method::Galerkin;
    let locals = par::map_range(nf * nt, |c| {
        let gamma = spec.gamma.on_cell(c);
        match &approx {
            Some(((conv, mass, load), cell)) => {
                let mut out = *conv;
                for a in 0..4 {
                    for b in 0..4 {
                        out[a][b] += gamma * mass[a][b];
                    }
                }
                let load = match &spec.source {
                    Source::Constant(f) => load.map(|v| f * v),
                    Source::Callable(_) => approx_cell_load(spec, m, cell, c),
                };
                (out, load)
            }
            None => {
                let out = tensor_local(&lm, sigma, spec.alpha, gamma, galerkin);
                let load = match &spec.source {
                    Source::Constant(f) => {
                        let l = if galerkin { lm.galerkin_load } else { lm.load };
                        std::array::from_fn(|a| f * l[a % 2] * sigma / 2.0)
                    }
                    Source::Callable(_) => cell_load_2d(spec, m, lm.peclet, c, galerkin),
                };
                (out, load)
            }
        }
    });
    let nfi = nf - 1;
    let n = nfi * (nt - 1);
    let mut a = BandMatrix::zeros(n, nfi + 1, nfi + 1);
    let mut rhs = vec![0.0; n];
    for (c, (mat, load)) in locals.into_iter().enumerate() {
        let (ci, cj) = (c % nf, c / nf);
        for ra in 0..4 {
            let Some(r) = m.interior_index(ci + ra % 2, cj + ra / 2) else {
                continue;
            };
            rhs[r] += load[ra];
            for cb in 0..4 {
                if let Some(col) = m.interior_index(ci + cb % 2, cj + cb / 2) {
                    a.add(r, col, mat[ra][cb]);
                }
            }
        }
    }
    Ok(LinearSystem {
        matrix: a,
        rhs,
        dofs: Grid::TwoD(m.clone()).interior_vertices(),
    })
}

fn approx_cell_load(spec: &ProblemSpec, m: &TensorMesh2D, cell: &SubgridCell, c: usize) -> [f64; 4] {
    let nf = m.flow.n_cells;
    let (x0, y0) = (m.flow.vertices[c % nf], m.transverse.vertices[c / nf]);
    let sk = &cell.skeleton;
    let mut out = [0.0; 4];
    for t in 0..sk.triangles.len() {
        let tri = sk.triangles[t];
        let pts = tri.map(|i| sk.nodes[i]);
        let area = sk.area(t);
        for (bary, w) in TRIANGLE_RULE {
            let x: f64 = (0..3).map(|q| bary[q] * pts[q][0]).sum();
            let y: f64 = (0..3).map(|q| bary[q] * pts[q][1]).sum();
            let f = spec.source.eval(x0 + x, y0 + y) * w * area;
            for (a, o) in out.iter_mut().enumerate() {
                *o += f * (0..3).map(|q| bary[q] * cell.corner_values[a][tri[q]]).sum::<f64>();
            }
        }
    }
    out
}

/// Assembles the Petrov–Galerkin system with exact or approximate test functions.
pub fn assemble_petrov_galerkin(spec: &ProblemSpec, grid: &Grid, method: Method) -> Result<LinearSystem> {
    check_grid(spec, grid)?;
    let method = if method == Method::Galerkin { Method::PgExact } else { method };
    match grid {
        Grid::OneD(m) => Ok(assemble_1d(spec, m, false)),
        Grid::TwoD(m) => match (&spec.gamma, method) {
            (Reaction::Constant(_), Method::PgExact) => Ok(assemble_2d_kronecker(spec, m, false)),
            _ => assemble_2d_elements(spec, m, method),
        },
    }
}

/// Assembles the Galerkin system with affine (Q11) test functions.
pub fn assemble_galerkin(spec: &ProblemSpec, grid: &Grid) -> Result<LinearSystem> {
    check_grid(spec, grid)?;
    match grid {
        Grid::OneD(m) => Ok(assemble_1d(spec, m, true)),
        Grid::TwoD(m) => match &spec.gamma {
            Reaction::Constant(_) => Ok(assemble_2d_kronecker(spec, m, true)),
            _ => assemble_2d_elements(spec, m, Method::Galerkin),
        },
    }
}

/// Element-loop assembly regardless of coefficient structure, used to
/// cross-check the Kronecker path.
pub fn assemble_by_elements(spec: &ProblemSpec, mesh: &TensorMesh2D, method: Method) -> Result<LinearSystem> {
    check_grid(spec, &Grid::TwoD(mesh.clone()))?;
    assemble_2d_elements(spec, mesh, method)
}

pub fn assemble(spec: &ProblemSpec, grid: &Grid, method: Method) -> Result<LinearSystem> {
    match method {
        Method::Galerkin => assemble_galerkin(spec, grid),
        _ => assemble_petrov_galerkin(spec, grid, method),
    }
}

/// Solves an interior system.
pub fn solve_system(sys: &LinearSystem) -> Result<Vec<f64>> {
    solve_banded(&sys.matrix, &sys.rhs)
}

/// Assembles, solves and scatters the interior values onto all vertices.
pub fn solve_convection_diffusion(spec: &ProblemSpec, grid: &Grid, method: Method) -> Result<DiscreteSolution> {
    let sys = assemble(spec, grid, method)?;
    let x = solve_system(&sys)?;
    let mut values = vec![0.0; grid.n_vertices()];
    for (&d, v) in sys.dofs.iter().zip(x) {
        values[d] = v;
    }
    Ok(DiscreteSolution {
        grid: grid.clone(),
        values,
        method,
    })
}

/// Closed-form solution of `−αu'' + βu' = 1`, `u(0) = u(T) = 0`.
pub fn exact_solution_1d(alpha: f64, beta: f64, t_end: f64, t: f64) -> f64 {
    let r = beta / alpha;
    // Ratio of expm1 terms written with nonpositive exponents only.
    let ratio = (r * (t - t_end)).exp() * (-(-r * t).exp_m1()) / (-(-r * t_end).exp_m1());
    t / beta - (t_end / beta) * ratio
}

impl DiscreteSolution {
    /// Values along the transverse grid line `j` (2D) or all values (1D).
    pub fn line(&self, j: usize) -> Vec<f64> {
        match &self.grid {
            Grid::OneD(_) => self.values.clone(),
            Grid::TwoD(m) => (0..m.flow.n_vertices()).map(|i| self.values[m.vertex_index(i, j)]).collect(),
        }
    }

    /// Writes the solution CSV with a parameter comment line.
    pub fn write_csv<W: Write>(&self, spec: &ProblemSpec, mut w: W) -> std::io::Result<()> {
        let (nf, nt) = match &self.grid {
            Grid::OneD(m) => (m.n_cells, 0),
            Grid::TwoD(m) => (m.flow.n_cells, m.transverse.n_cells),
        };
        writeln!(w, "# dim,T,V,n_flow,n_transverse,alpha,beta,method")?;
        writeln!(
            w,
            "# {},{},{},{},{},{},{},{}",
            spec.dim,
            spec.extent_t,
            spec.extent_v,
            nf,
            nt,
            spec.alpha,
            spec.beta,
            self.method.tag()
        )?;
        match &self.grid {
            Grid::OneD(m) => {
                writeln!(w, "x,value")?;
                for (x, v) in m.vertices.iter().zip(&self.values) {
                    writeln!(w, "{x},{v}")?;
                }
            }
            Grid::TwoD(m) => {
                writeln!(w, "x,y,value")?;
                for (idx, v) in self.values.iter().enumerate() {
                    let (i, j) = m.vertex_coords(idx);
                    let (x, y) = m.point(i, j);
                    writeln!(w, "{x},{y},{v}")?;
                }
            }
        }
        Ok(())
    }
}

/// Total variation of a sequence.
pub fn total_variation(v: &[f64]) -> f64 {
    v.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

/// Number of sign changes in the discrete derivative of a sequence.
pub fn derivative_sign_changes(v: &[f64]) -> usize {
    let d: Vec<f64> = v.windows(2).map(|w| w[1] - w[0]).filter(|d| *d != 0.0).collect();
    d.windows(2).filter(|w| w[0].signum() != w[1].signum()).count()
}
