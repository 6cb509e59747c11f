//! Dense Gram matrices of the norms used in the stability analysis.
//!
//! Every H^{1/2} quantity is the Slobodetski double integral divided by `2π`,
//! which makes it coincide with `(1/2π)∫|ξ||Fu|²` on the real line.

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::elements::{upwind_gram, Peclet};
use crate::error::{invalid, Result};
use crate::mesh::{Mesh1D, TensorMesh2D};
use crate::par;
use crate::quadrature::{graded_rule, GaussRule};
use crate::special::upwind_right;

/// Discrete space whose nodal coefficients a Gram acts on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Space {
    /// Continuous piecewise affine functions.
    Affine,
    /// Upwinded exponential functions for the given coefficients.
    Upwind { alpha: f64, beta: f64 },
}

impl Space {
    fn peclet(self, tau: f64) -> f64 {
        match self {
            Space::Affine => 0.0,
            Space::Upwind { alpha, beta } => Peclet::new(alpha, beta, tau).value().max(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormTag {
    HHalf,
    HHalf00,
    AlphaEnergy,
    L2,
    TheoremTrial,
    TheoremTest,
}

impl fmt::Display for NormTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            NormTag::HHalf => "h_half",
            NormTag::HHalf00 => "h_half_00",
            NormTag::AlphaEnergy => "alpha_energy",
            NormTag::L2 => "l2",
            NormTag::TheoremTrial => "theorem_trial",
            NormTag::TheoremTest => "theorem_test",
        };
        f.write_str(s)
    }
}

/// Trial or test side of the discrete pairing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Trial,
    Test,
}

/// Symmetric positive semidefinite quadratic form over nodal coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct NormGram {
    pub tag: NormTag,
    pub matrix: DMatrix<f64>,
    /// Parameters recorded in exports.
    pub params: Vec<(String, f64)>,
}

impl NormGram {
    pub fn new(tag: NormTag, matrix: DMatrix<f64>) -> Self {
        Self {
            tag,
            matrix,
            params: Vec::new(),
        }
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.push((name.to_string(), value));
        self
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `xᵀ Q x`.
    pub fn quad(&self, x: &[f64]) -> f64 {
        let v = DVector::from_column_slice(x);
        v.dot(&(&self.matrix * &v))
    }

    pub fn symmetry_defect(&self) -> f64 {
        (&self.matrix - self.matrix.transpose()).amax()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.matrix.clone()).eigenvalues.min()
    }

    /// Symmetric within `1e-12` and PSD within `1e-10·‖Q‖`.
    pub fn is_valid(&self) -> bool {
        let scale = self.matrix.amax().max(f64::MIN_POSITIVE);
        self.symmetry_defect() < 1e-12 * scale.max(1.0)
            && self.min_eigenvalue() >= -1e-10 * scale
    }

    /// Dense CSV, row-major, with a comment header carrying the tag and parameters.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "# tag={},dim={}", self.tag, self.dim())?;
        for (k, v) in &self.params {
            write!(w, ",{k}={v:e}")?;
        }
        writeln!(w)?;
        for i in 0..self.dim() {
            let row: Vec<String> = (0..self.dim())
                .map(|j| format!("{:e}", self.matrix[(i, j)]))
                .collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Rows and columns `1..n-1` of a matrix over all vertices.
pub fn restrict_interior(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    if n < 3 {
        return DMatrix::zeros(0, 0);
    }
    m.view((1, 1), (n - 2, n - 2)).into_owned()
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let t = m.transpose();
    *m += t;
    *m *= 0.5;
}

/// Unit-cell shape values `(ψ_L, ψ_R)` for Péclet number `p ≥ 0`.
fn shapes(p: f64, s: f64) -> (f64, f64) {
    if p == 0.0 {
        return (1.0 - s, s);
    }
    let d = -(-p).exp_m1();
    let left = (-p * s).exp() * -(-p * (1.0 - s)).exp_m1() / d;
    (left, upwind_right(p, s))
}

/// Graded rule on the unit cell resolving the layer of width `1/p`.
fn cell_rule(p: f64) -> Vec<(f64, f64)> {
    if p == 0.0 {
        GaussRule::get(16).mapped(0.0, 1.0).collect()
    } else {
        graded_rule(0.0, 1.0, 1.0 / p, 20)
    }
}

/// `(1 − e^{−z})/z`, continuous at 0.
fn relative_expm1(z: f64) -> f64 {
    if z.abs() < 1e-8 {
        1.0 - 0.5 * z
    } else {
        -(-z).exp_m1() / z
    }
}

/// Same-cell block: `∫∫_{[0,1]²} ((ψ_R(x) − ψ_R(y))/(x − y))²`.
fn same_cell_constant(p: f64) -> f64 {
    if p == 0.0 {
        return 1.0;
    }
    // Divided difference is e^{-p min(x,y)} g(|x-y|); integrating out the
    // position leaves a single integral over the separation d.
    let d = -(-p).exp_m1();
    let g = |t: f64| p * relative_expm1(p * t) / d;
    graded_rule(0.0, 1.0, 1.0 / p, 20)
        .into_iter()
        .map(|(t, w)| w * g(t).powi(2) * -(-2.0 * p * (1.0 - t)).exp_m1() / p)
        .sum()
}

/// Adjacent-cell block for one orientation, in the increments `(a, b)` of
/// the left and right cell: `[[E_aa, E_ab], [E_ab, E_bb]]`.
fn adjacent_block(p: f64) -> [[f64; 2]; 2] {
    if p == 0.0 {
        let a = 1.0 - LN_2;
        let b = LN_2 - 0.5;
        return [[a, b], [b, a]];
    }
    let width = 1.0 / p;
    let deficit = |xi: f64| shapes(p, 1.0 - xi).0;
    let rise = |y: f64| shapes(p, y).1;
    let outer = graded_rule(0.0, 1.0, width, 20);
    let eaa: f64 = outer
        .iter()
        .map(|&(xi, w)| w * deficit(xi).powi(2) / (xi * (1.0 + xi)))
        .sum();
    let ebb: f64 = outer
        .iter()
        .map(|&(y, w)| w * rise(y).powi(2) / (y * (1.0 + y)))
        .sum();
    // Duffy split of the corner singularity at the shared vertex.
    let eab: f64 = outer
        .iter()
        .map(|&(r, w)| {
            let inner = graded_rule(0.0, 1.0, (width / r).min(1.0), 20);
            let mut acc = 0.0;
            for &(t, wt) in &inner {
                let k = wt / (1.0 + t).powi(2);
                acc += k * (deficit(r) / r * rise(r * t) + deficit(r * t) * rise(r) / r);
            }
            w * acc
        })
        .sum();
    [[eaa, eab], [eab, ebb]]
}

/// Block for cells separated by `d ≥ 2` (unit cells), over `[K0, K1, L0, L1]`.
fn distant_block(rule: &[(f64, f64)], vals: &[(f64, f64)], d: f64) -> [[f64; 4]; 4] {
    let mut m = [[0.0; 4]; 4];
    for (i, &(x, wx)) in rule.iter().enumerate() {
        let (lx, rx) = vals[i];
        let mut s = 0.0;
        let mut cl = 0.0;
        let mut cr = 0.0;
        for (j, &(y, wy)) in rule.iter().enumerate() {
            let k = wy / (d + y - x).powi(2);
            let (ly, ry) = vals[j];
            s += k;
            cl += k * ly;
            cr += k * ry;
        }
        m[0][0] += wx * lx * lx * s;
        m[0][1] += wx * lx * rx * s;
        m[1][1] += wx * rx * rx * s;
        m[0][2] -= wx * lx * cl;
        m[0][3] -= wx * lx * cr;
        m[1][2] -= wx * rx * cl;
        m[1][3] -= wx * rx * cr;
    }
    for (j, &(y, wy)) in rule.iter().enumerate() {
        let (ly, ry) = vals[j];
        let t: f64 = rule.iter().map(|&(x, wx)| wx / (d + y - x).powi(2)).sum();
        m[2][2] += wy * ly * ly * t;
        m[2][3] += wy * ly * ry * t;
        m[3][3] += wy * ry * ry * t;
    }
    for i in 0..4 {
        for j in 0..i {
            m[i][j] = m[j][i];
        }
    }
    m
}

/// Slobodetski double integral `∫∫_{I×I} |u(x) − u(y)|²/|x − y|²` as a matrix
/// over all vertex values (no `2π` factor).
fn interval_slobodetski(mesh: &Mesh1D, p: f64) -> DMatrix<f64> {
    let n = mesh.n_cells;
    let nv = n + 1;
    let mut q = DMatrix::zeros(nv, nv);
    let dsame = same_cell_constant(p);
    for k in 0..n {
        q[(k, k)] += dsame;
        q[(k + 1, k + 1)] += dsame;
        q[(k, k + 1)] -= dsame;
        q[(k + 1, k)] -= dsame;
    }
    if n >= 2 {
        let e = adjacent_block(p);
        // a = c1 − c0, b = c2 − c1; both orientations counted.
        let t = [[-1.0, 1.0, 0.0], [0.0, -1.0, 1.0]];
        let mut loc = [[0.0; 3]; 3];
        for (i, row) in loc.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                let mut acc = 0.0;
                for a in 0..2 {
                    for b in 0..2 {
                        acc += t[a][i] * e[a][b] * t[b][j];
                    }
                }
                *v = 2.0 * acc;
            }
        }
        for k in 0..n - 1 {
            for i in 0..3 {
                for j in 0..3 {
                    q[(k + i, k + j)] += loc[i][j];
                }
            }
        }
    }
    if n >= 3 {
        let rule = cell_rule(p);
        let vals: Vec<(f64, f64)> = rule.iter().map(|&(s, _)| shapes(p, s)).collect();
        let blocks = par::map_range(n - 2, |o| distant_block(&rule, &vals, (o + 2) as f64));
        for (o, blk) in blocks.iter().enumerate() {
            let d = o + 2;
            for k in 0..n - d {
                let idx = [k, k + 1, k + d, k + d + 1];
                for i in 0..4 {
                    for j in 0..4 {
                        q[(idx[i], idx[j])] += 2.0 * blk[i][j];
                    }
                }
            }
        }
    }
    symmetrize(&mut q);
    q
}

/// Exterior contribution of the zero extension across the chosen ends,
/// `2∫₀^T u²(1/x + 1/(T−x))` when both are taken, over vertices `1..n-1`
/// (both ends) or `1..=n` (left end only).
fn zero_extension_tails(mesh: &Mesh1D, p: f64, right: bool) -> DMatrix<f64> {
    let n = mesh.n_cells;
    let m = if right { n.saturating_sub(1) } else { n };
    let mut t = DMatrix::zeros(m, m);
    let rule = cell_rule(p);
    let nf = n as f64;
    for k in 0..n {
        let kf = k as f64;
        let mut loc = [[0.0; 2]; 2];
        for &(s, w) in &rule {
            let (l, r) = shapes(p, s);
            let mut wt = 1.0 / (kf + s);
            if right {
                wt += 1.0 / (nf - kf - s);
            }
            let wt = 2.0 * w * wt;
            let ph = [l, r];
            for a in 0..2 {
                for b in 0..2 {
                    loc[a][b] += wt * ph[a] * ph[b];
                }
            }
        }
        for a in 0..2 {
            for b in 0..2 {
                let (i, j) = (k + a, k + b);
                if i >= 1 && i <= m && j >= 1 && j <= m {
                    t[(i - 1, j - 1)] += loc[a][b];
                }
            }
        }
    }
    t
}

/// Interval seminorm `|u|²_{H^{1/2}(0,T)}` over all vertex values.
pub fn h_half_seminorm_gram(mesh: &Mesh1D, space: Space) -> NormGram {
    let p = space.peclet(mesh.step);
    let q = interval_slobodetski(mesh, p) / (2.0 * PI);
    let g = NormGram::new(NormTag::HHalf, q).with_param("tau", mesh.step);
    with_space(g, space)
}

/// Seminorm of the zero extension, `|u|²_{H^{1/2}(ℝ)}`, over interior vertices.
pub fn h_half_00_gram(mesh: &Mesh1D, space: Space) -> NormGram {
    let p = space.peclet(mesh.step);
    let q = restrict_interior(&interval_slobodetski(mesh, p)) + zero_extension_tails(mesh, p, true);
    let g = NormGram::new(NormTag::HHalf00, q / (2.0 * PI)).with_param("tau", mesh.step);
    with_space(g, space)
}

/// Seminorm of the extension by zero to `t < 0` only, restricted to `(−∞, T]`,
/// over vertices `1..=n`. Used for trajectories that start from 0 and run
/// up to a finite horizon.
pub fn h_half_left_zero_gram(mesh: &Mesh1D, space: Space) -> NormGram {
    let p = space.peclet(mesh.step);
    let full = interval_slobodetski(mesh, p);
    let n = mesh.n_cells;
    let q = full.view((1, 1), (n, n)).into_owned() + zero_extension_tails(mesh, p, false);
    let g = NormGram::new(NormTag::HHalf00, q / (2.0 * PI)).with_param("tau", mesh.step);
    with_space(g, space)
}

fn with_space(g: NormGram, space: Space) -> NormGram {
    match space {
        Space::Affine => g,
        Space::Upwind { alpha, beta } => g.with_param("alpha", alpha).with_param("beta", beta),
    }
}

/// `(∫uv, ∫u̇v̇)` Grams over all vertices.
pub fn mass_stiffness(mesh: &Mesh1D, space: Space) -> (DMatrix<f64>, DMatrix<f64>) {
    let tau = mesh.step;
    let (m, k) = match space {
        Space::Affine => (
            [[tau / 3.0, tau / 6.0], [tau / 6.0, tau / 3.0]],
            [[1.0 / tau, -1.0 / tau], [-1.0 / tau, 1.0 / tau]],
        ),
        Space::Upwind { alpha, beta } => upwind_gram(Peclet::new(alpha, beta, tau), tau),
    };
    let nv = mesh.n_vertices();
    let mut mm = DMatrix::zeros(nv, nv);
    let mut kk = DMatrix::zeros(nv, nv);
    for c in 0..mesh.n_cells {
        for a in 0..2 {
            for b in 0..2 {
                mm[(c + a, c + b)] += m[a][b];
                kk[(c + a, c + b)] += k[a][b];
            }
        }
    }
    (mm, kk)
}

/// L² Gram over all vertices.
pub fn l2_gram(mesh: &Mesh1D, space: Space) -> NormGram {
    NormGram::new(NormTag::L2, mass_stiffness(mesh, space).0)
}

/// `‖u‖²_{L²} + α‖u̇‖²_{L²}` over all vertices.
pub fn alpha_energy_gram(mesh: &Mesh1D, space: Space, alpha: f64) -> NormGram {
    let (m, k) = mass_stiffness(mesh, space);
    NormGram::new(NormTag::AlphaEnergy, m + k * alpha).with_param("alpha", alpha)
}

/// Flow-direction Grams `(H^{1/2} part incl. L², stiffness)` over interior
/// vertices, for the trial (`H^{1/2}_00`, affine) or test (interval, upwind) side.
fn flow_parts(mesh: &Mesh1D, alpha: f64, beta: f64, side: Side) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    match side {
        Side::Trial => {
            let (m, k) = mass_stiffness(mesh, Space::Affine);
            let q = h_half_00_gram(mesh, Space::Affine).matrix;
            (q, restrict_interior(&m), restrict_interior(&k))
        }
        Side::Test => {
            let space = Space::Upwind { alpha, beta };
            let (m, k) = mass_stiffness(mesh, space);
            let q = restrict_interior(&h_half_seminorm_gram(mesh, space).matrix);
            (q, restrict_interior(&m), restrict_interior(&k))
        }
    }
}

/// Sum-of-squares Gram of the theorem norms on a 1D mesh, over interior vertices.
///
/// Trial: `|u|²_{H^{1/2}_00} + ‖u‖² + α‖u̇‖²`. Test: `|v|²_{H^{1/2}(0,T)} + ‖v‖² + α‖v̇‖²`
/// on the upwinded space for `(α, β)`.
pub fn theorem_norm_gram_1d(mesh: &Mesh1D, alpha: f64, beta: f64, side: Side) -> NormGram {
    let (q, m, k) = flow_parts(mesh, alpha, beta, side);
    let tag = match side {
        Side::Trial => NormTag::TheoremTrial,
        Side::Test => NormTag::TheoremTest,
    };
    NormGram::new(tag, q + m + k * alpha)
        .with_param("alpha", alpha)
        .with_param("beta", beta)
        .with_param("tau", mesh.step)
}

/// 2D theorem norms over interior vertices in the grid's interior numbering:
/// `(Q + M_t) ⊗ M_y + α (K_t ⊗ M_y + M_t ⊗ K_y)`.
pub fn theorem_norm_gram_2d(mesh: &TensorMesh2D, alpha: f64, beta: f64, side: Side) -> NormGram {
    let (q, mt, kt) = flow_parts(&mesh.flow, alpha, beta, side);
    let (my, ky) = mass_stiffness(&mesh.transverse, Space::Affine);
    let (my, ky) = (restrict_interior(&my), restrict_interior(&ky));
    // Interior index is (j-1)(nf-1) + (i-1): transverse-major, so the flow
    // factor is the fast (right) Kronecker factor.
    let g = my.kronecker(&(&q + &mt)) + (my.kronecker(&kt) + ky.kronecker(&mt)) * alpha;
    let tag = match side {
        Side::Trial => NormTag::TheoremTrial,
        Side::Test => NormTag::TheoremTest,
    };
    NormGram::new(tag, g)
        .with_param("alpha", alpha)
        .with_param("beta", beta)
        .with_param("tau", mesh.flow.step)
        .with_param("sigma", mesh.transverse.step)
}

/// Dispatches to the 1D or 2D theorem norm.
pub fn theorem_norm_grams(
    mesh: &crate::assembly::Grid,
    alpha: f64,
    beta: f64,
    side: Side,
) -> Result<NormGram> {
    if !(alpha >= 0.0) {
        return Err(invalid("alpha must be non-negative"));
    }
    Ok(match mesh {
        crate::assembly::Grid::OneD(m) => theorem_norm_gram_1d(m, alpha, beta, side),
        crate::assembly::Grid::TwoD(m) => theorem_norm_gram_2d(m, alpha, beta, side),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::functions::PiecewiseAffine;
    use crate::analysis::hilbert::h_half_seminorm_sq;
    use crate::mesh::uniform_partition;

    #[test]
    fn constants_have_zero_interval_seminorm() {
        let m = uniform_partition(1.0, 7).unwrap();
        for space in [Space::Affine, Space::Upwind { alpha: 1e-3, beta: 1.0 }] {
            let g = h_half_seminorm_gram(&m, space);
            assert!(g.quad(&[2.5; 8]).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_extension_gram_matches_hilbert_pairing() {
        let m = uniform_partition(1.0, 9).unwrap();
        let g = h_half_00_gram(&m, Space::Affine);
        let vals = [0.3, -1.0, 0.7, 2.0, 0.1, -0.4, 1.1, 0.5];
        let u = PiecewiseAffine::from_interior(m, &vals).unwrap();
        let a = g.quad(&vals);
        let b = h_half_seminorm_sq(&u);
        assert!((a - b).abs() < 1e-10 * b, "{a} vs {b}");
    }

    #[test]
    fn upwind_gram_tends_to_affine_gram() {
        let m = uniform_partition(1.0, 6).unwrap();
        let a = h_half_seminorm_gram(&m, Space::Affine).matrix;
        let u = h_half_seminorm_gram(&m, Space::Upwind { alpha: 1e6, beta: 1.0 }).matrix;
        assert!((a - u).amax() < 1e-6);
    }

    #[test]
    fn theorem_grams_are_valid() {
        let m = uniform_partition(1.0, 8).unwrap();
        for side in [Side::Trial, Side::Test] {
            let g = theorem_norm_gram_1d(&m, 1e-3, 1.0, side);
            assert!(g.is_valid());
            assert!(g.min_eigenvalue() > 0.0);
        }
    }
}
