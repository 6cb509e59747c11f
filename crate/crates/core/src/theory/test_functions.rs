//! Candidate test functions built from a trial function.
//!
//! Trial and test fields are stored slice-wise: one column per transverse
//! degree of freedom, one row per flow vertex (end rows are zero).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::pairing::{flow_blocks, Transverse};
use crate::analysis::hilbert::HilbertTransform;
use crate::error::{invalid, Result};
use crate::mesh::Mesh1D;
use crate::quadrature::graded_rule;
use crate::upwind_basis::UpwindFunction;

/// Which construction to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RecipeMode {
    /// Projected Hilbert transform plus multiplier interpolant.
    #[default]
    Main,
    /// The `v₀ → v₃` pipeline.
    Appendix,
}

/// Parameters of the test-function construction. Unset fields take their
/// defaults: `λ = 4|log α|^{1/2}`, `α₀ = βT`, `κ = α₀/(2β)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct TestFunctionRecipe {
    pub lambda: Option<f64>,
    pub kappa: Option<f64>,
    pub alpha0: Option<f64>,
    #[serde(default)]
    pub mode: RecipeMode,
}

impl TestFunctionRecipe {
    pub fn validate(&self) -> Result<()> {
        if let Some(l) = self.lambda {
            if !(l >= 0.0) {
                return Err(invalid("lambda must be non-negative"));
            }
        }
        if let Some(k) = self.kappa {
            if !(k > 0.0) {
                return Err(invalid("kappa must be positive"));
            }
        }
        if let Some(a) = self.alpha0 {
            if !(a > 0.0) {
                return Err(invalid("alpha0 must be positive"));
            }
        }
        Ok(())
    }

    pub fn lambda(&self, alpha: f64) -> f64 {
        self.lambda.unwrap_or_else(|| 4.0 * alpha.ln().abs().sqrt())
    }

    pub fn alpha0(&self, beta: f64, extent: f64) -> f64 {
        self.alpha0.unwrap_or(beta * extent)
    }

    pub fn kappa(&self, beta: f64, extent: f64) -> f64 {
        self.kappa.unwrap_or_else(|| self.alpha0(beta, extent) / (2.0 * beta))
    }
}

/// Cell averages of `Hu` for one zero-extended slice.
pub fn projected_hilbert(mesh: &Mesh1D, u: &[f64]) -> Vec<f64> {
    let h = HilbertTransform::new(&mesh.vertices, u);
    (0..mesh.n_cells)
        .map(|k| {
            let (a, b) = mesh.cell(k);
            h.integral(a, b) / (b - a)
        })
        .collect()
}

/// Nodal values of the causal solution of `α v̇ + β v = β r` with `v(0) = 0`,
/// `r` piecewise constant.
pub fn causal_solve(mesh: &Mesh1D, rhs: &[f64], alpha: f64, beta: f64) -> Vec<f64> {
    let p = beta * mesh.step / alpha;
    let e = (-p).exp();
    let one_minus = -(-p).exp_m1();
    let mut v = Vec::with_capacity(rhs.len() + 1);
    let mut x = 0.0;
    v.push(x);
    for &r in rhs {
        x = e * x + one_minus * r;
        v.push(x);
    }
    v
}

/// `v_p` for one slice: `α v̇ + β v = β w̄ + c`, `v(0) = v(T) = 0`.
pub fn projected_hilbert_part(mesh: &Mesh1D, u: &[f64], alpha: f64, beta: f64) -> Vec<f64> {
    let wbar = projected_hilbert(mesh, u);
    let mut v0 = causal_solve(mesh, &wbar, alpha, beta);
    // Response to c = 1 is (1 − e^{−βt/α})/β, nonzero at T.
    let n = mesh.n_cells;
    let unit: Vec<f64> = mesh
        .vertices
        .iter()
        .map(|&t| -(-beta * t / alpha).exp_m1() / beta)
        .collect();
    let c = -v0[n] / unit[n];
    for (v, h) in v0.iter_mut().zip(&unit) {
        *v += c * h;
    }
    v0[n] = 0.0;
    v0
}

/// `v_i` for one slice: nodal values of `φ u` with `φ(t) = e^{−t/κ}`.
pub fn multiplier_part(mesh: &Mesh1D, u: &[f64], kappa: f64) -> Vec<f64> {
    mesh.vertices
        .iter()
        .zip(u)
        .map(|(&t, &x)| (-t / kappa).exp() * x)
        .collect()
}

/// Test field: nodal values of upwinded functions, one column per slice.
#[derive(Debug, Clone)]
pub struct TestField {
    pub mesh: Mesh1D,
    pub alpha: f64,
    pub beta: f64,
    pub nodal: DMatrix<f64>,
}

impl TestField {
    pub fn slice(&self, j: usize) -> UpwindFunction {
        UpwindFunction::new(
            self.mesh.clone(),
            self.nodal.column(j).iter().copied().collect(),
            self.alpha,
            self.beta,
        )
        .expect("one value per vertex")
    }
}

fn check_trial(mesh: &Mesh1D, u: &DMatrix<f64>) -> Result<()> {
    if u.nrows() != mesh.n_vertices() {
        return Err(invalid("trial slices need one row per flow vertex"));
    }
    let n = mesh.n_cells;
    if u.row(0).amax() != 0.0 || u.row(n).amax() != 0.0 {
        return Err(invalid("trial function must vanish at the flow extremities"));
    }
    Ok(())
}

fn per_slice(u: &DMatrix<f64>, f: impl Fn(&[f64]) -> Vec<f64>) -> DMatrix<f64> {
    let cols: Vec<DVector<f64>> = (0..u.ncols())
        .map(|j| {
            let s: Vec<f64> = u.column(j).iter().copied().collect();
            DVector::from_vec(f(&s))
        })
        .collect();
    DMatrix::from_columns(&cols)
}

/// `v = v_p + λ v_i`.
pub fn candidate_test_function_main(
    mesh: &Mesh1D,
    u: &DMatrix<f64>,
    alpha: f64,
    beta: f64,
    recipe: &TestFunctionRecipe,
) -> Result<TestField> {
    recipe.validate()?;
    check_trial(mesh, u)?;
    let lambda = recipe.lambda(alpha);
    let kappa = recipe.kappa(beta, mesh.length);
    let nodal = per_slice(u, |s| {
        let vp = projected_hilbert_part(mesh, s, alpha, beta);
        let vi = multiplier_part(mesh, s, kappa);
        vp.iter().zip(&vi).map(|(a, b)| a + lambda * b).collect()
    });
    Ok(TestField {
        mesh: mesh.clone(),
        alpha,
        beta,
        nodal,
    })
}

/// Intermediate stages of the `v₀ → v₃` pipeline.
#[derive(Debug, Clone)]
pub struct AppendixPipeline {
    /// Cell averages of `v₀ = Hu + λu`.
    pub v1: DMatrix<f64>,
    /// Nodal values of the causal solve.
    pub v2: TestField,
    /// `v₂` with the terminal correction on the last cell.
    pub v3: TestField,
}

/// Builds `v₁, v₂, v₃`.
pub fn candidate_test_function_appendix(
    mesh: &Mesh1D,
    u: &DMatrix<f64>,
    alpha: f64,
    beta: f64,
    lambda: f64,
) -> Result<AppendixPipeline> {
    check_trial(mesh, u)?;
    if !(lambda >= 0.0) {
        return Err(invalid("lambda must be non-negative"));
    }
    let v1 = per_slice(u, |s| {
        let h = projected_hilbert(mesh, s);
        h.iter()
            .zip(s.windows(2))
            .map(|(w, c)| w + lambda * 0.5 * (c[0] + c[1]))
            .collect()
    });
    let v2n = DMatrix::from_columns(
        &(0..v1.ncols())
            .map(|j| {
                let r: Vec<f64> = v1.column(j).iter().copied().collect();
                DVector::from_vec(causal_solve(mesh, &r, alpha, beta))
            })
            .collect::<Vec<_>>(),
    );
    let mut v3n = v2n.clone();
    v3n.row_mut(mesh.n_cells).fill(0.0);
    let field = |nodal| TestField {
        mesh: mesh.clone(),
        alpha,
        beta,
        nodal,
    };
    Ok(AppendixPipeline {
        v1,
        v2: field(v2n),
        v3: field(v3n),
    })
}

/// The four terms of the appendix estimate and the full form they add up to.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AppendixDecomposition {
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub i4: f64,
    /// `∫⟨u̇, αv̇₃ + βv₃⟩ + ∫a^α(u, v₃)` from the element matrices.
    pub full: f64,
    pub alpha: f64,
    pub tau: f64,
    pub sigma: f64,
    pub lambda: f64,
}

impl AppendixDecomposition {
    pub fn sum(&self) -> f64 {
        self.i1 + self.i2 + self.i3 + self.i4
    }
}

/// Integrates `I₁..I₄` over their time ranges with layer-resolving quadrature.
pub fn appendix_term_decomposition(
    mesh: &Mesh1D,
    transverse: &Transverse,
    u: &DMatrix<f64>,
    alpha: f64,
    beta: f64,
    lambda: f64,
) -> Result<AppendixDecomposition> {
    if u.ncols() != transverse.dim() {
        return Err(invalid("trial slices do not match the transverse space"));
    }
    let pipe = candidate_test_function_appendix(mesh, u, alpha, beta, lambda)?;
    let ny = u.ncols();
    let my = &transverse.mass;
    let ay = transverse.energy(alpha);
    let v2: Vec<UpwindFunction> = (0..ny).map(|j| pipe.v2.slice(j)).collect();
    let v3: Vec<UpwindFunction> = (0..ny).map(|j| pipe.v3.slice(j)).collect();
    let n = mesh.n_cells;
    let tau = mesh.step;
    let width = alpha / beta;
    let (mut i1, mut i2, mut i3, mut i4) = (0.0, 0.0, 0.0, 0.0);
    let mut ut = DVector::zeros(ny);
    let mut udot = DVector::zeros(ny);
    let mut a = DVector::zeros(ny);
    let mut b = DVector::zeros(ny);
    for k in 0..n {
        let (t0, t1) = mesh.cell(k);
        let last = k + 1 == n;
        for (t, w) in graded_rule(t0, t1, width, 20) {
            let s = (t - t0) / tau;
            for j in 0..ny {
                ut[j] = u[(k, j)] * (1.0 - s) + u[(k + 1, j)] * s;
                udot[j] = (u[(k + 1, j)] - u[(k, j)]) / tau;
            }
            if last {
                for j in 0..ny {
                    a[j] = alpha * v3[j].derivative(t) + beta * v3[j].eval(t);
                    b[j] = v3[j].eval(t);
                }
                i2 += w * udot.dot(&(my * &a));
                i4 += w * ut.dot(&(&ay * &b));
            } else {
                for j in 0..ny {
                    a[j] = beta * pipe.v1[(k, j)];
                    b[j] = v2[j].eval(t);
                }
                i1 += w * udot.dot(&(my * &a));
                i3 += w * ut.dot(&(&ay * &b));
            }
        }
    }
    let (c, m) = flow_blocks(mesh, alpha, beta);
    let v = &pipe.v3.nodal;
    let full = (v.transpose() * &c * u).component_mul(my).sum()
        + (v.transpose() * &m * u).component_mul(&ay).sum();
    Ok(AppendixDecomposition {
        i1,
        i2,
        i3,
        i4,
        full,
        alpha,
        tau,
        sigma: transverse.sigma,
        lambda,
    })
}

/// `b^α(u, v)` for one affine slice `u` and one upwinded `v`, from element matrices.
pub fn flow_form(mesh: &Mesh1D, u: &[f64], v: &[f64], alpha: f64, beta: f64) -> f64 {
    let (c, _) = flow_blocks(mesh, alpha, beta);
    let uv = DVector::from_column_slice(u);
    let vv = DVector::from_column_slice(v);
    vv.dot(&(c * uv))
}

/// `b^α(ψ v, v) = ∫ (ψv)˙(αv̇ + βv)` with `ψ = e^{t/κ}`, by quadrature.
pub fn multiplier_form(v: &UpwindFunction, kappa: f64) -> f64 {
    let mesh = &v.mesh;
    let width = v.alpha / v.beta.max(1e-300);
    (0..mesh.n_cells)
        .map(|k| {
            let (a, b) = mesh.cell(k);
            graded_rule(a, b, width, 20)
                .into_iter()
                .map(|(t, w)| {
                    let psi = (t / kappa).exp();
                    let d = psi * (v.derivative(t) + v.eval(t) / kappa);
                    w * d * (v.alpha * v.derivative(t) + v.beta * v.eval(t))
                })
                .sum::<f64>()
        })
        .sum()
}
