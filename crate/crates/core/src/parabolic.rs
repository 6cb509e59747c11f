//! Crank–Nicolson discretization of `⟨u̇, v⟩ + a^α(u, v) = ⟨f, v⟩`, `u(0) = 0`,
//! with `a^α(u, v) = ∫uv + α∫u'v'` on P1 functions over a uniform partition of `V`.

use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::analysis::gram::{h_half_left_zero_gram, h_half_seminorm_gram, mass_stiffness, restrict_interior, Space};
use crate::analysis::hilbert::{hilbert_gram, HilbertTransform};
use crate::analysis::infsup::{cholesky, generalized_eigen};
use crate::error::{invalid, Result};
use crate::mesh::{uniform_partition, Mesh1D};
use crate::par;
use crate::quadrature::GaussRule;

/// Source `f(t, x)`.
pub type SourceFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Abstract parabolic problem on `]0, T[ × V`.
#[derive(Clone)]
pub struct ParabolicProblem {
    /// Partition of `V` with step `σ`.
    pub space: Mesh1D,
    pub alpha: f64,
    pub horizon: f64,
    pub source: SourceFn,
}

impl std::fmt::Debug for ParabolicProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ParabolicProblem")
            .field("sigma", &self.space.step)
            .field("alpha", &self.alpha)
            .field("horizon", &self.horizon)
            .finish_non_exhaustive()
    }
}

/// Interior mass and stiffness of `X_σ`.
#[derive(Debug, Clone)]
pub struct SpatialForms {
    pub mass: DMatrix<f64>,
    pub stiffness: DMatrix<f64>,
}

impl SpatialForms {
    /// Matrix of `a^α`.
    pub fn energy(&self, alpha: f64) -> DMatrix<f64> {
        &self.mass + &self.stiffness * alpha
    }
}

impl ParabolicProblem {
    pub fn new(space: Mesh1D, alpha: f64, horizon: f64, source: SourceFn) -> Result<Self> {
        if !(alpha > 0.0 && horizon > 0.0) {
            return Err(invalid("the parabolic problem needs alpha > 0 and T > 0"));
        }
        if space.n_cells < 2 {
            return Err(invalid("the spatial mesh needs at least one interior vertex"));
        }
        Ok(Self {
            space,
            alpha,
            horizon,
            source,
        })
    }

    /// Unit interval in space with `n` cells.
    pub fn on_unit_interval(n: usize, alpha: f64, horizon: f64, source: SourceFn) -> Result<Self> {
        Self::new(uniform_partition(1.0, n)?, alpha, horizon, source)
    }

    pub fn forms(&self) -> SpatialForms {
        let (m, k) = mass_stiffness(&self.space, Space::Affine);
        SpatialForms {
            mass: restrict_interior(&m),
            stiffness: restrict_interior(&k),
        }
    }

    /// `(1/τ)∫_{t0}^{t1} ∫_V f φ_j` for every interior hat `φ_j`.
    pub fn averaged_load(&self, t0: f64, t1: f64) -> DVector<f64> {
        let rule = GaussRule::get(6);
        let n = self.space.n_cells;
        let mut b = DVector::zeros(n - 1);
        for (t, wt) in rule.mapped(t0, t1) {
            for c in 0..n {
                let (x0, x1) = self.space.cell(c);
                for (x, wx) in rule.mapped(x0, x1) {
                    let f = (self.source)(t, x) * wt * wx;
                    let s = (x - x0) / (x1 - x0);
                    if c >= 1 {
                        b[c - 1] += f * (1.0 - s);
                    }
                    if c + 1 < n {
                        b[c] += f * s;
                    }
                }
            }
        }
        b / (t1 - t0)
    }
}

/// Time-piecewise-affine trajectory with values in `X_σ` (interior coefficients).
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub step: f64,
    /// `u_i`, `i = 0..=n`.
    pub states: Vec<DVector<f64>>,
    /// `f_{i+1/2}` as interior load vectors, `i = 0..n`.
    pub loads: Vec<DVector<f64>>,
}

impl Trajectory {
    pub fn n_steps(&self) -> usize {
        self.states.len() - 1
    }

    /// Coefficients as a `(n_space, n_steps + 1)` matrix, one column per time node.
    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_columns(&self.states)
    }
}

struct Stepper {
    lhs: Cholesky<f64, Dyn>,
    rhs: DMatrix<f64>,
}

impl Stepper {
    fn new(forms: &SpatialForms, alpha: f64, tau: f64) -> Result<Self> {
        let a = forms.energy(alpha) * 0.5;
        let m = &forms.mass / tau;
        Ok(Self {
            lhs: cholesky(&(&m + &a), "crank_nicolson")?,
            rhs: m - a,
        })
    }

    fn step(&self, u: &DVector<f64>, load: &DVector<f64>) -> DVector<f64> {
        self.lhs.solve(&(&self.rhs * u + load))
    }
}

/// Crank–Nicolson from `u(0) = 0` with time-averaged loads.
pub fn crank_nicolson_solve(problem: &ParabolicProblem, n_steps: usize) -> Result<Trajectory> {
    let u0 = DVector::zeros(problem.space.n_cells - 1);
    crank_nicolson_from(problem, u0, n_steps)
}

/// Crank–Nicolson from an arbitrary initial state.
pub fn crank_nicolson_from(problem: &ParabolicProblem, u0: DVector<f64>, n_steps: usize) -> Result<Trajectory> {
    if n_steps == 0 {
        return Err(invalid("at least one time step is required"));
    }
    if u0.len() != problem.space.n_cells - 1 {
        return Err(invalid("initial state must have one value per interior vertex"));
    }
    let tau = problem.horizon / n_steps as f64;
    let stepper = Stepper::new(&problem.forms(), problem.alpha, tau)?;
    let loads: Vec<DVector<f64>> = par::map_range(n_steps, |i| {
        problem.averaged_load(i as f64 * tau, (i + 1) as f64 * tau)
    });
    let mut states = Vec::with_capacity(n_steps + 1);
    states.push(u0);
    for load in &loads {
        let next = stepper.step(states.last().unwrap(), load);
        states.push(next);
    }
    Ok(Trajectory {
        step: tau,
        states,
        loads,
    })
}

/// Relative residual of `∫⟨u̇, v⟩ + ∫a^α(ū, v) − ∫⟨f̄, v⟩` for a test function
/// `v(t, x) = Σ_j v_j(t) φ_j(x)` whose coefficients are arbitrary functions of time.
///
/// `ū` and `f̄` are cellwise time averages, so the identity holds for every time
/// dependence of `v`. Time integrals of `v` use a 24-point Gauss rule per step.
pub fn reformulation_residual<V>(problem: &ParabolicProblem, traj: &Trajectory, v: V) -> f64
where
    V: Fn(f64, usize) -> f64,
{
    let forms = problem.forms();
    let a = forms.energy(problem.alpha);
    let rule = GaussRule::get(24);
    let tau = traj.step;
    let dim = forms.mass.nrows();
    let (mut total, mut scale) = (0.0, 0.0);
    for (i, load) in traj.loads.iter().enumerate() {
        let (t0, t1) = (i as f64 * tau, (i + 1) as f64 * tau);
        let vbar = DVector::from_fn(dim, |j, _| rule.integrate(t0, t1, |t| v(t, j)));
        let du = (&traj.states[i + 1] - &traj.states[i]) / tau;
        let mid = (&traj.states[i + 1] + &traj.states[i]) * 0.5;
        let terms = [(&forms.mass * du).dot(&vbar), (&a * mid).dot(&vbar), -load.dot(&vbar)];
        total += terms.iter().sum::<f64>();
        scale += terms.iter().map(|x| x.abs()).sum::<f64>();
    }
    if scale == 0.0 {
        0.0
    } else {
        total.abs() / scale
    }
}

/// Time Grams on the uniform partition of `[0, T]` with `n` steps.
struct TimeGrams {
    /// Left-zero H^{1/2} Gram over nodes `1..=n`.
    h_half_00: DMatrix<f64>,
    /// Interval H^{1/2} seminorm over nodes `0..=n`.
    h_half: DMatrix<f64>,
    /// Mass over nodes `0..=n`.
    mass: DMatrix<f64>,
}

impl TimeGrams {
    fn new(horizon: f64, n: usize) -> Result<Self> {
        let mesh = uniform_partition(horizon, n)?;
        Ok(Self {
            h_half_00: h_half_left_zero_gram(&mesh, Space::Affine).matrix,
            h_half: h_half_seminorm_gram(&mesh, Space::Affine).matrix,
            mass: mass_stiffness(&mesh, Space::Affine).0,
        })
    }
}

/// `tr(S U T Uᵀ)` for a space form `S` and a time form `T`.
fn tensor_form(space: &DMatrix<f64>, time: &DMatrix<f64>, u: &DMatrix<f64>) -> f64 {
    (space * u * time).dot(u)
}

/// `‖u‖²_{Y₀₀} = |u|²_{H^{1/2}(O)} + ‖u‖²_{L²(X^α)}` of a trajectory starting from 0.
pub fn y00_norm_sq(problem: &ParabolicProblem, traj: &Trajectory) -> Result<f64> {
    let n = traj.n_steps();
    let grams = TimeGrams::new(problem.horizon, n)?;
    Ok(y00_with(problem, &grams, traj))
}

fn y00_with(problem: &ParabolicProblem, grams: &TimeGrams, traj: &Trajectory) -> f64 {
    let forms = problem.forms();
    let u = traj.matrix();
    let n = traj.n_steps();
    let tail = u.columns(1, n).into_owned();
    tensor_form(&forms.mass, &grams.h_half_00, &tail) + tensor_form(&forms.energy(problem.alpha), &grams.mass, &u)
}

/// Dual norm of `f̄` over the discrete space of time-piecewise-affine functions
/// with values in `X_σ`, normed by `|v|²_{H^{1/2}(0,T;O)} + ‖v‖²_{L²(X^α)}`.
///
/// The Gram `Q ⊗ M + M_t ⊗ A` is block diagonalized by the generalized
/// eigenvectors of `A w = μ M w`, leaving one time system per spatial mode.
pub fn discrete_dual_norm_sq(problem: &ParabolicProblem, traj: &Trajectory) -> Result<f64> {
    let grams = TimeGrams::new(problem.horizon, traj.n_steps())?;
    dual_with(problem, &grams, traj)
}

fn dual_with(problem: &ParabolicProblem, grams: &TimeGrams, traj: &Trajectory) -> Result<f64> {
    let forms = problem.forms();
    let (mu, w) = generalized_eigen(&forms.energy(problem.alpha), &forms.mass)?;
    let n = traj.n_steps();
    let tau = traj.step;
    // Functional on time node k: ∫θ_k f̄ = (τ/2)(f̄_{k-1/2} + f̄_{k+1/2}).
    let dim = forms.mass.nrows();
    let mut rhs = DMatrix::zeros(dim, n + 1);
    for (i, load) in traj.loads.iter().enumerate() {
        for k in [i, i + 1] {
            let mut col = rhs.column_mut(k);
            col += load * (0.5 * tau);
        }
    }
    let modal = w.transpose() * rhs;
    let parts = par::map_range(dim, |k| -> Result<f64> {
        let g = &grams.h_half + &grams.mass * mu[k];
        let f = modal.row(k).transpose();
        let ch = cholesky(&g, "dual_time_gram")?;
        Ok(f.dot(&ch.solve(&f)))
    });
    parts.into_iter().sum()
}

/// `‖u‖_{Y₀₀} / ‖f̄‖_{(Y^α)'}`, with `0/0` reported as 0.
pub fn cn_stability_ratio(problem: &ParabolicProblem, n_steps: usize) -> Result<StabilityPoint> {
    let traj = crank_nicolson_solve(problem, n_steps)?;
    let grams = TimeGrams::new(problem.horizon, n_steps)?;
    let num = y00_with(problem, &grams, &traj);
    let den = dual_with(problem, &grams, &traj)?;
    let ratio = if den == 0.0 { 0.0 } else { (num / den).sqrt() };
    let residual = reformulation_residual(problem, &traj, oscillating_test);
    Ok(StabilityPoint {
        alpha: problem.alpha,
        tau: traj.step,
        sigma: problem.space.step,
        ratio,
        residual,
    })
}

/// Non-polynomial test coefficients used for the reformulation check.
fn oscillating_test(t: f64, j: usize) -> f64 {
    (7.0 * t + 0.9 * j as f64).sin() * t.exp() + (t * t + 0.1).sqrt()
}

/// One point of the stability sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityPoint {
    pub alpha: f64,
    pub tau: f64,
    pub sigma: f64,
    pub ratio: f64,
    /// Relative residual of the time-continuous reformulation.
    pub residual: f64,
}

/// Ratio over every `(α, τ = σ)` with `τ = 1/n`, on `]0, 1[ × ]0, 1[`.
pub fn stability_sweep(alphas: &[f64], cells: &[usize], source: SourceFn) -> Result<Vec<StabilityPoint>> {
    let grid: Vec<(f64, usize)> = alphas
        .iter()
        .flat_map(|&a| cells.iter().map(move |&n| (a, n)))
        .collect();
    par::map_slice(&grid, |&(alpha, n)| {
        let problem = ParabolicProblem::on_unit_interval(n, alpha, 1.0, source.clone())?;
        cn_stability_ratio(&problem, n)
    })
    .into_iter()
    .collect()
}

/// Default sweep source.
pub fn default_source() -> SourceFn {
    Arc::new(|t, x| 1.0 + (3.0 * t).cos() * (std::f64::consts::PI * x).sin())
}

/// `u*(t, x) = sin(πx)(1 − e^{−t})` and its source for `a^α`.
pub fn manufactured(alpha: f64) -> (SourceFn, impl Fn(f64, f64) -> f64 + Copy) {
    use std::f64::consts::PI;
    let exact = |t: f64, x: f64| (PI * x).sin() * -(-t).exp_m1();
    let f: SourceFn = Arc::new(move |t, x| (PI * x).sin() * ((-t).exp() + (1.0 + alpha * PI * PI) * -(-t).exp_m1()));
    (f, exact)
}

/// `(∫_0^T ‖u_h − u*‖²_{L²(V)})^{1/2}` by tensor Gauss quadrature.
pub fn l2l2_error<E: Fn(f64, f64) -> f64>(problem: &ParabolicProblem, traj: &Trajectory, exact: E) -> f64 {
    let rule = GaussRule::get(5);
    let n = problem.space.n_cells;
    let tau = traj.step;
    let mut s = 0.0;
    for i in 0..traj.n_steps() {
        let (t0, t1) = (i as f64 * tau, (i + 1) as f64 * tau);
        for (t, wt) in rule.mapped(t0, t1) {
            let th = (t - t0) / tau;
            let u = &traj.states[i] * (1.0 - th) + &traj.states[i + 1] * th;
            let at = |k: usize| if k == 0 || k == n { 0.0 } else { u[k - 1] };
            for c in 0..n {
                let (x0, x1) = problem.space.cell(c);
                for (x, wx) in rule.mapped(x0, x1) {
                    let sx = (x - x0) / (x1 - x0);
                    let uh = at(c) * (1.0 - sx) + at(c + 1) * sx;
                    s += wt * wx * (uh - exact(t, x)).powi(2);
                }
            }
        }
    }
    s.sqrt()
}

/// Largest ratio `‖u_{i+1}‖₀ / ‖u_i‖₀` along a source-free run.
pub fn energy_decay_ratio(problem: &ParabolicProblem, u0: DVector<f64>, n_steps: usize) -> Result<f64> {
    let free = ParabolicProblem {
        source: Arc::new(|_, _| 0.0),
        ..problem.clone()
    };
    let traj = crank_nicolson_from(&free, u0, n_steps)?;
    let m = free.forms().mass;
    let norms: Vec<f64> = traj.states.iter().map(|u| u.dot(&(&m * u)).sqrt()).collect();
    Ok(norms
        .windows(2)
        .filter(|w| w[0] > 0.0)
        .map(|w| w[1] / w[0])
        .fold(0.0, f64::max))
}

/// Constant of `‖u‖_α ≤ C (1 + α^{1/2}σ^{-1}) ‖u‖₀` on `X_σ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InverseInequality {
    /// Exact value from the largest generalized eigenvalue.
    pub constant: f64,
    /// Largest value seen over random `u`.
    pub sampled: f64,
}

pub fn inverse_inequality<R: Rng>(space: &Mesh1D, alpha: f64, samples: usize, rng: &mut R) -> Result<InverseInequality> {
    let (m, k) = mass_stiffness(space, Space::Affine);
    let (m, k) = (restrict_interior(&m), restrict_interior(&k));
    let a = &m + &k * alpha;
    let (vals, _) = generalized_eigen(&a, &m)?;
    let scale = 1.0 + alpha.sqrt() / space.step;
    let constant = vals.last().copied().unwrap_or(0.0).sqrt() / scale;
    let sampled = (0..samples)
        .map(|_| {
            let u = DVector::from_fn(m.nrows(), |_, _| rng.sample::<f64, _>(StandardNormal));
            (u.dot(&(&a * &u)) / u.dot(&(&m * &u))).sqrt() / scale
        })
        .fold(0.0, f64::max);
    Ok(InverseInequality { constant, sampled })
}

/// Lower bound of `∫⟨u̇, v⟩ + ∫a^α(ū, v)` with `v = Hu + λu` (Hilbert transform
/// in time), relative to `‖u‖²_{Y₀₀}`, over trajectories vanishing at `t = 0`
/// and `t = T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CombinedLowerBound {
    pub lambda: f64,
    /// Smallest eigenvalue of the symmetrized form against the norm.
    pub exact: f64,
    /// Smallest ratio over random trajectories.
    pub sampled: f64,
}

pub fn combined_lower_bound<R: Rng>(
    problem: &ParabolicProblem,
    n_steps: usize,
    lambda: f64,
    samples: usize,
    rng: &mut R,
) -> Result<CombinedLowerBound> {
    if n_steps < 2 {
        return Err(invalid("at least two time steps are required"));
    }
    let forms = problem.forms();
    let a = forms.energy(problem.alpha);
    let tmesh = uniform_partition(problem.horizon, n_steps)?;
    let tau = tmesh.step;
    let nodes = &tmesh.vertices;
    let nt = n_steps - 1;
    // ∫θ̇_a Hθ_b over interior time hats.
    let gh = hilbert_gram(nodes);
    // ∫a(ū, Hθ_b): ū on cell i is the mean of its end values.
    let hat = |b: usize| {
        let mut vals = vec![0.0; n_steps + 1];
        vals[b + 1] = 1.0;
        HilbertTransform::new(nodes, &vals)
    };
    let mut pbar = DMatrix::zeros(nt, nt);
    for b in 0..nt {
        let h = hat(b);
        for i in 0..n_steps {
            let cell = h.integral(nodes[i], nodes[i + 1]);
            for node in [i, i + 1] {
                if node >= 1 && node <= nt {
                    pbar[(node - 1, b)] += 0.5 * cell;
                }
            }
        }
    }
    // ∫a(ū, u) = τ Σ a(ū_i, ū_i).
    let mut avg = DMatrix::zeros(nt, nt);
    for i in 0..n_steps {
        for p in [i, i + 1] {
            for q in [i, i + 1] {
                if (1..=nt).contains(&p) && (1..=nt).contains(&q) {
                    avg[(p - 1, q - 1)] += 0.25 * tau;
                }
            }
        }
    }
    let (mt, _) = mass_stiffness(&tmesh, Space::Affine);
    let mt = restrict_interior(&mt);
    // Coefficient vectors are time-major: index = t * n_space + x.
    let form = gh.kronecker(&forms.mass) + pbar.kronecker(&a) + avg.kronecker(&a) * lambda;
    let norm = gh.kronecker(&forms.mass) + mt.kronecker(&a);
    let sym = (&form + form.transpose()) * 0.5;
    let (vals, _) = generalized_eigen(&sym, &norm)?;
    let exact = vals[0];
    let sampled = (0..samples)
        .map(|_| {
            let u = DVector::from_fn(form.nrows(), |_, _| rng.sample::<f64, _>(StandardNormal));
            u.dot(&(&form * &u)) / u.dot(&(&norm * &u))
        })
        .fold(f64::INFINITY, f64::min);
    Ok(CombinedLowerBound { lambda, exact, sampled })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn zero_source() -> SourceFn {
        Arc::new(|_, _| 0.0)
    }

    #[test]
    fn zero_data_gives_zero_solution_and_ratio() {
        let p = ParabolicProblem::on_unit_interval(8, 0.01, 1.0, zero_source()).unwrap();
        let traj = crank_nicolson_solve(&p, 8).unwrap();
        assert!(traj.states.iter().all(|u| u.amax() == 0.0));
        assert_eq!(cn_stability_ratio(&p, 8).unwrap().ratio, 0.0);
    }

    #[test]
    fn reformulation_holds_for_nonpolynomial_tests() {
        let p = ParabolicProblem::on_unit_interval(10, 0.03, 1.0, default_source()).unwrap();
        let traj = crank_nicolson_solve(&p, 7).unwrap();
        let r = reformulation_residual(&p, &traj, |t, j| (t * (j as f64 + 1.0)).cos() / (1.0 + t));
        assert!(r < 1e-12, "{r}");
    }

    #[test]
    fn manufactured_solution_converges_at_second_order() {
        let alpha = 0.05;
        let (f, exact) = manufactured(alpha);
        let errs: Vec<f64> = [8, 16, 32]
            .iter()
            .map(|&n| {
                let p = ParabolicProblem::on_unit_interval(n, alpha, 1.0, f.clone()).unwrap();
                let traj = crank_nicolson_solve(&p, n).unwrap();
                l2l2_error(&p, &traj, exact)
            })
            .collect();
        for w in errs.windows(2) {
            let rate = (w[0] / w[1]).log2();
            assert!(rate > 1.8, "{errs:?}");
        }
    }

    #[test]
    fn source_free_runs_dissipate() {
        let p = ParabolicProblem::on_unit_interval(16, 1e-3, 1.0, zero_source()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u0 = DVector::from_fn(15, |_, _| rng.sample::<f64, _>(StandardNormal));
        assert!(energy_decay_ratio(&p, u0, 40).unwrap() <= 1.0);
    }

    #[test]
    fn dual_norm_matches_dense_riesz_map() {
        let p = ParabolicProblem::on_unit_interval(5, 0.02, 1.0, default_source()).unwrap();
        let traj = crank_nicolson_solve(&p, 4).unwrap();
        let grams = TimeGrams::new(1.0, 4).unwrap();
        let forms = p.forms();
        let g = grams.h_half.kronecker(&forms.mass) + grams.mass.kronecker(&forms.energy(0.02));
        let mut f = DVector::zeros(g.nrows());
        for (i, load) in traj.loads.iter().enumerate() {
            for k in [i, i + 1] {
                for j in 0..4 {
                    f[k * 4 + j] += 0.125 * load[j];
                }
            }
        }
        let dense = f.dot(&g.clone().cholesky().unwrap().solve(&f));
        let fast = discrete_dual_norm_sq(&p, &traj).unwrap();
        assert!((dense - fast).abs() < 1e-12 * dense);
    }

    #[test]
    fn combined_test_function_is_coercive() {
        let p = ParabolicProblem::on_unit_interval(8, 0.01, 1.0, zero_source()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let b = combined_lower_bound(&p, 12, 2.0, 20, &mut rng).unwrap();
        assert!(b.exact > 0.0 && b.sampled >= b.exact - 1e-12, "{b:?}");
    }
}
