//! Measured versions of the operator estimates behind the stability proofs.
//!
//! Each verifier sweeps one parameter, measures the best constant in the
//! estimate at every grid point (exact generalized eigenvalues where the
//! estimate is a ratio of quadratic forms, otherwise the maximum over random
//! and adversarial inputs), and fits the claimed growth law.

mod appendix;
mod operators;
mod upwind;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::fit::{fit_law, ClaimedLaw, LawFit, SLOPE_TOLERANCE, TRANSFER_SLACK};
use crate::analysis::infsup::cholesky;
use crate::elements::{upwind_shape, Node, Peclet};
use crate::error::{invalid, Error, Result};
use crate::par;
use crate::quadrature::graded_rule;

/// Supported verifier ids.
pub const PROPOSITION_IDS: [&str; 17] = [
    "P3.1", "P3.2", "P3.3", "C3.4", "P3.5", "P3.6", "P3.7-L2", "P3.7-err", "P3.7-Φ", "P3.8", "P3.9", "P3.10",
    "P3.11", "L2.3", "PA.1", "PA.2", "PA.4",
];

/// Options shared by all verifiers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Random inputs per grid point, on top of the deterministic adversaries.
    pub samples: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { seed: 2016, samples: 24 }
    }
}

/// Outcome of one verifier.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PropositionReport {
    pub id: String,
    pub params: Vec<BTreeMap<String, f64>>,
    pub measured: Vec<f64>,
    /// Claimed growth factor at each grid point.
    pub claimed: Vec<f64>,
    pub claimed_law: String,
    pub fitted_constant: f64,
    pub slope: f64,
    pub slope_full: f64,
    pub transfer_ratio: f64,
    pub slope_tolerance: f64,
    pub transfer_slack: f64,
    /// Checks beyond the growth-law fit, with their outcome.
    pub checks: BTreeMap<String, bool>,
    pub notes: Vec<String>,
    pub pass: bool,
}

impl PropositionReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// One measured grid point.
#[derive(Debug, Clone)]
pub(crate) struct Point {
    pub params: BTreeMap<String, f64>,
    /// Asymptotic variable (grows toward the limit of interest).
    pub x: f64,
    pub measured: f64,
    pub claimed: f64,
}

impl Point {
    pub fn new(params: &[(&str, f64)], x: f64, measured: f64, claimed: f64) -> Self {
        Self {
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            x,
            measured,
            claimed,
        }
    }
}

/// Sweep result before fitting: independent groups, each ordered from mild to asymptotic.
pub(crate) struct Sweep {
    pub groups: Vec<Vec<Point>>,
    pub law: ClaimedLaw,
    pub law_text: &'static str,
    pub checks: BTreeMap<String, bool>,
    pub notes: Vec<String>,
}

impl Sweep {
    pub fn new(law: ClaimedLaw, law_text: &'static str, groups: Vec<Vec<Point>>) -> Self {
        Self {
            groups,
            law,
            law_text,
            checks: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub fn check(mut self, name: &str, ok: bool) -> Self {
        self.checks.insert(name.to_string(), ok);
        self
    }

    pub fn note(mut self, text: impl Into<String>) -> Self {
        self.notes.push(text.into());
        self
    }

    fn into_report(self, id: &str) -> PropositionReport {
        let fits: Vec<LawFit> = self
            .groups
            .iter()
            .map(|g| {
                let x: Vec<f64> = g.iter().map(|p| p.x).collect();
                let m: Vec<f64> = g.iter().map(|p| p.measured).collect();
                let c: Vec<f64> = g.iter().map(|p| p.claimed).collect();
                fit_law(&x, &m, &c, self.law)
            })
            .collect();
        let worst = |f: fn(&LawFit) -> f64| fits.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        let points: Vec<&Point> = self.groups.iter().flatten().collect();
        let pass = fits.iter().all(|f| f.pass) && self.checks.values().all(|&ok| ok);
        PropositionReport {
            id: id.to_string(),
            params: points.iter().map(|p| p.params.clone()).collect(),
            measured: points.iter().map(|p| p.measured).collect(),
            claimed: points.iter().map(|p| p.claimed).collect(),
            claimed_law: self.law_text.to_string(),
            fitted_constant: worst(|f| f.fitted_constant),
            slope: worst(|f| f.slope),
            slope_full: worst(|f| f.slope_full),
            transfer_ratio: worst(|f| f.transfer_ratio),
            slope_tolerance: SLOPE_TOLERANCE,
            transfer_slack: TRANSFER_SLACK,
            checks: self.checks,
            notes: self.notes,
            pass,
        }
    }
}

/// Runs the verifier `id` on its default grid.
pub fn verify_proposition(id: &str, opts: &VerifyOptions) -> Result<PropositionReport> {
    let sweep = match canonical_id(id)? {
        "P3.1" => operators::projection_to_weak(opts)?,
        "P3.2" => operators::weak_embedding(opts)?,
        "P3.3" => operators::smoothing_gain(opts)?,
        "C3.4" => operators::composed_smoothing(opts)?,
        "P3.5" => operators::smoothed_energy(opts)?,
        "P3.6" => operators::sup_by_alpha_norm(opts)?,
        "P3.7-L2" => upwind::interpolant_l2(opts)?,
        "P3.7-err" => upwind::interpolant_error(opts)?,
        "P3.7-Φ" => upwind::interpolant_energy(opts)?,
        "P3.8" => upwind::interpolant_weak(opts)?,
        "P3.9" => operators::three_term_split(opts)?,
        "P3.10" => upwind::interpolant_alpha_energy(opts)?,
        "P3.11" => upwind::interpolant_half(opts)?,
        "L2.3" => appendix::averaged_equivalence(opts)?,
        "PA.1" => appendix::sup_by_half_norm(opts)?,
        "PA.2" => appendix::hilbert_sup(opts)?,
        "PA.4" => appendix::smoothing_defect(opts)?,
        _ => unreachable!("canonical ids are exhaustive"),
    };
    Ok(sweep.into_report(canonical_id(id)?))
}

/// Runs every verifier.
pub fn verify_all(opts: &VerifyOptions) -> Result<Vec<PropositionReport>> {
    PROPOSITION_IDS.iter().map(|id| verify_proposition(id, opts)).collect()
}

fn canonical_id(id: &str) -> Result<&'static str> {
    let alias = match id {
        "P3.7-Phi" | "P3.7-phi" => "P3.7-Φ",
        other => other,
    };
    PROPOSITION_IDS
        .iter()
        .copied()
        .find(|&k| k == alias)
        .ok_or_else(|| Error::UnknownProposition {
            id: id.to_string(),
            supported: PROPOSITION_IDS.join(", "),
        })
}

/// Deterministic per-point seed: FNV-1a over the id, base seed and parameter bits.
pub(crate) fn point_rng(opts: &VerifyOptions, tag: &str, params: &[f64]) -> ChaCha8Rng {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |b: u8| {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    };
    tag.bytes().for_each(&mut eat);
    opts.seed.to_le_bytes().into_iter().for_each(&mut eat);
    for p in params {
        p.to_bits().to_le_bytes().into_iter().for_each(&mut eat);
    }
    ChaCha8Rng::seed_from_u64(h)
}

pub(crate) fn normal_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| StandardNormal.sample(rng))
}

/// Random normals plus deterministic adversaries on `n` equispaced interior
/// nodes: single hats, sine modes, a sawtooth and boundary-layer profiles.
pub(crate) fn input_family(rng: &mut ChaCha8Rng, n: usize, samples: usize) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = (0..samples).map(|_| normal_vector(rng, n)).collect();
    let mut hats: Vec<usize> = vec![0, n / 4, n / 2, n.saturating_sub(1)];
    hats.dedup();
    for i in hats {
        let mut e = DVector::zeros(n);
        e[i] = 1.0;
        out.push(e);
    }
    let pos = |i: usize| (i + 1) as f64 / (n + 1) as f64;
    for k in [1, 2, 3, (n / 4).max(1), (n / 2).max(1), n] {
        out.push(DVector::from_fn(n, |i, _| (std::f64::consts::PI * k as f64 * pos(i)).sin()));
    }
    out.push(DVector::from_fn(n, |i, _| if i % 2 == 0 { 1.0 } else { -1.0 }));
    for w in [0.3, 0.05, 0.5 / (n + 1) as f64] {
        out.push(DVector::from_fn(n, |i, _| 1.0 - ((pos(i) - 1.0) / w).exp()));
    }
    out
}

/// `xᵀAx / xᵀBx`.
pub(crate) fn quotient(a: &DMatrix<f64>, b: &DMatrix<f64>, x: &DVector<f64>) -> f64 {
    let den = x.dot(&(b * x));
    if den <= 0.0 {
        return 0.0;
    }
    x.dot(&(a * x)) / den
}

/// Whitening by a fixed positive definite Gram, for repeated maximal ratios.
pub(crate) struct Whitener {
    linv: DMatrix<f64>,
}

impl Whitener {
    pub fn new(b: &DMatrix<f64>, tag: &str) -> Result<Self> {
        let l = cholesky(b, tag)?.l();
        let n = b.nrows();
        let linv = l
            .solve_lower_triangular(&DMatrix::identity(n, n))
            .ok_or_else(|| invalid("singular factor"))?;
        Ok(Self { linv })
    }

    /// `max xᵀAx / xᵀBx` and its maximizer.
    pub fn max(&self, a: &DMatrix<f64>) -> (f64, DVector<f64>) {
        let c = &self.linv * a * self.linv.transpose();
        let eig = SymmetricEigen::new((&c + c.transpose()) * 0.5);
        let (k, v) = eig
            .eigenvalues
            .iter()
            .copied()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty");
        (v, self.linv.transpose() * eig.eigenvectors.column(k))
    }
}

/// Diagonal of `B⁻¹` for a positive definite `B`.
pub(crate) fn inverse_diagonal(b: &DMatrix<f64>, tag: &str) -> Result<Vec<f64>> {
    let l = cholesky(b, tag)?.l();
    let n = b.nrows();
    let linv = l
        .solve_lower_triangular(&DMatrix::identity(n, n))
        .ok_or_else(|| invalid("singular factor"))?;
    // (B⁻¹)_ii = Σ_k (L⁻¹)_ki².
    Ok((0..n).map(|i| linv.column(i).norm_squared()).collect())
}

/// Cell averages of interior-node piecewise affine functions on a uniform mesh.
pub(crate) fn averaging_matrix(n_cells: usize) -> DMatrix<f64> {
    let ni = n_cells - 1;
    DMatrix::from_fn(n_cells, ni, |k, i| if i + 1 == k || i == k { 0.5 } else { 0.0 })
}

/// Jumps of the zero extension of cell values, one row per vertex.
pub(crate) fn jump_matrix(n_cells: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n_cells + 1, n_cells, |k, j| {
        if j == k {
            1.0
        } else if j + 1 == k {
            -1.0
        } else {
            0.0
        }
    })
}

/// `‖u − τ_h u‖²/h` Gram over cell values of a piecewise constant function on a uniform mesh.
pub(crate) fn pc_shift_gram(n_cells: usize, tau: f64, h: f64) -> DMatrix<f64> {
    let d = jump_matrix(n_cells);
    let s = DMatrix::from_fn(n_cells + 1, n_cells + 1, |i, j| {
        (h - (i as f64 - j as f64).abs() * tau).max(0.0)
    });
    d.transpose() * s * d / h
}

/// Interior basis function of the affine (`p = 0`) or upwinded space,
/// centred at 0 with support `[−τ, τ]`.
fn reference_basis(p: Peclet, tau: f64, x: f64) -> f64 {
    if x <= -tau || x >= tau {
        0.0
    } else if x < 0.0 {
        upwind_shape(p, (x + tau) / tau, Node::Right)
    } else {
        upwind_shape(p, x / tau, Node::Left)
    }
}

/// `∫ ψ(x) ψ(x − d) dx` for the reference basis function.
fn autocorrelation(p: Peclet, tau: f64, width: f64, d: f64) -> f64 {
    let d = d.abs();
    if d >= 2.0 * tau {
        return 0.0;
    }
    let mut bp = vec![-tau, 0.0, tau, d - tau, d, d + tau];
    bp.retain(|&x| x >= d - tau && x <= tau);
    bp.sort_by(f64::total_cmp);
    bp.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * tau);
    bp.windows(2)
        .map(|w| {
            graded_rule(w[0], w[1], width, 16)
                .into_iter()
                .map(|(x, wt)| wt * reference_basis(p, tau, x) * reference_basis(p, tau, x - d))
                .sum::<f64>()
        })
        .sum()
}

/// `‖v − τ_h v‖²/h` Gram over interior nodal values on a uniform mesh of
/// `n_cells` cells; interior basis functions are translates, so the Gram is Toeplitz.
pub(crate) fn shift_gram(n_cells: usize, tau: f64, p: Peclet, width: f64, h: f64) -> DMatrix<f64> {
    let ni = n_cells - 1;
    let c = |d: f64| autocorrelation(p, tau, width, d);
    let entries: Vec<f64> = par::map_range(ni, |k| {
        let d = k as f64 * tau;
        2.0 * c(d) - c(d + h) - c(d - h)
    });
    DMatrix::from_fn(ni, ni, |i, j| entries[i.abs_diff(j)] / h)
}
