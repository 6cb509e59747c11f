//! Local shape functions and closed-form element integrals.
//!
//! Every 2×2 matrix is indexed `[test][trial]` with node 0 the upwind (left)
//! end of the cell and node 1 the downwind (right) end.

use crate::quadrature::GaussRule;
use crate::special::{exp_moment, upwind_right, upwind_right_moments, upwind_right_slope};
use serde::{Deserialize, Serialize};

pub type Mat2 = [[f64; 2]; 2];

/// Cell Péclet number `p = βτ/α`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Peclet(pub f64);

impl Peclet {
    pub fn new(alpha: f64, beta: f64, tau: f64) -> Self {
        Peclet(beta * tau / alpha)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Below this the exponential shapes are replaced by affine ones.
    pub fn is_linear(self) -> bool {
        self.0 <= 0.0
    }
}

/// Node of a 1D cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Node {
    Left,
    Right,
}

/// Upwinded shape function at local coordinate `s ∈ [0, 1]`.
pub fn upwind_shape(p: Peclet, s: f64, node: Node) -> f64 {
    let p = p.0.max(0.0);
    match node {
        Node::Right => upwind_right(p, s),
        Node::Left => upwind_left(p, s),
    }
}

/// Derivative of [`upwind_shape`] with respect to `s`.
pub fn upwind_shape_slope(p: Peclet, s: f64, node: Node) -> f64 {
    let d = upwind_right_slope(p.0.max(0.0), s);
    match node {
        Node::Right => d,
        Node::Left => -d,
    }
}

/// `Φ(p)`, the ratio `∫|v̇|² / ∫|u̇|²` between an upwinded interpolant and its
/// affine source on a uniform grid.
pub fn phi_of_p(p: Peclet) -> f64 {
    crate::special::phi_of_p(p.0)
}

/// Element integrals of one flow cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalMatrices {
    pub peclet: Peclet,
    pub tau: f64,
    /// Reaction coefficient folded into [`Self::pg_total`] and [`Self::galerkin_total`].
    pub gamma: f64,
    /// `∫ φ'_b (α ψ'_a + β ψ_a)`.
    pub conv: Mat2,
    /// `∫ φ_b ψ_a`.
    pub mass: Mat2,
    /// `∫ φ'_b ψ'_a`.
    pub stiff: Mat2,
    /// `∫ φ'_b ψ_a`.
    pub adv: Mat2,
    /// `∫ ψ_a`, the load vector of a unit source.
    pub load: [f64; 2],
    /// Affine–affine counterparts.
    pub galerkin_conv: Mat2,
    pub galerkin_mass: Mat2,
    pub galerkin_stiff: Mat2,
    pub galerkin_adv: Mat2,
    pub galerkin_load: [f64; 2],
}

impl LocalMatrices {
    /// `conv + γ mass`.
    pub fn pg_total(&self) -> Mat2 {
        add(self.conv, self.mass, self.gamma)
    }

    pub fn galerkin_total(&self) -> Mat2 {
        add(self.galerkin_conv, self.galerkin_mass, self.gamma)
    }
}

fn add(a: Mat2, b: Mat2, s: f64) -> Mat2 {
    let mut c = a;
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] += s * b[i][j];
        }
    }
    c
}

/// `1 − ψ_R = e^{−ps}(1 − e^{−p(1−s)})/(1 − e^{−p})`, free of cancellation
/// for small `p` and near `s = 1`.
fn upwind_left(p: f64, s: f64) -> f64 {
    if p == 0.0 {
        1.0 - s
    } else {
        (-p * s).exp() * (-p * (1.0 - s)).exp_m1() / (-p).exp_m1()
    }
}

/// `∫ψ_R` and `∫ sψ_R` over the unit cell.
pub fn right_moments(p: Peclet) -> (f64, f64) {
    upwind_right_moments(p.0.max(0.0))
}

/// Integrals of the left shape over the unit cell, each to full relative
/// accuracy even when it is `O(1/p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeftMoments {
    /// `∫ψ_L`.
    pub mean: f64,
    /// `∫ sψ_L`.
    pub first: f64,
    /// `∫ψ_L²`.
    pub square: f64,
}

pub fn left_moments(p: Peclet) -> LeftMoments {
    let p = p.0.max(0.0);
    if p < 1.0 {
        let g = GaussRule::get(24);
        return LeftMoments {
            mean: g.integrate(0.0, 1.0, |s| upwind_left(p, s)),
            first: g.integrate(0.0, 1.0, |s| s * upwind_left(p, s)),
            square: g.integrate(0.0, 1.0, |s| upwind_left(p, s).powi(2)),
        };
    }
    // ψ_L = (e^{−ps} − e^{−p})/d; for p ≥ 1 each difference below loses at
    // most a few bits.
    let d = -(-p).exp_m1();
    let e = (-p).exp();
    let i0 = exp_moment(0, p);
    LeftMoments {
        mean: (i0 - e) / d,
        first: (exp_moment(1, p) - 0.5 * e) / d,
        square: (exp_moment(0, 2.0 * p) - 2.0 * e * i0 + e * e) / (d * d),
    }
}

/// Closed-form element matrices for constant coefficients on a cell of length `tau`.
pub fn element_matrices(alpha: f64, beta: f64, gamma: f64, tau: f64) -> LocalMatrices {
    let p = Peclet::new(alpha, beta, tau);
    let (q, r) = right_moments(p);
    let lm = left_moments(p);
    let ql = lm.mean;
    let stiff = [[1.0 / tau, -1.0 / tau], [-1.0 / tau, 1.0 / tau]];
    let adv = [[-ql, ql], [-q, q]];
    let mass = [
        [tau * (lm.mean - lm.first), tau * lm.first],
        [tau * (q - r), tau * r],
    ];
    let galerkin_adv = [[-0.5, 0.5], [-0.5, 0.5]];
    let galerkin_mass = [[tau / 3.0, tau / 6.0], [tau / 6.0, tau / 3.0]];
    let combine = |adv: Mat2| {
        let mut c = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                c[i][j] = alpha * stiff[i][j] + beta * adv[i][j];
            }
        }
        c
    };
    LocalMatrices {
        peclet: p,
        tau,
        gamma,
        conv: combine(adv),
        mass,
        stiff,
        adv,
        load: [tau * ql, tau * q],
        galerkin_conv: combine(galerkin_adv),
        galerkin_mass,
        galerkin_stiff: stiff,
        galerkin_adv,
        galerkin_load: [tau / 2.0, tau / 2.0],
    }
}

/// Test–test integrals of the upwinded shapes on a cell of length `tau`:
/// `(∫ψ_aψ_b, ∫ψ'_aψ'_b)`.
pub fn upwind_gram(p: Peclet, tau: f64) -> (Mat2, Mat2) {
    let lm = left_moments(p);
    let ll = lm.square;
    let rl = lm.mean - ll;
    let rr = 1.0 - 2.0 * lm.mean + ll;
    let mass = [[tau * ll, tau * rl], [tau * rl, tau * rr]];
    let f = phi_of_p(p) / tau;
    let stiff = [[f, -f], [-f, f]];
    (mass, stiff)
}
