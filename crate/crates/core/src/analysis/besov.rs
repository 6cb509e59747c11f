//! Translation-based seminorms: the weak Besov space H^{1/2}_w and the
//! Slobodetski H^{1/2−ε} seminorm of piecewise constants.

use super::functions::PiecewiseConstant;
use crate::quadrature::graded_rule;

/// Number of dyadic shifts `2^{-k} T`, `k = 0..DYADIC_LEVELS`, probed by the weak seminorm.
pub const DYADIC_LEVELS: usize = 30;

/// Dyadic shift grid `{2^{-k} T}`.
pub fn dyadic_shifts(extent: f64) -> Vec<f64> {
    (0..=DYADIC_LEVELS).map(|k| extent * 0.5f64.powi(k as i32)).collect()
}

/// `‖u − τ_h u‖²` for the zero extension of a piecewise constant function.
pub fn shift_norm_sq_pc(u: &PiecewiseConstant, h: f64) -> f64 {
    let jumps = u.jumps();
    let mut s = 0.0;
    for (i, &(xi, ji)) in jumps.iter().enumerate() {
        s += ji * ji * h;
        for &(xj, jj) in &jumps[i + 1..] {
            let d = (xi - xj).abs();
            if d < h {
                s += 2.0 * ji * jj * (h - d);
            }
        }
    }
    s.max(0.0)
}

/// Dyadic lower approximation of `|u|_{H^{1/2}_w}` for a piecewise constant function.
pub fn h_half_weak_seminorm_pc(u: &PiecewiseConstant) -> f64 {
    dyadic_shifts(u.mesh.length)
        .into_iter()
        .map(|h| (shift_norm_sq_pc(u, h) / h).sqrt())
        .fold(0.0, f64::max)
}

/// `‖f − f(· − h)‖²` for `f` supported in `[a, b]` and smooth between the
/// given breakpoints, with layers of thickness `width` next to breakpoints.
pub fn shift_norm_sq(f: &dyn Fn(f64) -> f64, breakpoints: &[f64], width: f64, h: f64) -> f64 {
    let mut pts: Vec<f64> = breakpoints
        .iter()
        .flat_map(|&x| [x, x + h])
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * b.abs().max(1.0));
    pts.windows(2)
        .map(|w| {
            graded_rule(w[0], w[1], width, 20)
                .into_iter()
                .map(|(x, wt)| wt * (f(x) - f(x - h)).powi(2))
                .sum::<f64>()
        })
        .sum()
}

/// Dyadic lower approximation of `|f|_{H^{1/2}_w}` for a piecewise smooth,
/// compactly supported `f`; `extent` sets the largest shift.
pub fn h_half_weak_seminorm(f: &dyn Fn(f64) -> f64, breakpoints: &[f64], width: f64, extent: f64) -> f64 {
    dyadic_shifts(extent)
        .into_iter()
        .map(|h| (shift_norm_sq(f, breakpoints, width, h) / h).sqrt())
        .fold(0.0, f64::max)
}

/// `1/(2ε) + 1/(1 − 2ε)`.
pub fn besov_epsilon_constant(eps: f64) -> f64 {
    0.5 / eps + 1.0 / (1.0 - 2.0 * eps)
}

/// Slobodetski seminorm `∫∫ |u(x+y) − u(x)|²/|y|^{2−2ε}` of the zero extension
/// of a piecewise constant function, `0 < ε < 1/2`, in closed form.
pub fn h_sobolev_pc_sq(u: &PiecewiseConstant, eps: f64) -> f64 {
    let jumps = u.jumps();
    let mut s = 0.0;
    for (i, &(xi, ji)) in jumps.iter().enumerate() {
        for &(xj, jj) in &jumps[i + 1..] {
            s += 2.0 * ji * jj * (xi - xj).abs().powf(2.0 * eps);
        }
    }
    (-2.0 * besov_epsilon_constant(eps) * s).max(0.0)
}
