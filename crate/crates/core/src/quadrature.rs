//! Gauss–Legendre rules and layer-resolving composite quadrature.

use std::sync::OnceLock;

/// Largest Gauss–Legendre order kept in the cache.
pub const MAX_ORDER: usize = 64;

/// A Gauss–Legendre rule on the reference interval [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    fn compute(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Cached rule with `n` points, `1 <= n <= MAX_ORDER`.
    pub fn get(n: usize) -> &'static GaussRule {
        static RULES: OnceLock<Vec<GaussRule>> = OnceLock::new();
        let rules = RULES.get_or_init(|| (1..=MAX_ORDER).map(GaussRule::compute).collect());
        &rules[n.clamp(1, MAX_ORDER) - 1]
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (c + h * x, h * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Breakpoints of `[a, b]` graded geometrically toward both ends.
///
/// Pieces next to an end start at `width / 8` and double until the midpoint,
/// so an exponential layer of thickness `width` at either end is resolved.
pub fn graded_breakpoints(a: f64, b: f64, width: f64) -> Vec<f64> {
    let len = b - a;
    if !(len > 0.0) {
        return vec![a, b];
    }
    if !(width > 0.0) || width * 4.0 >= len {
        return (0..=4).map(|k| a + len * k as f64 / 4.0).collect();
    }
    let half = 0.5 * len;
    let mut offsets = Vec::new();
    let mut d = width / 8.0;
    while d < half * 0.75 {
        offsets.push(d);
        d *= 2.0;
    }
    let mut pts = vec![a];
    pts.extend(offsets.iter().map(|&o| a + o));
    pts.push(a + half);
    pts.extend(offsets.iter().rev().map(|&o| b - o));
    pts.push(b);
    pts
}

/// Composite Gauss rule with `order` points on every graded piece.
pub fn graded_rule(a: f64, b: f64, width: f64, order: usize) -> Vec<(f64, f64)> {
    let rule = GaussRule::get(order);
    let bp = graded_breakpoints(a, b, width);
    bp.windows(2)
        .flat_map(|w| rule.mapped(w[0], w[1]).collect::<Vec<_>>())
        .collect()
}

/// Integrates `f` over `[a, b]` resolving layers of thickness `width` at both ends.
pub fn integrate_layer<F: FnMut(f64) -> f64>(a: f64, b: f64, width: f64, mut f: F) -> f64 {
    graded_rule(a, b, width, 20)
        .into_iter()
        .map(|(x, w)| w * f(x))
        .sum()
}

/// Composite Gauss rule with `pieces` equal subintervals.
pub fn composite<F: FnMut(f64) -> f64>(a: f64, b: f64, pieces: usize, order: usize, mut f: F) -> f64 {
    let rule = GaussRule::get(order);
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|k| rule.integrate(a + k as f64 * h, a + (k + 1) as f64 * h, &mut f))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_is_exact_for_polynomials() {
        for n in [1, 2, 5, 20, 64] {
            let r = GaussRule::get(n);
            let deg = 2 * n - 1;
            let got = r.integrate(0.0, 1.0, |x| x.powi(deg as i32));
            assert!((got - 1.0 / (deg as f64 + 1.0)).abs() < 1e-13, "n={n}");
            let total: f64 = r.weights.iter().sum();
            assert!((total - 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn graded_rule_resolves_thin_layer() {
        let w = 1e-7;
        let got = integrate_layer(0.0, 1.0, w, |x| (-x / w).exp());
        let exact = w * (1.0 - (-1.0 / w).exp());
        assert!((got - exact).abs() < 1e-12 * exact);
        let w = 1e-3;
        let got = integrate_layer(0.0, 1.0, w, |x| (-(1.0 - x) / w).exp());
        let exact = w * (1.0 - (-1.0 / w).exp());
        assert!((got - exact).abs() < 1e-12 * exact);
    }
}
