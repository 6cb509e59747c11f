//! Hilbert transform of zero-extended continuous piecewise affine functions.
//!
//! The normalization is `Hu(x) = (1/π) p.v.∫ u(y)/(y − x) dy`, whose Fourier
//! multiplier is `i·sgn ξ`. With `|u|²_{H^{1/2}} = (1/2π)∫|ξ||Fu|²` this gives
//! `∫ u̇ Hu = |u|²_{H^{1/2}}` exactly. Nodes may be nonuniform.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::functions::PiecewiseAffine;
use crate::par;

/// `z ln|z|`, continuous at 0.
pub(crate) fn zlog(z: f64) -> f64 {
    if z == 0.0 {
        0.0
    } else {
        z * z.abs().ln()
    }
}

/// Antiderivative of `z ln|z|`.
fn zlog_primitive(z: f64) -> f64 {
    if z == 0.0 {
        0.0
    } else {
        0.5 * z * z * z.abs().ln() - 0.25 * z * z
    }
}

/// Slopes of the zero extension, one per cell.
fn slopes(nodes: &[f64], values: &[f64]) -> Vec<f64> {
    nodes
        .windows(2)
        .zip(values.windows(2))
        .map(|(x, v)| (v[1] - v[0]) / (x[1] - x[0]))
        .collect()
}

/// Slope jumps `s_{k−1} − s_k` at every node of the zero extension.
fn kinks(nodes: &[f64], values: &[f64]) -> Vec<f64> {
    let s = slopes(nodes, values);
    let n = nodes.len();
    (0..n)
        .map(|k| {
            let left = if k == 0 { 0.0 } else { s[k - 1] };
            let right = if k == n - 1 { 0.0 } else { s[k] };
            left - right
        })
        .collect()
}

/// Hilbert transform of a zero-extended piecewise affine function given by
/// nodes and values (values at the two end nodes should be 0).
#[derive(Debug, Clone)]
pub struct HilbertTransform {
    nodes: Vec<f64>,
    kinks: Vec<f64>,
}

impl HilbertTransform {
    pub fn new(nodes: &[f64], values: &[f64]) -> Self {
        Self {
            nodes: nodes.to_vec(),
            kinks: kinks(nodes, values),
        }
    }

    pub fn of(u: &PiecewiseAffine) -> Self {
        Self::new(&u.mesh.vertices, &u.values)
    }

    /// `Hu(x)`; finite everywhere, including at nodes.
    pub fn eval(&self, x: f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.kinks)
            .map(|(&t, &c)| c * zlog(x - t))
            .sum::<f64>()
            / PI
    }

    /// `∫_a^b Hu`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.kinks)
            .map(|(&t, &c)| c * (zlog_primitive(b - t) - zlog_primitive(a - t)))
            .sum::<f64>()
            / PI
    }
}

/// `Hu` sampled at the given points.
pub fn hilbert_transform(u: &PiecewiseAffine, points: &[f64]) -> Vec<f64> {
    let h = HilbertTransform::of(u);
    points.iter().map(|&x| h.eval(x)).collect()
}

/// `∫ u̇ Hv` for two zero-extended piecewise affine functions on the same nodes.
pub fn derivative_pairing(nodes: &[f64], u: &[f64], v: &[f64]) -> f64 {
    let hv = HilbertTransform::new(nodes, v);
    slopes(nodes, u)
        .iter()
        .enumerate()
        .map(|(k, s)| s * hv.integral(nodes[k], nodes[k + 1]))
        .sum()
}

/// `|u|²_{H^{1/2}(ℝ)}` of the zero extension, computed as `∫ u̇ Hu`.
pub fn h_half_seminorm_sq(u: &PiecewiseAffine) -> f64 {
    derivative_pairing(&u.mesh.vertices, &u.values, &u.values)
}

/// Gram of `∫ u̇ Hv` over the interior hat functions of arbitrary nodes.
///
/// This is the H^{1/2}_00 seminorm Gram on nonuniform (graded) meshes.
pub fn hilbert_gram(nodes: &[f64]) -> DMatrix<f64> {
    let n = nodes.len();
    let m = n.saturating_sub(2);
    // Hat j has slope jumps at nodes j-1, j, j+1 and slopes on cells j-1, j.
    let hat_kinks = |j: usize| -> [(f64, f64); 3] {
        let hl = nodes[j] - nodes[j - 1];
        let hr = nodes[j + 1] - nodes[j];
        [
            (nodes[j - 1], -1.0 / hl),
            (nodes[j], 1.0 / hl + 1.0 / hr),
            (nodes[j + 1], -1.0 / hr),
        ]
    };
    let rows = par::map_range(m, |r| {
        let i = r + 1;
        let hl = nodes[i] - nodes[i - 1];
        let hr = nodes[i + 1] - nodes[i];
        let cells = [(nodes[i - 1], nodes[i], 1.0 / hl), (nodes[i], nodes[i + 1], -1.0 / hr)];
        (0..m)
            .map(|c| {
                let j = c + 1;
                let mut acc = 0.0;
                for &(t, k) in &hat_kinks(j) {
                    for &(a, b, s) in &cells {
                        acc += s * k * (zlog_primitive(b - t) - zlog_primitive(a - t));
                    }
                }
                acc / PI
            })
            .collect::<Vec<f64>>()
    });
    let mut g = DMatrix::zeros(m, m);
    for (r, row) in rows.into_iter().enumerate() {
        for (c, v) in row.into_iter().enumerate() {
            g[(r, c)] = v;
        }
    }
    // The form is symmetric; average away rounding differences.
    let gt = g.transpose();
    (g + gt) * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::uniform_partition;

    #[test]
    fn even_input_gives_odd_transform() {
        let m = uniform_partition(1.0, 8).unwrap();
        let u = PiecewiseAffine::interpolate(m, |t| t * (1.0 - t));
        let h = HilbertTransform::of(&u);
        for x in [0.1, 0.37, 0.8, 1.3] {
            assert!((h.eval(0.5 + x) + h.eval(0.5 - x)).abs() < 1e-12);
        }
    }

    #[test]
    fn gram_matches_pairing() {
        let nodes = [0.0, 0.1, 0.15, 0.4, 0.7, 1.0];
        let vals = [0.0, 1.0, -0.5, 2.0, 0.3, 0.0];
        let g = hilbert_gram(&nodes);
        let x = nalgebra::DVector::from_column_slice(&vals[1..5]);
        let q = (x.transpose() * &g * &x)[(0, 0)];
        let direct = derivative_pairing(&nodes, &vals, &vals);
        assert!((q - direct).abs() < 1e-12 * direct.abs());
        assert!(direct > 0.0);
    }
}
