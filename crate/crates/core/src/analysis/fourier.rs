//! Fourier-side evaluation of multiplier energies on Gaussian wave packets.

use std::f64::consts::PI;

use crate::quadrature::composite;

/// `u(t) = e^{−t²/(2w²)} cos(ξ₀ t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavePacket {
    pub center: f64,
    pub width: f64,
}

impl WavePacket {
    /// Packet at frequency `center` holding about `cycles` oscillations.
    pub fn at_frequency(center: f64, cycles: f64) -> Self {
        Self {
            center,
            width: cycles / center.max(1e-300),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        (-0.5 * (t / self.width).powi(2)).exp() * (self.center * t).cos()
    }

    /// `|Fu(ξ)|²`.
    pub fn spectrum_sq(&self, xi: f64) -> f64 {
        let w = self.width;
        let g = |x: f64| (-0.5 * (w * x).powi(2)).exp();
        let amp = 0.5 * w * (2.0 * PI).sqrt() * (g(xi - self.center) + g(xi + self.center));
        amp * amp
    }

    /// `(1/2π) ∫ m(ξ) |Fu(ξ)|² dξ` for an even multiplier `m`.
    pub fn energy(&self, m: impl Fn(f64) -> f64) -> f64 {
        let spread = 10.0 / self.width;
        let lo = (self.center - spread).max(0.0);
        let hi = self.center + spread;
        let mut s = composite(lo, hi, 64, 16, |x| m(x) * self.spectrum_sq(x));
        if lo > 0.0 {
            s += composite(0.0, lo, 16, 16, |x| m(x) * self.spectrum_sq(x));
        }
        s / PI
    }
}

/// `(1/2π)∫|ξ|^{2s}|Fu|²`.
pub fn sobolev_seminorm_sq(u: &WavePacket, s: f64) -> f64 {
    u.energy(|x| x.abs().powf(2.0 * s))
}

/// `|G_α ∗ u|²_{H^{1/2}}` with decay length `a = α/β`: multiplier `|ξ|/(1 + a²ξ²)`.
pub fn smoothed_h_half_sq(u: &WavePacket, a: f64) -> f64 {
    u.energy(|x| x.abs() / (1.0 + a * a * x * x))
}
