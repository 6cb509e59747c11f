//! Overflow-safe exponential moments and special functions.

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const MAX_MOMENT: usize = 6;

/// `∫₀¹ s^k e^{-ps} ds` for `p >= 0`.
pub fn exp_moment(k: usize, p: f64) -> f64 {
    assert!(k <= MAX_MOMENT);
    if p < 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0; // (-p)^n / n!
        for n in 0..200 {
            let c = term / (n + k + 1) as f64;
            sum += c;
            if c.abs() < 1e-18 * sum.abs() {
                break;
            }
            term *= -p / (n + 1) as f64;
        }
        sum
    } else {
        let e = (-p).exp();
        let mut i = -(-p).exp_m1() / p;
        for j in 1..=k {
            i = (j as f64 * i - e) / p;
        }
        i
    }
}

/// `(1/(k+1) - I_k(p)) / p`, continuous at `p = 0`.
pub fn centered_moment(k: usize, p: f64) -> f64 {
    if p < 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0; // p^(n-1) / n!
        for n in 1..200 {
            term /= n as f64;
            let c = term / (n + k + 1) as f64;
            sum += if n % 2 == 1 { c } else { -c };
            if c < 1e-18 * sum.abs() {
                break;
            }
            term *= p;
        }
        sum
    } else {
        (1.0 / (k as f64 + 1.0) - exp_moment(k, p)) / p
    }
}

/// Value of the right upwind shape `(1 - e^{-ps}) / (1 - e^{-p})`.
pub fn upwind_right(p: f64, s: f64) -> f64 {
    if p.abs() < 1e-300 {
        return s;
    }
    (-p * s).exp_m1() / (-p).exp_m1()
}

/// Derivative in `s` of [`upwind_right`].
pub fn upwind_right_slope(p: f64, s: f64) -> f64 {
    if p.abs() < 1e-300 {
        return 1.0;
    }
    // p e^{-ps} / (1 - e^{-p}) written without overflow for large p.
    -p * (-p * s).exp() / (-p).exp_m1()
}

/// `∫₀¹ ψ_R` and `∫₀¹ s ψ_R` for the right upwind shape.
pub fn upwind_right_moments(p: f64) -> (f64, f64) {
    let i0 = exp_moment(0, p);
    (centered_moment(0, p) / i0, centered_moment(1, p) / i0)
}

/// `Φ(p) = (p/2) coth(p/2)`.
pub fn phi_of_p(p: f64) -> f64 {
    let h = 0.5 * p.abs();
    if h < 1e-4 {
        1.0 + h * h / 3.0
    } else {
        h / h.tanh()
    }
}

/// Exponential integral `E1(x)` for `x > 0`.
pub fn e1(x: f64) -> f64 {
    assert!(x > 0.0);
    if x <= 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..100 {
            term *= -x / k as f64;
            let c = term / k as f64;
            sum += c;
            if c.abs() < 1e-18 {
                break;
            }
        }
        -EULER_GAMMA - x.ln() - sum
    } else {
        // Modified Lentz evaluation of the continued fraction.
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let a = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (a * d + b);
            c = b + a / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-x).exp()
    }
}

/// Exponential integral `Ei(x)` for `0 < x <= 60`.
pub fn ei(x: f64) -> f64 {
    assert!(x > 0.0 && x <= 60.0);
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..400 {
        term *= x / k as f64;
        let c = term / k as f64;
        sum += c;
        if c < 1e-18 * sum {
            break;
        }
    }
    EULER_GAMMA + x.ln() + sum
}

/// `K(b) = ∫₀^∞ (1 - cos(bη)) / (η (1 + η²)) dη` for `b >= 0`.
///
/// This is the kernel of the H^{1/2} seminorm of a causal exponential
/// smoothing of a step; it grows like `ln b + γ` for large `b`.
pub fn smoothed_log_kernel(b: f64) -> f64 {
    let b = b.abs();
    if b == 0.0 {
        return 0.0;
    }
    if b <= 2.0 {
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        let mut t = 1.0;
        for k in 1..60 {
            t *= b / k as f64;
            let c = t / k as f64;
            s2 += c;
            s1 += if k % 2 == 1 { -c } else { c };
            if c < 1e-19 {
                break;
            }
        }
        // 1 - cosh b computed without cancellation.
        let sh = (0.5 * b).sinh();
        let one_minus_cosh = -2.0 * sh * sh;
        (EULER_GAMMA + b.ln()) * one_minus_cosh - 0.5 * (b.exp() * s1 + (-b).exp() * s2)
    } else if b < 40.0 {
        let h = 0.5 * (b.exp() * e1(b) - (-b).exp() * ei(b));
        b.ln() + EULER_GAMMA + h
    } else {
        let inv2 = 1.0 / (b * b);
        let mut h = 0.0;
        let mut term = inv2; // (2k-1)! / b^{2k}
        for k in 1..12 {
            h -= term;
            let next = term * ((2 * k) * (2 * k + 1)) as f64 * inv2;
            if next > term {
                break;
            }
            term = next;
        }
        b.ln() + EULER_GAMMA + h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_match_between_branches() {
        for k in 0..=4 {
            let lo = exp_moment(k, 0.999_999_9);
            let hi = exp_moment(k, 1.0);
            assert!((lo - hi).abs() < 1e-7 * hi);
            let lo = centered_moment(k, 0.999_999_9);
            let hi = centered_moment(k, 1.0);
            assert!((lo - hi).abs() < 1e-7 * hi);
        }
    }

    #[test]
    fn phi_reference_values() {
        assert!((phi_of_p(1.0) - 1.081_976_706_869_326).abs() < 1e-12);
        assert!((phi_of_p(1e-8) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exponential_integrals() {
        assert!((e1(1.0) - 0.219_383_934_395_520_3).abs() < 1e-14);
        assert!((e1(0.5) - 0.559_773_594_776_160_8).abs() < 1e-14);
        assert!((ei(1.0) - 1.895_117_816_355_936_8).abs() < 1e-13);
    }

    #[test]
    fn smoothed_log_kernel_branches_agree() {
        for b in [2.0, 40.0] {
            let lo = smoothed_log_kernel(b * (1.0 - 1e-9));
            let hi = smoothed_log_kernel(b * (1.0 + 1e-9));
            assert!((lo - hi).abs() < 1e-8, "b={b}: {lo} {hi}");
        }
    }
}
