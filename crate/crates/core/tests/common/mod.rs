//! Independent brute-force oracles shared by the integration tests.
//!
//! Nothing here calls the crate's quadrature, special functions or closed
//! forms: every reference value comes from adaptive Gauss-Kronrod quadrature
//! of the defining integral or from formulas written out from scratch.
#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub mod checks;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One Gauss-Kronrod 7/15 panel: `(kronrod, |kronrod − gauss|, ∫|f| estimate)`.
pub fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    let mut abs = WGK[7] * fc.abs();
    for i in 0..7 {
        let d = h * XGK[i];
        let (fl, fr) = (f(c - d), f(c + d));
        k += WGK[i] * (fl + fr);
        abs += WGK[i] * (fl.abs() + fr.abs());
        if i % 2 == 1 {
            g += WG[i / 2] * (fl + fr);
        }
    }
    (k * h, ((k - g) * h).abs(), abs * h.abs())
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    abs: f64,
}

impl Panel {
    fn new(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Self {
        let (value, err, abs) = gk15(f, a, b);
        Self { a, b, value, err, abs }
    }
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// Globally adaptive GK15 with absolute tolerance `tol`: the panel with the
/// largest error estimate is bisected until the total estimate is below
/// `tol` or roundoff, with at most 2000 panels.
pub fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let first = Panel::new(f, a, b);
    let (mut value, mut err, mut abs) = (first.value, first.err, first.abs);
    let mut heap = std::collections::BinaryHeap::from([first]);
    // Below ~50 ulps of ∫|f| the estimate is roundoff, not truncation.
    while err > tol.max(50.0 * f64::EPSILON * abs) && heap.len() < 2000 {
        let p = heap.pop().unwrap();
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            heap.push(Panel { err: 0.0, ..p });
            continue;
        }
        let (l, r) = (Panel::new(f, p.a, mid), Panel::new(f, mid, p.b));
        value += l.value + r.value - p.value;
        err += l.err + r.err - p.err;
        abs += l.abs + r.abs - p.abs;
        heap.push(l);
        heap.push(r);
    }
    value
}

/// `a + w·2^k` for `k = 0, 1, …` below `b`: panels that follow an
/// exponential layer of width `w` at `a` all the way to `b`.
pub fn geometric_breaks(a: f64, b: f64, w: f64) -> Vec<f64> {
    let mut out = vec![a];
    let mut d = w;
    while a + d < b && d > 0.0 {
        out.push(a + d);
        d *= 2.0;
    }
    out
}

/// Sorted, deduplicated breakpoints clipped to `[a, b]`, ends included.
pub fn pieces(breaks: &[f64], a: f64, b: f64) -> Vec<f64> {
    let mut p: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    p.push(a);
    p.push(b);
    p.sort_by(f64::total_cmp);
    p.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * (1.0 + y.abs()));
    p
}

/// `∫_a^b f` split at `breaks`, to relative accuracy `rel` of `∫|f|`.
pub fn integrate(f: &dyn Fn(f64) -> f64, breaks: &[f64], a: f64, b: f64, rel: f64) -> f64 {
    let p = pieces(breaks, a, b);
    // One panel per piece estimates ∫|f|; an underestimate only costs time.
    let scale: f64 = p.windows(2).map(|w| gk15(f, w[0], w[1]).2).sum();
    let tol = (rel * scale).max(1e-300) / p.len() as f64;
    p.windows(2).map(|w| adaptive(f, w[0], w[1], tol)).sum()
}

/// `∫_a^b ∫_a^b (f(x) − f(y))²/(x − y)² dx dy`, written as
/// `2∫_0^L dh ∫_a^{b−h} ((f(x+h) − f(x))/h)² dx`.
pub fn slobodetski(f: &dyn Fn(f64) -> f64, breaks: &[f64], a: f64, b: f64, rel: f64) -> f64 {
    let nodes = pieces(breaks, a, b);
    let len = b - a;
    let mut h_breaks = Vec::new();
    for x in &nodes {
        for y in &nodes {
            if y > x {
                h_breaks.push(y - x);
            }
        }
    }
    let inner = |h: f64| -> f64 {
        if h <= 0.0 {
            return 0.0;
        }
        let mut bp = nodes.clone();
        bp.extend(nodes.iter().map(|x| x - h));
        let q = |x: f64| ((f(x + h) - f(x)) / h).powi(2);
        integrate(&q, &bp, a, b - h, rel * 0.1)
    };
    2.0 * integrate(&inner, &h_breaks, 0.0, len, rel)
}

/// `|u|²_{H^{1/2}(a,b)}` with the `1/2π` normalization.
pub fn interval_seminorm(f: &dyn Fn(f64) -> f64, breaks: &[f64], a: f64, b: f64, rel: f64) -> f64 {
    slobodetski(f, breaks, a, b, rel) / (2.0 * PI)
}

/// `|u|²_{H^{1/2}(ℝ)}` of the zero extension of `u` from `[0, T]`: the
/// double integral over `[−T, 2T]²` plus the exact far tails.
pub fn zero_extension_seminorm(u: &dyn Fn(f64) -> f64, breaks: &[f64], t_end: f64, rel: f64) -> f64 {
    let ext = |x: f64| if (0.0..=t_end).contains(&x) { u(x) } else { 0.0 };
    let mut bp = breaks.to_vec();
    bp.extend([0.0, t_end]);
    let near = slobodetski(&ext, &bp, -t_end, 2.0 * t_end, rel);
    let tail = |x: f64| u(x).powi(2) * (1.0 / (x + t_end) + 1.0 / (2.0 * t_end - x));
    let far = 2.0 * integrate(&tail, breaks, 0.0, t_end, rel);
    (near + far) / (2.0 * PI)
}

/// Seminorm of the extension by zero to `t < 0`, on `(−∞, T]`.
pub fn left_zero_seminorm(u: &dyn Fn(f64) -> f64, breaks: &[f64], t_end: f64, rel: f64) -> f64 {
    let ext = |x: f64| if x >= 0.0 { u(x) } else { 0.0 };
    let mut bp = breaks.to_vec();
    bp.push(0.0);
    let near = slobodetski(&ext, &bp, -t_end, t_end, rel);
    let tail = |x: f64| u(x).powi(2) / (x + t_end);
    let far = 2.0 * integrate(&tail, breaks, 0.0, t_end, rel);
    (near + far) / (2.0 * PI)
}

/// `(1/π) p.v.∫_a^b u(y)/(y − x) dy` for `u` supported in `[a, b]`.
pub fn hilbert_pv(u: &dyn Fn(f64) -> f64, breaks: &[f64], a: f64, b: f64, x: f64, rel: f64) -> f64 {
    let mut bp = breaks.to_vec();
    bp.push(x);
    if x > a && x < b {
        let ux = u(x);
        let q = |y: f64| if y == x { 0.0 } else { (u(y) - ux) / (y - x) };
        (integrate(&q, &bp, a, b, rel) + ux * ((b - x) / (x - a)).ln()) / PI
    } else {
        let q = |y: f64| u(y) / (y - x);
        integrate(&q, &bp, a, b, rel) / PI
    }
}

/// `(G_α ∗ u)(t) = ∫_0^{min(t,T)} (β/α) e^{−β(t−s)/α} u(s) ds`, zero history.
pub fn g_alpha_convolution(u: &dyn Fn(f64) -> f64, breaks: &[f64], t_end: f64, alpha: f64, beta: f64, t: f64) -> f64 {
    let top = t.min(t_end);
    if top <= 0.0 {
        return 0.0;
    }
    let g = |s: f64| (beta / alpha) * (-(beta / alpha) * (t - s)).exp() * u(s);
    let mut bp = breaks.to_vec();
    bp.push(top);
    // The kernel has unit mass, so an absolute tolerance is relative to max|u|.
    let p = pieces(&bp, 0.0, top);
    p.windows(2).map(|w| adaptive(&g, w[0], w[1], 1e-15)).sum()
}

/// Continuous piecewise affine function on arbitrary nodes.
#[derive(Debug, Clone)]
pub struct Affine {
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
}

impl Affine {
    fn cell(&self, x: f64) -> Option<usize> {
        let n = self.nodes.len();
        if x < self.nodes[0] || x > self.nodes[n - 1] {
            return None;
        }
        Some(self.nodes.partition_point(|&t| t <= x).clamp(1, n - 1) - 1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.cell(x) {
            None => 0.0,
            Some(k) => {
                let (a, b) = (self.nodes[k], self.nodes[k + 1]);
                let s = (x - a) / (b - a);
                self.values[k] * (1.0 - s) + self.values[k + 1] * s
            }
        }
    }

    pub fn slope(&self, x: f64) -> f64 {
        match self.cell(x) {
            None => 0.0,
            Some(k) => (self.values[k + 1] - self.values[k]) / (self.nodes[k + 1] - self.nodes[k]),
        }
    }
}

/// `1 − e^{−p}` without cancellation.
fn denom(p: f64) -> f64 {
    -(-p).exp_m1()
}

/// Upwinded right shape `(1 − e^{−ps})/(1 − e^{−p})`.
pub fn psi_right(p: f64, s: f64) -> f64 {
    if p == 0.0 {
        s
    } else {
        -(-p * s).exp_m1() / denom(p)
    }
}

/// Upwinded left shape `(e^{−ps} − e^{−p})/(1 − e^{−p})`.
pub fn psi_left(p: f64, s: f64) -> f64 {
    if p == 0.0 {
        1.0 - s
    } else {
        (-p * s).exp() * -(-p * (1.0 - s)).exp_m1() / denom(p)
    }
}

/// `d/ds` of [`psi_right`]; the left shape has the opposite slope.
pub fn psi_right_ds(p: f64, s: f64) -> f64 {
    if p == 0.0 {
        1.0
    } else {
        p * (-p * s).exp() / denom(p)
    }
}

/// Upwinded function on a uniform grid, evaluated from scratch.
#[derive(Debug, Clone)]
pub struct Upwind {
    pub t_end: f64,
    pub values: Vec<f64>,
    pub p: f64,
}

impl Upwind {
    pub fn new(t_end: f64, values: Vec<f64>, alpha: f64, beta: f64) -> Self {
        let tau = t_end / (values.len() - 1) as f64;
        Self {
            t_end,
            values,
            p: beta * tau / alpha,
        }
    }

    fn tau(&self) -> f64 {
        self.t_end / (self.values.len() - 1) as f64
    }

    fn local(&self, x: f64) -> Option<(usize, f64)> {
        if !(0.0..=self.t_end).contains(&x) {
            return None;
        }
        let n = self.values.len() - 1;
        let k = ((x / self.tau()) as usize).min(n - 1);
        Some((k, x / self.tau() - k as f64))
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.local(x) {
            None => 0.0,
            Some((k, s)) => self.values[k] * psi_left(self.p, s) + self.values[k + 1] * psi_right(self.p, s),
        }
    }

    pub fn slope(&self, x: f64) -> f64 {
        match self.local(x) {
            None => 0.0,
            Some((k, s)) => (self.values[k + 1] - self.values[k]) * psi_right_ds(self.p, s) / self.tau(),
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        let n = self.values.len() - 1;
        (0..=n).map(|k| k as f64 * self.tau()).collect()
    }
}

/// Element integrals of one cell by quadrature, indexed `[test][trial]`.
#[derive(Debug, Clone, Copy)]
pub struct ElementOracle {
    pub conv: [[f64; 2]; 2],
    pub mass: [[f64; 2]; 2],
    pub stiff: [[f64; 2]; 2],
    pub adv: [[f64; 2]; 2],
    pub load: [f64; 2],
    pub test_mass: [[f64; 2]; 2],
    pub test_stiff: [[f64; 2]; 2],
}

pub fn element_oracle(alpha: f64, beta: f64, tau: f64) -> ElementOracle {
    let p = beta * tau / alpha;
    let psi = |a: usize, s: f64| if a == 0 { psi_left(p, s) } else { psi_right(p, s) };
    let dpsi = |a: usize, s: f64| if a == 0 { -psi_right_ds(p, s) / tau } else { psi_right_ds(p, s) / tau };
    let phi = |b: usize, s: f64| if b == 0 { 1.0 - s } else { s };
    let dphi = |b: usize| if b == 0 { -1.0 / tau } else { 1.0 / tau };
    let layer = geometric_breaks(0.0, 1.0, 1.0 / p);
    let q = |f: &dyn Fn(f64) -> f64| tau * integrate(f, &layer, 0.0, 1.0, 1e-14);
    let mut o = ElementOracle {
        conv: [[0.0; 2]; 2],
        mass: [[0.0; 2]; 2],
        stiff: [[0.0; 2]; 2],
        adv: [[0.0; 2]; 2],
        load: [0.0; 2],
        test_mass: [[0.0; 2]; 2],
        test_stiff: [[0.0; 2]; 2],
    };
    for a in 0..2 {
        o.load[a] = q(&|s| psi(a, s));
        for b in 0..2 {
            o.conv[a][b] = q(&|s| dphi(b) * (alpha * dpsi(a, s) + beta * psi(a, s)));
            o.mass[a][b] = q(&|s| phi(b, s) * psi(a, s));
            o.stiff[a][b] = q(&|s| dphi(b) * dpsi(a, s));
            o.adv[a][b] = q(&|s| dphi(b) * psi(a, s));
            o.test_mass[a][b] = q(&|s| psi(a, s) * psi(b, s));
            o.test_stiff[a][b] = q(&|s| dpsi(a, s) * dpsi(b, s));
        }
    }
    o
}

/// `−αu'' + βu' = 1`, `u(0) = u(T) = 0`, written from scratch.
pub fn steady_solution(alpha: f64, beta: f64, t_end: f64, t: f64) -> f64 {
    let r = beta / alpha;
    // (e^{r(t−T)} − e^{−rT}) / (1 − e^{−rT}), all exponents nonpositive.
    let w = (r * (t - t_end)).exp() * -(-r * t).exp_m1() / -(-r * t_end).exp_m1();
    (t - t_end * w) / beta
}

/// Exponential integral `E₁(x)`, `x > 0`.
pub fn exp_integral_e1(x: f64) -> f64 {
    if x <= 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..60 {
            term *= -x / k as f64;
            sum -= term / k as f64;
        }
        -0.577_215_664_901_532_9 - x.ln() + sum
    } else {
        // Modified Lentz on the continued fraction e^{−x}/(x + 1 − 1²/(x + 3 − 2²/(x + 5 − …))).
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-x).exp()
    }
}

/// `Ein(x) = ∫_0^x (1 − e^{−s})/s ds = γ + ln x + E₁(x)`.
pub fn ein(x: f64) -> f64 {
    if x < 0.5 {
        // Alternating series; no cancellation for small x.
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..40 {
            term *= x / k as f64;
            let s = if k % 2 == 1 { 1.0 } else { -1.0 };
            sum += s * term / k as f64;
        }
        sum
    } else {
        0.577_215_664_901_532_9 + x.ln() + exp_integral_e1(x)
    }
}

/// `∫_0^T (1 − e^{β(t−T)/α})²/(T − t) dt = 2 Ein(b) − Ein(2b)`, `b = βT/α`.
pub fn boundary_layer_integral(alpha: f64, beta: f64, t_end: f64) -> f64 {
    let b = beta * t_end / alpha;
    2.0 * ein(b) - ein(2.0 * b)
}

/// `inf_u sup_v vᵀBu / (‖u‖_X ‖v‖_Y)` by random search over trial directions.
///
/// For fixed `u` the sup over `v` is the dual norm `‖Bu‖_{Y'}`; the inf is
/// approached by `draws` random directions followed by `polish` steps of a
/// shrinking random walk from the best one.
pub fn brute_force_inf_sup(
    b: &DMatrix<f64>,
    nx: &DMatrix<f64>,
    ny: &DMatrix<f64>,
    draws: usize,
    polish: usize,
    rng: &mut ChaCha8Rng,
) -> f64 {
    let ny_inv = ny.clone().try_inverse().expect("test gram is invertible");
    let n = b.ncols();
    let ratio = |u: &DVector<f64>| {
        let bu = b * u;
        (bu.dot(&(&ny_inv * &bu)) / u.dot(&(nx * u))).sqrt()
    };
    let mut gauss = || -> f64 {
        // Box-Muller keeps the oracle free of distribution crates.
        let (u1, u2): (f64, f64) = (rng.random::<f64>().max(1e-300), rng.random());
        (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
    };
    let mut best = DVector::from_fn(n, |_, _| gauss());
    let mut best_val = ratio(&best);
    for _ in 1..draws {
        let u = DVector::from_fn(n, |_, _| gauss());
        let r = ratio(&u);
        if r < best_val {
            best_val = r;
            best = u;
        }
    }
    let mut step = 0.3;
    for _ in 0..polish {
        let scale = best.norm();
        let trial = &best + DVector::from_fn(n, |_, _| gauss() * step * scale / (n as f64).sqrt());
        let r = ratio(&trial);
        if r < best_val {
            best_val = r;
            best = trial;
            step *= 1.2;
        } else {
            step = (step * 0.98).max(1e-9);
        }
    }
    best_val
}

/// Random SPD matrix `AᵀA + shift·I` with standard normal `A`.
pub fn random_spd(n: usize, shift: f64, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    a.transpose() * &a + DMatrix::identity(n, n) * shift
}

/// `10^{U(lo, hi)}`.
pub fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    10f64.powf(rng.random_range(lo.log10()..hi.log10()))
}

/// Sorted random nodes of `[0, T]` with `n` cells, cell lengths varying by up to 10×.
pub fn random_nodes(rng: &mut ChaCha8Rng, n: usize, t_end: f64) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = w.iter().sum();
    let mut nodes = vec![0.0];
    let mut acc = 0.0;
    for x in &w[..n - 1] {
        acc += x / total * t_end;
        nodes.push(acc);
    }
    nodes.push(t_end);
    nodes
}

/// Worst ratio `error / tolerance` over a batch; the batch passes below 1.
#[derive(Debug, Clone)]
pub struct Agreement {
    pub instances: usize,
    pub worst_error: f64,
    pub tolerance: f64,
    /// Description of the instance behind `worst_error`.
    pub worst_case: String,
}

impl Agreement {
    pub fn new(tolerance: f64) -> Self {
        Self {
            instances: 0,
            worst_error: 0.0,
            tolerance,
            worst_case: String::new(),
        }
    }

    pub fn record(&mut self, error: f64, case: impl FnOnce() -> String) {
        let error = if error.is_nan() { f64::INFINITY } else { error };
        if error > self.worst_error || self.worst_case.is_empty() {
            self.worst_error = self.worst_error.max(error);
            self.worst_case = case();
        }
    }

    pub fn instance(&mut self) {
        self.instances += 1;
    }

    pub fn pass(&self) -> bool {
        self.worst_error <= self.tolerance
    }
}

impl std::fmt::Display for Agreement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} instances, worst {:.2e} (tol {:.0e}) at {}",
            self.instances, self.worst_error, self.tolerance, self.worst_case
        )
    }
}

pub fn rel_err(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / reference.abs().max(f64::MIN_POSITIVE)
}
