//! Growth-law fits with a train/test constant transfer.

use serde::{Deserialize, Serialize};

/// Allowed excess of the fitted slope over the claimed one.
pub const SLOPE_TOLERANCE: f64 = 0.15;
/// Factor by which the ratio on the held-out half may exceed the fitted constant.
pub const TRANSFER_SLACK: f64 = 2.0;

/// Shape of the claimed bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimedLaw {
    /// Bounded uniformly in the swept parameter.
    Constant,
    /// Grows like the given factor `g`, recorded per point.
    Growth,
}

/// One growth-law fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LawFit {
    /// Max of `measured/claimed` on the training half.
    pub fitted_constant: f64,
    /// Max of `measured/claimed` on the held-out half divided by the fitted constant.
    pub transfer_ratio: f64,
    /// Slope of `log measured` against `log claimed` (growth laws) or against
    /// `log x` (constant laws), on the asymptotic half.
    pub slope: f64,
    /// Slope over the whole grid, for reference.
    pub slope_full: f64,
    pub pass: bool,
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    if x.len() < 2 {
        return 0.0;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Coefficient of determination of the least-squares line.
pub fn r_squared(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let b = ls_slope(x, y);
    let a = my - b * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(xi, yi)| (yi - a - b * xi).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|yi| (yi - my).powi(2)).sum();
    if ss_tot == 0.0 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    }
}

/// Fits `measured ≲ C · claimed` over points ordered from mild to asymptotic.
///
/// `x` is the asymptotic variable (growing toward the limit of interest).
/// The constant is fitted on the first half and checked on the second; the
/// slope is taken on the second half, where the order statement applies.
pub fn fit_law(x: &[f64], measured: &[f64], claimed: &[f64], law: ClaimedLaw) -> LawFit {
    let n = measured.len();
    let split = n.div_ceil(2).min(n.saturating_sub(1)).max(1);
    let ratio: Vec<f64> = measured.iter().zip(claimed).map(|(m, g)| m / g).collect();
    let fitted = ratio[..split].iter().copied().fold(0.0, f64::max);
    let held = ratio[split..].iter().copied().fold(0.0, f64::max);
    let transfer = if fitted > 0.0 { held / fitted } else if held > 0.0 { f64::INFINITY } else { 0.0 };
    let tail = n.saturating_sub(split).max(2).min(n);
    let lo = n - tail;
    let ly: Vec<f64> = measured.iter().map(|m| m.max(f64::MIN_POSITIVE).ln()).collect();
    let lx: Vec<f64> = match law {
        ClaimedLaw::Constant => x.iter().map(|v| v.ln()).collect(),
        ClaimedLaw::Growth => claimed.iter().map(|v| v.ln()).collect(),
    };
    let target = match law {
        ClaimedLaw::Constant => 0.0,
        ClaimedLaw::Growth => 1.0,
    };
    let slope = ls_slope(&lx[lo..], &ly[lo..]);
    let slope_full = ls_slope(&lx, &ly);
    let pass = slope <= target + SLOPE_TOLERANCE && transfer <= TRANSFER_SLACK && ratio.iter().all(|r| r.is_finite());
    LawFit {
        fitted_constant: fitted,
        transfer_ratio: transfer,
        slope,
        slope_full,
        pass,
    }
}
