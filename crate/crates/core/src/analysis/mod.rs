//! Norms, operators and inf-sup constants on discrete function spaces.

pub mod besov;
pub mod convolution;
pub mod fourier;
pub mod functions;
pub mod gram;
pub mod hilbert;
pub mod infsup;
pub mod norms;

pub use besov::{h_half_weak_seminorm, h_half_weak_seminorm_pc};
pub use convolution::{convolve_g_alpha, Kernel, Smoothed};
pub use functions::{project_piecewise_constant, PiecewiseAffine, PiecewiseConstant};
pub use gram::{
    h_half_00_gram, h_half_seminorm_gram, theorem_norm_grams, NormGram, NormTag, Side, Space,
};
pub use hilbert::{hilbert_transform, HilbertTransform};
pub use infsup::inf_sup_constant;
pub use norms::alpha_norm;
