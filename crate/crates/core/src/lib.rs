//! Exponentially fitted Petrov–Galerkin discretization of
//! `−αΔu + β·∇u + γu = f` on tensor-product grids, together with a toolbox
//! that measures the norms, operator bounds and inf-sup constants governing
//! its stability as the viscosity `α` tends to zero.

pub mod analysis;
pub mod assembly;
pub mod banded;
pub mod elements;
pub mod error;
pub mod experiments;
pub mod mesh;
pub mod parabolic;
pub mod par;
pub mod quadrature;
pub mod special;
pub mod theory;
pub mod upwind_basis;

pub use error::{Error, Result};
