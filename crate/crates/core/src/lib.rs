//! Numerical laboratory for the generalized Tricomi equation
//! `∂ₜ²u − tᵐΔu = F(u)` on a periodic grid.

pub mod dd;
pub mod dyadic;
pub mod error;
pub mod exponents;
pub mod linear;
pub mod oracle;
pub mod propagator;
pub mod quadrature;
pub mod semilinear;
pub mod special;
pub mod spectral;

pub use error::{Error, Result};
pub use exponents::{ExponentTable, ProblemParams, Regime, StrichartzTuple};
