//! Numerical laboratory for spectral projectors and the shifted-Laplacian resolvent on the
//! round sphere `S^n`.

pub mod error;
pub mod experiment;
pub mod exponents;
pub mod fit;
pub mod interpolation;
pub mod operators;
pub mod quadrature;
pub mod specfun;
pub mod sphere;

pub use error::{Error, Result};
