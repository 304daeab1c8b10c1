use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("integer overflow computing {0}")]
    Overflow(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("kernel degree {degree} exceeds grid exactness {exactness}")]
    DegreeOverflow { degree: usize, exactness: usize },

    #[error("invalid exponent: {0}")]
    InvalidExponent(String),

    #[error("exponent pair (1/r, 1/s) = ({x}, {y}) lies outside the anchor hull")]
    OutsideHull { x: f64, y: f64 },

    #[error("spectral parameter too close to the spectrum: |zeta - tau^2| = {0:e}")]
    Pole(f64),

    #[error("quadrature failed to converge: {0}")]
    Quadrature(String),

    #[error("truncation degree {kmax} too small for lam = {lam}: multiplier tail ratio {tail_ratio:e}")]
    TailDominance { kmax: usize, lam: f64, tail_ratio: f64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("sigma = {sigma} outside [{lo}, {hi}]")]
    SigmaRange { sigma: f64, lo: f64, hi: f64 },

    #[error("inadmissible exponents: {0}")]
    Inadmissible(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("parse error: {0}")]
    Parse(String),
}
