//! Zonal convolution operators on a fixed grid: the projectors, their dyadic kernel
//! pieces and the resolvent, together with norm estimates from below and above.

mod dyadic;
mod envelope;
mod norms;
mod resolvent;

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::specfun::ZonalKernel;
use crate::sphere::{analyze, synthesize, ZonalFunction, ZonalGrid};

pub use dyadic::{
    bump, dyadic_decompose, dyadic_decompose_with, piece_count, piece_norm_slopes, profile, usable_pieces, DyadicDecomposition,
    DyadicOptions, DyadicPiece, PieceSlopes,
};
pub use envelope::{envelope_check, Envelope};
pub use norms::{
    certify, norm_lower, norm_upper, AscentOptions, Anchors, CertificateRecord, LowerBound, NormCertificate, StartKind,
    UpperBound,
};
pub use resolvent::{
    cutoff, default_kmax, resolvent_kernel, resolvent_multiplier, resolvent_multiplier_integral, shifted_operator_kernel,
    tail_multiplier, ResolventKernel, ResolventParams,
};

/// A zonal kernel bound to a grid that integrates it exactly.
#[derive(Debug, Clone)]
pub struct ZonalOperator {
    grid: Arc<ZonalGrid>,
    kernel: ZonalKernel,
}

impl ZonalOperator {
    pub fn new(kernel: ZonalKernel, grid: Arc<ZonalGrid>) -> Result<Self> {
        if kernel.max_degree() > grid.exactness {
            return Err(Error::DegreeOverflow { degree: kernel.max_degree(), exactness: grid.exactness });
        }
        if kernel.sphere.n != grid.sphere.n {
            return Err(Error::Invalid(format!(
                "kernel lives on S^{} but the grid on S^{}",
                kernel.sphere.n, grid.sphere.n
            )));
        }
        Ok(Self { grid, kernel })
    }

    pub fn grid(&self) -> &Arc<ZonalGrid> {
        &self.grid
    }

    pub fn kernel(&self) -> &ZonalKernel {
        &self.kernel
    }

    /// Analysis, multiplication by `m_l`, synthesis.
    pub fn apply_values(&self, values: &[Complex64]) -> Vec<Complex64> {
        let coeffs = self.output_coeffs(values);
        synthesize(&self.grid, &coeffs)
    }

    fn output_coeffs(&self, values: &[Complex64]) -> Vec<Complex64> {
        let c = analyze(&self.grid, values, self.kernel.max_degree());
        c.iter().zip(&self.kernel.coeffs).map(|(c, m)| c * m).collect()
    }

    pub fn apply(&self, f: &ZonalFunction) -> Result<ZonalFunction> {
        if f.grid.points() != self.grid.points() || f.grid.sphere.n != self.grid.sphere.n {
            return Err(Error::InvalidGrid("function and operator use different grids".into()));
        }
        let coeffs = self.output_coeffs(&f.values);
        let values = synthesize(&self.grid, &coeffs);
        Ok(ZonalFunction { grid: self.grid.clone(), values, coeffs: Some(coeffs) })
    }

    /// Row `i` of the reduced matrix `A_ij = sum_l m_l Z_l(t_i) Z_l(t_j) / Z_l(1)`, so that
    /// `(K f)_i = sum_j w_j A_ij f_j`. The matrix is symmetric.
    pub fn reduced_row(&self, i: usize) -> Vec<Complex64> {
        let b: Vec<Complex64> = self
            .kernel
            .coeffs
            .iter()
            .enumerate()
            .map(|(l, m)| m * (self.grid.zonal_row(l)[i] / self.grid.zonal_diag(l)))
            .collect();
        synthesize(&self.grid, &b)
    }

    pub fn reduced_matrix(&self) -> Vec<Vec<Complex64>> {
        (0..self.grid.points()).into_par_iter().map(|i| self.reduced_row(i)).collect()
    }
}

/// `K f` computed spectrally; the grid of `f` must resolve the kernel's degree.
pub fn apply_kernel(kernel: &ZonalKernel, f: &ZonalFunction) -> Result<ZonalFunction> {
    ZonalOperator::new(kernel.clone(), f.grid.clone())?.apply(f)
}
