//! Positive operator-valued measures on a designated set of subsystems.

use crate::error::{Error, Result};
use crate::layout::SystemLayout;
use crate::linalg::{self, CMatrix};
use crate::qudit;

/// Completeness and positivity tolerances.
pub const COMPLETENESS_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = -1e-10;

#[derive(Debug, Clone)]
pub struct Povm {
    dim: usize,
    elements: Vec<CMatrix>,
}

impl Povm {
    /// Validates `Σ M_k = I` and `M_k ≥ 0`.
    pub fn new(elements: Vec<CMatrix>) -> Result<Self> {
        let dim = elements.first().map(|m| m.nrows()).ok_or_else(|| Error::InvalidPovm("no outcomes".into()))?;
        let mut sum = CMatrix::zeros(dim, dim);
        for (k, m) in elements.iter().enumerate() {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::InvalidPovm(format!(
                    "element {k} is {}x{}, expected {dim}x{dim}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            let herm = linalg::hermitian_deviation(m);
            if herm > 1e-12 {
                return Err(Error::InvalidPovm(format!("element {k} is not Hermitian ({herm:.3e})")));
            }
            let min = linalg::eigvalsh(m).first().copied().unwrap_or(0.0);
            if min < POSITIVITY_TOL {
                return Err(Error::InvalidPovm(format!("element {k} has eigenvalue {min:.3e}")));
            }
            sum += m;
        }
        let dev = linalg::max_abs_diff(&sum, &linalg::identity(dim));
        if dev > COMPLETENESS_TOL {
            return Err(Error::InvalidPovm(format!("elements sum to identity only within {dev:.3e}")));
        }
        Ok(Self { dim, elements })
    }

    /// Skips validation; callers guarantee a complete set of projectors.
    pub(crate) fn trusted(dim: usize, elements: Vec<CMatrix>) -> Self {
        Self { dim, elements }
    }

    /// Single outcome `I`.
    pub fn identity(dim: usize) -> Self {
        Self { dim, elements: vec![linalg::identity(dim)] }
    }

    pub fn computational(dim: usize) -> Self {
        Self::from_basis(&linalg::identity(dim), dim)
    }

    /// Projectors onto the columns of a unitary, with column `k` assigned to
    /// outcome `k % n_outcomes`.
    pub fn from_basis(u: &CMatrix, n_outcomes: usize) -> Self {
        let dim = u.nrows();
        let n = n_outcomes.clamp(1, dim);
        let mut elements = vec![CMatrix::zeros(dim, dim); n];
        for k in 0..dim {
            let col = u.column(k);
            elements[k % n] += col * col.adjoint();
        }
        Self { dim, elements }
    }

    /// Tensor product of per-part Fourier bases on the named parts.
    pub fn conjugate(layout: &SystemLayout, labels: &[&str]) -> Result<Self> {
        let u = conjugate_basis(layout, labels)?;
        Ok(Self::from_basis(&u, u.nrows()))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    /// `M_k ⊗ N_l`, outcomes ordered with `k` most significant.
    pub fn tensor(&self, other: &Povm) -> Self {
        let elements = self.elements.iter().flat_map(|a| other.elements.iter().map(move |b| a.kronecker(b))).collect();
        Self { dim: self.dim * other.dim, elements }
    }
}

/// `⊗_part F_{d_part}` over the named parts, in the given order.
pub fn conjugate_basis(layout: &SystemLayout, labels: &[&str]) -> Result<CMatrix> {
    let mut u = linalg::identity(1);
    for l in labels {
        u = u.kronecker(&qudit::fourier_matrix(layout.dim_of(&[l])?));
    }
    Ok(u)
}
