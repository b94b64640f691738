// Copyright 2026 hypoflow contributors
// SPDX-License-Identifier: Apache-2.0

//! Finite-dimensional weighted Hilbert spaces.
//!
//! A [`WeightedSpace`] is a Gram matrix defining the inner product
//! `<x, y> = x^H G y`. The L2(mu) geometry of the classical models and the
//! KMS geometry of the quantum models are both instances; all downstream
//! operator computations (adjoints, gaps, norms) are taken with respect to
//! this metric.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Cholesky, Eigh, Inverse, Norm, UPLO};
use num_complex::Complex64;
use std::sync::Arc;

use crate::error::{HypoflowError, Result};

pub type C64 = Complex64;
pub type CMat = Array2<C64>;
pub type CVec = Array1<C64>;

pub const HERMITIAN_TOL: f64 = 1e-12;

/// Scalar field of the underlying space. Storage is complex either way;
/// the tag records whether imaginary parts are structural or incidental.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

/// Finite-dimensional inner-product space given by a Hermitian positive
/// definite Gram matrix.
#[derive(Debug)]
pub struct WeightedSpace {
    dim: usize,
    field: Field,
    gram: CMat,
    // Cached upper Cholesky factor F with G = F^H F, and its inverse.
    // Conjugating by F reduces weighted computations to Euclidean ones.
    chol: CMat,
    chol_inv: CMat,
}

impl WeightedSpace {
    pub fn new(gram: CMat, field: Field) -> Result<Arc<Self>> {
        let dim = gram.nrows();
        if gram.ncols() != dim || dim == 0 {
            return Err(HypoflowError::DimensionMismatch {
                rows: gram.nrows(),
                cols: gram.ncols(),
                dim,
            });
        }
        let herm_residual = {
            let diff = &gram - &conj_transpose(&gram);
            let denom = gram.norm_l2().max(f64::MIN_POSITIVE);
            diff.norm_l2() / denom
        };
        if herm_residual > HERMITIAN_TOL {
            return Err(HypoflowError::GramNotHermitian {
                residual: herm_residual,
            });
        }
        // Symmetrize exactly so the Cholesky factor is well defined.
        let gram = (&gram + &conj_transpose(&gram)).mapv(|z| 0.5 * z);
        let (eigs, _) = gram.eigh(UPLO::Lower)?;
        let min_eig = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig <= 0.0 {
            return Err(HypoflowError::GramNotPositive { min_eig });
        }
        let chol = gram.cholesky(UPLO::Upper)?;
        let chol_inv = chol
            .inv()
            .map_err(|_| HypoflowError::DegenerateMetric)?;
        Ok(Arc::new(Self {
            dim,
            field,
            gram,
            chol,
            chol_inv,
        }))
    }

    /// Euclidean space of the given dimension (gram = identity).
    pub fn euclidean(dim: usize, field: Field) -> Arc<Self> {
        Self::new(CMat::eye(dim), field).expect("identity gram is valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn gram(&self) -> &CMat {
        &self.gram
    }

    /// Upper Cholesky factor F with G = F^H F.
    pub fn chol(&self) -> &CMat {
        &self.chol
    }

    pub fn chol_inv(&self) -> &CMat {
        &self.chol_inv
    }

    pub fn inner(&self, x: &CVec, y: &CVec) -> C64 {
        let gy = self.gram.dot(y);
        x.iter().zip(gy.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn norm(&self, x: &CVec) -> f64 {
        self.inner(x, x).re.max(0.0).sqrt()
    }

    /// Conjugate a matrix into Euclidean coordinates: F A F^{-1}.
    pub fn to_euclidean(&self, a: &CMat) -> CMat {
        self.chol.dot(a).dot(&self.chol_inv)
    }

    /// Map a Euclidean-coordinates matrix back: F^{-1} A F.
    pub fn from_euclidean(&self, a: &CMat) -> CMat {
        self.chol_inv.dot(a).dot(&self.chol)
    }
}

impl PartialEq for WeightedSpace {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.gram == other.gram
    }
}

pub fn conj_transpose(a: &CMat) -> CMat {
    a.t().mapv(|z| z.conj())
}

pub fn real_mat(a: &Array2<f64>) -> CMat {
    a.mapv(|x| C64::new(x, 0.0))
}
