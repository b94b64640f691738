// Copyright 2026 hypoflow contributors
// SPDX-License-Identifier: Apache-2.0

//! Linear operators on weighted spaces.

use ndarray::Array2;
use ndarray_linalg::{Norm, SVD};
use num_complex::Complex64;
use std::sync::Arc;

use crate::error::{HypoflowError, Result};
use crate::space::{conj_transpose, CMat, CVec, WeightedSpace};

/// A matrix together with the weighted space it acts on.
#[derive(Debug, Clone)]
pub struct LinOp {
    pub matrix: CMat,
    pub space: Arc<WeightedSpace>,
}

/// Outcome of a symmetry classification in the weighted geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetry {
    Symmetric,
    Antisymmetric,
    Neither,
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct SymmetryReport {
    pub classification: Symmetry,
    /// Relative weighted-norm residual of A* - A.
    pub symmetric_residual: f64,
    /// Relative weighted-norm residual of A* + A.
    pub antisymmetric_residual: f64,
}

impl LinOp {
    pub fn new(matrix: CMat, space: Arc<WeightedSpace>) -> Result<Self> {
        if matrix.nrows() != space.dim() || matrix.ncols() != space.dim() {
            return Err(HypoflowError::DimensionMismatch {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
                dim: space.dim(),
            });
        }
        Ok(Self { matrix, space })
    }

    pub fn zeros(space: Arc<WeightedSpace>) -> Self {
        let d = space.dim();
        Self {
            matrix: CMat::zeros((d, d)),
            space,
        }
    }

    pub fn identity(space: Arc<WeightedSpace>) -> Self {
        let d = space.dim();
        Self {
            matrix: CMat::eye(d),
            space,
        }
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn apply(&self, v: &CVec) -> CVec {
        self.matrix.dot(v)
    }

    /// The weighted adjoint A* = G^{-1} A^H G, satisfying <A* x, y> = <x, A y>.
    pub fn adjoint(&self) -> Result<LinOp> {
        let g = self.space.gram();
        let finv = self.space.chol_inv();
        let f = self.space.chol();
        // G^{-1} A^H G computed via the Cholesky factor:
        // G^{-1} = F^{-1} F^{-H}, so A* = F^{-1} (F A F^{-1})^H F.
        let tilde = f.dot(&self.matrix).dot(finv);
        let adj = finv.dot(&conj_transpose(&tilde)).dot(f);
        debug_assert_eq!(g.nrows(), adj.nrows());
        LinOp::new(adj, Arc::clone(&self.space))
    }

    /// Weighted operator norm: largest singular value of F A F^{-1}.
    pub fn op_norm(&self) -> Result<f64> {
        let tilde = self.space.to_euclidean(&self.matrix);
        let (_, s, _) = tilde.svd(false, false)?;
        Ok(s.iter().cloned().fold(0.0, f64::max))
    }

    /// Classify the operator as symmetric / antisymmetric / neither
    /// with respect to the weighted inner product.
    pub fn symmetry_check(&self, tol: f64) -> Result<SymmetryReport> {
        assert!(tol > 0.0, "symmetry_check requires tol > 0");
        let adj = self.adjoint()?;
        let scale = self.op_norm()?.max(f64::MIN_POSITIVE);
        let sym = LinOp::new(&adj.matrix - &self.matrix, Arc::clone(&self.space))?;
        let anti = LinOp::new(&adj.matrix + &self.matrix, Arc::clone(&self.space))?;
        let symmetric_residual = sym.op_norm()? / scale;
        let antisymmetric_residual = anti.op_norm()? / scale;
        let classification = if symmetric_residual < tol {
            Symmetry::Symmetric
        } else if antisymmetric_residual < tol {
            Symmetry::Antisymmetric
        } else {
            Symmetry::Neither
        };
        Ok(SymmetryReport {
            classification,
            symmetric_residual,
            antisymmetric_residual,
        })
    }

    pub fn scale(&self, factor: Complex64) -> LinOp {
        LinOp {
            matrix: self.matrix.mapv(|z| z * factor),
            space: Arc::clone(&self.space),
        }
    }

    pub fn add(&self, other: &LinOp) -> Result<LinOp> {
        if self.dim() != other.dim() {
            return Err(HypoflowError::DimensionMismatch {
                rows: other.matrix.nrows(),
                cols: other.matrix.ncols(),
                dim: self.dim(),
            });
        }
        LinOp::new(&self.matrix + &other.matrix, Arc::clone(&self.space))
    }

    pub fn compose(&self, other: &LinOp) -> Result<LinOp> {
        LinOp::new(self.matrix.dot(&other.matrix), Arc::clone(&self.space))
    }

    pub fn frobenius(&self) -> f64 {
        self.matrix.norm_l2()
    }
}

pub fn complex_from_real(a: &Array2<f64>) -> CMat {
    a.mapv(|x| Complex64::new(x, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{Field, C64};
    use ndarray::array;

    fn euclid2() -> Arc<WeightedSpace> {
        WeightedSpace::euclidean(2, Field::Real)
    }

    #[test]
    fn adjoint_euclidean_is_conjugate_transpose() {
        let a = array![
            [C64::new(1.0, 2.0), C64::new(3.0, -1.0)],
            [C64::new(0.0, 1.0), C64::new(-2.0, 0.0)]
        ];
        let op = LinOp::new(a.clone(), euclid2()).unwrap();
        let adj = op.adjoint().unwrap();
        let diff = (&adj.matrix - &conj_transpose(&a)).norm_l2();
        assert!(diff < 1e-12);
    }

    #[test]
    fn adjoint_diag_gram_example() {
        // gram = diag(1,2), A = [[0,1],[0,0]] -> A* = [[0,0],[1/2,0]]
        let g = array![
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(2.0, 0.0)]
        ];
        let sp = WeightedSpace::new(g, Field::Real).unwrap();
        let a = array![
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(0.0, 0.0)]
        ];
        let op = LinOp::new(a, sp).unwrap();
        let adj = op.adjoint().unwrap();
        let expected = array![
            [C64::new(0.0, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.5, 0.0), C64::new(0.0, 0.0)]
        ];
        assert!((&adj.matrix - &expected).norm_l2() < 1e-12);
    }

    #[test]
    fn symmetry_classification() {
        let skew = array![
            [C64::new(0.0, 0.0), C64::new(-1.0, 0.0)],
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]
        ];
        let op = LinOp::new(skew, euclid2()).unwrap();
        let rep = op.symmetry_check(1e-10).unwrap();
        assert_eq!(rep.classification, Symmetry::Antisymmetric);

        let diag = array![
            [C64::new(-1.0, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(-2.0, 0.0)]
        ];
        let op = LinOp::new(diag, euclid2()).unwrap();
        let rep = op.symmetry_check(1e-10).unwrap();
        assert_eq!(rep.classification, Symmetry::Symmetric);

        let mixed = array![
            [C64::new(1.0, 0.0), C64::new(1.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]
        ];
        let op = LinOp::new(mixed, euclid2()).unwrap();
        let rep = op.symmetry_check(1e-10).unwrap();
        assert_eq!(rep.classification, Symmetry::Neither);
    }
}
