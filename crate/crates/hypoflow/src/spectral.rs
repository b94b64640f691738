// Copyright 2026 hypoflow contributors
// SPDX-License-Identifier: Apache-2.0

//! Kernels, projectors, spectral and singular-value gaps, pseudoinverses.
//!
//! All computations conjugate by the cached Cholesky factor of the Gram
//! matrix, so gaps and singular values are those of the weighted geometry.

use ndarray::{s, Array1, Array2, Axis};
use ndarray_linalg::{Eig, Eigh, Norm, SVD, UPLO};
use num_complex::Complex64;
use std::cmp::Ordering;
use std::sync::Arc;

use crate::error::{HypoflowError, Result};
use crate::linop::{LinOp, Symmetry};
use crate::space::{conj_transpose, CMat, C64};

/// Default kernel cutoff relative to the largest singular value.
pub const DEFAULT_KERNEL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, serde::Serialize)]
pub struct SpectralReport {
    /// Eigenvalues sorted by (Re, Im) ascending.
    pub eigenvalues: Vec<(f64, f64)>,
    /// min { Re(-lambda) : |lambda| > kernel cutoff }.
    pub gap: f64,
    pub kernel_dim: usize,
    pub tolerance_used: f64,
}

fn sorted_eigenvalues(matrix: &CMat) -> Result<Vec<C64>> {
    let (evals, _) = matrix.eig()?;
    let mut v: Vec<C64> = evals.to_vec();
    v.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap_or(Ordering::Equal)
            .then(a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal))
    });
    Ok(v)
}

fn largest_singular_value(tilde: &CMat) -> Result<f64> {
    let (_, sv, _) = tilde.svd(false, false)?;
    Ok(sv.iter().cloned().fold(0.0, f64::max))
}

/// Spectral gap of a dissipative operator: the smallest Re(-lambda) over
/// eigenvalues outside the kernel cutoff. `tol` is relative to the largest
/// singular value of the operator.
pub fn spectral_gap(op: &LinOp, tol: f64) -> Result<SpectralReport> {
    assert!(tol > 0.0, "spectral_gap requires tol > 0");
    let tilde = op.space.to_euclidean(&op.matrix);
    let scale = largest_singular_value(&tilde)?;
    let cutoff = tol * scale.max(f64::MIN_POSITIVE);
    let evals = sorted_eigenvalues(&op.matrix)?;
    let max_re = evals.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    if max_re > cutoff {
        return Err(HypoflowError::NotDissipative { max_re });
    }
    let kernel_dim = evals.iter().filter(|z| z.norm() <= cutoff).count();
    let gap = evals
        .iter()
        .filter(|z| z.norm() > cutoff)
        .map(|z| -z.re)
        .fold(f64::INFINITY, f64::min);
    if !gap.is_finite() {
        return Err(HypoflowError::GapUndefined);
    }
    Ok(SpectralReport {
        eigenvalues: evals.iter().map(|z| (z.re, z.im)).collect(),
        gap,
        kernel_dim,
        tolerance_used: cutoff,
    })
}

/// Gram-orthonormal basis of the numerical kernel {x : ||Ax|| <= tol ||A|| ||x||}.
///
/// Returns an n x k matrix; k may be zero.
pub fn kernel_basis(op: &LinOp, tol: f64) -> Result<CMat> {
    assert!(tol > 0.0, "kernel_basis requires tol > 0");
    let n = op.dim();
    let tilde = op.space.to_euclidean(&op.matrix);
    let (_, sv, vh) = tilde.svd(false, true)?;
    let vh = vh.expect("requested right singular vectors");
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let cutoff = tol * smax.max(f64::MIN_POSITIVE);
    // Singular values come back descending; the kernel directions are the
    // trailing right singular vectors.
    let kernel_cols: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] <= cutoff).collect();
    let k = kernel_cols.len();
    let mut basis = CMat::zeros((n, k));
    for (j, &i) in kernel_cols.iter().enumerate() {
        // Row i of V^H is the conjugate of the right singular vector.
        let v: Array1<C64> = vh.slice(s![i, ..]).mapv(|z| z.conj());
        basis.slice_mut(s![.., j]).assign(&v);
    }
    // Back to original coordinates; columns stay gram-orthonormal since
    // <F^{-1}u, F^{-1}w>_G = u^H w.
    let basis = op.space.chol_inv().dot(&basis);
    Ok(canonicalize_columns(basis))
}

/// Fix a deterministic sign/phase: the largest-modulus entry of each column
/// is made real positive.
pub fn canonicalize_columns(mut basis: CMat) -> CMat {
    for mut col in basis.axis_iter_mut(Axis(1)) {
        let mut best = 0usize;
        let mut best_norm = 0.0;
        for (i, z) in col.iter().enumerate() {
            if z.norm() > best_norm + 1e-14 {
                best_norm = z.norm();
                best = i;
            }
        }
        if best_norm > 0.0 {
            let phase = col[best] / best_norm;
            let correction = phase.conj();
            col.mapv_inplace(|z| z * correction);
        }
    }
    basis
}

/// Orthogonal projector onto the span of a gram-orthonormal basis.
pub fn projector(basis: &CMat, space: Arc<crate::space::WeightedSpace>) -> Result<LinOp> {
    let n = space.dim();
    let k = basis.ncols();
    if basis.nrows() != n {
        return Err(HypoflowError::DimensionMismatch {
            rows: basis.nrows(),
            cols: k,
            dim: n,
        });
    }
    if k == 0 {
        return LinOp::new(CMat::zeros((n, n)), space);
    }
    let overlap = conj_transpose(basis).dot(space.gram()).dot(basis);
    let residual = (&overlap - &CMat::eye(k)).norm_l2();
    if residual > 1e-8 {
        return Err(HypoflowError::BasisNotOrthonormal { residual });
    }
    // P = B B^H G; self-adjoint in the weighted metric and idempotent.
    let p = basis.dot(&conj_transpose(basis)).dot(space.gram());
    LinOp::new(p, space)
}

/// Smallest singular value of the operator restricted to the orthogonal
/// complement of its kernel, in the weighted geometry.
pub fn singular_value_gap(op: &LinOp, tol: f64) -> Result<f64> {
    assert!(tol > 0.0, "singular_value_gap requires tol > 0");
    let tilde = op.space.to_euclidean(&op.matrix);
    let (_, sv, _) = tilde.svd(false, false)?;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let cutoff = tol * smax.max(f64::MIN_POSITIVE);
    let gap = sv
        .iter()
        .cloned()
        .filter(|&x| x > cutoff)
        .fold(f64::INFINITY, f64::min);
    if !gap.is_finite() {
        return Err(HypoflowError::GapUndefined);
    }
    Ok(gap)
}

/// Moore-Penrose pseudoinverse of a (weighted-)symmetric operator.
///
/// Eigenvalues with |lambda| <= tol * max|lambda| are treated as kernel.
pub fn pseudo_inverse(op: &LinOp, tol: f64) -> Result<LinOp> {
    assert!(tol > 0.0, "pseudo_inverse requires tol > 0");
    let sym = op.symmetry_check(1e-8)?;
    if sym.classification != Symmetry::Symmetric {
        return Err(HypoflowError::PseudoInverseNotSymmetric {
            residual: sym.symmetric_residual,
        });
    }
    let tilde = op.space.to_euclidean(&op.matrix);
    // Exactly Hermitian up to the symmetry residual; symmetrize before eigh.
    let herm = (&tilde + &conj_transpose(&tilde)).mapv(|z| 0.5 * z);
    let (evals, vecs) = herm.eigh(UPLO::Lower)?;
    let max_abs = evals.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let cutoff = tol * max_abs.max(f64::MIN_POSITIVE);
    let inv_diag: Array2<Complex64> = Array2::from_diag(&Array1::from(
        evals
            .iter()
            .map(|&l| {
                if l.abs() > cutoff {
                    C64::new(1.0 / l, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            })
            .collect::<Vec<_>>(),
    ));
    let vecs_c = vecs.mapv(|z| z);
    let pinv_tilde = vecs_c.dot(&inv_diag).dot(&conj_transpose(&vecs_c));
    let pinv = op.space.from_euclidean(&pinv_tilde);
    LinOp::new(pinv, Arc::clone(&op.space))
}
