// Copyright 2026 hypoflow contributors
// SPDX-License-Identifier: Apache-2.0

//! Matrix exponential and semigroup action.
//!
//! Scaling-and-squaring with Pade(13), after Higham (2005). Langevin
//! generators are non-normal, so Pade is the default; an eigendecomposition
//! fast path is used when the eigenvector matrix is well conditioned, which
//! makes dense time grids (quadrature, prefactor scans) cheap.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eig, Inverse, OperationNorm, SVD};
use num_complex::Complex64;
use std::sync::Arc;

use crate::error::{HypoflowError, Result};
use crate::linop::LinOp;
use crate::space::{CMat, CVec, C64};
use crate::spectral::{kernel_basis, projector, singular_value_gap};

/// Pade(13) numerator coefficients (Higham 2005, eq. 10.33).
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371920351148152;

/// Condition-number threshold for the eigendecomposition fast path.
const EIG_COND_LIMIT: f64 = 1e6;

/// exp(A) by scaling-and-squaring with Pade(13).
pub fn expm(a: &CMat) -> Result<CMat> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm requires a square matrix");
    if n == 0 {
        return Ok(CMat::zeros((0, 0)));
    }
    let norm = a.opnorm_one()?;
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as u32
    } else {
        0
    };
    let scale = C64::new((0.5f64).powi(s as i32), 0.0);
    let a_scaled = a.mapv(|z| z * scale);
    let mut result = pade13(&a_scaled)?;
    for _ in 0..s {
        result = result.dot(&result);
    }
    Ok(result)
}

fn pade13(a: &CMat) -> Result<CMat> {
    let n = a.nrows();
    let id = CMat::eye(n);
    let a2 = a.dot(a);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);
    let b = |i: usize| C64::new(PADE13[i], 0.0);

    let u_inner = a6.mapv(|z| z * b(13)) + a4.mapv(|z| z * b(11)) + a2.mapv(|z| z * b(9));
    let u_poly = a6.dot(&u_inner)
        + a6.mapv(|z| z * b(7))
        + a4.mapv(|z| z * b(5))
        + a2.mapv(|z| z * b(3))
        + id.mapv(|z| z * b(1));
    let u = a.dot(&u_poly);

    let v_inner = a6.mapv(|z| z * b(12)) + a4.mapv(|z| z * b(10)) + a2.mapv(|z| z * b(8));
    let v = a6.dot(&v_inner)
        + a6.mapv(|z| z * b(6))
        + a4.mapv(|z| z * b(4))
        + a2.mapv(|z| z * b(2))
        + id.mapv(|z| z * b(0));

    let denom = &v - &u;
    let numer = &v + &u;
    let denom_inv = denom.inv().map_err(HypoflowError::Linalg)?;
    Ok(denom_inv.dot(&numer))
}

struct EigPath {
    vecs: CMat,
    vecs_inv: CMat,
    evals: Array1<C64>,
}

/// Reusable propagator exp(t L) for a fixed operator, amortizing the
/// eigendecomposition over many evaluation times.
pub struct Propagator {
    op: LinOp,
    eig: Option<EigPath>,
}

impl Propagator {
    pub fn new(op: &LinOp) -> Result<Self> {
        let eig = match op.matrix.eig() {
            Ok((evals, vecs)) => {
                let (_, sv, _) = vecs.svd(false, false)?;
                let smax = sv.iter().cloned().fold(0.0, f64::max);
                let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
                let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
                if cond < EIG_COND_LIMIT {
                    let vecs_inv = vecs.inv()?;
                    Some(EigPath {
                        vecs,
                        vecs_inv,
                        evals,
                    })
                } else {
                    None
                }
            }
            Err(_) => None,
        };
        Ok(Self { op: op.clone(), eig })
    }

    pub fn op(&self) -> &LinOp {
        &self.op
    }

    pub fn matrix_at(&self, t: f64) -> Result<CMat> {
        assert!(t >= 0.0, "semigroup time must be nonnegative");
        match &self.eig {
            Some(path) => {
                let phases: Array1<C64> = path.evals.mapv(|l| (l * t).exp());
                let mut scaled = path.vecs.clone();
                for (j, mut col) in scaled.columns_mut().into_iter().enumerate() {
                    let p = phases[j];
                    col.mapv_inplace(|z| z * p);
                }
                Ok(scaled.dot(&path.vecs_inv))
            }
            None => expm(&self.op.matrix.mapv(|z| z * t)),
        }
    }

    pub fn apply(&self, t: f64, v: &CVec) -> Result<CVec> {
        match &self.eig {
            Some(path) => {
                let mut coeffs = path.vecs_inv.dot(v);
                for (c, l) in coeffs.iter_mut().zip(path.evals.iter()) {
                    *c *= (l * t).exp();
                }
                Ok(path.vecs.dot(&coeffs))
            }
            None => Ok(self.matrix_at(t)?.dot(v)),
        }
    }
}

/// exp(t A) v for t >= 0.
pub fn semigroup_apply(op: &LinOp, t: f64, v: &CVec) -> Result<CVec> {
    if !t.is_finite() || v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(HypoflowError::NonFinite {
            context: "semigroup_apply inputs",
        });
    }
    assert!(t >= 0.0, "semigroup_apply requires t >= 0");
    Propagator::new(op)?.apply(t, v)
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct RelaxationReport {
    pub t_rel: f64,
    /// 1 / (2 s(L)) from the singular value gap.
    pub lower_bound: f64,
}

/// Smallest time with ||exp(tL)(I - P_inf)|| <= 1/e in the weighted norm,
/// located by geometric scan plus bisection to 1e-3 relative precision.
pub fn relaxation_time(op: &LinOp, tol: f64, t_max: f64) -> Result<RelaxationReport> {
    let sgap = singular_value_gap(op, tol)?;
    let lower_bound = 1.0 / (2.0 * sgap);

    let kb = kernel_basis(op, tol)?;
    let p_inf = projector(&kb, Arc::clone(&op.space))?;
    let q = &CMat::eye(op.dim()) - &p_inf.matrix;
    let prop = Propagator::new(op)?;
    let decay_norm = |t: f64| -> Result<f64> {
        let m = prop.matrix_at(t)?.dot(&q);
        LinOp::new(m, Arc::clone(&op.space))?.op_norm()
    };
    let target = (-1.0f64).exp();

    // Geometric scan for the first bracketing interval.
    let mut t_lo = 0.0;
    let mut t = (lower_bound / 16.0).max(1e-12);
    loop {
        if t > t_max {
            return Err(HypoflowError::DidNotRelax { t_max });
        }
        let f = decay_norm(t)?;
        if f <= target {
            break;
        }
        t_lo = t;
        t *= 1.25;
    }
    let mut t_hi = t;
    while (t_hi - t_lo) > 1e-3 * t_hi {
        let mid = 0.5 * (t_lo + t_hi);
        if decay_norm(mid)? <= target {
            t_hi = mid;
        } else {
            t_lo = mid;
        }
    }
    let t_rel = t_hi;
    debug_assert!(t_rel >= lower_bound * (1.0 - 1e-6));
    Ok(RelaxationReport { t_rel, lower_bound })
}

pub fn diag_matrix(entries: &[f64]) -> Array2<Complex64> {
    let n = entries.len();
    let mut m = CMat::zeros((n, n));
    for (i, &e) in entries.iter().enumerate() {
        m[[i, i]] = C64::new(e, 0.0);
    }
    m
}
