// Copyright 2026 hypoflow contributors
// SPDX-License-Identifier: Apache-2.0

//! Spectral Galerkin discretization of Langevin and overdamped generators.
//!
//! Velocity direction: probabilists' Hermite functions of the Gaussian
//! weight, where the Ornstein-Uhlenbeck part is exactly diagonal,
//! L_s He_k = -k He_k. Position direction: Hermite functions of e^{-U} for
//! quadratic U (where everything is closed form), Fourier modes
//! orthonormalized against e^{-U} by quadrature for periodic U. Both give
//! an identity Gram matrix, so the discrete (anti)symmetry of (L_a, L_s)
//! holds by construction rather than by quadrature accident.

use ndarray::{s, Array2};
use ndarray_linalg::{Cholesky, Inverse, Norm, UPLO};
use std::sync::Arc;

use crate::decomp::{BasisTag, GeneratorDecomposition};
use crate::error::{HypoflowError, Result};
use crate::linop::{complex_from_real, LinOp};
use crate::space::{Field, WeightedSpace};
use crate::spectral::{spectral_gap, DEFAULT_KERNEL_TOL};

/// Confining potential U for the 1D models.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PotentialSpec {
    /// U(x) = m x^2 / 2 on the line.
    Quadratic { m: f64 },
    /// U(x) = sum_j cos[j-1] cos(jx) + sin[j-1] sin(jx) on [0, 2pi).
    Periodic { cos: Vec<f64>, sin: Vec<f64> },
}

impl PotentialSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            PotentialSpec::Quadratic { m } => {
                if !(*m > 0.0) || !m.is_finite() {
                    return Err(HypoflowError::InvalidModel(format!(
                        "quadratic potential requires m > 0, got {m}"
                    )));
                }
            }
            PotentialSpec::Periodic { cos, sin } => {
                if cos.iter().chain(sin.iter()).any(|c| !c.is_finite()) {
                    return Err(HypoflowError::InvalidModel(
                        "periodic potential coefficients must be finite".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// U(x).
    pub fn value(&self, x: f64) -> f64 {
        match self {
            PotentialSpec::Quadratic { m } => 0.5 * m * x * x,
            PotentialSpec::Periodic { cos, sin } => Self::periodic_value(cos, sin, x),
        }
    }

    /// U'(x).
    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            PotentialSpec::Quadratic { m } => m * x,
            PotentialSpec::Periodic { cos, sin } => Self::periodic_derivative(cos, sin, x),
        }
    }

    /// Characteristic frequency scale: sqrt(m) for the quadratic well, the
    /// largest mode frequency for periodic potentials (1 when flat).
    pub fn frequency_scale(&self) -> f64 {
        match self {
            PotentialSpec::Quadratic { m } => m.sqrt(),
            PotentialSpec::Periodic { cos, sin } => cos.len().max(sin.len()).max(1) as f64,
        }
    }

    fn periodic_value(cos: &[f64], sin: &[f64], x: f64) -> f64 {
        let mut u = 0.0;
        for (j, c) in cos.iter().enumerate() {
            u += c * ((j + 1) as f64 * x).cos();
        }
        for (j, c) in sin.iter().enumerate() {
            u += c * ((j + 1) as f64 * x).sin();
        }
        u
    }

    fn periodic_derivative(cos: &[f64], sin: &[f64], x: f64) -> f64 {
        let mut du = 0.0;
        for (j, c) in cos.iter().enumerate() {
            let k = (j + 1) as f64;
            du -= c * k * (k * x).sin();
        }
        for (j, c) in sin.iter().enumerate() {
            let k = (j + 1) as f64;
            du += c * k * (k * x).cos();
        }
        du
    }
}

/// Matrices of d/dx, multiplication by U', and the Dirichlet-form overdamped
/// generator, all in a gram-orthonormal x-basis.
struct XOperators {
    derivative: Array2<f64>,
    mult_uprime: Array2<f64>,
    overdamped: Array2<f64>,
}

fn x_operators(potential: &PotentialSpec, n_x: usize) -> Result<XOperators> {
    potential.validate()?;
    match potential {
        PotentialSpec::Quadratic { m } => {
            // Scaled Hermite basis psi_i(x) = He_i(sqrt(m) x)/sqrt(i!):
            // d/dx psi_i = sqrt(m i) psi_{i-1};
            // U' psi_i = sqrt(m) (sqrt(i+1) psi_{i+1} + sqrt(i) psi_{i-1}).
            let mut d = Array2::zeros((n_x, n_x));
            let mut mu = Array2::zeros((n_x, n_x));
            for i in 1..n_x {
                d[[i - 1, i]] = (m * i as f64).sqrt();
            }
            for i in 0..n_x {
                if i + 1 < n_x {
                    mu[[i + 1, i]] = (m * (i + 1) as f64).sqrt();
                }
                if i >= 1 {
                    mu[[i - 1, i]] = (m * i as f64).sqrt();
                }
            }
            let overdamped = -d.t().dot(&d);
            Ok(XOperators {
                derivative: d,
                mult_uprime: mu,
                overdamped,
            })
        }
        PotentialSpec::Periodic { cos, sin } => {
            let max_mode = (n_x + 1) / 2;
            let u_mode = cos.len().max(sin.len());
            // >= 8x oversampling of the highest mode appearing in any overlap.
            let n_q = (8 * (2 * max_mode + u_mode + 1)).max(64);
            let h = 2.0 * std::f64::consts::PI / n_q as f64;
            let xs: Vec<f64> = (0..n_q).map(|q| q as f64 * h).collect();
            let weights: Vec<f64> = xs
                .iter()
                .map(|&x| (-PotentialSpec::periodic_value(cos, sin, x)).exp())
                .collect();
            let z: f64 = weights.iter().sum::<f64>() * h;
            if !z.is_finite() || z <= 0.0 {
                return Err(HypoflowError::Quadrature {
                    context: format!("non-integrable e^-U, Z = {z}"),
                });
            }

            // Raw Fourier basis evaluated on the grid, with derivatives.
            let mut phi = Array2::zeros((n_q, n_x));
            let mut dphi = Array2::zeros((n_q, n_x));
            for (q, &x) in xs.iter().enumerate() {
                phi[[q, 0]] = 1.0;
                for col in 1..n_x {
                    let j = ((col + 1) / 2) as f64;
                    if col % 2 == 1 {
                        phi[[q, col]] = (j * x).cos();
                        dphi[[q, col]] = -j * (j * x).sin();
                    } else {
                        phi[[q, col]] = (j * x).sin();
                        dphi[[q, col]] = j * (j * x).cos();
                    }
                }
            }
            let wdiag: Vec<f64> = weights.iter().map(|w| w * h / z).collect();
            let weighted = |a: &Array2<f64>, extra: Option<&[f64]>| -> Array2<f64> {
                let mut aw = a.clone();
                for (q, mut row) in aw.rows_mut().into_iter().enumerate() {
                    let mut w = wdiag[q];
                    if let Some(e) = extra {
                        w *= e[q];
                    }
                    row.mapv_inplace(|v| v * w);
                }
                aw
            };
            let uprime: Vec<f64> = xs
                .iter()
                .map(|&x| PotentialSpec::periodic_derivative(cos, sin, x))
                .collect();

            let gram = phi.t().dot(&weighted(&phi, None));
            let r = gram.cholesky(UPLO::Upper)?;
            let r_inv = r.inv()?;
            let conj = |raw: &Array2<f64>| r_inv.t().dot(raw).dot(&r_inv);

            let derivative = conj(&phi.t().dot(&weighted(&dphi, None)));
            let mult_uprime = conj(&phi.t().dot(&weighted(&phi, Some(&uprime))));
            let dirichlet = conj(&dphi.t().dot(&weighted(&dphi, None)));
            let overdamped = -(&dirichlet + &dirichlet.t()) * 0.5;
            Ok(XOperators {
                derivative,
                mult_uprime,
                overdamped,
            })
        }
    }
}

fn kron(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = Array2::zeros((ra * rb, ca * cb));
    for i in 0..ra {
        for j in 0..ca {
            let v = a[[i, j]];
            if v != 0.0 {
                let mut block = out.slice_mut(s![i * rb..(i + 1) * rb, j * cb..(j + 1) * cb]);
                block.assign(&(b * v));
            }
        }
    }
    out
}

/// Galerkin matrix of the Langevin generator split (L_a, L_s) on the
/// product basis {psi_i(x) He_k(v)}, flattened as index = i * n_v + k.
pub fn build_langevin(
    potential: &PotentialSpec,
    n_x: usize,
    n_v: usize,
    gamma: f64,
) -> Result<GeneratorDecomposition> {
    assert!(n_x >= 2 && n_v >= 2, "need at least 2 modes per variable");
    let ops = x_operators(potential, n_x)?;

    // v-direction ladder matrices in the normalized Hermite basis:
    // (v .) = S+ + S-, (d/dv) = S-.
    let mut v_mult = Array2::zeros((n_v, n_v));
    let mut v_deriv = Array2::zeros((n_v, n_v));
    for k in 1..n_v {
        v_mult[[k, k - 1]] = (k as f64).sqrt();
        v_mult[[k - 1, k]] = (k as f64).sqrt();
        v_deriv[[k - 1, k]] = (k as f64).sqrt();
    }
    let ix = Array2::eye(n_x);

    let l_a_raw = kron(&ops.derivative, &v_mult) - kron(&ops.mult_uprime, &v_deriv);
    // Galerkin truncation can leave a small symmetric remainder at the
    // boundary modes (periodic case); project onto the antisymmetric part
    // and record what was removed.
    let l_a_anti = (&l_a_raw - &l_a_raw.t()) * 0.5;
    let antisym_projection_norm = ((&l_a_raw + &l_a_raw.t()) * 0.5).norm_l2();

    let mut ls_v = Array2::zeros((n_v, n_v));
    for k in 0..n_v {
        ls_v[[k, k]] = -(k as f64);
    }
    let l_s = kron(&ix, &ls_v);

    let dim = n_x * n_v;
    let mut pi_s = Array2::zeros((dim, dim));
    let mut basis_meta = Vec::with_capacity(dim);
    for i in 0..n_x {
        for k in 0..n_v {
            let idx = i * n_v + k;
            if k == 0 {
                pi_s[[idx, idx]] = 1.0;
            }
            basis_meta.push(BasisTag {
                x_index: i,
                v_degree: k,
            });
        }
    }

    let space = WeightedSpace::euclidean(dim, Field::Real);
    let mut constant = ndarray::Array1::zeros(dim);
    constant[0] = crate::space::C64::new(1.0, 0.0);
    GeneratorDecomposition::new(
        LinOp::new(complex_from_real(&l_a_anti), Arc::clone(&space))?,
        LinOp::new(complex_from_real(&l_s), Arc::clone(&space))?,
        gamma,
        LinOp::new(complex_from_real(&pi_s), space)?,
        basis_meta,
        antisym_projection_norm,
        constant,
    )
}

/// Overdamped generator L_O = -grad U . grad + Laplacian on the x-basis.
pub fn build_overdamped(potential: &PotentialSpec, n_x: usize) -> Result<LinOp> {
    assert!(n_x >= 2, "need at least 2 modes");
    let ops = x_operators(potential, n_x)?;
    let space = WeightedSpace::euclidean(n_x, Field::Real);
    let op = LinOp::new(complex_from_real(&ops.overdamped), space)?;
    let rep = op.symmetry_check(1e-10)?;
    if rep.symmetric_residual > 1e-10 {
        return Err(HypoflowError::DecompositionInvariant {
            context: "overdamped generator not symmetric",
            residual: rep.symmetric_residual,
        });
    }
    Ok(op)
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct PoincareEstimate {
    /// Spectral gap of -L_O at truncation n_x.
    pub value: f64,
    /// Same at truncation 2 n_x.
    pub refined_value: f64,
    /// False when the two refinements differ by more than 1e-4 relative.
    pub converged: bool,
}

/// Poincare constant of mu_x, read off as the spectral gap of -L_O, with a
/// truncation-refinement consistency check.
pub fn poincare_constant(potential: &PotentialSpec, n_x: usize) -> Result<PoincareEstimate> {
    let gap = |n: usize| -> Result<f64> {
        let op = build_overdamped(potential, n)?;
        Ok(spectral_gap(&op, DEFAULT_KERNEL_TOL)?.gap)
    };
    let value = gap(n_x)?;
    let refined_value = gap(2 * n_x)?;
    let converged = (value - refined_value).abs() <= 1e-4 * refined_value.abs().max(1e-300);
    Ok(PoincareEstimate {
        value,
        refined_value,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{CVec, C64};
    use crate::spectral::kernel_basis;
    use ndarray::Array1;

    #[test]
    fn langevin_small_hand_computation() {
        // m = 1, n_x = n_v = 2: L_s = diag(0,-1,0,-1) over (i,k) flattened,
        // L_a couples (1,0) <-> (0,1) with +-1.
        let d = build_langevin(&PotentialSpec::Quadratic { m: 1.0 }, 2, 2, 1.0).unwrap();
        let ls = &d.l_s.matrix;
        for idx in 0..4 {
            let expect = if idx % 2 == 1 { -1.0 } else { 0.0 };
            assert!((ls[[idx, idx]].re - expect).abs() < 1e-14);
        }
        let la = &d.l_a.matrix;
        // index (i,k) = i*2 + k: (0,1) = 1, (1,0) = 2.
        assert!((la[[1, 2]].re - 1.0).abs() < 1e-14);
        assert!((la[[2, 1]].re + 1.0).abs() < 1e-14);
        // everything else in those columns is zero
        assert!(la[[0, 1]].norm() < 1e-14 && la[[3, 1]].norm() < 1e-14);
    }

    #[test]
    fn constant_column_is_zero() {
        for potential in [
            PotentialSpec::Quadratic { m: 0.7 },
            PotentialSpec::Periodic {
                cos: vec![0.3],
                sin: vec![-0.1],
            },
        ] {
            let d = build_langevin(&potential, 4, 4, 1.0).unwrap();
            let mut e0: CVec = Array1::zeros(16);
            e0[0] = C64::new(1.0, 0.0);
            assert!(d.space.norm(&d.l_a.apply(&e0)) < 1e-10);
            assert!(d.space.norm(&d.l_s.apply(&e0)) < 1e-14);
        }
    }

    #[test]
    fn critical_damping_gap() {
        // quadratic m=1, gamma=2: analytic OU gap sqrt(m) = 1.
        let d = build_langevin(&PotentialSpec::Quadratic { m: 1.0 }, 16, 16, 2.0).unwrap();
        let l = d.full().unwrap();
        let rep = spectral_gap(&l, DEFAULT_KERNEL_TOL).unwrap();
        assert!((rep.gap - 1.0).abs() < 1e-6, "gap = {}", rep.gap);
    }

    #[test]
    fn langevin_kernel_of_ls_counts_v_independent_modes() {
        let d = build_langevin(&PotentialSpec::Quadratic { m: 1.0 }, 8, 8, 1.0).unwrap();
        let kb = kernel_basis(&d.l_s, DEFAULT_KERNEL_TOL).unwrap();
        assert_eq!(kb.ncols(), 8);
        // Projector annihilates any basis function with v-degree >= 1.
        for (idx, tag) in d.basis_meta.iter().enumerate() {
            let mut e: CVec = Array1::zeros(64);
            e[idx] = C64::new(1.0, 0.0);
            let p = d.pi_s.apply(&e);
            let n = d.space.norm(&p);
            if tag.v_degree == 0 {
                assert!((n - 1.0).abs() < 1e-12);
            } else {
                assert!(n < 1e-12);
            }
        }
    }

    #[test]
    fn overdamped_quadratic_spectrum() {
        let op = build_overdamped(&PotentialSpec::Quadratic { m: 1.0 }, 6).unwrap();
        let rep = spectral_gap(&op, DEFAULT_KERNEL_TOL).unwrap();
        for (n, (re, im)) in rep.eigenvalues.iter().rev().enumerate() {
            assert!((re + n as f64).abs() < 1e-8);
            assert!(im.abs() < 1e-10);
        }
    }

    #[test]
    fn overdamped_free_torus_spectrum() {
        // U = 0 on the torus: Fourier Laplacian eigenvalues -j^2 (doubled).
        let op = build_overdamped(
            &PotentialSpec::Periodic {
                cos: vec![],
                sin: vec![],
            },
            5,
        )
        .unwrap();
        let rep = spectral_gap(&op, DEFAULT_KERNEL_TOL).unwrap();
        let mut expected = vec![0.0, -1.0, -1.0, -4.0, -4.0];
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for ((re, _), want) in rep.eigenvalues.iter().zip(expected.iter()) {
            assert!((re - want).abs() < 1e-8, "re = {re}, want {want}");
        }
        assert!((rep.gap - 1.0).abs() < 1e-8);
    }

    #[test]
    fn poincare_quadratic_matches_curvature() {
        for m in [0.04, 1.0] {
            let est = poincare_constant(&PotentialSpec::Quadratic { m }, 8).unwrap();
            assert!((est.value - m).abs() < 1e-8);
            assert!(est.converged);
        }
    }

    #[test]
    fn rejects_bad_potentials() {
        assert!(build_overdamped(&PotentialSpec::Quadratic { m: -1.0 }, 4).is_err());
        assert!(build_overdamped(
            &PotentialSpec::Periodic {
                cos: vec![f64::NAN],
                sin: vec![]
            },
            4
        )
        .is_err());
    }
}
