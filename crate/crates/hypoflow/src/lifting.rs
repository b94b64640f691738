// Copyright 2026 hypoflow contributors
// SPDX-License-Identifier: Apache-2.0

//! Lifting diagnostics: overdamped-limit construction, lift-condition
//! residuals, rate scans over the friction parameter, and the
//! quadratic-speed-up ceiling on achievable convergence rates.

use ndarray::s;
use ndarray_linalg::{Eigh, SVD, UPLO};
use rayon::prelude::*;
use std::sync::Arc;

use crate::decomp::GeneratorDecomposition;
use crate::error::{HypoflowError, Result};
use crate::expm::Propagator;
use crate::linop::LinOp;
use crate::space::{conj_transpose, CMat, WeightedSpace, C64};
use crate::spectral::{
    kernel_basis, projector, pseudo_inverse, singular_value_gap, spectral_gap,
    DEFAULT_KERNEL_TOL,
};

/// Residuals and constants of the lift-structure hypotheses.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct LiftReport {
    /// Weighted operator norm of Pi_s L_a Pi_s (zero for a lift).
    pub php_residual: f64,
    /// Spectral gap of -L_s on the complement of its kernel.
    pub coercivity_lambda_s: f64,
    /// Whether ker(L_gamma) equals the kernel of the constructed
    /// overdamped generator.
    pub kernel_equal: bool,
    /// max over an orthonormal basis {x, y} of ker(L_s) of
    /// |<Lx, S Ly> + <x, L_O y>|.
    pub second_order_residual: f64,
    /// max over the same basis of |<x, Ly> + <x, L_O y>|.
    pub first_order_residual: f64,
    /// Smallest singular value of Pi_1 S Pi_1 on the range of Pi_1,
    /// where Pi_1 projects onto ran(L restricted to ker(L_s)).
    /// Infinite when that range is trivial (coercive branch).
    pub s_tilde_m: f64,
    /// True when ker(L_gamma) fills all of ker(L_s): decay then holds
    /// with prefactor 1 and the speed-up ceiling is vacuous.
    pub coercive: bool,
}

/// Rate curves over a friction grid.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RateReport {
    pub gamma_grid: Vec<f64>,
    /// Spectral gap nu_0(gamma) of -(L_a + gamma L_s).
    pub spectral_gaps: Vec<f64>,
    /// Singular value gap s(L_gamma).
    pub singular_gaps: Vec<f64>,
    /// Prefactor estimates C(gamma) >= 1 from the semigroup envelope.
    pub prefactors: Vec<f64>,
    /// Prefactors with a +5% safety margin (no sharp extraction rule
    /// exists for C; the margin flags how soft the estimate is).
    pub prefactors_with_margin: Vec<f64>,
    /// Grid point with the largest spectral gap.
    pub argmax_gamma: f64,
    /// Local refinement of the gap maximizer between the grid neighbors
    /// of argmax_gamma.
    pub refined_gamma_max: f64,
    pub refined_max_gap: f64,
    /// Spectral gap of the overdamped-limit generator; absent when the
    /// reduced generator has no spectrum outside its kernel.
    pub overdamped_gap: Option<f64>,
    pub s_tilde_m: f64,
    /// (1 + log max C) * sqrt(overdamped_gap / s_tilde_m); absent for
    /// coercive models where the ceiling is vacuous.
    pub upper_bound: Option<f64>,
}

/// Overdamped-limit generator reduced to an orthonormal basis of ker(L_s).
#[derive(Debug, Clone)]
pub struct OverdampedLimit {
    /// The reduced generator on a Euclidean space of dim = dim ker(L_s);
    /// coordinates refer to `basis` columns.
    pub op: LinOp,
    /// Gram-orthonormal basis of ker(L_s) in the full space (n x k).
    pub basis: CMat,
    /// Relative residual of the solvability condition
    /// (I - L_s L_s^+) L_a Pi_s = 0.
    pub range_residual: f64,
    /// The same generator embedded in the full space (zero on the
    /// complement of ker(L_s)).
    pub full_matrix: CMat,
}

/// L_O = -(L_a Pi_s)* (-L_s)^{-1} (L_a Pi_s) restricted to ker(L_s).
pub fn overdamped_limit(decomp: &GeneratorDecomposition) -> Result<OverdampedLimit> {
    let space = &decomp.space;
    let php = decomp
        .pi_s
        .compose(&decomp.l_a)?
        .compose(&decomp.pi_s)?
        .op_norm()?;
    let scale = decomp.l_a.op_norm()?.max(1.0);
    if php > 1e-8 * scale {
        return Err(HypoflowError::RangeCondition { residual: php });
    }

    let a = decomp.l_a.compose(&decomp.pi_s)?;
    let ls_pinv = pseudo_inverse(&decomp.l_s, DEFAULT_KERNEL_TOL)?;
    // Solvability: L_a Pi_s must map into ran(L_s).
    let onto_range = decomp.l_s.compose(&ls_pinv)?;
    let defect = LinOp::new(
        &a.matrix - &onto_range.matrix.dot(&a.matrix),
        Arc::clone(space),
    )?;
    let a_norm = a.op_norm()?.max(f64::MIN_POSITIVE);
    let range_residual = defect.op_norm()? / a_norm.max(1.0);
    if range_residual > 1e-8 {
        return Err(HypoflowError::RangeCondition {
            residual: range_residual,
        });
    }

    // (-L_s)^{-1} on the complement is -(L_s^+), so
    // L_O = -A* (-(L_s^+)) A = A* L_s^+ A, negative semidefinite.
    let full_matrix = a.adjoint()?.matrix.dot(&ls_pinv.matrix).dot(&a.matrix);

    let basis = kernel_basis(&decomp.l_s, DEFAULT_KERNEL_TOL)?;
    let k = basis.ncols();
    let reduced = conj_transpose(&basis)
        .dot(space.gram())
        .dot(&full_matrix)
        .dot(&basis);
    let red_space = WeightedSpace::euclidean(k, space.field());
    let op = LinOp::new(reduced, red_space)?;

    let rep = op.symmetry_check(1e-9)?;
    if op.frobenius() > 1e-14 && rep.symmetric_residual > 1e-9 {
        return Err(HypoflowError::DecompositionInvariant {
            context: "overdamped limit not symmetric",
            residual: rep.symmetric_residual,
        });
    }
    let herm = (&op.matrix + &conj_transpose(&op.matrix)).mapv(|z| 0.5 * z);
    let (eigs, _) = herm.eigh(UPLO::Lower)?;
    let max_eig = eigs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max_eig > 1e-9 * op.op_norm()?.max(1.0) {
        return Err(HypoflowError::NotDissipative { max_re: max_eig });
    }

    Ok(OverdampedLimit {
        op,
        basis,
        range_residual,
        full_matrix,
    })
}

/// Gram-orthonormal basis of the column span of `cols`, with relative rank
/// cutoff `tol` on singular values.
pub(crate) fn orthonormal_range(cols: &CMat, space: &Arc<WeightedSpace>, tol: f64) -> Result<CMat> {
    if cols.ncols() == 0 {
        return Ok(cols.clone());
    }
    let tilde = space.chol().dot(cols);
    let (u, sv, _) = tilde.svd(true, false)?;
    let u = u.expect("requested left singular vectors");
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let rank = sv.iter().filter(|&&x| x > tol * smax.max(f64::MIN_POSITIVE)).count();
    let kept = u.slice(s![.., ..rank]).to_owned();
    Ok(space.chol_inv().dot(&kept))
}

/// Evaluate the lift hypotheses; `s_op` defaults to (-L_s)^+, the choice
/// under which the second-order relation reproduces the overdamped limit.
pub fn check_lift_conditions(
    decomp: &GeneratorDecomposition,
    s_op: Option<&LinOp>,
) -> Result<LiftReport> {
    let space = &decomp.space;
    let php_residual = decomp
        .pi_s
        .compose(&decomp.l_a)?
        .compose(&decomp.pi_s)?
        .op_norm()?;
    let coercivity_lambda_s = spectral_gap(&decomp.l_s, DEFAULT_KERNEL_TOL)?.gap;

    let default_s;
    let s_ref = match s_op {
        Some(op) => op,
        None => {
            default_s = pseudo_inverse(&decomp.l_s, DEFAULT_KERNEL_TOL)?.scale(C64::new(-1.0, 0.0));
            &default_s
        }
    };
    // S must be positive semidefinite in the weighted geometry.
    let s_tilde = space.to_euclidean(&s_ref.matrix);
    let s_herm = (&s_tilde + &conj_transpose(&s_tilde)).mapv(|z| 0.5 * z);
    let (s_eigs, _) = s_herm.eigh(UPLO::Lower)?;
    let s_min = s_eigs.iter().cloned().fold(f64::INFINITY, f64::min);
    let s_max = s_eigs.iter().cloned().fold(0.0, f64::max);
    if s_min < -1e-10 * s_max.max(1.0) {
        return Err(HypoflowError::SNotPositive { min_eig: s_min });
    }

    let od = overdamped_limit(decomp)?;
    let full = decomp.full()?;

    // ker(L_O) versus ker(L_gamma), compared as subspaces of the full space.
    let od_kernel_reduced = kernel_basis(&od.op, DEFAULT_KERNEL_TOL)?;
    let od_kernel = od.basis.dot(&od_kernel_reduced);
    let full_kernel = kernel_basis(&full, DEFAULT_KERNEL_TOL)?;
    let kernel_equal = if od_kernel.ncols() == full_kernel.ncols() {
        let pa = projector(&od_kernel, Arc::clone(space))?;
        let pb = projector(&full_kernel, Arc::clone(space))?;
        LinOp::new(&pa.matrix - &pb.matrix, Arc::clone(space))?.op_norm()? < 1e-7
    } else {
        false
    };

    // The coercive branch: equilibria fill all of ker(L_s).
    let coercive = if full_kernel.ncols() == od.basis.ncols() {
        let pa = projector(&full_kernel, Arc::clone(space))?;
        let pb = projector(&od.basis, Arc::clone(space))?;
        LinOp::new(&pa.matrix - &pb.matrix, Arc::clone(space))?.op_norm()? < 1e-7
    } else {
        false
    };

    // Residuals of the defining relations over basis pairs of ker(L_s).
    let k = od.basis.ncols();
    let lb = full.matrix.dot(&od.basis); // columns L b_j
    let slb = s_ref.matrix.dot(&lb);
    let mut second_order_residual = 0.0f64;
    let mut first_order_residual = 0.0f64;
    for i in 0..k {
        let bi = od.basis.slice(s![.., i]).to_owned();
        for j in 0..k {
            let lo_ij = od.op.matrix[[i, j]];
            let lbi = lb.slice(s![.., i]).to_owned();
            let slbj = slb.slice(s![.., j]).to_owned();
            let quad = space.inner(&lbi, &slbj);
            second_order_residual = second_order_residual.max((quad + lo_ij).norm());
            let lbj = lb.slice(s![.., j]).to_owned();
            let lin = space.inner(&bi, &lbj);
            first_order_residual = first_order_residual.max((lin + lo_ij).norm());
        }
    }

    // s_tilde_m: smallest singular value of Pi_1 S Pi_1 on ran(Pi_1),
    // Pi_1 the projector onto ran(L restricted to ker(L_s)). Trivial range
    // (the coercive branch) leaves the constant unconstrained.
    // Columns of lb that are zero at the scale of L itself carry no lift
    // information; without this floor the relative rank cutoff inside
    // orthonormal_range would keep pure rounding noise.
    let lb_scale = full.op_norm()?.max(1.0);
    let lb_max_col = (0..k)
        .map(|j| space.norm(&lb.slice(s![.., j]).to_owned()))
        .fold(0.0f64, f64::max);
    let range_basis = if lb_max_col < 1e-12 * lb_scale {
        CMat::zeros((space.dim(), 0))
    } else {
        orthonormal_range(&lb, space, 1e-9)?
    };
    let s_tilde_m = if range_basis.ncols() == 0 {
        f64::INFINITY
    } else {
        let m = conj_transpose(&range_basis)
            .dot(space.gram())
            .dot(&s_ref.matrix)
            .dot(&range_basis);
        let (_, sv, _) = m.svd(false, false)?;
        sv.iter().cloned().fold(f64::INFINITY, f64::min)
    };

    Ok(LiftReport {
        php_residual,
        coercivity_lambda_s,
        kernel_equal,
        second_order_residual,
        first_order_residual,
        s_tilde_m,
        coercive,
    })
}

/// 48 log-spaced friction values spanning [sqrt(lambda_O)/16, 16 sqrt(lambda_O)],
/// bracketing the predicted optimum gamma ~ sqrt(lambda_O).
pub fn default_gamma_grid(lambda_o: f64) -> Vec<f64> {
    assert!(lambda_o > 0.0, "overdamped gap must be positive");
    log_grid(lambda_o.sqrt() / 16.0, 16.0 * lambda_o.sqrt(), 48)
}

/// 64 log-spaced times in [1e-3/nu0, 20/nu0], covering the transient
/// growth window of non-normal semigroups.
pub fn default_t_grid(nu0: f64) -> Vec<f64> {
    assert!(nu0 > 0.0, "spectral gap must be positive");
    log_grid(1e-3 / nu0, 20.0 / nu0, 64)
}

pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (llo + (lhi - llo) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Prefactor estimate sup_t ||exp(t L)(I - P_inf)|| e^{nu0 t} over the time
/// grid, clamped to >= 1.
fn prefactor_estimate(full: &LinOp, nu0: f64, t_grid: Option<&[f64]>) -> Result<f64> {
    let kb = kernel_basis(full, DEFAULT_KERNEL_TOL)?;
    let p_inf = projector(&kb, Arc::clone(&full.space))?;
    let q = &CMat::eye(full.dim()) - &p_inf.matrix;
    let prop = Propagator::new(full)?;
    let default_grid;
    let grid: &[f64] = match t_grid {
        Some(g) => g,
        None => {
            default_grid = default_t_grid(nu0);
            &default_grid
        }
    };
    let mut c = 1.0f64;
    for &t in grid {
        let m = prop.matrix_at(t)?.dot(&q);
        let norm = LinOp::new(m, Arc::clone(&full.space))?.op_norm()?;
        c = c.max(norm * (nu0 * t).exp());
    }
    Ok(c)
}

fn gap_at(decomp: &GeneratorDecomposition, gamma: f64) -> Result<f64> {
    Ok(spectral_gap(&decomp.full_at(gamma)?, DEFAULT_KERNEL_TOL)?.gap)
}

/// Golden-section maximization of the spectral gap over log-gamma.
fn refine_gap_maximum(
    decomp: &GeneratorDecomposition,
    lo: f64,
    hi: f64,
) -> Result<(f64, f64)> {
    let inv_phi = 0.5 * (5.0f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = gap_at(decomp, c.exp())?;
    let mut fd = gap_at(decomp, d.exp())?;
    while (b - a) > 1e-7 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = gap_at(decomp, c.exp())?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = gap_at(decomp, d.exp())?;
        }
    }
    let g = (0.5 * (a + b)).exp();
    Ok((g, gap_at(decomp, g)?))
}

/// Spectral, singular and prefactor curves over a friction grid, with a
/// local refinement of the gap maximizer and the speed-up ceiling.
pub fn rate_scan(
    decomp: &GeneratorDecomposition,
    gamma_grid: &[f64],
    t_grid: Option<&[f64]>,
) -> Result<RateReport> {
    assert!(!gamma_grid.is_empty(), "empty gamma grid");
    assert!(
        gamma_grid.iter().all(|&g| g > 0.0),
        "friction values must be positive"
    );

    let rows: Result<Vec<(f64, f64, f64)>> = gamma_grid
        .par_iter()
        .map(|&gamma| {
            let full = decomp.full_at(gamma)?;
            let nu0 = spectral_gap(&full, DEFAULT_KERNEL_TOL)?.gap;
            let sgap = singular_value_gap(&full, DEFAULT_KERNEL_TOL)?;
            let c = prefactor_estimate(&full, nu0, t_grid)?;
            Ok((nu0, sgap, c))
        })
        .collect();
    let rows = rows?;
    let spectral_gaps: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let singular_gaps: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let prefactors: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let prefactors_with_margin: Vec<f64> = prefactors.iter().map(|c| c * 1.05).collect();

    let i_max = spectral_gaps
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    let argmax_gamma = gamma_grid[i_max];
    let lo = if i_max > 0 { gamma_grid[i_max - 1] } else { gamma_grid[i_max] * 0.5 };
    let hi = if i_max + 1 < gamma_grid.len() {
        gamma_grid[i_max + 1]
    } else {
        gamma_grid[i_max] * 2.0
    };
    let (refined_gamma_max, refined_max_gap) = refine_gap_maximum(decomp, lo, hi)?;

    let lift = check_lift_conditions(decomp, None)?;
    let od = overdamped_limit(decomp)?;
    let overdamped_gap = match spectral_gap(&od.op, DEFAULT_KERNEL_TOL) {
        Ok(rep) => Some(rep.gap),
        Err(HypoflowError::GapUndefined) => None,
        Err(e) => return Err(e),
    };
    let c_max = prefactors.iter().cloned().fold(1.0, f64::max);
    let upper_bound = match overdamped_gap {
        Some(lam) if lift.s_tilde_m.is_finite() && lift.s_tilde_m > 1e-12 => {
            Some((1.0 + c_max.ln()) * (lam / lift.s_tilde_m).sqrt())
        }
        _ => None,
    };

    Ok(RateReport {
        gamma_grid: gamma_grid.to_vec(),
        spectral_gaps,
        singular_gaps,
        prefactors,
        prefactors_with_margin,
        argmax_gamma,
        refined_gamma_max,
        refined_max_gap,
        overdamped_gap,
        s_tilde_m: lift.s_tilde_m,
        upper_bound,
    })
}

/// Rate ceiling (1 + log C) sqrt(lambda_O / s_tilde_m).
///
/// Errors when the lift structure is degenerate (trivial range, as in the
/// coercive branch) and the ceiling carries no information.
pub fn upper_bound(
    decomp: &GeneratorDecomposition,
    s_op: Option<&LinOp>,
    prefactor_c: f64,
) -> Result<f64> {
    assert!(prefactor_c >= 1.0, "prefactor must be >= 1");
    let lift = check_lift_conditions(decomp, s_op)?;
    if !lift.s_tilde_m.is_finite() || lift.s_tilde_m <= 1e-12 {
        return Err(HypoflowError::UpperBoundDegenerate {
            s_tilde_m: lift.s_tilde_m,
        });
    }
    let od = overdamped_limit(decomp)?;
    let lambda_o = spectral_gap(&od.op, DEFAULT_KERNEL_TOL)?.gap;
    Ok((1.0 + prefactor_c.ln()) * (lambda_o / lift.s_tilde_m).sqrt())
}

/// Closed-form model rates; `c`, `c1`, `c2` are placeholders for unknown
/// universal constants, so only shape and scaling are meaningful.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RateFormula {
    Langevin { m: f64, gamma: f64, c: f64 },
    Quantum { lambda_s: f64, c1: f64, c2: f64, gamma: f64 },
}

/// nu = m gamma / (c (sqrt(m) + gamma)^2) for the kinetic model;
/// nu = gamma lambda_s / (C1^2 + gamma^2 lambda_s C2^2) for the quantum one.
pub fn model_rate_formula(kind: &RateFormula) -> f64 {
    match *kind {
        RateFormula::Langevin { m, gamma, c } => {
            assert!(m > 0.0 && gamma > 0.0 && c > 0.0);
            m * gamma / (c * (m.sqrt() + gamma).powi(2))
        }
        RateFormula::Quantum {
            lambda_s,
            c1,
            c2,
            gamma,
        } => {
            assert!(lambda_s > 0.0 && c1 > 0.0 && c2 > 0.0 && gamma > 0.0);
            gamma * lambda_s / (c1 * c1 + gamma * gamma * lambda_s * c2 * c2)
        }
    }
}
