// Copyright 2026 hypoflow contributors
// SPDX-License-Identifier: Apache-2.0

//! Flow and space-time Poincare functionals along exact semigroup
//! trajectories: time-averaged norm versus time-averaged dissipation,
//! constant fitting over the friction grid, and decay verification.

use ndarray::Array1;
use ndarray_linalg::{Eigh, UPLO};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::sync::Arc;

use crate::decomp::GeneratorDecomposition;
use crate::error::{HypoflowError, Result};
use crate::expm::Propagator;
use crate::lifting::orthonormal_range;
use crate::linop::LinOp;
use crate::space::{conj_transpose, CMat, CVec, Field, C64};
use crate::spectral::{kernel_basis, projector, DEFAULT_KERNEL_TOL};

/// One trajectory functional evaluation.
#[derive(Debug, Clone, serde::Serialize)]
pub struct FlowSample {
    pub gamma: f64,
    pub horizon_t: f64,
    /// Time-averaged squared weighted norm of the trajectory.
    pub lhs: f64,
    /// Time-averaged <x_t, (-L_s) x_t>.
    pub dissipation: f64,
    /// lhs / dissipation; the empirical inverse flow-Poincare constant.
    pub ratio: f64,
    pub initial_label: String,
    /// True when the initial vector lay entirely in ker(L_gamma) and was
    /// projected to zero; the sample carries no information.
    pub degenerate: bool,
}

/// The three functionals of the space-time energy estimate.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct SpaceTimeTerms {
    /// Time-averaged squared norm of f - (kernel component).
    pub lhs_norm: f64,
    /// Time-averaged squared norm of (I - Pi_s) f.
    pub term1: f64,
    /// Time-averaged squared norm of (I - L_s)^{-1/2} (d/dt - L_a) f.
    pub term2: f64,
    /// Same functional computed through the flow identity
    /// (d/dt - L_a) f = gamma L_s f; must equal term2 to rounding.
    pub term2_identity: f64,
}

/// Fitted flow-Poincare constants over a friction grid.
#[derive(Debug, Clone, serde::Serialize)]
pub struct FlowFit {
    pub c1: f64,
    pub c2: f64,
    /// sqrt(C1/C2): friction maximizing the predicted rate.
    pub gamma_max: f64,
    /// Predicted rate at gamma_max.
    pub predicted_max_rate: f64,
    /// Weighted root-mean-square misfit of the model C1 + gamma^2 C2.
    pub fit_residual: f64,
    pub gamma_grid: Vec<f64>,
    /// Worst-case (largest) ratio at each grid point.
    pub worst_ratios: Vec<f64>,
}

impl FlowFit {
    /// Lower-bound rate prediction nu(gamma) = gamma / (C1 + gamma^2 C2).
    pub fn predicted_rate(&self, gamma: f64) -> f64 {
        gamma / (self.c1 + gamma * gamma * self.c2)
    }
}

/// Decay verification against both displayed inequalities.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DecayReport {
    pub window_pass: bool,
    pub pointwise_pass: bool,
    /// Largest violation of the windowed-average inequality (<= 0 when it
    /// holds everywhere).
    pub max_violation_window: f64,
    pub max_violation_pointwise: f64,
}

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre polynomial from the Chebyshev initial guess.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "need at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(x) and P'_n(x).
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            dp = n as f64 * (x * p - p0) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    // Ascending order for readability.
    nodes.reverse();
    weights.reverse();
    (nodes, weights)
}

/// Nodes and weights mapped to [a, b].
fn gauss_legendre_on(a: f64, b: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let (xs, ws) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (
        xs.iter().map(|x| mid + half * x).collect(),
        ws.iter().map(|w| w * half).collect(),
    )
}

fn kernel_projector(decomp: &GeneratorDecomposition) -> Result<LinOp> {
    let full = decomp.full()?;
    let kb = kernel_basis(&full, DEFAULT_KERNEL_TOL)?;
    projector(&kb, Arc::clone(&decomp.space))
}

fn project_off(
    p_ker: &LinOp,
    decomp: &GeneratorDecomposition,
    x0: &CVec,
) -> (CVec, bool) {
    let projected = x0 - &p_ker.apply(x0);
    let degenerate =
        decomp.space.norm(&projected) < 1e-12 * decomp.space.norm(x0).max(f64::MIN_POSITIVE);
    (projected, degenerate)
}

/// Flow-Poincare ratio samples for a set of labelled initial vectors.
///
/// Initial data are projected onto ker(L_gamma)^perp before evolution; the
/// time integrals use Gauss-Legendre quadrature with `quad_n` nodes.
pub fn flow_ratio(
    decomp: &GeneratorDecomposition,
    gamma: f64,
    t_horizon: f64,
    x0_set: &[(String, CVec)],
    quad_n: usize,
) -> Result<Vec<FlowSample>> {
    assert!(t_horizon > 0.0, "horizon must be positive");
    assert!(quad_n >= 16, "need at least 16 quadrature nodes");
    let full = decomp.full_at(gamma)?;
    let prop = Propagator::new(&full)?;
    let (ts, ws) = gauss_legendre_on(0.0, t_horizon, quad_n);

    // Project all initial vectors first, then sweep the time nodes once,
    // hoisting one propagator matrix per node (the expensive part when the
    // generator is defective and the eigendecomposition path is unusable).
    let mut projected = Vec::with_capacity(x0_set.len());
    let mut lhs_acc = vec![0.0f64; x0_set.len()];
    let mut diss_acc = vec![0.0f64; x0_set.len()];
    let p_ker = kernel_projector(decomp)?;
    for (_, x0) in x0_set {
        projected.push(project_off(&p_ker, decomp, x0));
    }
    for (&t, &w) in ts.iter().zip(ws.iter()) {
        let et = prop.matrix_at(t)?;
        for (i, (x0p, degenerate)) in projected.iter().enumerate() {
            if *degenerate {
                continue;
            }
            let xt = et.dot(x0p);
            lhs_acc[i] += w * decomp.space.norm(&xt).powi(2);
            let lsx = decomp.l_s.apply(&xt);
            diss_acc[i] += w * (-decomp.space.inner(&xt, &lsx).re);
        }
    }
    let mut samples = Vec::with_capacity(x0_set.len());
    for (i, (label, _)) in x0_set.iter().enumerate() {
        if projected[i].1 {
            samples.push(FlowSample {
                gamma,
                horizon_t: t_horizon,
                lhs: 0.0,
                dissipation: 0.0,
                ratio: 0.0,
                initial_label: label.clone(),
                degenerate: true,
            });
            continue;
        }
        let lhs = lhs_acc[i] / t_horizon;
        let dissipation = diss_acc[i] / t_horizon;
        if dissipation < 1e-14 * lhs {
            return Err(HypoflowError::TrajectoryTrapped { dissipation });
        }
        samples.push(FlowSample {
            gamma,
            horizon_t: t_horizon,
            lhs,
            dissipation,
            ratio: lhs / dissipation,
            initial_label: label.clone(),
            degenerate: false,
        });
    }
    Ok(samples)
}

/// (I - L_s)^{-1/2} through the Hermitian eigendecomposition of the
/// symmetric L_s in the weighted geometry.
fn inverse_sqrt_shifted(decomp: &GeneratorDecomposition) -> Result<CMat> {
    let space = &decomp.space;
    let tilde = space.to_euclidean(&decomp.l_s.matrix);
    let herm = (&tilde + &conj_transpose(&tilde)).mapv(|z| 0.5 * z);
    let (evals, vecs) = herm.eigh(UPLO::Lower)?;
    // L_s is negative semidefinite, so I - L_s has spectrum >= 1.
    let d = CMat::from_diag(&Array1::from(
        evals
            .iter()
            .map(|&l| C64::new(1.0 / (1.0 - l).sqrt(), 0.0))
            .collect::<Vec<_>>(),
    ));
    let w_tilde = vecs.dot(&d).dot(&conj_transpose(&vecs));
    Ok(space.from_euclidean(&w_tilde))
}

/// The three space-time functionals of a trajectory started at `x0`.
/// No kernel projection is applied; a stationary initial vector yields
/// all-zero terms.
pub fn space_time_terms(
    decomp: &GeneratorDecomposition,
    gamma: f64,
    t_horizon: f64,
    x0: &CVec,
    quad_n: usize,
) -> Result<SpaceTimeTerms> {
    assert!(t_horizon > 0.0, "horizon must be positive");
    assert!(quad_n >= 16, "need at least 16 quadrature nodes");
    let space = &decomp.space;
    let full = decomp.full_at(gamma)?;
    let prop = Propagator::new(&full)?;
    let kb = kernel_basis(&full, DEFAULT_KERNEL_TOL)?;
    let p_ker = projector(&kb, Arc::clone(space))?;
    let w_half = inverse_sqrt_shifted(decomp)?;
    let (ts, ws) = gauss_legendre_on(0.0, t_horizon, quad_n);

    let mut lhs_norm = 0.0;
    let mut term1 = 0.0;
    let mut term2 = 0.0;
    let mut term2_identity = 0.0;
    for (&t, &w) in ts.iter().zip(ws.iter()) {
        let ft = prop.apply(t, x0)?;
        let fluct = &ft - &p_ker.apply(&ft);
        lhs_norm += w * space.norm(&fluct).powi(2);
        let off = &ft - &decomp.pi_s.apply(&ft);
        term1 += w * space.norm(&off).powi(2);
        // (d/dt - L_a) f = (L - L_a) f for a flow solution.
        let dtf = &full.apply(&ft) - &decomp.l_a.apply(&ft);
        term2 += w * space.norm(&w_half.dot(&dtf)).powi(2);
        let lsf = decomp.l_s.apply(&ft);
        term2_identity += w * gamma * gamma * space.norm(&w_half.dot(&lsf)).powi(2);
    }
    Ok(SpaceTimeTerms {
        lhs_norm: lhs_norm / t_horizon,
        term1: term1 / t_horizon,
        term2: term2 / t_horizon,
        term2_identity: term2_identity / t_horizon,
    })
}

/// Default initial set: a gram-orthonormal basis of ker(L_s) projected off
/// ker(L_gamma) (the hard directions with no pointwise dissipation), plus 8
/// seeded Gaussian vectors.
pub fn default_x0_set(decomp: &GeneratorDecomposition) -> Result<Vec<(String, CVec)>> {
    let space = &decomp.space;
    let n = space.dim();
    let full = decomp.full()?;
    let kb = kernel_basis(&full, DEFAULT_KERNEL_TOL)?;
    let p_ker = projector(&kb, Arc::clone(space))?;

    let hs = kernel_basis(&decomp.l_s, DEFAULT_KERNEL_TOL)?;
    let mut projected = hs.clone();
    for mut col in projected.columns_mut() {
        let v = col.to_owned();
        let pv = &v - &p_ker.apply(&v);
        col.assign(&pv);
    }
    let ho_basis = orthonormal_range(&projected, space, 1e-9)?;

    let mut set = Vec::new();
    for (j, col) in ho_basis.columns().into_iter().enumerate() {
        set.push((format!("h_o_{j}"), col.to_owned()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for j in 0..8 {
        let mut v: CVec = Array1::zeros(n);
        for z in v.iter_mut() {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = if space.field() == Field::Complex {
                StandardNormal.sample(&mut rng)
            } else {
                0.0
            };
            *z = C64::new(re, im);
        }
        let v = &v - &p_ker.apply(&v);
        let norm = space.norm(&v);
        if norm > 1e-12 {
            set.push((format!("random_{j}"), v.mapv(|z| z / norm)));
        }
    }
    Ok(set)
}

/// Weighted constrained least squares of ratio(gamma) against C1 + gamma^2 C2
/// with weights 1/ratio^2 and nonnegativity of both constants.
/// Returns (C1, C2, weighted RMS residual).
pub fn fit_ratio_model(gammas: &[f64], ratios: &[f64]) -> Result<(f64, f64, f64)> {
    assert_eq!(gammas.len(), ratios.len());
    assert!(gammas.len() >= 4, "need at least 4 grid points for the fit");
    if ratios.iter().any(|r| !r.is_finite() || *r <= 0.0) {
        return Err(HypoflowError::FlowFitMisfit {
            context: "nonpositive or nonfinite ratio in fit data".into(),
        });
    }
    // Normal equations for basis {1, gamma^2} with weights w = 1/r^2.
    let solve = |use_c1: bool, use_c2: bool| -> (f64, f64) {
        let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&g, &r) in gammas.iter().zip(ratios.iter()) {
            let w = 1.0 / (r * r);
            let g2 = g * g;
            a11 += w;
            a12 += w * g2;
            a22 += w * g2 * g2;
            b1 += w * r;
            b2 += w * g2 * r;
        }
        match (use_c1, use_c2) {
            (true, true) => {
                let det = a11 * a22 - a12 * a12;
                ((a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det)
            }
            (true, false) => (b1 / a11, 0.0),
            (false, true) => (0.0, b2 / a22),
            (false, false) => (0.0, 0.0),
        }
    };
    let (mut c1, mut c2) = solve(true, true);
    if c1 < 0.0 {
        let (a, b) = solve(false, true);
        c1 = a;
        c2 = b;
    } else if c2 < 0.0 {
        let (a, b) = solve(true, false);
        c1 = a;
        c2 = b;
    }
    if c1 < 0.0 || c2 < 0.0 {
        return Err(HypoflowError::FlowFitMisfit {
            context: format!("fitted constants negative after constraint: C1={c1}, C2={c2}"),
        });
    }
    let mut ss = 0.0;
    let mut wsum = 0.0;
    for (&g, &r) in gammas.iter().zip(ratios.iter()) {
        let w = 1.0 / (r * r);
        let e = c1 + g * g * c2 - r;
        ss += w * e * e;
        wsum += w;
    }
    Ok((c1, c2, (ss / wsum).sqrt()))
}

/// Worst-case ratios over the friction grid, fitted to C1 + gamma^2 C2.
pub fn fit_constants(
    decomp: &GeneratorDecomposition,
    gamma_grid: &[f64],
    t_horizon: f64,
    x0_set: Option<&[(String, CVec)]>,
    quad_n: usize,
) -> Result<FlowFit> {
    assert!(gamma_grid.len() >= 4, "need at least 4 grid points");
    let default_set;
    let set: &[(String, CVec)] = match x0_set {
        Some(s) => s,
        None => {
            default_set = default_x0_set(decomp)?;
            &default_set
        }
    };
    let mut worst = Vec::with_capacity(gamma_grid.len());
    for &gamma in gamma_grid {
        let samples = flow_ratio(decomp, gamma, t_horizon, set, quad_n)?;
        let w = samples
            .iter()
            .filter(|s| !s.degenerate)
            .map(|s| s.ratio)
            .fold(0.0f64, f64::max);
        if w <= 0.0 {
            return Err(HypoflowError::FlowFitMisfit {
                context: format!("no informative samples at gamma = {gamma}"),
            });
        }
        worst.push(w);
    }
    let (c1, c2, fit_residual) = fit_ratio_model(gamma_grid, &worst)?;
    let gamma_max = if c2 > 0.0 && c1 > 0.0 {
        (c1 / c2).sqrt()
    } else {
        f64::NAN
    };
    let predicted_max_rate = if gamma_max.is_finite() {
        gamma_max / (c1 + gamma_max * gamma_max * c2)
    } else {
        f64::NAN
    };
    Ok(FlowFit {
        c1,
        c2,
        gamma_max,
        predicted_max_rate,
        fit_residual,
        gamma_grid: gamma_grid.to_vec(),
        worst_ratios: worst,
    })
}

/// Check the windowed-average and pointwise decay inequalities
///   avg_{[t, t+T]} ||P_s x0||^2 ds <= e^{-2 nu t} ||x0||^2
///   ||P_t x0|| <= e^{nu T} e^{-nu t} ||x0||
/// on a time grid up to 10/nu, with absolute slack 1e-9 on normalized data.
pub fn verify_decay(
    decomp: &GeneratorDecomposition,
    gamma: f64,
    nu: f64,
    t_horizon: f64,
    x0_set: &[(String, CVec)],
) -> Result<DecayReport> {
    assert!(nu >= 0.0, "rate must be nonnegative");
    assert!(t_horizon > 0.0, "window must be positive");
    let space = &decomp.space;
    let full = decomp.full_at(gamma)?;
    let prop = Propagator::new(&full)?;
    let t_end = if nu > 0.0 { 10.0 / nu } else { 10.0 };
    let n_grid = 48;
    let slack = 1e-9;

    // The window integrand at time t + tau factorizes as
    // exp(tL) exp(tau L) x0, so evolve each x0 to the fixed window nodes
    // once, then sweep the outer grid with one propagator matrix per t.
    let (taus, ws) = gauss_legendre_on(0.0, t_horizon, 32);
    let p_ker = kernel_projector(decomp)?;
    let mut seeds: Vec<Vec<CVec>> = Vec::new();
    for (_, x0) in x0_set {
        let (x0p, degenerate) = project_off(&p_ker, decomp, x0);
        if degenerate {
            continue;
        }
        let norm0 = space.norm(&x0p);
        let x0n = x0p.mapv(|z| z / norm0);
        let mut ys = Vec::with_capacity(taus.len() + 1);
        for &tau in &taus {
            ys.push(prop.apply(tau, &x0n)?);
        }
        ys.push(x0n);
        seeds.push(ys);
    }

    let mut max_violation_window = f64::NEG_INFINITY;
    let mut max_violation_pointwise = f64::NEG_INFINITY;
    for i in 0..n_grid {
        let t = t_end * i as f64 / (n_grid - 1) as f64;
        let et = prop.matrix_at(t)?;
        let bound_window = (-2.0 * nu * t).exp();
        let bound_point = (nu * t_horizon).exp() * (-nu * t).exp();
        for ys in &seeds {
            let mut avg = 0.0;
            for (y, &w) in ys[..taus.len()].iter().zip(ws.iter()) {
                avg += w * space.norm(&et.dot(y)).powi(2);
            }
            avg /= t_horizon;
            max_violation_window = max_violation_window.max(avg - bound_window);
            let xt = et.dot(ys.last().unwrap());
            max_violation_pointwise = max_violation_pointwise.max(space.norm(&xt) - bound_point);
        }
    }
    Ok(DecayReport {
        window_pass: max_violation_window <= slack,
        pointwise_pass: max_violation_pointwise <= slack,
        max_violation_window,
        max_violation_pointwise,
    })
}
