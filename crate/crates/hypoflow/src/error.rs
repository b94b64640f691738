// Copyright 2026 hypoflow contributors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors produced by the operator algebra and model builders.
#[derive(Debug, Error)]
pub enum HypoflowError {
    #[error("gram matrix is not Hermitian (relative residual {residual:e})")]
    GramNotHermitian { residual: f64 },

    #[error("gram matrix is not positive definite (smallest eigenvalue {min_eig:e})")]
    GramNotPositive { min_eig: f64 },

    #[error("degenerate metric: gram matrix not invertible at working precision")]
    DegenerateMetric,

    #[error("matrix dimensions {rows}x{cols} do not match space dimension {dim}")]
    DimensionMismatch { rows: usize, cols: usize, dim: usize },

    #[error("operator is not dissipative: eigenvalue with real part {max_re:e} > tolerance")]
    NotDissipative { max_re: f64 },

    #[error("spectral gap undefined: no nonzero spectrum at tolerance")]
    GapUndefined,

    #[error("basis not orthonormal (residual {residual:e})")]
    BasisNotOrthonormal { residual: f64 },

    #[error("pseudoinverse requires symmetric operator (symmetry residual {residual:e})")]
    PseudoInverseNotSymmetric { residual: f64 },

    #[error("non-finite input: {context}")]
    NonFinite { context: &'static str },

    #[error("did not relax: no contraction below e^-1 before t_max = {t_max}")]
    DidNotRelax { t_max: f64 },

    #[error("quadrature failure: {context}")]
    Quadrature { context: String },

    #[error("no stationary state at tolerance {tol:e}")]
    NoStationaryState { tol: f64 },

    #[error("kernel element not a state (min eigenvalue {min_eig:e})")]
    KernelElementNotState { min_eig: f64 },

    #[error("KMS requires full-rank state (min eigenvalue {min_eig:e})")]
    KmsRankDeficient { min_eig: f64 },

    #[error("model violates KMS (anti)symmetry assumptions (residual {residual:e})")]
    KmsSymmetryViolated { residual: f64 },

    #[error("kernel characterization violated: commutant and generator kernels disagree (residual {residual:e})")]
    KernelCharacterization { residual: f64 },

    #[error("S not positive on the kernel complement (min eigenvalue {min_eig:e})")]
    SNotPositive { min_eig: f64 },

    #[error("range condition fails -- not a second-order lift (residual {residual:e})")]
    RangeCondition { residual: f64 },

    #[error("upper bound degenerate: s_tilde_m = {s_tilde_m:e} at tolerance")]
    UpperBoundDegenerate { s_tilde_m: f64 },

    #[error("trajectory trapped in ker(L_s): dissipation {dissipation:e} below noise floor")]
    TrajectoryTrapped { dissipation: f64 },

    #[error("flow-Poincare model misfit: {context}")]
    FlowFitMisfit { context: String },

    #[error("blow-up: reduce dt (|state| exceeded 1e8 at step {step})")]
    BlowUp { step: usize },

    #[error("time step too large: dt*max(gamma, sqrt(m), 1) = {product} > 0.5")]
    UnstableTimeStep { product: f64 },

    #[error("window dominated by noise: only {usable} points above 3x standard error")]
    NoisyWindow { usable: usize },

    #[error("decomposition invariant violated: {context} (residual {residual:e})")]
    DecompositionInvariant { context: &'static str, residual: f64 },

    #[error("linear algebra backend error: {0}")]
    Linalg(#[from] ndarray_linalg::error::LinalgError),

    #[error("invalid model: {0}")]
    InvalidModel(String),
}

pub type Result<T> = std::result::Result<T, HypoflowError>;
