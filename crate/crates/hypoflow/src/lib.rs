// Copyright 2026 hypoflow contributors
// SPDX-License-Identifier: Apache-2.0

//! Numerical toolkit for convergence-rate analysis of hypocoercive
//! generators: kinetic Langevin dynamics on weighted function spaces and
//! Lindblad dynamics under the KMS geometry.
//!
//! The core abstraction is a [`space::WeightedSpace`] (a Gram matrix) and
//! [`linop::LinOp`]s acting on it; model builders produce a
//! [`decomp::GeneratorDecomposition`] `L = L_a + gamma L_s`, and the
//! analysis layers (spectral gaps, lifting diagnostics, flow functionals,
//! stochastic simulation) consume that.

pub mod catalog;
pub mod classical;
pub mod decomp;
pub mod error;
pub mod expm;
pub mod flow;
pub mod lifting;
pub mod linop;
pub mod quantum;
pub mod sde;
pub mod space;
pub mod spectral;

pub use decomp::GeneratorDecomposition;
pub use error::{HypoflowError, Result};
pub use linop::LinOp;
pub use space::{CMat, CVec, Field, WeightedSpace, C64};
