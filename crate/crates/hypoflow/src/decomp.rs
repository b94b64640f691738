// Copyright 2026 hypoflow contributors
// SPDX-License-Identifier: Apache-2.0

//! Generator decompositions L = L_a + gamma L_s.

use std::sync::Arc;

use crate::error::{HypoflowError, Result};
use crate::linop::{LinOp, Symmetry};
use crate::space::{WeightedSpace, C64};

/// Residual bound enforced on (anti)symmetry and kernel identities at
/// construction time.
pub const STRUCTURE_TOL: f64 = 1e-10;

/// Degree bookkeeping for one Galerkin basis function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct BasisTag {
    pub x_index: usize,
    pub v_degree: usize,
}

/// The pair (L_a, L_s) with friction gamma and the projector onto ker(L_s).
///
/// Construction validates the structural identities every downstream
/// computation relies on: L_a antisymmetric, L_s symmetric, L_s pi_s =
/// pi_s L_s = 0, and the first basis vector (constants / identity) in
/// ker(L_a) and ker(L_s).
#[derive(Debug, Clone)]
pub struct GeneratorDecomposition {
    pub l_a: LinOp,
    pub l_s: LinOp,
    pub gamma: f64,
    pub pi_s: LinOp,
    pub space: Arc<WeightedSpace>,
    /// Per-basis-function (x index, v degree); empty for quantum models.
    pub basis_meta: Vec<BasisTag>,
    /// Norm of the symmetric part removed from L_a by the antisymmetric
    /// projection at build time (zero when the build is exact).
    pub antisym_projection_norm: f64,
}

impl GeneratorDecomposition {
    /// `invariant_vector` is the distinguished fixed point the build must
    /// leave in ker(L_a) and ker(L_s): the constant function for classical
    /// models, the vectorized identity for quantum ones.
    pub fn new(
        l_a: LinOp,
        l_s: LinOp,
        gamma: f64,
        pi_s: LinOp,
        basis_meta: Vec<BasisTag>,
        antisym_projection_norm: f64,
        invariant_vector: crate::space::CVec,
    ) -> Result<Self> {
        assert!(gamma > 0.0, "friction gamma must be positive");
        let space = Arc::clone(&l_a.space);

        // Check the residual rather than the classification: the zero
        // operator (e.g. a trivial Hamiltonian part) is both symmetric and
        // antisymmetric and must be accepted.
        let a_rep = l_a.symmetry_check(STRUCTURE_TOL)?;
        if a_rep.antisymmetric_residual > STRUCTURE_TOL && l_a.frobenius() > 0.0 {
            return Err(HypoflowError::DecompositionInvariant {
                context: "L_a not antisymmetric",
                residual: a_rep.antisymmetric_residual,
            });
        }
        let s_rep = l_s.symmetry_check(STRUCTURE_TOL)?;
        if s_rep.classification != Symmetry::Symmetric {
            return Err(HypoflowError::DecompositionInvariant {
                context: "L_s not symmetric",
                residual: s_rep.symmetric_residual,
            });
        }

        let scale = l_s.op_norm()?.max(f64::MIN_POSITIVE);
        let r1 = l_s.compose(&pi_s)?.op_norm()? / scale;
        let r2 = pi_s.compose(&l_s)?.op_norm()? / scale;
        if r1 > STRUCTURE_TOL || r2 > STRUCTURE_TOL {
            return Err(HypoflowError::DecompositionInvariant {
                context: "L_s pi_s != 0",
                residual: r1.max(r2),
            });
        }

        // The distinguished fixed point must be invariant.
        let unit_norm = space.norm(&invariant_vector).max(f64::MIN_POSITIVE);
        let ra = space.norm(&l_a.apply(&invariant_vector))
            / (l_a.op_norm()?.max(f64::MIN_POSITIVE) * unit_norm);
        let rs = space.norm(&l_s.apply(&invariant_vector)) / (scale * unit_norm);
        if ra > STRUCTURE_TOL || rs > STRUCTURE_TOL {
            return Err(HypoflowError::DecompositionInvariant {
                context: "fixed point not in ker(L_a) and ker(L_s)",
                residual: ra.max(rs),
            });
        }

        Ok(Self {
            l_a,
            l_s,
            gamma,
            pi_s,
            space,
            basis_meta,
            antisym_projection_norm,
        })
    }

    /// L_a + gamma L_s at the stored friction.
    pub fn full(&self) -> Result<LinOp> {
        self.full_at(self.gamma)
    }

    /// L_a + gamma L_s at an arbitrary friction.
    pub fn full_at(&self, gamma: f64) -> Result<LinOp> {
        assert!(gamma > 0.0, "friction gamma must be positive");
        self.l_a.add(&self.l_s.scale(C64::new(gamma, 0.0)))
    }
}
