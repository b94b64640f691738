// Copyright 2026 hypoflow contributors
// SPDX-License-Identifier: Apache-2.0

//! Finite-dimensional Lindbladians in the Heisenberg picture under the
//! KMS geometry.
//!
//! Vectorization convention is column-stacking throughout: the
//! superoperator of X -> A X B is B^T (x) A. Operators live as d^2-vectors
//! on a [`WeightedSpace`] whose Gram matrix reproduces the KMS inner
//! product <A, B>_sigma = tr(sigma^{1/2} A^H sigma^{1/2} B).

use ndarray::{s, Array1, Array2};
use ndarray_linalg::{Eigh, Norm, SVD, UPLO};
use std::sync::Arc;

use crate::decomp::GeneratorDecomposition;
use crate::error::{HypoflowError, Result};
use crate::linop::LinOp;
use crate::space::{conj_transpose, CMat, CVec, Field, WeightedSpace, C64};
use crate::spectral::{canonicalize_columns, kernel_basis, DEFAULT_KERNEL_TOL};

/// Hamiltonian, jump operators and interaction strength.
#[derive(Debug, Clone)]
pub struct LindbladModel {
    pub dim: usize,
    pub hamiltonian: CMat,
    pub jumps: Vec<CMat>,
    pub gamma: f64,
}

impl LindbladModel {
    pub fn new(hamiltonian: CMat, jumps: Vec<CMat>, gamma: f64) -> Result<Self> {
        let dim = hamiltonian.nrows();
        if hamiltonian.ncols() != dim || dim == 0 {
            return Err(HypoflowError::InvalidModel(
                "hamiltonian must be square and nonempty".into(),
            ));
        }
        let herm = (&hamiltonian - &conj_transpose(&hamiltonian)).norm_l2()
            / hamiltonian.norm_l2().max(f64::MIN_POSITIVE);
        if herm > 1e-12 {
            return Err(HypoflowError::InvalidModel(format!(
                "hamiltonian not Hermitian (residual {herm:e})"
            )));
        }
        if jumps.is_empty() {
            return Err(HypoflowError::InvalidModel(
                "at least one jump operator required".into(),
            ));
        }
        for (j, l) in jumps.iter().enumerate() {
            if l.nrows() != dim || l.ncols() != dim {
                return Err(HypoflowError::InvalidModel(format!(
                    "jump operator {j} has shape {}x{}, expected {dim}x{dim}",
                    l.nrows(),
                    l.ncols()
                )));
            }
        }
        if !(gamma > 0.0) {
            return Err(HypoflowError::InvalidModel(format!(
                "gamma must be positive, got {gamma}"
            )));
        }
        Ok(Self {
            dim,
            hamiltonian,
            jumps,
            gamma,
        })
    }
}

/// Positive semidefinite Hermitian matrix with unit trace.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    pub matrix: CMat,
}

impl DensityMatrix {
    pub fn new(matrix: CMat) -> Result<Self> {
        let trace: C64 = matrix.diag().sum();
        if (trace - C64::new(1.0, 0.0)).norm() > 1e-12 {
            return Err(HypoflowError::InvalidModel(format!(
                "density matrix trace {trace} != 1"
            )));
        }
        let herm = (&matrix - &conj_transpose(&matrix)).norm_l2();
        if herm > 1e-12 {
            return Err(HypoflowError::InvalidModel(format!(
                "density matrix not Hermitian (residual {herm:e})"
            )));
        }
        let (eigs, _) = matrix.eigh(UPLO::Lower)?;
        let min_eig = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig < -1e-12 {
            return Err(HypoflowError::KernelElementNotState { min_eig });
        }
        Ok(Self { matrix })
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let (eigs, _) = self.matrix.eigh(UPLO::Lower)?;
        Ok(eigs.iter().cloned().fold(f64::INFINITY, f64::min))
    }

    /// Principal square root via Hermitian eigendecomposition with a
    /// 1e-12 eigenvalue floor.
    pub fn sqrt(&self) -> Result<CMat> {
        let (eigs, vecs) = self.matrix.eigh(UPLO::Lower)?;
        let roots: Vec<C64> = eigs
            .iter()
            .map(|&l| C64::new(l.max(1e-12).sqrt(), 0.0))
            .collect();
        let d = Array2::from_diag(&Array1::from(roots));
        Ok(vecs.dot(&d).dot(&conj_transpose(&vecs)))
    }
}

pub fn vectorize(a: &CMat) -> CVec {
    // Column-stacking: entry (i, j) lands at index j*d + i.
    let d = a.nrows();
    let mut v = Array1::zeros(d * d);
    for j in 0..d {
        for i in 0..d {
            v[j * d + i] = a[[i, j]];
        }
    }
    v
}

pub fn unvectorize(v: &CVec, d: usize) -> CMat {
    let mut a = CMat::zeros((d, d));
    for j in 0..d {
        for i in 0..d {
            a[[i, j]] = v[j * d + i];
        }
    }
    a
}

pub fn kron_c(a: &CMat, b: &CMat) -> CMat {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = CMat::zeros((ra * rb, ca * cb));
    for i in 0..ra {
        for j in 0..ca {
            let v = a[[i, j]];
            if v.norm_sqr() != 0.0 {
                out.slice_mut(s![i * rb..(i + 1) * rb, j * cb..(j + 1) * cb])
                    .assign(&b.mapv(|z| z * v));
            }
        }
    }
    out
}

/// Superoperator of X -> A X B under column-stacking: B^T (x) A.
pub fn sandwich_superop(a: &CMat, b: &CMat) -> CMat {
    kron_c(&b.t().to_owned(), a)
}

fn commutator_superop(a: &CMat) -> CMat {
    let d = a.nrows();
    let id = CMat::eye(d);
    sandwich_superop(a, &id) - sandwich_superop(&id, a)
}

/// Heisenberg-picture Hamiltonian part i[H, .].
pub fn heisenberg_hamiltonian_superop(h: &CMat) -> CMat {
    commutator_superop(h).mapv(|z| z * C64::new(0.0, 1.0))
}

/// Heisenberg-picture dissipative part
/// sum_j ( L_j^H [., L_j] + [L_j^H, .] L_j ) = sum_j ( 2 L^H . L - {L^H L, .} ).
pub fn heisenberg_dissipator_superop(jumps: &[CMat]) -> CMat {
    let d = jumps[0].nrows();
    let id = CMat::eye(d);
    let mut total = CMat::zeros((d * d, d * d));
    for l in jumps {
        let ldag = conj_transpose(l);
        let ldl = ldag.dot(l);
        total = total + sandwich_superop(&ldag, l).mapv(|z| z * 2.0)
            - sandwich_superop(&ldl, &id)
            - sandwich_superop(&id, &ldl);
    }
    total
}

/// Schroedinger-picture generator acting on states, including gamma.
pub fn schrodinger_superop(model: &LindbladModel) -> CMat {
    let d = model.dim;
    let id = CMat::eye(d);
    let mut total = commutator_superop(&model.hamiltonian).mapv(|z| z * C64::new(0.0, -1.0));
    for l in &model.jumps {
        let ldag = conj_transpose(l);
        let ldl = ldag.dot(l);
        let diss = sandwich_superop(l, &ldag)
            - sandwich_superop(&ldl, &id).mapv(|z| z * 0.5)
            - sandwich_superop(&id, &ldl).mapv(|z| z * 0.5);
        total = total + diss.mapv(|z| z * model.gamma);
    }
    total
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct StationaryFlags {
    pub unique: bool,
    pub full_rank: bool,
}

/// Stationary state from the null space of the Schroedinger superoperator.
pub fn stationary_state(
    model: &LindbladModel,
    tol: f64,
) -> Result<(DensityMatrix, StationaryFlags)> {
    let d = model.dim;
    let superop = schrodinger_superop(model);
    let (_, sv, vh) = superop.svd(false, true)?;
    let vh = vh.expect("right singular vectors");
    let smax = sv.iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let kernel_rows: Vec<usize> = (0..sv.len())
        .filter(|&i| sv[i] <= DEFAULT_KERNEL_TOL * smax)
        .collect();
    if kernel_rows.is_empty() {
        return Err(HypoflowError::NoStationaryState { tol });
    }
    let unique = kernel_rows.len() == 1;

    // Project the maximally mixed state onto the kernel; the result is
    // stationary, Hermitian, and has nonzero trace whenever a stationary
    // state exists in the kernel.
    let mixed = vectorize(&CMat::eye(d).mapv(|z| z / d as f64));
    let mut proj: CVec = Array1::zeros(d * d);
    for &i in &kernel_rows {
        let v: CVec = vh.slice(s![i, ..]).mapv(|z| z.conj());
        let coeff: C64 = v.iter().zip(mixed.iter()).map(|(a, b)| a.conj() * b).sum();
        proj = proj + v.mapv(|z| z * coeff);
    }
    let mut candidate = unvectorize(&proj, d);
    candidate = (&candidate + &conj_transpose(&candidate)).mapv(|z| 0.5 * z);
    let trace: C64 = candidate.diag().sum();
    if trace.norm() < 1e-12 {
        return Err(HypoflowError::NoStationaryState { tol });
    }
    let candidate = candidate.mapv(|z| z / trace);
    let (eigs, _) = candidate.eigh(UPLO::Lower)?;
    let min_eig = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_eig < -1e-10 {
        return Err(HypoflowError::KernelElementNotState { min_eig });
    }
    // Clip tiny negative eigenvalues introduced by the projection.
    let sigma = DensityMatrix::new(clip_psd(&candidate)?)?;
    let full_rank = sigma.min_eigenvalue()? > tol;
    Ok((sigma, StationaryFlags { unique, full_rank }))
}

fn clip_psd(a: &CMat) -> Result<CMat> {
    let (eigs, vecs) = a.eigh(UPLO::Lower)?;
    let total: f64 = eigs.iter().map(|&l| l.max(0.0)).sum();
    let d = Array2::from_diag(&Array1::from(
        eigs.iter()
            .map(|&l| C64::new(l.max(0.0) / total, 0.0))
            .collect::<Vec<_>>(),
    ));
    Ok(vecs.dot(&d).dot(&conj_transpose(&vecs)))
}

/// Weighted space over vectorized operators whose Gram matrix reproduces
/// the KMS inner product of sigma.
pub fn kms_space(sigma: &DensityMatrix) -> Result<Arc<WeightedSpace>> {
    let min_eig = sigma.min_eigenvalue()?;
    if min_eig <= 1e-12 {
        return Err(HypoflowError::KmsRankDeficient { min_eig });
    }
    let root = sigma.sqrt()?;
    // tr(S A^H S B) = vec(A)^H (S^T (x) S) vec(B).
    let gram = kron_c(&root.t().to_owned(), &root);
    WeightedSpace::new(gram, Field::Complex)
}

/// Heisenberg-picture generator split (L_a, L_s) on the KMS space of sigma.
///
/// Models whose parts fail KMS (anti)symmetry are rejected rather than
/// processed; every downstream rate statement assumes that structure.
pub fn build_lindblad_heisenberg(
    model: &LindbladModel,
    sigma: &DensityMatrix,
) -> Result<GeneratorDecomposition> {
    let space = kms_space(sigma)?;
    let l_a = LinOp::new(
        heisenberg_hamiltonian_superop(&model.hamiltonian),
        Arc::clone(&space),
    )?;
    let l_s = LinOp::new(heisenberg_dissipator_superop(&model.jumps), Arc::clone(&space))?;

    let a_rep = l_a.symmetry_check(1e-8)?;
    let s_rep = l_s.symmetry_check(1e-8)?;
    let a_ok = l_a.frobenius() < 1e-14
        || a_rep.classification == crate::linop::Symmetry::Antisymmetric;
    if !a_ok || s_rep.classification != crate::linop::Symmetry::Symmetric {
        return Err(HypoflowError::KmsSymmetryViolated {
            residual: a_rep
                .antisymmetric_residual
                .max(s_rep.symmetric_residual),
        });
    }

    let kb = kernel_basis(&l_s, DEFAULT_KERNEL_TOL)?;
    let pi_s = crate::spectral::projector(&kb, Arc::clone(&space))?;
    let identity_vec = vectorize(&CMat::eye(model.dim));
    GeneratorDecomposition::new(l_a, l_s, model.gamma, pi_s, Vec::new(), 0.0, identity_vec)
}

/// KMS detailed balance: self-adjointness of the full generator. Only
/// meaningful for H = 0 or the dissipative part alone; a nonzero
/// Hamiltonian contributes an anti-self-adjoint piece.
pub fn check_detailed_balance(
    model: &LindbladModel,
    sigma: &DensityMatrix,
    tol: f64,
) -> Result<(bool, f64)> {
    let space = kms_space(sigma)?;
    let full = heisenberg_hamiltonian_superop(&model.hamiltonian)
        + heisenberg_dissipator_superop(&model.jumps).mapv(|z| z * model.gamma);
    let op = LinOp::new(full, space)?;
    let rep = op.symmetry_check(tol.max(1e-15))?;
    Ok((rep.symmetric_residual < tol, rep.symmetric_residual))
}

#[derive(Debug, Clone)]
pub struct CommutantKernels {
    /// KMS-orthonormal basis of {A : [L_j, A] = [L_j^H, A] = 0}.
    pub ker_ls: CMat,
    /// KMS-orthonormal basis of the above intersected with [H, A] = 0.
    pub ker_l: CMat,
}

/// Kernel characterization by commutants, cross-checked against the
/// kernels of the built generators.
pub fn commutant_kernel(model: &LindbladModel) -> Result<CommutantKernels> {
    let (sigma, _) = stationary_state(model, 1e-10)?;
    let space = kms_space(&sigma)?;
    let d = model.dim;

    let mut blocks: Vec<CMat> = Vec::new();
    for l in &model.jumps {
        blocks.push(commutator_superop(l));
        blocks.push(commutator_superop(&conj_transpose(l)));
    }
    let ker_ls = stacked_null_space(&blocks, d, &space)?;
    blocks.push(commutator_superop(&model.hamiltonian));
    let ker_l = stacked_null_space(&blocks, d, &space)?;

    // ker(L) must sit inside ker(L_s).
    let pls = crate::spectral::projector(&ker_ls, Arc::clone(&space))?;
    for col in ker_l.columns() {
        let v = col.to_owned();
        let res = space.norm(&(&pls.apply(&v) - &v));
        if res > 1e-9 {
            return Err(HypoflowError::KernelCharacterization { residual: res });
        }
    }

    // Agreement with the generator kernels.
    let decomp = build_lindblad_heisenberg(model, &sigma)?;
    let gen_ls = kernel_basis(&decomp.l_s, DEFAULT_KERNEL_TOL)?;
    let gen_l = kernel_basis(&decomp.full()?, DEFAULT_KERNEL_TOL)?;
    check_same_span(&ker_ls, &gen_ls, &space)?;
    check_same_span(&ker_l, &gen_l, &space)?;

    Ok(CommutantKernels { ker_ls, ker_l })
}

fn stacked_null_space(
    blocks: &[CMat],
    d: usize,
    space: &Arc<WeightedSpace>,
) -> Result<CMat> {
    let n = d * d;
    let mut stacked = CMat::zeros((blocks.len() * n, n));
    for (b, block) in blocks.iter().enumerate() {
        stacked.slice_mut(s![b * n..(b + 1) * n, ..]).assign(block);
    }
    let (_, sv, vh) = stacked.svd(false, true)?;
    let vh = vh.expect("right singular vectors");
    let smax = sv.iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let cols: Vec<usize> = (0..n)
        .filter(|&i| sv.get(i).map_or(true, |&s| s <= DEFAULT_KERNEL_TOL * smax))
        .collect();
    let mut basis = CMat::zeros((n, cols.len()));
    for (j, &i) in cols.iter().enumerate() {
        basis
            .slice_mut(s![.., j])
            .assign(&vh.slice(s![i, ..]).mapv(|z| z.conj()));
    }
    Ok(canonicalize_columns(kms_orthonormalize(&basis, space)?))
}

/// Orthonormalize columns against the space's Gram matrix via Cholesky of
/// the overlap matrix.
fn kms_orthonormalize(basis: &CMat, space: &Arc<WeightedSpace>) -> Result<CMat> {
    if basis.ncols() == 0 {
        return Ok(basis.clone());
    }
    let overlap = conj_transpose(basis).dot(space.gram()).dot(basis);
    use ndarray_linalg::{Cholesky, Inverse};
    let r = overlap.cholesky(UPLO::Upper)?;
    let r_inv = r.inv()?;
    Ok(basis.dot(&r_inv))
}

fn check_same_span(a: &CMat, b: &CMat, space: &Arc<WeightedSpace>) -> Result<()> {
    if a.ncols() != b.ncols() {
        return Err(HypoflowError::KernelCharacterization {
            residual: (a.ncols() as f64 - b.ncols() as f64).abs(),
        });
    }
    let pa = crate::spectral::projector(a, Arc::clone(space))?;
    let pb = crate::spectral::projector(b, Arc::clone(space))?;
    let diff = LinOp::new(&pa.matrix - &pb.matrix, Arc::clone(space))?.op_norm()?;
    if diff > 1e-9 {
        return Err(HypoflowError::KernelCharacterization { residual: diff });
    }
    Ok(())
}

// --- Pauli-string shorthand -------------------------------------------------

pub fn pauli(ch: char) -> Result<CMat> {
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let m = match ch {
        'I' => ndarray::array![[one, z], [z, one]],
        'X' => ndarray::array![[z, one], [one, z]],
        'Y' => ndarray::array![[z, -i], [i, z]],
        'Z' => ndarray::array![[one, z], [z, -one]],
        '+' => ndarray::array![[z, one], [z, z]],
        '-' => ndarray::array![[z, z], [one, z]],
        _ => {
            return Err(HypoflowError::InvalidModel(format!(
                "unknown Pauli letter '{ch}'"
            )))
        }
    };
    Ok(m)
}

/// Parse Pauli shorthand into a d x d matrix for a register of qubits.
///
/// Accepted forms: a full tensor word ("XX", "ZI"), or letter+index
/// ("Z1" = Z on qubit 1, zero-based) padded with identities.
pub fn parse_pauli_string(s: &str, dim: usize) -> Result<CMat> {
    let n_qubits = dim.trailing_zeros() as usize;
    if dim != 1 << n_qubits {
        return Err(HypoflowError::InvalidModel(format!(
            "Pauli shorthand requires a power-of-two dimension, got {dim}"
        )));
    }
    let chars: Vec<char> = s.chars().collect();
    let letters: Vec<char> = if chars.len() >= 2 && chars[1..].iter().all(|c| c.is_ascii_digit()) {
        let idx: usize = s[1..].parse().map_err(|_| {
            HypoflowError::InvalidModel(format!("bad qubit index in '{s}'"))
        })?;
        if idx >= n_qubits {
            return Err(HypoflowError::InvalidModel(format!(
                "qubit index {idx} out of range for {n_qubits} qubits"
            )));
        }
        (0..n_qubits)
            .map(|q| if q == idx { chars[0] } else { 'I' })
            .collect()
    } else {
        if chars.len() != n_qubits {
            return Err(HypoflowError::InvalidModel(format!(
                "Pauli word '{s}' has {} letters, expected {n_qubits}",
                chars.len()
            )));
        }
        chars
    };
    let mut m = pauli(letters[0])?;
    for &ch in &letters[1..] {
        m = kron_c(&m, &pauli(ch)?);
    }
    Ok(m)
}

// --- Catalog models ----------------------------------------------------------

/// Thermal qubit: H = sigma_z/2, downward jump at rate 2/3, upward at 1/3.
/// Coercive branch: ker(L_s) = ker(L) = span{I}.
pub fn thermal_qubit(gamma: f64) -> Result<LindbladModel> {
    let h = pauli('Z')?.mapv(|z| z * 0.5);
    let down = pauli('-')?.mapv(|z| z * (2.0f64 / 3.0).sqrt());
    let up = pauli('+')?.mapv(|z| z * (1.0f64 / 3.0).sqrt());
    LindbladModel::new(h, vec![down, up], gamma)
}

/// Two-qubit lift model: jumps {X (x) I, Z (x) I}, H = X (x) X.
/// Hypocoercive branch: ker(L) (dim 2) strictly inside ker(L_s) (dim 4),
/// and Pi_s L_a Pi_s = 0.
pub fn two_qubit_lift(gamma: f64) -> Result<LindbladModel> {
    let h = parse_pauli_string("XX", 4)?;
    let jx = parse_pauli_string("XI", 4)?;
    let jz = parse_pauli_string("ZI", 4)?;
    LindbladModel::new(h, vec![jx, jz], gamma)
}
