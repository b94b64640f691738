// Copyright 2026 hypoflow contributors
// SPDX-License-Identifier: Apache-2.0

//! Shipped model catalog and model-file loading.
//!
//! Each entry builds a [`GeneratorDecomposition`] at requested parameters
//! and reports its structural classification (coercive versus
//! hypocoercive) from the kernel comparison ker(L) vs ker(L_s).

use ndarray::Array2;

use crate::classical::{build_langevin, PotentialSpec};
use crate::decomp::GeneratorDecomposition;
use crate::error::{HypoflowError, Result};
use crate::quantum::{
    build_lindblad_heisenberg, stationary_state, thermal_qubit, two_qubit_lift, DensityMatrix,
    LindbladModel,
};
use crate::space::{CMat, C64};
use crate::spectral::{kernel_basis, DEFAULT_KERNEL_TOL};

pub const CATALOG_NAMES: [&str; 4] = ["quadratic", "periodic-free", "thermal-qubit", "two-qubit"];

/// Knobs shared by the catalog builders; irrelevant fields are ignored by
/// models that do not use them.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct ModelParams {
    /// Quadratic-well curvature.
    pub m: f64,
    /// Friction / interaction strength.
    pub gamma: f64,
    /// Position truncation (modes).
    pub n_x: usize,
    /// Velocity truncation (Hermite degrees).
    pub n_v: usize,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            m: 1.0,
            gamma: 1.0,
            n_x: 16,
            n_v: 16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Coercive,
    Hypocoercive,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ModelInfo {
    pub name: String,
    pub kind: String,
    /// Dimension of the discretized state space the generator acts on.
    pub dimension: usize,
    pub ker_l_dim: usize,
    pub ker_ls_dim: usize,
    pub classification: Classification,
    /// Whether Pi_s L_a Pi_s vanishes (the lift structure condition).
    pub php_satisfied: bool,
}

/// A catalog model built at concrete parameters.
pub struct BuiltModel {
    pub decomp: GeneratorDecomposition,
    pub info: ModelInfo,
    /// Populated for quantum entries.
    pub lindblad: Option<LindbladModel>,
    pub stationary: Option<DensityMatrix>,
    /// Populated for classical entries.
    pub potential: Option<PotentialSpec>,
}

fn classify(decomp: &GeneratorDecomposition) -> Result<(usize, usize, Classification, bool)> {
    let ker_l = kernel_basis(&decomp.full()?, DEFAULT_KERNEL_TOL)?.ncols();
    let ker_ls = kernel_basis(&decomp.l_s, DEFAULT_KERNEL_TOL)?.ncols();
    let classification = if ker_l == ker_ls {
        Classification::Coercive
    } else {
        Classification::Hypocoercive
    };
    let php = decomp
        .pi_s
        .compose(&decomp.l_a)?
        .compose(&decomp.pi_s)?
        .op_norm()?;
    Ok((ker_l, ker_ls, classification, php < 1e-10))
}

fn quantum_built(
    name: &str,
    model: LindbladModel,
) -> Result<BuiltModel> {
    let (sigma, _) = stationary_state(&model, 1e-10)?;
    let decomp = build_lindblad_heisenberg(&model, &sigma)?;
    let (ker_l, ker_ls, classification, php_satisfied) = classify(&decomp)?;
    let info = ModelInfo {
        name: name.to_string(),
        kind: "quantum".into(),
        dimension: decomp.space.dim(),
        ker_l_dim: ker_l,
        ker_ls_dim: ker_ls,
        classification,
        php_satisfied,
    };
    Ok(BuiltModel {
        decomp,
        info,
        lindblad: Some(model),
        stationary: Some(sigma),
        potential: None,
    })
}

fn classical_built(
    name: &str,
    potential: PotentialSpec,
    params: &ModelParams,
) -> Result<BuiltModel> {
    let decomp = build_langevin(&potential, params.n_x, params.n_v, params.gamma)?;
    let (ker_l, ker_ls, classification, php_satisfied) = classify(&decomp)?;
    let info = ModelInfo {
        name: name.to_string(),
        kind: "classical".into(),
        dimension: decomp.space.dim(),
        ker_l_dim: ker_l,
        ker_ls_dim: ker_ls,
        classification,
        php_satisfied,
    };
    Ok(BuiltModel {
        decomp,
        info,
        lindblad: None,
        stationary: None,
        potential: Some(potential),
    })
}

/// Build a catalog model by name, or load a Lindblad model from a JSON
/// file when `name` is a path ending in `.json`.
pub fn build_model(name: &str, params: &ModelParams) -> Result<BuiltModel> {
    match name {
        "quadratic" => classical_built(
            name,
            PotentialSpec::Quadratic { m: params.m },
            params,
        ),
        "periodic-free" => classical_built(
            name,
            PotentialSpec::Periodic {
                cos: vec![],
                sin: vec![],
            },
            params,
        ),
        "thermal-qubit" => quantum_built(name, thermal_qubit(params.gamma)?),
        "two-qubit" => quantum_built(name, two_qubit_lift(params.gamma)?),
        path if path.ends_with(".json") => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                HypoflowError::InvalidModel(format!("cannot read model file {path}: {e}"))
            })?;
            let model = lindblad_from_json(&text)?;
            quantum_built(path, model)
        }
        other => Err(HypoflowError::InvalidModel(format!(
            "unknown model '{other}'; catalog: {CATALOG_NAMES:?} or a .json model file"
        ))),
    }
}

/// Catalog listing built at the given parameters.
pub fn list_models(params: &ModelParams) -> Result<Vec<ModelInfo>> {
    CATALOG_NAMES
        .iter()
        .map(|name| build_model(name, params).map(|m| m.info))
        .collect()
}

/// JSON schema for user-supplied Lindblad models: complex entries are
/// [re, im] pairs, matrices are row-major nested arrays.
#[derive(Debug, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LindbladModelFile {
    pub dim: usize,
    pub hamiltonian: Vec<Vec<[f64; 2]>>,
    pub jumps: Vec<Vec<Vec<[f64; 2]>>>,
    pub gamma: f64,
}

fn matrix_from_rows(rows: &[Vec<[f64; 2]>], dim: usize, what: &str) -> Result<CMat> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(HypoflowError::InvalidModel(format!(
            "{what} must be a {dim}x{dim} matrix"
        )));
    }
    let mut m: CMat = Array2::zeros((dim, dim));
    for (i, row) in rows.iter().enumerate() {
        for (j, &[re, im]) in row.iter().enumerate() {
            m[[i, j]] = C64::new(re, im);
        }
    }
    Ok(m)
}

pub fn lindblad_from_json(text: &str) -> Result<LindbladModel> {
    let file: LindbladModelFile = serde_json::from_str(text)
        .map_err(|e| HypoflowError::InvalidModel(format!("bad model JSON: {e}")))?;
    let h = matrix_from_rows(&file.hamiltonian, file.dim, "hamiltonian")?;
    let jumps = file
        .jumps
        .iter()
        .enumerate()
        .map(|(k, rows)| matrix_from_rows(rows, file.dim, &format!("jump {k}")))
        .collect::<Result<Vec<_>>>()?;
    LindbladModel::new(h, jumps, file.gamma)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_params() -> ModelParams {
        ModelParams {
            n_x: 8,
            n_v: 8,
            ..Default::default()
        }
    }

    #[test]
    fn catalog_classification() {
        let infos = list_models(&small_params()).unwrap();
        let by_name = |n: &str| infos.iter().find(|i| i.name == n).unwrap();
        assert_eq!(
            by_name("quadratic").classification,
            Classification::Hypocoercive
        );
        assert_eq!(
            by_name("periodic-free").classification,
            Classification::Hypocoercive
        );
        assert_eq!(
            by_name("thermal-qubit").classification,
            Classification::Coercive
        );
        let tq = by_name("two-qubit");
        assert_eq!(tq.classification, Classification::Hypocoercive);
        assert_eq!(tq.ker_l_dim, 2);
        assert_eq!(tq.ker_ls_dim, 4);
        assert!(infos.iter().all(|i| i.php_satisfied));
    }

    #[test]
    fn unknown_model_rejected() {
        assert!(matches!(
            build_model("nonsense", &small_params()),
            Err(HypoflowError::InvalidModel(_))
        ));
    }

    #[test]
    fn json_model_round_trip() {
        // The thermal qubit expressed through the JSON schema.
        let text = r#"{
            "dim": 2,
            "hamiltonian": [[[0.5, 0.0], [0.0, 0.0]], [[0.0, 0.0], [-0.5, 0.0]]],
            "jumps": [
                [[[0.0, 0.0], [0.0, 0.0]], [[0.816496580927726, 0.0], [0.0, 0.0]]],
                [[[0.0, 0.0], [0.5773502691896257, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]
            ],
            "gamma": 1.0
        }"#;
        let model = lindblad_from_json(text).unwrap();
        let (sigma, flags) = stationary_state(&model, 1e-10).unwrap();
        assert!(flags.unique);
        assert!((sigma.matrix[[0, 0]].re - 1.0 / 3.0).abs() < 1e-10);
        // Unknown keys are rejected.
        let bad = text.replace("\"gamma\"", "\"gamma_typo\"");
        assert!(lindblad_from_json(&bad).is_err());
    }
}
