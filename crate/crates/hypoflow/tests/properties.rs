// Copyright 2026 hypoflow contributors
// SPDX-License-Identifier: Apache-2.0

//! Property-based checks of the weighted-space algebra and the semigroup:
//! adjoints satisfy the defining inner-product identity on random vectors,
//! and dissipative generators contract along log-spaced times.

use num_complex::Complex64;
use proptest::prelude::*;

use hypoflow::catalog::{build_model, ModelParams};
use hypoflow::expm::Propagator;
use hypoflow::CVec;

fn params() -> ModelParams {
    ModelParams {
        m: 1.0,
        gamma: 1.0,
        n_x: 6,
        n_v: 6,
    }
}

fn vector_strategy(dim: usize) -> impl Strategy<Value = CVec> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim).prop_map(|pairs| {
        CVec::from_iter(pairs.into_iter().map(|(re, im)| Complex64::new(re, im)))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// <A* x, y> = <x, A y> in the weighted metric, for the full generator
    /// of each catalog model and random complex vectors.
    #[test]
    fn adjoint_satisfies_inner_product_identity(
        model_idx in 0usize..4,
        seed_pair in (0u64..u64::MAX, 0u64..u64::MAX),
    ) {
        let name = hypoflow::catalog::CATALOG_NAMES[model_idx];
        let built = build_model(name, &params()).unwrap();
        let full = built.decomp.full().unwrap();
        let space = &built.decomp.space;
        let n = space.dim();
        // Derive vectors deterministically from the proptest seeds so the
        // strategy stays shrinkable.
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed_pair.0 ^ seed_pair.1);
        let draw = |rng: &mut rand_chacha::ChaCha8Rng| {
            CVec::from_shape_fn(n, |_| {
                Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
            })
        };
        let x = draw(&mut rng);
        let y = draw(&mut rng);
        let adj = full.adjoint().unwrap();
        let lhs = space.inner(&adj.apply(&x), &y);
        let rhs = space.inner(&x, &full.apply(&y));
        let scale = space.norm(&x) * space.norm(&y) * full.op_norm().unwrap() + 1.0;
        prop_assert!(
            (lhs - rhs).norm() < 1e-10 * scale,
            "{name}: <A*x,y> = {lhs}, <x,Ay> = {rhs}"
        );
    }

    /// The semigroup never expands the weighted norm: ||exp(tL)x|| <= ||x||
    /// along log-spaced times, for random vectors.
    #[test]
    fn semigroup_contracts_weighted_norm(
        model_idx in 0usize..4,
        v in vector_strategy(36),
        log_t in -3.0f64..2.0,
    ) {
        let name = hypoflow::catalog::CATALOG_NAMES[model_idx];
        let built = build_model(name, &params()).unwrap();
        let full = built.decomp.full().unwrap();
        let space = &built.decomp.space;
        let n = space.dim();
        let x = CVec::from_shape_fn(n, |i| v[i % v.len()]);
        let norm0 = space.norm(&x);
        prop_assume!(norm0 > 1e-6);
        let prop_op = Propagator::new(&full).unwrap();
        let t = 10f64.powf(log_t);
        let xt = prop_op.apply(t, &x).unwrap();
        prop_assert!(
            space.norm(&xt) <= norm0 * (1.0 + 1e-9),
            "{name}: norm grew from {norm0} to {} at t = {t}",
            space.norm(&xt)
        );
    }
}
