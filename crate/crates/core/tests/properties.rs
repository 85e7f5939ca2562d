//! Cross-module property checks: structural invariants via proptest and
//! lighter versions of the numerical identity sweeps the acceptance suite
//! runs at full volume.

use proptest::prelude::*;

use qtangle::concurrence::{
    convex_roof_sample, mixed_concurrence_sq, pure_concurrence_sq, pure_concurrence_vector,
    tilde_overlap_sums, wootters_concurrence,
};
use qtangle::optimize::OptimizerConfig;
use qtangle::state::{
    random_density, random_pure, random_unitary, Bipartition, DensityMatrix, State,
};
use qtangle::tangle::{monogamy_slack, residual_entanglement, tau_for_focus};

fn dims_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(2usize..4, 2..5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // Tracing out V then V' is tracing out their union.
    #[test]
    fn partial_trace_composes(dims in dims_strategy(), seed in 0u64..1000, mask in 1u32..14) {
        let rho = random_density(&dims, 3, seed).unwrap();
        let n = dims.len();
        let traced: Vec<usize> = (0..n).filter(|p| mask & (1 << p) != 0 && *p < n).collect();
        prop_assume!(!traced.is_empty() && traced.len() < n);
        let (first, second) = traced.split_at(traced.len() / 2);
        prop_assume!(!first.is_empty() && !second.is_empty());

        let direct = rho.partial_trace(&traced).unwrap();
        let partial = rho.partial_trace(second).unwrap();
        // Positions of `first` after `second` has been removed.
        let remaining: Vec<usize> = (0..n).filter(|p| !second.contains(p)).collect();
        let first_pos: Vec<usize> = remaining
            .iter()
            .enumerate()
            .filter(|(_, p)| first.contains(p))
            .map(|(i, _)| i)
            .collect();
        let staged = partial.partial_trace(&first_pos).unwrap();

        prop_assert_eq!(direct.dims(), staged.dims());
        for (a, b) in direct.matrix().iter().zip(staged.matrix().iter()) {
            prop_assert!((a - b).norm() <= 1e-10);
        }
    }

    // Grouping is a pure index permutation: undoing it is exact.
    #[test]
    fn grouping_round_trips_exactly(dims in dims_strategy(), seed in 0u64..1000, pick in 0usize..100) {
        let psi = random_pure(&dims, seed).unwrap();
        let n = dims.len();
        let focus: Vec<usize> = (0..n).filter(|p| pick & (1 << p) != 0).collect();
        prop_assume!(!focus.is_empty() && focus.len() < n);
        let bip = Bipartition::new(&focus, &dims).unwrap();

        let perm = bip.permutation();
        let mut inverse = vec![0usize; n];
        for (slot, &p) in perm.iter().enumerate() {
            inverse[p] = slot;
        }
        let back = psi
            .permute_parties(&perm)
            .unwrap()
            .permute_parties(&inverse)
            .unwrap();
        for (a, b) in back.amplitudes().iter().zip(psi.amplitudes().iter()) {
            prop_assert_eq!(a, b);
        }

        // The grouped object also keeps the reduced trace at one.
        let grouped = psi.group(&bip).unwrap();
        prop_assert!((grouped.norm() - 1.0).abs() <= 1e-12);
        prop_assert_eq!(grouped.dims(), &[bip.focus_dim(), bip.rest_dim()]);
    }

    // Reduced states of pure states keep unit trace for every party subset.
    #[test]
    fn reduced_trace_is_preserved(dims in dims_strategy(), seed in 0u64..1000, mask in 1u32..14) {
        let psi = random_pure(&dims, seed).unwrap();
        let rho = DensityMatrix::from_pure(&psi);
        let n = dims.len();
        let traced: Vec<usize> = (0..n).filter(|p| mask & (1 << p) != 0).collect();
        prop_assume!(!traced.is_empty() && traced.len() < n);
        let red = rho.partial_trace(&traced).unwrap();
        prop_assert!((red.trace() - 1.0).abs() <= 1e-10);
    }
}

// The vector form and the linear-entropy form of the pure measure agree.
#[test]
fn concurrence_vector_norm_equals_twice_linear_entropy() {
    let dim_pairs: &[(usize, usize)] = &[(2, 2), (2, 3), (3, 3), (2, 4), (4, 4)];
    let mut worst: f64 = 0.0;
    for (i, &(d1, d2)) in dim_pairs.iter().enumerate() {
        for s in 0..10u64 {
            let psi = random_pure(&[d1, d2], 40 * (i as u64 + 1) + s).unwrap();
            let bip = Bipartition::new(&[0], psi.dims()).unwrap();
            let lhs = pure_concurrence_vector(&psi, &bip).unwrap().norm_sq();
            let rhs = pure_concurrence_sq(&psi, &bip).unwrap();
            worst = worst.max((lhs - rhs).abs());
        }
    }
    assert!(worst <= 1e-10, "worst deviation {worst}");
}

// The optimized mixed-state bound must coincide with the exact formula on
// projectors, including states whose concurrence-vector entries carry
// different complex phases.
#[test]
fn pure_state_consistency_of_mixed_bound() {
    let cfg = OptimizerConfig::default();
    for (i, dims) in [[2usize, 2], [2, 3], [3, 3], [2, 4]].iter().enumerate() {
        for s in 0..5u64 {
            let psi = random_pure(dims, 1000 + 17 * (i as u64) + s).unwrap();
            let bip = Bipartition::new(&[0], psi.dims()).unwrap();
            let exact = pure_concurrence_sq(&psi, &bip).unwrap();
            let rho = DensityMatrix::from_pure(&psi);
            let bound = mixed_concurrence_sq(&rho, &cfg).unwrap();
            assert!(
                (bound.value - exact).abs() <= 1e-8,
                "dims {dims:?} seed {s}: bound {} vs exact {exact}",
                bound.value
            );
        }
    }
}

#[test]
fn wootters_reduction_of_the_bound() {
    let cfg = OptimizerConfig::default();
    for s in 0..50u64 {
        let rho = random_density(&[2, 2], 4, 2000 + s).unwrap();
        let bound = mixed_concurrence_sq(&rho, &cfg).unwrap();
        let wootters = wootters_concurrence(&rho).unwrap();
        assert!(
            (bound.value - wootters.powi(2)).abs() <= 1e-9,
            "seed {s}: {} vs {}",
            bound.value,
            wootters.powi(2)
        );
    }
}

#[test]
fn bound_stays_below_sampled_convex_roof() {
    let cfg = OptimizerConfig::default();
    for (i, dims) in [[2usize, 2], [2, 3]].iter().enumerate() {
        for s in 0..5u64 {
            let rho = random_density(dims, 4, 3000 + 13 * (i as u64) + s).unwrap();
            let bound = mixed_concurrence_sq(&rho, &cfg).unwrap().value;
            let roof = convex_roof_sample(&rho, 500, 77 + s).unwrap();
            assert!(
                roof >= bound - 1e-6,
                "dims {dims:?} seed {s}: roof {roof} below bound {bound}"
            );
        }
    }
}

#[test]
fn bound_invariant_under_local_unitaries() {
    let cfg = OptimizerConfig::default();
    for (i, &(d1, d2, env)) in [(2usize, 2usize, 4usize), (2, 3, 3), (2, 4, 2)]
        .iter()
        .enumerate()
    {
        for s in 0..2u64 {
            let rho = random_density(&[d1, d2], env, 4000 + 7 * (i as u64) + s).unwrap();
            let u = random_unitary(d1, 50 + s);
            let v = random_unitary(d2, 60 + s);
            let uv = u.kronecker(&v);
            let rotated =
                DensityMatrix::new(vec![d1, d2], &uv * rho.matrix() * uv.adjoint()).unwrap();
            let a = mixed_concurrence_sq(&rho, &cfg).unwrap().value;
            let b = mixed_concurrence_sq(&rotated, &cfg).unwrap().value;
            assert!(
                (a - b).abs() <= 1e-6,
                "({d1},{d2}) env {env} seed {s}: {a} vs {b}"
            );
        }
    }
}

#[test]
fn optimum_monotone_in_restarts() {
    let rho = random_density(&[2, 3], 4, 5050).unwrap();
    let mut prev = f64::NEG_INFINITY;
    for restarts in 1..=10 {
        let cfg = OptimizerConfig::default().with_restarts(restarts);
        let mc = mixed_concurrence_sq(&rho, &cfg).unwrap();
        assert!(
            mc.objective >= prev,
            "objective decreased at {restarts} restarts: {} < {prev}",
            mc.objective
        );
        prev = mc.objective;
    }
}

#[test]
fn overlap_identity_light_sweep() {
    let mut worst: f64 = 0.0;
    for (i, dims) in [[2usize, 2, 2], [2, 2, 3], [3, 2, 2]].iter().enumerate() {
        for s in 0..10u64 {
            let psi = random_pure(dims, 6000 + 29 * (i as u64) + s).unwrap();
            let t = tilde_overlap_sums(&psi).unwrap();
            worst = worst.max(t.deviation());
        }
    }
    assert!(worst <= 1e-9, "worst identity deviation {worst}");
}

#[test]
fn monogamy_slack_light_sweep() {
    let cfg = OptimizerConfig::default();
    let mut min_slack = f64::INFINITY;
    for s in 0..10u64 {
        let psi = random_pure(&[2, 2, 2], 7000 + s).unwrap();
        for focus in 0..3 {
            let bip = Bipartition::new(&[focus], psi.dims()).unwrap();
            min_slack = min_slack.min(monogamy_slack(&psi, &bip, &cfg).unwrap());
        }
    }
    assert!(min_slack >= -1e-6, "minimum slack {min_slack}");
}

// Product states carry no grouped entanglement across the product cut, so
// the residual vanishes there.
#[test]
fn product_states_have_zero_residual() {
    let cfg = OptimizerConfig::default();

    let pure_product = random_pure(&[2, 2], 31)
        .unwrap()
        .tensor(&random_pure(&[2], 32).unwrap());
    let bip = Bipartition::new(&[0, 1], pure_product.dims()).unwrap();
    let state = State::Pure(pure_product);
    let cut = tau_for_focus(&state, &bip, &cfg).unwrap();
    assert!(cut.total_sq <= 1e-8);
    let report = residual_entanglement(&state, &cfg).unwrap();
    assert!(report.residual_raw <= 1e-8);

    // Mixed product of two random density factors.
    let left = random_density(&[2, 2], 2, 33).unwrap();
    let right = random_density(&[2], 2, 34).unwrap();
    let joint = left.matrix().kronecker(right.matrix());
    let rho = DensityMatrix::new(vec![2, 2, 2], joint).unwrap();
    let state = State::Density(rho);
    let cut = tau_for_focus(&state, &bip, &cfg).unwrap();
    assert!(
        cut.total_sq <= 1e-8,
        "grouped product total {}",
        cut.total_sq
    );
    let report = residual_entanglement(&state, &cfg).unwrap();
    assert!(report.lower_bound_semantics);
    assert!(report.residual_raw <= 1e-8);
}
