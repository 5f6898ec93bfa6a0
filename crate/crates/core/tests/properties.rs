use proptest::prelude::*;
use resource_kit::indicators::{closed_form_k2, indicator, IndicatorKind, IndicatorSpec};
use resource_kit::random::{random_mixed, random_pure};
use resource_kit::{alpha_affinity, DensityMatrix, Ensemble, FamilyKind, FeasibleFamily, OptimizerOptions};

fn family_strategy() -> impl Strategy<Value = (FamilyKind, Vec<usize>)> {
    prop_oneof![
        (2usize..=4).prop_flat_map(|d| (1..=d).prop_map(move |k| (FamilyKind::Multilevel(k), vec![d]))),
        (2usize..=3).prop_flat_map(|n| (1..=n).prop_map(move |k| (FamilyKind::Separable(k), vec![2; n]))),
        (2usize..=3).prop_flat_map(|n| (1..=n).prop_map(move |k| (FamilyKind::Producible(k), vec![2; n]))),
    ]
}

fn theta_for(fam: &FeasibleFamily, seed: u64) -> Vec<f64> {
    use rand::Rng;
    let mut rng = resource_kit::random::rng_from_seed(seed);
    (0..fam.param_len()).map(|_| rng.random_range(-2.0..2.0)).collect()
}

fn light(seed: u64) -> OptimizerOptions {
    OptimizerOptions {
        restarts: 3,
        max_iter: 300,
        components: Some(4),
        ..OptimizerOptions::with_seed(seed)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn decoded_members_are_valid_and_feasible((kind, dims) in family_strategy(), seed in any::<u64>()) {
        let fam = FeasibleFamily::build(kind, &dims, None).unwrap();
        let theta = theta_for(&fam, seed);
        let e = fam.decode_ensemble(&theta).unwrap();
        prop_assert!(fam.check_membership(&e).is_ok());
        let rho = fam.decode(&theta).unwrap();
        prop_assert!((rho.trace() - 1.0).abs() < 1e-12);
        prop_assert!(rho.spectrum().values.iter().all(|&l| l > -1e-12));
    }

    #[test]
    fn encoding_a_member_round_trips((kind, dims) in family_strategy(), seed in any::<u64>()) {
        let fam = FeasibleFamily::build(kind, &dims, None).unwrap();
        let e = fam.decode_ensemble(&theta_for(&fam, seed)).unwrap();
        let back = fam.decode(&fam.encode(&e).unwrap()).unwrap();
        let diff = back.trace_distance(&e.to_density()).unwrap();
        prop_assert!(diff < 1e-9, "trace distance {}", diff);
    }

    #[test]
    fn affinity_is_a_symmetric_similarity(d in 2usize..=4, r1 in 1usize..=4, r2 in 1usize..=4, seed in any::<u64>(), alpha in 0.05f64..0.95) {
        let rho = random_mixed(&[d], r1.min(d), seed).unwrap();
        let sigma = random_mixed(&[d], r2.min(d), seed ^ 0x5555).unwrap();
        let a = alpha_affinity(&rho, &sigma, alpha).unwrap().value;
        let b = alpha_affinity(&sigma, &rho, 1.0 - alpha).unwrap().value;
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn closed_form_is_consistent(d in 2usize..=4, rank in 1usize..=4, seed in any::<u64>(), alpha in 0.05f64..0.95) {
        let rho = random_mixed(&[d], rank.min(d), seed).unwrap();
        let cf = closed_form_k2(&rho, alpha).unwrap();
        let direct = alpha_affinity(&rho, &cf.witness.to_density(), alpha).unwrap().value;
        prop_assert!((direct - cf.max_affinity).abs() < 1e-9);
        prop_assert!((cf.c - (1.0 - cf.max_affinity)).abs() < 1e-12);
        prop_assert!((cf.c_frak - (1.0 - cf.max_affinity.powf(1.0 / alpha))).abs() < 1e-12);
        // any other diagonal state does no better
        let diag = DensityMatrix::diagonal(&vec![1.0 / d as f64; d], vec![d]).unwrap();
        prop_assert!(alpha_affinity(&rho, &diag, alpha).unwrap().value <= cf.max_affinity + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn indicator_results_are_consistent(n in 2usize..=3, which in 0usize..4, seed in any::<u64>(), alpha in 0.1f64..0.9) {
        let dims = vec![2; n];
        let rho = random_mixed(&dims, 1 + (seed as usize % 3), seed).unwrap();
        let (kind, k) = match which {
            0 => (IndicatorKind::S, 1 + seed as usize % n),
            1 => (IndicatorKind::Sfrak, 1 + seed as usize % n),
            2 => (IndicatorKind::E, 2 + seed as usize % n),
            _ => (IndicatorKind::Efrak, 2 + seed as usize % n),
        };
        let r = indicator(&rho, IndicatorSpec { kind, k }, alpha, &light(seed)).unwrap();
        let expected = if kind.is_fraktur() { 1.0 - r.best_affinity.powf(1.0 / alpha) } else { 1.0 - r.best_affinity };
        prop_assert!((r.value - expected).abs() < 1e-12);
        let recomputed = alpha_affinity(&rho, &r.witness, alpha).unwrap().value;
        prop_assert!((recomputed - r.best_affinity).abs() < 1e-9);
        let fam = FeasibleFamily::build(kind.family_kind(k, &dims).unwrap(), &dims, Some(1)).unwrap();
        prop_assert!(fam.check_membership(&r.witness_ensemble).is_ok());
    }

    #[test]
    fn injected_witness_bounds_the_value(n in 2usize..=3, seed in any::<u64>(), alpha in 0.1f64..0.9, frak in any::<bool>()) {
        let dims = vec![2; n];
        let rho = random_mixed(&dims, 2, seed).unwrap();
        let kind = if frak { IndicatorKind::Sfrak } else { IndicatorKind::S };
        let k = n;
        // fully product pure states lie in every separable family
        let parts: Vec<_> = (0..n).map(|i| random_pure(&[2], seed.wrapping_add(i as u64)).unwrap()).collect();
        let psi = parts[1..].iter().fold(parts[0].clone(), |acc, p| acc.tensor(p));
        let w = Ensemble::pure(psi);
        let a0 = alpha_affinity(&rho, &w.to_density(), alpha).unwrap().value;
        let r = indicator(&rho, IndicatorSpec { kind, k }, alpha, &light(seed).with_witness(w)).unwrap();
        prop_assert!(r.value <= kind.value_from_affinity(a0, alpha) + 1e-9);
    }

    #[test]
    fn members_have_zero_indicator(d in 2usize..=4, seed in any::<u64>(), alpha in 0.1f64..0.9) {
        let k = 2 + seed as usize % (d - 1);
        let fam = FeasibleFamily::build(FamilyKind::Multilevel(k - 1), &[d], None).unwrap();
        let member = fam.decode_ensemble(&theta_for(&fam, seed)).unwrap();
        let r = indicator(
            &member.to_density(),
            IndicatorSpec { kind: IndicatorKind::C, k },
            alpha,
            &light(seed).with_witness(member),
        )
        .unwrap();
        prop_assert!(r.value <= 1e-6);
    }

    #[test]
    fn fully_product_pure_states_are_uncorrelated(n in 2usize..=3, seed in any::<u64>(), alpha in 0.1f64..0.9) {
        let parts: Vec<_> = (0..n).map(|i| random_pure(&[2], seed.wrapping_add(7 * i as u64)).unwrap()).collect();
        let psi = parts[1..].iter().fold(parts[0].clone(), |acc, p| acc.tensor(p));
        let rho = psi.to_density();
        for (kind, k) in [(IndicatorKind::S, n), (IndicatorKind::Efrak, 2)] {
            let r = indicator(&rho, IndicatorSpec { kind, k }, alpha, &light(seed)).unwrap();
            prop_assert!(r.value <= 1e-6, "{kind}^{k} = {}", r.value);
        }
    }
}

#[test]
fn indicator_runs_are_deterministic() {
    let rho = random_mixed(&[3], 2, 42).unwrap();
    let spec = IndicatorSpec { kind: IndicatorKind::Cfrak, k: 3 };
    let a = indicator(&rho, spec, 0.3, &OptimizerOptions::with_seed(9)).unwrap();
    let b = indicator(&rho, spec, 0.3, &OptimizerOptions::with_seed(9)).unwrap();
    assert_eq!(a.csv_row(), b.csv_row());
    assert_eq!(a.to_json_value(), b.to_json_value());
}
