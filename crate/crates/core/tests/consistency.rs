//! Cross-module checks: LP optima against analytic bounds and explicit
//! models, at sizes closer to real use than the unit tests.

use classim::analytic::{bases_model_bound, build_bases_model};
use classim::simulation::{random_device_family, simulate};
use classim::states::{apply_isotropic_noise, gen_mub_states, gen_pair_maxcoherent, NoiseSpec};
use classim::steering::jm_binarized_feasible;
use classim::witness::{classical_bound, critical_visibility, evaluate, mub_witness};

#[test]
fn random_family_lands_in_the_expected_window() {
    // Two MUBs in d = 3 against 3000 random bases. The optimum depends on
    // the seed through the family, but sits between the constructive
    // two-basis value 0.5 and the witness ceiling 2/3.
    let set = gen_mub_states(3, 2).unwrap();
    let devices = random_device_family(3, 3, 3000, 7).unwrap();
    let res = simulate(&set, &devices).unwrap();
    assert!(
        res.visibility >= 0.5 && res.visibility <= 2.0 / 3.0,
        "v = {}",
        res.visibility
    );
    assert!(res.residual <= 1e-7, "residual {}", res.residual);
    assert!(res.gap <= 1e-6, "gap {}", res.gap);
}

#[test]
fn lp_reaches_the_bases_model_value() {
    // The explicit two-basis model certifies v = 0.5; the LP over the same
    // two devices can only do better.
    let set = gen_mub_states(3, 2).unwrap();
    let bases: Vec<_> = classim::states::gen_mub_bases(3)
        .unwrap()
        .into_iter()
        .take(2)
        .collect();
    let model = build_bases_model(&bases, 3).unwrap();
    let v = bases_model_bound(3, 2, 3).unwrap().visibility;
    assert_eq!(model.n_devices(), 2);
    let devices = classim::simulation::devices_from_bases(&bases, 3).unwrap();
    let res = simulate(&set, &devices).unwrap();
    assert!(res.visibility >= v - 1e-9, "v = {}", res.visibility);
}

#[test]
fn witness_bound_three_bases() {
    let w = mub_witness(3).unwrap();
    let bound = classical_bound(&w, true).unwrap();
    assert!((bound.beta - 6.4115).abs() <= 1e-3, "beta = {}", bound.beta);
    let target = gen_mub_states(3, 3).unwrap();
    let v = critical_visibility(&w, &target, bound.beta).unwrap();
    assert!((v - 0.5686).abs() <= 2e-3, "v = {v}");
}

#[test]
fn lp_never_beats_the_witness() {
    // Soundness both ways: the simulable visibility cannot exceed the
    // witness crossing, and the witness value at the simulable point stays
    // below the classical bound.
    let set = gen_mub_states(3, 2).unwrap();
    let w = mub_witness(2).unwrap();
    let bound = classical_bound(&w, true).unwrap();
    let v_crit = critical_visibility(&w, &set, bound.beta).unwrap();

    let devices = random_device_family(3, 3, 200, 3).unwrap();
    let res = simulate(&set, &devices).unwrap();
    assert!(res.visibility <= v_crit + 1e-6, "{} > {v_crit}", res.visibility);

    let noisy = apply_isotropic_noise(&set, NoiseSpec::new(res.visibility).unwrap());
    let value = evaluate(&w, &noisy).unwrap();
    assert!(value <= bound.beta + 1e-5, "{value} > {}", bound.beta);
}

#[test]
fn coherent_pair_improves_under_refinement() {
    // Two-state qutrit set: hill climbing from random devices must not lose
    // ground, and with a handful of iterations it should clear 0.6.
    let set = gen_pair_maxcoherent();
    let devices = random_device_family(3, 3, 20, 11).unwrap();
    let base = simulate(&set, &devices).unwrap();
    let refined = classim::simulation::refine_devices(
        &set,
        &devices,
        300,
        0.05,
        13,
        classim::simulation::RefineMode::Independent,
    )
    .unwrap();
    assert!(refined.visibility >= base.visibility - 1e-12);
    assert!(refined.visibility >= 0.6, "v = {}", refined.visibility);
}

#[test]
fn jm_holds_wherever_the_lp_finds_a_model() {
    // A classical model at visibility v binarizes into a parent measurement,
    // so joint measurability must hold at every v the LP certifies.
    let bb84 = classim::states::gen_bb84();
    assert!(jm_binarized_feasible(&bb84, std::f64::consts::FRAC_1_SQRT_2).unwrap());

    let pair = gen_mub_states(3, 2).unwrap();
    assert!(jm_binarized_feasible(&pair, 0.5).unwrap());
}

#[test]
fn jm_outlives_classicality() {
    // The converse fails: the witness puts the classical ceiling for two
    // qutrit MUBs at 2/3, yet the binarized pair is still jointly
    // measurable at 0.68.
    let pair = gen_mub_states(3, 2).unwrap();
    assert!(jm_binarized_feasible(&pair, 0.68).unwrap());
}

#[test]
fn extension_commutes_with_the_bases_model() {
    // Completing the r = 2 model's bases and adding complement outputs must
    // reproduce the extended noisy targets exactly.
    let bases: Vec<_> = classim::states::gen_mub_bases(3)
        .unwrap()
        .into_iter()
        .take(2)
        .collect();
    let model = build_bases_model(&bases, 2).unwrap();
    let extended = classim::model::extend_model(&model).unwrap();

    let v = bases_model_bound(3, 2, 2).unwrap().visibility;
    let noisy = apply_isotropic_noise(&gen_mub_states(3, 2).unwrap(), NoiseSpec::new(v).unwrap());
    let targets = classim::states::extend_set(&noisy).unwrap();
    assert_eq!(extended.n_states(), targets.len());
    for x in 0..targets.len() {
        let diff = extended
            .reconstruct(x)
            .unwrap()
            .matrix()
            .sub(targets.states()[x].matrix())
            .frobenius_norm();
        assert!(diff <= 1e-10, "state {x}: {diff:.3e}");
    }
}

#[test]
fn subset_size_orders_the_optimum() {
    // Same 12 unitaries, emitting from 2- versus 3-element subsets: the
    // larger windows can emulate the smaller ones, so v* can only rise.
    let set = gen_mub_states(3, 2).unwrap();
    let small = random_device_family(3, 2, 12, 5).unwrap();
    let large = random_device_family(3, 3, 12, 5).unwrap();
    let v_small = simulate(&set, &small).unwrap().visibility;
    let v_large = simulate(&set, &large).unwrap().visibility;
    assert!(v_large >= v_small - 1e-7, "{v_small} > {v_large}");
}

#[test]
fn single_column_devices_only_reach_zero() {
    // r = 1 devices emit one fixed state each; distinct pure targets then
    // coincide only at the fully depolarized point.
    let set = gen_mub_states(3, 2).unwrap();
    let devices = random_device_family(3, 1, 10, 2).unwrap();
    let res = simulate(&set, &devices).unwrap();
    assert!(res.visibility.abs() <= 1e-9, "v = {}", res.visibility);
}

#[test]
fn qubit_lp_and_jm_thresholds_coincide() {
    // For the Z/X pure pair both routes land on the same number.
    let set = classim::states::StateSet::new(
        vec![
            classim::states::DensityMatrix::from_pure(&classim::linalg::basis_ket(2, 0)).unwrap(),
            classim::states::DensityMatrix::from_pure(&[
                num_complex::Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
                num_complex::Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            ])
            .unwrap(),
        ],
        vec!["0".into(), "+".into()],
    )
    .unwrap();
    let lp = simulate(&set, &classim::simulation::bb84_devices()).unwrap();
    let jm = classim::steering::jm_threshold(&set).unwrap();
    assert!(
        (lp.visibility - std::f64::consts::FRAC_1_SQRT_2).abs() <= 1e-6,
        "lp {}",
        lp.visibility
    );
    assert!((lp.visibility - jm).abs() <= 1e-3, "lp {} vs jm {jm}", lp.visibility);
}
