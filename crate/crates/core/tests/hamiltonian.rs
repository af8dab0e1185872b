use std::f64::consts::TAU;

use num_complex::Complex64 as C64;
use proptest::prelude::*;

use bathsim::device::{
    default_bell_scenario, default_w_scenario, Amplitude, Lifetime, RamanDrive, ResonatorFrame, ScenarioConfig,
};
use bathsim::hamiltonian::{
    build_collapse_set, build_dispersive, build_jaynes_cummings, collapse_set, dispersive_shift_simple,
    dispersive_shift_transmon, jc_dispersive_shift, HamiltonianModel,
};
use bathsim::linalg::hermitian_eigen;

/// One transmon with its resonator, weakly driven so both models share the
/// resonator frame.
fn single_qubit(g_mhz: f64, chi_mhz: f64) -> ScenarioConfig {
    let mut cfg = default_bell_scenario();
    cfg.qubits.truncate(1);
    cfg.resonators.truncate(1);
    cfg.qubits[0].working_freq_mhz = None;
    cfg.resonators[0].g_mhz = Some(g_mhz);
    cfg.resonators[0].chi_mhz = Some(chi_mhz);
    cfg.j_mhz.clear();
    cfg.pumps.clear();
    cfg.raman = vec![RamanDrive { resonator: 0, detuning_mhz: 10.0, amplitude_mhz: Some(1e-7), n_bar: None }];
    cfg.truncation.qubit_dim = 3;
    cfg.truncation.resonator_dim = 4;
    cfg.stark_compensation = false;
    cfg.resonator_frame = ResonatorFrame::Lab;
    cfg.initial_state = bathsim::device::InitialState::Named("g".into());
    cfg.target = "e".into();
    cfg
}

/// `(E(e,1) − E(e,0)) − (E(g,1) − E(g,0))` in MHz, from dressed levels
/// picked by largest overlap with the bare state.
fn conditional_resonator_shift(model: &HamiltonianModel) -> f64 {
    let (e, u) = hermitian_eigen(&model.h.matrix().to_dense());
    let space = &model.layout.space;
    let level = |q: usize, n: usize| {
        let idx = space.index_of(&[q, n]).unwrap();
        let k = (0..e.len()).max_by(|&a, &b| u[(idx, a)].norm_sqr().total_cmp(&u[(idx, b)].norm_sqr())).unwrap();
        e[k] / TAU
    };
    (level(1, 1) - level(1, 0)) - (level(0, 1) - level(0, 0))
}

fn is_diagonal(model: &HamiltonianModel) -> bool {
    model.h.matrix().triplets().all(|(r, c, v)| r == c || v.norm() == 0.0)
}

#[test]
fn bell_model_shape() {
    let cfg = default_bell_scenario();
    let m = build_dispersive(&cfg).unwrap();
    assert_eq!(m.layout.space.dims(), vec![2, 2, 4, 4]);
    assert_eq!(m.h.hermiticity_error(), 0.0);
    assert_eq!(m.frame.qubit_mhz, 4207.0);
    // resonators rotate at the Raman drive frequency
    assert_eq!(m.frame.resonators_mhz, vec![(0, 6471.0), (1, 6594.0)]);
}

#[test]
fn idle_resonators_are_dropped_unless_kept() {
    let mut cfg = default_w_scenario();
    assert_eq!(build_dispersive(&cfg).unwrap().layout.resonators, vec![1, 2]);
    cfg.truncation.keep_idle_resonators = true;
    assert_eq!(build_dispersive(&cfg).unwrap().layout.resonators, vec![0, 1, 2]);
}

#[test]
fn zero_couplings_give_diagonal_hamiltonian() {
    for mut cfg in [default_bell_scenario(), default_w_scenario()] {
        cfg.j_mhz.iter_mut().for_each(|j| *j = 0.0);
        cfg.pumps.clear();
        cfg.raman.iter_mut().for_each(|r| r.n_bar = Some(0.0));
        cfg.truncation.keep_idle_resonators = true;
        for frame in [ResonatorFrame::Displaced, ResonatorFrame::Lab] {
            cfg.resonator_frame = frame;
            assert!(is_diagonal(&build_dispersive(&cfg).unwrap()));
        }
    }
}

#[test]
fn uncoupled_jc_matches_dispersive_without_shift() {
    let mut cfg = default_bell_scenario();
    let f = 4207.0;
    for (k, r) in cfg.resonators.iter_mut().enumerate() {
        r.g_mhz = Some(0.0);
        r.chi_mhz = Some(0.0);
        cfg.raman[k].detuning_mhz = r.omega_r_mhz - f;
        cfg.raman[k].n_bar = None;
        cfg.raman[k].amplitude_mhz = Some(0.2 + 0.1 * k as f64);
    }
    cfg.pumps[0].frequency_mhz = f;
    cfg.resonator_frame = ResonatorFrame::Lab;
    cfg.truncation.keep_idle_resonators = true;
    let jc = build_jaynes_cummings(&cfg).unwrap();
    let disp = build_dispersive(&cfg).unwrap();
    assert_eq!(jc.layout.space.dims(), disp.layout.space.dims());
    let diff = jc.h.matrix().to_dense().max_abs_diff(&disp.h.matrix().to_dense());
    assert!(diff < 1e-9, "{diff}");
}

#[test]
fn jc_shift_against_perturbative_formulas() {
    let (wq, alpha, wr) = (4202.0, -197.0, 6481.0);
    let delta = wr - wq;
    for g in [40.0, 80.0, 146.6] {
        let exact = jc_dispersive_shift(wq, alpha, wr, g).unwrap();
        let transmon = dispersive_shift_transmon(alpha, g, delta);
        let simple = dispersive_shift_simple(alpha, g, delta);
        assert!(exact < 0.0);
        assert!((exact - transmon).abs() / transmon.abs() < 0.05, "{g}: {exact} vs {transmon}");
        assert!((exact - simple).abs() / simple.abs() < 0.10, "{g}: {exact} vs {simple}");
    }
}

#[test]
fn jc_and_dispersive_conditional_shifts_agree() {
    let g = 146.6;
    let chi = jc_dispersive_shift(4202.0, -197.0, 6481.0, g).unwrap();
    let cfg = single_qubit(g, chi);
    let jc_gap = conditional_resonator_shift(&build_jaynes_cummings(&cfg).unwrap());
    let disp_gap = conditional_resonator_shift(&build_dispersive(&cfg).unwrap());
    assert!((disp_gap - 2.0 * chi).abs() < 1e-6, "{disp_gap} vs {}", 2.0 * chi);
    assert!((jc_gap - disp_gap).abs() / disp_gap.abs() < 0.05, "{jc_gap} vs {disp_gap}");
}

#[test]
fn jc_refuses_several_drive_frequencies() {
    let mut cfg = default_bell_scenario();
    cfg.resonators.iter_mut().for_each(|r| r.g_mhz = Some(100.0));
    assert!(build_jaynes_cummings(&cfg).is_err());
    // and needs g everywhere
    cfg.resonators[1].g_mhz = None;
    assert!(build_jaynes_cummings(&cfg).is_err());
}

#[test]
fn collapse_rates_convert_units() {
    let cfg = default_bell_scenario();
    let set = build_collapse_set(&cfg).unwrap();
    let rate = |label: &str| set.iter().find(|c| c.label == label).map(|c| c.rate);
    assert!((rate("kappa_R1").unwrap() - TAU * 1.1).abs() < 1e-12);
    assert!((rate("kappa_R2").unwrap() - TAU * 0.87).abs() < 1e-12);
    assert!((rate("gamma1_Q1").unwrap() - 1.0 / 27.0).abs() < 1e-15);
    assert!((rate("gamma_phi_Q1").unwrap() - 1.0 / 14.0).abs() < 1e-15);
    assert!((rate("gamma_phi_Q2").unwrap() - 1.0 / 28.0).abs() < 1e-15);
    assert_eq!(set.len(), 6);
}

#[test]
fn infinite_t1_is_omitted() {
    let mut cfg = default_bell_scenario();
    cfg.qubits[0].t1_us = Lifetime::INFINITE;
    cfg.qubits[1].t_phi_us = Some(Lifetime::INFINITE);
    let labels: Vec<String> = build_collapse_set(&cfg).unwrap().into_iter().map(|c| c.label).collect();
    assert!(!labels.contains(&"gamma1_Q1".to_string()));
    assert!(!labels.contains(&"gamma_phi_Q2".to_string()));
    assert!(labels.contains(&"gamma1_Q2".to_string()));
    assert_eq!(labels.len(), 4);
}

#[test]
fn second_pump_splits_relaxation_by_frequency_group() {
    let cfg = bathsim::device::default_bell_pump2_scenario();
    let model = build_dispersive(&cfg).unwrap();
    assert_eq!(model.manifold_offsets_mhz.len(), 3);
    let set = collapse_set(&cfg, &model).unwrap();
    // each qubit's relaxation appears as one part per excitation step
    let parts = set.iter().filter(|c| c.label.starts_with("gamma1_Q1_part")).count();
    assert_eq!(parts, 2);
    let b = bathsim::hilbert::lowering_op(&model.layout.space, 0).unwrap().into_matrix().to_dense();
    let mut sum = bathsim::linalg::DenseMatrix::zeros(b.nrows(), b.ncols());
    for c in set.iter().filter(|c| c.label.starts_with("gamma1_Q1_part")) {
        sum = sum.add(&c.op.matrix().to_dense());
    }
    assert!(sum.max_abs_diff(&b) < 1e-15);
}

fn random_bell(
    chi: (f64, f64),
    kappa: (f64, f64),
    nbar: (f64, f64),
    det: f64,
    pump: (f64, f64),
    lab: bool,
) -> ScenarioConfig {
    let mut cfg = default_bell_scenario();
    cfg.resonators[0].chi_mhz = Some(chi.0);
    cfg.resonators[1].chi_mhz = Some(chi.1);
    cfg.resonators[0].kappa_mhz = kappa.0;
    cfg.resonators[1].kappa_mhz = kappa.1;
    cfg.raman[0].n_bar = Some(nbar.0);
    cfg.raman[1].n_bar = Some(nbar.1);
    cfg.raman[0].detuning_mhz = det;
    cfg.pumps[0].amplitudes_mhz = vec![Amplitude(C64::new(pump.0, pump.1)), Amplitude(C64::new(-pump.0, 0.0))];
    cfg.truncation.resonator_dim = 3;
    if lab {
        cfg.resonator_frame = ResonatorFrame::Lab;
    }
    cfg
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dispersive_hamiltonian_is_hermitian(
        chi in (-2.0f64..2.0, -2.0f64..2.0),
        kappa in (0.1f64..3.0, 0.1f64..3.0),
        nbar in (0.0f64..3.0, 0.0f64..3.0),
        det in -20.0f64..20.0,
        pump in (-1.0f64..1.0, -1.0f64..1.0),
        lab in any::<bool>(),
    ) {
        let cfg = random_bell(chi, kappa, nbar, det, pump, lab);
        let m = build_dispersive(&cfg).unwrap();
        prop_assert!(m.h.hermiticity_error() <= 1e-12);
        for c in collapse_set(&cfg, &m).unwrap() {
            prop_assert!(c.rate > 0.0);
        }
    }
}
