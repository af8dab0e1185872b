use proptest::prelude::*;

use bathsim::device::SteadyMethod;
use bathsim::effective::{
    approx_fidelity, exact_fidelity, experiment_estimate, fit_three_level, simulate_three_level,
    three_level_liouvillian, PopulationNames, ThreeLevelParams, T,
};
use bathsim::hilbert::{DensityMatrix, LinearOperator};
use bathsim::linalg::{DenseMatrix, SparseMatrix};
use bathsim::lindblad::{evolve, steady_state, uniform_grid, EvolutionResult, EvolveOptions, Observable, SteadyOptions};
use num_complex::Complex64 as C64;

fn params(omega: f64, g1: f64, gphi: f64, gs: f64) -> ThreeLevelParams {
    ThreeLevelParams { omega_p_mhz: omega, gamma1: g1, gamma_phi: gphi, gamma_s: gs }
}

/// Trajectory of the three-level model with population traces named as the
/// fit expects.
fn trajectory(p: &ThreeLevelParams, start: usize, t_final: f64) -> EvolutionResult {
    let l = three_level_liouvillian(p).unwrap();
    let space = l.space().clone();
    let proj = |k: usize| {
        let m = SparseMatrix::from_triplets(3, 3, vec![(k, k, C64::new(1.0, 0.0))]);
        LinearOperator::new(space.clone(), m).unwrap()
    };
    let rho = DenseMatrix::from_fn(3, 3, |r, c| if r == start && c == start { C64::new(1.0, 0.0) } else { C64::default() });
    let rho = DensityMatrix::new(space.clone(), rho).unwrap();
    let names = PopulationNames::default();
    let obs: Vec<Observable> = [&names.gg, &names.s, &names.t]
        .iter()
        .enumerate()
        .map(|(k, n)| Observable { name: n.to_string(), op: proj(k) })
        .collect();
    let opts = EvolveOptions { rtol: 1e-10, atol: 1e-12, ..Default::default() };
    evolve(&l, &rho, &uniform_grid(t_final, 0.1), &opts, &obs).unwrap()
}

#[test]
fn fidelity_monotone_on_a_grid() {
    let omegas = [0.05, 0.2, 0.53, 1.0, 3.0];
    let g1s = [0.0, 0.01, 1.0 / 27.0, 0.1, 0.3];
    let gphis = [0.0, 0.02, 1.0 / 18.0, 0.2];
    let gss = [0.3, 1.1, 3.0];
    for &gs in &gss {
        for &gp in &gphis {
            for &g1 in &g1s {
                let f: Vec<f64> = omegas.iter().map(|&o| exact_fidelity(&params(o, g1, gp, gs)).unwrap()).collect();
                assert!(f.windows(2).all(|w| w[1] >= w[0] - 1e-12), "omega: {f:?}");
                assert!(f.iter().all(|v| (0.0..=1.0).contains(v)));
            }
            for &o in &omegas {
                let f: Vec<f64> = g1s.iter().map(|&g1| exact_fidelity(&params(o, g1, gp, gs)).unwrap()).collect();
                assert!(f.windows(2).all(|w| w[1] < w[0]), "gamma1: {f:?}");
            }
        }
        for &o in &omegas {
            for &g1 in &g1s[1..] {
                let f: Vec<f64> = gphis.iter().map(|&gp| exact_fidelity(&params(o, g1, gp, gs)).unwrap()).collect();
                assert!(f.windows(2).all(|w| w[1] < w[0]), "gamma_phi: {f:?}");
            }
        }
    }
}

#[test]
fn approximation_ladder() {
    let gs = 1.0 / 0.9;
    let lossless = approx_fidelity(0.0, 0.0, gs);
    let t1_only = approx_fidelity(1.0 / 27.0, 0.0, gs);
    let both = approx_fidelity(1.0 / 27.0, 1.0 / 18.0, gs);
    assert_eq!(lossless, 1.0);
    assert!(lossless > t1_only && t1_only > both);
    assert!((both - 0.5 * gs / (1.0 / 27.0 + 1.0 / 18.0 + 0.5 * gs)).abs() < 1e-15);
    let est = experiment_estimate(0.9, &[27.0, 27.0], 18.0).unwrap();
    assert!((est - 0.9167).abs() < 5e-5);
}

#[test]
fn approximation_holds_for_strong_pumps() {
    for &gs in &[0.3, 1.1, 3.0] {
        for &g1 in &[0.0, 1.0 / 27.0, 0.1] {
            for &gp in &[0.0, 1.0 / 18.0, 0.1] {
                // pump Rabi rate at least ten times the bath rate
                let omega = 10.0 * gs / std::f64::consts::TAU;
                for o in [omega, 2.0 * omega, 5.0 * omega] {
                    let exact = exact_fidelity(&params(o, g1, gp, gs)).unwrap();
                    let approx = approx_fidelity(g1, gp, gs);
                    assert!((exact - approx).abs() < 0.01, "{o} {g1} {gp} {gs}: {exact} vs {approx}");
                }
            }
        }
    }
}

#[test]
fn simulation_relaxes_to_the_closed_form() {
    let p = params(0.53, 1.0 / 27.0, 1.0 / 18.0, 1.1);
    let traj = simulate_three_level(&p, [1.0, 0.0, 0.0], &[0.0, 200.0]).unwrap();
    let exact = exact_fidelity(&p).unwrap();
    assert!((traj[T][1] - exact).abs() < 1e-7);
    let sums: Vec<f64> = (0..2).map(|i| traj[0][i] + traj[1][i] + traj[2][i]).collect();
    assert!(sums.iter().all(|s| (s - 1.0).abs() < 1e-10));
    assert!(simulate_three_level(&p, [0.0, 0.0, 0.0], &[0.0, 1.0]).is_err());
}

#[test]
fn fit_recovers_its_own_parameters() {
    let truth = params(0.53, 1.0 / 27.0, 1.0 / 18.0, 1.1);
    let traj = trajectory(&truth, 0, 12.0);
    let guess = params(0.4, 0.05, 0.04, 1.5);
    let fit = fit_three_level(&traj, &PopulationNames::default(), &guess).unwrap();
    let rel = |a: f64, b: f64| (a - b).abs() / b;
    let p = fit.params;
    assert!(rel(p.omega_p_mhz, truth.omega_p_mhz) < 0.01, "{p:?}");
    assert!(rel(p.gamma1, truth.gamma1) < 0.01, "{p:?}");
    assert!(rel(p.gamma_phi, truth.gamma_phi) < 0.01, "{p:?}");
    assert!(rel(p.gamma_s, truth.gamma_s) < 0.01, "{p:?}");
    assert!(fit.residual < 1e-4);
}

#[test]
fn fit_of_pure_decay_finds_no_bath() {
    let truth = params(0.0, 0.2, 0.0, 0.0);
    let traj = trajectory(&truth, 1, 15.0);
    let fit = fit_three_level(&traj, &PopulationNames::default(), &params(0.3, 0.1, 0.05, 0.5)).unwrap();
    assert!(fit.params.gamma_s < 1e-3, "{:?}", fit.params);
    assert!((fit.params.gamma1 - 0.2).abs() / 0.2 < 0.01, "{:?}", fit.params);
    assert!(fit.residual < 1e-4);
}

#[test]
fn fit_reports_missing_traces() {
    let traj = trajectory(&params(0.5, 0.1, 0.1, 1.0), 0, 1.0);
    let names = PopulationNames { gg: "nope".into(), ..Default::default() };
    assert!(fit_three_level(&traj, &names, &params(0.5, 0.1, 0.1, 1.0)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn closed_form_is_a_probability(o in 0.0f64..5.0, g1 in 0.0f64..1.0, gp in 0.0f64..1.0, gs in 0.01f64..5.0) {
        prop_assume!(o > 1e-3 || g1 > 1e-3);
        let f = exact_fidelity(&params(o, g1, gp, gs)).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
        let approx = approx_fidelity(g1, gp, gs);
        // a finite pump can only do worse than the strong-pump limit
        prop_assert!(f <= approx + 1e-12);
    }

    #[test]
    fn closed_form_matches_liouvillian_null_vector(o in 0.05f64..3.0, g1 in 0.005f64..0.5, gp in 0.0f64..0.5, gs in 0.05f64..5.0) {
        let p = params(o, g1, gp, gs);
        let l = three_level_liouvillian(&p).unwrap();
        let ss = steady_state(&l, &SteadyOptions { method: SteadyMethod::Nullspace, ..Default::default() }).unwrap();
        let pt = ss.rho.matrix()[(T, T)].re;
        prop_assert!((pt - exact_fidelity(&p).unwrap()).abs() <= 1e-10);
    }
}
