//! Three-level effective model of two-qubit Bell stabilization.
//!
//! The levels are `|gg⟩, |S⟩, |T⟩`. The pump couples `|gg⟩ ↔ |S⟩`, the
//! engineered bath moves `|S⟩ → |T⟩` at `Γs`, both excited levels decay to
//! `|gg⟩` at `Γ1`, and dephasing scatters `|T⟩ → |S⟩` at `Γφ`.

use std::f64::consts::TAU;

use argmin::core::{CostFunction, Executor, State};
use argmin::solver::neldermead::NelderMead;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::Collapse;
use crate::hilbert::{CompositeSpace, DensityMatrix, LinearOperator, ModeSpec};
use crate::linalg::SparseMatrix;
use crate::lindblad::{build_liouvillian, evolve, EvolutionResult, EvolveOptions, Liouvillian, Observable};

pub const GG: usize = 0;
pub const S: usize = 1;
pub const T: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThreeLevelParams {
    /// Pump amplitude, linear MHz.
    pub omega_p_mhz: f64,
    pub gamma1: f64,
    pub gamma_phi: f64,
    pub gamma_s: f64,
}

impl ThreeLevelParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.omega_p_mhz, self.gamma1, self.gamma_phi, self.gamma_s];
        if all.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParameter(format!("three-level parameters must be finite and >= 0: {self:?}")));
        }
        if all.iter().all(|v| *v == 0.0) {
            return Err(Error::InvalidParameter("all three-level parameters are zero".into()));
        }
        Ok(())
    }
}

/// Closed-form steady-state population of `|T⟩`.
pub fn exact_fidelity(p: &ThreeLevelParams) -> Result<f64> {
    p.validate()?;
    let o2 = (TAU * p.omega_p_mhz).powi(2);
    let (g1, gp, gs) = (p.gamma1, p.gamma_phi, p.gamma_s);
    let den = o2 * (2.0 * g1 + 2.0 * gp + gs)
        + g1.powi(3)
        + 2.0 * g1 * g1 * gs
        + g1 * gs * gs
        + g1 * g1 * gp
        + g1 * gs * gp;
    if !(den > 0.0) {
        return Err(Error::InvalidParameter(format!("steady state is not unique for {p:?}")));
    }
    Ok(o2 * gs / den)
}

/// Strong-pump limit `(Γs/2) / (Γ1 + Γφ + Γs/2)`.
pub fn approx_fidelity(gamma1: f64, gamma_phi: f64, gamma_s: f64) -> f64 {
    0.5 * gamma_s / (gamma1 + gamma_phi + 0.5 * gamma_s)
}

/// Back-of-envelope estimate `(Γs − mean(Γ1) − Γφ) / Γs` from time
/// constants in μs; infinite times contribute zero rate.
pub fn experiment_estimate(t_s_us: f64, t1_us: &[f64], t_phi_us: f64) -> Result<f64> {
    let positive = |v: f64| v > 0.0 && !v.is_nan();
    if !positive(t_s_us) || !positive(t_phi_us) || t1_us.is_empty() || !t1_us.iter().all(|&t| positive(t)) {
        return Err(Error::InvalidParameter("time constants must be positive".into()));
    }
    let gs = 1.0 / t_s_us;
    let g1 = t1_us.iter().map(|t| 1.0 / t).sum::<f64>() / t1_us.len() as f64;
    Ok((gs - g1 - 1.0 / t_phi_us) / gs)
}

fn three_level_space() -> std::sync::Arc<CompositeSpace> {
    CompositeSpace::new(vec![ModeSpec::qubit("level", 3)]).expect("static space")
}

fn unit(space: &std::sync::Arc<CompositeSpace>, to: usize, from: usize, scale: f64) -> LinearOperator {
    let m = SparseMatrix::from_triplets(3, 3, vec![(to, from, C64::new(scale, 0.0))]);
    LinearOperator::new(space.clone(), m).expect("3x3")
}

/// Lindbladian of the three-level model, `H = (Ω/2)(|gg⟩⟨S| + h.c.)`.
pub fn three_level_liouvillian(p: &ThreeLevelParams) -> Result<Liouvillian> {
    p.validate()?;
    let space = three_level_space();
    let half = 0.5 * TAU * p.omega_p_mhz;
    let h = unit(&space, GG, S, half).add(&unit(&space, S, GG, half))?;
    let collapse = vec![
        Collapse { label: "decay_T".into(), op: unit(&space, GG, T, 1.0), rate: p.gamma1 },
        Collapse { label: "decay_S".into(), op: unit(&space, GG, S, 1.0), rate: p.gamma1 },
        Collapse { label: "bath".into(), op: unit(&space, T, S, 1.0), rate: p.gamma_s },
        Collapse { label: "dephasing".into(), op: unit(&space, S, T, 1.0), rate: p.gamma_phi },
    ];
    build_liouvillian(&h, &collapse)
}

/// Evolves the three-level model from diagonal populations `(gg, S, T)`,
/// returning `(P_gg, P_S, P_T)` on `times`.
pub fn simulate_three_level(p: &ThreeLevelParams, populations: [f64; 3], times: &[f64]) -> Result<[Vec<f64>; 3]> {
    let l = three_level_liouvillian(p)?;
    let space = l.space().clone();
    let total: f64 = populations.iter().sum();
    if !(total > 0.0) || populations.iter().any(|v| *v < 0.0) {
        return Err(Error::InvalidParameter("initial populations must be nonnegative with positive sum".into()));
    }
    let rho = crate::linalg::DenseMatrix::from_fn(3, 3, |r, c| {
        if r == c {
            C64::new(populations[r] / total, 0.0)
        } else {
            C64::default()
        }
    });
    let rho = DensityMatrix::new(space.clone(), rho)?;
    let obs: Vec<Observable> = ["gg", "S", "T"]
        .iter()
        .enumerate()
        .map(|(k, n)| Observable { name: (*n).into(), op: unit(&space, k, k, 1.0) })
        .collect();
    let opts = EvolveOptions { rtol: 1e-9, atol: 1e-11, check_positivity: false, ..Default::default() };
    let res = evolve(&l, &rho, times, &opts, &obs)?;
    let mut it = res.observables.into_iter().map(|o| o.values);
    Ok([it.next().unwrap(), it.next().unwrap(), it.next().unwrap()])
}

/// Result of fitting the three-level model to a trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThreeLevelFit {
    pub params: ThreeLevelParams,
    /// Root-mean-square population residual.
    pub residual: f64,
    pub iterations: u64,
}

/// Names of the population traces consumed by [`fit_three_level`].
#[derive(Clone, Debug)]
pub struct PopulationNames {
    pub gg: String,
    pub s: String,
    pub t: String,
}

impl Default for PopulationNames {
    fn default() -> Self {
        Self { gg: "pop_gg".into(), s: "pop_S".into(), t: "pop_T".into() }
    }
}

#[derive(Clone, Copy)]
struct FitCost<'a> {
    times: &'a [f64],
    data: [&'a [f64]; 3],
    start: [f64; 3],
}

const LOG_FLOOR: f64 = -25.0;

fn params_from_log(x: &[f64]) -> ThreeLevelParams {
    let e = |v: f64| if v <= LOG_FLOOR { 0.0 } else { v.exp() };
    ThreeLevelParams { omega_p_mhz: e(x[0]), gamma1: e(x[1]), gamma_phi: e(x[2]), gamma_s: e(x[3]) }
}

impl CostFunction for FitCost<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        if x.iter().any(|v| !v.is_finite() || *v > 8.0) {
            return Ok(f64::INFINITY);
        }
        let p = params_from_log(&x.iter().map(|v| v.max(LOG_FLOOR)).collect::<Vec<_>>());
        let sim = match simulate_three_level(&p, self.start, self.times) {
            Ok(s) => s,
            Err(_) => return Ok(f64::INFINITY),
        };
        let mut acc = 0.0;
        for (model, data) in sim.iter().zip(self.data) {
            acc += model.iter().zip(data).map(|(m, d)| (m - d).powi(2)).sum::<f64>();
        }
        Ok(acc)
    }
}

/// Least-squares fit of the three-level model to the `|gg⟩, |S⟩, |T⟩`
/// populations of a trajectory. The model starts from the trajectory's
/// first populations.
pub fn fit_three_level(result: &EvolutionResult, names: &PopulationNames, guess: &ThreeLevelParams) -> Result<ThreeLevelFit> {
    let get = |n: &str| {
        result
            .observable(n)
            .ok_or_else(|| Error::Fit(format!("trajectory has no `{n}` population trace")))
    };
    let data = [get(&names.gg)?, get(&names.s)?, get(&names.t)?];
    if result.times.len() < 5 {
        return Err(Error::Fit("need at least 5 samples".into()));
    }
    let t0 = result.times[0];
    let times: Vec<f64> = result.times.iter().map(|t| t - t0).collect();
    let start = [data[0][0].max(0.0), data[1][0].max(0.0), data[2][0].max(0.0)];
    let cost = FitCost { times: &times, data, start };

    let floor = 1e-6;
    let x0: Vec<f64> = [guess.omega_p_mhz, guess.gamma1, guess.gamma_phi, guess.gamma_s]
        .iter()
        .map(|v| v.max(floor).ln())
        .collect();
    let mut best = (x0, f64::INFINITY, 0u64);
    // a few restarts shrink the simplex around the incumbent
    for (round, step) in [1.0, 0.3, 0.05].into_iter().enumerate() {
        let mut simplex = vec![best.0.clone()];
        for i in 0..4 {
            let mut v = best.0.clone();
            v[i] += step;
            simplex.push(v);
        }
        let solver = NelderMead::new(simplex)
            .with_sd_tolerance(1e-14)
            .map_err(|e| Error::Fit(e.to_string()))?;
        let res = Executor::new(cost, solver)
            .configure(|s| s.max_iters(if round == 0 { 1500 } else { 800 }))
            .run()
            .map_err(|e| Error::Fit(e.to_string()))?;
        let state = res.state();
        let x = state.get_best_param().cloned().ok_or_else(|| Error::Fit("no parameters".into()))?;
        let c = state.get_best_cost();
        if c <= best.1 {
            best = (x, c, best.2 + state.get_iter());
        } else {
            best.2 += state.get_iter();
        }
    }
    if !best.1.is_finite() {
        return Err(Error::Fit("three-level fit did not converge".into()));
    }
    let n = (3 * times.len()) as f64;
    Ok(ThreeLevelFit {
        params: params_from_log(&best.0.iter().map(|v| v.max(LOG_FLOOR)).collect::<Vec<_>>()),
        residual: (best.1 / n).sqrt(),
        iterations: best.2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lossless_limit_is_perfect() {
        for (o, gs) in [(0.1, 0.3), (2.0, 5.0), (0.53, 1.1)] {
            let p = ThreeLevelParams { omega_p_mhz: o, gamma1: 0.0, gamma_phi: 0.0, gamma_s: gs };
            assert!((exact_fidelity(&p).unwrap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn strong_pump_limit() {
        let (g1, gp, gs) = (0.04, 0.05, 1.3);
        let p = ThreeLevelParams { omega_p_mhz: 1e6, gamma1: g1, gamma_phi: gp, gamma_s: gs };
        let limit = gs / (2.0 * g1 + 2.0 * gp + gs);
        assert!((exact_fidelity(&p).unwrap() - limit).abs() < 1e-9);
    }

    #[test]
    fn all_zero_rejected() {
        let p = ThreeLevelParams { omega_p_mhz: 0.0, gamma1: 0.0, gamma_phi: 0.0, gamma_s: 0.0 };
        assert!(exact_fidelity(&p).is_err());
    }

    #[test]
    fn approx_examples() {
        assert_eq!(approx_fidelity(0.0, 0.0, 1.0), 1.0);
        let f = approx_fidelity(1.0 / 27.0, 1.0 / 18.0, 2.0);
        assert!((f - 1.0 / (1.0 / 27.0 + 1.0 / 18.0 + 1.0)).abs() < 1e-12);
        assert!((f - 0.9152).abs() < 1e-4);
    }

    #[test]
    fn estimate_examples() {
        let f = experiment_estimate(0.9, &[27.0, 27.0], 18.0).unwrap();
        assert!((f - 0.9167).abs() < 5e-5);
        let inf = f64::INFINITY;
        assert_eq!(experiment_estimate(0.9, &[inf, inf], inf).unwrap(), 1.0);
        assert!(experiment_estimate(18.0, &[inf], 18.0).unwrap().abs() < 1e-15);
        assert!(experiment_estimate(0.0, &[27.0], 18.0).is_err());
        assert!(experiment_estimate(0.9, &[-1.0], 18.0).is_err());
    }
}
