//! Least-squares fit of `a + b·e^{−k t}`.
//!
//! For fixed `k` the model is linear in `(a, b)`, so the fit reduces to a
//! one-dimensional search over `ln k` (variable projection): a log-spaced
//! scan brackets the minimum, then Brent's method refines it.

use argmin::core::{CostFunction, Executor, State};
use argmin::solver::brent::BrentOpt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpFit {
    /// Decay rate `k = 1/τ`, μs⁻¹.
    pub rate: f64,
    /// Time constant `τ`, μs.
    pub tau: f64,
    pub asymptote: f64,
    pub amplitude: f64,
    /// Root-mean-square residual.
    pub residual: f64,
}

/// Best `(a, b, sse)` for a fixed rate.
fn linear_part(times: &[f64], values: &[f64], k: f64) -> (f64, f64, f64) {
    let n = times.len() as f64;
    let (mut se, mut see, mut sy, mut sey) = (0.0, 0.0, 0.0, 0.0);
    for (&t, &y) in times.iter().zip(values) {
        let e = (-k * t).exp();
        se += e;
        see += e * e;
        sy += y;
        sey += e * y;
    }
    let det = n * see - se * se;
    let (a, b) = if det.abs() > 1e-300 {
        ((see * sy - se * sey) / det, (n * sey - se * sy) / det)
    } else {
        (sy / n, 0.0)
    };
    let sse = times
        .iter()
        .zip(values)
        .map(|(&t, &y)| (y - a - b * (-k * t).exp()).powi(2))
        .sum();
    (a, b, sse)
}

struct Profile<'a> {
    times: &'a [f64],
    values: &'a [f64],
}

impl CostFunction for Profile<'_> {
    type Param = f64;
    type Output = f64;

    fn cost(&self, log_k: &f64) -> std::result::Result<f64, argmin::core::Error> {
        Ok(linear_part(self.times, self.values, log_k.exp()).2)
    }
}

/// Fits `a + b·e^{−k t}` to samples; needs at least five points.
pub fn fit_exponential(times: &[f64], values: &[f64]) -> Result<ExpFit> {
    if times.len() != values.len() {
        return Err(Error::Dimension("times and values differ in length".into()));
    }
    if times.len() < 5 {
        return Err(Error::Fit(format!("need at least 5 points, got {}", times.len())));
    }
    if times.iter().chain(values).any(|v| !v.is_finite()) {
        return Err(Error::Fit("non-finite samples".into()));
    }
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    if hi - lo <= 1e-12 * (1.0 + hi.abs()) {
        return Err(Error::DegenerateData("samples are constant".into()));
    }
    let t0 = times.iter().cloned().fold(f64::INFINITY, f64::min);
    let span = times.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - t0;
    if !(span > 0.0) {
        return Err(Error::DegenerateData("all samples share one time".into()));
    }
    // shift the origin so the amplitude is well conditioned
    let shifted: Vec<f64> = times.iter().map(|t| t - t0).collect();
    let profile = Profile { times: &shifted, values };

    let (lk_min, lk_max) = ((1e-3 / span).ln(), (1e3 / span).ln());
    let n_scan = 121;
    let grid: Vec<f64> = (0..n_scan).map(|i| lk_min + (lk_max - lk_min) * i as f64 / (n_scan - 1) as f64).collect();
    let costs: Vec<f64> = grid.iter().map(|lk| linear_part(&shifted, values, lk.exp()).2).collect();
    let best = costs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("nonempty scan");
    if best == 0 || best == n_scan - 1 {
        return Err(Error::Fit("no exponential time scale inside the sampled window".into()));
    }
    let solver = BrentOpt::new(grid[best - 1], grid[best + 1]).set_tolerance(1e-12, 1e-14);
    let res = Executor::new(profile, solver)
        .configure(|s| s.param(grid[best]).max_iters(200))
        .run()
        .map_err(|e| Error::Fit(e.to_string()))?;
    let log_k = *res.state().get_best_param().ok_or_else(|| Error::Fit("Brent search returned nothing".into()))?;
    let k = log_k.exp();
    let (a, b, sse) = linear_part(&shifted, values, k);
    Ok(ExpFit {
        rate: k,
        tau: 1.0 / k,
        asymptote: a,
        // amplitude referred back to the caller's time origin
        amplitude: b * (k * t0).exp(),
        residual: (sse / values.len() as f64).sqrt(),
    })
}
