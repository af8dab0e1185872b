//! Lindblad master equation: Liouvillian construction, adaptive time
//! evolution and steady states.
//!
//! Density matrices are vectorized by stacking columns,
//! `vec(ρ)[r + c·d] = ρ[r, c]`, so `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)` and
//!
//! `L = −i (I⊗H − Hᵀ⊗I) + Σ γ [C*⊗C − ½ I⊗C†C − ½ (C†C)ᵀ⊗I]`.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::device::SteadyMethod;
use crate::error::{Error, Result};
use crate::hamiltonian::Collapse;
use crate::hilbert::{CompositeSpace, DensityMatrix, LinearOperator};
use crate::linalg::{DenseMatrix, SparseMatrix};

/// Largest `d²` for which `SteadyMethod::Auto` picks the sparse linear solve.
pub const NULLSPACE_MAX_DIM2: usize = 40_000;

#[derive(Clone, Debug)]
pub struct Liouvillian {
    space: Arc<CompositeSpace>,
    dim: usize,
    matrix: SparseMatrix,
    spectral_bound: f64,
}

fn kron_identity_left(d: usize, a: &SparseMatrix, scale: C64, out: &mut Vec<(usize, usize, C64)>) {
    // I ⊗ A
    for block in 0..d {
        for (r, c, v) in a.triplets() {
            out.push((block * d + r, block * d + c, v * scale));
        }
    }
}

fn kron_identity_right(d: usize, a: &SparseMatrix, scale: C64, out: &mut Vec<(usize, usize, C64)>) {
    // A ⊗ I
    for (r, c, v) in a.triplets() {
        for k in 0..d {
            out.push((r * d + k, c * d + k, v * scale));
        }
    }
}

/// Builds `L` for `H` and a set of collapse operators.
pub fn build_liouvillian(h: &LinearOperator, collapse: &[Collapse]) -> Result<Liouvillian> {
    let space = h.space().clone();
    let d = space.total_dim();
    let i = C64::new(0.0, 1.0);
    let mut trip = Vec::new();
    kron_identity_left(d, h.matrix(), -i, &mut trip);
    kron_identity_right(d, &h.matrix().transpose(), i, &mut trip);
    for c in collapse {
        if **c.op.space() != *space {
            return Err(Error::Dimension(format!("collapse operator `{}` lives on another space", c.label)));
        }
        if c.rate < 0.0 {
            return Err(Error::InvalidParameter(format!("negative rate for `{}`", c.label)));
        }
        if c.rate == 0.0 {
            continue;
        }
        let g = C64::new(c.rate, 0.0);
        let cm = c.op.matrix();
        let cdc = cm.adjoint().matmul(cm);
        let conj = cm.conj();
        for (r1, c1, a) in conj.triplets() {
            for (r2, c2, b) in cm.triplets() {
                trip.push((r1 * d + r2, c1 * d + c2, a * b * g));
            }
        }
        kron_identity_left(d, &cdc, -0.5 * g, &mut trip);
        kron_identity_right(d, &cdc.transpose(), -0.5 * g, &mut trip);
    }
    let matrix = SparseMatrix::from_triplets(d * d, d * d, trip);
    let spectral_bound = (0..d * d).map(|r| matrix.row(r).map(|(_, v)| v.norm()).sum::<f64>()).fold(0.0, f64::max);
    Ok(Liouvillian { space, dim: d, matrix, spectral_bound })
}

impl Liouvillian {
    pub fn space(&self) -> &Arc<CompositeSpace> {
        &self.space
    }

    /// Hilbert-space dimension `d`; the superoperator is `d² × d²`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    /// Gershgorin bound on the spectral radius (largest absolute row sum).
    pub fn spectral_bound(&self) -> f64 {
        self.spectral_bound
    }

    pub fn apply(&self, rho_vec: &[C64]) -> Vec<C64> {
        self.matrix.matvec(rho_vec)
    }

    pub fn apply_into(&self, rho_vec: &[C64], out: &mut [C64]) {
        self.matrix.matvec_into(rho_vec, out)
    }

    /// `L(ρ)` as a matrix.
    pub fn apply_matrix(&self, rho: &DenseMatrix) -> DenseMatrix {
        DenseMatrix::unvectorize(&self.apply(&rho.vectorize()), self.dim)
    }

    /// Largest `|Tr L(E_rc)|` over the matrix units `E_rc`; zero for a
    /// trace-preserving generator.
    pub fn trace_preservation_error(&self) -> f64 {
        // Tr L(E_rc) is the sum of column (r + c d) over the diagonal rows
        let d = self.dim;
        let mut col_sums = vec![C64::default(); d * d];
        for k in 0..d {
            let row = k * (d + 1);
            for (c, v) in self.matrix.row(row) {
                col_sums[c] += v;
            }
        }
        col_sums.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Max-norm of `L(ρ)`.
    pub fn residual(&self, rho: &DenseMatrix) -> f64 {
        self.apply(&rho.vectorize()).iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// A Hermitian observable sampled as `Re Tr(O ρ)`.
#[derive(Clone, Debug)]
pub struct Observable {
    pub name: String,
    pub op: LinearOperator,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvolveOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Evolution aborts if the minimum eigenvalue drops below `-positivity_tol`.
    pub positivity_tol: f64,
    /// Compute the minimum eigenvalue at every sample (costs one dense
    /// eigen-decomposition per sample).
    pub check_positivity: bool,
    /// Grid times at which full density matrices are kept.
    pub snapshot_times: Vec<f64>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-7,
            atol: 1e-9,
            max_steps: 2_000_000,
            positivity_tol: 1e-6,
            check_positivity: true,
            snapshot_times: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableTrace {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvolutionDiagnostics {
    pub max_trace_error: f64,
    pub max_hermiticity_error: f64,
    pub min_eigenvalue: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub rhs_evaluations: usize,
}

#[derive(Clone, Debug)]
pub struct EvolutionResult {
    pub times: Vec<f64>,
    pub observables: Vec<ObservableTrace>,
    pub snapshots: Vec<(f64, DensityMatrix)>,
    pub final_state: DensityMatrix,
    pub diagnostics: EvolutionDiagnostics,
}

impl EvolutionResult {
    pub fn observable(&self, name: &str) -> Option<&[f64]> {
        self.observables.iter().find(|o| o.name == name).map(|o| o.values.as_slice())
    }
}

// Dormand–Prince 5(4) tableau
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
/// `h |λ| ≤ STABLE_RADIUS` keeps every eigenvalue of the left half plane
/// inside the stability region of the 5th-order solution, whose largest
/// inscribed left half-disc has radius ≈ 0.997. Without this cap, weakly
/// damped high-frequency modes seeded by round-off grow unnoticed by the
/// error estimate until they reach the tolerance.
const STABLE_RADIUS: f64 = 0.95;
// dense output (Hairer's continuous extension)
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

struct Sampler<'a> {
    d: usize,
    observables: Vec<(String, Vec<(usize, usize, C64)>)>,
    traces: Vec<Vec<f64>>,
    opts: &'a EvolveOptions,
    diag: EvolutionDiagnostics,
    snapshots: Vec<(f64, DensityMatrix)>,
    space: Arc<CompositeSpace>,
}

impl Sampler<'_> {
    fn record(&mut self, t: f64, y: &[C64]) -> Result<()> {
        let d = self.d;
        for (k, (_, trip)) in self.observables.iter().enumerate() {
            let mut acc = C64::default();
            for &(r, c, v) in trip {
                acc += v * y[c + r * d];
            }
            self.traces[k].push(acc.re);
        }
        let trace: C64 = (0..d).map(|i| y[i * (d + 1)]).sum();
        let mut herm: f64 = 0.0;
        for r in 0..d {
            for c in 0..r {
                herm = herm.max((y[r + c * d] - y[c + r * d].conj()).norm());
            }
            herm = herm.max(y[r * (d + 1)].im.abs());
        }
        self.diag.max_trace_error = self.diag.max_trace_error.max((trace - 1.0).norm());
        self.diag.max_hermiticity_error = self.diag.max_hermiticity_error.max(herm);
        let want_snapshot = self.opts.snapshot_times.iter().any(|&s| (s - t).abs() <= 1e-9 * (1.0 + t.abs()));
        if self.opts.check_positivity || want_snapshot {
            let rho = DenseMatrix::unvectorize(y, d);
            if self.opts.check_positivity {
                let min = rho.hermitian_eigenvalues()[0];
                self.diag.min_eigenvalue = self.diag.min_eigenvalue.min(min);
                if min < -self.opts.positivity_tol {
                    return Err(Error::Positivity { t, min_eigenvalue: min });
                }
            }
            if want_snapshot {
                self.snapshots.push((t, DensityMatrix::new(self.space.clone(), rho)?));
            }
        }
        Ok(())
    }
}

fn rms_error(err: &[C64], y0: &[C64], y1: &[C64], rtol: f64, atol: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..err.len() {
        let sc = atol + rtol * y0[i].norm().max(y1[i].norm());
        acc += (err[i].norm() / sc).powi(2);
    }
    (acc / err.len() as f64).sqrt()
}

/// Integrates `dρ/dt = L(ρ)` from `t_grid[0]` with an adaptive
/// Dormand–Prince 5(4) pair, sampling observables on `t_grid` through the
/// method's continuous extension.
pub fn evolve(
    l: &Liouvillian,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    opts: &EvolveOptions,
    observables: &[Observable],
) -> Result<EvolutionResult> {
    if **rho0.space() != *l.space {
        return Err(Error::Dimension("initial state and Liouvillian live on different spaces".into()));
    }
    if t_grid.is_empty() || t_grid.windows(2).any(|w| w[1] < w[0]) || !t_grid.iter().all(|t| t.is_finite()) {
        return Err(Error::InvalidParameter("time grid must be finite, nonempty and nondecreasing".into()));
    }
    for o in observables {
        if **o.op.space() != *l.space {
            return Err(Error::Dimension(format!("observable `{}` lives on another space", o.name)));
        }
    }
    let d = l.dim;
    let n = d * d;
    let mut sampler = Sampler {
        d,
        observables: observables.iter().map(|o| (o.name.clone(), o.op.matrix().triplets().collect())).collect(),
        traces: vec![Vec::with_capacity(t_grid.len()); observables.len()],
        opts,
        diag: EvolutionDiagnostics { min_eigenvalue: f64::INFINITY, ..Default::default() },
        snapshots: Vec::new(),
        space: l.space.clone(),
    };

    let mut t = t_grid[0];
    let t_end = *t_grid.last().expect("nonempty grid");
    let mut y = rho0.matrix().vectorize();
    let mut next = 0;
    while next < t_grid.len() && t_grid[next] <= t {
        sampler.record(t_grid[next], &y)?;
        next += 1;
    }

    let f = |x: &[C64], out: &mut [C64]| l.apply_into(x, out);
    let mut k1 = vec![C64::default(); n];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut k5 = k1.clone();
    let mut k6 = k1.clone();
    let mut k7 = k1.clone();
    let mut ys = k1.clone();
    let mut y5 = k1.clone();
    let mut err = k1.clone();
    f(&y, &mut k1);
    sampler.diag.rhs_evaluations += 1;

    // initial step from the size of the derivative
    let norm = |v: &[C64]| {
        let s: f64 = v
            .iter()
            .zip(&y)
            .map(|(a, b)| (a.norm() / (opts.atol + opts.rtol * b.norm())).powi(2))
            .sum();
        (s / n as f64).sqrt()
    };
    let (d0, d1) = (norm(&y), norm(&k1));
    let h_stable = if l.spectral_bound > 0.0 { STABLE_RADIUS / l.spectral_bound } else { f64::INFINITY };
    let mut h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h = h.min(h_stable).min((t_end - t).max(1e-12));

    let mut steps = 0usize;
    while next < t_grid.len() {
        if steps >= opts.max_steps {
            return Err(Error::StepBudget(opts.max_steps));
        }
        steps += 1;
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        if h <= 1e-13 * t.abs().max(1.0) && !last {
            return Err(Error::StepUnderflow { t, h });
        }
        for i in 0..n {
            ys[i] = y[i] + h * A21 * k1[i];
        }
        f(&ys, &mut k2);
        for i in 0..n {
            ys[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        f(&ys, &mut k3);
        for i in 0..n {
            ys[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        f(&ys, &mut k4);
        for i in 0..n {
            ys[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        f(&ys, &mut k5);
        for i in 0..n {
            ys[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        f(&ys, &mut k6);
        for i in 0..n {
            y5[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        f(&y5, &mut k7);
        sampler.diag.rhs_evaluations += 6;
        for i in 0..n {
            err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let e = rms_error(&err, &y, &y5, opts.rtol, opts.atol);
        if !e.is_finite() {
            return Err(Error::StepUnderflow { t, h });
        }
        if e <= 1.0 {
            let t_new = if last { t_end } else { t + h };
            // samples inside (t, t_new] from the continuous extension
            while next < t_grid.len() && t_grid[next] <= t_new {
                let theta = if h > 0.0 { (t_grid[next] - t) / h } else { 1.0 };
                let theta1 = 1.0 - theta;
                for i in 0..n {
                    let ydiff = y5[i] - y[i];
                    let bspl = h * k1[i] - ydiff;
                    let r4 = ydiff - h * k7[i] - bspl;
                    let r5 = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
                    ys[i] = y[i] + theta * (ydiff + theta1 * (bspl + theta * (r4 + theta1 * r5)));
                }
                sampler.record(t_grid[next], &ys)?;
                next += 1;
            }
            t = t_new;
            std::mem::swap(&mut y, &mut y5);
            std::mem::swap(&mut k1, &mut k7);
            sampler.diag.accepted_steps += 1;
            let factor = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) };
            h = (h * factor).min(h_stable);
        } else {
            sampler.diag.rejected_steps += 1;
            h *= (0.9 * e.powf(-0.2)).clamp(0.2, 1.0);
        }
    }

    let final_state = DensityMatrix::new(l.space.clone(), DenseMatrix::unvectorize(&y, d))?;
    if !opts.check_positivity {
        sampler.diag.min_eigenvalue = final_state.matrix().hermitian_eigenvalues()[0];
    }
    let Sampler { traces, diag, snapshots, observables: obs, .. } = sampler;
    Ok(EvolutionResult {
        times: t_grid.to_vec(),
        observables: obs.into_iter().zip(traces).map(|((name, _), values)| ObservableTrace { name, values }).collect(),
        snapshots,
        final_state,
        diagnostics: diag,
    })
}

/// Evenly spaced grid `0, step, …, t_final` (the last point is `t_final`).
pub fn uniform_grid(t_final: f64, step: f64) -> Vec<f64> {
    let n = (t_final / step).round() as usize;
    let mut g: Vec<f64> = (0..=n).map(|k| k as f64 * step).collect();
    if let Some(last) = g.last_mut() {
        *last = t_final;
    }
    g
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SteadyMethodUsed {
    Nullspace,
    LongTime,
}

#[derive(Clone, Debug)]
pub struct SteadyState {
    pub rho: DensityMatrix,
    /// Max-norm of `L(ρ)`.
    pub residual: f64,
    pub method: SteadyMethodUsed,
    /// Total evolution time for the long-time method.
    pub evolution_time_us: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct SteadyOptions {
    pub method: SteadyMethod,
    /// Residual tolerance.
    pub tol: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Long-time method: give up after this much evolution.
    pub max_time_us: f64,
    /// Long-time method: residual is checked after every chunk of this length.
    pub chunk_us: f64,
    /// Long-time method: starting state (maximally mixed if absent).
    pub initial: Option<DensityMatrix>,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        Self {
            method: SteadyMethod::Auto,
            tol: 1e-8,
            rtol: 1e-9,
            atol: 1e-11,
            max_time_us: 5000.0,
            chunk_us: 5.0,
            initial: None,
        }
    }
}

/// Solves `L ρ = 0` with `Tr ρ = 1`, or evolves to stationarity.
pub fn steady_state(l: &Liouvillian, opts: &SteadyOptions) -> Result<SteadyState> {
    let method = match opts.method {
        SteadyMethod::Auto if l.dim * l.dim <= NULLSPACE_MAX_DIM2 => SteadyMethod::Nullspace,
        SteadyMethod::Auto => SteadyMethod::LongTime,
        m => m,
    };
    match method {
        SteadyMethod::Nullspace => steady_nullspace(l, opts.tol),
        _ => steady_long_time(l, opts),
    }
}

fn steady_nullspace(l: &Liouvillian, tol: f64) -> Result<SteadyState> {
    use faer::sparse::{SparseColMat, Triplet};
    use faer::linalg::solvers::Solve;

    let d = l.dim;
    let n = d * d;
    let mut trip: Vec<Triplet<usize, usize, C64>> = l
        .matrix
        .triplets()
        .filter(|&(r, _, _)| r != 0)
        .map(|(r, c, v)| Triplet::new(r, c, v))
        .collect();
    trip.extend((0..d).map(|k| Triplet::new(0, k * (d + 1), C64::new(1.0, 0.0))));
    let a = SparseColMat::<usize, C64>::try_new_from_triplets(n, n, &trip)
        .map_err(|e| Error::SteadyStateConvergence(format!("matrix assembly failed: {e:?}")))?;
    let lu = a
        .sp_lu()
        .map_err(|e| Error::MultipleSteadyStates(format!("constrained Liouvillian is singular ({e:?})")))?;
    let mut rhs = faer::Mat::<C64>::zeros(n, 1);
    rhs[(0, 0)] = C64::new(1.0, 0.0);
    lu.solve_in_place(rhs.as_mut());
    let x: Vec<C64> = (0..n).map(|i| rhs[(i, 0)]).collect();
    if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::MultipleSteadyStates("linear solve produced non-finite values".into()));
    }
    let mut rho = DenseMatrix::unvectorize(&x, d);
    // remove the anti-Hermitian rounding component
    rho = rho.add(&rho.adjoint()).scale(C64::new(0.5, 0.0));
    let residual = l.residual(&rho);
    let scale = rho.max_abs();
    if scale > 1.0 + 1e-6 || residual > tol.max(1e-6) {
        return Err(Error::MultipleSteadyStates(format!(
            "solution is not a unique physical state (max entry {scale:.3e}, residual {residual:.3e})"
        )));
    }
    Ok(SteadyState {
        rho: DensityMatrix::new(l.space.clone(), rho)?,
        residual,
        method: SteadyMethodUsed::Nullspace,
        evolution_time_us: None,
    })
}

fn steady_long_time(l: &Liouvillian, opts: &SteadyOptions) -> Result<SteadyState> {
    let mut rho = match &opts.initial {
        Some(r) => r.clone(),
        None => DensityMatrix::maximally_mixed(&l.space),
    };
    let evolve_opts = EvolveOptions {
        rtol: opts.rtol,
        atol: opts.atol,
        check_positivity: false,
        ..Default::default()
    };
    let mut elapsed = 0.0;
    loop {
        let residual = l.residual(rho.matrix());
        if residual < opts.tol {
            return Ok(SteadyState {
                rho,
                residual,
                method: SteadyMethodUsed::LongTime,
                evolution_time_us: Some(elapsed),
            });
        }
        if elapsed >= opts.max_time_us {
            return Err(Error::SteadyStateConvergence(format!(
                "residual {residual:.3e} after {elapsed} us of evolution"
            )));
        }
        let res = evolve(l, &rho, &[0.0, opts.chunk_us], &evolve_opts, &[])?;
        rho = res.final_state;
        elapsed += opts.chunk_us;
    }
}
